import json
import os
from pathlib import Path
from typing import Any, Dict

import typer
from rich.console import Console

DEFAULT_CONFIG: Dict[str, Any] = {
    "t_min": 10.0,
    "eps_lambda": 1e-8,
    "degeneracy_tol": 1e-6,
    "ode_rtol": 1e-10,
    "ode_atol": 1e-12,
    "quad_panels": 32,
    "quad_order": 16,
    "residual_h": 1e-3,
    "splitstep_dt": 1e-3,
    "splitstep_points": 4096,
    "threads": 1,
}


def data_dir() -> Path:
    """Workspace directory holding the config file and the run journal."""
    return Path(os.environ.get("NMKDV_HOME", Path.home() / ".nmkdv"))


def config_file() -> Path:
    return data_dir() / "config.json"


def load_config() -> dict:
    path = config_file()
    if not path.exists():
        return DEFAULT_CONFIG.copy()
    try:
        with path.open("r") as f:
            return {**DEFAULT_CONFIG, **json.load(f)}
    except json.JSONDecodeError:
        return DEFAULT_CONFIG.copy()


def save_config(config_data: dict):
    data_dir().mkdir(parents=True, exist_ok=True)
    with config_file().open("w") as f:
        json.dump(config_data, f, indent=2, sort_keys=True)


def run_config(command: str, **params: Any) -> dict:
    """Merged defaults plus command parameters; embedded verbatim in every output file."""
    return {"command": command, "defaults": load_config(), "params": params}


def run_setup_wizard():
    console = Console()
    console.print("\n[bold cyan]nmkdv setup[/bold cyan]")
    console.print("Numerical defaults used by every command. Re-run 'nmkdv setup' to change them.\n")

    config = load_config()

    config["t_min"] = typer.prompt("Smallest admissible time for asymptotics", default=config["t_min"], type=float)
    config["eps_lambda"] = typer.prompt("Soliton activity threshold on |Re(2i theta)|", default=config["eps_lambda"], type=float)
    config["degeneracy_tol"] = typer.prompt("Saddle degeneracy tolerance on |theta''|", default=config["degeneracy_tol"], type=float)
    config["ode_rtol"] = typer.prompt("Jost ODE relative tolerance", default=config["ode_rtol"], type=float)
    config["ode_atol"] = typer.prompt("Jost ODE absolute tolerance", default=config["ode_atol"], type=float)
    config["quad_panels"] = typer.prompt("Gauss-Legendre panels per arc", default=config["quad_panels"], type=int)
    config["quad_order"] = typer.prompt("Gauss-Legendre nodes per panel", default=config["quad_order"], type=int)
    config["residual_h"] = typer.prompt("Finite-difference step for PDE residuals", default=config["residual_h"], type=float)
    config["splitstep_dt"] = typer.prompt("Split-step time step", default=config["splitstep_dt"], type=float)
    config["splitstep_points"] = typer.prompt("Split-step grid points", default=config["splitstep_points"], type=int)
    config["threads"] = typer.prompt("Worker threads for spectral sweeps", default=config["threads"], type=int)

    save_config(config)
    console.print("\n[bold green]Configuration saved.[/bold green]\n")
