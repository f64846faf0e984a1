import csv
import json
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
from rich.table import Table

from .utils import console


# --- FILE WRITERS ---
def _plain(obj):
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, Path):
        return str(obj)
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def write_json(path: Path, payload: dict, config: dict) -> Path:
    """Sorted keys and no wall-clock data, so identical runs give identical bytes."""
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w") as f:
        json.dump({"config": config, **payload}, f, indent=2, sort_keys=True, default=_plain)
        f.write("\n")
    return path


def write_csv(path: Path, columns: Sequence[str], rows: Iterable[dict], config: dict) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as f:
        f.write("# config: " + json.dumps(config, sort_keys=True, default=_plain) + "\n")
        writer = csv.DictWriter(f, fieldnames=list(columns), extrasaction="ignore", lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow({k: repr(float(v)) if isinstance(v, (float, np.floating)) else v for k, v in row.items()})
    return path


def read_csv(path: Path) -> list[dict]:
    with Path(path).open("r", newline="") as f:
        lines = [line for line in f if not line.startswith("#")]
    return list(csv.DictReader(lines))


# --- TABLES ---
def _c(v: complex, digits: int = 6) -> str:
    v = complex(v)
    return f"{v.real:.{digits}f} {'+' if v.imag >= 0 else '-'} {abs(v.imag):.{digits}f}i"


def saddle_table(saddle) -> None:
    table = Table(title=f"Stationary points (xi = {saddle.xi:g})", header_style="bold magenta")
    table.add_column("i", style="bold yellow", justify="right")
    table.add_column("zeta", style="cyan")
    table.add_column("theta''", justify="right")
    table.add_column("sqrt(theta'')", justify="right")
    table.add_column("Newton its", justify="right", style="dim")
    for i, (z, dd, sq, it) in enumerate(zip(saddle.zeta, saddle.ddtheta_at, saddle.sqrt_ddtheta, saddle.iterations), start=1):
        table.add_row(str(i), _c(z), _c(dd, 4), _c(sq, 4), str(it))
    console.print(table)
    if saddle.degenerate:
        console.print("[yellow]⚠️  near-degenerate: theta'' is small at the stationary points[/yellow]")


def scattering_table(scat, diagnostics: dict) -> None:
    table = Table(title="Scattering data", header_style="bold magenta")
    table.add_column("Quantity", style="cyan")
    table.add_column("Value", justify="right")
    table.add_row("contour samples", str(len(scat.contour)))
    table.add_row("max |rho|", f"{np.max(np.abs(scat.rho)) if scat.rho.size else 0.0:.3e}")
    table.add_row("max |det s - 1|", f"{diagnostics.get('max_det_error', 0.0):.3e}")
    table.add_row("discrete eigenvalues", str(len(scat.poles)))
    for k, (eta, c) in enumerate(scat.poles, start=1):
        table.add_row(f"  eta_{k}", f"{_c(eta)}   c = {_c(c, 4)}")
    console.print(table)


def ray_table(results) -> None:
    table = Table(title="Long-time asymptotics", header_style="bold magenta")
    for name in ("xi", "t", "q_sol", "f", "q_asym", "active"):
        table.add_column(name, justify="right")
    for r in results:
        table.add_row(f"{r.xi:g}", f"{r.t:g}", f"{r.q_sol_term:.8f}", _c(r.f, 5), f"{r.q_asym:.8f}", str(r.active_poles))
    console.print(table)


def suite_table(report: dict) -> None:
    table = Table(title="Invariant suite", header_style="bold magenta")
    table.add_column("Check", style="cyan")
    table.add_column("Value", justify="right")
    table.add_column("Tol", justify="right", style="dim")
    table.add_column("Status")
    for entry in report["checks"]:
        status = "[green]✅ pass[/]" if entry["passed"] else "[red]❌ FAIL[/]"
        tol = "" if entry.get("tol") is None else f"{entry['tol']:.0e}"
        table.add_row(entry["name"], f"{entry['value']:.3e}", tol, status)
    console.print(table)


def runs_table(runs: list[dict], limit: int) -> None:
    if not runs:
        return console.print("[yellow]No runs have been recorded yet.[/yellow]")
    table = Table(title="Recorded runs", header_style="bold magenta")
    table.add_column("When", style="dim")
    table.add_column("Command", style="bold yellow")
    table.add_column("Exit", justify="center")
    table.add_column("Outputs", style="blue")
    for run in runs[-limit:]:
        code = run["exit_code"]
        colour = "green" if code == 0 else "red"
        table.add_row(run["timestamp"][:19], run["command"], f"[{colour}]{code}[/]", "\n".join(run["outputs"]) or "[dim].[/]")
    console.print(table)
