import logging
from contextlib import contextmanager
from pathlib import Path
from typing import Optional

import numpy as np
import typer

from . import fixtures
from .asymptotics import AsymptoticEngine
from .config import load_config, run_config, run_setup_wizard
from .errors import DomainError, NmkdvError
from .ledger import append_event, load_runs
from .phase import signature_table, stationary_points
from .report import (
    ray_table,
    read_csv,
    runs_table,
    saddle_table,
    scattering_table,
    suite_table,
    write_csv,
    write_json,
)
from .scattering import BoundaryData, InitialDatum, ScatteringData, contour_samples, discrete_spectrum, reflection_coefficients
from .soliton import ReflectionlessData, q_sol, q_sol_grid
from .utils import console, parse_floats, parse_grid, setup_logging
from .verify import decay_fit, pde_residual, splitstep_local_mkdv, symmetry_suite

log = logging.getLogger("nmkdv.cli")

app = typer.Typer(help="nmkdv: inverse scattering and long-time asymptotics for the nonlocal mKdV equation", add_completion=False)
verify_app = typer.Typer(help="Independent oracles: PDE residuals, decay fits, split-step evolution, invariant suite")


# --- GLOBAL OPTIONS ---
@app.callback(invoke_without_command=True)
def main(
    ctx: typer.Context,
    out_dir: Path = typer.Option(Path("."), "--out-dir", "-o", help="Directory for output files"),
    threads: Optional[int] = typer.Option(None, "--threads", "-j", help="Worker threads for spectral sweeps"),
    dump_intermediates: bool = typer.Option(False, "--dump-intermediates", help="Write saddle and beta intermediates as JSON"),
    verbose: bool = typer.Option(False, "--verbose", "-v", help="Debug logging"),
):
    """
    Every output file embeds the configuration that produced it; run records go
    to the journal in NMKDV_HOME.
    """
    setup_logging(verbose)
    cfg = load_config()
    ctx.obj = {
        "out_dir": out_dir,
        "threads": threads or cfg["threads"],
        "dump": dump_intermediates,
        "settings": cfg,
    }
    if ctx.invoked_subcommand is None:
        console.print(ctx.get_help())


@contextmanager
def recorded_run(ctx: typer.Context, command: str, **params):
    """Journals the run and maps library errors to exit codes."""
    run = {"command": command, "outputs": [], "summary": {}, "config": run_config(command, **params)}
    try:
        yield run
    except NmkdvError as exc:
        typer.secho(f"❌ {type(exc).__name__}: {exc}", fg="red", bold=True, err=True)
        append_event("RUN_RECORDED", {**run, "exit_code": exc.exit_code, "error": str(exc)})
        raise typer.Exit(code=exc.exit_code)
    except ValueError as exc:
        typer.secho(f"❌ {exc}", fg="red", bold=True, err=True)
        append_event("RUN_RECORDED", {**run, "exit_code": DomainError.exit_code, "error": str(exc)})
        raise typer.Exit(code=DomainError.exit_code)
    append_event("RUN_RECORDED", {**run, "exit_code": 0})


def _out(ctx: typer.Context, name: str) -> Path:
    return ctx.obj["out_dir"] / name


def _tag(v: float) -> str:
    return f"{v:g}".replace("-", "m")


def _load_poles(poles: Optional[Path], fixture: Optional[str]) -> ReflectionlessData:
    if poles is not None:
        return ReflectionlessData.load(poles)
    name = fixture or "one_pole"
    if name not in fixtures.POLE_REGISTRY:
        raise DomainError(f"unknown pole fixture {name!r}; choose from {', '.join(fixtures.POLE_REGISTRY)}")
    return fixtures.POLE_REGISTRY[name]()


# --- COMMANDS ---
@app.command(name="setup")
def setup():
    """Configure numerical defaults (tolerances, quadrature, threads)."""
    run_setup_wizard()


@app.command(name="phase")
def cmd_phase(
    ctx: typer.Context,
    xi: float = typer.Option(..., "--xi", help="Ray x/t"),
    grid: Optional[str] = typer.Option(None, "--grid", help="Signature grid lo:hi:n on both axes"),
):
    """Stationary points for a ray and the sign table of Re(2i theta)."""
    with recorded_run(ctx, "phase", xi=xi, grid=grid) as run:
        saddle = stationary_points(xi, degeneracy_tol=ctx.obj["settings"]["degeneracy_tol"])
        saddle_table(saddle)
        path = write_json(_out(ctx, f"saddles_xi{_tag(xi)}.json"), {"saddles": saddle.as_record()}, run["config"])
        run["outputs"].append(str(path))
        if grid:
            lo, hi, n = parse_grid(grid)
            z, sign = signature_table(xi, (lo, hi), (lo, hi), n)
            rows = ({"re_z": float(v.real), "im_z": float(v.imag), "sign": int(s)} for v, s in zip(z, sign))
            path = write_csv(_out(ctx, f"signature_xi{_tag(xi)}.csv"), ["re_z", "im_z", "sign"], rows, run["config"])
            run["outputs"].append(str(path))
        run["summary"] = {"zeta1": saddle.zeta[0], "degenerate": saddle.degenerate}
    typer.secho(f"✅ Wrote {len(run['outputs'])} file(s) to {ctx.obj['out_dir']}", fg="green")


@app.command(name="scatter")
def cmd_scatter(
    ctx: typer.Context,
    datum: Optional[Path] = typer.Argument(None, help="Initial datum JSON"),
    fixture: Optional[str] = typer.Option(None, "--fixture", "-f", help=f"Bundled datum: {', '.join(fixtures.REGISTRY)}"),
    n_circle: int = typer.Option(64, "--n-circle", help="Unit-circle samples (multiple of 4)"),
    poles: bool = typer.Option(True, "--poles/--no-poles", help="Locate the discrete spectrum"),
    r_inner: float = typer.Option(0.05, "--r-inner"),
    r_outer: float = typer.Option(20.0, "--r-outer"),
):
    """Reflection coefficients on the contour plus the discrete spectrum of a datum."""
    with recorded_run(ctx, "scatter", datum=datum, fixture=fixture, n_circle=n_circle, poles=poles,
                      r_inner=r_inner, r_outer=r_outer) as run:
        if datum is not None:
            q0 = InitialDatum.load(datum)
        elif fixture in fixtures.REGISTRY:
            q0 = fixtures.REGISTRY[fixture]()
        else:
            raise DomainError("give a datum path or one of --fixture " + ", ".join(fixtures.REGISTRY))
        s = ctx.obj["settings"]
        zs = contour_samples(n_circle)
        rho, rho_t, det_err = reflection_coefficients(q0, zs, ctx.obj["threads"], s["ode_rtol"], s["ode_atol"])
        spectrum = discrete_spectrum(q0, r_inner, r_outer, rtol=s["ode_rtol"], atol=s["ode_atol"]) if poles else []
        scat = ScatteringData(contour=zs, rho=rho, rho_tilde=rho_t, poles=spectrum)
        diagnostics = {"max_det_error": float(np.max(np.abs(det_err))) if det_err.size else 0.0,
                       "decay_gap": list(q0.decay_gap())}
        scattering_table(scat, diagnostics)
        path = write_json(_out(ctx, "scattering.json"), {**scat.to_json(), "diagnostics": diagnostics}, run["config"])
        run["outputs"].append(str(path))
        run["summary"] = {**diagnostics, "poles": len(spectrum)}
    typer.secho(f"✅ max |det s - 1| = {diagnostics['max_det_error']:.3e}", fg="green")


@app.command(name="soliton")
def cmd_soliton(
    ctx: typer.Context,
    poles: Optional[Path] = typer.Option(None, "--poles", help="Reflectionless pole data JSON"),
    fixture: Optional[str] = typer.Option(None, "--fixture", "-f", help=f"Bundled poles: {', '.join(fixtures.POLE_REGISTRY)}"),
    x_grid: str = typer.Option("-5:5:41", "--x-grid"),
    t_grid: str = typer.Option("-0.5:0.5:11", "--t-grid"),
):
    """N-soliton q_sol on an (x, t) grid."""
    with recorded_run(ctx, "soliton", poles=poles, fixture=fixture, x_grid=x_grid, t_grid=t_grid) as run:
        data = _load_poles(poles, fixture)
        xs, ts = np.linspace(*parse_grid(x_grid)), np.linspace(*parse_grid(t_grid))
        values = q_sol_grid(data, xs, ts, ctx.obj["threads"])
        rows = ({"x": float(x), "t": float(t), "q_sol": float(values[j, i])} for j, t in enumerate(ts) for i, x in enumerate(xs))
        run["outputs"].append(str(write_csv(_out(ctx, "soliton.csv"), ["x", "t", "q_sol"], rows, run["config"])))
        run["outputs"].append(str(write_json(_out(ctx, "poles.json"), data.to_json(), run["config"])))
        run["summary"] = {"poles": len(data), "max_abs_q": float(np.max(np.abs(values)))}
    typer.secho(f"✅ q_sol on {len(ts)} x {len(xs)} grid, max |q| = {run['summary']['max_abs_q']:.6f}", fg="green")


@app.command(name="asym")
def cmd_asym(
    ctx: typer.Context,
    xi: str = typer.Option(..., "--xi", help="Comma-separated rays"),
    t: str = typer.Option("100,1000,10000", "--t", help="Comma-separated times"),
    scattering: Optional[Path] = typer.Option(None, "--scattering", help="ScatteringData JSON (defaults to the radiation fixture)"),
    q_minus: float = typer.Option(1.0, "--q-minus"),
):
    """Leading-order q_asym = c q_sol - t^(-1/2) f along rays, with the t^(-1/2) envelope fit."""
    with recorded_run(ctx, "asym", xi=xi, t=t, scattering=scattering, q_minus=q_minus) as run:
        scat = ScatteringData.load(scattering) if scattering else fixtures.radiation_scattering()
        engine = AsymptoticEngine(scat, BoundaryData.from_minus(q_minus, 1), ctx.obj["settings"])
        rays, times = parse_floats(xi), parse_floats(t)
        results, fits = [], []
        for x_i in rays:
            rows = engine.ray(x_i, times)
            results.extend(rows)
            if len(times) >= 4:
                slope, err = decay_fit([(r.t, r.envelope) for r in rows])
            elif len(times) >= 2:
                slope, err = float(np.polyfit(np.log(times), np.log([r.envelope for r in rows]), 1)[0]), float("nan")
            else:
                slope, err = float("nan"), float("nan")
            fits.append({"xi": x_i, "slope": slope, "stderr": err})
        ray_table(results)
        cols = ["xi", "t", "q_sol", "re_f", "im_f", "q_asym", "envelope", "error_order"]
        run["outputs"].append(str(write_csv(_out(ctx, "asym.csv"), cols, (r.as_row() for r in results), run["config"])))
        run["outputs"].append(str(write_json(_out(ctx, "asym_fit.json"), {"fits": fits, "error_order": results[0].error_order if results else None}, run["config"])))
        if ctx.obj["dump"]:
            run["outputs"].append(str(write_json(_out(ctx, "asym_intermediates.json"), {"points": [r.intermediates() for r in results]}, run["config"])))
        run["summary"] = {"fits": fits}
    for fit in fits:
        typer.secho(f"✅ xi = {fit['xi']:g}: envelope slope {fit['slope']:.8f}", fg="green")


# --- VERIFY ---
@verify_app.command(name="residual")
def verify_residual(
    ctx: typer.Context,
    poles: Optional[Path] = typer.Option(None, "--poles"),
    fixture: Optional[str] = typer.Option(None, "--fixture", "-f"),
    x_grid: str = typer.Option("-4:4:40", "--x-grid"),
    t_grid: str = typer.Option("-0.5:0.5:40", "--t-grid"),
    h: Optional[float] = typer.Option(None, "--h", help="Stencil step for x and t"),
    tolerance: Optional[float] = typer.Option(None, "--tolerance", help="Fixed bound instead of the per-point stencil estimate"),
):
    """Finite-difference residual of q_sol in the nonlocal equation."""
    with recorded_run(ctx, "verify residual", poles=poles, fixture=fixture, x_grid=x_grid, t_grid=t_grid, h=h,
                      tolerance=tolerance) as run:
        data = _load_poles(poles, fixture)
        step = h or ctx.obj["settings"]["residual_h"]
        report = pde_residual(lambda x, t_: q_sol(data, x, t_), data.boundary.sigma,
                              np.linspace(*parse_grid(x_grid)), np.linspace(*parse_grid(t_grid)), step, step, ctx.obj["threads"])
        run["outputs"].append(str(write_csv(_out(ctx, "residual.csv"), ["x", "t", "r", "tol"], report.rows(), run["config"])))
        summary = report.summary()
        if tolerance is not None:
            summary.update(tolerance=tolerance, passed=report.max_residual < tolerance)
        run["outputs"].append(str(write_json(_out(ctx, "residual.json"), summary, run["config"])))
        run["summary"] = summary
    colour = "green" if summary["passed"] else "red"
    bound = summary.get("tolerance", summary["max_tolerance"])
    typer.secho(f"max residual {summary['max_residual']:.3e} (tolerance {bound:.1e})", fg=colour)
    if not summary["passed"]:
        raise typer.Exit(code=1)


@verify_app.command(name="decay")
def verify_decay(
    ctx: typer.Context,
    samples: Path = typer.Argument(..., help="CSV with a t column"),
    column: str = typer.Option("envelope", "--column", help="Value column to regress"),
):
    """Power-law exponent of |value| against t."""
    with recorded_run(ctx, "verify decay", samples=samples, column=column) as run:
        rows = read_csv(samples)
        if not rows or column not in rows[0]:
            raise DomainError(f"{samples} has no column {column!r}")
        exponent, stderr = decay_fit([(float(r["t"]), float(r[column])) for r in rows])
        payload = {"exponent": exponent, "stderr": stderr, "samples": len(rows)}
        run["outputs"].append(str(write_json(_out(ctx, "decay.json"), payload, run["config"])))
        run["summary"] = payload
    typer.secho(f"✅ exponent {exponent:.8f} ± {stderr:.2e}", fg="green")


@verify_app.command(name="evolve")
def verify_evolve(
    ctx: typer.Context,
    y: float = typer.Option(1.2, "--y", help="Imaginary pole seed i y of the one-soliton"),
    t0: float = typer.Option(0.0, "--t0"),
    duration: float = typer.Option(1.0, "--duration"),
    half_width: float = typer.Option(50.0, "--half-width", help="Window is [-L, L)"),
    points: Optional[int] = typer.Option(None, "--points"),
    dt: Optional[float] = typer.Option(None, "--dt"),
):
    """Split-step evolution of a one-soliton compared with the engine at t0 + duration."""
    with recorded_run(ctx, "verify evolve", y=y, t0=t0, duration=duration, half_width=half_width, points=points, dt=dt) as run:
        s = ctx.obj["settings"]
        n = points or s["splitstep_points"]
        data = fixtures.one_pole(y)
        x = -half_width + 2 * half_width * np.arange(n) / n
        start = np.array([q_sol(data, v, t0) for v in x])
        evo = splitstep_local_mkdv(start, x, (t0, t0 + duration), dt or s["splitstep_dt"], data.boundary.q_minus)
        exact = np.array([q_sol(data, v, t0 + duration) for v in x])
        payload = {"sup_error": float(np.max(np.abs(evo.q - exact))), "casimir_drift": evo.casimir_drift, "steps": evo.steps}
        run["outputs"].append(str(write_json(_out(ctx, "evolve.json"), payload, run["config"])))
        run["summary"] = payload
    typer.secho(f"✅ sup error {payload['sup_error']:.3e}, casimir drift {payload['casimir_drift']:.3e}", fg="green")


@verify_app.command(name="suite")
def verify_suite(
    ctx: typer.Context,
    reading: Optional[str] = typer.Option(None, "--reading", help="Override the beta exponent reading: nu or literal"),
    quick: bool = typer.Option(False, "--quick", help="Skip Jost-solution and residual checks"),
):
    """Runs every invariant check on the bundled fixtures."""
    with recorded_run(ctx, "verify suite", reading=reading, quick=quick) as run:
        report = symmetry_suite(reading=reading, full=not quick)
        suite_table(report)
        run["outputs"].append(str(write_json(_out(ctx, "suite.json"), report, run["config"])))
        run["summary"] = {"passed": report["passed"]}
    if not report["passed"]:
        typer.secho("❌ Some invariants failed", fg="red", bold=True)
        raise typer.Exit(code=1)
    typer.secho("✅ All invariants hold", fg="green", bold=True)


@app.command(name="runs")
def list_runs(limit: int = typer.Option(20, "--limit", "-n", help="Most recent runs to show")):
    """Recorded runs from the journal."""
    runs_table(load_runs(), limit)


app.add_typer(verify_app, name="verify")

if __name__ == "__main__":
    app()
