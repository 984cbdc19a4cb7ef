import csv
import io
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
from rich.table import Table  # noqa: E402

from .models import ErrorRow, ErrorSurface, TailProfile  # noqa: E402
from .utils import console, dumps  # noqa: E402

SURFACE_HEADER = ["d", "N", "mean_error", "std_error", "replicates", "seed"]


def _fmt(value: float) -> str:
    return repr(float(value))


def surface_to_csv(surface: ErrorSurface) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(SURFACE_HEADER)
    for row in sorted(surface.rows, key=lambda r: (r.d, r.N)):
        writer.writerow([row.d, row.N, _fmt(row.mean_error), _fmt(row.std_error), row.replicates, row.seed])
    return buffer.getvalue()


def _write_text(path: str | Path, text: str) -> Path:
    path = Path(path)
    try:
        with open(path, "w", encoding="utf-8", newline="") as f:
            f.write(text)
    except OSError as e:
        raise OSError(e.errno, f"cannot write {path}: {e.strerror}") from e
    return path


def emit_csv(surface: ErrorSurface, path: str | Path) -> Path:
    """Write the error surface as UTF-8 CSV, rows sorted by (d, N)."""
    return _write_text(path, surface_to_csv(surface))


def read_csv(path: str | Path) -> ErrorSurface:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise OSError(e.errno, f"cannot read {path}: {e.strerror}") from e
    reader = csv.DictReader(io.StringIO(text))
    rows = [
        ErrorRow(
            d=int(r["d"]),
            N=int(r["N"]),
            mean_error=float(r["mean_error"]),
            std_error=float(r["std_error"]),
            replicates=int(r["replicates"]),
            seed=int(r["seed"]),
        )
        for r in reader
    ]
    return ErrorSurface(rows=tuple(rows))


def emit_plot(surface: ErrorSurface, path: str | Path) -> Path:
    """
    Log-log plot of mean error against N, one line per dimension, as SVG.

    Nonpositive errors cannot sit on a log axis and are left out.
    """
    path = Path(path)
    matplotlib.rcParams["svg.hashsalt"] = "scenariopac"
    fig, ax = plt.subplots(figsize=(6.4, 4.8))
    try:
        for d in surface.dims():
            points = [(row.N, row.mean_error) for row in surface.for_dim(d) if row.mean_error > 0]
            if not points:
                continue
            ns, errors = zip(*points)
            ax.plot(ns, errors, marker="o", label=f"d = {d}")
        ax.set_xscale("log")
        ax.set_yscale("log")
        ax.set_xlabel("number of scenarios N")
        ax.set_ylabel("mean error J* - J_N")
        if ax.get_lines():
            ax.legend()
        try:
            fig.savefig(path, format="svg", metadata={"Date": None})
        except OSError as e:
            raise OSError(e.errno, f"cannot write {path}: {e.strerror}") from e
    finally:
        plt.close(fig)
    return path


def profile_to_csv(profile: TailProfile) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    n = profile.grid.shape[1]
    columns = ["x"] if n == 1 else [f"x{i}" for i in range(n)]
    writer.writerow(columns + ["t_hat"])
    for point, t in zip(profile.grid, profile.t_hat):
        writer.writerow([_fmt(v) for v in point] + [_fmt(t)])
    return buffer.getvalue()


def emit_profile_csv(profile: TailProfile, path: str | Path) -> Path:
    return _write_text(path, profile_to_csv(profile))


def format_surface(surface: ErrorSurface, format_type: str):
    if format_type == "console":
        return _format_console_surface(surface)
    elif format_type == "csv":
        return surface_to_csv(surface)
    elif format_type == "json":
        return dumps({"rows": [row for row in surface.rows]})


def _format_console_surface(surface: ErrorSurface):
    table = Table(title="Scenario approximation error")
    for column in SURFACE_HEADER:
        table.add_column(column, justify="right")
    for row in surface.rows:
        table.add_row(str(row.d), str(row.N), f"{row.mean_error:.6g}", f"{row.std_error:.3g}",
                      str(row.replicates), str(row.seed))
    console.print(table)


def format_plans(plans, format_type: str):
    if format_type == "json":
        return dumps({"plans": list(plans)})
    if format_type == "csv":
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(["family", "n_required", "raw"])
        for p in plans:
            writer.writerow([p.family, p.n_required, _fmt(p.raw)])
        return buffer.getvalue()

    for p in plans:
        console.print(f"[green]✓[/green] {p.family}: [bold]{p.n_required}[/bold] samples (raw {p.raw:.6g})")
        details = ", ".join(f"{k}={v:.6g}" if isinstance(v, float) else f"{k}={v}" for k, v in p.intermediates.items())
        console.print(f"[dim]  {details}[/dim]")


def format_covering(rows, format_type: str):
    if format_type == "json":
        return dumps({"rows": [{"epsilon": b.radius, "q": b.q_effective, "log_value": b.log_value} for b in rows]})
    if format_type == "csv":
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(["epsilon", "q", "log_value"])
        for b in rows:
            writer.writerow([_fmt(b.radius), b.q_effective, _fmt(b.log_value)])
        return buffer.getvalue()

    table = Table(title="Covering-number bounds")
    for column in ("epsilon", "q", "ln N(eps)"):
        table.add_column(column, justify="right")
    for b in rows:
        table.add_row(f"{b.radius:.6g}", str(b.q_effective), f"{b.log_value:.6g}")
    console.print(table)


def format_solution(solution, error: float | None, format_type: str):
    if format_type == "json":
        return dumps({"solution": solution, "error": error})
    if format_type == "csv":
        return "value,minimizer,N,seed,error\n" + ",".join([
            _fmt(solution.value),
            " ".join(_fmt(v) for v in solution.minimizer),
            str(solution.sample_size),
            str(solution.seed),
            "" if error is None else _fmt(error),
        ]) + "\n"

    console.print(f"[green]✓[/green] J_N = [bold]{solution.value:.10g}[/bold] at x = {list(solution.minimizer)}")
    console.print(f"[dim]  N={solution.sample_size} · seed={solution.seed} · refined={solution.refined}[/dim]")
    if error is not None:
        console.print(f"[dim]  error J* - J_N = {error:.6g}[/dim]")


def format_diagnosis(profiles, verdicts, format_type: str):
    if format_type == "json":
        return dumps({
            "profiles": [
                {
                    "epsilon": p.epsilon,
                    "tau_hat": p.tau_hat,
                    "argmin": p.argmin,
                    "mc_samples": p.mc_samples,
                    "seed": p.seed,
                    "reference_value": p.reference_value,
                    "reference_source": p.reference_source,
                }
                for p in profiles
            ],
            "verdicts": list(verdicts),
        })

    for p in profiles:
        console.print(f"[green]✓[/green] tau_hat({p.epsilon:g}) = [bold]{p.tau_hat:.6g}[/bold] at x = {list(p.argmin)}")
    for v in verdicts:
        taus = ", ".join(f"{t:.3g}" for t in v.tau_hat)
        if v.flag == "suspected_obstruction":
            console.print(f"[yellow]⚠[/yellow] eps={v.epsilon:g}: suspected obstruction to consistency ({taus})")
        else:
            console.print(f"[green]✓[/green] eps={v.epsilon:g}: no evidence of an obstruction ({taus})")
