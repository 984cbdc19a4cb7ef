import argparse
import math
import os
import sys
import time
from pathlib import Path

from dotenv import load_dotenv

from .covering import covering_table
from .diagnostics import (
    DEFAULT_TAIL_GRID_POINTS,
    inf_tail_probability,
    inf_worst_case_tail,
    obstruction_report,
)
from .engine import error_vs_true, solve_scenario
from .errors import InconsistentRegimeError, InputError, UnavailableError
from .experiment import default_grid, run_error_surface
from .models import ExperimentSpec, MinimizerConfig, PlanResult, SmoothTorusSpec, TrigClassSpec
from .output import (
    emit_csv,
    emit_plot,
    format_covering,
    format_diagnosis,
    format_plans,
    format_solution,
    format_surface,
    profile_to_csv,
)
from .planner import compare_plans, convex_plan, convex_sample_bound, plan_generic, plan_smooth, plan_trig
from .problems import BUILTIN_PROBLEMS, RAMP_DEFAULT_BOUND, build_problem, trig_toy
from .sampling import sample
from .utils import debug_log, env_int, err_console, load_json_config

load_dotenv()

DESK_SCALE_LIMIT = 100_000
PLAN_FAMILIES = ("trig", "smooth", "generic", "convex", "binomial", "compare")

DEFAULTS = {
    "problem": "infnorm_cube",
    "dim": [1],
    "samples": [1000],
    "replicates": 25,
    "seed": 0,
    "epsilon": [0.5],
    "beta": 0.1,
    "mc_samples": 10_000,
    "out": None,
    "format": None,
    "workers": 1,
    "grid_points": 2001,
    "full_scale": False,
    "bound": RAMP_DEFAULT_BOUND,
    "tau": None,
    "tau_wc": None,
    "family": "trig",
    "order": 1,
    "smoothness": 1,
    "l2_bound": 1.0,
    "deriv_bound": math.pi,
    "log_covering": None,
    "n_dim": 1,
    "expansions": [1.0, 2.0, 4.0, 8.0],
    "threshold": None,
    "plot": None,
}

COMMAND_DEFAULTS = {
    "diagnose": {"problem": "ramp_gaussian", "epsilon": [1.0], "bound": 2.0, "grid_points": DEFAULT_TAIL_GRID_POINTS},
    "cover": {"epsilon": [0.5, 0.25, 0.125]},
    "plan": {"grid_points": DEFAULT_TAIL_GRID_POINTS},
    "experiment": {"dim": None, "samples": None},
}

LIST_OPTIONS = {"dim", "samples", "epsilon", "expansions"}
FORMATS = ("csv", "json")
INT_OPTIONS = {"dim", "samples", "replicates", "seed", "mc_samples", "workers", "grid_points", "order",
               "smoothness", "n_dim"}
FLOAT_OPTIONS = {"epsilon", "beta", "bound", "tau", "tau_wc", "l2_bound", "deriv_bound", "log_covering",
                 "expansions", "threshold"}


def _add_common_flags(parser: argparse.ArgumentParser):
    parser.add_argument("--config", type=Path, default=None, help="JSON file mirroring these flags")
    parser.add_argument("--problem", choices=BUILTIN_PROBLEMS, default=None, help="Built-in problem")
    parser.add_argument("--dim", type=int, nargs="+", default=None, help="Uncertainty (or class) dimension(s)")
    parser.add_argument("--samples", type=int, nargs="+", default=None, help="Number(s) of scenarios N")
    parser.add_argument("--replicates", type=int, default=None, help="Replicates per (d, N) (default: 25)")
    parser.add_argument("--seed", type=int, default=None, help="Master seed (default: 0)")
    parser.add_argument("--epsilon", type=float, nargs="+", default=None, help="Accuracy level(s)")
    parser.add_argument("--beta", type=float, default=None, help="Confidence parameter in (0, 1)")
    parser.add_argument("--mc-samples", type=int, default=None, help="Monte Carlo scenarios per tail estimate")
    parser.add_argument("--out", type=Path, default=None, help="Write the result to this file")
    parser.add_argument("--format", choices=FORMATS, default=None, help="Machine-readable output format")
    parser.add_argument("--workers", type=int, default=None, help="Worker threads (default: 1)")
    parser.add_argument("--grid-points", type=int, default=None, help="Decision grid points per dimension")
    parser.add_argument("--bound", type=float, default=None, help="Half-width B of the ramp problem's box")
    parser.add_argument("--debug", action="store_true", default=None, help="Enable debug output")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="scenariopac",
        description="Scenario approximation of robust minmax problems: solve, plan, diagnose",
        epilog=(
            "Examples:\n"
            "  scenariopac solve --problem ramp_gaussian --samples 1000\n"
            "  scenariopac plan --family trig --order 1 --epsilon 0.5 --beta 0.1 --tau 0.5\n"
            "  scenariopac diagnose --problem ramp_gaussian --epsilon 1\n"
            "  scenariopac experiment --problem infnorm_cube --dim 5 20 --out surface.csv"
        ),
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("--version", action="version", version="%(prog)s 0.1.0")
    commands = parser.add_subparsers(dest="command", required=True)

    solve = commands.add_parser("solve", help="Solve one scenario program")
    _add_common_flags(solve)

    plan = commands.add_parser("plan", help="A priori sample size")
    _add_common_flags(plan)
    plan.add_argument("--family", choices=PLAN_FAMILIES, default=None, help="Bound family (default: trig)")
    plan.add_argument("--tau", type=float, default=None, help="tau(eps/4) estimate or closed form")
    plan.add_argument("--tau-wc", type=float, default=None, help="Worst-case tau_wc(eps) for the convex plan")
    plan.add_argument("--order", type=int, default=None, help="Trigonometric bandwidth omega")
    plan.add_argument("--smoothness", type=int, default=None, help="Smoothness s of the periodic class")
    plan.add_argument("--l2-bound", type=float, default=None, help="L2 bound L of the cost slices")
    plan.add_argument("--deriv-bound", type=float, default=None, help="Derivative bound L~ of the cost slices")
    plan.add_argument("--log-covering", type=float, default=None, help="ln C(eps/4) for the generic family")
    plan.add_argument("--n-dim", type=int, default=None, help="Decision dimension for the convex families")

    diagnose = commands.add_parser("diagnose", help="Tail profiles and obstruction report")
    _add_common_flags(diagnose)
    diagnose.add_argument("--expansions", type=float, nargs="+", default=None, help="Box expansion factors")
    diagnose.add_argument("--threshold", type=float, default=None, help="Obstruction threshold on tau_hat")

    cover = commands.add_parser("cover", help="Covering-number table")
    _add_common_flags(cover)
    cover.add_argument("--family", choices=["trig", "smooth"], default=None, help="Function class (default: trig)")
    cover.add_argument("--order", type=int, default=None, help="Trigonometric bandwidth omega")
    cover.add_argument("--smoothness", type=int, default=None, help="Smoothness s of the periodic class")
    cover.add_argument("--l2-bound", type=float, default=None, help="L2 bound L of the cost slices")
    cover.add_argument("--deriv-bound", type=float, default=None, help="Derivative bound L~ of the cost slices")

    experiment = commands.add_parser("experiment", help="Error surface over dimension and sample size")
    _add_common_flags(experiment)
    experiment.add_argument("--full-scale", action="store_true", default=None, help="Allow N up to 10^6")
    experiment.add_argument("--plot", type=Path, default=None, help="Also write an SVG error plot here")

    return parser


def _as_list(value):
    if value is None or isinstance(value, list):
        return value
    if isinstance(value, tuple):
        return list(value)
    return [value]


def _is_int(value) -> bool:
    return isinstance(value, int) and not isinstance(value, bool)


def _is_number(value) -> bool:
    return _is_int(value) or isinstance(value, float)


def _check_option_types(options: dict):
    """Reject config values argparse would not have accepted."""
    if options["format"] is not None and options["format"] not in FORMATS:
        raise InputError(f"format must be one of {FORMATS}, got {options['format']!r}")
    if not isinstance(options["full_scale"], bool):
        raise InputError(f"full_scale must be true or false, got {options['full_scale']!r}")

    for key in INT_OPTIONS | FLOAT_OPTIONS:
        value = options[key]
        if value is None:
            continue
        check, kind = (_is_int, "an integer") if key in INT_OPTIONS else (_is_number, "a number")
        values = value if key in LIST_OPTIONS else [value]
        if (key in LIST_OPTIONS and not values) or not all(check(v) for v in values):
            raise InputError(f"{key} must be {kind}{' list' if key in LIST_OPTIONS else ''}, got {value!r}")


def resolve_options(args: argparse.Namespace) -> dict:
    """
    Merge settings: flag > config file > environment > built-in default.

    Raises:
        InputError: on unknown config keys or malformed values
    """
    options = dict(DEFAULTS)
    options.update(COMMAND_DEFAULTS.get(args.command, {}))

    for key, env_name in (("seed", "SCENARIOPAC_SEED"), ("workers", "SCENARIOPAC_WORKERS")):
        value = env_int(env_name)
        if value is not None:
            options[key] = value

    if args.config is not None:
        config = load_json_config(args.config)
        unknown = sorted(set(config) - set(DEFAULTS))
        if unknown:
            raise InputError(f"{args.config}: unknown config keys {unknown}")
        options.update(config)

    for key in DEFAULTS:
        value = getattr(args, key, None)
        if value is not None:
            options[key] = value

    for key in LIST_OPTIONS:
        options[key] = _as_list(options[key])
    _check_option_types(options)

    if options["workers"] < 1:
        raise InputError("--workers must be >= 1")
    debug_log("Options", dict(options))
    return options


def _emit(text: str | None, options: dict):
    if text is None:
        return
    if options["out"] is not None:
        path = Path(options["out"])
        try:
            path.write_text(text, encoding="utf-8")
        except OSError as e:
            raise OSError(e.errno, f"cannot write {path}: {e.strerror}") from e
        err_console.print(f"[green]✓[/green] Wrote {path}")
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


def _format(options: dict) -> str:
    return options["format"] or "console"


def _minimizer(options: dict) -> MinimizerConfig:
    return MinimizerConfig(grid_points_per_dim=int(options["grid_points"]))


def _run_solve(options: dict) -> int:
    problem = build_problem(options["problem"], dim=options["dim"][0], bound=options["bound"])
    n = int(options["samples"][0])

    batch = sample(problem.uncertainty, n, options["seed"])
    with err_console.status(f"Solving {problem.name} with N={n}..."):
        solution = solve_scenario(problem, batch, _minimizer(options), options["workers"])
    error = error_vs_true(solution, problem) if problem.optimum is not None else None
    _emit(format_solution(solution, error, _format(options)), options)
    return 0


def _require(options: dict, key: str, flag: str):
    if options[key] is None:
        raise InputError(f"{flag} is required for the {options['family']} family")
    return options[key]


def _run_plan(options: dict) -> int:
    family = options["family"]
    epsilon = options["epsilon"][0]
    beta = options["beta"]
    dim = options["dim"][0]

    if family == "trig":
        spec = TrigClassSpec(options["order"], dim, options["l2_bound"])
        plans = [plan_trig(spec, epsilon, beta, _require(options, "tau", "--tau"))]
    elif family == "smooth":
        spec = SmoothTorusSpec(options["smoothness"], dim, options["l2_bound"], options["deriv_bound"])
        plans = [plan_smooth(spec, epsilon, beta, _require(options, "tau", "--tau"))]
    elif family == "generic":
        plans = [plan_generic(_require(options, "log_covering", "--log-covering"),
                              _require(options, "tau", "--tau"), beta)]
    elif family == "convex":
        tau_wc = options["tau_wc"] if options["tau_wc"] is not None else _require(options, "tau", "--tau-wc")
        plans = [convex_plan(epsilon, beta, options["n_dim"], tau_wc)]
    elif family == "binomial":
        n_exact, n_explicit = convex_sample_bound(epsilon, beta, options["n_dim"])
        common = {"eps_tilde": epsilon, "beta": beta, "n_dim": options["n_dim"]}
        plans = [
            PlanResult(n_exact, "convex_exact", float(n_exact), dict(common)),
            PlanResult(math.ceil(n_explicit), "convex_explicit", n_explicit, dict(common)),
        ]
    elif family == "compare":
        problem = trig_toy()
        grid_points = int(options["grid_points"])
        with err_console.status("Estimating tail probabilities on the trig toy..."):
            tau = inf_tail_probability(problem, epsilon / 4.0, grid_points=grid_points,
                                       mc_samples=options["mc_samples"], seed=options["seed"],
                                       workers=options["workers"]).tau_hat
            tau_wc = inf_worst_case_tail(problem, epsilon, grid_points=grid_points,
                                         mc_samples=options["mc_samples"], seed=options["seed"],
                                         workers=options["workers"]).tau_hat
        spec = TrigClassSpec(options["order"], 1, options["l2_bound"])
        plans = compare_plans(spec, epsilon, beta, tau, tau_wc, n_dim=1)
    else:
        raise InputError(f"unknown plan family {family!r}")

    _emit(format_plans(plans, _format(options)), options)
    return 0


def _run_diagnose(options: dict) -> int:
    problem = build_problem(options["problem"], dim=options["dim"][0], bound=options["bound"])
    kwargs = dict(grid_points=int(options["grid_points"]), mc_samples=options["mc_samples"],
                  seed=options["seed"], workers=options["workers"])

    with err_console.status(f"Estimating tail probabilities for {problem.name}..."):
        profiles = [inf_tail_probability(problem, eps, **kwargs) for eps in options["epsilon"]]
        verdicts = obstruction_report(problem, options["epsilon"], options["expansions"],
                                      threshold=options["threshold"], **kwargs)

    format_type = _format(options)
    if format_type != "csv":
        _emit(format_diagnosis(profiles, verdicts, format_type), options)
        return 0

    if options["out"] is None or len(profiles) == 1:
        _emit("\n".join(profile_to_csv(p) for p in profiles), options)
        return 0

    out = Path(options["out"])
    for i, profile in enumerate(profiles):
        _emit(profile_to_csv(profile), {**options, "out": out.with_stem(f"{out.stem}-{i}")})
    return 0


def _run_cover(options: dict) -> int:
    dim = options["dim"][0]
    if options["family"] == "trig":
        spec = TrigClassSpec(options["order"], dim, options["l2_bound"])
    elif options["family"] == "smooth":
        spec = SmoothTorusSpec(options["smoothness"], dim, options["l2_bound"], options["deriv_bound"])
    else:
        raise InputError(f"cover supports the trig and smooth families, got {options['family']!r}")
    _emit(format_covering(covering_table(spec, options["epsilon"]), _format(options)), options)
    return 0


def _run_experiment(options: dict) -> int:
    default_dims, default_sizes = default_grid(options["full_scale"])
    dims = options["dim"] or list(default_dims)
    sizes = options["samples"] or list(default_sizes)
    if max(sizes) > DESK_SCALE_LIMIT and not options["full_scale"]:
        raise InputError(f"sizes above {DESK_SCALE_LIMIT} need --full-scale")

    spec = ExperimentSpec(
        problem=options["problem"],
        dims=tuple(dims),
        sizes=tuple(sizes),
        replicates=options["replicates"],
        master_seed=options["seed"],
        minimizer=_minimizer(options),
        workers=options["workers"],
    )
    with err_console.status(f"Running {spec.replicates} replicates of {spec.problem}..."):
        surface = run_error_surface(spec)

    format_type = _format(options)
    if options["out"] is not None and format_type == "console":
        emit_csv(surface, options["out"])
        err_console.print(f"[green]✓[/green] Wrote {options['out']}")
    else:
        _emit(format_surface(surface, format_type), options)

    if options["plot"] is not None:
        emit_plot(surface, options["plot"])
        err_console.print(f"[green]✓[/green] Wrote {options['plot']}")
    return 0


COMMANDS = {
    "solve": _run_solve,
    "plan": _run_plan,
    "diagnose": _run_diagnose,
    "cover": _run_cover,
    "experiment": _run_experiment,
}


def main(argv=None):
    """
    CLI entry point for scenariopac.

    Exit codes:
        0 - Success
        2 - Invalid input (bad flags, config or parameters)
        3 - Inconsistent regime: a plan was requested with tau = 0
        4 - I/O failure
        1 - Unexpected error
        130 - Interrupted by user (Ctrl+C)
    """
    parser = build_parser()
    args = parser.parse_args(argv)

    if args.debug:
        os.environ["DEBUG"] = "true"

    start_time = time.time()
    try:
        options = resolve_options(args)
        code = COMMANDS[args.command](options)
        debug_log("Elapsed", f"{time.time() - start_time:.2f}s")
        sys.exit(code)

    except (InputError, UnavailableError) as e:
        err_console.print(f"[red]✗[/red] {e}")
        sys.exit(2)

    except InconsistentRegimeError as e:
        err_console.print(f"[red]✗[/red] Inconsistent regime: {e}")
        sys.exit(3)

    except OSError as e:
        err_console.print(f"[red]✗[/red] I/O error: {e}")
        sys.exit(4)

    except KeyboardInterrupt:
        err_console.print("\n[yellow]Cancelled[/yellow]")
        sys.exit(130)

    except Exception as e:
        if args.debug:
            err_console.print_exception()
        else:
            err_console.print(f"[red]✗[/red] Error: {e}")
        sys.exit(1)


if __name__ == "__main__":
    main()
