"""Replicated scenario runs that trace the error J* - J_N over dimension and sample size."""
import math
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .engine import error_vs_true, nested_run
from .errors import UnavailableError
from .models import ErrorRow, ErrorSurface, ExperimentSpec
from .problems import build_problem
from .sampling import spawn_substream
from .utils import debug_log

DESK_SIZES = (10, 100, 1_000, 10_000)
FULL_SCALE_SIZES = (10, 100, 1_000, 10_000, 100_000, 1_000_000)
DEFAULT_DIMS = (1, 5, 20)
FULL_SCALE_DIMS = (1, 5, 20, 50)


def default_grid(full_scale: bool) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """(dims, sizes) used when an experiment names neither."""
    if full_scale:
        return FULL_SCALE_DIMS, FULL_SCALE_SIZES
    return DEFAULT_DIMS, DESK_SIZES


def replicate_seed(master_seed: int, d: int, replicate: int) -> int:
    """Seed of one replicate: a substream of the dimension's substream."""
    return spawn_substream(spawn_substream(master_seed, d), replicate)


def run_error_surface(spec: ExperimentSpec, progress=None) -> ErrorSurface:
    """
    Mean and standard error of J* - J_N over replicates, for every (d, N).

    Each replicate is one nested run over ``spec.sizes`` on its own substream, so
    the output depends only on the master seed, never on ``spec.workers``.
    ``progress`` is called with (d, replicates_done) after each dimension.
    """
    rows = []
    for d in sorted(set(spec.dims)):
        problem = build_problem(spec.problem, dim=d)
        if problem.optimum is None:
            raise UnavailableError(f"problem {problem.name!r} has no known optimum; error surface undefined")

        def replicate_errors(r, problem=problem, d=d):
            solutions = nested_run(problem, replicate_seed(spec.master_seed, d, r), spec.sizes, spec.minimizer)
            return [error_vs_true(s, problem) for s in solutions]

        if spec.workers > 1:
            with ThreadPoolExecutor(max_workers=spec.workers) as pool:
                errors = np.array(list(pool.map(replicate_errors, range(spec.replicates))))
        else:
            errors = np.array([replicate_errors(r) for r in range(spec.replicates)])

        for j, n in enumerate(spec.sizes):
            column = errors[:, j]
            std_error = float(column.std(ddof=1) / math.sqrt(spec.replicates)) if spec.replicates > 1 else 0.0
            rows.append(ErrorRow(
                d=d,
                N=n,
                mean_error=float(column.mean()),
                std_error=std_error,
                replicates=spec.replicates,
                seed=spec.master_seed,
            ))
        debug_log("Error surface", {"d": d, "mean_error": errors.mean(axis=0)})
        if progress is not None:
            progress(d, spec.replicates)

    return ErrorSurface(rows=tuple(sorted(rows, key=lambda row: (row.d, row.N))))
