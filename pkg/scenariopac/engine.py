"""Scenario approximation J_N = min over the decision box of the sampled marginal."""
import math
from concurrent.futures import ThreadPoolExecutor

import numpy as np
from scipy import integrate
from scipy.special import gammaln

from .errors import InputError, UnavailableError
from .models import MinimizerConfig, MinmaxProblem, SampleBatch, ScenarioSolution
from .problems import batched_max_cost
from .sampling import sample
from .utils import debug_log

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


def golden_section(func, lower: float, upper: float, tol: float = 1e-9, max_iterations: int = 200):
    """
    Derivative-free minimisation of ``func`` on [lower, upper].

    The endpoints are compared against the bracket's final interior points, so a
    minimum sitting on the boundary is not lost.

    Returns:
        (argmin, minimum); ties go to the smaller argument
    """
    a, b = lower, upper
    x1 = b - INV_PHI * (b - a)
    x2 = a + INV_PHI * (b - a)
    f1, f2 = func(x1), func(x2)
    iteration = 0
    while b - a > tol and iteration < max_iterations:
        if f2 > f1:
            b, x2, f2 = x2, x1, f1
            x1 = b - INV_PHI * (b - a)
            f1 = func(x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + INV_PHI * (b - a)
            f2 = func(x2)
        iteration += 1

    candidates = [(func(lower), lower), (f1, x1), (f2, x2), (func(upper), upper)]
    best_value, best_x = min(candidates)
    return best_x, best_value


def _check_batch(problem: MinmaxProblem, batch: SampleBatch):
    if batch.size == 0:
        raise InputError("scenario program needs a nonempty batch")
    if batch.distribution.dim != problem.uncertainty.dim:
        raise InputError(
            f"batch dimension {batch.distribution.dim} does not match problem dimension {problem.uncertainty.dim}"
        )


def sampled_marginal_on_grid(
    problem: MinmaxProblem,
    batch: SampleBatch,
    cfg: MinimizerConfig = MinimizerConfig(),
    workers: int = 1,
) -> tuple[np.ndarray, np.ndarray]:
    """
    Evaluate the sampled marginal on the decision grid.

    With ``workers > 1`` the grid is split into contiguous slices evaluated in
    threads and reassembled in index order; every slice sees the same scenarios,
    so values match the serial scan exactly.

    Returns:
        (grid, values) with grid of shape (G, n) and values of shape (G,)
    """
    _check_batch(problem, batch)
    grid = problem.decision.grid(cfg.grid_points_per_dim)
    if workers <= 1 or grid.shape[0] < 2 * workers:
        return grid, batched_max_cost(problem, grid, batch.scenarios, cfg.chunk_elements)

    slices = np.array_split(grid, workers)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        parts = list(pool.map(lambda g: batched_max_cost(problem, g, batch.scenarios, cfg.chunk_elements), slices))
    return grid, np.concatenate(parts)


def solve_scenario(
    problem: MinmaxProblem,
    batch: SampleBatch,
    cfg: MinimizerConfig = MinimizerConfig(),
    workers: int = 1,
) -> ScenarioSolution:
    """
    Solve the scenario program for one batch.

    Dense grid scan; the lexicographically smallest grid point wins ties. For a
    one-dimensional decision the result is refined by golden-section search
    between the best grid point's neighbours, and kept only if it is strictly
    lower.
    """
    grid, values = sampled_marginal_on_grid(problem, batch, cfg, workers)
    best = int(np.argmin(values))
    grid_value = float(values[best])
    minimizer = tuple(float(v) for v in grid[best])
    value = grid_value
    refined = False

    if cfg.refinement == "golden_section_1d" and problem.decision.dim == 1:
        lo = float(grid[max(best - 1, 0), 0])
        hi = float(grid[min(best + 1, grid.shape[0] - 1), 0])

        def g_hat(t):
            return float(batched_max_cost(problem, np.array([[t]]), batch.scenarios, cfg.chunk_elements)[0])

        x_ref, f_ref = golden_section(g_hat, lo, hi, cfg.refinement_tolerance)
        if f_ref < value:
            value, minimizer, refined = f_ref, (float(x_ref),), True

    debug_log("Scenario solution", {"problem": problem.name, "N": batch.size, "value": value,
                                    "minimizer": minimizer, "refined": refined})
    return ScenarioSolution(
        value=value,
        minimizer=minimizer,
        sample_size=batch.size,
        seed=batch.seed,
        config=cfg,
        grid_value=grid_value,
        refined=refined,
    )


def error_vs_true(solution: ScenarioSolution, problem: MinmaxProblem) -> float:
    """J* - J_N."""
    if problem.optimum is None:
        raise UnavailableError(f"problem {problem.name!r} has no known optimum")
    return problem.optimum - solution.value


def nested_run(
    problem: MinmaxProblem,
    master_seed: int,
    sizes,
    cfg: MinimizerConfig = MinimizerConfig(),
    workers: int = 1,
) -> list[ScenarioSolution]:
    """
    Solve on the first N scenarios of one stream for every N in ``sizes``.

    Prefixes are nested, so the values are nondecreasing in N up to the
    refinement tolerance.
    """
    sizes = [int(n) for n in sizes]
    if not sizes or sizes[0] < 1:
        raise InputError("sizes must be a nonempty list of positive integers")
    if any(b <= a for a, b in zip(sizes, sizes[1:])):
        raise InputError(f"sizes must be strictly increasing, got {sizes}")

    batch = sample(problem.uncertainty, sizes[-1], master_seed)
    return [solve_scenario(problem, batch.head(n), cfg, workers) for n in sizes]


def infnorm_expected_error(d: int, N: int) -> float:
    """
    Expected scenario error of the infnorm problem on the uniform cube.

    The error is (min_i |xi_i|_inf)^2, and |xi|_inf^d is uniform, so the error is
    V^(2/d) with V ~ Beta(1, N): E = Gamma(1+2/d) Gamma(N+1) / Gamma(N+1+2/d).
    """
    if d < 1 or N < 1:
        raise InputError(f"need d >= 1 and N >= 1, got d={d}, N={N}")
    p = 2.0 / d
    return math.exp(gammaln(1.0 + p) + gammaln(N + 1.0) - gammaln(N + 1.0 + p))


def beta_moment_quadrature(d: int, N: int) -> float:
    """E[V^(2/d)], V ~ Beta(1, N), by direct numeric integration (substituting t = N v)."""
    if d < 1 or N < 1:
        raise InputError(f"need d >= 1 and N >= 1, got d={d}, N={N}")
    p = 2.0 / d

    def integrand(t):
        return (t / N) ** p * (1.0 - t / N) ** (N - 1)

    breakpoints = [b for b in (1.0, 10.0, 50.0) if b < N]
    value, _ = integrate.quad(integrand, 0.0, float(N), points=breakpoints or None, limit=500,
                              epsabs=0.0, epsrel=1e-10)
    return value
