"""
Monte Carlo tail probabilities and the consistency-obstruction check.

t(x, eps) = P(f(x, xi) > J* - eps) is the chance that a fresh scenario pushes
the cost at x above the eps-lowered optimum; tau(eps) is its infimum over the
decision set. tau(eps) = 0 for some eps > 0 rules out consistency of the
scenario approach. All estimates at one seed share the same scenario block
(common random numbers), which makes them exactly monotone in eps. Since
J* <= g(x), the worst-case event is the smaller one and t_hat_wc <= t_hat
holds pointwise.
"""
import dataclasses
import math
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .engine import solve_scenario
from .errors import InputError, UnavailableError
from .models import (
    BadSetEstimate,
    MinimizerConfig,
    MinmaxProblem,
    ObstructionVerdict,
    TailEstimate,
    TailProfile,
)
from .problems import DEFAULT_CHUNK_ELEMENTS, batched_max_cost, check_point
from .sampling import sample, spawn_substream
from .utils import debug_log

REFERENCE_RUN_SIZE = 100_000
SAMPLED_MARGINAL_SIZE = 100_000
DEFAULT_TAIL_GRID_POINTS = 201

NO_EVIDENCE = "no_evidence"
SUSPECTED_OBSTRUCTION = "suspected_obstruction"


def _check_tail_args(epsilon: float, mc_samples: int):
    if not epsilon > 0:
        raise InputError(f"epsilon must be positive, got {epsilon}")
    if int(mc_samples) != mc_samples or mc_samples < 1:
        raise InputError(f"mc_samples must be a positive integer, got {mc_samples}")


def resolve_reference(
    problem: MinmaxProblem,
    reference: float | None = None,
    seed: int = 0,
    cfg: MinimizerConfig = MinimizerConfig(),
) -> tuple[float, str]:
    """
    Pick the J_ref that tail events are measured against.

    An explicit value wins, then the problem's known optimum; failing both, the
    scenario value of a large reference run stands in for J*.

    Returns:
        (value, source) with source one of "explicit", "optimum", "reference_run"
    """
    if reference is not None:
        return float(reference), "explicit"
    if problem.optimum is not None:
        return float(problem.optimum), "optimum"

    batch = sample(problem.uncertainty, REFERENCE_RUN_SIZE, spawn_substream(seed, 0))
    value = solve_scenario(problem, batch, cfg).value
    debug_log("Reference substitution", {"problem": problem.name, "J_ref": value, "N": REFERENCE_RUN_SIZE})
    return value, "reference_run"


def _exceed_counts(
    problem: MinmaxProblem,
    points: np.ndarray,
    scenarios: np.ndarray,
    thresholds: np.ndarray,
    workers: int = 1,
    chunk_elements: int = DEFAULT_CHUNK_ELEMENTS,
) -> np.ndarray:
    """Per point, the number of scenarios with f(x, xi) > threshold(x)."""

    def count(span):
        lo, hi = span
        pts, thr = points[lo:hi], thresholds[lo:hi]
        step = max(1, chunk_elements // max(1, hi - lo))
        total = np.zeros(hi - lo, dtype=np.int64)
        for start in range(0, scenarios.shape[0], step):
            block = problem.cost(pts, scenarios[start:start + step])
            total += np.count_nonzero(block > thr[:, None], axis=1)
        return total

    G = points.shape[0]
    if workers <= 1 or G < 2 * workers:
        return count((0, G))

    edges = np.linspace(0, G, workers + 1).astype(int)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        parts = list(pool.map(count, zip(edges[:-1], edges[1:])))
    return np.concatenate(parts)


def _marginal_values(problem: MinmaxProblem, points: np.ndarray, seed: int) -> tuple[np.ndarray, str]:
    if problem.marginal_closed_form is not None:
        return problem.marginal_closed_form(points), "closed_form"

    batch = sample(problem.uncertainty, SAMPLED_MARGINAL_SIZE, spawn_substream(seed, 1))
    debug_log("Marginal substitution", {"problem": problem.name, "scenarios": SAMPLED_MARGINAL_SIZE})
    return batched_max_cost(problem, points, batch.scenarios), "sampled_marginal"


def _estimate(count: int, mc_samples: int, threshold: float, source: str) -> TailEstimate:
    value = count / mc_samples
    return TailEstimate(
        value=value,
        mc_samples=mc_samples,
        std_error=math.sqrt(value * (1.0 - value) / mc_samples),
        threshold=threshold,
        reference_source=source,
    )


def tail_probability_mc(
    problem: MinmaxProblem,
    x,
    epsilon: float,
    reference: float | None = None,
    mc_samples: int = 10_000,
    seed: int = 0,
) -> TailEstimate:
    """Fraction of ``mc_samples`` fresh scenarios with f(x, xi) > J_ref - eps."""
    _check_tail_args(epsilon, mc_samples)
    x = check_point(problem, x)
    j_ref, source = resolve_reference(problem, reference, seed)
    scenarios = sample(problem.uncertainty, mc_samples, seed).scenarios
    threshold = j_ref - epsilon
    counts = _exceed_counts(problem, x[None, :], scenarios, np.array([threshold]))
    return _estimate(int(counts[0]), mc_samples, threshold, source)


def worst_case_tail_mc(
    problem: MinmaxProblem,
    x,
    epsilon: float,
    mc_samples: int = 10_000,
    seed: int = 0,
) -> TailEstimate:
    """
    Fraction of fresh scenarios with f(x, xi) > g(x) - eps.

    Without a closed-form marginal, g(x) is replaced by a sampled marginal over
    100000 scenarios from an independent substream; ``reference_source`` records
    which one was used.
    """
    _check_tail_args(epsilon, mc_samples)
    x = check_point(problem, x)
    g_x, source = _marginal_values(problem, x[None, :], seed)
    scenarios = sample(problem.uncertainty, mc_samples, seed).scenarios
    threshold = float(g_x[0]) - epsilon
    counts = _exceed_counts(problem, x[None, :], scenarios, np.array([threshold]))
    return _estimate(int(counts[0]), mc_samples, threshold, source)


def inf_tail_probability(
    problem: MinmaxProblem,
    epsilon: float,
    reference: float | None = None,
    grid_points: int = DEFAULT_TAIL_GRID_POINTS,
    mc_samples: int = 10_000,
    seed: int = 0,
    workers: int = 1,
) -> TailProfile:
    """t_hat(x, eps) on every grid point from one shared scenario block; tau_hat is the min."""
    _check_tail_args(epsilon, mc_samples)
    j_ref, source = resolve_reference(problem, reference, seed)
    grid = problem.decision.grid(grid_points)
    scenarios = sample(problem.uncertainty, mc_samples, seed).scenarios
    thresholds = np.full(grid.shape[0], j_ref - epsilon)
    t_hat = _exceed_counts(problem, grid, scenarios, thresholds, workers) / mc_samples
    return TailProfile(
        epsilon=float(epsilon),
        grid=grid,
        t_hat=t_hat,
        tau_hat=float(t_hat.min()),
        mc_samples=mc_samples,
        seed=seed,
        reference_value=j_ref,
        reference_source=source,
    )


def inf_worst_case_tail(
    problem: MinmaxProblem,
    epsilon: float,
    grid_points: int = DEFAULT_TAIL_GRID_POINTS,
    mc_samples: int = 10_000,
    seed: int = 0,
    workers: int = 1,
) -> TailProfile:
    """Worst-case tail t_hat_wc(x, eps) over the grid; tau_hat is the estimate of tau_wc(eps)."""
    _check_tail_args(epsilon, mc_samples)
    grid = problem.decision.grid(grid_points)
    g_grid, source = _marginal_values(problem, grid, seed)
    scenarios = sample(problem.uncertainty, mc_samples, seed).scenarios
    t_hat = _exceed_counts(problem, grid, scenarios, g_grid - epsilon, workers) / mc_samples
    return TailProfile(
        epsilon=float(epsilon),
        grid=grid,
        t_hat=t_hat,
        tau_hat=float(t_hat.min()),
        mc_samples=mc_samples,
        seed=seed,
        reference_value=float("nan"),
        reference_source=source,
        worst_case=True,
    )


def classify_obstruction(tau_hat, threshold: float, tolerance: float) -> str:
    """
    Suspect an obstruction when enlarging the box drives tau_hat below the threshold.

    Requires the last stage below ``threshold``, no stage-to-stage increase beyond
    ``tolerance``, and an overall drop of more than ``tolerance``. A fixed box
    yields identical stages and therefore never flags.
    """
    tau_hat = list(tau_hat)
    if not tau_hat:
        return NO_EVIDENCE
    below = tau_hat[-1] < threshold
    nonincreasing = all(b <= a + tolerance for a, b in zip(tau_hat, tau_hat[1:]))
    dropped = tau_hat[0] - tau_hat[-1] > tolerance
    return SUSPECTED_OBSTRUCTION if below and nonincreasing and dropped else NO_EVIDENCE


def obstruction_report(
    problem: MinmaxProblem,
    epsilons,
    expansion_factors=(1.0, 2.0, 4.0, 8.0),
    threshold: float | None = None,
    reference: float | None = None,
    grid_points: int = DEFAULT_TAIL_GRID_POINTS,
    mc_samples: int = 10_000,
    seed: int = 0,
    workers: int = 1,
) -> list[ObstructionVerdict]:
    """
    Track tau_hat(eps) as the decision box grows, one verdict per eps.

    Problems with a fixed box keep it at every stage. The default threshold is
    ten times the worst-case MC standard error 1 / (2 sqrt(M)).
    """
    epsilons = [float(e) for e in epsilons]
    factors = [float(f) for f in expansion_factors]
    if not epsilons:
        raise InputError("need at least one epsilon")
    if not factors or any(b <= a for a, b in zip(factors, factors[1:])):
        raise InputError(f"expansion factors must be strictly ascending, got {factors}")
    if factors[0] <= 0:
        raise InputError("expansion factors must be positive")

    std_bound = 1.0 / (2.0 * math.sqrt(mc_samples))
    if threshold is None:
        threshold = 10.0 * std_bound
    j_ref, _ = resolve_reference(problem, reference, seed)

    stages = []
    for factor in factors:
        box = problem.decision if problem.fixed_box else problem.decision.scaled(factor)
        stages.append(dataclasses.replace(problem, decision=box))

    verdicts = []
    for epsilon in epsilons:
        taus = tuple(
            inf_tail_probability(stage, epsilon, j_ref, grid_points, mc_samples, seed, workers).tau_hat
            for stage in stages
        )
        flag = classify_obstruction(taus, threshold, std_bound)
        debug_log("Obstruction stages", {"epsilon": epsilon, "tau_hat": taus, "flag": flag})
        verdicts.append(ObstructionVerdict(
            epsilon=epsilon,
            expansion_factors=tuple(factors),
            boxes=tuple(stage.decision for stage in stages),
            tau_hat=taus,
            threshold=threshold,
            flag=flag,
        ))
    return verdicts


def bad_set_probability(
    problem: MinmaxProblem,
    epsilon: float,
    sample_size: int,
    replicates: int,
    master_seed: int = 0,
    cfg: MinimizerConfig = MinimizerConfig(),
) -> BadSetEstimate:
    """
    Empirical probability of the bad set {J_N <= J* - eps} with its sandwich.

    ``inner`` counts batches where some grid point has g_hat <= J* - eps, ``outer``
    those where some grid point has g_hat <= J* - eps/2; inner <= value <= outer.
    """
    if problem.optimum is None:
        raise UnavailableError(f"problem {problem.name!r} has no known optimum")
    if not epsilon > 0:
        raise InputError(f"epsilon must be positive, got {epsilon}")
    if sample_size < 1 or replicates < 1:
        raise InputError("sample_size and replicates must be positive")

    inner = value = outer = 0
    for r in range(replicates):
        batch = sample(problem.uncertainty, sample_size, spawn_substream(master_seed, r))
        solution = solve_scenario(problem, batch, cfg)
        grid_min = solution.grid_value
        inner += grid_min <= problem.optimum - epsilon
        value += solution.value <= problem.optimum - epsilon
        outer += grid_min <= problem.optimum - epsilon / 2
    return BadSetEstimate(
        epsilon=float(epsilon),
        sample_size=sample_size,
        replicates=replicates,
        inner=inner / replicates,
        value=value / replicates,
        outer=outer / replicates,
    )
