"""Minmax problem instances, cost evaluation and marginal functions."""
import math

import numpy as np

from .errors import InputError
from .models import DecisionBox, MinmaxProblem, SampleBatch, UncertaintyDescriptor

RAMP_DEFAULT_BOUND = 10.0
DEFAULT_CHUNK_ELEMENTS = 2 ** 22


def _infnorm(xi: np.ndarray) -> np.ndarray:
    return np.max(np.abs(xi), axis=1)


def infnorm_cost(x: np.ndarray, xi: np.ndarray) -> np.ndarray:
    """f(x, xi) = x * |xi|_inf - |xi|_inf ** 2."""
    u = _infnorm(xi)
    return x[:, :1] * u[None, :] - (u * u)[None, :]


def infnorm_marginal(x: np.ndarray) -> np.ndarray:
    return x[:, 0] ** 2 / 4.0


def ramp_cost(x: np.ndarray, xi: np.ndarray) -> np.ndarray:
    """0 for x >= xi, x - xi on [xi - 1, xi], -1 below."""
    return np.clip(x[:, :1] - xi[:, 0][None, :], -1.0, 0.0)


def ramp_marginal(x: np.ndarray) -> np.ndarray:
    return np.zeros(x.shape[0])


def trig_cost(x: np.ndarray, xi: np.ndarray) -> np.ndarray:
    return x[:, :1] * np.sin(2.0 * math.pi * xi[:, 0])[None, :]


def trig_marginal(x: np.ndarray) -> np.ndarray:
    return np.abs(x[:, 0])


def infnorm_cube(d: int, halfwidth: float = 1.0) -> MinmaxProblem:
    return MinmaxProblem(
        name="infnorm_cube",
        decision=DecisionBox((0.0,), (1.0,)),
        uncertainty=UncertaintyDescriptor("cube", d, halfwidth),
        cost=infnorm_cost,
        marginal_closed_form=infnorm_marginal,
        optimum=0.0,
    )


def infnorm_gaussian(d: int) -> MinmaxProblem:
    return MinmaxProblem(
        name="infnorm_gaussian",
        decision=DecisionBox((0.0,), (1.0,)),
        uncertainty=UncertaintyDescriptor("gaussian", d),
        cost=infnorm_cost,
        marginal_closed_form=infnorm_marginal,
        optimum=0.0,
    )


def ramp_gaussian(bound: float = RAMP_DEFAULT_BOUND) -> MinmaxProblem:
    """
    Scenario-inconsistent ramp on a standard Gaussian scenario.

    The decision set is the real line in principle; ``[-bound, bound]`` stands in
    for it and may be enlarged by the obstruction diagnostic.
    """
    if not bound > 0:
        raise InputError(f"ramp box bound must be positive, got {bound}")
    return MinmaxProblem(
        name="ramp_gaussian",
        decision=DecisionBox((-bound,), (bound,)),
        uncertainty=UncertaintyDescriptor("gaussian", 1),
        cost=ramp_cost,
        marginal_closed_form=ramp_marginal,
        optimum=0.0,
        fixed_box=False,
    )


def trig_toy() -> MinmaxProblem:
    """x * sin(2 pi xi) on the circle: bandwidth 1, L2 norm of each slice <= 1/sqrt(2)."""
    return MinmaxProblem(
        name="trig_toy",
        decision=DecisionBox((-1.0,), (1.0,)),
        uncertainty=UncertaintyDescriptor("torus", 1),
        cost=trig_cost,
        marginal_closed_form=trig_marginal,
        optimum=0.0,
    )


BUILTIN_PROBLEMS = ("infnorm_cube", "infnorm_gaussian", "ramp_gaussian", "trig_toy")


def build_problem(tag: str, dim: int = 1, bound: float = RAMP_DEFAULT_BOUND) -> MinmaxProblem:
    """Look up a built-in problem by tag; ``dim`` applies to the infnorm family only."""
    if tag == "infnorm_cube":
        return infnorm_cube(dim)
    if tag == "infnorm_gaussian":
        return infnorm_gaussian(dim)
    if tag == "ramp_gaussian":
        return ramp_gaussian(bound)
    if tag == "trig_toy":
        return trig_toy()
    raise InputError(f"unknown problem {tag!r}, expected one of {BUILTIN_PROBLEMS}")


def check_point(problem: MinmaxProblem, x) -> np.ndarray:
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if x.shape != (problem.decision.dim,):
        raise InputError(f"decision vector must have length {problem.decision.dim}, got shape {x.shape}")
    if not problem.decision.contains(x):
        raise InputError(f"decision {x.tolist()} lies outside the box {problem.decision}")
    return x


def _check_scenarios(problem: MinmaxProblem, xi) -> np.ndarray:
    xi = np.asarray(xi, dtype=float)
    if xi.ndim == 1:
        xi = xi[None, :]
    if xi.ndim != 2 or xi.shape[1] != problem.uncertainty.dim:
        raise InputError(f"scenario dimension must be {problem.uncertainty.dim}, got shape {xi.shape}")
    return xi


def evaluate_cost(problem: MinmaxProblem, x, xi) -> float:
    x = check_point(problem, x)
    xi = _check_scenarios(problem, xi)
    if xi.shape[0] != 1:
        raise InputError(f"evaluate_cost takes a single scenario, got {xi.shape[0]}")
    return float(problem.cost(x[None, :], xi)[0, 0])


def marginal_true(problem: MinmaxProblem, x) -> float | None:
    """g(x) when the problem knows it in closed form, None otherwise."""
    x = check_point(problem, x)
    if problem.marginal_closed_form is None:
        return None
    return float(problem.marginal_closed_form(x[None, :])[0])


def batched_max_cost(
    problem: MinmaxProblem,
    points: np.ndarray,
    scenarios: np.ndarray,
    chunk_elements: int = DEFAULT_CHUNK_ELEMENTS,
) -> np.ndarray:
    """
    max over scenarios of f(x, xi) for every row x of ``points``.

    Scenarios are consumed in chunks so that no more than ``chunk_elements``
    cost values are held at once. The maximum is exact.
    """
    if scenarios.shape[0] == 0:
        raise InputError("cannot take the max over an empty batch")
    step = max(1, chunk_elements // max(1, points.shape[0]))
    result = np.full(points.shape[0], -np.inf)
    for start in range(0, scenarios.shape[0], step):
        block = problem.cost(points, scenarios[start:start + step])
        np.maximum(result, block.max(axis=1), out=result)
    return result


def sampled_marginal(problem: MinmaxProblem, x, batch: SampleBatch) -> float:
    x = check_point(problem, x)
    if batch.size == 0:
        raise InputError("sampled marginal needs a nonempty batch")
    if batch.distribution.dim != problem.uncertainty.dim:
        raise InputError(
            f"batch dimension {batch.distribution.dim} does not match problem dimension {problem.uncertainty.dim}"
        )
    return float(batched_max_cost(problem, x[None, :], batch.scenarios)[0])


def verify_optimum(problem: MinmaxProblem, points_per_dim: int = 2001, tol: float = 1e-6) -> bool:
    """Check the stated optimum against the min of the closed-form marginal on a dense grid."""
    if problem.marginal_closed_form is None or problem.optimum is None:
        return True
    grid = problem.decision.grid(points_per_dim)
    return abs(float(np.min(problem.marginal_closed_form(grid))) - problem.optimum) <= tol
