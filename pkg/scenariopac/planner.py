"""
A priori sample sizes for the scenario approach.

With C the eps/4-covering number of the cost slices and tau = tau(eps/4), the
probability that J* - J_N > eps is at most C exp(-N tau), so
n(eps, beta) = (ln(1/beta) + ln C) / tau samples suffice. Planners are
deterministic; tau comes from diagnostics or a closed form.
"""
import math

from scipy.special import gammaln, logsumexp

from .covering import smooth_covering_bound, trig_covering_bound
from .errors import InconsistentRegimeError, InputError
from .models import (
    ConvexClassSpec,
    GenericClassSpec,
    PlanRequest,
    PlanResult,
    SmoothTorusSpec,
    TrigClassSpec,
)
from .utils import debug_log

SMOOTH_CONSTANT = 288.0
SMOOTH_CONSTANT_PRINTED = 72.0

# Relative slack applied to raw counts before rounding up.
_REL_SLACK = 1e-12


def _check_beta(beta: float):
    if not 0.0 < beta < 1.0:
        raise InputError(f"confidence parameter beta must lie in (0, 1), got {beta}")


def _check_epsilon(epsilon: float):
    if not (epsilon > 0 and math.isfinite(epsilon)):
        raise InputError(f"accuracy epsilon must be positive, got {epsilon}")


def _check_tau(tau: float, name: str = "tau"):
    if tau <= 0:
        raise InconsistentRegimeError(
            f"{name} = {tau}: the inf-tail probability vanishes, so the scenario values cannot "
            "converge to the optimum (consistency obstruction) and no sample size suffices"
        )
    if tau > 1:
        raise InputError(f"{name} is a probability, got {tau}")


def _ceil_count(raw: float) -> int:
    return max(0, math.ceil(raw * (1.0 - _REL_SLACK)))


def pac_failure_bound(log_covering: float, tau: float, N: int) -> float:
    """min(1, C exp(-N tau)) with C = exp(log_covering)."""
    exponent = log_covering - N * tau
    if exponent >= 0:
        return 1.0
    return math.exp(exponent)


def plan_generic(log_covering: float, tau: float, beta: float) -> PlanResult:
    _check_beta(beta)
    _check_tau(tau)
    raw = (math.log(1.0 / beta) + log_covering) / tau
    return PlanResult(
        n_required=_ceil_count(raw),
        family="generic",
        raw=raw,
        intermediates={"lnC": log_covering, "tau": tau, "beta": beta},
    )


def plan_trig(spec: TrigClassSpec, epsilon: float, beta: float, tau: float) -> PlanResult:
    _check_epsilon(epsilon)
    _check_beta(beta)
    _check_tau(tau)
    q = spec.q
    log_covering = (
        2 * q * math.log(1.0 / epsilon)
        + (2 * q - 1) * math.log(q)
        + q * math.log(32.0 * spec.L ** 2 * math.pi)
    )
    raw = (math.log(1.0 / beta) + log_covering) / tau
    return PlanResult(
        n_required=_ceil_count(raw),
        family="trig",
        raw=raw,
        intermediates={"lnC": log_covering, "tau": tau, "beta": beta, "q": q, "epsilon": epsilon},
    )


def plan_smooth(spec: SmoothTorusSpec, epsilon: float, beta: float, tau: float) -> PlanResult:
    """
    Sample size for a smooth periodic class.

    Uses ln(288 pi L^2), which the eps/24 radius of the covering bound produces;
    the 72 pi L^2 variant (radius eps/12) is reported alongside as ``raw_printed``.
    """
    _check_epsilon(epsilon)
    _check_beta(beta)
    _check_tau(tau)
    q = smooth_covering_bound(spec, epsilon).q_effective
    common = 2 * q * math.log(1.0 / epsilon) + (2 * q - 1) * math.log(q)
    ln_const = math.log(SMOOTH_CONSTANT * math.pi * spec.L ** 2)
    ln_const_printed = math.log(SMOOTH_CONSTANT_PRINTED * math.pi * spec.L ** 2)
    log_covering = common + q * ln_const
    raw = (math.log(1.0 / beta) + log_covering) / tau
    return PlanResult(
        n_required=_ceil_count(raw),
        family="smooth",
        raw=raw,
        intermediates={
            "lnC": log_covering,
            "tau": tau,
            "beta": beta,
            "q": q,
            "epsilon": epsilon,
            "ln_const": ln_const,
            "ln_const_printed": ln_const_printed,
            "raw_printed": (math.log(1.0 / beta) + common + q * ln_const_printed) / tau,
        },
    )


def log_binomial_tail(N: int, k: int, p: float) -> float:
    """ln P(Bin(N, p) <= k), summed in log domain."""
    if k < 0:
        return -math.inf
    if k >= N:
        return 0.0
    terms = [
        gammaln(N + 1) - gammaln(i + 1) - gammaln(N - i + 1) + i * math.log(p) + (N - i) * math.log1p(-p)
        for i in range(k + 1)
    ]
    return min(0.0, float(logsumexp(terms)))


def convex_sample_bound(eps_tilde: float, beta: float, n_dim: int) -> tuple[int, float]:
    """
    Sample counts for a random convex program with ``n_dim`` decision variables.

    Returns:
        (N_exact, N_explicit): the smallest N with
        sum_{i < n_dim} C(N, i) eps^i (1 - eps)^(N - i) <= beta, found by doubling
        then bisection on the monotone tail, and the closed-form sufficient count
        (2 / eps) (ln(1/beta) + n_dim)
    """
    if not 0.0 < eps_tilde < 1.0:
        raise InputError(f"eps_tilde must lie in (0, 1), got {eps_tilde}")
    _check_beta(beta)
    if int(n_dim) != n_dim or n_dim < 1:
        raise InputError(f"n_dim must be a positive integer, got {n_dim}")

    log_beta = math.log(beta)
    k = int(n_dim) - 1

    def ok(n):
        return log_binomial_tail(n, k, eps_tilde) <= log_beta

    hi = max(1, int(n_dim))
    while not ok(hi):
        hi *= 2
    lo = hi // 2
    # ok(hi) and not ok(lo): lo is either a failed doubling step or below n_dim
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if ok(mid):
            hi = mid
        else:
            lo = mid
    n_exact = hi

    n_explicit = (2.0 / eps_tilde) * (math.log(1.0 / beta) + n_dim)
    debug_log("Convex sample bound", {"eps_tilde": eps_tilde, "beta": beta, "n_dim": n_dim,
                                      "N_exact": n_exact, "N_explicit": n_explicit})
    return n_exact, n_explicit


def convex_plan(epsilon: float, beta: float, n_dim: int, tau_wc: float) -> PlanResult:
    _check_epsilon(epsilon)
    _check_beta(beta)
    _check_tau(tau_wc, "tau_wc")
    if int(n_dim) != n_dim or n_dim < 1:
        raise InputError(f"n_dim must be a positive integer, got {n_dim}")
    raw = (2.0 / tau_wc) * (math.log(1.0 / beta) + n_dim)
    return PlanResult(
        n_required=_ceil_count(raw),
        family="convex",
        raw=raw,
        intermediates={"tau_wc": tau_wc, "beta": beta, "n_dim": n_dim, "epsilon": epsilon},
    )


def compare_plans(
    spec: TrigClassSpec,
    epsilon: float,
    beta: float,
    tau: float,
    tau_wc: float,
    n_dim: int = 1,
) -> list[PlanResult]:
    """The convex worst-case plan next to the covering-number plan for the same problem."""
    return [convex_plan(epsilon, beta, n_dim, tau_wc), plan_trig(spec, epsilon, beta, tau)]


def plan(request: PlanRequest) -> PlanResult:
    spec = request.class_spec
    if isinstance(spec, TrigClassSpec):
        return plan_trig(spec, request.epsilon, request.beta, request.tau)
    if isinstance(spec, SmoothTorusSpec):
        return plan_smooth(spec, request.epsilon, request.beta, request.tau)
    if isinstance(spec, GenericClassSpec):
        return plan_generic(spec.log_covering, request.tau, request.beta)
    if isinstance(spec, ConvexClassSpec):
        return convex_plan(request.epsilon, request.beta, spec.n_dim, request.tau)
    raise InputError(f"unsupported class spec {type(spec).__name__}")
