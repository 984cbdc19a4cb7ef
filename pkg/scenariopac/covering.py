"""
Covering-number bounds for classes of cost slices, in log domain.

A class of trigonometric polynomials of bandwidth omega on the d-torus is a ball of
dimension q = (2 omega + 1)^d, whose eps-covering number is at most
(1/q) (pi q^2 / 2)^q (eps / 2L)^(-2q). Smooth periodic classes are reduced to that
case by truncating their Fourier series at a level where the tail is below eps/12.
"""
import math

from .errors import InputError
from .models import CoveringBound, SmoothTorusSpec, TrigClassSpec

# Relative slack when checking the truncation inequality at its boundary.
_REL_SLACK = 1e-12
# Above this level consecutive residuals differ by less than the slack, so none is applied.
_SLACK_LEVEL_CAP = 1e6
_MAX_LOG_LEVEL = 700.0


def _check_radius(epsilon: float):
    if not (epsilon > 0 and math.isfinite(epsilon)):
        raise InputError(f"covering radius must be a positive finite number, got {epsilon}")


def _log_trig_bound(q: int, L: float, epsilon: float) -> float:
    return -math.log(q) + q * math.log(math.pi * q * q / 2.0) + 2.0 * q * math.log(2.0 * L / epsilon)


def trig_covering_bound(spec: TrigClassSpec, epsilon: float) -> CoveringBound:
    _check_radius(epsilon)
    q = spec.q
    return CoveringBound(log_value=_log_trig_bound(q, spec.L, epsilon), q_effective=q, radius=epsilon)


def truncation_residual(spec: SmoothTorusSpec, level: int) -> float:
    """Uniform bound on the Fourier tail beyond ``level``: sqrt(2) L~ 2^d (2 pi)^-s N^-(2s-d)/2."""
    s, d = spec.smoothness, spec.dim
    log_value = (
        0.5 * math.log(2.0)
        + math.log(spec.L_tilde)
        + d * math.log(2.0)
        - s * math.log(2.0 * math.pi)
        - (2 * s - d) / 2.0 * math.log(level)
    )
    return math.exp(log_value)


def torus_truncation_level(spec: SmoothTorusSpec, epsilon: float) -> int:
    """Smallest N >= 1 whose truncation residual is at most eps."""
    _check_radius(epsilon)
    s, d = spec.smoothness, spec.dim
    if 2 * s <= d:
        raise InputError(f"need 2s > d, got s={s}, d={d}")

    log_level = (2.0 / (2 * s - d)) * (
        0.5 * math.log(2.0)
        + math.log(spec.L_tilde)
        + d * math.log(2.0)
        - s * math.log(2.0 * math.pi)
        - math.log(epsilon)
    )
    if log_level > _MAX_LOG_LEVEL:
        raise InputError(f"truncation level for eps={epsilon} overflows; eps is too small for this class")

    exact = math.exp(log_level)
    level = max(1, math.ceil(exact))
    limit = epsilon * (1.0 + _REL_SLACK) if exact <= _SLACK_LEVEL_CAP else epsilon
    while level > 1 and truncation_residual(spec, level - 1) <= limit:
        level -= 1
    while truncation_residual(spec, level) > limit:
        level += 1
    return level


def smooth_covering_bound(spec: SmoothTorusSpec, epsilon: float) -> CoveringBound:
    """
    Covering bound at radius eps/4 for a smooth periodic class.

    Truncates at N(eps/12), giving q = (2N + 1)^d, then applies the trigonometric
    bound at radius eps/24 (the 24 L / eps term).
    """
    _check_radius(epsilon)
    level = torus_truncation_level(spec, epsilon / 12.0)
    q = (2 * level + 1) ** spec.dim
    return CoveringBound(
        log_value=_log_trig_bound(q, spec.L, epsilon / 12.0),
        q_effective=q,
        radius=epsilon,
    )


def covering_table(spec: TrigClassSpec | SmoothTorusSpec, epsilons) -> list[CoveringBound]:
    if isinstance(spec, TrigClassSpec):
        return [trig_covering_bound(spec, e) for e in epsilons]
    return [smooth_covering_bound(spec, e) for e in epsilons]


def shell_count(m: int, d: int) -> int:
    """Number of integer points with infinity norm exactly m in Z^d."""
    if int(m) != m or m < 1:
        raise InputError(f"shell index must be a positive integer, got {m}")
    if int(d) != d or d < 1:
        raise InputError(f"dimension must be a positive integer, got {d}")
    m, d = int(m), int(d)
    return (2 * m + 1) ** d - (2 * m - 1) ** d


def tail_sum_bound(N: int, s: int, d: int) -> float:
    """2 / N^(2s - d), an upper bound on the sum over m > N of m^-(2s - d + 1)."""
    if int(N) != N or N < 1:
        raise InputError(f"N must be a positive integer, got {N}")
    if 2 * s <= d:
        raise InputError(f"need 2s > d, got s={s}, d={d}")
    return 2.0 / float(N) ** (2 * s - d)
