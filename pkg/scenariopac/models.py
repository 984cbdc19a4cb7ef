import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import InputError

# Vectorised oracles: decision points have shape (G, n), scenarios (M, d).
CostOracle = Callable[[np.ndarray, np.ndarray], np.ndarray]
MarginalOracle = Callable[[np.ndarray], np.ndarray]

UNCERTAINTY_KINDS = ("cube", "gaussian", "torus")
REFINEMENTS = ("none", "golden_section_1d")
MAX_GRID_POINTS = 2 ** 24


@dataclass(frozen=True)
class DecisionBox:
    lower: tuple[float, ...]
    upper: tuple[float, ...]

    def __post_init__(self):
        lower = tuple(float(v) for v in self.lower)
        upper = tuple(float(v) for v in self.upper)
        if len(lower) < 1 or len(lower) != len(upper):
            raise InputError(f"decision box needs matching nonempty bounds, got {len(lower)} and {len(upper)}")
        if any(not (math.isfinite(lo) and math.isfinite(hi)) for lo, hi in zip(lower, upper)):
            raise InputError("decision box bounds must be finite")
        if any(lo > hi for lo, hi in zip(lower, upper)):
            raise InputError(f"decision box has lower > upper: {lower} vs {upper}")
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)

    @property
    def dim(self) -> int:
        return len(self.lower)

    def contains(self, x, tol: float = 1e-12) -> bool:
        x = np.asarray(x, dtype=float)
        return bool(np.all(x >= np.asarray(self.lower) - tol) and np.all(x <= np.asarray(self.upper) + tol))

    def scaled(self, factor: float) -> "DecisionBox":
        """Box with every half-width multiplied by ``factor`` about the same centre."""
        if factor <= 0:
            raise InputError(f"expansion factor must be positive, got {factor}")
        centre = [(lo + hi) / 2 for lo, hi in zip(self.lower, self.upper)]
        half = [(hi - lo) / 2 * factor for lo, hi in zip(self.lower, self.upper)]
        return DecisionBox(tuple(c - h for c, h in zip(centre, half)), tuple(c + h for c, h in zip(centre, half)))

    def grid(self, points_per_dim: int) -> np.ndarray:
        """
        Tensor grid over the box, rows in lexicographic order.

        Returns:
            Array of shape (points_per_dim ** n, n)
        """
        if points_per_dim < 2:
            raise InputError(f"grid needs at least 2 points per dimension, got {points_per_dim}")
        if points_per_dim ** self.dim > MAX_GRID_POINTS:
            raise InputError(
                f"grid of {points_per_dim}^{self.dim} points exceeds {MAX_GRID_POINTS}; lower grid_points_per_dim"
            )
        axes = [np.linspace(lo, hi, points_per_dim) for lo, hi in zip(self.lower, self.upper)]
        mesh = np.meshgrid(*axes, indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=1)


@dataclass(frozen=True)
class UncertaintyDescriptor:
    kind: str
    dim: int
    halfwidth: float | None = None

    def __post_init__(self):
        if self.kind not in UNCERTAINTY_KINDS:
            raise InputError(f"unknown uncertainty kind {self.kind!r}, expected one of {UNCERTAINTY_KINDS}")
        if int(self.dim) != self.dim or self.dim < 1:
            raise InputError(f"uncertainty dimension must be a positive integer, got {self.dim}")
        if self.kind == "cube":
            if self.halfwidth is None or not self.halfwidth > 0:
                raise InputError(f"cube half-width must be positive, got {self.halfwidth}")


@dataclass(frozen=True)
class MinmaxProblem:
    """
    inf over the decision box of sup over the uncertainty of ``cost(x, xi)``.

    ``cost`` maps decision points (G, n) and scenarios (M, d) to a (G, M) array
    and must be pure. ``fixed_box`` is False only for problems whose decision set
    is a surrogate for an unbounded one and may be enlarged by diagnostics.
    """
    name: str
    decision: DecisionBox
    uncertainty: UncertaintyDescriptor
    cost: CostOracle = field(repr=False)
    marginal_closed_form: MarginalOracle | None = field(default=None, repr=False)
    optimum: float | None = None
    fixed_box: bool = True


@dataclass(frozen=True, eq=False)
class SampleBatch:
    scenarios: np.ndarray = field(repr=False)
    seed: int
    distribution: UncertaintyDescriptor

    def __post_init__(self):
        if self.scenarios.ndim != 2 or self.scenarios.shape[1] != self.distribution.dim:
            raise InputError(
                f"scenarios must have shape (N, {self.distribution.dim}), got {self.scenarios.shape}"
            )

    @property
    def size(self) -> int:
        return self.scenarios.shape[0]

    def head(self, n: int) -> "SampleBatch":
        """The first ``n`` scenarios of this stream."""
        if not 0 <= n <= self.size:
            raise InputError(f"cannot take {n} scenarios from a batch of {self.size}")
        return SampleBatch(self.scenarios[:n], self.seed, self.distribution)

    def extend(self, other: "SampleBatch") -> "SampleBatch":
        if other.distribution != self.distribution:
            raise InputError("cannot concatenate batches from different distributions")
        return SampleBatch(np.concatenate([self.scenarios, other.scenarios]), self.seed, self.distribution)


@dataclass(frozen=True)
class MinimizerConfig:
    grid_points_per_dim: int = 2001
    refinement: str = "golden_section_1d"
    refinement_tolerance: float = 1e-9
    chunk_elements: int = 2 ** 22

    def __post_init__(self):
        if self.grid_points_per_dim < 2:
            raise InputError(f"grid_points_per_dim must be >= 2, got {self.grid_points_per_dim}")
        if self.refinement not in REFINEMENTS:
            raise InputError(f"unknown refinement {self.refinement!r}, expected one of {REFINEMENTS}")
        if not self.refinement_tolerance > 0:
            raise InputError(f"refinement_tolerance must be positive, got {self.refinement_tolerance}")
        if self.chunk_elements < 1:
            raise InputError("chunk_elements must be positive")


@dataclass(frozen=True)
class ScenarioSolution:
    value: float
    minimizer: tuple[float, ...]
    sample_size: int
    seed: int
    config: MinimizerConfig
    grid_value: float
    refined: bool = False


@dataclass(frozen=True)
class TailEstimate:
    value: float
    mc_samples: int
    std_error: float
    threshold: float
    reference_source: str


@dataclass(frozen=True, eq=False)
class TailProfile:
    epsilon: float
    grid: np.ndarray = field(repr=False)
    t_hat: np.ndarray = field(repr=False)
    tau_hat: float
    mc_samples: int
    seed: int
    reference_value: float
    reference_source: str
    worst_case: bool = False

    @property
    def argmin(self) -> tuple[float, ...]:
        return tuple(float(v) for v in self.grid[int(np.argmin(self.t_hat))])

    @property
    def std_error_bound(self) -> float:
        return 1.0 / (2.0 * math.sqrt(self.mc_samples))


@dataclass(frozen=True)
class ObstructionVerdict:
    epsilon: float
    expansion_factors: tuple[float, ...]
    boxes: tuple[DecisionBox, ...]
    tau_hat: tuple[float, ...]
    threshold: float
    flag: str


@dataclass(frozen=True)
class BadSetEstimate:
    epsilon: float
    sample_size: int
    replicates: int
    inner: float
    value: float
    outer: float


@dataclass(frozen=True)
class TrigClassSpec:
    order: int
    dim: int
    L: float

    def __post_init__(self):
        if int(self.order) != self.order or self.order < 0:
            raise InputError(f"trigonometric order must be a nonnegative integer, got {self.order}")
        if int(self.dim) != self.dim or self.dim < 1:
            raise InputError(f"dimension must be a positive integer, got {self.dim}")
        if not self.L > 0:
            raise InputError(f"L2 bound must be positive, got {self.L}")

    @property
    def q(self) -> int:
        return (2 * self.order + 1) ** self.dim


@dataclass(frozen=True)
class SmoothTorusSpec:
    smoothness: int
    dim: int
    L: float
    L_tilde: float

    def __post_init__(self):
        if int(self.smoothness) != self.smoothness or self.smoothness < 1:
            raise InputError(f"smoothness must be a positive integer, got {self.smoothness}")
        if int(self.dim) != self.dim or self.dim < 1:
            raise InputError(f"dimension must be a positive integer, got {self.dim}")
        if 2 * self.smoothness <= self.dim:
            raise InputError(f"need 2s > d, got s={self.smoothness}, d={self.dim}")
        if not (self.L > 0 and self.L_tilde > 0):
            raise InputError("L and L_tilde must be positive")


@dataclass(frozen=True)
class GenericClassSpec:
    """A function class known only through ln C(eps/4)."""
    log_covering: float


@dataclass(frozen=True)
class ConvexClassSpec:
    n_dim: int


@dataclass(frozen=True)
class CoveringBound:
    log_value: float
    q_effective: int
    radius: float


@dataclass(frozen=True)
class PlanRequest:
    epsilon: float
    beta: float
    tau: float
    class_spec: TrigClassSpec | SmoothTorusSpec | GenericClassSpec | ConvexClassSpec


@dataclass(frozen=True)
class PlanResult:
    n_required: int
    family: str
    raw: float
    intermediates: dict = field(default_factory=dict)


@dataclass(frozen=True)
class ExperimentSpec:
    problem: str
    dims: tuple[int, ...]
    sizes: tuple[int, ...]
    replicates: int = 25
    master_seed: int = 0
    minimizer: MinimizerConfig = field(default_factory=MinimizerConfig)
    workers: int = 1

    def __post_init__(self):
        if self.replicates < 1:
            raise InputError(f"replicates must be >= 1, got {self.replicates}")
        if not self.sizes or any(n < 1 for n in self.sizes):
            raise InputError("sizes must be a nonempty list of positive integers")
        if any(b <= a for a, b in zip(self.sizes, self.sizes[1:])):
            raise InputError(f"sizes must be strictly ascending, got {list(self.sizes)}")
        if not self.dims or any(d < 1 for d in self.dims):
            raise InputError("dims must be a nonempty list of positive integers")
        if self.workers < 1:
            raise InputError("workers must be >= 1")


@dataclass(frozen=True)
class ErrorRow:
    d: int
    N: int
    mean_error: float
    std_error: float
    replicates: int
    seed: int


@dataclass(frozen=True)
class ErrorSurface:
    rows: tuple[ErrorRow, ...] = ()

    def dims(self) -> list[int]:
        return sorted({row.d for row in self.rows})

    def for_dim(self, d: int) -> list[ErrorRow]:
        return sorted((row for row in self.rows if row.d == d), key=lambda row: row.N)
