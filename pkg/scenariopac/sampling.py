"""
Seeded i.i.d. scenario generation.

Every batch comes from its own ``numpy.random.Philox`` generator keyed by a 64-bit
seed, so a replicate's scenarios depend only on its seed and never on which
worker draws it or in what order. Gaussian coordinates are produced by inverse
CDF (``scipy.special.ndtri``) applied to 53-bit uniforms on the open unit
interval; results are bitwise reproducible on a given numpy/scipy build.
"""
import numpy as np
from scipy.special import ndtri

from .errors import InputError
from .models import SampleBatch, UncertaintyDescriptor

MASK64 = (1 << 64) - 1
GOLDEN_GAMMA = 0x9E3779B97F4A7C15


def _mix64(z: int) -> int:
    # splitmix64 finalizer, a bijection on 64-bit words
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def spawn_substream(master_seed: int, replicate_index: int) -> int:
    """
    Seed of replicate ``replicate_index`` under ``master_seed``.

    The counter ``master + (index + 1) * gamma`` is injective in the index modulo
    2**64 (gamma is odd) and the finalizer is a bijection, so distinct indices
    never share a seed.
    """
    if replicate_index < 0:
        raise InputError(f"replicate index must be >= 0, got {replicate_index}")
    return _mix64((int(master_seed) + (int(replicate_index) + 1) * GOLDEN_GAMMA) & MASK64)


def _generator(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(int(seed) & MASK64))


def _check_counts(d: int, N: int):
    if int(d) != d or d < 1:
        raise InputError(f"dimension must be a positive integer, got {d}")
    if int(N) != N or N < 0:
        raise InputError(f"sample count must be a nonnegative integer, got {N}")


def sample_uniform_cube(d: int, a: float, N: int, seed: int) -> SampleBatch:
    _check_counts(d, N)
    if not a > 0:
        raise InputError(f"half-width must be positive, got {a}")
    rng = _generator(seed)
    scenarios = a * (2.0 * rng.random((N, d)) - 1.0)
    return SampleBatch(scenarios, seed, UncertaintyDescriptor("cube", d, a))


def sample_gaussian(d: int, N: int, seed: int) -> SampleBatch:
    _check_counts(d, N)
    rng = _generator(seed)
    u = (rng.integers(0, 2 ** 53, size=(N, d), dtype=np.int64) + 0.5) * 2.0 ** -53
    return SampleBatch(ndtri(u), seed, UncertaintyDescriptor("gaussian", d))


def sample_torus(d: int, N: int, seed: int) -> SampleBatch:
    """Uniform points of R^d / Z^d represented in [0, 1)^d."""
    _check_counts(d, N)
    rng = _generator(seed)
    return SampleBatch(rng.random((N, d)), seed, UncertaintyDescriptor("torus", d))


def sample(descriptor: UncertaintyDescriptor, N: int, seed: int) -> SampleBatch:
    if descriptor.kind == "cube":
        return sample_uniform_cube(descriptor.dim, descriptor.halfwidth, N, seed)
    if descriptor.kind == "gaussian":
        return sample_gaussian(descriptor.dim, N, seed)
    return sample_torus(descriptor.dim, N, seed)
