"""The torus-to-plane exponent-sum map, image sampling, and coverage.

For an order d, each row of the exponent matrix names one monomial in
the unit-circle variables z_1..z_phi(d); the map sends angle vectors to
the sum of those monomials. Period sets for prime-power moduli whose
order divides p-1 land inside the image of this map, and coverage()
quantifies how densely they fill it.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import asdict, dataclass
from typing import IO

import numpy as np

from .errors import ArityMismatch
from .numtheory import exponent_matrix, factorize, multiplicative_order
from .periods import PeriodSet

TWO_PI = 2.0 * math.pi

DEFAULT_SEED = 0


@dataclass(frozen=True)
class LaurentMap:
    """Sum over k of prod_j z_{j+1}**rows[k][j], each z_j on the unit circle."""

    d: int
    arity: int
    rows: tuple[tuple[int, ...], ...]

    def rows_array(self) -> np.ndarray:
        # int64 conversion fails loudly if a coefficient ever outgrows it
        return np.array(self.rows, dtype=np.int64)


def laurent_map(d: int) -> LaurentMap:
    mat = exponent_matrix(d)
    return LaurentMap(d=d, arity=mat.phi_d, rows=mat.rows)


def laurent_eval(lmap: LaurentMap, angles) -> complex:
    """Evaluate at z_j = exp(i*angles[j]): the phase of monomial k is the
    integer row k dotted with the angle vector."""
    theta = np.asarray(angles, dtype=np.float64)
    if theta.shape != (lmap.arity,):
        raise ArityMismatch(f"expected {lmap.arity} angles, got {theta.shape}")
    phases = lmap.rows_array() @ theta
    return complex(np.exp(1j * phases).sum())


def _iroot_ceil(count: int, arity: int) -> int:
    """Smallest m with m**arity >= count, exactly."""
    m = max(1, round(count ** (1.0 / arity)))
    while m**arity < count:
        m += 1
    while m > 1 and (m - 1) ** arity >= count:
        m -= 1
    return m


def sample_image(
    d: int,
    count: int,
    strategy: str = "grid",
    seed: int = DEFAULT_SEED,
) -> np.ndarray:
    """Deterministic samples of the map's image as a complex array.

    grid: ceil(count**(1/arity)) equispaced angles per axis (the full
    grid is returned, so the output may exceed count). random: uniform
    angles from a seeded generator.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    lmap = laurent_map(d)
    if strategy == "grid":
        m = _iroot_ceil(count, lmap.arity)
        axis = TWO_PI * np.arange(m, dtype=np.float64) / m
        grids = np.meshgrid(*([axis] * lmap.arity), indexing="ij")
        angles = np.stack([g.ravel() for g in grids], axis=1)
    elif strategy == "random":
        rng = np.random.default_rng(seed)
        angles = rng.uniform(0.0, TWO_PI, size=(count, lmap.arity))
    else:
        raise ValueError(f"unknown strategy {strategy!r}")
    rows = lmap.rows_array().astype(np.float64)
    out = np.empty(len(angles), dtype=np.complex128)
    step = 1 << 18  # bound the S x d phase buffer
    for lo in range(0, len(angles), step):
        phases = angles[lo : lo + step] @ rows.T
        out[lo : lo + step] = np.exp(1j * phases).sum(axis=1)
    return out


@dataclass(frozen=True)
class ApplicabilityReport:
    """Whether modulus q fits the fill-out hypotheses: q an odd prime
    power p**a with the order of omega dividing p-1."""

    q: int
    omega: int
    d: int
    is_prime_power: bool
    p: int | None
    a: int | None
    d_divides_p_minus_1: bool
    applicable: bool


def applicability_check(q: int, omega: int) -> ApplicabilityReport:
    d = multiplicative_order(omega, q)  # raises NotCoprime on bad input
    factors = factorize(q)
    is_pp = len(factors) == 1
    p, a = (next(iter(factors.items()))) if is_pp else (None, None)
    divides = is_pp and (p - 1) % d == 0
    return ApplicabilityReport(
        q=q,
        omega=omega % q,
        d=d,
        is_prime_power=is_pp,
        p=p,
        a=a,
        d_divides_p_minus_1=divides,
        applicable=bool(is_pp and p % 2 == 1 and divides),
    )


@dataclass(frozen=True)
class CoverageReport:
    epsilon: float
    fraction_covered: float
    max_point_distance: float
    sample_count: int
    strategy: str
    seed: int

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self, dest: str | os.PathLike | IO[str]) -> None:
        if hasattr(dest, "write"):
            json.dump(self.to_dict(), dest)
        else:
            with open(dest, "w") as fh:
                json.dump(self.to_dict(), fh)


def coverage_stats(
    points: np.ndarray, samples: np.ndarray, epsilon: float
) -> tuple[float, float]:
    """(fraction of samples within epsilon of a point, max distance from
    any point to its nearest sample)."""
    from scipy.spatial import cKDTree

    pts = np.column_stack([points.real, points.imag])
    smp = np.column_stack([samples.real, samples.imag])
    near_point = cKDTree(pts).query(smp)[0]
    fraction = float((near_point <= epsilon).mean())
    near_sample = cKDTree(smp).query(pts)[0]
    return fraction, float(near_sample.max())


def coverage(
    pset: PeriodSet,
    lmap: LaurentMap,
    epsilon: float,
    sample_count: int,
    strategy: str = "grid",
    seed: int = DEFAULT_SEED,
) -> CoverageReport:
    """Sample the map's image and measure the epsilon-coverage fraction plus
    the containment direction (how far any period point strays from the
    sampled image)."""
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    samples = sample_image(lmap.d, sample_count, strategy=strategy, seed=seed)
    fraction, max_dist = coverage_stats(pset.values, samples, epsilon)
    return CoverageReport(
        epsilon=epsilon,
        fraction_covered=fraction,
        max_point_distance=max_dist,
        sample_count=len(samples),
        strategy=strategy,
        seed=seed,
    )
