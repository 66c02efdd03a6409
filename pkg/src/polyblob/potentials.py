"""Spring potentials, the Gaussian mollifier kernel, and bandwidth rules.

Everything here is pointwise math consumed by the particle modules.
Configuration vectors are 2-vectors; array arguments broadcast over a
trailing axis of length 2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import pdist

from .errors import DegenerateEnsemble, FeasibilityViolation

HOOKEAN = "hookean"
FENE = "fene"

# Relative margin defining the closed feasible ball |q|^2 <= b*(1 - FEAS_MARGIN)
# used by all evaluation guards; keeps the log barrier away from overflow.
FEAS_MARGIN = 1e-10


@dataclass(frozen=True)
class Potential:
    """Spring force law: Hookean or finitely extensible (FENE).

    ``b`` is the dimensionless extensibility parameter of the FENE barrier
    and is ignored for the Hookean law.
    """

    kind: str
    b: float = math.nan

    def __post_init__(self):
        if self.kind not in (HOOKEAN, FENE):
            raise ValueError(f"unknown potential kind {self.kind!r}")
        if self.kind == FENE and not self.b > 0:
            raise ValueError("FENE potential requires b > 0")

    @staticmethod
    def hookean() -> "Potential":
        return Potential(HOOKEAN)

    @staticmethod
    def fene(b: float) -> "Potential":
        return Potential(FENE, float(b))

    @property
    def feasible_sq_limit(self) -> float:
        """Largest admissible |q|^2 (inf for Hookean)."""
        if self.kind == HOOKEAN:
            return math.inf
        return self.b * (1.0 - FEAS_MARGIN)


@dataclass(frozen=True)
class Kernel:
    """Isotropic Gaussian mollifier with bandwidth ``h`` in dimension ``dim``.

    Only dim=2 is supported; the field exists to make the normalization
    explicit.
    """

    h: float
    dim: int = 2

    def __post_init__(self):
        if not self.h > 0:
            raise ValueError("kernel bandwidth must be positive")
        if self.dim != 2:
            raise ValueError("only 2-dimensional configuration space is supported")


MEDIAN_RULE = "median"
FIXED = "fixed"


@dataclass(frozen=True)
class BandwidthPolicy:
    """How the mollifier bandwidth is chosen for an ensemble."""

    kind: str
    h: float = math.nan

    @staticmethod
    def median_rule() -> "BandwidthPolicy":
        return BandwidthPolicy(MEDIAN_RULE)

    @staticmethod
    def fixed(h: float) -> "BandwidthPolicy":
        if not h > 0:
            raise ValueError("fixed bandwidth must be positive")
        return BandwidthPolicy(FIXED, float(h))


def check_feasible(pot: Potential, q: np.ndarray) -> None:
    """Raise FeasibilityViolation if any FENE particle sits outside its ball."""
    if pot.kind != FENE:
        return
    q = np.asarray(q, dtype=float)
    r2 = np.einsum("...i,...i->...", q, q)
    if np.any(r2 > pot.feasible_sq_limit):
        worst = float(np.max(r2))
        raise FeasibilityViolation(
            f"|q|^2 = {worst:.6g} exceeds the FENE bound b = {pot.b:.6g}"
        )


def potential_value(pot: Potential, q: np.ndarray) -> np.ndarray | float:
    """Elastic energy of one or more configuration vectors.

    Hookean: |q|^2 / 2.  FENE: -(b/2) log(1 - |q|^2/b), defined only inside
    the feasible ball.
    """
    q = np.asarray(q, dtype=float)
    r2 = np.einsum("...i,...i->...", q, q)
    if pot.kind == HOOKEAN:
        out = 0.5 * r2
    else:
        check_feasible(pot, q)
        out = -0.5 * pot.b * np.log1p(-r2 / pot.b)
    return float(out) if out.ndim == 0 else out


def potential_grad(pot: Potential, q: np.ndarray) -> np.ndarray:
    """Gradient of the elastic energy: q for Hookean, q/(1 - |q|^2/b) for FENE."""
    q = np.asarray(q, dtype=float)
    if pot.kind == HOOKEAN:
        return q.copy()
    check_feasible(pot, q)
    r2 = np.einsum("...i,...i->...", q, q)
    return q / (1.0 - r2 / pot.b)[..., None]


def kernel_value(k: Kernel, q1: np.ndarray, q2: np.ndarray) -> np.ndarray | float:
    """Gaussian mollifier K_h(q1 - q2) = exp(-|q1-q2|^2 / 2h^2) / (2 pi h^2)."""
    d = np.asarray(q1, dtype=float) - np.asarray(q2, dtype=float)
    r2 = np.einsum("...i,...i->...", d, d)
    out = np.exp(-r2 / (2.0 * k.h**2)) / (2.0 * math.pi * k.h**2)
    return float(out) if out.ndim == 0 else out


def kernel_grad(k: Kernel, q1: np.ndarray, q2: np.ndarray) -> np.ndarray:
    """Gradient of kernel_value with respect to its first argument."""
    d = np.asarray(q1, dtype=float) - np.asarray(q2, dtype=float)
    r2 = np.einsum("...i,...i->...", d, d)
    val = np.exp(-r2 / (2.0 * k.h**2)) / (2.0 * math.pi * k.h**2)
    return -d / k.h**2 * val[..., None]


def _median_pairwise_sq(ensemble: np.ndarray) -> float:
    """Lower median of the squared pairwise distances (same order statistic
    as the distances themselves, computed without square roots)."""
    q = np.ascontiguousarray(ensemble, dtype=float)
    if q.ndim != 2 or q.shape[0] < 2:
        raise DegenerateEnsemble("median rule needs at least two particles")
    d = pdist(q, "sqeuclidean")
    idx = (d.size - 1) // 2
    return float(np.partition(d, idx)[idx])


def median_pairwise_distance(ensemble: np.ndarray) -> float:
    """Lower median of all N(N-1)/2 pairwise Euclidean distances.

    For an even count the element at index floor((m-1)/2) of the sorted
    list is returned (no averaging), so the result is always one of the
    actual distances.
    """
    return math.sqrt(_median_pairwise_sq(ensemble))


def select_bandwidth(policy: BandwidthPolicy, ensemble: np.ndarray) -> float:
    """Bandwidth for the given ensemble: fixed value, or med^2 / ln N."""
    if policy.kind == FIXED:
        return policy.h
    n = np.asarray(ensemble).shape[0]
    med_sq = _median_pairwise_sq(ensemble)
    if med_sq == 0.0:
        raise DegenerateEnsemble("all particles coincide; median distance is zero")
    return med_sq / math.log(n)
