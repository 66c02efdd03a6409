"""Kernel-regularized free energy of a particle ensemble.

An ensemble is an (N, 2) float array of equally weighted configuration
vectors.  The free energy is

    F[q] = (1/N) sum_i [ ln( (1/N) sum_j K_h(q_i - q_j) ) + Psi(q_i) ]

with the self term j = i included in the mollified density.  The gradient
returned here is the literal gradient of this function (it carries the
1/N weight), so it can be checked against finite differences directly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .backend import POT_CODE, impl
from .errors import FeasibilityViolation, SizeMismatch
from .potentials import BandwidthPolicy, Kernel, Potential, check_feasible, select_bandwidth


@dataclass
class EnergyReport:
    """Free energy value, per-particle gradient and the bandwidth used."""

    value: float
    gradient: np.ndarray
    bandwidth_used: float


def _validate(ensemble: np.ndarray, pot: Potential) -> np.ndarray:
    q = np.ascontiguousarray(ensemble, dtype=float)
    if q.ndim != 2 or q.shape[1] != 2 or q.shape[0] < 1:
        raise SizeMismatch(f"ensemble must be (N, 2), got {q.shape}")
    if not np.all(np.isfinite(q)):
        raise FeasibilityViolation("ensemble contains non-finite particles")
    check_feasible(pot, q)
    return q


def _pot_args(pot: Potential) -> tuple[int, float]:
    return POT_CODE[pot.kind], pot.b if pot.kind == "fene" else 0.0


def discrete_free_energy(ensemble: np.ndarray, pot: Potential, k: Kernel) -> float:
    """Regularized free energy of the ensemble at bandwidth k.h."""
    q = _validate(ensemble, pot)
    kind, b = _pot_args(pot)
    return impl.free_energy(q, k.h, kind, b)


def free_energy_gradient(ensemble: np.ndarray, pot: Potential, k: Kernel) -> np.ndarray:
    """Gradient of discrete_free_energy with respect to each particle."""
    q = _validate(ensemble, pot)
    kind, b = _pot_args(pot)
    return impl.free_energy_grad(q, k.h, kind, b)[1]


def energy_report(ensemble: np.ndarray, pot: Potential, policy: BandwidthPolicy) -> EnergyReport:
    """Value and gradient with the bandwidth chosen by ``policy``."""
    q = _validate(ensemble, pot)
    h = select_bandwidth(policy, q)
    kind, b = _pot_args(pot)
    value, grad = impl.free_energy_grad(q, h, kind, b)
    return EnergyReport(value, grad, h)


def step_objective(
    ens_trial: np.ndarray,
    ens_prev: np.ndarray,
    pot: Potential,
    k: Kernel,
    dt: float,
) -> float:
    """Proximal objective (1/N) sum_i |q_i - q_i^prev|^2 / (2 dt) + F[trial].

    Minimizing this over the trial ensemble is the implicit-Euler step of
    the particle gradient flow with step dt.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    qt = _validate(ens_trial, pot)
    qp = np.asarray(ens_prev, dtype=float)
    if qt.shape != qp.shape:
        raise SizeMismatch(f"trial {qt.shape} vs previous {qp.shape}")
    n = qt.shape[0]
    move = qt - qp
    prox = float((move * move).sum()) / (2.0 * dt * n)
    return prox + discrete_free_energy(qt, pot, k)
