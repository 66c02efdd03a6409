"""Configurational (Kramers) stress of particle ensembles.

tau = (eps_p / Wi) (1/N) sum_i grad Psi(q_i) (x) q_i.  Because grad Psi is
parallel to q for both spring laws, the tensor is symmetric; only the
three independent components (tau11, tau12, tau22) are stored.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .energy import _validate
from .errors import SizeMismatch
from .potentials import FENE, Potential


@dataclass
class StressField:
    """Nodal symmetric stress on the fine mesh, components (tau11, tau12, tau22)."""

    tau: np.ndarray  # (n_nodes, 3)

    @property
    def n_nodes(self) -> int:
        return self.tau.shape[0]

    def as_matrices(self) -> np.ndarray:
        """Full (n, 2, 2) symmetric tensors (for consumers that want them)."""
        out = np.empty((self.tau.shape[0], 2, 2))
        out[:, 0, 0] = self.tau[:, 0]
        out[:, 0, 1] = self.tau[:, 1]
        out[:, 1, 0] = self.tau[:, 1]
        out[:, 1, 1] = self.tau[:, 2]
        return out


def _grad_psi_components(q: np.ndarray, pot: Potential):
    if pot.kind == FENE:
        r2 = q[..., 0] ** 2 + q[..., 1] ** 2
        fac = 1.0 / (1.0 - r2 / pot.b)
        return q[..., 0] * fac, q[..., 1] * fac
    return q[..., 0], q[..., 1]


def node_stress(ensemble: np.ndarray, pot: Potential, eps_p: float, Wi: float) -> np.ndarray:
    """Symmetric 2x2 stress tensor of one ensemble."""
    q = _validate(ensemble, pot)
    g1, g2 = _grad_psi_components(q, pot)
    coef = eps_p / Wi
    t11 = coef * np.mean(g1 * q[:, 0])
    t12 = coef * np.mean(g1 * q[:, 1])
    t22 = coef * np.mean(g2 * q[:, 1])
    return np.array([[t11, t12], [t12, t22]])


def field_stress(particles: np.ndarray, pot: Potential, eps_p: float, Wi: float) -> np.ndarray:
    """Stress components (M, 3) for a stack of per-node ensembles (M, N, 2)."""
    q = np.asarray(particles, dtype=float)
    g1, g2 = _grad_psi_components(q, pot)
    coef = eps_p / Wi
    out = np.empty((q.shape[0], 3))
    out[:, 0] = coef * np.mean(g1 * q[..., 0], axis=1)
    out[:, 1] = coef * np.mean(g1 * q[..., 1], axis=1)
    out[:, 2] = coef * np.mean(g2 * q[..., 1], axis=1)
    return out


def project_stress(nodal_values: np.ndarray, mesh_pair) -> StressField:
    """Nodal interpolation onto the piecewise-linear stress space.

    Accepts (M, 3) component arrays or (M, 2, 2) symmetric tensors, one per
    fine-mesh node; the projection is the identity on nodal values and
    barycentric-linear inside elements.
    """
    vals = np.asarray(nodal_values, dtype=float)
    if vals.ndim == 3 and vals.shape[1:] == (2, 2):
        if not np.allclose(vals[:, 0, 1], vals[:, 1, 0], rtol=0, atol=1e-12):
            raise SizeMismatch("stress tensors must be symmetric")
        vals = np.stack([vals[:, 0, 0], vals[:, 0, 1], vals[:, 1, 1]], axis=1)
    if vals.ndim != 2 or vals.shape[1] != 3:
        raise SizeMismatch(f"expected (M, 3) or (M, 2, 2), got {vals.shape}")
    if vals.shape[0] != mesh_pair.fine.n_nodes:
        raise SizeMismatch(
            f"{vals.shape[0]} nodal tensors for {mesh_pair.fine.n_nodes} fine nodes"
        )
    return StressField(tau=vals.copy())
