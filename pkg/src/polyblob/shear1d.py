"""Start-up plane Couette flow reduced to one space dimension.

The channel occupies y in [0, 1]; the lower plane moves with velocity
``u_lid`` from t = 0, the upper plane is fixed.  Velocity obeys

    Re du/dt = eta_s d2u/dy2 + d tau21 / dy

with the shear stress supplied by per-node particle ensembles.  Because
the flow is unidirectional the ensembles see only the local shear rate
(no spatial advection of configurations).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from .errors import LinearSolveFailure
from .microstep import deformation_update_field, implicit_step_field
from .stress import field_stress


@dataclass
class Couette1DState:
    y: np.ndarray          # (M+1,) node coordinates
    u: np.ndarray          # (M+1,)
    particles: np.ndarray  # (M+1, N, 2)
    tau21: np.ndarray      # (M+1,)
    t: float


class CouetteSolver:
    """Backward-Euler diffusion with explicit stress source on a uniform
    P1 mesh; the operator is factorized once."""

    def __init__(self, cfg, n_elements: int, u_lid: float = 1.0):
        self.cfg = cfg
        self.m = n_elements
        self.u_lid = u_lid
        self.h = 1.0 / n_elements
        n = n_elements + 1
        h = self.h
        main_m = np.full(n, 2.0 * h / 3.0)
        main_m[[0, -1]] = h / 3.0
        off_m = np.full(n - 1, h / 6.0)
        self.mass = sp.diags([off_m, main_m, off_m], [-1, 0, 1], format="csr")
        main_k = np.full(n, 2.0 / h)
        main_k[[0, -1]] = 1.0 / h
        off_k = np.full(n - 1, -1.0 / h)
        stiff = sp.diags([off_k, main_k, off_k], [-1, 0, 1], format="csr")
        a = (cfg.Re / cfg.dt) * self.mass + cfg.eta_s * stiff
        a = a.tolil()
        for row in (0, n - 1):
            a.rows[row] = [row]
            a.data[row] = [1.0]
        try:
            self.lu = splu(a.tocsc())
        except RuntimeError as exc:
            raise LinearSolveFailure(str(exc)) from exc

    def initial_state(self, ensemble: np.ndarray) -> Couette1DState:
        """Fluid at rest; the same initial sample at every node."""
        n = self.m + 1
        particles = np.ascontiguousarray(
            np.repeat(np.asarray(ensemble, dtype=float)[None], n, axis=0)
        )
        tau = field_stress(particles, self.cfg.potential, self.cfg.eps_p, self.cfg.Wi)
        return Couette1DState(
            y=np.linspace(0.0, 1.0, n),
            u=np.zeros(n),
            particles=particles,
            tau21=tau[:, 1],
            t=0.0,
        )

    def _stress_source(self, tau21: np.ndarray) -> np.ndarray:
        """(d tau / dy, phi_i) with piecewise-linear tau."""
        s = np.empty_like(tau21)
        s[1:-1] = 0.5 * (tau21[2:] - tau21[:-2])
        s[0] = 0.5 * (tau21[1] - tau21[0])
        s[-1] = 0.5 * (tau21[-1] - tau21[-2])
        return s

    def shear_rate_at_nodes(self, u: np.ndarray) -> np.ndarray:
        """Nodal du/dy: average of the two adjacent element slopes inside
        the channel, one-sided at the plates."""
        slopes = np.diff(u) / self.h
        dudy = np.empty_like(u)
        dudy[1:-1] = 0.5 * (slopes[:-1] + slopes[1:])
        dudy[0] = slopes[0]
        dudy[-1] = slopes[-1]
        return dudy

    def macro_step(self, u: np.ndarray, tau21: np.ndarray) -> np.ndarray:
        rhs = (self.cfg.Re / self.cfg.dt) * (self.mass @ u) + self._stress_source(tau21)
        rhs[0] = self.u_lid
        rhs[-1] = 0.0
        u_new = self.lu.solve(rhs)
        if not np.all(np.isfinite(u_new)):
            raise LinearSolveFailure("non-finite Couette velocity")
        return u_new

    def step(self, state: Couette1DState, num_threads: int = 0):
        """One macro + micro step; returns the new state and micro diagnostics."""
        cfg = self.cfg
        u_new = self.macro_step(state.u, state.tau21)
        q1, diag = implicit_step_field(
            state.particles, cfg.potential, cfg.bandwidth, cfg.micro_config(), num_threads
        )
        dudy = self.shear_rate_at_nodes(u_new)
        grad_u = np.zeros((u_new.shape[0], 2, 2))
        grad_u[:, 0, 1] = dudy
        q2 = deformation_update_field(q1, grad_u, cfg.dt, cfg.potential)
        tau = field_stress(q2, cfg.potential, cfg.eps_p, cfg.Wi)
        new_state = Couette1DState(
            y=state.y,
            u=u_new,
            particles=q2,
            tau21=tau[:, 1],
            t=state.t + cfg.dt,
        )
        return new_state, diag


def couette_step(state: Couette1DState, solver: CouetteSolver, num_threads: int = 0):
    """Functional wrapper around CouetteSolver.step."""
    return solver.step(state, num_threads)
