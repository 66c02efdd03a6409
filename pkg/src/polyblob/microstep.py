"""One micro time step for a particle ensemble at a mesh node.

The spring/entropy half-step is an implicit Euler move of the regularized
gradient flow, computed by minimizing the proximal objective

    J(q) = (Wi/dt) (1/N) sum_i |q_i - q_i^n|^2 + F[q],

whose stationarity condition is q_i = q_i^n - (dt / 2 Wi) * N grad_i F,
i.e. the implicit discretization of the configurational dynamics.  Every
accepted minimizer satisfies the per-step energy inequality

    F(out) - F(in) <= -(Wi / (N dt)) sum_i |q_i^out - q_i^in|^2

up to the declared slack, which is asserted as ``stability_ok``.

The flow-deformation half-step and a stochastic (Euler-Maruyama) oracle
of the same dynamics live here as well.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .backend import POT_CODE, impl
from .energy import _validate
from .errors import DegenerateEnsemble, OptimizerDivergence, RejectionOverflow
from .potentials import (
    FENE,
    BandwidthPolicy,
    Potential,
    potential_grad,
    select_bandwidth,
)

STABILITY_TOL = 1e-8
# Relative margin of the radial projection used after flow deformation.
PROJECTION_MARGIN = 1e-6


@dataclass
class MicroStepConfig:
    """Time step, relaxation number and optimizer knobs for one micro step."""

    dt: float
    Wi: float
    max_iters: int = 500
    grad_tol: float = 1e-8
    step_init: float = 1.0  # initial step in units of the explicit-Euler step
    feas_margin: float = 1e-10

    def __post_init__(self):
        if self.dt <= 0 or self.Wi <= 0:
            raise ValueError("dt and Wi must be positive")
        if self.max_iters < 1 or self.grad_tol <= 0 or self.step_init <= 0:
            raise ValueError("invalid optimizer settings")
        if not 0.0 < self.feas_margin < 1.0:
            raise ValueError("feas_margin must lie in (0, 1)")


@dataclass
class StepResult:
    ensemble_out: np.ndarray
    energy_before: float
    energy_after: float
    optimizer_iters: int
    stability_ok: bool
    stability_residual: float
    bandwidth_used: float
    move_sq: float


@dataclass
class FieldStepDiagnostics:
    """Aggregated micro diagnostics over all nodes of one field step."""

    max_stability_residual: float
    stability_violations: int
    mean_energy: float
    max_iters_used: int


def _feas_sq(pot: Potential, margin: float) -> float:
    if pot.kind != FENE:
        return math.inf
    return pot.b * (1.0 - margin)


def implicit_gradient_step(
    ensemble: np.ndarray,
    pot: Potential,
    policy: BandwidthPolicy,
    cfg: MicroStepConfig,
) -> StepResult:
    """Implicit spring/entropy step at one node (flow deformation excluded)."""
    q = _validate(ensemble, pot)
    h = select_bandwidth(policy, q)
    n = q.shape[0]
    c = cfg.Wi / cfg.dt
    kind = POT_CODE[pot.kind]
    b = pot.b if pot.kind == FENE else 0.0
    out, f_in, f_out, iters, move_sq = impl.proximal_minimize(
        q, h, c, kind, b, _feas_sq(pot, cfg.feas_margin),
        cfg.max_iters, cfg.grad_tol, cfg.step_init,
    )
    if iters >= cfg.max_iters and f_out >= f_in:
        _, grad = impl.free_energy_grad(out, h, kind, b)
        if np.max(np.abs(grad)) > cfg.grad_tol:
            raise OptimizerDivergence(
                f"no energy decrease after {cfg.max_iters} iterations"
            )
    resid = (f_out - f_in) + (c / n) * move_sq
    return StepResult(
        ensemble_out=out,
        energy_before=f_in,
        energy_after=f_out,
        optimizer_iters=iters,
        stability_ok=bool(resid <= STABILITY_TOL),
        stability_residual=float(resid),
        bandwidth_used=h,
        move_sq=float(move_sq),
    )


def implicit_step_field(
    particles: np.ndarray,
    pot: Potential,
    policy: BandwidthPolicy,
    cfg: MicroStepConfig,
    num_threads: int = 0,
) -> tuple[np.ndarray, FieldStepDiagnostics]:
    """Implicit spring/entropy step applied independently at every node.

    ``particles`` has shape (n_nodes, N, 2).  Bandwidths follow the policy
    per node, recomputed from the incoming ensembles.
    """
    q = np.ascontiguousarray(particles, dtype=float)
    m, n = q.shape[0], q.shape[1]
    if policy.kind == "fixed":
        h = np.full(m, policy.h)
    else:
        if n < 2:
            raise DegenerateEnsemble("median rule needs at least two particles")
        med_sq = impl.median_sq_batch(q, num_threads)
        if np.any(med_sq == 0.0):
            raise DegenerateEnsemble("all particles coincide; median distance is zero")
        h = med_sq / math.log(n)
    c = cfg.Wi / cfg.dt
    kind = POT_CODE[pot.kind]
    b = pot.b if pot.kind == FENE else 0.0
    out, f_in, f_out, iters, move_sq = impl.proximal_minimize_batch(
        q, h, c, kind, b, _feas_sq(pot, cfg.feas_margin),
        cfg.max_iters, cfg.grad_tol, cfg.step_init, num_threads,
    )
    resid = (f_out - f_in) + (c / n) * move_sq
    diag = FieldStepDiagnostics(
        max_stability_residual=float(resid.max()),
        stability_violations=int((resid > STABILITY_TOL).sum()),
        mean_energy=float(f_out.mean()),
        max_iters_used=int(iters.max()),
    )
    return out, diag


def deformation_update(
    ensemble: np.ndarray,
    grad_u: np.ndarray,
    dt: float,
    pot: Potential,
) -> np.ndarray:
    """Map each particle by (I + dt grad_u); FENE overshoots are projected
    radially back onto the feasible ball."""
    q = np.asarray(ensemble, dtype=float)
    g = np.asarray(grad_u, dtype=float)
    out = np.empty_like(q)
    out[..., 0] = q[..., 0] + dt * (g[0, 0] * q[..., 0] + g[0, 1] * q[..., 1])
    out[..., 1] = q[..., 1] + dt * (g[1, 0] * q[..., 0] + g[1, 1] * q[..., 1])
    if pot.kind == FENE:
        _project_fene(out, pot.b)
    return out


def deformation_update_field(
    particles: np.ndarray,
    grad_u: np.ndarray,
    dt: float,
    pot: Potential,
) -> np.ndarray:
    """deformation_update with a per-node velocity gradient (M, 2, 2)."""
    q = np.asarray(particles, dtype=float)
    g = np.asarray(grad_u, dtype=float)
    g00 = g[:, None, 0, 0]
    g01 = g[:, None, 0, 1]
    g10 = g[:, None, 1, 0]
    g11 = g[:, None, 1, 1]
    out = np.empty_like(q)
    out[..., 0] = q[..., 0] + dt * (g00 * q[..., 0] + g01 * q[..., 1])
    out[..., 1] = q[..., 1] + dt * (g10 * q[..., 0] + g11 * q[..., 1])
    if pot.kind == FENE:
        _project_fene(out, pot.b)
    return out


def _project_fene(q: np.ndarray, b: float) -> None:
    limit_sq = b * (1.0 - PROJECTION_MARGIN)
    r2 = q[..., 0] ** 2 + q[..., 1] ** 2
    over = r2 > limit_sq
    if np.any(over):
        scale = np.sqrt(limit_sq / r2[over])
        q[over] *= scale[:, None]


def sde_oracle_step(
    ensemble: np.ndarray,
    grad_u: np.ndarray,
    pot: Potential,
    Wi: float,
    dt: float,
    rng: np.random.Generator,
    sigma: float | None = None,
) -> np.ndarray:
    """Euler-Maruyama step of the configurational Langevin dynamics.

    Drift (grad_u) q - grad Psi(q) / (2 Wi), diffusion sqrt(1/Wi) per
    component (``sigma`` overrides the diffusion coefficient, e.g. 0 for
    the deterministic-drift limit).  For FENE the noise is resampled until
    the proposal is feasible; a particle failing 1000 resamples raises
    RejectionOverflow.
    """
    q = np.asarray(ensemble, dtype=float)
    g = np.asarray(grad_u, dtype=float)
    drift = np.empty_like(q)
    drift[:, 0] = g[0, 0] * q[:, 0] + g[0, 1] * q[:, 1]
    drift[:, 1] = g[1, 0] * q[:, 0] + g[1, 1] * q[:, 1]
    drift -= potential_grad(pot, q) / (2.0 * Wi)
    base = q + dt * drift
    scale = math.sqrt(dt / Wi) if sigma is None else sigma * math.sqrt(dt)
    out = base + scale * rng.standard_normal(q.shape)
    if pot.kind == FENE:
        limit_sq = pot.feasible_sq_limit
        bad = out[:, 0] ** 2 + out[:, 1] ** 2 >= limit_sq
        tries = 0
        while np.any(bad):
            tries += 1
            if tries > 1000:
                raise RejectionOverflow(
                    f"{int(bad.sum())} particles still infeasible after 1000 resamples"
                )
            k = int(bad.sum())
            out[bad] = base[bad] + scale * rng.standard_normal((k, 2))
            bad2 = out[:, 0] ** 2 + out[:, 1] ** 2 >= limit_sq
            bad = bad2
    return out


def sample_initial_ensemble(
    n: int,
    pot: Potential,
    rng: np.random.Generator,
    feas_margin: float = 1e-10,
) -> np.ndarray:
    """Standard-normal sample in 2D; FENE draws are rejection-sampled into
    the feasible ball."""
    q = rng.standard_normal((n, 2))
    if pot.kind == FENE:
        limit_sq = pot.b * (1.0 - feas_margin)
        bad = q[:, 0] ** 2 + q[:, 1] ** 2 >= limit_sq
        tries = 0
        while np.any(bad):
            tries += 1
            if tries > 1000:
                raise RejectionOverflow("initial sampling failed to stay feasible")
            k = int(bad.sum())
            q[bad] = rng.standard_normal((k, 2))
            bad = q[:, 0] ** 2 + q[:, 1] ** 2 >= limit_sq
    return q
