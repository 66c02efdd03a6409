"""Operator-splitting orchestration of one coupled time step.

Order of one step: momentum solve with the current stress, pressure
projection, implicit spring/entropy step at every node, flow deformation
with the post-projection velocity gradient, semi-Lagrangian pullback of
the per-node ensembles, stress refresh.  All reads of the particle field
during the pullback come from the pre-step field (double buffering), so
node processing order cannot matter.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field, fields

import numpy as np

from .errors import ConfigError, SizeMismatch
from .fem import MacroState, MeshPair, momentum_step, pressure_correction
from .microstep import (
    FieldStepDiagnostics,
    MicroStepConfig,
    deformation_update_field,
    implicit_step_field,
)
from .potentials import BandwidthPolicy, Potential
from .stress import field_stress


@dataclass
class SimConfig:
    """Nondimensional parameter set plus run controls for one simulation."""

    Re: float
    Wi: float
    eta_s: float
    eps_p: float
    potential: Potential
    N: int
    dt: float
    t_end: float
    bandwidth: BandwidthPolicy
    seed: int = 0
    scenario: str = ""
    max_iters: int = 500
    grad_tol: float = 1e-8
    step_init: float = 1.0
    feas_margin: float = 1e-10
    output_every: int = 10

    def __post_init__(self):
        if not (self.Re > 0 and self.Wi > 0):
            raise ConfigError("Re and Wi must be positive")
        if self.eta_s < 0 or self.eps_p < 0:
            raise ConfigError("viscosity fractions must be nonnegative")
        if not self.dt > 0 or not self.t_end > 0:
            raise ConfigError("dt and t_end must be positive")
        if self.N < 1:
            raise ConfigError("particle count must be at least 1")
        if self.output_every < 1:
            raise ConfigError("output cadence must be at least 1")

    def micro_config(self) -> MicroStepConfig:
        return MicroStepConfig(
            dt=self.dt,
            Wi=self.Wi,
            max_iters=self.max_iters,
            grad_tol=self.grad_tol,
            step_init=self.step_init,
            feas_margin=self.feas_margin,
        )

    def config_hash(self) -> str:
        parts = []
        for f in fields(self):
            parts.append(f"{f.name}={getattr(self, f.name)!r}")
        return hashlib.sha256(";".join(parts).encode()).hexdigest()


@dataclass
class ParticleField:
    """Per-fine-node ensembles, shape (n_nodes, N, 2), shared particle count."""

    q: np.ndarray

    @property
    def n_nodes(self) -> int:
        return self.q.shape[0]

    @property
    def n_particles(self) -> int:
        return self.q.shape[1]


def uniform_particle_field(n_nodes: int, ensemble: np.ndarray) -> ParticleField:
    """Every node starts from the same initial sample."""
    q = np.repeat(np.asarray(ensemble, dtype=float)[None], n_nodes, axis=0)
    return ParticleField(np.ascontiguousarray(q))


@dataclass
class StepDiagnostics:
    div_residual: float
    micro: FieldStepDiagnostics


def velocity_gradient_at_nodes(u: np.ndarray, mesh) -> np.ndarray:
    """Nodal velocity gradient: area-weighted average of the elementwise
    P1 gradients over elements incident to each node (exact for affine u)."""
    tri = mesh.triangles.astype(np.int64)
    uv = u[tri]
    grads = np.einsum("mvc,mvd->mcd", uv, mesh.gradlam)     # (m, 2, 2)
    acc = np.zeros((mesh.n_nodes, 2, 2))
    wsum = np.zeros(mesh.n_nodes)
    weighted = grads * mesh.areas[:, None, None]
    for v in range(3):
        np.add.at(acc, tri[:, v], weighted)
        np.add.at(wsum, tri[:, v], mesh.areas)
    return acc / wsum[:, None, None]


def locate_barycentric(mesh, pts: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Containing element and barycentric weights of points in a structured
    mesh.  Points outside the domain are clamped to it (wrapped in x for
    periodic meshes); weights are clipped to [0, 1] and renormalized so
    they stay a convex combination under roundoff."""
    x = pts[:, 0].copy()
    y = np.clip(pts[:, 1], 0.0, mesh.Ly)
    if mesh.periodic_x:
        x = np.mod(x, mesh.Lx)
    else:
        x = np.clip(x, 0.0, mesh.Lx)
    hx, hy = mesh.hx, mesh.hy
    a = np.clip((x / hx).astype(np.int64), 0, mesh.nx - 1)
    b = np.clip((y / hy).astype(np.int64), 0, mesh.ny - 1)
    xi = x / hx - a
    eta = y / hy - b
    lower = eta <= xi
    elem = (b * mesh.nx + a) * 2 + (~lower).astype(np.int64)
    w = np.empty((pts.shape[0], 3))
    # lower triangle (A, B, C): (1-xi, xi-eta, eta); upper (A, C, D): (1-eta, xi, eta-xi)
    w[lower, 0] = 1.0 - xi[lower]
    w[lower, 1] = xi[lower] - eta[lower]
    w[lower, 2] = eta[lower]
    up = ~lower
    w[up, 0] = 1.0 - eta[up]
    w[up, 1] = xi[up]
    w[up, 2] = eta[up] - xi[up]
    np.clip(w, 0.0, 1.0, out=w)
    w /= w.sum(axis=1)[:, None]
    return elem, w


def advect_and_interpolate(
    particles: ParticleField | np.ndarray,
    u: np.ndarray,
    mp: MeshPair,
    dt: float,
) -> ParticleField:
    """Semi-Lagrangian pullback of the particle field.

    Each node's new ensemble is the barycentric combination, per particle
    index, of the three nodal ensembles of the triangle containing the
    departure point x - dt u(x).  Convexity of the weights keeps FENE
    ensembles feasible.
    """
    q = particles.q if isinstance(particles, ParticleField) else np.asarray(particles)
    fine = mp.fine
    if q.shape[0] != fine.n_nodes:
        raise SizeMismatch("particle field does not match the fine mesh")
    depart = fine.nodes - dt * u
    elem, w = locate_barycentric(fine, depart)
    verts = fine.triangles.astype(np.int64)[elem]
    out = (
        w[:, 0, None, None] * q[verts[:, 0]]
        + w[:, 1, None, None] * q[verts[:, 1]]
        + w[:, 2, None, None] * q[verts[:, 2]]
    )
    return ParticleField(out)


def full_time_step(
    macro: MacroState,
    particles: ParticleField,
    mp: MeshPair,
    cfg: SimConfig,
    bc,
    num_threads: int = 0,
    projection_mode: str = "darcy",
) -> tuple[MacroState, ParticleField, StepDiagnostics]:
    """Advance the coupled system by one dt."""
    u_tilde = momentum_step(macro, mp, cfg, bc)
    u_new, p_new, info = pressure_correction(
        u_tilde, macro, mp, cfg, bc, mode=projection_mode
    )
    q1, micro_diag = implicit_step_field(
        particles.q, cfg.potential, cfg.bandwidth, cfg.micro_config(), num_threads
    )
    grad_u = velocity_gradient_at_nodes(u_new, mp.fine)
    q2 = deformation_update_field(q1, grad_u, cfg.dt, cfg.potential)
    new_field = advect_and_interpolate(q2, u_new, mp, cfg.dt)
    tau = field_stress(new_field.q, cfg.potential, cfg.eps_p, cfg.Wi)
    diag = StepDiagnostics(div_residual=info["div_residual"], micro=micro_diag)
    return MacroState(u_new, p_new, tau), new_field, diag


# ---------------------------------------------------------------------------
# checkpointing


def save_checkpoint(
    path,
    step: int,
    t: float,
    cfg: SimConfig,
    macro: MacroState,
    particles: ParticleField,
) -> None:
    """Single-file binary snapshot; restart reproduces trajectories bitwise."""
    np.savez_compressed(
        path,
        step=np.int64(step),
        t=np.float64(t),
        config_hash=np.bytes_(cfg.config_hash().encode()),
        u=macro.u,
        p=macro.p,
        tau=macro.tau,
        particles=particles.q,
    )


def load_checkpoint(path, cfg: SimConfig | None = None):
    """Load a snapshot; if ``cfg`` is given its hash must match."""
    with np.load(path) as data:
        stored = bytes(data["config_hash"]).decode()
        if cfg is not None and stored != cfg.config_hash():
            raise ConfigError("checkpoint was written with a different configuration")
        macro = MacroState(u=data["u"].copy(), p=data["p"].copy(), tau=data["tau"].copy())
        particles = ParticleField(np.ascontiguousarray(data["particles"]))
        return int(data["step"]), float(data["t"]), macro, particles
