"""Fast invariant battery behind the ``verify`` CLI subcommand.

Each check is a pure function returning (ok, detail); the battery runs in
seconds and covers the structural invariants that must hold regardless of
scenario parameters.
"""

from __future__ import annotations

import io as _io
import math
import os
import tempfile

import numpy as np

from .backend import backend_name, get_backend
from .coupling import (
    SimConfig,
    advect_and_interpolate,
    load_checkpoint,
    save_checkpoint,
    uniform_particle_field,
    velocity_gradient_at_nodes,
)
from .energy import discrete_free_energy, free_energy_gradient
from .fem import build_mesh_pair, pressure_correction, momentum_step, zero_macro_state
from .microstep import MicroStepConfig, implicit_gradient_step, sample_initial_ensemble
from .potentials import BandwidthPolicy, Kernel, Potential, kernel_grad, kernel_value, potential_grad, potential_value, select_bandwidth
from .stress import field_stress, node_stress


def _fd_gradient(fun, q, eps=1e-6):
    g = np.zeros_like(q)
    for i in range(q.shape[0]):
        for d in range(2):
            qp = q.copy()
            qp[i, d] += eps
            qm = q.copy()
            qm[i, d] -= eps
            g[i, d] = (fun(qp) - fun(qm)) / (2 * eps)
    return g


def check_kernel_identities():
    rng = np.random.default_rng(7)
    k = Kernel(h=0.8)
    a, b = rng.standard_normal(2), rng.standard_normal(2)
    sym = abs(kernel_value(k, a, b) - kernel_value(k, b, a))
    anti = np.max(np.abs(kernel_grad(k, a, b) + kernel_grad(k, b, a)))
    peak = kernel_value(k, a, a) - 1.0 / (2 * math.pi * k.h**2)
    ok = sym == 0.0 and anti == 0.0 and abs(peak) < 1e-15
    return ok, f"sym={sym:g} antisym={anti:g}"


def check_potential_gradients():
    rng = np.random.default_rng(8)
    worst = 0.0
    for pot in (Potential.hookean(), Potential.fene(math.sqrt(50.0))):
        for _ in range(20):
            q = rng.standard_normal(2)
            if pot.kind == "fene":
                q = q / np.linalg.norm(q) * rng.uniform(0, 0.95 * math.sqrt(pot.b))
            g = potential_grad(pot, q)
            gfd = np.array(
                [
                    (potential_value(pot, q + e) - potential_value(pot, q - e)) / 2e-6
                    for e in (np.array([1e-6, 0.0]), np.array([0.0, 1e-6]))
                ]
            )
            worst = max(worst, float(np.max(np.abs(g - gfd)) / max(1.0, np.max(np.abs(g)))))
    return worst < 1e-5, f"max rel err {worst:.2e}"


def check_energy_gradient():
    rng = np.random.default_rng(9)
    worst = 0.0
    for n in (1, 2, 5):
        q = rng.standard_normal((n, 2))
        pot = Potential.hookean()
        k = Kernel(h=0.7)
        g = free_energy_gradient(q, pot, k)
        gfd = _fd_gradient(lambda qq: discrete_free_energy(qq, pot, k), q)
        scale = max(np.max(np.abs(g)), 1e-12)
        worst = max(worst, float(np.max(np.abs(g - gfd)) / scale))
    return worst < 1e-5, f"max rel err {worst:.2e}"


def check_energy_lower_bound():
    rng = np.random.default_rng(10)
    ok = True
    for _ in range(20):
        n = int(rng.integers(1, 30))
        h = float(rng.uniform(0.05, 2.0))
        q = rng.standard_normal((n, 2)) * rng.uniform(0.1, 3.0)
        f = discrete_free_energy(q, Potential.hookean(), Kernel(h=h))
        ok &= f >= math.log(1.0 / (n * 2 * math.pi * h * h)) - 1e-12
    return ok, "F >= ln(1/(2 pi N h^2))"


def check_single_particle_step():
    cfg = MicroStepConfig(dt=0.1, Wi=1.0, grad_tol=1e-12)
    res = implicit_gradient_step(
        np.array([[1.0, 0.0]]), Potential.hookean(), BandwidthPolicy.fixed(1.0), cfg
    )
    err = abs(res.ensemble_out[0, 0] - 1.0 / 1.05)
    return err < 1e-10 and res.stability_ok, f"err {err:.2e}"


def check_energy_stability():
    rng = np.random.default_rng(11)
    q = rng.standard_normal((50, 2))
    cfg = MicroStepConfig(dt=1e-3, Wi=1.0)
    pot = Potential.hookean()
    pol = BandwidthPolicy.median_rule()
    worst = -math.inf
    for _ in range(100):
        res = implicit_gradient_step(q, pot, pol, cfg)
        q = res.ensemble_out
        worst = max(worst, res.stability_residual)
        if not res.stability_ok:
            return False, f"residual {worst:.2e}"
    return True, f"max residual {worst:.2e}"


def check_mesh_pair():
    mp = build_mesh_pair(3, 2, 1.0, 1.0)
    ok = mp.coarse.n_nodes == 12 and mp.coarse.n_elements == 12
    ok &= mp.fine.n_elements == 48 and mp.fine.n_nodes == 35
    ok &= abs(mp.fine.areas.sum() - 1.0) < 1e-12
    ok &= abs(mp.coarse.areas.sum() - 1.0) < 1e-12
    return ok, "counts and areas"


def check_projection():
    from .scenarios import cavity_bc

    mp = build_mesh_pair(6, 6, 1.0, 1.0)
    cfg = SimConfig(
        Re=1.0, Wi=1.0, eta_s=0.11, eps_p=0.0, potential=Potential.hookean(),
        N=1, dt=1e-3, t_end=1.0, bandwidth=BandwidthPolicy.fixed(1.0),
    )
    bc = cavity_bc(mp)
    state = zero_macro_state(mp)
    ut = momentum_step(state, mp, cfg, bc)
    _, _, info = pressure_correction(ut, state, mp, cfg, bc)
    return info["div_residual"] <= 1e-8, f"div residual {info['div_residual']:.2e}"


def check_advection_identities():
    mp = build_mesh_pair(4, 4, 1.0, 1.0)
    rng = np.random.default_rng(12)
    ens = rng.standard_normal((8, 2))
    pf = uniform_particle_field(mp.fine.n_nodes, ens)
    out = advect_and_interpolate(pf, np.zeros((mp.fine.n_nodes, 2)), mp, 1e-3)
    ok = np.array_equal(out.q, pf.q)
    u = rng.standard_normal((mp.fine.n_nodes, 2))
    out2 = advect_and_interpolate(pf, u, mp, 1e-3)
    ok &= bool(np.max(np.abs(out2.q - pf.q)) < 1e-12)
    gu = velocity_gradient_at_nodes(
        np.stack([mp.fine.nodes[:, 1], np.zeros(mp.fine.n_nodes)], 1), mp.fine
    )
    ok &= bool(np.max(np.abs(gu - np.array([[0.0, 1.0], [0.0, 0.0]]))) < 1e-12)
    return ok, "pullback identity / constant field / affine gradient"


def check_checkpoint_roundtrip():
    mp = build_mesh_pair(3, 3, 1.0, 1.0)
    cfg = SimConfig(
        Re=1.0, Wi=1.0, eta_s=0.5, eps_p=0.5, potential=Potential.hookean(),
        N=4, dt=1e-3, t_end=0.1, bandwidth=BandwidthPolicy.fixed(0.5), seed=3,
    )
    rng = np.random.default_rng(3)
    pf = uniform_particle_field(mp.fine.n_nodes, rng.standard_normal((4, 2)))
    macro = zero_macro_state(mp)
    macro.u += rng.standard_normal(macro.u.shape)
    macro.tau = field_stress(pf.q, cfg.potential, cfg.eps_p, cfg.Wi)
    with tempfile.TemporaryDirectory() as d:
        path = os.path.join(d, "chk.npz")
        save_checkpoint(path, 17, 0.017, cfg, macro, pf)
        step, t, macro2, pf2 = load_checkpoint(path, cfg)
    ok = step == 17 and t == 0.017
    ok &= np.array_equal(macro.u, macro2.u) and np.array_equal(pf.q, pf2.q)
    ok &= np.array_equal(macro.tau, macro2.tau)
    return ok, "bitwise fields"


def check_backend_agreement():
    try:
        comp = get_backend("compiled")
    except ImportError:
        return True, "compiled backend not built; skipped"
    py = get_backend("python")
    rng = np.random.default_rng(13)
    q = rng.standard_normal((40, 2))
    fc, gc = comp.free_energy_grad(q, 0.6, 0, 0.0)
    fp, gp = py.free_energy_grad(q, 0.6, 0, 0.0)
    err = max(abs(fc - fp), float(np.max(np.abs(gc - gp))))
    return err < 1e-9, f"max diff {err:.2e}"


def check_stress_symmetry():
    rng = np.random.default_rng(14)
    pot = Potential.fene(math.sqrt(50.0))
    q = sample_initial_ensemble(64, pot, rng)
    tau = node_stress(q, pot, 0.9, 1.3)
    g = potential_grad(pot, q)
    alt = 0.9 / 1.3 * np.mean(g[:, 1] * q[:, 0])
    return abs(tau[0, 1] - alt) < 1e-12, "off-diagonal two ways"


CHECKS = [
    ("kernel identities", check_kernel_identities),
    ("potential gradients vs finite differences", check_potential_gradients),
    ("free-energy gradient vs finite differences", check_energy_gradient),
    ("free-energy lower bound", check_energy_lower_bound),
    ("single-particle implicit step closed form", check_single_particle_step),
    ("energy stability over 100 steps", check_energy_stability),
    ("mesh pair counts and areas", check_mesh_pair),
    ("projection divergence residual", check_projection),
    ("advection and gradient identities", check_advection_identities),
    ("checkpoint bitwise roundtrip", check_checkpoint_roundtrip),
    ("backend agreement", check_backend_agreement),
    ("stress symmetry", check_stress_symmetry),
]


def run_verification(stream=None) -> int:
    """Run all checks, print one PASS/FAIL line each, return failure count."""
    stream = stream if stream is not None else _io.StringIO()
    failures = 0
    stream.write(f"backend: {backend_name()}\n")
    for name, fn in CHECKS:
        try:
            ok, detail = fn()
        except Exception as exc:  # a crashed check is a failure, not an abort
            ok, detail = False, f"raised {type(exc).__name__}: {exc}"
        failures += 0 if ok else 1
        stream.write(f"{'PASS' if ok else 'FAIL'}  {name}  ({detail})\n")
    stream.write(f"{len(CHECKS) - failures}/{len(CHECKS)} checks passed\n")
    return failures
