"""Pure-NumPy implementation of the hot particle kernels.

Mirrors the interface of the compiled extension ``_kernels``; selected at
import time by ``backend`` when the extension is unavailable or disabled.
All reductions are NumPy axis-sums in fixed order, so results are
deterministic and independent of any thread setting.

Potential codes: 0 = Hookean, 1 = FENE (with barrier parameter ``b``).
"""

from __future__ import annotations

import numpy as np

NAME = "python"

_ARMIJO = 1e-4
_MAX_BACKTRACKS = 60


def _psi_and_grad(q: np.ndarray, kind: int, b: float):
    r2 = q[:, 0] ** 2 + q[:, 1] ** 2
    if kind == 0:
        return 0.5 * r2, q
    fac = 1.0 / (1.0 - r2 / b)
    return -0.5 * b * np.log1p(-r2 / b), q * fac[:, None]


def free_energy(q: np.ndarray, h: float, kind: int, b: float) -> float:
    """Kernel-regularized free energy of one ensemble (value only)."""
    q = np.asarray(q, dtype=float)
    n = q.shape[0]
    d0 = q[:, None, 0] - q[None, :, 0]
    d1 = q[:, None, 1] - q[None, :, 1]
    r2 = d0 * d0 + d1 * d1
    coef = 1.0 / (2.0 * np.pi * h * h)
    kmat = np.exp(r2 * (-0.5 / (h * h))) * coef
    s = kmat.sum(axis=1)
    psi, _ = _psi_and_grad(q, kind, b)
    return float((np.log(s / n).sum() + psi.sum()) / n)


def free_energy_grad(q: np.ndarray, h: float, kind: int, b: float):
    """Free energy and its exact gradient with respect to every particle.

    The gradient carries the 1/N ensemble weight, i.e. it is the literal
    gradient of ``free_energy``.
    """
    q = np.asarray(q, dtype=float)
    n = q.shape[0]
    inv_h2 = 1.0 / (h * h)
    d0 = q[:, None, 0] - q[None, :, 0]
    d1 = q[:, None, 1] - q[None, :, 1]
    r2 = d0 * d0 + d1 * d1
    coef = 1.0 / (2.0 * np.pi * h * h)
    kmat = np.exp(r2 * (-0.5 * inv_h2)) * coef
    s = kmat.sum(axis=1)
    r = 1.0 / s
    # own-row quotient: (sum_j K_ij d_ij) / S_i ; cross term: sum_j K_ij d_ij / S_j
    a0 = (kmat * d0).sum(axis=1)
    a1 = (kmat * d1).sum(axis=1)
    kr = kmat * r[None, :]
    b0 = (kr * d0).sum(axis=1)
    b1 = (kr * d1).sum(axis=1)
    ent = np.empty_like(q)
    ent[:, 0] = -(a0 * r + b0) * inv_h2
    ent[:, 1] = -(a1 * r + b1) * inv_h2
    psi, gpsi = _psi_and_grad(q, kind, b)
    f = float((np.log(s / n).sum() + psi.sum()) / n)
    return f, (ent + gpsi) / n


def proximal_minimize(
    q0: np.ndarray,
    h: float,
    prox_coef: float,
    kind: int,
    b: float,
    feas_sq: float,
    max_iters: int,
    grad_tol: float,
    step_init: float,
):
    """Minimize J(q) = (prox_coef/N) sum |q_i - q0_i|^2 + F(q).

    Barzilai-Borwein steps with backtracking to monotone decrease of J;
    trial points violating the FENE ball are rejected inside the line
    search.  Returns (q, f_initial, f_final, iterations, sum |q - q0|^2).
    """
    q0 = np.asarray(q0, dtype=float)
    n = q0.shape[0]
    q = q0.copy()
    f, gf = free_energy_grad(q, h, kind, b)
    f_in = f
    f_cur = f
    jval = f
    g = gf.copy()
    alpha = step_init * n / (2.0 * prox_coef)
    iters = 0
    for _ in range(max_iters):
        if np.max(np.abs(g)) <= grad_tol:
            break
        gg = float((g * g).sum())
        t = alpha
        accepted = False
        for _ls in range(_MAX_BACKTRACKS):
            qt = q - t * g
            if kind == 1 and np.max(qt[:, 0] ** 2 + qt[:, 1] ** 2) > feas_sq:
                t *= 0.5
                continue
            dq = qt - q0
            ft, gft = free_energy_grad(qt, h, kind, b)
            jt = prox_coef / n * float((dq * dq).sum()) + ft
            if jt <= jval - _ARMIJO * t * gg:
                accepted = True
                break
            t *= 0.5
        if not accepted:
            break
        gt = gft + (2.0 * prox_coef / n) * dq
        s_vec = qt - q
        y_vec = gt - g
        sy = float((s_vec * y_vec).sum())
        if sy > 0.0:
            alpha = min(max(float((s_vec * s_vec).sum()) / sy, 1e-14), 1e14)
        else:
            alpha = 2.0 * t
        q, jval, g, f_cur = qt, jt, gt, ft
        iters += 1
    dq = q - q0
    return q, f_in, f_cur, iters, float((dq * dq).sum())


def proximal_minimize_batch(
    q0: np.ndarray,
    h: np.ndarray,
    prox_coef: float,
    kind: int,
    b: float,
    feas_sq: float,
    max_iters: int,
    grad_tol: float,
    step_init: float,
    num_threads: int = 0,
):
    """Independent proximal steps for a stack of ensembles (M, N, 2).

    ``num_threads`` is accepted for interface parity with the compiled
    backend and ignored: nodes are processed in index order.
    """
    q0 = np.asarray(q0, dtype=float)
    m = q0.shape[0]
    out = np.empty_like(q0)
    f_in = np.empty(m)
    f_out = np.empty(m)
    iters = np.empty(m, dtype=np.int64)
    move_sq = np.empty(m)
    for a in range(m):
        out[a], f_in[a], f_out[a], iters[a], move_sq[a] = proximal_minimize(
            q0[a], float(h[a]), prox_coef, kind, b, feas_sq, max_iters, grad_tol, step_init
        )
    return out, f_in, f_out, iters, move_sq


def median_sq_batch(q: np.ndarray, num_threads: int = 0) -> np.ndarray:
    """Lower median of squared pairwise distances per node, (M,) array."""
    q = np.asarray(q, dtype=float)
    n = q.shape[1]
    if n < 2:
        raise ValueError("median rule needs at least two particles")
    iu, ju = np.triu_indices(n, 1)
    d0 = q[:, iu, 0] - q[:, ju, 0]
    d1 = q[:, iu, 1] - q[:, ju, 1]
    dist_sq = d0 * d0 + d1 * d1
    idx = (dist_sq.shape[1] - 1) // 2
    return np.partition(dist_sq, idx, axis=1)[:, idx]
