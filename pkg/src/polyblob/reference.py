"""Closed-form constitutive reference for start-up Couette flow.

With a linear spring law the configurational model is equivalent to a
two-field macroscopic system for (u, tau12):

    Re du/dt   = eta_s d2u/dy2 + d tau12 / dy
    d tau12/dt = -tau12 / Wi + (eps_p / Wi + tau22) du/dy
    d tau22/dt = -tau22 / Wi

started from rest and zero stress (tau22 then stays identically zero and
the system is linear).  A Crank-Nicolson finite-difference solve on a
fine grid serves as the oracle the particle simulation is checked
against; its eps_p = 0 limit is anchored to the classical Fourier-series
solution of the diffusion start-up problem.
"""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from .errors import LinearSolveFailure
from .timeseries import TimeSeries


def newtonian_couette_series(y, t: float, nu: float, u_lid: float = 1.0, modes: int = 2000):
    """Fourier-series start-up solution of Re u_t = eta_s u_yy on [0, 1]
    with the lower wall impulsively set to u_lid (nu = eta_s / Re)."""
    y = np.asarray(y, dtype=float)
    u = u_lid * (1.0 - y)
    if t <= 0:
        return np.where(y == 0.0, u_lid, 0.0)
    k = np.arange(1, modes + 1)
    decay = np.exp(-nu * (k * np.pi) ** 2 * t)
    u = u - (2.0 * u_lid / np.pi) * np.sin(np.outer(y, k * np.pi)) @ (decay / k)
    return u


def oldroyd_b_reference(
    Re: float,
    Wi: float,
    eta_s: float,
    eps_p: float,
    m_fine: int = 400,
    dt_fine: float = 1e-4,
    t_end: float = 1.0,
    probes: tuple[float, ...] = (0.2, 0.4, 0.6, 0.8),
    u_lid: float = 1.0,
    record_dt: float = 0.01,
) -> TimeSeries:
    """Second-order (Crank-Nicolson, central differences) transient solve.

    Returns probe velocities u(y, t) sampled every ``record_dt``; column
    names are ``u_at_<y>``.
    """
    if min(Re, Wi) <= 0 or eta_s < 0 or eps_p < 0:
        raise ValueError("parameters must be positive (eta_s, eps_p nonnegative)")
    n = m_fine + 1
    h = 1.0 / m_fine
    y = np.linspace(0.0, 1.0, n)

    # unknowns: interior u (n-2) followed by tau12 at all nodes (n)
    n_int = n - 2
    rows, cols, vals = [], [], []

    def add(r, c, v):
        rows.append(r)
        cols.append(c)
        vals.append(v)

    nu = eta_s / Re
    # momentum rows: nu * u_yy + (1/Re) d tau / dy (central)
    for k in range(n_int):
        i = k + 1  # global node index
        for j, w in ((i - 1, nu / h**2), (i, -2.0 * nu / h**2), (i + 1, nu / h**2)):
            if 1 <= j <= n - 2:
                add(k, j - 1, w)
        add(k, n_int + i + 1, 1.0 / (Re * 2.0 * h))
        add(k, n_int + i - 1, -1.0 / (Re * 2.0 * h))
    # stress rows: -tau/Wi + (eps_p/Wi) du/dy (tau22 stays 0 from rest)
    coef = eps_p / Wi
    for i in range(n):
        add(n_int + i, n_int + i, -1.0 / Wi)
        if i == 0:
            stencil = ((0, -3.0), (1, 4.0), (2, -1.0))
        elif i == n - 1:
            stencil = ((n - 1, 3.0), (n - 2, -4.0), (n - 3, 1.0))
        else:
            stencil = ((i + 1, 1.0), (i - 1, -1.0))
        for j, w in stencil:
            if 1 <= j <= n - 2:
                add(n_int + i, j - 1, coef * w / (2.0 * h))

    dim = n_int + n
    a = sp.coo_matrix((vals, (rows, cols)), shape=(dim, dim)).tocsr()

    # constant forcing from the moving-wall value u(0) = u_lid
    b = np.zeros(dim)
    b[0] += nu / h**2 * u_lid                        # momentum row next to the wall
    b[n_int + 0] += coef * (-3.0) / (2.0 * h) * u_lid
    b[n_int + 1] += coef * (-1.0) / (2.0 * h) * u_lid

    eye = sp.identity(dim, format="csr")
    lhs = (eye - 0.5 * dt_fine * a).tocsc()
    rhs_op = (eye + 0.5 * dt_fine * a).tocsr()
    try:
        lu = splu(lhs)
    except RuntimeError as exc:
        raise LinearSolveFailure(str(exc)) from exc

    z = np.zeros(dim)
    n_steps = int(round(t_end / dt_fine))
    every = max(1, int(round(record_dt / dt_fine)))
    probe_idx = [int(round(p / h)) for p in probes]
    times = [0.0]
    recs = [[0.0 if idx not in (0,) else u_lid for idx in probe_idx]]
    for step in range(1, n_steps + 1):
        z = lu.solve(rhs_op @ z + dt_fine * b)
        if not np.all(np.isfinite(z)):
            raise LinearSolveFailure("reference solve produced non-finite values")
        if step % every == 0:
            u_full = np.empty(n)
            u_full[0] = u_lid
            u_full[-1] = 0.0
            u_full[1:-1] = z[:n_int]
            times.append(step * dt_fine)
            recs.append([u_full[idx] for idx in probe_idx])
    data = np.asarray(recs)
    cols_out = {f"u_at_{p:g}": data[:, k] for k, p in enumerate(probes)}
    return TimeSeries(t=np.asarray(times), columns=cols_out)


def oldroyd_b_steady_tau12(eps_p: float, u_lid: float = 1.0) -> float:
    """Steady shear stress for the linear Couette profile u = u_lid (1 - y)."""
    return eps_p * (-u_lid)
