"""Incompressible-flow finite elements on a structured triangle mesh pair.

Velocity lives as P1 on a uniformly refined mesh, pressure as P1 on the
coarse mesh (the inf-sup stable pair), stress components as P1 on the
fine mesh.  One momentum solve with explicit stress and lagged pressure,
then an incremental projection, advance the flow one step.

The projection is solved in its coupled (Darcy) form by default, which
keeps the discrete divergence functional of the corrected velocity at
solver precision; the pressure-Poisson variant with a nodally
interpolated gradient update is provided as ``mode="poisson"``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from .errors import LinearSolveFailure, SizeMismatch


# ---------------------------------------------------------------------------
# meshes


@dataclass
class Mesh:
    """Conforming triangulation with structured-grid metadata.

    ``tri_grid`` holds integer (i, j) grid coordinates per triangle vertex,
    unwrapped in i for x-periodic meshes; ``tri_coords`` the matching
    physical coordinates (used for all geometry so wrapped elements are
    handled correctly).
    """

    nodes: np.ndarray       # (n, 2)
    triangles: np.ndarray   # (m, 3) int32, positively oriented
    tri_grid: np.ndarray    # (m, 3, 2) int32
    tri_coords: np.ndarray  # (m, 3, 2)
    boundary: dict[str, np.ndarray]
    nx: int
    ny: int
    Lx: float
    Ly: float
    periodic_x: bool = False
    areas: np.ndarray = field(init=False)
    gradlam: np.ndarray = field(init=False)

    def __post_init__(self):
        p = self.tri_coords
        e1 = p[:, 1] - p[:, 0]
        e2 = p[:, 2] - p[:, 0]
        self.areas = 0.5 * (e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0])
        if np.any(self.areas <= 0):
            raise ValueError("mesh contains non-positively-oriented triangles")
        gl = np.empty((p.shape[0], 3, 2))
        for a in range(3):
            edge = p[:, (a + 2) % 3] - p[:, (a + 1) % 3]
            gl[:, a, 0] = -edge[:, 1]
            gl[:, a, 1] = edge[:, 0]
        gl /= (2.0 * self.areas)[:, None, None]
        self.gradlam = gl

    @property
    def n_nodes(self) -> int:
        return self.nodes.shape[0]

    @property
    def n_elements(self) -> int:
        return self.triangles.shape[0]

    @property
    def hx(self) -> float:
        return self.Lx / self.nx

    @property
    def hy(self) -> float:
        return self.Ly / self.ny

    def node_id(self, i, j):
        """Node index of grid point (i, j); i wraps on periodic meshes."""
        cols = self.nx if self.periodic_x else self.nx + 1
        i = np.mod(i, cols) if self.periodic_x else np.asarray(i)
        return np.asarray(j) * cols + i

    def boundary_nodes(self) -> np.ndarray:
        return np.unique(np.concatenate(list(self.boundary.values())))


def structured_mesh(nx: int, ny: int, Lx: float, Ly: float, periodic_x: bool = False) -> Mesh:
    """nx-by-ny grid of cells, each split along the (1,1) diagonal."""
    if nx < 1 or ny < 1:
        raise ValueError("need at least one cell in each direction")
    hx, hy = Lx / nx, Ly / ny
    cols = nx if periodic_x else nx + 1
    jj, ii = np.meshgrid(np.arange(ny + 1), np.arange(cols), indexing="ij")
    nodes = np.stack([ii.ravel() * hx, jj.ravel() * hy], axis=1)

    # cells enumerated row-major (j outer) so cell (i, j) has index j*nx + i
    cj, ci = np.meshgrid(np.arange(ny), np.arange(nx), indexing="ij")
    ci, cj = ci.ravel(), cj.ravel()
    # cell corners in unwrapped grid coordinates
    a = np.stack([ci, cj], 1)
    b = np.stack([ci + 1, cj], 1)
    c = np.stack([ci + 1, cj + 1], 1)
    d = np.stack([ci, cj + 1], 1)
    lower = np.stack([a, b, c], 1)
    upper = np.stack([a, c, d], 1)
    tri_grid = np.concatenate([lower, upper]).astype(np.int32)
    # interleave lower/upper per cell for a predictable ordering
    order = np.empty(2 * nx * ny, dtype=np.int64)
    order[0::2] = np.arange(nx * ny)
    order[1::2] = np.arange(nx * ny) + nx * ny
    tri_grid = tri_grid[order]

    gi, gj = tri_grid[..., 0], tri_grid[..., 1]
    wrapped = np.mod(gi, cols) if periodic_x else gi
    triangles = (gj * cols + wrapped).astype(np.int32)
    tri_coords = np.stack([gi * hx, gj * hy], axis=-1).astype(float)

    boundary: dict[str, np.ndarray] = {}
    xs = np.arange(cols)
    boundary["bottom"] = (0 * cols + xs).astype(np.int64)
    boundary["top"] = (ny * cols + xs).astype(np.int64)
    if not periodic_x:
        ys = np.arange(ny + 1)
        boundary["left"] = (ys * cols).astype(np.int64)
        boundary["right"] = (ys * cols + nx).astype(np.int64)
    return Mesh(nodes, triangles, tri_grid, tri_coords, boundary, nx, ny, Lx, Ly, periodic_x)


@dataclass
class MeshPair:
    """Coarse triangulation plus its midpoint refinement.

    ``parent`` maps each fine element to the coarse element containing it;
    ``coarse_cover`` lists, per coarse element, the six fine nodes on its
    closure (three vertices, three edge midpoints); ``interp`` prolongs
    coarse nodal values to fine nodes.
    """

    coarse: Mesh
    fine: Mesh
    parent: np.ndarray
    coarse_cover: np.ndarray
    fine_id_of_coarse: np.ndarray
    interp: sp.csr_matrix
    cache: dict = field(default_factory=dict, repr=False)


def build_mesh_pair(nx: int, ny: int, Lx: float = 1.0, Ly: float = 1.0,
                    periodic_x: bool = False) -> MeshPair:
    if nx < 2 or ny < 2:
        raise ValueError("mesh pair needs nx, ny >= 2")
    coarse = structured_mesh(nx, ny, Lx, Ly, periodic_x)
    fine = structured_mesh(2 * nx, 2 * ny, Lx, Ly, periodic_x)
    fcols = 2 * nx if periodic_x else 2 * nx + 1

    def fine_id(gi, gj):
        wrapped = np.mod(gi, fcols) if periodic_x else gi
        return gj * fcols + wrapped

    # parent of each fine element from its centroid in coarse cell-local coords
    cen = fine.tri_coords.mean(axis=1)
    hxc, hyc = coarse.hx, coarse.hy
    ca = np.clip((cen[:, 0] // hxc).astype(np.int64), 0, nx - 1)
    cb = np.clip((cen[:, 1] // hyc).astype(np.int64), 0, ny - 1)
    xi = cen[:, 0] / hxc - ca
    eta = cen[:, 1] / hyc - cb
    lower_half = (eta <= xi).astype(np.int64)
    parent = ((cb * nx + ca) * 2 + (1 - lower_half)).astype(np.int32)

    # six fine nodes on each coarse element: doubled vertices + pairwise sums
    g = coarse.tri_grid.astype(np.int64)
    verts = fine_id(2 * g[..., 0], 2 * g[..., 1])
    mids = np.stack(
        [
            fine_id(g[:, 0, 0] + g[:, 1, 0], g[:, 0, 1] + g[:, 1, 1]),
            fine_id(g[:, 1, 0] + g[:, 2, 0], g[:, 1, 1] + g[:, 2, 1]),
            fine_id(g[:, 0, 0] + g[:, 2, 0], g[:, 0, 1] + g[:, 2, 1]),
        ],
        axis=1,
    )
    coarse_cover = np.concatenate([verts, mids], axis=1).astype(np.int64)

    ccols = nx if periodic_x else nx + 1
    cj, ci = np.divmod(np.arange(coarse.n_nodes), ccols)
    fine_id_of_coarse = fine_id(2 * ci, 2 * cj).astype(np.int64)

    # prolongation: fine node value of each coarse hat function
    rows, cols_, vals = [], [], []
    rows.append(fine_id_of_coarse)
    cols_.append(np.arange(coarse.n_nodes))
    vals.append(np.ones(coarse.n_nodes))
    for e in range(3):
        v0, v1 = e, (e + 1) % 3
        mid = fine_id(g[:, v0, 0] + g[:, v1, 0], g[:, v0, 1] + g[:, v1, 1])
        for v in (v0, v1):
            rows.append(mid)
            cols_.append(coarse.triangles[:, v].astype(np.int64))
            vals.append(np.full(mid.shape[0], 0.5))
    all_rows = np.concatenate(rows)
    all_cols = np.concatenate(cols_)
    shape = (fine.n_nodes, coarse.n_nodes)
    interp = sp.coo_matrix((np.concatenate(vals), (all_rows, all_cols)), shape=shape)
    # duplicate (row, col) pairs from shared edges carry identical values:
    # average them by dividing the summed entries by their multiplicities
    counts = sp.coo_matrix((np.ones(all_rows.size), (all_rows, all_cols)), shape=shape)
    interp.sum_duplicates()
    counts.sum_duplicates()
    interp.data /= counts.data
    return MeshPair(coarse, fine, parent, coarse_cover, fine_id_of_coarse, interp.tocsr())


# ---------------------------------------------------------------------------
# P1 operators


def local_mass(mesh: Mesh) -> np.ndarray:
    base = (np.ones((3, 3)) + np.eye(3)) / 12.0
    return mesh.areas[:, None, None] * base[None]


def local_stiffness(mesh: Mesh) -> np.ndarray:
    return mesh.areas[:, None, None] * np.einsum(
        "mid,mjd->mij", mesh.gradlam, mesh.gradlam
    )


def local_convection(mesh: Mesh, u: np.ndarray) -> np.ndarray:
    """Local matrices of (u . grad trial, test) with P1 transport field u."""
    uv = u[mesh.triangles]                      # (m, 3, 2)
    usum = uv.sum(axis=1)                       # (m, 2)
    w = (usum[:, None, :] + uv) * (mesh.areas / 12.0)[:, None, None]
    return np.einsum("mjd,mid->mij", mesh.gradlam, w)


def assemble(mesh: Mesh, local: np.ndarray, dirichlet: np.ndarray | None = None) -> sp.csr_matrix:
    """Global CSR matrix from (m, 3, 3) local blocks; Dirichlet rows become
    identity rows when ``dirichlet`` node ids are given."""
    tri = mesh.triangles.astype(np.int64)
    rows = np.repeat(tri, 3, axis=1).ravel()
    cols = np.tile(tri, (1, 3)).ravel()
    vals = local.ravel().copy()
    if dirichlet is not None and dirichlet.size:
        mask = np.zeros(mesh.n_nodes, dtype=bool)
        mask[dirichlet] = True
        vals[mask[rows]] = 0.0
        rows = np.concatenate([rows, dirichlet])
        cols = np.concatenate([cols, dirichlet])
        vals = np.concatenate([vals, np.ones(dirichlet.size)])
    a = sp.coo_matrix((vals, (rows, cols)), shape=(mesh.n_nodes, mesh.n_nodes))
    return a.tocsr()


def lumped_mass(mesh: Mesh) -> np.ndarray:
    w = np.zeros(mesh.n_nodes)
    np.add.at(w, mesh.triangles.ravel(), np.repeat(mesh.areas / 3.0, 3))
    return w


def _accumulate(mesh: Mesh, per_elem_vertex: np.ndarray) -> np.ndarray:
    """Sum (m, 3) or (m, 3, k) per-element-per-vertex values into nodes."""
    flat = per_elem_vertex.reshape(mesh.n_elements * 3, -1)
    idx = mesh.triangles.ravel().astype(np.int64)
    out = np.zeros((mesh.n_nodes, flat.shape[1]))
    np.add.at(out, idx, flat)
    return out if per_elem_vertex.ndim == 3 else out[:, 0]


def _lu(matrix: sp.spmatrix):
    try:
        return splu(matrix.tocsc())
    except RuntimeError as exc:
        raise LinearSolveFailure(str(exc)) from exc


def _check_finite(x: np.ndarray, what: str) -> np.ndarray:
    if not np.all(np.isfinite(x)):
        raise LinearSolveFailure(f"non-finite values in {what}")
    return x


# ---------------------------------------------------------------------------
# flow state and boundary data


@dataclass
class MacroState:
    """Velocity (fine nodes), pressure (coarse nodes), stress components."""

    u: np.ndarray    # (n_fine, 2)
    p: np.ndarray    # (n_coarse,)
    tau: np.ndarray  # (n_fine, 3)


@dataclass
class DirichletBC:
    """Velocity boundary data: node ids and the (k, 2) values they carry."""

    nodes: np.ndarray
    values: np.ndarray

    def apply(self, u: np.ndarray) -> None:
        u[self.nodes] = self.values


def zero_macro_state(mesh_pair: MeshPair) -> MacroState:
    return MacroState(
        u=np.zeros((mesh_pair.fine.n_nodes, 2)),
        p=np.zeros(mesh_pair.coarse.n_nodes),
        tau=np.zeros((mesh_pair.fine.n_nodes, 3)),
    )


# ---------------------------------------------------------------------------
# momentum step


def _pressure_gradient_rhs(mp: MeshPair, p: np.ndarray) -> np.ndarray:
    """(grad p, v) for coarse P1 pressure against fine P1 test functions."""
    gp = np.einsum("mv,mvd->md", p[mp.coarse.triangles], mp.coarse.gradlam)
    per = gp[mp.parent] * (mp.fine.areas / 3.0)[:, None]      # (mf, 2)
    contrib = np.broadcast_to(per[:, None, :], (mp.fine.n_elements, 3, 2))
    return _accumulate(mp.fine, contrib)


def _stress_divergence_rhs(mp: MeshPair, tau: np.ndarray) -> np.ndarray:
    """(div tau, v) in weak form: -(tau, grad v), elementwise with P1 tau."""
    tbar = tau[mp.fine.triangles].mean(axis=1)                # (mf, 3)
    full = np.empty((mp.fine.n_elements, 2, 2))
    full[:, 0, 0] = tbar[:, 0]
    full[:, 0, 1] = tbar[:, 1]
    full[:, 1, 0] = tbar[:, 1]
    full[:, 1, 1] = tbar[:, 2]
    contrib = -np.einsum(
        "m,mck,mik->mic", mp.fine.areas, full, mp.fine.gradlam
    )
    return _accumulate(mp.fine, contrib)


def momentum_step(
    state: MacroState,
    mp: MeshPair,
    cfg,
    bc: DirichletBC,
    body_force: np.ndarray | None = None,
) -> np.ndarray:
    """Semi-implicit momentum solve for the tentative velocity.

    Convection is linearized with the previous velocity, stress and
    pressure enter explicitly, Dirichlet rows are imposed strongly.  The
    same scalar operator serves both velocity components.
    """
    fine = mp.fine
    if "fine_mass_csr" not in mp.cache:
        mp.cache["fine_local_mass"] = local_mass(fine)
        mp.cache["fine_local_stiff"] = local_stiffness(fine)
        mp.cache["fine_mass_csr"] = assemble(fine, mp.cache["fine_local_mass"])
    re, eta_s, dt = cfg.Re, cfg.eta_s, cfg.dt
    loc = (
        (re / dt) * mp.cache["fine_local_mass"]
        + re * local_convection(fine, state.u)
        + eta_s * mp.cache["fine_local_stiff"]
    )
    a = assemble(fine, loc, bc.nodes)
    mass = mp.cache["fine_mass_csr"]
    rhs = (re / dt) * (mass @ state.u)
    rhs -= _pressure_gradient_rhs(mp, state.p)
    rhs += _stress_divergence_rhs(mp, state.tau)
    if body_force is not None:
        rhs += mass @ body_force
    rhs[bc.nodes] = bc.values
    u_tilde = _lu(a).solve(rhs)
    return _check_finite(u_tilde, "tentative velocity")


# ---------------------------------------------------------------------------
# pressure projection


def _divergence_matrix(mp: MeshPair) -> sp.csr_matrix:
    """D with (D u)_k = (div u, psi_k); u stacked as [u_x; u_y]."""
    nf, nc = mp.fine.n_nodes, mp.coarse.n_nodes
    mf = mp.fine.n_elements
    # psi_k averaged over each fine element: rows are P rows of its vertices
    pint = mp.interp.tocsr()
    rows, cols, vals = [], [], []
    tri = mp.fine.triangles.astype(np.int64)
    for v in range(3):
        pv = pint[tri[:, v]].tocoo()          # (mf, nc), psi values at vertex v
        for comp in range(2):
            gl = mp.fine.gradlam[:, :, comp]  # (mf, 3)
            for j in range(3):
                w = (mp.fine.areas * gl[:, j] / 3.0)[pv.row] * pv.data
                rows.append(pv.col)
                cols.append(tri[pv.row, j] + comp * nf)
                vals.append(w)
    d = sp.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(nc, 2 * nf),
    )
    return d.tocsr()


def _pressure_gradient_matrix(mp: MeshPair) -> sp.csr_matrix:
    """E with (E p)[i + comp*nf] = (grad p, phi_i e_comp)."""
    nf, nc = mp.fine.n_nodes, mp.coarse.n_nodes
    ctri = mp.coarse.triangles.astype(np.int64)[mp.parent]    # (mf, 3)
    cgl = mp.coarse.gradlam[mp.parent]                        # (mf, 3, 2)
    tri = mp.fine.triangles.astype(np.int64)
    w = mp.fine.areas / 3.0
    rows, cols, vals = [], [], []
    for comp in range(2):
        for i in range(3):
            for v in range(3):
                rows.append(tri[:, i] + comp * nf)
                cols.append(ctri[:, v])
                vals.append(w * cgl[:, v, comp])
    e = sp.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(2 * nf, nc),
    )
    return e.tocsr()


def divergence_functional(mp: MeshPair, u: np.ndarray) -> np.ndarray:
    """(div u, psi_k) for every coarse pressure basis function."""
    if "div_matrix" not in mp.cache:
        mp.cache["div_matrix"] = _divergence_matrix(mp)
    return mp.cache["div_matrix"] @ np.concatenate([u[:, 0], u[:, 1]])


def _coarse_grad_to_fine_nodes(mp: MeshPair, p: np.ndarray) -> np.ndarray:
    """Area-weighted average of the coarse P1 gradient at the fine nodes
    covered by each coarse element."""
    gp = np.einsum("mv,mvd->md", p[mp.coarse.triangles], mp.coarse.gradlam)
    acc = np.zeros((mp.fine.n_nodes, 2))
    wsum = np.zeros(mp.fine.n_nodes)
    idx = mp.coarse_cover.ravel()
    np.add.at(acc, idx, np.repeat(gp * mp.coarse.areas[:, None], 6, axis=0))
    np.add.at(wsum, idx, np.repeat(mp.coarse.areas, 6))
    return acc / wsum[:, None]


def pressure_correction(
    u_tilde: np.ndarray,
    state: MacroState,
    mp: MeshPair,
    cfg,
    bc: DirichletBC,
    mode: str = "darcy",
) -> tuple[np.ndarray, np.ndarray, dict]:
    """Project the tentative velocity and update the pressure.

    mode="darcy": solve the coupled increment system
        (u', v) + dt (grad dp, v) = (u~, v),   (div u', psi) = 0
    with strong velocity BCs and one pinned pressure dof; the divergence
    functional of u' vanishes to solver precision.

    mode="poisson": pressure-increment Poisson solve followed by the nodal
    update u' = u~ - dt * grad dp interpolated to fine nodes.

    Returns (u_new, p_new, info) with the measured divergence residual.
    """
    dt = cfg.dt
    nf, nc = mp.fine.n_nodes, mp.coarse.n_nodes
    if "div_matrix" not in mp.cache:
        mp.cache["div_matrix"] = _divergence_matrix(mp)
    dmat = mp.cache["div_matrix"]
    if "coarse_lumped" not in mp.cache:
        mp.cache["coarse_lumped"] = lumped_mass(mp.coarse)
    lump = mp.cache["coarse_lumped"]

    if mode == "darcy":
        key = ("darcy_lu", float(dt), bc.nodes.tobytes())
        if key not in mp.cache:
            mass = mp.cache.get("fine_mass_csr")
            if mass is None:
                mass = assemble(mp.fine, local_mass(mp.fine))
                mp.cache["fine_mass_csr"] = mass
            emat = _pressure_gradient_matrix(mp)
            mass2 = sp.block_diag([mass, mass], format="csr")
            bc_rows = np.concatenate([bc.nodes, bc.nodes + nf])
            keep = np.ones(2 * nf, dtype=bool)
            keep[bc_rows] = False
            mass2 = sp.diags(keep.astype(float)) @ mass2 + sp.diags((~keep).astype(float))
            etop = sp.diags(keep.astype(float)) @ emat
            dpin = dmat.tolil()
            dpin[0, :] = 0.0
            dbot = sp.hstack([dpin.tocsr(), sp.coo_matrix((nc, nc))])
            dbot = dbot.tolil()
            dbot[0, 2 * nf] = 1.0
            sys = sp.vstack(
                [sp.hstack([mass2, dt * etop]), dbot.tocsr()], format="csc"
            )
            mp.cache[key] = (_lu(sys), mp.cache["fine_mass_csr"])
        lu, mass = mp.cache[key]
        rhs = np.concatenate([mass @ u_tilde[:, 0], mass @ u_tilde[:, 1], np.zeros(nc)])
        rhs[bc.nodes] = bc.values[:, 0]
        rhs[bc.nodes + nf] = bc.values[:, 1]
        sol = _check_finite(lu.solve(rhs), "projection solve")
        u_new = np.stack([sol[:nf], sol[nf : 2 * nf]], axis=1)
        dp = sol[2 * nf :]
    elif mode == "poisson":
        key = ("poisson_lu",)
        if key not in mp.cache:
            stiff = assemble(mp.coarse, local_stiffness(mp.coarse))
            stiff = stiff.tolil()
            stiff[0, :] = 0.0
            stiff[0, 0] = 1.0
            mp.cache[key] = _lu(stiff.tocsr())
        rhs = -(1.0 / dt) * (dmat @ np.concatenate([u_tilde[:, 0], u_tilde[:, 1]]))
        rhs -= rhs.mean()
        rhs[0] = 0.0
        dp = _check_finite(mp.cache[key].solve(rhs), "pressure increment")
        u_new = u_tilde - dt * _coarse_grad_to_fine_nodes(mp, dp)
        bc.apply(u_new)
    else:
        raise ValueError(f"unknown projection mode {mode!r}")

    p_new = state.p + dp
    p_new -= (lump * p_new).sum() / lump.sum()
    div = dmat @ np.concatenate([u_new[:, 0], u_new[:, 1]])
    info = {"div_residual": float(np.max(np.abs(div))), "dp": dp}
    return u_new, p_new, info


# ---------------------------------------------------------------------------
# stream function


def streamfunction(u: np.ndarray, mp: MeshPair) -> np.ndarray:
    """Solve -Lap(psi) = vorticity with psi = 0 on the boundary (fine P1)."""
    fine = mp.fine
    if u.shape != (fine.n_nodes, 2):
        raise SizeMismatch(f"velocity shape {u.shape} does not match mesh")
    uv = u[fine.triangles]                                    # (m, 3, 2)
    vort = np.einsum("mj,mj->m", uv[:, :, 1], fine.gradlam[:, :, 0]) - np.einsum(
        "mj,mj->m", uv[:, :, 0], fine.gradlam[:, :, 1]
    )
    rhs_elem = np.broadcast_to(
        (vort * fine.areas / 3.0)[:, None], (fine.n_elements, 3)
    )
    rhs = _accumulate(fine, rhs_elem)
    bnodes = fine.boundary_nodes()
    key = ("stream_lu", bnodes.tobytes())
    if key not in mp.cache:
        stiff = assemble(fine, local_stiffness(fine), bnodes)
        mp.cache[key] = _lu(stiff)
    rhs[bnodes] = 0.0
    psi = mp.cache[key].solve(rhs)
    return _check_finite(psi, "stream function")


def kinetic_energy(u: np.ndarray, mp: MeshPair, re: float) -> float:
    """0.5 * Re * ||u||^2 with the consistent fine mass matrix."""
    if "fine_mass_csr" not in mp.cache:
        mp.cache["fine_mass_csr"] = assemble(mp.fine, local_mass(mp.fine))
    mass = mp.cache["fine_mass_csr"]
    return 0.5 * re * float((u * (mass @ u)).sum())


def export_mesh_text(mesh: Mesh, stream) -> None:
    """Plain-text node/element/boundary listing for debugging and plotting."""
    stream.write(f"# nodes {mesh.n_nodes}\n")
    for i, (x, y) in enumerate(mesh.nodes):
        stream.write(f"{i} {x!r} {y!r}\n")
    stream.write(f"# elements {mesh.n_elements}\n")
    for e, (a, b, c) in enumerate(mesh.triangles):
        stream.write(f"{e} {a} {b} {c}\n")
    stream.write("# boundary\n")
    for tag, ids in mesh.boundary.items():
        stream.write(f"{tag}: {' '.join(str(i) for i in ids)}\n")
