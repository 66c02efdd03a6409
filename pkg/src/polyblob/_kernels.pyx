# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled implementation of the hot particle kernels.

Same interface as ``_kernels_py``: pairwise mollifier sums, the
regularized free energy and gradient, and the proximal Barzilai-Borwein
step, batched over independent mesh-node ensembles with OpenMP.  Each
node is processed by exactly one thread in a fixed serial order, so
results are bitwise independent of the thread count.
"""

from libc.math cimport fabs
from libc.stdlib cimport malloc, free
from libc.string cimport memcpy
from cython.parallel cimport prange
cimport openmp

import numpy as np

NAME = "compiled"

cdef double ARMIJO = 1e-4
cdef int MAX_BACKTRACKS = 60


cdef extern from "_kernels_impl.h":
    void pb_fgrad(const double* q, int n, double h, int kind, double b,
                  double* kbuf, double* sbuf, double* rbuf, double* xy,
                  double* g, double* fout) nogil
    double pb_median_pairwise_sq(const double* q, int n, double* scratch) nogil


cdef void _prox_min(const double* q0, int n, double h, double c, int kind,
                    double b, double feas_sq, int max_iters, double grad_tol,
                    double step_init, double* q_out, double* f_in,
                    double* f_out, long* iters_out, double* move_sq_out,
                    double* work) noexcept nogil:
    """Minimize (c/n) sum|q-q0|^2 + F(q).  work has n*n + 10n doubles."""
    cdef double* kbuf = work
    cdef double* sbuf = work + n * n
    cdef double* rbuf = sbuf + n
    cdef double* xy = rbuf + n
    cdef double* g = xy + 2 * n
    cdef double* qt = g + 2 * n
    cdef double* gt = qt + 2 * n
    cdef int i, k, ls, it, accepted, feasible
    cdef double f, fcur, jval, jt, ft, alpha, t, gmax, gg, prox
    cdef double s_i, y_i, gj, sy, ss, two_c_n

    memcpy(q_out, q0, 2 * n * sizeof(double))
    pb_fgrad(q_out, n, h, kind, b, kbuf, sbuf, rbuf, xy, g, &f)
    f_in[0] = f
    fcur = f
    jval = f
    two_c_n = 2.0 * c / n
    alpha = step_init * n / (2.0 * c)
    it = 0
    for k in range(max_iters):
        gmax = 0.0
        for i in range(2 * n):
            if fabs(g[i]) > gmax:
                gmax = fabs(g[i])
        if gmax <= grad_tol:
            break
        gg = 0.0
        for i in range(2 * n):
            gg += g[i] * g[i]
        t = alpha
        accepted = 0
        for ls in range(MAX_BACKTRACKS):
            for i in range(2 * n):
                qt[i] = q_out[i] - t * g[i]
            if kind == 1:
                feasible = 1
                for i in range(n):
                    if qt[2 * i] * qt[2 * i] + qt[2 * i + 1] * qt[2 * i + 1] > feas_sq:
                        feasible = 0
                        break
                if not feasible:
                    t *= 0.5
                    continue
            pb_fgrad(qt, n, h, kind, b, kbuf, sbuf, rbuf, xy, gt, &ft)
            prox = 0.0
            for i in range(2 * n):
                prox += (qt[i] - q0[i]) * (qt[i] - q0[i])
            jt = c / n * prox + ft
            if jt <= jval - ARMIJO * t * gg:
                accepted = 1
                break
            t *= 0.5
        if not accepted:
            break
        sy = 0.0
        ss = 0.0
        for i in range(2 * n):
            gj = gt[i] + two_c_n * (qt[i] - q0[i])
            s_i = qt[i] - q_out[i]
            y_i = gj - g[i]
            sy += s_i * y_i
            ss += s_i * s_i
            g[i] = gj
            q_out[i] = qt[i]
        if sy > 0.0:
            alpha = ss / sy
            if alpha < 1e-14:
                alpha = 1e-14
            elif alpha > 1e14:
                alpha = 1e14
        else:
            alpha = 2.0 * t
        jval = jt
        fcur = ft
        it += 1
    prox = 0.0
    for i in range(2 * n):
        prox += (q_out[i] - q0[i]) * (q_out[i] - q0[i])
    f_out[0] = fcur
    iters_out[0] = it
    move_sq_out[0] = prox


def free_energy(q, double h, int kind, double b):
    cdef double[:, ::1] qv = np.ascontiguousarray(q, dtype=np.float64)
    cdef int n = qv.shape[0]
    cdef double f
    cdef double* work = <double*> malloc((n * n + 6 * n) * sizeof(double))
    if work == NULL:
        raise MemoryError()
    cdef double* g = work + n * n + 4 * n
    with nogil:
        pb_fgrad(&qv[0, 0], n, h, kind, b, work, work + n * n,
               work + n * n + n, work + n * n + 2 * n, g, &f)
    free(work)
    return f


def free_energy_grad(q, double h, int kind, double b):
    cdef double[:, ::1] qv = np.ascontiguousarray(q, dtype=np.float64)
    cdef int n = qv.shape[0]
    cdef double f
    grad = np.empty((n, 2), dtype=np.float64)
    cdef double[:, ::1] gv = grad
    cdef double* work = <double*> malloc((n * n + 4 * n) * sizeof(double))
    if work == NULL:
        raise MemoryError()
    with nogil:
        pb_fgrad(&qv[0, 0], n, h, kind, b, work, work + n * n,
               work + n * n + n, work + n * n + 2 * n, &gv[0, 0], &f)
    free(work)
    return f, grad


def proximal_minimize(q0, double h, double prox_coef, int kind, double b,
                      double feas_sq, int max_iters, double grad_tol,
                      double step_init):
    cdef double[:, ::1] qv = np.ascontiguousarray(q0, dtype=np.float64)
    cdef int n = qv.shape[0]
    out = np.empty((n, 2), dtype=np.float64)
    cdef double[:, ::1] ov = out
    cdef double f_in, f_out, move_sq
    cdef long iters
    cdef double* work = <double*> malloc((n * n + 10 * n) * sizeof(double))
    if work == NULL:
        raise MemoryError()
    with nogil:
        _prox_min(&qv[0, 0], n, h, prox_coef, kind, b, feas_sq, max_iters,
                  grad_tol, step_init, &ov[0, 0], &f_in, &f_out, &iters,
                  &move_sq, work)
    free(work)
    return out, f_in, f_out, int(iters), move_sq


def proximal_minimize_batch(q0, h, double prox_coef, int kind, double b,
                            double feas_sq, int max_iters, double grad_tol,
                            double step_init, int num_threads=0):
    """Independent proximal steps for a stack of ensembles (M, N, 2)."""
    cdef double[:, :, ::1] qv = np.ascontiguousarray(q0, dtype=np.float64)
    cdef double[::1] hv = np.ascontiguousarray(h, dtype=np.float64)
    cdef int m = qv.shape[0]
    cdef int n = qv.shape[1]
    out = np.empty((m, n, 2), dtype=np.float64)
    f_in = np.empty(m, dtype=np.float64)
    f_out = np.empty(m, dtype=np.float64)
    iters = np.empty(m, dtype=np.int64)
    move_sq = np.empty(m, dtype=np.float64)
    cdef double[:, :, ::1] ov = out
    cdef double[::1] fiv = f_in
    cdef double[::1] fov = f_out
    cdef long[::1] itv = iters
    cdef double[::1] mvv = move_sq
    cdef int nt = num_threads if num_threads > 0 else openmp.omp_get_max_threads()
    cdef int a
    cdef double* work
    cdef int fail = 0
    with nogil:
        for a in prange(m, schedule='static', num_threads=nt):
            work = <double*> malloc((n * n + 10 * n) * sizeof(double))
            if work == NULL:
                fail = 1
            else:
                _prox_min(&qv[a, 0, 0], n, hv[a], prox_coef, kind, b, feas_sq,
                          max_iters, grad_tol, step_init, &ov[a, 0, 0],
                          &fiv[a], &fov[a], &itv[a], &mvv[a], work)
                free(work)
    if fail:
        raise MemoryError()
    return out, f_in, f_out, iters, move_sq


def median_sq_batch(q, int num_threads=0):
    """Lower median of squared pairwise distances per node, (M,) array."""
    cdef double[:, :, ::1] qv = np.ascontiguousarray(q, dtype=np.float64)
    cdef int m = qv.shape[0]
    cdef int n = qv.shape[1]
    if n < 2:
        raise ValueError("median rule needs at least two particles")
    out = np.empty(m, dtype=np.float64)
    cdef double[::1] ov = out
    cdef int nt = num_threads if num_threads > 0 else openmp.omp_get_max_threads()
    cdef int a
    cdef double* scratch
    cdef int fail = 0
    with nogil:
        for a in prange(m, schedule='static', num_threads=nt):
            scratch = <double*> malloc((n * (n - 1) // 2) * sizeof(double))
            if scratch == NULL:
                fail = 1
            else:
                ov[a] = pb_median_pairwise_sq(&qv[a, 0, 0], n, scratch)
                free(scratch)
    if fail:
        raise MemoryError()
    return out
