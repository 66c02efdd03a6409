/* Hot kernel of the particle core: regularized free energy and gradient.
 *
 * Plain C with restrict-qualified buffers so the compiler can vectorize
 * the pairwise loops, including the exp calls.  Pair exponents are
 * clamped at PB_EXP_CUT both to keep the vector exp out of underflow
 * slow paths and because exp(-46) is ~1e-20 of the self term, far below
 * any tolerance used downstream.
 */
#include <math.h>
#include <stddef.h>

#define PB_PI 3.14159265358979323846
#define PB_EXP_CUT 46.0

void pb_fgrad(const double* restrict q, int n, double h, int kind,
                     double b, double* restrict kbuf, double* restrict sbuf,
                     double* restrict rbuf, double* restrict xy,
                     double* restrict g, double* restrict fout)
{
    const double inv_h2 = 1.0 / (h * h);
    const double half_inv_h2 = 0.5 * inv_h2;
    const double coef = 1.0 / (2.0 * PB_PI * h * h);
    double* restrict qx = xy;
    double* restrict qy = xy + n;
    double f = 0.0;
    int i, j;

    for (i = 0; i < n; i++) {
        qx[i] = q[2 * i];
        qy[i] = q[2 * i + 1];
    }
    for (i = 0; i < n; i++) {
        double* restrict row = kbuf + (size_t)i * n;
        const double xi = qx[i], yi = qy[i];
        row[i] = coef;
        for (j = i + 1; j < n; j++) {
            const double d0 = xi - qx[j];
            const double d1 = yi - qy[j];
            row[j] = (d0 * d0 + d1 * d1) * half_inv_h2;
        }
        /* clamp keeps the vector exp out of underflow slow paths */
        for (j = i + 1; j < n; j++) {
            double ex = row[j];
            if (ex > PB_EXP_CUT) ex = PB_EXP_CUT;
            row[j] = coef * exp(-ex);
        }
        for (j = i + 1; j < n; j++)
            kbuf[(size_t)j * n + i] = row[j];
    }
    for (i = 0; i < n; i++) {
        const double* restrict row = kbuf + (size_t)i * n;
        double si = 0.0;
        for (j = 0; j < n; j++)
            si += row[j];
        sbuf[i] = si;
        rbuf[i] = 1.0 / si;
        f += log(si / n);
    }
    for (i = 0; i < n; i++) {
        const double* restrict row = kbuf + (size_t)i * n;
        const double xi = qx[i], yi = qy[i];
        double a0 = 0.0, a1 = 0.0, b0 = 0.0, b1 = 0.0;
        for (j = 0; j < n; j++) {
            const double w = row[j];
            const double wr = w * rbuf[j];
            const double d0 = xi - qx[j];
            const double d1 = yi - qy[j];
            a0 += w * d0;
            a1 += w * d1;
            b0 += wr * d0;
            b1 += wr * d1;
        }
        g[2 * i] = -(a0 * rbuf[i] + b0) * inv_h2;
        g[2 * i + 1] = -(a1 * rbuf[i] + b1) * inv_h2;
    }
    if (kind == 0) {
        for (i = 0; i < n; i++) {
            f += 0.5 * (qx[i] * qx[i] + qy[i] * qy[i]);
            g[2 * i] = (g[2 * i] + qx[i]) / n;
            g[2 * i + 1] = (g[2 * i + 1] + qy[i]) / n;
        }
    } else {
        for (i = 0; i < n; i++) {
            const double r2 = qx[i] * qx[i] + qy[i] * qy[i];
            const double fac = 1.0 / (1.0 - r2 / b);
            f += -0.5 * b * log1p(-r2 / b);
            g[2 * i] = (g[2 * i] + qx[i] * fac) / n;
            g[2 * i + 1] = (g[2 * i + 1] + qy[i] * fac) / n;
        }
    }
    *fout = f / n;
}

/* Hoare-partition quickselect: k-th smallest (0-based), deterministic. */
static double pb_select(double* a, long m, long k)
{
    long lo = 0, hi = m - 1;
    for (;;) {
        if (lo >= hi)
            return a[k];
        const double pivot = a[lo + (hi - lo) / 2];
        long i = lo - 1, j = hi + 1;
        for (;;) {
            do { i++; } while (a[i] < pivot);
            do { j--; } while (a[j] > pivot);
            if (i >= j)
                break;
            const double tmp = a[i];
            a[i] = a[j];
            a[j] = tmp;
        }
        if (k <= j)
            hi = j;
        else
            lo = j + 1;
    }
}

/* Lower median of the squared pairwise distances of an (n, 2) ensemble. */
double pb_median_pairwise_sq(const double* restrict q, int n,
                             double* restrict scratch)
{
    long m = 0;
    int i, j;
    for (i = 0; i < n; i++) {
        const double xi = q[2 * i], yi = q[2 * i + 1];
        for (j = i + 1; j < n; j++) {
            const double d0 = xi - q[2 * j];
            const double d1 = yi - q[2 * j + 1];
            scratch[m++] = d0 * d0 + d1 * d1;
        }
    }
    return pb_select(scratch, m, (m - 1) / 2);
}
