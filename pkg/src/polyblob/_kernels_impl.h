/* Declaration of the compiled particle kernel (see _kernels_impl.c). */
#ifndef PB_KERNELS_IMPL_H
#define PB_KERNELS_IMPL_H

void pb_fgrad(const double* q, int n, double h, int kind, double b,
              double* kbuf, double* sbuf, double* rbuf, double* xy,
              double* g, double* fout);

double pb_median_pairwise_sq(const double* q, int n, double* scratch);

#endif
