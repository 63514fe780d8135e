#include "attractor_scout/kernels.hpp"

#include <math.h>

#include <algorithm>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace ascout::kernels {

namespace {

// tanh through exp, which has a vector variant in libmvec; absolute error stays
// within a few ulp of 1. This file is built with -ffast-math for that reason.
inline double tanh_via_exp(double v) { return 1.0 - 2.0 / (::exp(2.0 * v) + 1.0); }

void rhs_block(const CsrView& w, const double* __restrict x, const double* __restrict drive, double* __restrict out,
               int row_begin, int row_end) {
  for (int i = row_begin; i < row_end; ++i) {
    double acc = drive[i];
    for (int k = w.row_ptr[i]; k < w.row_ptr[i + 1]; ++k) acc += w.val[k] * x[w.col[k]];
    out[i] = acc;
  }
#pragma omp simd
  for (int i = row_begin; i < row_end; ++i) out[i] = tanh_via_exp(out[i]) - x[i];
}

}  // namespace

void reservoir_rhs_serial(const CsrView& w, std::span<const double> x, std::span<const double> drive,
                          std::span<double> out) {
  const int n = w.rows;
  for (int b = 0; b < n; b += kRowBlock) rhs_block(w, x.data(), drive.data(), out.data(), b, std::min(n, b + kRowBlock));
}

void reservoir_rhs_parallel(const CsrView& w, std::span<const double> x, std::span<const double> drive,
                            std::span<double> out) {
  const int n = w.rows;
  const int n_blocks = (n + kRowBlock - 1) / kRowBlock;
  const double* xp = x.data();
  const double* dp = drive.data();
  double* op = out.data();
#pragma omp parallel for schedule(static)
  for (int blk = 0; blk < n_blocks; ++blk) {
    const int b = blk * kRowBlock;
    rhs_block(w, xp, dp, op, b, std::min(n, b + kRowBlock));
  }
}

void axpy_into(std::span<const double> a, double scale, std::span<const double> b, std::span<double> dst) {
  const std::size_t n = dst.size();
  const double* ap = a.data();
  const double* bp = b.data();
  double* dp = dst.data();
#pragma omp simd
  for (std::size_t i = 0; i < n; ++i) dp[i] = ap[i] + scale * bp[i];
}

void rk4_combine(std::span<double> x, double dt, std::span<const double> k1, std::span<const double> k2,
                 std::span<const double> k3, std::span<const double> k4) {
  const std::size_t n = x.size();
  const double w = dt / 6.0;
  double* xp = x.data();
  const double* a = k1.data();
  const double* b = k2.data();
  const double* c = k3.data();
  const double* d = k4.data();
#pragma omp simd
  for (std::size_t i = 0; i < n; ++i) xp[i] += w * (a[i] + 2.0 * b[i] + 2.0 * c[i] + d[i]);
}

bool openmp_enabled() {
#ifdef _OPENMP
  return true;
#else
  return false;
#endif
}

int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

}  // namespace ascout::kernels
