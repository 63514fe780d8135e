#pragma once

#include <cstddef>
#include <span>

namespace ascout::kernels {

/// Read-only view of a compressed-sparse-row matrix.
struct CsrView {
  int rows = 0;
  const int* row_ptr = nullptr;
  const int* col = nullptr;
  const double* val = nullptr;
};

enum class Backend { Serial, OpenMP };

/// Rows handled together by one call of the inner kernel. Both backends walk
/// the same row blocks, so their results are bit-identical.
inline constexpr int kRowBlock = 256;

/// out = -x + tanh(W x + drive)
///
/// The serial backend is the reference; the OpenMP one splits the row blocks
/// across threads.
void reservoir_rhs_serial(const CsrView& w, std::span<const double> x, std::span<const double> drive,
                          std::span<double> out);
void reservoir_rhs_parallel(const CsrView& w, std::span<const double> x, std::span<const double> drive,
                            std::span<double> out);

inline void reservoir_rhs(Backend backend, const CsrView& w, std::span<const double> x,
                          std::span<const double> drive, std::span<double> out) {
  if (backend == Backend::OpenMP) {
    reservoir_rhs_parallel(w, x, drive, out);
  } else {
    reservoir_rhs_serial(w, x, drive, out);
  }
}

/// dst = a + scale * b, elementwise.
void axpy_into(std::span<const double> a, double scale, std::span<const double> b, std::span<double> dst);

/// x += dt/6 * (k1 + 2 k2 + 2 k3 + k4)
void rk4_combine(std::span<double> x, double dt, std::span<const double> k1, std::span<const double> k2,
                 std::span<const double> k3, std::span<const double> k4);

/// True when OpenMP support was compiled in.
bool openmp_enabled();
int max_threads();

}  // namespace ascout::kernels
