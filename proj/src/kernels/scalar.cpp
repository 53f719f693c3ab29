#include "pfr/kernels.hpp"

namespace pfr::kernels::detail {
namespace {

void axpy_scalar(double a, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void axpby_scalar(double a, const double* x, double b, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] = a * x[i] + b * y[i];
}

double dot_scalar(const double* x, const double* y, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += x[i] * y[i];
  return s;
}

double weighted_dot_scalar(const double* w, const double* x, const double* y, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += w[i] * x[i] * y[i];
  return s;
}

void stencil_row_scalar(const StencilRow& s, const double* c, const double* down, const double* up,
                        double* out, std::size_t begin, std::size_t end) {
  for (std::size_t i = begin; i < end; ++i) {
    out[i] = s.diag * c[i] - s.cx * (c[i - 1] + c[i + 1]) - s.cy * (down[i] + up[i]);
  }
}

}  // namespace

const Table scalar_table{axpy_scalar, axpby_scalar, dot_scalar, weighted_dot_scalar,
                         stencil_row_scalar};

}  // namespace pfr::kernels::detail
