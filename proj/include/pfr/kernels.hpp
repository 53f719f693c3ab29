#pragma once
// Data-parallel inner loops used by the solvers.
//
// Every kernel has a scalar reference implementation and, on x86-64, an
// AVX2/FMA variant. The variant is chosen once at startup from CPUID; the
// environment variable PFR_ISA=scalar forces the reference path. Results of
// the two paths agree to rounding (FMA contraction and reduction order
// differ), never bit-for-bit.

#include <cstddef>
#include <span>
#include <string_view>

namespace pfr::kernels {

enum class Isa { scalar, avx2 };

std::string_view isa_name(Isa isa);

/// True when the CPU (and the build) can run the AVX2 variants.
bool avx2_available();

/// ISA used by the free functions below.
Isa active_isa();

/// Switches the dispatch target; returns false (and leaves the target
/// unchanged) when the requested ISA is unavailable. Not thread-safe: call
/// before solvers start.
bool set_isa(Isa isa);

/// Five-point (2D) or three-point (1D) constant-coefficient stencil on one
/// grid row:
///   out[i] = diag*c[i] - cx*(c[i-1] + c[i+1]) - cy*(down[i] + up[i])
/// for i in [begin, end). The caller guarantees c[begin-1] and c[end] are
/// readable.
struct StencilRow {
  double diag;
  double cx;
  double cy;
};

struct Table {
  void (*axpy)(double a, const double* x, double* y, std::size_t n);
  void (*axpby)(double a, const double* x, double b, double* y, std::size_t n);
  double (*dot)(const double* x, const double* y, std::size_t n);
  double (*weighted_dot)(const double* w, const double* x, const double* y, std::size_t n);
  void (*stencil_row)(const StencilRow& s, const double* c, const double* down, const double* up,
                      double* out, std::size_t begin, std::size_t end);
};

/// Kernel table for a specific ISA (throws if unavailable).
const Table& table(Isa isa);

/// y += a*x
void axpy(double a, std::span<const double> x, std::span<double> y);
/// y = a*x + b*y
void axpby(double a, std::span<const double> x, double b, std::span<double> y);
double dot(std::span<const double> x, std::span<const double> y);
/// sum_i w_i x_i y_i
double weighted_dot(std::span<const double> w, std::span<const double> x,
                    std::span<const double> y);
void stencil_row(const StencilRow& s, const double* c, const double* down, const double* up,
                 double* out, std::size_t begin, std::size_t end);

namespace detail {
extern const Table scalar_table;
#if defined(PFR_HAVE_AVX2)
extern const Table avx2_table;
#endif
}  // namespace detail

}  // namespace pfr::kernels
