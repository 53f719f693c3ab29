#include <cassert>
#include <cstdlib>
#include <stdexcept>
#include <string>

#include "pfr/kernels.hpp"

namespace pfr::kernels {
namespace {

bool cpu_has_avx2() {
#if defined(PFR_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

Isa initial_isa() {
  if (const char* env = std::getenv("PFR_ISA"); env && std::string(env) == "scalar") {
    return Isa::scalar;
  }
  return cpu_has_avx2() ? Isa::avx2 : Isa::scalar;
}

Isa& current() {
  static Isa isa = initial_isa();
  return isa;
}

const Table*& table_slot() {
  static const Table* t = &table(current());
  return t;
}

}  // namespace

std::string_view isa_name(Isa isa) { return isa == Isa::avx2 ? "avx2" : "scalar"; }

bool avx2_available() { return cpu_has_avx2(); }

Isa active_isa() { return current(); }

bool set_isa(Isa isa) {
  if (isa == Isa::avx2 && !avx2_available()) return false;
  current() = isa;
  table_slot() = &table(isa);
  return true;
}

const Table& table(Isa isa) {
  if (isa == Isa::scalar) return detail::scalar_table;
#if defined(PFR_HAVE_AVX2)
  if (cpu_has_avx2()) return detail::avx2_table;
#endif
  throw std::runtime_error("AVX2 kernels unavailable on this CPU/build");
}

void axpy(double a, std::span<const double> x, std::span<double> y) {
  assert(x.size() == y.size());
  table_slot()->axpy(a, x.data(), y.data(), y.size());
}

void axpby(double a, std::span<const double> x, double b, std::span<double> y) {
  assert(x.size() == y.size());
  table_slot()->axpby(a, x.data(), b, y.data(), y.size());
}

double dot(std::span<const double> x, std::span<const double> y) {
  assert(x.size() == y.size());
  return table_slot()->dot(x.data(), y.data(), x.size());
}

double weighted_dot(std::span<const double> w, std::span<const double> x,
                    std::span<const double> y) {
  assert(w.size() == x.size() && x.size() == y.size());
  return table_slot()->weighted_dot(w.data(), x.data(), y.data(), x.size());
}

void stencil_row(const StencilRow& s, const double* c, const double* down, const double* up,
                 double* out, std::size_t begin, std::size_t end) {
  table_slot()->stencil_row(s, c, down, up, out, begin, end);
}

}  // namespace pfr::kernels
