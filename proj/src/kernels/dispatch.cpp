#include <atomic>
#include <cstdlib>

#include "rplab/kernels/kernels.hpp"

namespace rplab::kernels {

#ifndef RPLAB_HAVE_AVX2
namespace avx2 {
bool compiled() { return false; }
double dot(std::span<const double> a, std::span<const double> b) { return scalar::dot(a, b); }
double weighted_sum_squares(std::span<const double> w, std::span<const double> x) {
  return scalar::weighted_sum_squares(w, x);
}
void diag_affine(std::span<double> out, std::span<const double> decay, std::span<const double> c,
                 std::span<const double> phi, std::span<const double> b, double s,
                 std::span<const double> g) {
  scalar::diag_affine(out, decay, c, phi, b, s, g);
}
std::complex<double> diag_resolvent_sum(std::span<const double> num, std::span<const double> diag,
                                        std::complex<double> p) {
  return scalar::diag_resolvent_sum(num, diag, p);
}
}  // namespace avx2
#endif

namespace {

Isa probe() {
#if defined(RPLAB_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma")) return Isa::Avx2;
#endif
  return Isa::Scalar;
}

Isa initial() {
  if (std::getenv("RPLAB_FORCE_SCALAR") != nullptr) return Isa::Scalar;
  return probe();
}

std::atomic<Isa>& current() {
  static std::atomic<Isa> isa{initial()};
  return isa;
}

}  // namespace

std::string_view to_string(Isa isa) {
  switch (isa) {
    case Isa::Scalar: return "scalar";
    case Isa::Avx2: return "avx2";
  }
  return "unknown";
}

Isa detected_isa() {
  static const Isa isa = probe();
  return isa;
}

Isa active_isa() { return current().load(std::memory_order_relaxed); }

Isa set_active_isa(Isa isa) {
  if (isa == Isa::Avx2 && detected_isa() != Isa::Avx2) isa = Isa::Scalar;
  current().store(isa, std::memory_order_relaxed);
  return isa;
}

double dot(std::span<const double> a, std::span<const double> b) {
  return active_isa() == Isa::Avx2 ? avx2::dot(a, b) : scalar::dot(a, b);
}

double weighted_sum_squares(std::span<const double> w, std::span<const double> x) {
  return active_isa() == Isa::Avx2 ? avx2::weighted_sum_squares(w, x) : scalar::weighted_sum_squares(w, x);
}

void diag_affine(std::span<double> out, std::span<const double> decay, std::span<const double> c,
                 std::span<const double> phi, std::span<const double> b, double s,
                 std::span<const double> g) {
  if (active_isa() == Isa::Avx2)
    avx2::diag_affine(out, decay, c, phi, b, s, g);
  else
    scalar::diag_affine(out, decay, c, phi, b, s, g);
}

std::complex<double> diag_resolvent_sum(std::span<const double> num, std::span<const double> diag,
                                        std::complex<double> p) {
  return active_isa() == Isa::Avx2 ? avx2::diag_resolvent_sum(num, diag, p)
                                   : scalar::diag_resolvent_sum(num, diag, p);
}

}  // namespace rplab::kernels
