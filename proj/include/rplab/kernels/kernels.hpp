#pragma once

// Data-parallel inner loops used by the integrators, the quadratic-form
// evaluations and the frequency sweep. Every kernel has a scalar reference
// implementation; vectorized variants are picked at runtime and must agree
// with the reference to rounding (summation order may differ).

#include <complex>
#include <span>
#include <string_view>

namespace rplab::kernels {

enum class Isa { Scalar, Avx2 };

std::string_view to_string(Isa isa);

/// Best instruction set supported by both this build and the running CPU.
Isa detected_isa();

/// ISA currently used by the dispatching entry points. Defaults to
/// detected_isa(), or Scalar when RPLAB_FORCE_SCALAR is set in the environment.
Isa active_isa();

/// Overrides the dispatch target; requests for an unavailable ISA fall back to
/// Scalar. Returns the ISA actually selected.
Isa set_active_isa(Isa isa);

// sum_i a[i] * b[i]
double dot(std::span<const double> a, std::span<const double> b);

// sum_i w[i] * x[i]^2
double weighted_sum_squares(std::span<const double> w, std::span<const double> x);

// out[i] = decay[i] * c[i] + phi[i] * (s * b[i] + g[i])
void diag_affine(std::span<double> out, std::span<const double> decay, std::span<const double> c,
                 std::span<const double> phi, std::span<const double> b, double s,
                 std::span<const double> g);

// sum_i num[i] / (diag[i] - p)
std::complex<double> diag_resolvent_sum(std::span<const double> num, std::span<const double> diag,
                                        std::complex<double> p);

namespace scalar {
double dot(std::span<const double> a, std::span<const double> b);
double weighted_sum_squares(std::span<const double> w, std::span<const double> x);
void diag_affine(std::span<double> out, std::span<const double> decay, std::span<const double> c,
                 std::span<const double> phi, std::span<const double> b, double s,
                 std::span<const double> g);
std::complex<double> diag_resolvent_sum(std::span<const double> num, std::span<const double> diag,
                                        std::complex<double> p);
}  // namespace scalar

namespace avx2 {
bool compiled();
double dot(std::span<const double> a, std::span<const double> b);
double weighted_sum_squares(std::span<const double> w, std::span<const double> x);
void diag_affine(std::span<double> out, std::span<const double> decay, std::span<const double> c,
                 std::span<const double> phi, std::span<const double> b, double s,
                 std::span<const double> g);
std::complex<double> diag_resolvent_sum(std::span<const double> num, std::span<const double> diag,
                                        std::complex<double> p);
}  // namespace avx2

}  // namespace rplab::kernels
