#include "rplab/kernels/kernels.hpp"

#include <cstddef>

namespace rplab::kernels::scalar {

double dot(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

double weighted_sum_squares(std::span<const double> w, std::span<const double> x) {
  double acc = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) acc += w[i] * x[i] * x[i];
  return acc;
}

void diag_affine(std::span<double> out, std::span<const double> decay, std::span<const double> c,
                 std::span<const double> phi, std::span<const double> b, double s,
                 std::span<const double> g) {
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = decay[i] * c[i] + phi[i] * (s * b[i] + g[i]);
}

std::complex<double> diag_resolvent_sum(std::span<const double> num, std::span<const double> diag,
                                        std::complex<double> p) {
  // num / (d - p) = num * (d - pr + i pi) / ((d - pr)^2 + pi^2)
  const double pr = p.real();
  const double pi = p.imag();
  double re = 0.0;
  double im = 0.0;
  for (std::size_t i = 0; i < num.size(); ++i) {
    const double dr = diag[i] - pr;
    const double scale = num[i] / (dr * dr + pi * pi);
    re += scale * dr;
    im += scale * pi;
  }
  return {re, im};
}

}  // namespace rplab::kernels::scalar
