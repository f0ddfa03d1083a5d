#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include "doctest.h"
#include "rplab/kernels/kernels.hpp"

using namespace rplab::kernels;

namespace {

std::vector<double> randoms(std::size_t n, std::mt19937_64& rng, double lo = -2.0, double hi = 2.0) {
  std::uniform_real_distribution<double> d(lo, hi);
  std::vector<double> v(n);
  for (double& x : v) x = d(rng);
  return v;
}

// Lengths around the 4-wide vector body and its remainders.
const std::size_t kLengths[] = {0, 1, 2, 3, 4, 5, 7, 8, 9, 15, 16, 17, 33, 64, 127, 1000};

bool avx2_usable() { return avx2::compiled() && detected_isa() == Isa::Avx2; }

}  // namespace

TEST_CASE("scalar kernels against direct loops") {
  std::mt19937_64 rng(3);
  for (std::size_t n : kLengths) {
    const auto a = randoms(n, rng), b = randoms(n, rng), w = randoms(n, rng, 0.0, 1.0);
    long double ref_dot = 0.0L, ref_wss = 0.0L;
    for (std::size_t i = 0; i < n; ++i) {
      ref_dot += static_cast<long double>(a[i]) * b[i];
      ref_wss += static_cast<long double>(w[i]) * a[i] * a[i];
    }
    CHECK(scalar::dot(a, b) == doctest::Approx(static_cast<double>(ref_dot)).epsilon(1e-13));
    CHECK(scalar::weighted_sum_squares(w, a) == doctest::Approx(static_cast<double>(ref_wss)).epsilon(1e-13));
  }
}

TEST_CASE("diag_resolvent_sum scalar matches complex division") {
  const std::vector<double> num{1.0, -2.0, 0.5};
  const std::vector<double> diag{-1.0, -3.0, -10.0};
  const std::complex<double> p(0.3, 2.0);
  std::complex<double> ref{0.0, 0.0};
  for (int i = 0; i < 3; ++i) ref += num[i] / (diag[i] - p);
  const auto got = scalar::diag_resolvent_sum(num, diag, p);
  CHECK(std::abs(got - ref) < 1e-15);
}

TEST_CASE("avx2 kernels agree with the scalar reference") {
  if (!avx2_usable()) {
    MESSAGE("AVX2 not available on this build or CPU; equivalence not exercised");
    return;
  }
  std::mt19937_64 rng(11);
  for (std::size_t n : kLengths) {
    CAPTURE(n);
    const auto a = randoms(n, rng), b = randoms(n, rng), w = randoms(n, rng, 0.0, 1.0);
    const double scale_dot = 1.0 + static_cast<double>(n) * 4.0;
    CHECK(std::abs(avx2::dot(a, b) - scalar::dot(a, b)) <= 1e-14 * scale_dot);
    CHECK(std::abs(avx2::weighted_sum_squares(w, a) - scalar::weighted_sum_squares(w, a)) <= 1e-14 * scale_dot);

    const auto decay = randoms(n, rng, 0.0, 1.0), c = randoms(n, rng), phi = randoms(n, rng, 0.0, 1.0);
    const auto g = randoms(n, rng);
    std::vector<double> out_s(n), out_v(n);
    scalar::diag_affine(out_s, decay, c, phi, b, 0.7, g);
    avx2::diag_affine(out_v, decay, c, phi, b, 0.7, g);
    for (std::size_t i = 0; i < n; ++i) CHECK(out_v[i] == doctest::Approx(out_s[i]).epsilon(1e-15));

    std::vector<double> diag = randoms(n, rng, -50.0, -1.0);
    const std::complex<double> p(0.5, 3.0);
    const auto rs = scalar::diag_resolvent_sum(a, diag, p);
    const auto rv = avx2::diag_resolvent_sum(a, diag, p);
    CHECK(std::abs(rs - rv) <= 1e-14 * (1.0 + static_cast<double>(n)));
  }
}

TEST_CASE("dispatch honours overrides") {
  const Isa before = active_isa();
  CHECK(set_active_isa(Isa::Scalar) == Isa::Scalar);
  CHECK(active_isa() == Isa::Scalar);
  const std::vector<double> a{1.0, 2.0, 3.0, 4.0, 5.0};
  CHECK(dot(a, a) == 55.0);
  const Isa got = set_active_isa(Isa::Avx2);
  CHECK(got == (avx2_usable() ? Isa::Avx2 : Isa::Scalar));
  CHECK(dot(a, a) == 55.0);
  set_active_isa(before);
  CHECK(to_string(Isa::Scalar) == "scalar");
  CHECK(to_string(Isa::Avx2) == "avx2");
}
