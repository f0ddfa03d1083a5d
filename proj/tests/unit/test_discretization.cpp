#include <cmath>
#include <numbers>

#include "doctest.h"
#include "rplab/discretization.hpp"
#include "rplab/error.hpp"
#include "rplab/frequency.hpp"

using namespace rplab;

namespace {

DelayParams delay_params(double lambda, double b, double tau, double rho, int n_grid) {
  DelayParams p;
  p.lambda = lambda;
  p.b = b;
  p.tau = tau;
  p.rho = SampledFunction::constant(-tau, 0.0, rho);
  p.n_grid = n_grid;
  return p;
}

ParabolicParams parabolic_params(double alpha, double beta, double rho, int n_modes) {
  ParabolicParams p;
  p.alpha = alpha;
  p.beta = beta;
  p.rho = SampledFunction::constant(0.0, 1.0, rho);
  p.n_modes = n_modes;
  return p;
}

int count_unstable(const Mat& A, double nu) {
  const Eigen::VectorXcd ev = (A + nu * Mat::Identity(A.rows(), A.cols())).eigenvalues();
  int count = 0;
  for (Eigen::Index i = 0; i < ev.size(); ++i) count += ev(i).real() > 0.0 ? 1 : 0;
  return count;
}

}  // namespace

TEST_CASE("SampledFunction interpolation and breakpoints") {
  const SampledFunction f(0.0, 2.0, {0.0, 2.0, 0.0});
  CHECK(f(0.5) == doctest::Approx(1.0));
  CHECK(f(1.0) == doctest::Approx(2.0));
  CHECK(f(-1.0) == 0.0);
  CHECK(f(3.0) == 0.0);
  CHECK(f.breakpoints() == std::vector<double>{0.0, 1.0, 2.0});
  CHECK(SampledFunction::constant(0.0, 1.0, 0.0).is_zero());
  CHECK_THROWS_AS(SampledFunction(1.0, 0.0, {1.0}), Error);
}

TEST_CASE("quadrature weights") {
  const auto s = simpson_weights(4, 0.0, 1.0);
  double sum = 0.0, moment3 = 0.0;
  for (int i = 0; i <= 4; ++i) {
    sum += s[static_cast<std::size_t>(i)];
    moment3 += s[static_cast<std::size_t>(i)] * std::pow(i / 4.0, 3);
  }
  CHECK(sum == doctest::Approx(1.0));
  CHECK(moment3 == doctest::Approx(0.25));  // Simpson is exact for cubics
  CHECK_THROWS_AS(simpson_weights(3, 0.0, 1.0), Error);
  const auto t = trapezoid_weights(4, -1.0, 0.0);
  CHECK(t.front() == doctest::Approx(0.125));
  CHECK(t[1] == doctest::Approx(0.25));
}

TEST_CASE("delay model: lambda=1, b=1, tau=1, rho=1, n_grid=16") {
  const LinearModel m = build_delay_model(delay_params(1.0, 1.0, 1.0, 1.0, 16));
  REQUIRE(m.n() == 17);
  const Eigen::VectorXcd ev = m.A.eigenvalues();
  double closest = 1e300;
  for (Eigen::Index i = 0; i < ev.size(); ++i) closest = std::min(closest, std::abs(ev(i) - std::complex<double>(-1.0, 0.0)));
  CHECK(closest < 1e-10);

  // history samples of phi = 1 with x = phi(0) = 1: the trapezoid rule is exact
  CHECK(m.C.dot(Vec::Ones(17)) == doctest::Approx(1.0).epsilon(1e-14));
  // x = 0 drops the endpoint weight Delta/2: quadrature error of order Delta
  Vec u = Vec::Ones(17);
  u(0) = 0.0;
  const double delta = 1.0 / 16.0;
  CHECK(std::abs(m.C.dot(u) - 1.0) <= 0.5 * delta + 1e-14);

  // M = diag(1, Delta/2, Delta, ...)
  CHECK(m.M.diagonal()(0) == 1.0);
  CHECK(m.M.diagonal()(1) == doctest::Approx(delta / 2));
  CHECK(m.M.diagonal()(2) == doctest::Approx(delta));
}

TEST_CASE("delay model: zero kernel and input vector") {
  const LinearModel zero = build_delay_model(delay_params(1.0, 1.0, 1.0, 0.0, 16));
  CHECK(zero.C.isZero(0.0));
  const LinearModel neg = build_delay_model(delay_params(1.0, -1.0, 1.0, 1.0, 16));
  CHECK(neg.B(0) == -1.0);
  CHECK(neg.B.tail(16).isZero(0.0));
}

TEST_CASE("delay model: transport rows are upwind differences coupled to x") {
  const LinearModel m = build_delay_model(delay_params(1.0, 1.0, 2.0, 1.0, 8));
  const double h = 2.0 / 8.0;
  // linear history phi(s) = s + 2 with x = phi(0) = 2: d/ds = 1 exactly
  Vec u(9);
  u(0) = 2.0;
  for (int i = 0; i < 8; ++i) u(1 + i) = (-2.0 + i * h) + 2.0;
  const Vec Au = m.A * u;
  for (int i = 0; i < 8; ++i) CHECK(Au(1 + i) == doctest::Approx(1.0));
  CHECK(Au(0) == doctest::Approx(-2.0));
}

TEST_CASE("delay model: one unstable mode of A + nu for nu > lambda") {
  for (int n : {32, 64}) {
    const LinearModel m = build_delay_model(delay_params(1.0, 1.0, 1.0, 1.0, n));
    CHECK(count_unstable(m.A, 2.0) == 1);
    CHECK(count_unstable(m.A, 0.5) == 0);
  }
}

TEST_CASE("delay model: invalid parameters") {
  CHECK_THROWS_AS(build_delay_model(delay_params(1.0, 1.0, 1.0, 1.0, 4)), Error);
  CHECK_THROWS_AS(build_delay_model(delay_params(-1.0, 1.0, 1.0, 1.0, 16)), Error);
  CHECK_THROWS_AS(build_delay_model(delay_params(1.0, 0.5, 1.0, 1.0, 16)), Error);
  DelayParams p = delay_params(1.0, 1.0, 1.0, 1.0, 16);
  p.rho = SampledFunction::constant(-2.0, 0.0, 1.0);
  CHECK_THROWS_AS(build_delay_model(p), Error);
}

TEST_CASE("parabolic model: alpha=1, beta=2, n_modes=4") {
  const LinearModel m = build_parabolic_model(parabolic_params(1.0, 2.0, 1.0, 4));
  const double pi2 = std::numbers::pi * std::numbers::pi;
  CHECK(m.a_is_diagonal());
  CHECK(m.A(0, 0) == doctest::Approx(-2.0));
  CHECK(m.A(1, 1) == doctest::Approx(-2.0 - pi2));
  CHECK(m.A(2, 2) == doctest::Approx(-2.0 - 4.0 * pi2));
  CHECK(m.A(3, 3) == doctest::Approx(-2.0 - 9.0 * pi2));
}

TEST_CASE("parabolic model: C for rho = 1 and the boundary input") {
  const LinearModel m = build_parabolic_model(parabolic_params(1.0, 2.0, 1.0, 8));
  CHECK(std::abs(m.C(0) - 1.0) <= 1e-10);
  for (int k = 1; k < 8; ++k) CHECK(std::abs(m.C(k)) <= 1e-10);
  // load vector M B = alpha cos(k pi); sign chosen so that W(p) = -alpha/(p + beta) for rho = 1
  const Vec load = m.M.apply(m.B);
  for (int k = 0; k < 8; ++k) CHECK(load(k) == doctest::Approx(k % 2 == 0 ? 1.0 : -1.0));
  CHECK(m.M.diagonal()(0) == 1.0);
  CHECK(m.M.diagonal()(3) == 0.5);
}

TEST_CASE("parabolic model: C of a cosine weight") {
  ParabolicParams p = parabolic_params(1.0, 2.0, 1.0, 6);
  std::vector<double> samples(2001);
  for (std::size_t i = 0; i < samples.size(); ++i) samples[i] = std::cos(2.0 * std::numbers::pi * i / 2000.0);
  p.rho = SampledFunction(0.0, 1.0, samples);
  const LinearModel m = build_parabolic_model(p);
  // int cos(2 pi x) cos(k pi x) = 1/2 for k = 2, else 0
  CHECK(std::abs(m.C(2) - 0.5) <= 1e-5);
  CHECK(std::abs(m.C(0)) <= 1e-5);
  CHECK(std::abs(m.C(1)) <= 1e-5);
}

TEST_CASE("parabolic model: one unstable mode for beta < nu < beta + pi^2 alpha") {
  const LinearModel m = build_parabolic_model(parabolic_params(1.0, 2.0, 1.0, 8));
  CHECK(count_unstable(m.A, 2.5) == 1);
  CHECK(count_unstable(m.A, 1.5) == 0);
  CHECK(count_unstable(m.A, 2.0 + std::numbers::pi * std::numbers::pi + 0.5) == 2);
  CHECK_THROWS_AS(build_parabolic_model(parabolic_params(1.0, 2.0, 1.0, 3)), Error);
}

TEST_CASE("refinement: delay truncation error decreases at first order") {
  // Upwind transport is first order; the ratio approaches 2 once |p| Delta is small.
  const std::complex<double> pts[] = {{1.0, 0.0}, {0.0, 2.0}, {-0.5, 5.0}, {2.0, -1.0}};
  const DelayParams base = delay_params(1.0, 1.0, 1.0, 1.0, 16);
  for (const auto p : pts) {
    CAPTURE(p);
    const Complex exact = delay_transfer(p, base);
    double prev = 0.0;
    for (int n : {64, 128, 256}) {
      DelayParams q = base;
      q.n_grid = n;
      const double err = std::abs(generic_transfer(build_delay_model(q), p) - exact);
      if (n > 64) {
        CHECK(err < prev);
        CHECK(std::log2(prev / err) >= 0.9);
      }
      CHECK(err <= 4.0 * (1.0 + std::abs(p)) / n);
      prev = err;
    }
  }
}
