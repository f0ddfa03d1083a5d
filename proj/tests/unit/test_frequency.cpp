#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <limits>
#include <numbers>

#include "doctest.h"
#include "rplab/discretization.hpp"
#include "rplab/error.hpp"
#include "rplab/frequency.hpp"

using namespace rplab;
using boost::math::quadrature::gauss_kronrod;

namespace {

DelayParams delay_params(double lambda, double b, double tau, double rho, int n_grid = 32) {
  DelayParams p;
  p.lambda = lambda;
  p.b = b;
  p.tau = tau;
  p.rho = SampledFunction::constant(-tau, 0.0, rho);
  p.n_grid = n_grid;
  return p;
}

ParabolicParams parabolic_params(double alpha, double beta, int n_modes = 8) {
  ParabolicParams p;
  p.alpha = alpha;
  p.beta = beta;
  p.n_modes = n_modes;
  return p;
}

// Independent quadrature of -b/(lambda + p) int rho(s) e^{ps} ds.
Complex delay_oracle(Complex p, const DelayParams& d) {
  // pieces of at most one oscillation period keep the adaptive rule shallow
  auto part = [&](auto&& fn) {
    double total = 0.0;
    const auto bp = d.rho.breakpoints();
    for (std::size_t i = 0; i + 1 < bp.size(); ++i) {
      const double span = bp[i + 1] - bp[i];
      const int pieces = std::max(1, static_cast<int>(std::ceil(std::abs(p.imag()) * span / (2.0 * std::numbers::pi))));
      for (int k = 0; k < pieces; ++k)
        total += gauss_kronrod<double, 61>::integrate(fn, bp[i] + span * k / pieces, bp[i] + span * (k + 1) / pieces,
                                                      8, 1e-13);
    }
    return total;
  };
  const double re = part([&](double s) { return d.rho(s) * std::exp(p.real() * s) * std::cos(p.imag() * s); });
  const double im = part([&](double s) { return d.rho(s) * std::exp(p.real() * s) * std::sin(p.imag() * s); });
  return -d.b / (d.lambda + p) * Complex(re, im);
}

void check_code(auto&& fn, ErrorCode code) {
  try {
    fn();
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == code);
  }
}

}  // namespace

TEST_CASE("delay_transfer closed-form examples") {
  CHECK(std::abs(delay_transfer({0.7, 3.0}, delay_params(1.0, 1.0, 1.0, 0.0))) == 0.0);
  const Complex w0 = delay_transfer({0.0, 0.0}, delay_params(1.0, 1.0, 1.0, 1.0));
  CHECK(w0.real() == doctest::Approx(-1.0).epsilon(1e-13));
  CHECK(std::abs(w0.imag()) < 1e-15);
  const Complex w1 = delay_transfer({1.0, 0.0}, delay_params(1.0, -1.0, 1.0, 1.0));
  CHECK(w1.real() == doctest::Approx(0.5 * (1.0 - std::exp(-1.0))).epsilon(1e-13));
  CHECK(w1.real() == doctest::Approx(0.3160603).epsilon(1e-7));
  check_code([] { delay_transfer({-1.0, 0.0}, delay_params(1.0, 1.0, 1.0, 1.0)); }, ErrorCode::PoleAt);
}

TEST_CASE("delay_transfer against adaptive quadrature for a piecewise-linear kernel") {
  DelayParams d = delay_params(1.5, 1.0, 0.8, 1.0);
  d.rho = SampledFunction(-0.8, 0.0, {0.0, 2.0, -1.0, 0.5, 3.0});
  const Complex pts[] = {{0.0, 0.0}, {1e-6, 1e-6}, {-0.3, 2.0}, {2.0, -7.0}, {0.5, 40.0}, {-1.0, 300.0}};
  for (const Complex p : pts) {
    CAPTURE(p);
    const Complex got = delay_transfer(p, d);
    const Complex ref = delay_oracle(p, d);
    CHECK(std::abs(got - ref) <= 1e-10 * (1e-3 + std::abs(ref)));
  }
}

TEST_CASE("parabolic_transfer closed-form examples") {
  const ParabolicParams p = parabolic_params(1.0, 2.0);
  const Complex w0 = parabolic_transfer({0.0, 0.0}, p);
  CHECK(w0.real() == doctest::Approx(-0.5).epsilon(1e-10));
  CHECK(std::abs(w0.imag()) < 1e-14);
  const Complex wi = parabolic_transfer({0.0, 1.0}, p);
  CHECK(wi.real() == doctest::Approx(-0.4).epsilon(1e-10));
  CHECK(wi.imag() == doctest::Approx(0.2).epsilon(1e-10));
  ParabolicParams z = p;
  z.rho = SampledFunction::constant(0.0, 1.0, 0.0);
  CHECK(std::abs(parabolic_transfer({1.0, 1.0}, z)) == 0.0);
  check_code([&] { parabolic_transfer({-2.0, 0.0}, p); }, ErrorCode::PoleAt);
  check_code([&] { parabolic_transfer({p.mode_eigenvalue(3), 0.0}, p); }, ErrorCode::PoleAt);
}

TEST_CASE("parabolic_transfer is branch independent") {
  ParabolicParams p = parabolic_params(0.7, 1.3);
  p.rho = SampledFunction(0.0, 1.0, {1.0, 0.2, 2.0, 0.0});
  CHECK(parabolic_branch_discrepancy(p, 16, 42) < 1e-10);
}

TEST_CASE("generic_transfer examples") {
  SUBCASE("scalar resolvent") {
    const LinearModel m{Mat::Constant(1, 1, -2.0), Vec::Ones(1), Vec::Ones(1), MassMatrix::identity(1),
                        ModelKind::Delay, DelayParams{}};
    CHECK(generic_transfer(m, {0.0, 0.0}).real() == doctest::Approx(-0.5));
    check_code([&] { generic_transfer(m, {-2.0, 0.0}); }, ErrorCode::NearSingular);
  }
  SUBCASE("parabolic truncation at p = 3i") {
    const ParabolicParams p = parabolic_params(1.0, 2.0, 8);
    const LinearModel m = build_parabolic_model(p);
    const Complex g = generic_transfer(m, {0.0, 3.0});
    CHECK(std::abs(g - parabolic_transfer({0.0, 3.0}, p)) <= 1e-6);
    CHECK(std::abs(g + 1.0 / Complex(2.0, 3.0)) <= 1e-8);
  }
  SUBCASE("delay truncation at p = 1") {
    const DelayParams d = delay_params(1.0, 1.0, 1.0, 1.0, 64);
    const Complex g = generic_transfer(build_delay_model(d), {1.0, 0.0});
    const double exact = -0.5 * (1.0 - std::exp(-1.0));
    CHECK(std::abs(g - exact) <= 2.0 / 64);
  }
  SUBCASE("dense path agrees with a direct solve") {
    const LinearModel m = build_delay_model(delay_params(1.0, 1.0, 1.0, 1.0, 16));
    const Complex p(0.2, 1.1);
    const Eigen::MatrixXcd Ap = m.A.cast<Complex>() - p * Eigen::MatrixXcd::Identity(m.n(), m.n());
    const Eigen::VectorXcd y = Ap.fullPivLu().solve(m.B.cast<Complex>());
    const Complex ref = (m.C.cast<Complex>().transpose() * y)(0);
    CHECK(std::abs(generic_transfer(m, p) - ref) < 1e-12);
  }
}

TEST_CASE("parabolic truncation converges to the closed form") {
  ParabolicParams p = parabolic_params(1.0, 2.0, 4);
  std::vector<double> ramp(1025);
  for (std::size_t i = 0; i < ramp.size(); ++i) ramp[i] = static_cast<double>(i) / 1024.0;
  p.rho = SampledFunction(0.0, 1.0, ramp);
  const Complex pts[] = {{0.0, 0.0}, {0.0, 5.0}, {1.0, -2.0}, {-1.0, 10.0}};
  for (const Complex z : pts) {
    CAPTURE(z);
    const Complex exact = parabolic_transfer(z, p);
    double prev = 0.0;
    for (int n : {4, 8, 16, 32}) {
      ParabolicParams q = p;
      q.n_modes = n;
      const double err = std::abs(generic_transfer(build_parabolic_model(q), z) - exact);
      if (n > 4) CHECK(prev / err >= 2.0);
      prev = err;
    }
  }
}

TEST_CASE("conjugate symmetry of all evaluators") {
  const DelayParams d = delay_params(1.0, 1.0, 0.5, 2.0);
  const ParabolicParams pp = parabolic_params(1.0, 2.0);
  const LinearModel md = build_delay_model(d);
  const Transfer evals[] = {delay_evaluator(d), parabolic_evaluator(pp), generic_evaluator(md)};
  for (const auto& w : evals)
    for (const Complex p : {Complex(-0.5, 1.0), Complex(1.0, 17.0), Complex(0.1, 0.3)}) {
      const Complex a = w(std::conj(p));
      const Complex b = std::conj(w(p));
      CHECK(std::abs(a - b) <= 1e-10 * (1.0 + std::abs(b)));
    }
}

TEST_CASE("certify_condition: delay with lambda > mu0") {
  const auto rep = certify_condition(delay_evaluator(delay_params(2.0, 1.0, 1.0, 1.0)), 0.0, 1.0);
  CHECK(rep.satisfied);
  CHECK(rep.min_margin > 0.0);
  CHECK(rep.tail_bound > 0.0);
  CHECK(rep.omega_grid.size() == 2048);
  CHECK(rep.omega_grid.front() == 0.0);
  CHECK(rep.omega_grid.back() == doctest::Approx(1e3));
  // margin at omega = 0: 1/mu0 - 1/lambda
  CHECK(rep.margins.front() == doctest::Approx(0.5));
  CHECK(rep.min_margin == *std::min_element(rep.margins.begin(), rep.margins.end()));
}

TEST_CASE("certify_condition: parabolic closed-form margin") {
  const double nu = 2.5, beta = 2.0;
  for (double mu0 : {0.1, 1.0, 100.0}) {
    const auto rep = certify_condition(parabolic_evaluator(parabolic_params(1.0, beta)), nu, mu0);
    CHECK(rep.satisfied);
    for (std::size_t i = 0; i < rep.omega_grid.size(); i += 97) {
      const double w = rep.omega_grid[i];
      const double expected = 1.0 / mu0 + (nu - beta) / ((nu - beta) * (nu - beta) + w * w);
      CHECK(rep.margins[i] == doctest::Approx(expected).epsilon(1e-8));
    }
  }
}

TEST_CASE("certify_condition: infinite mu0 with a negative real part") {
  const auto rep = certify_condition(delay_evaluator(delay_params(2.0, 1.0, 1.0, 1.0)), 0.0,
                                     std::numeric_limits<double>::infinity());
  CHECK_FALSE(rep.satisfied);
  CHECK(rep.min_margin < 0.0);
}

TEST_CASE("certify_condition is monotone in mu0") {
  const Transfer w = delay_evaluator(delay_params(1.0, 1.0, 0.2, 5.0));
  double prev = std::numeric_limits<double>::infinity();
  for (double mu0 : {0.1, 0.5, 1.0, 1.4, 3.0, 10.0}) {
    const auto rep = certify_condition(w, 2.0, mu0);
    CHECK(rep.min_margin <= prev);
    prev = rep.min_margin;
  }
}

TEST_CASE("certify_condition: bad ranges") {
  const Transfer w = delay_evaluator(delay_params(1.0, 1.0, 1.0, 1.0));
  check_code([&] { certify_condition(w, 0.0, 0.0); }, ErrorCode::BadRange);
  check_code([&] { certify_condition(w, 0.0, 1.0, 1e3, 1); }, ErrorCode::BadRange);
  check_code([&] { certify_condition(w, 1.0, 1.0); }, ErrorCode::BadRange);  // nu = lambda puts -lambda on the line
}
