#include <cmath>
#include <numbers>

#include "doctest.h"
#include "rplab/cocycle.hpp"
#include "rplab/config.hpp"
#include "rplab/error.hpp"
#include "rplab/kyp.hpp"
#include "rplab/reduction.hpp"

using namespace rplab;

namespace {

constexpr double kPi = std::numbers::pi;

DelayParams delay_params(double lambda, double tau, int n_grid, double rho = 1.0) {
  DelayParams p;
  p.lambda = lambda;
  p.b = 1.0;
  p.tau = tau;
  p.rho = SampledFunction::constant(-tau, 0.0, rho);
  p.n_grid = n_grid;
  return p;
}

ParabolicParams parabolic_params(int n_modes = 8) {
  ParabolicParams p;
  p.alpha = 1.0;
  p.beta = 2.0;
  p.n_modes = n_modes;
  return p;
}

Nonlinearity logistic(double b1 = 4.0, double b2 = -2.0) {
  return Nonlinearity::sigmoid(PeriodicFunction::constant(b1), PeriodicFunction::constant(b2));
}

// Amplitude of the first harmonic of x over the last period of a grid.
double first_harmonic(const std::vector<double>& x, std::size_t per_period) {
  const std::size_t from = x.size() - 1 - per_period;
  double a = 0.0, b = 0.0;
  for (std::size_t k = 0; k < per_period; ++k) {
    const double th = 2.0 * kPi * static_cast<double>(k) / static_cast<double>(per_period);
    a += x[from + k] * std::cos(th);
    b += x[from + k] * std::sin(th);
  }
  return 2.0 * std::hypot(a, b) / static_cast<double>(per_period);
}

double max_diff(const TrajectoryGrid& a, const TrajectoryGrid& b) {
  double worst = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) worst = std::max(worst, (a.states[k] - b.states[k]).norm());
  return worst;
}

}  // namespace

TEST_CASE("delay: free decay from a constant history") {
  const TrajectoryGrid traj = integrate_delay(delay_params(1.0, 1.0, 16), Nonlinearity::zero(), Forcing::none(1.0),
                                              0.0, Vec::Ones(17), 1.0, 1.0 / 64);
  CHECK(traj.size() == 65);
  CHECK(std::abs(traj.back()(0) - std::exp(-1.0)) <= 1e-6);
  // the history tail now holds x on [0, 1]
  CHECK(std::abs(traj.back()(1) - 1.0) <= 1e-12);
}

TEST_CASE("delay: linear response amplitude") {
  const double lambda = 1.0, sigma = 1.0, omega = 2.0 * kPi / sigma;
  const Forcing g = Forcing::scalar(sigma, PeriodicFunction::cosine(sigma, 1.0));
  const TrajectoryGrid traj =
      integrate_delay(delay_params(lambda, 0.5, 16), Nonlinearity::zero(), g, 0.0, Vec::Zero(17), 12.0, 1.0 / 128);
  std::vector<double> x;
  for (const Vec& u : traj.states) x.push_back(u(0));
  const double amp = first_harmonic(x, 128);
  CHECK(std::abs(amp - 1.0 / std::hypot(lambda, omega)) <= 1e-4);
}

TEST_CASE("zero state is an equilibrium when f(t, 0) = 0 and g = 0") {
  const TrajectoryGrid d =
      integrate_delay(delay_params(1.0, 1.0, 16, 2.0), logistic(), Forcing::none(1.0), 0.0, Vec::Zero(17), 3.0, 1.0 / 16);
  for (const Vec& u : d.states) CHECK(u.isZero(0.0));
  const TrajectoryGrid p =
      integrate_parabolic(parabolic_params(), logistic(), Forcing::none(1.0), 0.0, Vec::Zero(8), 3.0, 1.0 / 100);
  for (const Vec& u : p.states) CHECK(u.isZero(0.0));
}

TEST_CASE("parabolic: mode 0 decays exactly") {
  Vec u0 = Vec::Zero(8);
  u0(0) = 1.0;
  const TrajectoryGrid traj =
      integrate_parabolic(parabolic_params(), Nonlinearity::zero(), Forcing::none(1.0), 0.0, u0, 2.0, 1.0 / 50);
  for (std::size_t k = 0; k < traj.size(); ++k) {
    CHECK(std::abs(traj.states[k](0) - std::exp(-2.0 * traj.time(k))) <= 1e-13);
    CHECK(traj.states[k].tail(7).isZero(0.0));
  }
}

TEST_CASE("parabolic: mode 0 linear response") {
  const double sigma = 1.0, omega = 2.0 * kPi / sigma, beta = 2.0;
  Forcing g{sigma, {{PeriodicFunction::cosine(sigma, 1.0), SampledFunction::constant(0.0, 1.0, 1.0)}}};
  const TrajectoryGrid traj =
      integrate_parabolic(parabolic_params(), Nonlinearity::zero(), g, 0.0, Vec::Zero(8), 12.0, 1.0 / 400);
  std::vector<double> x;
  for (const Vec& u : traj.states) x.push_back(u(0));
  CHECK(std::abs(first_harmonic(x, 400) - 1.0 / std::hypot(beta, omega)) <= 1e-4);
  // a constant profile excites no higher mode
  for (const Vec& u : traj.states) CHECK(u.tail(7).norm() <= 1e-12);
}

TEST_CASE("logistic nonlinearity examples") {
  const Nonlinearity f = logistic();
  CHECK(f(0.3, 0.0) == 0.0);
  CHECK(evaluate_nonlinearity(f, 0.0, 0.0) == 0.0);
  CHECK(f.mu0 == 1.0);
  f.validate(1.0);
  const Nonlinearity unit = logistic(1.0, 0.0);
  CHECK(std::abs(unit(0.0, 50.0) - 1.0) <= 1e-20);
  CHECK(std::isfinite(unit(0.0, -1e6)));
  // central difference at 0 is b1/4
  const double h = 1e-5;
  CHECK((f(0.0, h) - f(0.0, -h)) / (2.0 * h) == doctest::Approx(1.0).epsilon(1e-8));
  Nonlinearity tight = f;
  tight.mu0 = 0.9;
  CHECK_THROWS_AS(tight.validate(1.0), Error);
}

TEST_CASE("periodic coefficients must match sigma") {
  const Nonlinearity f =
      Nonlinearity::sigmoid(PeriodicFunction::cosine(0.7, 0.5, 0.0, 4.0), PeriodicFunction::constant(-2.0));
  CHECK_THROWS_AS(f.validate(1.0), Error);
  f.validate(1.4);
  CHECK(PeriodicFunction::table(1.0, {0.0, 1.0})(0.25) == doctest::Approx(0.5));
  CHECK(PeriodicFunction::table(1.0, {0.0, 1.0})(1.75) == doctest::Approx(0.5));
}

TEST_CASE("cocycle property on the grid") {
  const Forcing g = Forcing::scalar(1.0, PeriodicFunction::cosine(1.0, 0.5));
  SUBCASE("delay, dt equal to the history step") {
    const DelayIntegrator in(delay_params(1.0, 0.5, 16, 3.0), logistic(), g, 0.5 / 16);
    Vec u0(17);
    for (int i = 0; i < 17; ++i) u0(i) = std::sin(0.4 * i);
    const Vec direct = in.flow(0.0, u0, 2.0);
    const Vec mid = in.flow(0.0, u0, 0.75);
    const Vec split = in.flow(0.75, mid, 1.25);
    CHECK((direct - split).norm() <= 1e-9);
  }
  SUBCASE("parabolic") {
    Forcing gp{1.0, {{PeriodicFunction::cosine(1.0, 0.5), SampledFunction::constant(0.0, 1.0, 1.0)}}};
    const ParabolicIntegrator in(parabolic_params(), logistic(), gp, 1.0 / 100);
    Vec u0 = Vec::LinSpaced(8, 1.0, -1.0);
    const Vec direct = in.flow(0.0, u0, 2.0);
    const Vec split = in.flow(0.37, in.flow(0.0, u0, 0.37), 1.63);
    CHECK((direct - split).norm() <= 1e-9);
  }
}

TEST_CASE("shifting the phase by sigma reproduces the trajectory") {
  const Forcing g = Forcing::scalar(1.0, PeriodicFunction::table(1.0, {0.0, 1.0, -0.5, 0.2}));
  const DelayIntegrator in(delay_params(1.0, 0.5, 16, 3.0),
                           Nonlinearity::sigmoid(PeriodicFunction::cosine(1.0, 1.0, 0.3, 4.0),
                                                 PeriodicFunction::constant(-2.0)),
                           g, 0.5 / 16);
  const Vec u0 = Vec::LinSpaced(17, -1.0, 2.0);
  const TrajectoryGrid a = in.run(0.0, u0, 3.0);
  const TrajectoryGrid b = in.run(1.0, u0, 3.0);
  const TrajectoryGrid c = in.run(-2.0, u0, 3.0);
  CHECK(max_diff(a, b) <= 1e-10);
  CHECK(max_diff(a, c) <= 1e-10);
}

TEST_CASE("step halving: fourth order for the one-step rule, second with delayed feedback") {
  const Forcing g = Forcing::scalar(1.0, PeriodicFunction::cosine(1.0, 1.0));
  Vec u0(17);
  for (int i = 0; i < 17; ++i) u0(i) = std::cos(0.3 * i);
  auto observed_order = [&](const Nonlinearity& f) {
    std::vector<Vec> ends;
    for (int m : {64, 128, 256}) ends.push_back(DelayIntegrator(delay_params(1.0, 1.0, 16), f, g, 1.0 / m).flow(0.0, u0, 2.0));
    return std::log2((ends[1] - ends[0]).norm() / (ends[2] - ends[1]).norm());
  };
  // the trapezoid history quadrature is second order, the step rule fourth
  CHECK(observed_order(Nonlinearity::zero()) >= 3.9);
  CHECK(observed_order(logistic()) >= 1.9);
}

TEST_CASE("step rule errors") {
  const DelayIntegrator in(delay_params(1.0, 1.0, 16), Nonlinearity::zero(), Forcing::none(1.0), 1.0 / 16);
  CHECK_THROWS_AS(in.run(0.0, Vec::Zero(17), 0.3), Error);
  CHECK_THROWS_AS(in.run(0.0, Vec::Zero(5), 1.0), Error);
  CHECK_THROWS_AS(DelayIntegrator(delay_params(1.0, 1.0, 16), Nonlinearity::zero(), Forcing::none(1.0), 0.25),
                  Error);
  try {
    const DelayIntegrator fast(delay_params(1.0, 1.0, 16), Nonlinearity::zero(), Forcing::none(1.0), 1.0 / 8);
    Vec huge = Vec::Zero(17);
    huge(0) = 1e300;
    fast.flow(0.0, huge * 1e10, 1.0);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK((e.code() == ErrorCode::NonFiniteState || e.code() == ErrorCode::StepTooLarge));
  }
  const ParabolicIntegrator p(parabolic_params(), logistic(16.0, -8.0), Forcing::none(1.0), 1.0 / 200);
  CHECK(p.step_bound() > 0.0);
  CHECK_THROWS_AS(ParabolicIntegrator(parabolic_params(), logistic(16.0, -8.0), Forcing::none(1.0), 0.5), Error);
}

TEST_CASE("trajectory text export") {
  const TrajectoryGrid traj = integrate_parabolic(parabolic_params(4), Nonlinearity::zero(), Forcing::none(1.0), 0.0,
                                                  Vec::Ones(4), 0.02, 0.01);
  const std::string text = trajectory_to_text(traj);
  CHECK(text.rfind("#", 0) == 0);
  CHECK(text.find("parabolic") != std::string::npos);
  std::size_t rows = 0;
  for (std::size_t pos = 0; (pos = text.find('\n', pos)) != std::string::npos; ++pos) ++rows;
  CHECK(rows >= traj.size());
}

TEST_CASE("order preservation: Pi of a negative-cone difference keeps its sign") {
  const RunConfig cfg = parse_config(std::string(RPLAB_CONFIG_DIR) + "/delay_reference.json");
  const auto prob = KypProblem::standard(build_model(cfg), cfg.analysis.nu, cfg.analysis.mu0);
  KypOptions opts;
  opts.delta_seed = cfg.analysis.delta_seed;
  const KypSolution sol = solve_kyp(prob, opts);
  const Pipeline pl(build_integrator(cfg), sol.cert);
  const Eigen::Index n = prob.model.n();
  for (int trial = 0; trial < 4; ++trial) {
    Vec u0(n), w(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      u0(i) = std::sin(1.3 * i + trial);
      w(i) = std::cos(0.7 * i * (trial + 1));
    }
    w -= pl.mass().inner(pl.direction(), w) * pl.direction();
    const double s = trial % 2 == 0 ? 1.0 : -1.0;
    const Vec v0 = u0 + s * pl.direction() + 0.1 * w / pl.mass().norm(w);
    REQUIRE(pl.V(u0 - v0) < 0.0);
    const TrajectoryGrid u = pl.integrator().run(0.0, u0, 4.0);
    const TrajectoryGrid v = pl.integrator().run(0.0, v0, 4.0);
    int flips = 0;
    const double sign0 = std::copysign(1.0, pl.pi(u.states[0] - v.states[0]));
    for (std::size_t k = 0; k < u.size(); ++k)
      if (std::copysign(1.0, pl.pi(u.states[k] - v.states[k])) != sign0) ++flips;
    CHECK(flips == 0);
  }
}
