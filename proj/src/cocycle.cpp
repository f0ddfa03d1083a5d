#include "rplab/cocycle.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>

#include "rplab/error.hpp"
#include "rplab/kernels/kernels.hpp"

namespace rplab {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double period_fraction(double t, double sigma) {
  const double r = t / sigma;
  return r - std::floor(r);
}

std::span<const double> as_span(const Vec& v) { return {v.data(), static_cast<std::size_t>(v.size())}; }

// h * expm1(z) / z and h * (expm1(z) - z) / z^2 with z = lambda h
double phi1_of(double lambda, double h) {
  const double z = lambda * h;
  if (std::abs(z) < 1e-5) return h * (1.0 + z / 2.0 + z * z / 6.0);
  return h * std::expm1(z) / z;
}

double phi2_of(double lambda, double h) {
  const double z = lambda * h;
  if (std::abs(z) < 1e-3) return h * (0.5 + z / 6.0 + z * z / 24.0 + z * z * z / 120.0);
  return h * (std::expm1(z) - z) / (z * z);
}

}  // namespace

// ---------------------------------------------------------------- PeriodicFunction

PeriodicFunction PeriodicFunction::constant(double value) {
  PeriodicFunction f;
  f.kind_ = Kind::Constant;
  f.offset_ = value;
  return f;
}

PeriodicFunction PeriodicFunction::cosine(double sigma, double amplitude, double phase, double offset) {
  if (!(sigma > 0.0)) throw Error(ErrorCode::BadParams, "period must be > 0");
  PeriodicFunction f;
  f.kind_ = Kind::Cosine;
  f.sigma_ = sigma;
  f.amplitude_ = amplitude;
  f.phase_ = phase;
  f.offset_ = offset;
  return f;
}

PeriodicFunction PeriodicFunction::table(double sigma, std::vector<double> samples) {
  if (!(sigma > 0.0)) throw Error(ErrorCode::BadParams, "period must be > 0");
  if (samples.empty()) throw Error(ErrorCode::BadParams, "periodic table needs samples");
  for (double s : samples)
    if (!std::isfinite(s)) throw Error(ErrorCode::BadParams, "periodic table has non-finite samples");
  PeriodicFunction f;
  f.kind_ = Kind::Table;
  f.sigma_ = sigma;
  f.samples_ = std::move(samples);
  return f;
}

double PeriodicFunction::operator()(double t) const {
  switch (kind_) {
    case Kind::Constant:
      return offset_;
    case Kind::Cosine:
      return offset_ + amplitude_ * std::cos(kTwoPi * period_fraction(t, sigma_) + phase_);
    case Kind::Table: {
      const std::size_t n = samples_.size();
      const double pos = period_fraction(t, sigma_) * static_cast<double>(n);
      const auto i = std::min(static_cast<std::size_t>(pos), n - 1);
      const double frac = pos - static_cast<double>(i);
      return samples_[i] + frac * (samples_[(i + 1) % n] - samples_[i]);
    }
  }
  return 0.0;
}

bool PeriodicFunction::compatible_with(double sigma) const {
  if (kind_ == Kind::Constant) return true;
  const double ratio = sigma / sigma_;
  return ratio >= 1.0 - 1e-12 && std::abs(ratio - std::round(ratio)) <= 1e-12 * ratio;
}

double PeriodicFunction::min_value() const {
  switch (kind_) {
    case Kind::Constant:
      return offset_;
    case Kind::Cosine:
      return offset_ - std::abs(amplitude_);
    case Kind::Table:
      return *std::min_element(samples_.begin(), samples_.end());
  }
  return 0.0;
}

double PeriodicFunction::max_value() const {
  switch (kind_) {
    case Kind::Constant:
      return offset_;
    case Kind::Cosine:
      return offset_ + std::abs(amplitude_);
    case Kind::Table:
      return *std::max_element(samples_.begin(), samples_.end());
  }
  return 0.0;
}

bool PeriodicFunction::is_zero() const { return min_value() == 0.0 && max_value() == 0.0; }

// ---------------------------------------------------------------- Nonlinearity

Nonlinearity Nonlinearity::zero() { return {}; }

Nonlinearity Nonlinearity::sigmoid(PeriodicFunction b1, PeriodicFunction b2, double mu0) {
  Nonlinearity f;
  f.kind = NonlinearityKind::Sigmoid;
  f.mu0 = mu0 > 0.0 ? mu0 : b1.max_value() / 4.0;
  f.b1 = std::move(b1);
  f.b2 = std::move(b2);
  return f;
}

Nonlinearity Nonlinearity::saturating_linear(double slope, double v_sat, PeriodicFunction b2) {
  if (!(v_sat > 0.0)) throw Error(ErrorCode::BadParams, "saturation level must be > 0");
  Nonlinearity f;
  f.kind = NonlinearityKind::SaturatingLinear;
  f.mu0 = slope;
  f.slope = slope;
  f.v_sat = v_sat;
  f.b2 = std::move(b2);
  return f;
}

Nonlinearity Nonlinearity::custom_table(SampledFunction table, double mu0, PeriodicFunction b2) {
  Nonlinearity f;
  f.kind = NonlinearityKind::CustomTable;
  f.mu0 = mu0;
  f.table = std::move(table);
  f.b2 = std::move(b2);
  return f;
}

double Nonlinearity::operator()(double t, double v) const {
  switch (kind) {
    case NonlinearityKind::Zero:
      return 0.0;
    case NonlinearityKind::Sigmoid: {
      const double capped = std::clamp(v, -700.0, 700.0);
      return b1(t) / (1.0 + std::exp(-capped)) + b2(t);
    }
    case NonlinearityKind::SaturatingLinear:
      return slope * std::clamp(v, -v_sat, v_sat) + b2(t);
    case NonlinearityKind::CustomTable:
      return table(v) + b2(t);
  }
  return 0.0;
}

void Nonlinearity::validate(double sigma) const {
  if (kind == NonlinearityKind::Zero) return;
  if (!(mu0 >= 0.0) || !std::isfinite(mu0)) throw Error(ErrorCode::ValidationError, "mu0 must be finite and >= 0");
  for (const PeriodicFunction* c : {&b1, &b2})
    if (!c->compatible_with(sigma))
      throw Error(ErrorCode::ValidationError, "nonlinearity coefficient is not sigma-periodic");

  double v_lo = -60.0;
  double v_hi = 60.0;
  if (kind == NonlinearityKind::CustomTable) {
    v_lo = std::min(v_lo, table.lo() - 1.0);
    v_hi = std::max(v_hi, table.hi() + 1.0);
  }
  constexpr double h = 1e-4;
  const long nv = static_cast<long>(std::ceil((v_hi - v_lo) / 0.01));
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (int it = 0; it < 64; ++it) {
    const double t = sigma * it / 64.0;
    for (long iv = 0; iv <= nv; ++iv) {
      const double v = v_lo + (v_hi - v_lo) * static_cast<double>(iv) / static_cast<double>(nv);
      const double d = ((*this)(t, v + h) - (*this)(t, v - h)) / (2.0 * h);
      lo = std::min(lo, d);
      hi = std::max(hi, d);
    }
  }
  if (lo < -1e-9 || hi > mu0 + 1e-9)
    throw Error(ErrorCode::ValidationError, "sampled slope range [" + std::to_string(lo) + ", " +
                                                std::to_string(hi) + "] is not inside [0, mu0 = " +
                                                std::to_string(mu0) + "]");
}

double evaluate_nonlinearity(const Nonlinearity& f, double t, double v) { return f(t, v); }

// ---------------------------------------------------------------- Forcing

double Forcing::at(double t) const {
  double s = 0.0;
  for (const ForcingTerm& term : terms) s += term.time(t);
  return s;
}

void Forcing::validate() const {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw Error(ErrorCode::ValidationError, "sigma must be > 0");
  for (const ForcingTerm& term : terms)
    if (!term.time.compatible_with(sigma))
      throw Error(ErrorCode::ValidationError, "forcing term is not sigma-periodic");
}

// ---------------------------------------------------------------- Integrator

Integrator::Integrator(std::shared_ptr<const LinearModel> model, Nonlinearity f, Forcing g, double dt)
    : model_(std::move(model)), f_(std::move(f)), forcing_(std::move(g)), dt_(dt) {
  if (!(dt_ > 0.0) || !std::isfinite(dt_)) throw Error(ErrorCode::BadParams, "dt must be > 0");
  forcing_.validate();
  f_.validate(forcing_.sigma);
  const double ratio = forcing_.sigma / dt_;
  if (std::abs(ratio - std::round(ratio)) > 1e-12 * ratio)
    throw Error(ErrorCode::BadParams, "dt must divide sigma");
}

long Integrator::steps_for(double horizon) const {
  if (!(horizon >= 0.0) || !std::isfinite(horizon)) throw Error(ErrorCode::BadParams, "horizon must be >= 0");
  const double r = horizon / dt_;
  const long n = std::lround(r);
  if (std::abs(r - static_cast<double>(n)) > 1e-9 * std::max(1.0, r))
    throw Error(ErrorCode::BadParams, "horizon " + std::to_string(horizon) + " is not a multiple of dt");
  return n;
}

// ---------------------------------------------------------------- delay

DelayIntegrator::DelayIntegrator(const DelayParams& params, Nonlinearity f, Forcing g, double dt, StepControl ctl)
    : Integrator(std::make_shared<const LinearModel>(build_delay_model(params)), std::move(f), std::move(g), dt),
      params_(params),
      ctl_(ctl) {
  if (dt > params.tau / 8.0 * (1.0 + 1e-12)) throw Error(ErrorCode::BadParams, "dt must be <= tau/8");
  const double r = params.tau / dt;
  fine_n_ = static_cast<int>(std::lround(r));
  if (std::abs(r - fine_n_) > 1e-9 * r) throw Error(ErrorCode::BadParams, "tau must be a multiple of dt");
  weights_ = trapezoid_weights(fine_n_, -params.tau, 0.0);
  for (int j = 0; j <= fine_n_; ++j) weights_[static_cast<std::size_t>(j)] *= params.rho(-params.tau + j * dt);
}

std::vector<double> DelayIntegrator::fine_history(const Vec& u) const {
  const int N = params_.n_grid;
  if (u.size() != N + 1) throw Error(ErrorCode::DimensionMismatch, "delay state has wrong size");
  auto node = [&](int i) { return i >= N ? u(0) : u(1 + i); };
  std::vector<double> fine(static_cast<std::size_t>(fine_n_) + 1);
  for (int j = 0; j <= fine_n_; ++j) {
    const double pos = static_cast<double>(j) * N / fine_n_;
    const int i = std::min(static_cast<int>(pos), N);
    const double frac = pos - i;
    fine[static_cast<std::size_t>(j)] = frac > 0.0 ? node(i) + frac * (node(i + 1) - node(i)) : node(i);
  }
  return fine;
}

Vec DelayIntegrator::model_coordinates(std::span<const double> fine) const {
  const int N = params_.n_grid;
  Vec u(N + 1);
  u(0) = fine[static_cast<std::size_t>(fine_n_)];
  for (int i = 0; i < N; ++i) {
    const double pos = static_cast<double>(i) * fine_n_ / N;
    const int j = std::min(static_cast<int>(pos), fine_n_);
    const double frac = pos - j;
    const double a = fine[static_cast<std::size_t>(j)];
    u(1 + i) = frac > 0.0 ? a + frac * (fine[static_cast<std::size_t>(j) + 1] - a) : a;
  }
  return u;
}

template <class Sink>
void DelayIntegrator::integrate(double t0, const Vec& u0, long steps, Sink&& sink) const {
  const std::size_t K = static_cast<std::size_t>(fine_n_) + 1;
  const std::vector<double> init = fine_history(u0);
  // Doubled ring buffer: the window buf[head, head + K) is always contiguous.
  std::vector<double> buf(2 * K);
  std::copy(init.begin(), init.end(), buf.begin());
  std::copy(init.begin(), init.end(), buf.begin() + static_cast<std::ptrdiff_t>(K));
  std::size_t head = 0;

  const std::span<const double> w(weights_);
  const std::span<const double> w_head = w.first(K - 1);
  const double w_last = weights_.back();
  const double lam = params_.lambda;
  const double b = params_.b;
  const double h = dt_;
  auto rhs = [&](double t, double x, double v) { return -lam * x + b * f_(t, v) + forcing_.at(t); };

  sink(0L, std::span<const double>(buf.data() + head, K));
  for (long k = 0; k < steps; ++k) {
    const std::span<const double> hist(buf.data() + head, K);
    const double t = t0 + static_cast<double>(k) * h;
    const double x = hist[K - 1];
    const double d0 = kernels::dot(w, hist);
    const double dun = d0 - w_last * x;
    const double dsh = kernels::dot(w_head, hist.subspan(1));
    const double dmid = 0.5 * (dun + dsh);

    const double k1 = rhs(t, x, d0);
    const double x2 = x + 0.5 * h * k1;
    const double k2 = rhs(t + 0.5 * h, x2, dmid + w_last * x2);
    const double x3 = x + 0.5 * h * k2;
    const double k3 = rhs(t + 0.5 * h, x3, dmid + w_last * x3);
    const double x4 = x + h * k3;
    const double k4 = rhs(t + h, x4, dsh + w_last * x4);
    const double xn = x + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);

    if (!std::isfinite(xn))
      throw Error(ErrorCode::NonFiniteState, "delay state became non-finite at t = " + std::to_string(t + h));
    const double est = h / 3.0 * std::abs(k2 + k3 - k1 - k4);
    if (est > ctl_.step_tol * (1.0 + std::abs(x)))
      throw Error(ErrorCode::StepTooLarge, "local error estimate " + std::to_string(est) + " at t = " +
                                               std::to_string(t) + "; reduce dt");

    buf[head] = xn;
    buf[head + K] = xn;
    head = (head + 1) % K;
    sink(k + 1, std::span<const double>(buf.data() + head, K));
  }
}

TrajectoryGrid DelayIntegrator::run(double t0, const Vec& u0, double horizon, int stride) const {
  const long steps = steps_for(horizon);
  if (stride < 1 || steps % stride != 0) throw Error(ErrorCode::BadParams, "stride must divide the step count");
  TrajectoryGrid out{t0, dt_ * stride, {}, model_};
  out.states.reserve(static_cast<std::size_t>(steps / stride) + 1);
  integrate(t0, u0, steps, [&](long k, std::span<const double> hist) {
    if (k % stride == 0) out.states.push_back(model_coordinates(hist));
  });
  return out;
}

Vec DelayIntegrator::flow(double t0, const Vec& u0, double horizon) const {
  const long steps = steps_for(horizon);
  Vec end;
  integrate(t0, u0, steps, [&](long k, std::span<const double> hist) {
    if (k == steps) end = model_coordinates(hist);
  });
  return end;
}

// ---------------------------------------------------------------- parabolic

ParabolicIntegrator::ParabolicIntegrator(const ParabolicParams& params, Nonlinearity f, Forcing g, double dt)
    : Integrator(std::make_shared<const LinearModel>(build_parabolic_model(params)), std::move(f), std::move(g),
                 dt) {
  const LinearModel& m = *model_;
  const Eigen::Index n = m.n();
  decay_.resize(n);
  phi1_.resize(n);
  phi2_.resize(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const double lam = m.A(k, k);
    decay_(k) = std::exp(lam * dt);
    phi1_(k) = phi1_of(lam, dt);
    phi2_(k) = phi2_of(lam, dt);
  }
  if (dt > step_bound() * (1.0 + 1e-12))
    throw Error(ErrorCode::StepTooLarge, "dt = " + std::to_string(dt) + " exceeds the boundary-term bound " +
                                             std::to_string(step_bound()));

  const int nq = params.quadrature_intervals();
  const std::vector<double> w = simpson_weights(nq, 0.0, 1.0);
  for (const ForcingTerm& term : forcing_.terms) {
    Vec modes = Vec::Zero(n);
    for (int i = 0; i <= nq; ++i) {
      const double x = static_cast<double>(i) / nq;
      const double wr = w[static_cast<std::size_t>(i)] * term.profile(x);
      if (wr == 0.0) continue;
      for (Eigen::Index k = 0; k < n; ++k) modes(k) += wr * std::cos(static_cast<double>(k) * std::numbers::pi * x);
    }
    profile_modes_.push_back(m.M.solve(modes));
  }
}

double ParabolicIntegrator::step_bound() const {
  const LinearModel& m = *model_;
  const double c_norm = std::sqrt(m.C.dot(m.M.solve(m.C)));
  const double lip = f_.mu0 * c_norm * m.M.norm(m.B);
  return lip > 0.0 ? 0.1 / lip : std::numeric_limits<double>::infinity();
}

Vec ParabolicIntegrator::forcing_modes(double t) const {
  Vec g = Vec::Zero(model_->n());
  for (std::size_t j = 0; j < profile_modes_.size(); ++j) g += forcing_.terms[j].time(t) * profile_modes_[j];
  return g;
}

template <class Sink>
void ParabolicIntegrator::integrate(double t0, const Vec& u0, long steps, Sink&& sink) const {
  const LinearModel& m = *model_;
  const Eigen::Index n = m.n();
  if (u0.size() != n) throw Error(ErrorCode::DimensionMismatch, "parabolic state has wrong size");
  const auto sz = static_cast<std::size_t>(n);
  const Vec ones = Vec::Ones(n);
  Vec u = u0;
  Vec pred(n);
  Vec dg(n);
  Vec g0 = forcing_modes(t0);
  sink(0L, u);
  for (long k = 0; k < steps; ++k) {
    const double t = t0 + static_cast<double>(k) * dt_;
    const double t1 = t0 + static_cast<double>(k + 1) * dt_;
    const double f0 = f_(t, kernels::dot(as_span(m.C), as_span(u)));
    kernels::diag_affine({pred.data(), sz}, as_span(decay_), as_span(u), as_span(phi1_), as_span(m.B), f0,
                         as_span(g0));
    const double f1 = f_(t1, kernels::dot(as_span(m.C), as_span(pred)));
    const Vec g1 = forcing_modes(t1);
    dg = g1 - g0;
    kernels::diag_affine({u.data(), sz}, as_span(ones), as_span(pred), as_span(phi2_), as_span(m.B), f1 - f0,
                         as_span(dg));
    if (!u.allFinite())
      throw Error(ErrorCode::NonFiniteState, "parabolic state became non-finite at t = " + std::to_string(t1));
    g0 = g1;
    sink(k + 1, u);
  }
}

TrajectoryGrid ParabolicIntegrator::run(double t0, const Vec& u0, double horizon, int stride) const {
  const long steps = steps_for(horizon);
  if (stride < 1 || steps % stride != 0) throw Error(ErrorCode::BadParams, "stride must divide the step count");
  TrajectoryGrid out{t0, dt_ * stride, {}, model_};
  out.states.reserve(static_cast<std::size_t>(steps / stride) + 1);
  integrate(t0, u0, steps, [&](long k, const Vec& u) {
    if (k % stride == 0) out.states.push_back(u);
  });
  return out;
}

Vec ParabolicIntegrator::flow(double t0, const Vec& u0, double horizon) const {
  const long steps = steps_for(horizon);
  Vec end = u0;
  integrate(t0, u0, steps, [&](long k, const Vec& u) {
    if (k == steps) end = u;
  });
  return end;
}

// ---------------------------------------------------------------- free functions

TrajectoryGrid integrate_delay(const DelayParams& params, const Nonlinearity& f, const Forcing& g, double t0,
                               const Vec& u0, double horizon, double dt) {
  return DelayIntegrator(params, f, g, dt).run(t0, u0, horizon);
}

TrajectoryGrid integrate_parabolic(const ParabolicParams& params, const Nonlinearity& f, const Forcing& g,
                                   double t0, const Vec& u0, double horizon, double dt) {
  return ParabolicIntegrator(params, f, g, dt).run(t0, u0, horizon);
}

std::string trajectory_to_text(const TrajectoryGrid& traj) {
  std::ostringstream os;
  char buf[64];
  if (traj.model && traj.model->kind == ModelKind::Delay) {
    const DelayParams& p = traj.model->delay();
    os << "# kind=delay lambda=" << p.lambda << " b=" << p.b << " tau=" << p.tau << " n_grid=" << p.n_grid << '\n';
  } else if (traj.model) {
    const ParabolicParams& p = traj.model->parabolic();
    os << "# kind=parabolic alpha=" << p.alpha << " beta=" << p.beta << " n_modes=" << p.n_modes << '\n';
  }
  std::snprintf(buf, sizeof buf, "%.17g", traj.t0);
  os << "# t0=" << buf;
  std::snprintf(buf, sizeof buf, "%.17g", traj.dt);
  os << " dt=" << buf << " steps=" << (traj.states.empty() ? 0 : traj.states.size() - 1) << '\n';
  os << "t";
  const Eigen::Index n = traj.states.empty() ? 0 : traj.states.front().size();
  for (Eigen::Index i = 0; i < n; ++i) os << ",u" << i;
  os << '\n';
  for (std::size_t k = 0; k < traj.states.size(); ++k) {
    std::snprintf(buf, sizeof buf, "%.17g", traj.time(k));
    os << buf;
    for (Eigen::Index i = 0; i < n; ++i) {
      std::snprintf(buf, sizeof buf, "%.17g", traj.states[k](i));
      os << ',' << buf;
    }
    os << '\n';
  }
  return os.str();
}

}  // namespace rplab
