#include "rplab/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include "rplab/error.hpp"

namespace rplab {

using nlohmann::json;

namespace {

using Issues = std::vector<std::string>;

std::string type_name(const json& j) { return j.type_name(); }

// Reads one JSON object, remembering which keys were consumed so leftovers can
// be reported as unknown.
class Reader {
 public:
  Reader(const json& obj, std::string path, Issues& issues) : obj_(obj), path_(std::move(path)), issues_(issues) {
    if (!obj_.is_object()) throw Error(ErrorCode::ParseError, "key " + label() + ": expected an object");
  }

  bool has(const std::string& key) {
    seen_.insert(key);
    return obj_.contains(key) && !obj_.at(key).is_null();
  }

  double number(const std::string& key, double def) { return has(key) ? as_number(key) : def; }

  double required_number(const std::string& key) {
    if (has(key)) return as_number(key);
    issues_.push_back(label(key) + " is required");
    return std::numeric_limits<double>::quiet_NaN();
  }

  int integer(const std::string& key, int def) {
    if (!has(key)) return def;
    const json& v = obj_.at(key);
    if (!v.is_number_integer()) throw Error(ErrorCode::ParseError, "key " + label(key) + ": expected an integer");
    return v.get<int>();
  }

  bool boolean(const std::string& key, bool def) {
    if (!has(key)) return def;
    const json& v = obj_.at(key);
    if (!v.is_boolean()) throw Error(ErrorCode::ParseError, "key " + label(key) + ": expected a boolean");
    return v.get<bool>();
  }

  std::string string(const std::string& key, const std::string& def) {
    if (!has(key)) return def;
    const json& v = obj_.at(key);
    if (!v.is_string()) throw Error(ErrorCode::ParseError, "key " + label(key) + ": expected a string");
    return v.get<std::string>();
  }

  const json& raw(const std::string& key) {
    seen_.insert(key);
    return obj_.at(key);
  }

  std::string label(const std::string& key = "") const {
    if (key.empty()) return path_.empty() ? "<root>" : path_;
    return path_.empty() ? key : path_ + "." + key;
  }

  void finish() {
    for (const auto& item : obj_.items())
      if (!seen_.count(item.key())) issues_.push_back("unknown key " + label(item.key()));
  }

 private:
  double as_number(const std::string& key) {
    const json& v = obj_.at(key);
    if (!v.is_number())
      throw Error(ErrorCode::ParseError, "key " + label(key) + ": expected a number, got " + type_name(v));
    return v.get<double>();
  }

  const json& obj_;
  std::string path_;
  Issues& issues_;
  std::set<std::string> seen_;
};

std::vector<double> number_array(const json& j, const std::string& label) {
  if (!j.is_array() || j.empty()) throw Error(ErrorCode::ParseError, "key " + label + ": expected a non-empty array");
  std::vector<double> out;
  for (const json& v : j) {
    if (!v.is_number()) throw Error(ErrorCode::ParseError, "key " + label + ": array entries must be numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

// number | {"constant": v} | {"samples": [...]}
SampledFunction read_sampled(const json& j, double lo, double hi, const std::string& label, Issues& issues) {
  if (j.is_number()) return SampledFunction::constant(lo, hi, j.get<double>());
  Reader r(j, label, issues);
  SampledFunction f = SampledFunction::constant(lo, hi, 0.0);
  if (r.has("constant")) f = SampledFunction::constant(lo, hi, r.number("constant", 0.0));
  if (r.has("samples")) f = SampledFunction(lo, hi, number_array(r.raw("samples"), r.label("samples")));
  r.finish();
  return f;
}

// number | {"constant": v} | {"cosine": {...}} | {"table": [...]}
PeriodicFunction read_periodic(const json& j, double sigma, const std::string& label, Issues& issues) {
  if (j.is_number()) return PeriodicFunction::constant(j.get<double>());
  Reader r(j, label, issues);
  PeriodicFunction f = PeriodicFunction::constant(0.0);
  if (r.has("constant")) f = PeriodicFunction::constant(r.number("constant", 0.0));
  if (r.has("cosine")) {
    Reader c(r.raw("cosine"), r.label("cosine"), issues);
    f = PeriodicFunction::cosine(sigma, c.number("amplitude", 1.0), c.number("phase", 0.0), c.number("offset", 0.0));
    c.finish();
  }
  if (r.has("table")) f = PeriodicFunction::table(sigma, number_array(r.raw("table"), r.label("table")));
  r.finish();
  return f;
}

json sampled_to_json(const SampledFunction& f) { return {{"samples", f.samples()}}; }

json periodic_to_json(const PeriodicFunction& f) {
  switch (f.kind()) {
    case PeriodicFunction::Kind::Constant:
      return {{"constant", f.offset()}};
    case PeriodicFunction::Kind::Cosine:
      return {{"cosine", {{"amplitude", f.amplitude()}, {"phase", f.phase()}, {"offset", f.offset()}}}};
    case PeriodicFunction::Kind::Table:
      return {{"table", f.samples()}};
  }
  return {};
}

template <class F>
void check(Issues& issues, F&& validate) {
  try {
    validate();
  } catch (const Error& e) {
    issues.push_back(e.what());
  }
}

double default_dt(const RunConfig& cfg, Issues& issues) {
  const double sigma = cfg.forcing.sigma;
  if (cfg.kind == ModelKind::Delay) {
    const double h = cfg.delay.tau / cfg.delay.n_grid;
    const double r = sigma / h;
    if (std::abs(r - std::round(r)) <= 1e-9 * r) return h;
    issues.push_back("analysis.dt is required: tau/n_grid does not divide sigma");
    return h;
  }
  const LinearModel m = build_parabolic_model(cfg.parabolic);
  const double lip = cfg.nonlinearity.mu0 * std::sqrt(m.C.dot(m.M.solve(m.C))) * m.M.norm(m.B);
  const double bound = lip > 0.0 ? 0.1 / lip : sigma / 100.0;
  return sigma / std::ceil(sigma / std::min(bound, sigma / 100.0) - 1e-9);
}

}  // namespace

RunConfig parse_config_text(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    const std::size_t upto = std::min<std::size_t>(e.byte, text.size());
    const long line = 1 + std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(upto), '\n');
    throw Error(ErrorCode::ParseError, "line " + std::to_string(line) + ": " + e.what());
  }

  Issues issues;
  RunConfig cfg;
  Reader top(root, "", issues);

  // forcing first: sigma is needed by the periodic tables elsewhere
  double sigma = 1.0;
  json forcing_terms = json::array();
  if (top.has("forcing")) {
    Reader fr(top.raw("forcing"), "forcing", issues);
    sigma = fr.number("sigma", 1.0);
    if (!(sigma > 0.0) || !std::isfinite(sigma)) {
      issues.push_back("forcing.sigma must be > 0");
      sigma = 1.0;
    }
    if (fr.has("terms")) {
      forcing_terms = fr.raw("terms");
      if (!forcing_terms.is_array()) throw Error(ErrorCode::ParseError, "key forcing.terms: expected an array");
    }
    fr.finish();
  }
  cfg.forcing.sigma = sigma;
  for (std::size_t i = 0; i < forcing_terms.size(); ++i) {
    const std::string label = "forcing.terms[" + std::to_string(i) + "]";
    Reader tr(forcing_terms[i], label, issues);
    ForcingTerm term;
    if (tr.has("time")) term.time = read_periodic(tr.raw("time"), sigma, label + ".time", issues);
    if (tr.has("profile")) term.profile = read_sampled(tr.raw("profile"), 0.0, 1.0, label + ".profile", issues);
    tr.finish();
    cfg.forcing.terms.push_back(std::move(term));
  }

  if (!top.has("model")) throw Error(ErrorCode::ValidationError, "section model is required");
  {
    Reader mr(top.raw("model"), "model", issues);
    const std::string kind = mr.string("kind", "");
    if (kind == "delay") {
      cfg.kind = ModelKind::Delay;
      DelayParams& p = cfg.delay;
      p.lambda = mr.required_number("lambda");
      p.b = mr.number("b", 1.0);
      p.tau = mr.required_number("tau");
      p.n_grid = mr.integer("n_grid", 32);
      const double tau = std::isfinite(p.tau) && p.tau > 0.0 ? p.tau : 1.0;
      p.rho = mr.has("rho") ? read_sampled(mr.raw("rho"), -tau, 0.0, "model.rho", issues)
                            : SampledFunction::constant(-tau, 0.0, 1.0);
      check(issues, [&] { p.validate(); });
    } else if (kind == "parabolic") {
      cfg.kind = ModelKind::Parabolic;
      ParabolicParams& p = cfg.parabolic;
      p.alpha = mr.required_number("alpha");
      p.beta = mr.required_number("beta");
      p.n_modes = mr.integer("n_modes", 8);
      p.n_quad = mr.integer("n_quad", 0);
      p.rho = mr.has("rho") ? read_sampled(mr.raw("rho"), 0.0, 1.0, "model.rho", issues)
                            : SampledFunction::constant(0.0, 1.0, 1.0);
      check(issues, [&] { p.validate(); });
    } else {
      issues.push_back("model.kind must be \"delay\" or \"parabolic\"");
    }
    mr.finish();
  }

  if (top.has("nonlinearity")) {
    Reader nr(top.raw("nonlinearity"), "nonlinearity", issues);
    const std::string kind = nr.string("kind", "zero");
    auto periodic = [&](const std::string& key, double def) {
      return nr.has(key) ? read_periodic(nr.raw(key), sigma, "nonlinearity." + key, issues)
                         : PeriodicFunction::constant(def);
    };
    const PeriodicFunction b2 = periodic("b2", 0.0);
    if (kind == "sigmoid") {
      cfg.nonlinearity = Nonlinearity::sigmoid(periodic("b1", 4.0), b2, nr.number("mu0", 0.0));
    } else if (kind == "saturating_linear") {
      cfg.nonlinearity = Nonlinearity::saturating_linear(nr.number("slope", 1.0), nr.number("v_sat", 1.0), b2);
    } else if (kind == "custom_table") {
      const double lo = nr.number("v_lo", -10.0);
      const double hi = nr.number("v_hi", 10.0);
      std::vector<double> values{0.0};
      if (nr.has("values")) values = number_array(nr.raw("values"), "nonlinearity.values");
      else issues.push_back("nonlinearity.values is required for custom_table");
      cfg.nonlinearity = Nonlinearity::custom_table(SampledFunction(lo, hi, values), nr.required_number("mu0"), b2);
    } else if (kind != "zero") {
      issues.push_back("nonlinearity.kind must be zero, sigmoid, saturating_linear or custom_table");
    }
    nr.finish();
  }
  check(issues, [&] { cfg.nonlinearity.validate(sigma); });

  AnalysisConfig& a = cfg.analysis;
  if (top.has("analysis")) {
    Reader ar(top.raw("analysis"), "analysis", issues);
    a.nu = ar.required_number("nu");
    a.mu0 = ar.number("mu0", cfg.nonlinearity.mu0);
    if (ar.has("delta_seed")) a.delta_seed = ar.number("delta_seed", 0.0);
    a.theorem_mode = ar.boolean("theorem_mode", false);
    a.dt = ar.number("dt", 0.0);
    a.seed = static_cast<std::uint64_t>(ar.integer("seed", 1));
    a.initial_scale = ar.number("initial_scale", a.initial_scale);
    if (ar.has("frequency")) {
      Reader fr(ar.raw("frequency"), "analysis.frequency", issues);
      a.sweep.omega_min = fr.number("omega_min", a.sweep.omega_min);
      a.sweep.omega_max = fr.number("omega_max", a.sweep.omega_max);
      a.sweep.n_omega = fr.integer("n_omega", a.sweep.n_omega);
      a.sweep.tail_safety = fr.number("tail_safety", a.sweep.tail_safety);
      fr.finish();
    }
    if (ar.has("tolerances")) {
      Reader tr(ar.raw("tolerances"), "analysis.tolerances", issues);
      a.tol.squeeze = tr.number("squeeze", a.tol.squeeze);
      a.tol.periodic = tr.number("periodic", a.tol.periodic);
      a.tol.fibre = tr.number("fibre", a.tol.fibre);
      a.tol.transient_periods = tr.integer("transient_periods", a.tol.transient_periods);
      a.tol.warmup_periods = tr.number("warmup_periods", a.tol.warmup_periods);
      tr.finish();
    }
    if (ar.has("horizons")) {
      Reader hr(ar.raw("horizons"), "analysis.horizons", issues);
      a.simulate_periods = hr.integer("simulate_periods", a.simulate_periods);
      a.periodic_periods = hr.integer("periodic_periods", a.periodic_periods);
      a.max_extra_periods = hr.integer("max_extra_periods", a.max_extra_periods);
      a.back_horizon_periods = hr.integer("back_horizon_periods", a.back_horizon_periods);
      a.fibre_horizon_periods = hr.integer("fibre_horizon_periods", a.fibre_horizon_periods);
      a.attraction_periods = hr.integer("attraction_periods", a.attraction_periods);
      hr.finish();
    }
    if (ar.has("checks")) {
      Reader cr(ar.raw("checks"), "analysis.checks", issues);
      a.squeeze_pairs = cr.integer("squeeze_pairs", a.squeeze_pairs);
      a.squeeze_samples = cr.integer("squeeze_samples", a.squeeze_samples);
      a.periodic_runs = cr.integer("periodic_runs", a.periodic_runs);
      a.stability_probes = cr.integer("stability_probes", a.stability_probes);
      a.stability_radius = cr.number("stability_radius", a.stability_radius);
      a.fibre_points = cr.integer("fibre_points", a.fibre_points);
      a.fibre_span = cr.number("fibre_span", a.fibre_span);
      a.fibre_phase = cr.number("fibre_phase", a.fibre_phase);
      cr.finish();
    }
    ar.finish();
  } else {
    issues.push_back("section analysis is required");
  }

  if (top.has("output")) {
    Reader orr(top.raw("output"), "output", issues);
    cfg.output.directory = orr.string("directory", cfg.output.directory);
    cfg.output.trajectory_stride = orr.integer("trajectory_stride", cfg.output.trajectory_stride);
    orr.finish();
  }
  top.finish();

  // ranges
  if (!(a.nu >= 0.0)) issues.push_back("analysis.nu must be >= 0");
  if (!(a.mu0 > 0.0)) issues.push_back("analysis.mu0 must be > 0 (or implied by the nonlinearity)");
  if (a.mu0 < cfg.nonlinearity.mu0 * (1.0 - 1e-12))
    issues.push_back("analysis.mu0 is below the slope bound of the nonlinearity");
  if (cfg.kind == ModelKind::Delay && a.nu == cfg.delay.lambda)
    issues.push_back("analysis.nu must differ from model.lambda");
  if (cfg.kind == ModelKind::Parabolic && a.theorem_mode) {
    const double hi = cfg.parabolic.beta + std::numbers::pi * std::numbers::pi * cfg.parabolic.alpha;
    if (!(a.nu > cfg.parabolic.beta && a.nu < hi))
      issues.push_back("analysis.nu must lie in (beta, beta + pi^2 alpha) = (" + std::to_string(cfg.parabolic.beta) +
                       ", " + std::to_string(hi) + ") in theorem mode");
  }
  if (a.sweep.n_omega < 2 || !(a.sweep.omega_min > 0.0) || !(a.sweep.omega_max > a.sweep.omega_min))
    issues.push_back("analysis.frequency needs n_omega >= 2 and 0 < omega_min < omega_max");
  if (!(a.tol.squeeze > 0.0) || !(a.tol.periodic > 0.0) || !(a.tol.fibre > 0.0))
    issues.push_back("analysis.tolerances must be > 0");
  if (a.periodic_periods < 20) issues.push_back("analysis.horizons.periodic_periods must be >= 20");
  if (a.attraction_periods < 10) issues.push_back("analysis.horizons.attraction_periods must be >= 10");
  if (a.fibre_horizon_periods < 3 || a.back_horizon_periods < 3)
    issues.push_back("analysis.horizons back horizons must be >= 3 periods");
  if (a.simulate_periods < 1 || a.squeeze_pairs < 1 || a.squeeze_samples < 1 || a.periodic_runs < 1 ||
      a.fibre_points < 2 || a.stability_probes < 1)
    issues.push_back("analysis counts must be positive (fibre_points >= 2)");
  if (!(a.stability_radius > 0.0) || !(a.fibre_span > 0.0) || !(a.initial_scale >= 0.0))
    issues.push_back("analysis.checks radii and spans must be > 0");
  if (cfg.output.trajectory_stride < 1) issues.push_back("output.trajectory_stride must be >= 1");

  if (issues.empty()) {
    if (a.dt == 0.0) a.dt = default_dt(cfg, issues);
    if (!(a.dt > 0.0)) issues.push_back("analysis.dt must be > 0");
    else check(issues, [&] { build_integrator(cfg); });
  }

  if (!issues.empty()) {
    std::string msg;
    for (const std::string& s : issues) msg += (msg.empty() ? "" : "; ") + s;
    throw Error(ErrorCode::ValidationError, msg);
  }
  return cfg;
}

RunConfig parse_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ParseError, "cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

json config_to_json(const RunConfig& cfg) {
  json model;
  if (cfg.kind == ModelKind::Delay) {
    const DelayParams& p = cfg.delay;
    model = {{"kind", "delay"}, {"lambda", p.lambda}, {"b", p.b}, {"tau", p.tau}, {"n_grid", p.n_grid},
             {"rho", sampled_to_json(p.rho)}};
  } else {
    const ParabolicParams& p = cfg.parabolic;
    model = {{"kind", "parabolic"}, {"alpha", p.alpha}, {"beta", p.beta}, {"n_modes", p.n_modes},
             {"n_quad", p.quadrature_intervals()}, {"rho", sampled_to_json(p.rho)}};
  }

  const Nonlinearity& f = cfg.nonlinearity;
  json nl;
  switch (f.kind) {
    case NonlinearityKind::Zero:
      nl = {{"kind", "zero"}};
      break;
    case NonlinearityKind::Sigmoid:
      nl = {{"kind", "sigmoid"}, {"b1", periodic_to_json(f.b1)}, {"b2", periodic_to_json(f.b2)}, {"mu0", f.mu0}};
      break;
    case NonlinearityKind::SaturatingLinear:
      nl = {{"kind", "saturating_linear"}, {"slope", f.slope}, {"v_sat", f.v_sat}, {"b2", periodic_to_json(f.b2)}};
      break;
    case NonlinearityKind::CustomTable:
      nl = {{"kind", "custom_table"}, {"v_lo", f.table.lo()}, {"v_hi", f.table.hi()},
            {"values", f.table.samples()}, {"mu0", f.mu0}, {"b2", periodic_to_json(f.b2)}};
      break;
  }

  json terms = json::array();
  for (const ForcingTerm& t : cfg.forcing.terms)
    terms.push_back({{"time", periodic_to_json(t.time)}, {"profile", sampled_to_json(t.profile)}});

  const AnalysisConfig& a = cfg.analysis;
  json analysis = {
      {"nu", a.nu},
      {"mu0", a.mu0},
      {"delta_seed", a.delta_seed ? json(*a.delta_seed) : json(nullptr)},
      {"theorem_mode", a.theorem_mode},
      {"dt", a.dt},
      {"seed", a.seed},
      {"initial_scale", a.initial_scale},
      {"frequency",
       {{"omega_min", a.sweep.omega_min},
        {"omega_max", a.sweep.omega_max},
        {"n_omega", a.sweep.n_omega},
        {"tail_safety", a.sweep.tail_safety}}},
      {"tolerances",
       {{"squeeze", a.tol.squeeze},
        {"periodic", a.tol.periodic},
        {"fibre", a.tol.fibre},
        {"transient_periods", a.tol.transient_periods},
        {"warmup_periods", a.tol.warmup_periods}}},
      {"horizons",
       {{"simulate_periods", a.simulate_periods},
        {"periodic_periods", a.periodic_periods},
        {"max_extra_periods", a.max_extra_periods},
        {"back_horizon_periods", a.back_horizon_periods},
        {"fibre_horizon_periods", a.fibre_horizon_periods},
        {"attraction_periods", a.attraction_periods}}},
      {"checks",
       {{"squeeze_pairs", a.squeeze_pairs},
        {"squeeze_samples", a.squeeze_samples},
        {"periodic_runs", a.periodic_runs},
        {"stability_probes", a.stability_probes},
        {"stability_radius", a.stability_radius},
        {"fibre_points", a.fibre_points},
        {"fibre_span", a.fibre_span},
        {"fibre_phase", a.fibre_phase}}}};

  return {{"model", model},
          {"nonlinearity", nl},
          {"forcing", {{"sigma", cfg.forcing.sigma}, {"terms", terms}}},
          {"analysis", analysis},
          {"output", {{"directory", cfg.output.directory}, {"trajectory_stride", cfg.output.trajectory_stride}}}};
}

LinearModel build_model(const RunConfig& cfg) {
  return cfg.kind == ModelKind::Delay ? build_delay_model(cfg.delay) : build_parabolic_model(cfg.parabolic);
}

std::shared_ptr<const Integrator> build_integrator(const RunConfig& cfg) {
  if (cfg.kind == ModelKind::Delay)
    return std::make_shared<DelayIntegrator>(cfg.delay, cfg.nonlinearity, cfg.forcing, cfg.analysis.dt);
  return std::make_shared<ParabolicIntegrator>(cfg.parabolic, cfg.nonlinearity, cfg.forcing, cfg.analysis.dt);
}

Transfer closed_form_transfer(const RunConfig& cfg) {
  return cfg.kind == ModelKind::Delay ? delay_evaluator(cfg.delay) : parabolic_evaluator(cfg.parabolic);
}

}  // namespace rplab
