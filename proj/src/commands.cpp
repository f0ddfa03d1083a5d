#include "rplab/commands.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>

#include "rplab/io.hpp"
#include "rplab/kyp.hpp"

namespace rplab {

using nlohmann::json;
namespace fs = std::filesystem;

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::Infeasible:
    case ErrorCode::HamiltonianImaginaryAxis:
      return kExitInfeasible;
    case ErrorCode::ParseError:
    case ErrorCode::ValidationError:
    case ErrorCode::BadParams:
    case ErrorCode::BadRange:
    case ErrorCode::DimensionMismatch:
      return kExitInputError;
    default:
      return kExitCheckFailed;
  }
}

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names{"check-freq",        "solve-kyp", "simulate",   "verify-squeeze",
                                              "find-periodic",     "reconstruct-fibre", "attraction",
                                              "full-pipeline"};
  return names;
}

namespace {

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::BadParams, "cannot write " + path.string());
  out << text;
}

struct Context {
  const RunConfig& cfg;
  fs::path out;
  std::mt19937_64 rng;
  LinearModel model;
  std::optional<KypSolution> kyp;
  std::shared_ptr<const Integrator> integrator;
  std::unique_ptr<Pipeline> pipeline;
  json& stages;
  bool passed = true;

  Context(const RunConfig& c, fs::path o, json& st)
      : cfg(c), out(std::move(o)), rng(c.analysis.seed), model(build_model(c)), stages(st) {}

  double sigma() const { return cfg.forcing.sigma; }

  Vec random_state() {
    std::normal_distribution<double> normal(0.0, cfg.analysis.initial_scale);
    Vec u(model.n());
    for (Eigen::Index i = 0; i < u.size(); ++i) u(i) = normal(rng);
    return u;
  }

  const Integrator& integ() {
    if (!integrator) integrator = build_integrator(cfg);
    return *integrator;
  }

  Pipeline& pl() {
    if (!pipeline) {
      if (!kyp) throw Error(ErrorCode::BadParams, "reduction stages need a certificate");
      integ();
      pipeline = std::make_unique<Pipeline>(integrator, kyp->cert, cfg.analysis.tol);
    }
    return *pipeline;
  }
};

void stage_frequency(Context& ctx) {
  const AnalysisConfig& a = ctx.cfg.analysis;
  const FrequencyReport rep = certify_condition(closed_form_transfer(ctx.cfg), a.nu, a.mu0, a.sweep);
  write_file(ctx.out / "frequency.csv", frequency_table(rep));
  ctx.stages["frequency"] = to_json(rep);
  ctx.passed = ctx.passed && rep.satisfied;
}

void stage_kyp(Context& ctx) {
  const AnalysisConfig& a = ctx.cfg.analysis;
  const KypProblem prob = KypProblem::standard(ctx.model, a.nu, a.mu0);
  KypOptions opts;
  opts.delta_seed = a.delta_seed;
  ctx.kyp = solve_kyp(prob, opts);
  const bool audit = audit_inertia(*ctx.kyp, prob);
  json j = to_json(*ctx.kyp);
  j["unstable_dimension"] = unstable_dimension(prob);
  j["inertia_audit"] = audit;
  ctx.stages["kyp"] = j;
  write_file(ctx.out / "certificate.txt", certificate_to_text(ctx.kyp->cert));
  ctx.passed = ctx.passed && ctx.kyp->feasible && audit;
}

void stage_simulate(Context& ctx) {
  const Vec u0 = ctx.random_state();
  const int stride = ctx.cfg.output.trajectory_stride;
  const long steps = ctx.integ().steps_for(ctx.cfg.analysis.simulate_periods * ctx.sigma());
  const int s = steps % stride == 0 ? stride : 1;
  const TrajectoryGrid traj = ctx.integ().run(0.0, u0, ctx.cfg.analysis.simulate_periods * ctx.sigma(), s);
  write_file(ctx.out / "trajectory.csv", trajectory_to_text(traj));
  double max_norm = 0.0;
  for (const Vec& u : traj.states) max_norm = std::max(max_norm, ctx.model.M.norm(u));
  ctx.stages["simulate"] = {{"rows", traj.size()},
                            {"dt", traj.dt},
                            {"t_end", traj.t_end()},
                            {"max_norm", max_norm},
                            {"final_output", ctx.model.C.dot(traj.back())}};
}

void stage_squeeze(Context& ctx) {
  const AnalysisConfig& a = ctx.cfg.analysis;
  Pipeline& pl = ctx.pl();
  std::string table = "pair,pairs_checked,worst_violation,tolerance,passed\n";
  double worst = -std::numeric_limits<double>::infinity();
  double tol = 0.0;
  bool all = true;
  for (int i = 0; i < a.squeeze_pairs; ++i) {
    const Vec u0 = ctx.random_state();
    const Vec v0 = ctx.random_state();
    const double horizon = a.simulate_periods * ctx.sigma();
    const TrajectoryGrid u = pl.integrator().run(0.0, u0, horizon);
    const TrajectoryGrid v = pl.integrator().run(0.0, v0, horizon);
    const SqueezingReport rep =
        verify_squeezing(u, v, pl.cert(), pl.mass(), a.squeeze_samples, a.seed + static_cast<std::uint64_t>(i),
                         a.tol.squeeze);
    table += std::to_string(i) + "," + std::to_string(rep.pairs_checked) + "," + format_double(rep.worst_violation) +
             "," + format_double(rep.tolerance) + "," + (rep.passed ? "true" : "false") + "\n";
    worst = std::max(worst, rep.worst_violation);
    tol = rep.tolerance;
    all = all && rep.passed;
  }
  write_file(ctx.out / "squeeze.csv", table);
  ctx.stages["squeeze"] = {{"pairs", a.squeeze_pairs},
                           {"samples_per_pair", a.squeeze_samples},
                           {"worst_violation", worst},
                           {"tolerance", tol},
                           {"passed", all}};
  ctx.passed = ctx.passed && all;
}

void stage_periodic(Context& ctx) {
  const AnalysisConfig& a = ctx.cfg.analysis;
  Pipeline& pl = ctx.pl();
  std::vector<PeriodicOrbit> distinct;
  std::string runs = "run,orbit,pi_coordinate,periods_used,final_d,pi_monotone,stability\n";
  std::string poincare = "run,k,d,pi\n";
  bool all = true;
  for (int r = 0; r < a.periodic_runs; ++r) {
    const TrajectoryGrid traj = pl.integrator().run(0.0, ctx.random_state(), a.periodic_periods * ctx.sigma());
    PeriodicDetection det = detect_periodic(traj, pl, a.max_extra_periods);
    const double scale = std::max(1.0, pl.mass().norm(det.orbit.anchor()));
    std::size_t id = distinct.size();
    for (std::size_t k = 0; k < distinct.size(); ++k)
      if (pl.mass().norm(distinct[k].state_at(det.orbit.t0, pl.dt()) - det.orbit.anchor()) <
          1e3 * a.tol.periodic * scale)
        id = k;
    if (id == distinct.size()) {
      det.orbit.stability = classify_stability(det.orbit, a.stability_probes, a.stability_radius * scale, pl, a.seed);
      distinct.push_back(det.orbit);
    }
    const PeriodicOrbit& orbit = distinct[id];
    all = all && det.pi_monotone;
    runs += std::to_string(r) + "," + std::to_string(id) + "," + format_double(det.orbit.pi_coordinate) + "," +
            std::to_string(det.periods_used) + "," + format_double(det.d_seq.back()) + "," +
            (det.pi_monotone ? "true" : "false") + "," + std::string(to_string(orbit.stability)) + "\n";
    for (std::size_t k = 0; k < det.pi_seq.size(); ++k)
      poincare += std::to_string(r) + "," + std::to_string(k) + "," +
                  format_double(k < det.d_seq.size() ? det.d_seq[k] : 0.0) + "," + format_double(det.pi_seq[k]) + "\n";
  }

  json orbits = json::array();
  for (const PeriodicOrbit& o : distinct)
    orbits.push_back({{"pi_coordinate", o.pi_coordinate},
                      {"closure", o.closure},
                      {"stability", std::string(to_string(o.stability))}});
  json stage = {{"runs", a.periodic_runs}, {"distinct_orbits", distinct.size()}, {"orbits", orbits},
                {"all_pi_monotone", all}};

  std::vector<const PeriodicOrbit*> stable;
  for (const PeriodicOrbit& o : distinct)
    if (o.stability == Stability::Stable) stable.push_back(&o);
  if (stable.size() >= 2) {
    std::sort(stable.begin(), stable.end(),
              [](const PeriodicOrbit* x, const PeriodicOrbit* y) { return x->pi_coordinate < y->pi_coordinate; });
    const auto middle =
        find_unstable_orbit(*stable.front(), *stable.back(), pl, a.back_horizon_periods * ctx.sigma());
    if (middle)
      stage["middle_orbit"] = {{"pi_coordinate", middle->pi_coordinate},
                               {"closure", middle->closure},
                               {"stability", std::string(to_string(middle->stability))}};
  }
  write_file(ctx.out / "periodic_runs.csv", runs);
  write_file(ctx.out / "poincare.csv", poincare);
  ctx.stages["periodic"] = stage;
  ctx.passed = ctx.passed && all;
}

void stage_fibre(Context& ctx) {
  const AnalysisConfig& a = ctx.cfg.analysis;
  Pipeline& pl = ctx.pl();
  const double q = a.fibre_phase;
  const double H = a.fibre_horizon_periods * ctx.sigma();
  const Vec ref = pl.reference_state(q);
  const double scale = std::max(1.0, pl.mass().norm(ref));
  const double center = pl.pi(ref);
  std::vector<double> grid;
  for (int i = 0; i < a.fibre_points; ++i)
    grid.push_back(center + a.fibre_span * scale * (-1.0 + 2.0 * i / (a.fibre_points - 1)));
  const FibreReconstruction rec = reconstruct_fibre(q, grid, H, pl);
  write_file(ctx.out / "fibre.csv", fibre_table(rec, pl));
  json stage = to_json(rec);
  const bool contraction_ok = rec.contraction_factor <= 0.5;
  stage["contraction_ok"] = contraction_ok;

  // Cone property on up to five spread fibre points, and one transient counterprobe.
  const std::size_t m = std::min<std::size_t>(5, rec.points.size());
  std::vector<TrajectoryGrid> runs;
  for (std::size_t i = 0; i < m; ++i) {
    const std::size_t idx = m > 1 ? i * (rec.points.size() - 1) / (m - 1) : 0;
    runs.push_back(pl.integrator().run(q, rec.points[idx], a.simulate_periods * ctx.sigma()));
  }
  double worst_margin = -std::numeric_limits<double>::infinity();
  bool cone_ok = true;
  for (std::size_t i = 0; i < runs.size(); ++i)
    for (std::size_t j = i + 1; j < runs.size(); ++j) {
      const AmenableReport rep = amenable_v_check(runs[i], runs[j], pl.cert(), pl.mass(), H, 0.0);
      cone_ok = cone_ok && rep.passed;
      worst_margin = std::max(worst_margin, rep.max_v - rep.threshold);
    }
  // Counterprobe: a start displaced from the fibre along the positive space, so the pair is not amenable.
  Vec w = ctx.random_state();
  w -= pl.mass().inner(pl.direction(), w) * pl.direction();
  const Vec start = rec.points.front() + a.initial_scale * w / pl.mass().norm(w);
  const TrajectoryGrid probe = pl.integrator().run(q, start, a.simulate_periods * ctx.sigma());
  const AmenableReport counter = amenable_v_check(probe, runs.front(), pl.cert(), pl.mass(), H, 0.0);
  stage["amenable"] = {{"pairs", runs.size() * (runs.size() - 1) / 2},
                       {"worst_excess", worst_margin},
                       {"passed", cone_ok},
                       {"counterprobe_violated", !counter.passed}};
  ctx.stages["fibre"] = stage;
  ctx.passed = ctx.passed && rec.passed && contraction_ok && cone_ok;
}

void stage_attraction(Context& ctx) {
  const AnalysisConfig& a = ctx.cfg.analysis;
  Pipeline& pl = ctx.pl();
  const TrajectoryGrid traj = pl.integrator().run(0.0, ctx.random_state(), a.attraction_periods * ctx.sigma());
  const AttractionReport rep = attraction_check(traj, pl, a.back_horizon_periods * ctx.sigma());
  write_file(ctx.out / "attraction.csv", attraction_table(rep));
  ctx.stages["attraction"] = to_json(rep);
  ctx.passed = ctx.passed && rep.passed;
}

}  // namespace

CommandResult run_command(const std::string& cmd, const RunConfig& cfg, const fs::path& out_dir) {
  CommandResult result;
  json& s = result.summary;
  s["command"] = cmd;
  s["seed"] = cfg.analysis.seed;
  json stages = json::object();
  try {
    if (std::find(command_names().begin(), command_names().end(), cmd) == command_names().end())
      throw Error(ErrorCode::BadParams, "unknown command " + cmd);
    fs::create_directories(out_dir);
    write_file(out_dir / "effective_config.json", config_to_json(cfg).dump(2) + "\n");

    Context ctx(cfg, out_dir, stages);
    if (cmd == "check-freq") {
      stage_frequency(ctx);
    } else if (cmd == "solve-kyp") {
      stage_kyp(ctx);
    } else if (cmd == "simulate") {
      stage_simulate(ctx);
    } else if (cmd == "verify-squeeze") {
      stage_kyp(ctx);
      stage_squeeze(ctx);
    } else if (cmd == "find-periodic") {
      stage_kyp(ctx);
      stage_periodic(ctx);
    } else if (cmd == "reconstruct-fibre") {
      stage_kyp(ctx);
      stage_fibre(ctx);
    } else if (cmd == "attraction") {
      stage_kyp(ctx);
      stage_attraction(ctx);
    } else {
      stage_frequency(ctx);
      stage_kyp(ctx);
      stage_simulate(ctx);
      stage_squeeze(ctx);
      stage_periodic(ctx);
      stage_fibre(ctx);
      stage_attraction(ctx);
    }
    result.exit_code = ctx.passed ? kExitPass : kExitCheckFailed;
  } catch (const Error& e) {
    result.exit_code = exit_code_for(e.code());
    s["error"] = {{"code", std::string(to_string(e.code()))}, {"message", e.what()}};
  } catch (const std::exception& e) {
    result.exit_code = kExitCheckFailed;
    s["error"] = {{"code", "Internal"}, {"message", e.what()}};
  }
  s["stages"] = stages;
  s["exit_code"] = result.exit_code;
  s["status"] = result.exit_code == kExitPass ? "pass" : "fail";
  try {
    fs::create_directories(out_dir);
    write_file(out_dir / "summary.json", s.dump(2) + "\n");
  } catch (const std::exception&) {
    if (result.exit_code == kExitPass) result.exit_code = kExitInputError;
  }
  return result;
}

}  // namespace rplab
