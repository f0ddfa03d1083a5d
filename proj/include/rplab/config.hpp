#pragma once

// Run configuration: a JSON document with sections model, nonlinearity,
// forcing, analysis and output. Unknown keys are rejected; every default is
// materialized so the effective configuration can be echoed for provenance.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "json.hpp"
#include "rplab/cocycle.hpp"
#include "rplab/frequency.hpp"
#include "rplab/reduction.hpp"

namespace rplab {

struct AnalysisConfig {
  double nu = 0.0;
  double mu0 = 0.0;  // defaults to the nonlinearity's slope bound
  std::optional<double> delta_seed;
  bool theorem_mode = false;
  double dt = 0.0;  // 0 selects a default from the model
  SweepOptions sweep;
  ReductionTolerances tol;
  std::uint64_t seed = 1;
  double initial_scale = 3.0;  // std of random initial coordinates

  int simulate_periods = 8;
  int squeeze_pairs = 10;
  int squeeze_samples = 200;
  int periodic_runs = 8;
  int periodic_periods = 30;
  int max_extra_periods = 200;
  int stability_probes = 4;
  double stability_radius = 1e-3;
  int back_horizon_periods = 8;
  int fibre_horizon_periods = 3;
  int fibre_points = 9;
  double fibre_span = 3.0;  // in state scales
  double fibre_phase = 0.0;
  int attraction_periods = 10;
};

struct OutputConfig {
  std::string directory = "rplab_out";
  int trajectory_stride = 1;
};

struct RunConfig {
  ModelKind kind = ModelKind::Delay;
  DelayParams delay;
  ParabolicParams parabolic;
  Nonlinearity nonlinearity;
  Forcing forcing;
  AnalysisConfig analysis;
  OutputConfig output;
};

/// Throws ParseError (with line or key) for malformed input and
/// ValidationError listing every range violation.
RunConfig parse_config_text(const std::string& text);
RunConfig parse_config(const std::filesystem::path& path);

/// Effective configuration with all defaults filled in.
nlohmann::json config_to_json(const RunConfig& cfg);

LinearModel build_model(const RunConfig& cfg);
std::shared_ptr<const Integrator> build_integrator(const RunConfig& cfg);
Transfer closed_form_transfer(const RunConfig& cfg);

}  // namespace rplab
