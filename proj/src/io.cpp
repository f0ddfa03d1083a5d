#include "rplab/io.hpp"

#include <cstdio>
#include <sstream>

#include "rplab/error.hpp"

namespace rplab {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NonSymmetric: return "NonSymmetric";
    case ErrorCode::SingularMass: return "SingularMass";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NoNegativeSpace: return "NoNegativeSpace";
    case ErrorCode::BadParams: return "BadParams";
    case ErrorCode::PoleAt: return "PoleAt";
    case ErrorCode::NearSingular: return "NearSingular";
    case ErrorCode::BadRange: return "BadRange";
    case ErrorCode::Infeasible: return "Infeasible";
    case ErrorCode::HamiltonianImaginaryAxis: return "HamiltonianImaginaryAxis";
    case ErrorCode::StepTooLarge: return "StepTooLarge";
    case ErrorCode::NonFiniteState: return "NonFiniteState";
    case ErrorCode::GridMismatch: return "GridMismatch";
    case ErrorCode::BracketFailure: return "BracketFailure";
    case ErrorCode::MonotonicityBreakdown: return "MonotonicityBreakdown";
    case ErrorCode::NotConverged: return "NotConverged";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::ValidationError: return "ValidationError";
    case ErrorCode::Cancelled: return "Cancelled";
  }
  return "Unknown";
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string certificate_to_text(const QuadraticCertificate& cert) {
  std::ostringstream os;
  const Eigen::Index n = cert.dim();
  os << "# n " << n << '\n';
  os << "# nu " << format_double(cert.nu) << '\n';
  os << "# delta " << format_double(cert.delta) << '\n';
  os << "# mu0 " << format_double(cert.mu0) << '\n';
  os << "# inertia " << cert.inertia.n_neg << ' ' << cert.inertia.n_zero << ' ' << cert.inertia.n_pos << '\n';
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) os << (j ? " " : "") << format_double(cert.P(i, j));
    os << '\n';
  }
  return os.str();
}

QuadraticCertificate certificate_from_text(const std::string& text, const MassMatrix& M) {
  std::istringstream is(text);
  std::string line;
  long n = -1;
  double nu = 0.0, delta = 0.0, mu0 = 0.0;
  std::vector<double> entries;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ls(line);
    if (line[0] == '#') {
      std::string hash, key;
      ls >> hash >> key;
      if (key == "n") ls >> n;
      else if (key == "nu") ls >> nu;
      else if (key == "delta") ls >> delta;
      else if (key == "mu0") ls >> mu0;
      continue;
    }
    double v;
    while (ls >> v) entries.push_back(v);
    if (!ls.eof()) throw Error(ErrorCode::ParseError, "line " + std::to_string(lineno) + ": bad number");
  }
  if (n <= 0 || static_cast<long>(entries.size()) != n * n)
    throw Error(ErrorCode::ParseError, "certificate text does not hold an n x n matrix");
  Mat P(n, n);
  for (long i = 0; i < n; ++i)
    for (long j = 0; j < n; ++j) P(i, j) = entries[static_cast<std::size_t>(i * n + j)];
  return QuadraticCertificate::from_operator(P, M, nu, delta, mu0);
}

nlohmann::json to_json(const Inertia& in) { return {{"n_neg", in.n_neg}, {"n_zero", in.n_zero}, {"n_pos", in.n_pos}}; }

nlohmann::json to_json(const FrequencyReport& rep) {
  return {{"nu", rep.nu},
          {"mu0", std::isinf(rep.mu0) ? nlohmann::json("inf") : nlohmann::json(rep.mu0)},
          {"min_margin", rep.min_margin},
          {"argmin_omega", rep.argmin_omega},
          {"tail_constant", rep.tail_constant},
          {"tail_bound", rep.tail_bound},
          {"n_omega", rep.omega_grid.size()},
          {"omega_max", rep.omega_grid.empty() ? 0.0 : rep.omega_grid.back()},
          {"satisfied", rep.satisfied}};
}

nlohmann::json to_json(const KypSolution& sol) {
  return {{"feasible", sol.feasible},       {"kyp_margin", sol.kyp_margin},
          {"nu", sol.cert.nu},              {"delta", sol.cert.delta},
          {"mu0", sol.cert.mu0},            {"inertia", to_json(sol.cert.inertia)},
          {"riccati_residual", sol.riccati_residual}, {"delta_attempts", sol.delta_attempts},
          {"n", sol.cert.dim()}};
}

nlohmann::json to_json(const SqueezingReport& rep) {
  return {{"pairs_checked", rep.pairs_checked}, {"worst_violation", rep.worst_violation},
          {"worst_l", rep.worst_l},             {"worst_r", rep.worst_r},
          {"tolerance", rep.tolerance},         {"nu", rep.nu},
          {"delta", rep.delta},                 {"passed", rep.passed}};
}

nlohmann::json to_json(const PeriodicDetection& det) {
  return {{"t0", det.orbit.t0},
          {"period", det.orbit.period},
          {"pi_coordinate", det.orbit.pi_coordinate},
          {"closure", det.orbit.closure},
          {"stability", std::string(to_string(det.orbit.stability))},
          {"periods_used", det.periods_used},
          {"transient", det.transient},
          {"tolerance", det.tolerance},
          {"final_d", det.d_seq.empty() ? 0.0 : det.d_seq.back()},
          {"pi_monotone", det.pi_monotone}};
}

nlohmann::json to_json(const FibreReconstruction& rec) {
  double worst = 0.0;
  for (double r : rec.residuals) worst = std::max(worst, r);
  return {{"q", rec.q},
          {"back_horizon", rec.back_horizon},
          {"points", rec.points.size()},
          {"max_residual", worst},
          {"change_h", rec.change_h},
          {"change_2h", rec.change_2h},
          {"contraction_factor", rec.contraction_factor},
          {"not_contracting", rec.not_contracting},
          {"monotone", rec.monotone},
          {"passed", rec.passed}};
}

nlohmann::json to_json(const AmenableReport& rep) {
  return {{"max_v", rep.max_v}, {"argmax_time", rep.argmax_time}, {"threshold", rep.threshold}, {"passed", rep.passed}};
}

nlohmann::json to_json(const AttractionReport& rep) {
  return {{"samples", rep.distances.size()},
          {"first_distance", rep.distances.empty() ? 0.0 : rep.distances.front()},
          {"final_distance", rep.distances.empty() ? 0.0 : rep.distances.back()},
          {"decreasing", rep.decreasing},
          {"tolerance", rep.tolerance},
          {"passed", rep.passed}};
}

std::string frequency_table(const FrequencyReport& rep) {
  std::string out = "omega,margin\n";
  for (std::size_t i = 0; i < rep.omega_grid.size(); ++i)
    out += format_double(rep.omega_grid[i]) + "," + format_double(rep.margins[i]) + "\n";
  return out;
}

std::string poincare_table(const PeriodicDetection& det) {
  std::string out = "k,d,pi\n";
  for (std::size_t k = 0; k < det.pi_seq.size(); ++k) {
    const double d = k < det.d_seq.size() ? det.d_seq[k] : 0.0;
    out += std::to_string(k) + "," + format_double(d) + "," + format_double(det.pi_seq[k]) + "\n";
  }
  return out;
}

std::string fibre_table(const FibreReconstruction& rec, const Pipeline& pl) {
  std::string out = "zeta,pi,residual";
  const Eigen::Index n = rec.points.empty() ? 0 : rec.points.front().size();
  for (Eigen::Index i = 0; i < n; ++i) out += ",u" + std::to_string(i);
  out += "\n";
  for (std::size_t k = 0; k < rec.points.size(); ++k) {
    out += format_double(rec.zeta_grid[k]) + "," + format_double(pl.pi(rec.points[k])) + "," +
           format_double(rec.residuals[k]);
    for (Eigen::Index i = 0; i < n; ++i) out += "," + format_double(rec.points[k](i));
    out += "\n";
  }
  return out;
}

std::string attraction_table(const AttractionReport& rep) {
  std::string out = "t,distance\n";
  for (std::size_t k = 0; k < rep.distances.size(); ++k)
    out += format_double(rep.times[k]) + "," + format_double(rep.distances[k]) + "\n";
  return out;
}

}  // namespace rplab
