#pragma once

// Serialization of reports: summary records as JSON objects (keys sorted, so
// output is byte-stable), detail tables as comma-separated text with a header
// row, and the certificate P as dense row-major text.

#include <string>

#include "json.hpp"
#include "rplab/frequency.hpp"
#include "rplab/kyp.hpp"
#include "rplab/reduction.hpp"

namespace rplab {

/// Header lines starting with '#': n, nu, delta, mu0, inertia. Then n rows of
/// n entries of P (the M-self-adjoint operator), "%.17g", space separated.
std::string certificate_to_text(const QuadraticCertificate& cert);
/// Inverse of certificate_to_text; rebuilds inertia and basis from P and M.
QuadraticCertificate certificate_from_text(const std::string& text, const MassMatrix& M);

nlohmann::json to_json(const FrequencyReport& rep);
nlohmann::json to_json(const KypSolution& sol);
nlohmann::json to_json(const SqueezingReport& rep);
nlohmann::json to_json(const PeriodicDetection& det);
nlohmann::json to_json(const FibreReconstruction& rec);
nlohmann::json to_json(const AmenableReport& rep);
nlohmann::json to_json(const AttractionReport& rep);
nlohmann::json to_json(const Inertia& in);

/// Columns: omega,margin
std::string frequency_table(const FrequencyReport& rep);
/// Columns: k,d,pi
std::string poincare_table(const PeriodicDetection& det);
/// Columns: zeta,pi,residual,u0..u{n-1}
std::string fibre_table(const FibreReconstruction& rec, const Pipeline& pl);
/// Columns: t,distance
std::string attraction_table(const AttractionReport& rep);

std::string format_double(double v);

}  // namespace rplab
