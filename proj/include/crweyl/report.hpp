#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "crweyl/catalog.hpp"

namespace crweyl {

// Decimal strings at full backend precision (rationals as p/q under the exact backend).
struct ReportValue {
  std::string re = "0", im = "0";
  bool operator==(const ReportValue&) const = default;
};

struct InvariantReport {
  std::string surface;
  std::vector<ReportValue> point;
  std::string backend;
  unsigned precision = 0;
  std::string scale;
  std::vector<std::pair<std::string, double>> tolerances;
  std::vector<std::pair<std::string, ReportValue>> quantities;

  const ReportValue* find(const std::string& key) const;
  bool operator==(const InvariantReport&) const = default;
};

// Quantity groups accepted by --show.
const std::vector<std::string>& report_groups();

struct ReportOptions {
  Backend backend = Backend::Float;
  // empty: every group that applies
  std::vector<std::string> show;
  InvariantScale scale = InvariantScale::PseudoEinstein;
  FrameConfig cfg;
  double routeTol = 1e-6;
};

InvariantReport compute_report(const Hypersurface& s, const std::string& descriptor,
                               const std::vector<CComplex<Real>>& point, const ReportOptions& opt);
InvariantReport compute_report(const Hypersurface& s, const std::string& descriptor,
                               const std::vector<GaussRational>& point, const ReportOptions& opt);

nlohmann::ordered_json report_to_json(const InvariantReport& r);
InvariantReport report_from_json(const nlohmann::ordered_json& j);
// key,re,im rows
std::string report_to_csv(const InvariantReport& r);

CComplex<Real> report_value(const ReportValue& v);

}  // namespace crweyl
