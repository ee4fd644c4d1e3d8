#pragma once

#include <functional>
#include <string>
#include <vector>

#include "crweyl/catalog.hpp"

namespace crweyl {

struct CheckOutcome {
  bool pass = false;
  std::string detail;
};

struct AcceptanceCheck {
  int id = 0;  // 1..15 for the acceptance criteria, 0 for catalog facts
  std::string name;
  std::vector<std::string> tags;
  std::function<CheckOutcome()> run;
};

struct CheckResult {
  int id = 0;
  std::string name;
  std::vector<std::string> tags;
  bool pass = false;
  std::string detail;
  double seconds = 0;
};

// The fifteen acceptance criteria, in order.
std::vector<AcceptanceCheck> acceptance_checks();

// One check per catalog entry variant: every known fact at the sample point.
std::vector<AcceptanceCheck> catalog_fact_checks(Backend backend);

// Keeps checks whose name, id or any tag equals one of the filters (all when empty).
std::vector<AcceptanceCheck> filter_checks(std::vector<AcceptanceCheck> checks, const std::vector<std::string>& only);

CheckResult run_check(const AcceptanceCheck& c);

// Resolve a catalog entry's sample point (Newton placement when it has no exact point).
std::vector<CComplex<Real>> sample_point(const CatalogEntry& e);

}  // namespace crweyl
