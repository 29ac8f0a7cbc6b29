#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cdh/document.hpp"

namespace cdh {

/// One batch job. `space`, `D`, `E` and `params` stay as JSON because their
/// shape depends on the operation; from_json checks every key against the
/// operation and rejects unknown ones.
struct Scenario {
  std::string name;
  std::string operation;
  Json space;
  Json D;
  Json E;
  Json params = Json::object();
  std::size_t depth = 48;
  std::size_t budget = 150;
  std::uint64_t seed = 1;
  double tolerance = 1e-9;

  Json to_json() const;
  /// Throws ParseError.
  static Scenario from_json(const Json& j);
  friend bool operator==(const Scenario&, const Scenario&) = default;
};

const std::vector<std::string>& scenario_operations();

/// Throws ParseError.
Scenario load_scenario(const std::string& path);

struct ScenarioResult {
  Json document;
  /// Empty unless the operation has plot data.
  std::string csv;
  bool passed() const { return document.at("verdict") == "pass"; }
};

/// Relative certificate paths in a verify scenario resolve against base_dir.
/// Throws ParseError for malformed inputs; check failures end up in the
/// document instead.
ScenarioResult run_scenario(const Scenario& scenario, const std::string& base_dir = ".");

struct ReverifyEntry {
  std::string entry;
  /// False for sampled float quantities, which are re-read but not re-derived.
  bool certified = true;
  bool passed = true;
  std::string detail;
};

struct ReverifyReport {
  std::string operation;
  std::vector<ReverifyEntry> entries;
  std::vector<Failure> failures;
  bool passed() const { return failures.empty(); }
  Json to_json() const;
};

/// Re-checks every recorded bound and equality from the document alone,
/// without re-running the construction. Throws ParseError on malformed
/// documents.
ReverifyReport reverify_document(const Json& doc);

}  // namespace cdh
