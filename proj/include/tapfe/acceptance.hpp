#pragma once

// Acceptance suite shared by `tapfe verify` and the acceptance test binary.
// Each criterion writes its numbers to <out_dir>/criterion_NN.json (plus CSVs
// for per-seed data); wall-clock times are reported but never written, so a
// replay with the same seed reproduces every file byte for byte.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "json.hpp"

namespace tapfe {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
  double budget = 0.0;  // seconds, 0 for none
  nlohmann::ordered_json data = nlohmann::ordered_json::object();
};

struct AcceptanceOptions {
  std::uint64_t seed = 20190601;
  std::filesystem::path out_dir = "verify_out";
  int jobs = 1;
  /// Criteria to run; empty means all twelve.
  std::vector<int> only;
  /// Called as soon as a criterion finishes.
  std::function<void(const CriterionResult&)> on_result;
};

inline constexpr int kCriterionCount = 12;

std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& opt);

/// "criterion  3 [PASS] starred-point zero: ... (1.2 s of 30 s)"
std::string format_result(const CriterionResult& r);

/// Runs f(0), ..., f(count - 1) on up to `jobs` threads. Rethrows the first
/// exception after all workers stop.
void parallel_for(std::size_t count, int jobs, const std::function<void(std::size_t)>& f);

}  // namespace tapfe
