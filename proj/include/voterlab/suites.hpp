#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace voterlab {

struct SuiteOptions {
  std::uint64_t seed = 20240611;
  std::size_t threads = 0;  // 0 = hardware concurrency
  double scale = 1.0;       // multiplies every trial/sample count (floors apply)
};

struct Verdict {
  std::string claim;
  bool pass = false;
  nlohmann::json numbers;
};

struct SuiteResult {
  std::string suite;
  std::vector<Verdict> verdicts;
  bool pass() const;
  nlohmann::json to_json() const;
};

// Verification suites: drift-upper, drift-lower, duality, fixation, chernoff,
// submartingale, balance, moments, dominance.
const std::vector<std::string>& suite_ids();
// Throws UnknownSuite.
SuiteResult run_suite(std::string_view id, const SuiteOptions& options);

struct Criterion {
  int id = 0;
  std::string title;
  std::function<SuiteResult(const SuiteOptions&)> run;
};

// Acceptance criteria 1..11.
const std::vector<Criterion>& acceptance_criteria();

// Building blocks shared by the criteria and the CLI.
SuiteResult suite_cycle_scaling(const SuiteOptions& options, const std::vector<std::size_t>& sizes = {32, 64, 128, 256},
                                std::size_t trials = 2000);
SuiteResult suite_static_bound(const SuiteOptions& options);
SuiteResult suite_biased_consensus(const SuiteOptions& options);
SuiteResult suite_good_sequence(const SuiteOptions& options);
SuiteResult suite_adversary_lower_bound(const SuiteOptions& options);

}  // namespace voterlab
