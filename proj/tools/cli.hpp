#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "quadm/serialize.hpp"

namespace quadm::cli {

/// One experiment. Unset numbers are NaN, unset sizes 0.
struct ExperimentConfig {
  std::string task;  // gen wce disc rule qnorm bound transfer perturb scale
  std::string manifold = "torus:1";
  std::string family;
  std::string method = "auto";  // spectral kernel heat all auto
  std::string in, out, csv;
  double alpha = NAN, beta = NAN, q = 2.0, r = NAN, r2 = NAN, tol = 1e-10, eps = 0.25;
  std::vector<std::size_t> n;  // sizes (gen uses the first)
  std::vector<double> rs;      // band list for scale over exact rules
  std::vector<double> radii, levels;
  std::size_t seeds = 1, centers = 64, grid = 4096, budget = 0;
  std::uint64_t seed = 0;
  int steps = 0;  // energy minimization steps after gen
};

const std::vector<std::string>& tasks();

/// Keys present in j overwrite the defaults; unknown keys are violations.
ExperimentConfig from_json(const Json& j, std::vector<std::string>* violations = nullptr);
/// Canonical form (fixed key order, resolved values) used for the config hash.
Json to_json(const ExperimentConfig& c);
std::string hash_of(const ExperimentConfig& c);

/// Empty iff run() would pass its precondition checks.
std::vector<std::string> validate(const ExperimentConfig& c);

struct RunResult {
  int status = 0;       // 0 ok, 1 numeric/resource failure, 2 invalid input
  std::string summary;  // one line
  Json report;
};

/// Dispatches to the library and writes the artifacts named in the config.
RunResult run(const ExperimentConfig& c);

/// Parses argv (subcommand first) and runs; returns the exit status.
int main_entry(int argc, char** argv);

}  // namespace quadm::cli
