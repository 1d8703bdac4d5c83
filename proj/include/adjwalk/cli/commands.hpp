#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "adjwalk/cli/manifest.hpp"

namespace adjwalk::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitAssertion = 1;
inline constexpr int kExitUsage = 2;

struct Assertion {
  std::string name;
  bool pass = true;
  std::string detail;
};

struct RunResult {
  int exit_code = kExitOk;
  std::filesystem::path output_dir;
  std::string hash;
  nlohmann::ordered_json summary;
  std::vector<Assertion> assertions;
};

inline const std::vector<std::string> kExperiments = {
    "simulate", "stationary-test", "decay",   "coupling",    "hydro-naive",
    "hydro-transformed", "schemes", "mixing", "cutoff-sweep"};

// Output directory: manifest value, else $ADJWALK_OUTPUT_DIR, else ./adjwalk-out.
std::filesystem::path resolve_output_dir(const Manifest& m);

// Executes the manifest's experiment and writes its artifacts plus summary.json.
// Invalid parameters throw Error; failed embedded assertions give exit code 1.
RunResult run(const Manifest& m, int threads = 0);

// Full command line entry point; returns the process exit code.
int main_entry(int argc, char** argv);

}  // namespace adjwalk::cli
