#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "adjwalk/mixing.hpp"

namespace adjwalk::cli {

inline constexpr const char* kToolVersion = "0.1.0";
inline constexpr const char* kModelVersion = "1";

// Full description of one experiment. Only the fields an experiment reads matter to it; all of
// them take part in the hash except output_dir, so relocating a run keeps its identity.
struct Manifest {
  std::string experiment = "simulate";
  int n = 16;
  double lambda = 0.5;
  double alpha1 = 1.0;
  std::vector<double> times;       // explicit grid; empty selects the experiment default
  double t = 1.0;                  // single rescaled time (hydro, schemes)
  double t_max = 8.0;              // horizon in real time (simulate, coupling)
  double burn_in = 0.0;            // stationary-test: evolve stationary samples this long
  std::size_t trajectories = 1000;
  std::size_t pilot_trajectories = 0;
  std::uint64_t seed = 42;
  double epsilon = 0.25;           // TV level for mixing windows
  double eps_x = 0.1;              // spatial cutoff for sup-distances to S
  std::vector<int> sites;          // stationary-test sites; empty selects N/4, N/2, 3N/4
  std::string start = "max";       // simulate: initial configuration
  std::string lower_start = "min"; // coupling: initial lower copy
  std::string chooser = "pilot";   // mixing: lower-bound statistic chooser
  std::vector<SweepEntry> schedule;
  std::optional<double> tolerance; // optional sup-distance assertion
  std::string output_dir;
  std::string tool_version = kToolVersion;

  bool operator==(const Manifest&) const = default;
};

nlohmann::ordered_json to_json(const Manifest& m);
// Unknown keys are rejected; missing keys keep their defaults. Throws Error(Usage).
Manifest manifest_from_json(const nlohmann::json& j);
Manifest load_manifest(const std::string& path);

// FNV-1a 64 of the canonical JSON without output_dir, as 16 hex digits.
std::string manifest_hash(const Manifest& m);

// Suite conventions for the hydrodynamic regimes.
bool naive_regime(int N, double lambda);        // lambda N >= 20
bool transformed_regime(int N, double lambda);  // lambda >= 4 log N / N

// Parses "64:0.125:vanishing,32:0.6:fixed".
std::vector<SweepEntry> parse_schedule(const std::string& text);
Regime parse_regime(const std::string& text);

}  // namespace adjwalk::cli
