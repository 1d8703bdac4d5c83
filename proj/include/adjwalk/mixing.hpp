#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "adjwalk/model.hpp"

namespace adjwalk {

// t_delta = (1 + delta) N log r / (1 - sqrt(1 - lambda^2)), in real time.
double t_delta(const ModelParams& p, double delta);

struct TvEstimate {
  double t = 0.0;
  double estimate = 0.0;
  double low = 0.0;
  double high = 1.0;
};

// Pair: P(X^max != X^pi at t) under the pair coupling. WorstStart: triple run from (max, min, pi),
// bound P(top != ref) + P(top != mid) with the Wilson upper limits added.
enum class UpperMode { Pair, WorstStart };

// SProfile: site and threshold read off the limiting profile S. Pilot: an independent pilot sample
// picks, per time, the site and pi-quantile threshold with the largest separation.
enum class LowerChooser { SProfile, Pilot };

struct LowerEstimate {
  double t = 0.0;
  double estimate = 0.0;  // P-hat(x_k >= h) - pi(x_k >= h)
  double low = 0.0;
  double high = 0.0;
  int site = 0;
  double threshold = 0.0;
  double pi_probability = 0.0;
  bool evaluated = false;  // false: no usable statistic at this time (bound 0)
};

struct MixingConfig {
  std::size_t trajectories = 1000;
  std::size_t pilot_trajectories = 0;  // 0: max(200, trajectories / 4)
  std::uint64_t seed = 1;
  int threads = 0;
  LowerChooser chooser = LowerChooser::Pilot;
  bool auto_upper = true;              // Pair for N = 2, WorstStart otherwise
  UpperMode upper_mode = UpperMode::WorstStart;
};

std::vector<TvEstimate> tv_upper(const ModelParams& p, std::span<const double> times, std::size_t trajectories,
                                 std::uint64_t seed, UpperMode mode, int threads = 0);

std::vector<LowerEstimate> tv_lower(const ModelParams& p, std::span<const double> times, const MixingConfig& cfg);

struct MixingWindow {
  double epsilon = 0.25;
  double t_lower = 0.0;
  double t_upper = 0.0;          // +inf when the upper bound never drops below epsilon
  bool upper_reached = false;
  bool consistent = true;        // false: t_lower > t_upper (InconsistentWindow)
  std::string upper_method;
  std::string lower_method;
  std::size_t trajectories = 0;
  std::size_t pilot_trajectories = 0;
  std::vector<TvEstimate> upper;
  std::vector<LowerEstimate> lower;
  std::uint64_t order_violations = 0;
};

// t_upper: first grid time whose (running-min) upper CI limit is <= epsilon; t_lower: last grid time
// whose (running-max from the right) lower CI limit is >= epsilon.
MixingWindow mixing_window(const ModelParams& p, double epsilon, std::span<const double> times,
                           const MixingConfig& cfg);

// Same endpoint rules applied to given bound sequences.
void finalize_window(MixingWindow& w);

enum class Regime { Fixed, Vanishing };
const char* to_string(Regime r);

struct SweepEntry {
  int N = 0;
  double lambda = 0.0;
  Regime regime = Regime::Vanishing;

  bool operator==(const SweepEntry&) const = default;
};

struct SweepRow {
  SweepEntry entry;
  double epsilon = 0.0;
  double t_lower = 0.0;
  double t_upper = 0.0;
  double normalizer = 0.0;  // 4N/lambda (vanishing) or N/lambda (fixed)
  double ratio_low = 0.0;
  double ratio_high = 0.0;
  double bracket_low = 0.0;   // fixed regime: N / lambda
  double bracket_high = 0.0;  // fixed regime: t_0
  bool consistent = true;
  bool upper_reached = false;
};

// Default time grid for a sweep entry.
std::vector<double> sweep_grid(const SweepEntry& e);

std::vector<SweepRow> cutoff_sweep(std::span<const SweepEntry> schedule, double epsilon, const MixingConfig& cfg);

}  // namespace adjwalk
