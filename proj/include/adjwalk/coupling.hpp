#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <vector>

#include "adjwalk/distributions.hpp"
#include "adjwalk/model.hpp"
#include "adjwalk/process.hpp"
#include "adjwalk/rng.hpp"

namespace adjwalk {

// Two ordered copies under the monotone maximal coupling.
struct CoupledState {
  Configuration upper;
  Configuration lower;
  std::vector<std::uint8_t> merged_sites;  // merged_sites[k] == (upper_k == lower_k)
  int unmerged = 0;                        // number of sites with upper_k != lower_k
  bool fully_merged = false;
};

// Validates lower <= upper and initialises the merge flags.
CoupledState make_coupled_state(Configuration upper, Configuration lower);

// How the merge decision is taken at a site whose two intervals differ.
//  ExactTv:        merge with probability p = 1 - TV computed from the crossing point, then draw
//                  from nu_2, or from nu_1 and nu_3 independently.
//  SharedProposal: draw W from the upper law and V uniform; merge at W when V rho_u(W) <= rho_l(W),
//                  otherwise keep W for the upper copy (it is then nu_3-distributed) and draw the
//                  lower copy from nu_1. Same joint law, no special functions on the hot path.
enum class MergeRule { ExactTv, SharedProposal };

// nu_1 = (rho_l - rho_u)_+ / q, nu_2 = min(rho_l, rho_u) / p, nu_3 = (rho_u - rho_l)_+ / q.
enum class Nu { Lower, Shared, Upper };

inline constexpr std::uint64_t kRejectionBudget = 1'000'000;

// Exact draw from one of the three parts by rejection from the matching marginal.
// Throws RejectionBudgetExceeded after kRejectionBudget proposals.
double sample_nu(Nu which, const IntervalBeta& lower, const IntervalBeta& upper, Rng& rng);

// Intervals whose endpoints agree to a few ulps are treated as identical: the total variation
// between them is below double resolution and the crossing point is not computable.
bool nearly_identical(double l1, double r1, double l2, double r2);

struct CouplingCounters {
  std::uint64_t events = 0;
  std::uint64_t retries = 0;           // events redrawn after RejectionBudgetExceeded
  std::uint64_t order_violations = 0;  // must stay zero
};

// One coupled event at site k. Returns true iff the two copies agree at k afterwards.
bool coupled_resample(CoupledState& s, int k, const SiteKernel& kernel, Rng& rng, MergeRule rule,
                      CouplingCounters* counters = nullptr);

struct CoupledObserver {
  std::vector<double> times;
  std::function<void(std::size_t, const CoupledState&)> callback;
};

struct CoalescenceRecord {
  double merge_time = std::numeric_limits<double>::infinity();
  bool merged = false;
  std::vector<double> site_first_merge;  // first time upper_k == lower_k (0 if equal at start)
  CouplingCounters counters;
};

// Runs the grand coupling until t_end or full merge (or the last observer time, if later than
// the merge and not after t_end).
CoalescenceRecord simulate_coupled(const SiteKernel& kernel, Configuration upper0, Configuration lower0,
                                   double t_end, Rng& rng, MergeRule rule = MergeRule::SharedProposal,
                                   const CoupledObserver* observer = nullptr);

struct QDiagnostic {
  double q = 0.0;        // TV between the two resampling laws at k
  double Q = 0.0;        // shift of the intervals over the larger interval length
  double ratio = 0.0;    // q / (r^{k/2} Q)
  bool anomaly = false;  // Q = 0 but q > 0
};

QDiagnostic q_diagnostic(const CoupledState& s, int k, const ModelParams& p);

// Top from max, mid from an arbitrary start, ref from a stationary draw. Each of (top, mid) and
// (top, ref) follows the shared-proposal coupling; mid and ref are conditionally independent
// given the top draw.
struct TripleState {
  Configuration top;
  Configuration mid;
  Configuration ref;
  int unmerged_mid = 0;
  int unmerged_ref = 0;
};

TripleState make_triple_state(Configuration top, Configuration mid, Configuration ref);

void triple_resample(TripleState& s, int k, const SiteKernel& kernel, Rng& rng,
                     CouplingCounters* counters = nullptr);

struct TripleObserver {
  std::vector<double> times;
  std::function<void(std::size_t, const TripleState&)> callback;
};

struct TripleRecord {
  double merge_time_mid = std::numeric_limits<double>::infinity();
  double merge_time_ref = std::numeric_limits<double>::infinity();
  CouplingCounters counters;

  bool both_merged() const { return merge_time_mid < std::numeric_limits<double>::infinity() &&
                                    merge_time_ref < std::numeric_limits<double>::infinity(); }
};

TripleRecord simulate_triple(const SiteKernel& kernel, Configuration mid0, Configuration ref0, double t_end,
                             Rng& rng, const TripleObserver* observer = nullptr);

// Process-wide tally of order violations seen by any coupled run.
std::uint64_t total_order_violations();

}  // namespace adjwalk
