#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <vector>

#include "adjwalk/distributions.hpp"
#include "adjwalk/model.hpp"
#include "adjwalk/rng.hpp"

namespace adjwalk {

// The resampling laws U_k ~ Beta(alpha_k, alpha_{k+1}) for k = 1..N-1, prebuilt once per run.
class SiteKernel {
 public:
  explicit SiteKernel(const ModelParams& p);

  double draw(int k, Rng& rng) const { return samplers_[static_cast<std::size_t>(k - 1)](rng); }
  // Raw shapes (alpha_k, alpha_{k+1}); infinite once alpha overflows a double.
  const BetaParams& shapes(int k) const { return shapes_[static_cast<std::size_t>(k - 1)]; }
  const ModelParams& params() const { return p_; }

 private:
  ModelParams p_;
  std::vector<BetaSampler> samplers_;
  std::vector<BetaParams> shapes_;
};

// One rate-(N-1) exponential clock with a uniform site: equal in law to N-1 rate-1 clocks.
class EventSchedule {
 public:
  explicit EventSchedule(int N) : sites_(static_cast<std::uint64_t>(N - 1)), inv_rate_(1.0 / (N - 1)) {}

  double next_gap(Rng& rng) const { return rng.exponential() * inv_rate_; }
  int next_site(Rng& rng) const { return 1 + static_cast<int>(rng.below(sites_)); }

 private:
  std::uint64_t sites_;
  double inv_rate_;
};

// Snapshot observer: callback(i, state) fires once for each times[i] <= t_end, with the
// state in force at that time (i.e. before any event occurring later).
struct Snapshots {
  std::vector<double> times;
  std::function<void(std::size_t, const Configuration&)> callback;
};

// x_k <- x_{k-1} + u (x_{k+1} - x_{k-1}).
void resample_site(Configuration& c, int k, double u);

// Unchecked in-place update used by the simulation loops.
inline void apply_resample(double* x, int k, double u) {
  const double left = x[k - 1];
  const double right = x[k + 1];
  const double v = left + u * (right - left);
  x[k] = v < right ? v : right;
}

Configuration simulate_X(const SiteKernel& kernel, Configuration c0, double t_end, Rng& rng,
                         const Snapshots* observer = nullptr);
Configuration simulate_X(Configuration c0, const ModelParams& p, double t_end, Rng& rng,
                         const Snapshots* observer = nullptr);

struct MuSchedule {
  double C_cal = 0.0;
  int k0 = 0;
  std::vector<double> mu;  // mu[k] for k = 1..N-1; mu[0] unused
  double mu_k0 = 0.0;
  bool regime_violation = false;
};

// Smallest C (resolution 1e-3) with P(U_k <= (1-lambda)/2 - C log N r^(-k/2)) <= N^-5 for all k.
MuSchedule mu_k_calibrate(const ModelParams& p);

// M_k(0) = 0 for 1 <= k < k0, 1 for k0 <= k < N, M_N = N.
Configuration initial_M(const ModelParams& p);

inline void apply_resample_M(double* m, int k, const ModelParams& p, const MuSchedule& mu) {
  const double w = (1.0 - p.lambda() - mu.mu[static_cast<std::size_t>(k)]) / 2.0;
  m[k] = (1.0 - w) * m[k - 1] + w * m[k + 1];
}

Configuration simulate_M(const ModelParams& p, const MuSchedule& mu, double t_end, Rng& rng,
                         const Snapshots* observer = nullptr);

struct DominationRun {
  Configuration X;
  Configuration M;
  bool dominated = true;  // M_k <= X_k at every event up to t_end
  double first_violation = std::numeric_limits<double>::infinity();
};

// X from max and M driven by one event stream.
DominationRun simulate_X_and_M(const SiteKernel& kernel, const MuSchedule& mu, double t_end, Rng& rng,
                               const Snapshots* x_observer = nullptr,
                               const Snapshots* m_observer = nullptr);

// Exact draw from the invariant law: gaps are N times a Dirichlet(alpha_1..alpha_N) vector.
class StationarySampler {
 public:
  explicit StationarySampler(const ModelParams& p);
  Configuration operator()(Rng& rng) const;

 private:
  int N_;
  std::vector<double> log_alpha_;
  std::vector<GammaSampler> gammas_;
};

Configuration sample_stationary(const ModelParams& p, Rng& rng);

// Laws of x_k / N and of (x_{k+1} - x_{k-1}) / N under the invariant measure.
BetaParams stationary_marginal(const ModelParams& p, int k);
BetaParams stationary_gradient(const ModelParams& p, int k);

struct GradientTailReport {
  double threshold = 0.0;    // in height units
  double probability = 0.0;  // pi(x_{k+1} - x_{k-1} <= threshold)
  double bound = 0.0;        // C'' N^-5
  bool within_bound = false;
};

// Exact pi(grad x_k <= C' N^-4 lambda r^(k-N)) against C'' N^-5.
GradientTailReport gradient_tail_check(const ModelParams& p, int k, double c_prime, double c_second);

// Exact pi(grad x_k <= threshold) for a threshold in height units.
double gradient_tail_probability(const ModelParams& p, int k, double threshold);

}  // namespace adjwalk
