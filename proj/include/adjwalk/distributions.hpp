#pragma once

#include <span>
#include <vector>

#include "adjwalk/model.hpp"
#include "adjwalk/rng.hpp"

namespace adjwalk {

struct BetaParams {
  double a = 1.0;
  double b = 1.0;
};

// Validates finite positive shapes.
BetaParams make_beta(double a, double b);

// Beta(a, b) law transported to [left, right].
struct IntervalBeta {
  BetaParams params;
  double left = 0.0;
  double right = 1.0;
};

IntervalBeta make_interval_beta(BetaParams params, double left, double right);

struct TailReport {
  std::vector<double> grid;
  std::vector<double> lhs;
  std::vector<double> rhs;
  double ratio_max = 0.0;
};

double beta_log_pdf(const IntervalBeta& d, double u);
double beta_pdf(const IntervalBeta& d, double u);
double beta_cdf(const IntervalBeta& d, double u);
double beta_sf(const IntervalBeta& d, double u);

// Largest value of the Beta(a,b) density on [0,1] (a, b >= 1, a + b > 2).
double beta_max_density(const BetaParams& p);

// Draws G/a for G ~ Gamma(a, 1) with a >= 1 given through log a (Marsaglia-Tsang).
// The acceptance test is written in terms of x = c z so that it stays exact when a is
// astronomically large; above a ~ e^690 the spread is far below double resolution and the
// sampler returns the mean 1.
class GammaSampler {
 public:
  explicit GammaSampler(double log_shape);
  double operator()(Rng& rng) const;

 private:
  double c_ = 0.0;
  double d_ = 0.0;
  double scale_ = 1.0;
  bool degenerate_ = false;
};

// Beta(a, b) via two normalized gamma draws: U = Va / (Va + (b/a) Vb).
class BetaSampler {
 public:
  BetaSampler(double log_a, double log_b);
  double operator()(Rng& rng) const {
    const double va = ga_(rng);
    const double vb = gb_(rng);
    return va / (va + ratio_ * vb);
  }

 private:
  GammaSampler ga_;
  GammaSampler gb_;
  double ratio_;
};

double sample_beta(const BetaParams& p, Rng& rng);

// Single crossing point of the two densities on their overlap.
double density_crossing(const IntervalBeta& lower, const IntervalBeta& upper);

// log pdf_upper(u) - log pdf_lower(u) for two ordered interval betas with equal shapes; +inf where
// the lower density vanishes, -inf where only the upper one does. Stable for huge shapes.
double log_density_ratio(const IntervalBeta& lower, const IntervalBeta& upper, double u);

// Total variation distance between two interval betas with the same shapes.
double tv_interval_betas(const IntervalBeta& lower, const IntervalBeta& upper);

// max over probes of P(U <= t) / P(Z <= t), U ~ Beta(u, v), Z ~ Gamma(u, rate u + v).
TailReport check_tail_domination(double u_shape, double v_shape, std::span<const double> probes);

// Exact P(U_k <= (1-lambda)/2 - C log N r^(-k/2)) with U_k ~ Beta(alpha_k, alpha_{k+1}).
double check_left_tail(int k, const ModelParams& p, double C);

}  // namespace adjwalk
