#include "adjwalk/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "adjwalk/error.hpp"
#include "adjwalk/special.hpp"

namespace adjwalk {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Shapes above e^27.6 ~ 1e12 use the Gaussian limit in check_left_tail.
constexpr double kGaussianLogShape = 27.6;

bool same_params(const BetaParams& x, const BetaParams& y) { return x.a == y.a && x.b == y.b; }

// log of the Beta(a,b) density on [0,1] at interior w.
double unit_log_pdf(double a, double b, double w) {
  const double r = a + b;
  if (r < 30.0) {
    return (a - 1.0) * std::log(w) + (b - 1.0) * std::log1p(-w) - special::log_beta(a, b);
  }
  const double lc = special::log_gamma_correction(a) + special::log_gamma_correction(b) -
                    special::log_gamma_correction(r);
  return special::beta_log_kernel(a, b, w) - std::log(w) - std::log1p(-w) +
         0.5 * std::log(a * b / (2.0 * std::numbers::pi * r)) - lc;
}

// h(x) = 3 (log(1+x) - x + x^2/2 - x^3/3) = sum_{n>=4} 3 (-1)^(n+1) x^n / n.
double mt_h(double x) {
  if (std::fabs(x) >= 0.1) return 3.0 * (special::log1pmx(x) + x * x / 2.0 - x * x * x / 3.0);
  double term = x * x * x * x;
  double sum = 0.0;
  for (int n = 4; n < 40; ++n) {
    const double add = 3.0 * term / n;
    sum += (n % 2 == 0) ? -add : add;
    if (std::fabs(add) < 1e-18 * std::fabs(sum)) break;
    term *= x;
  }
  return sum;
}

}  // namespace

BetaParams make_beta(double a, double b) {
  require(std::isfinite(a) && std::isfinite(b) && a > 0.0 && b > 0.0,
          "beta shapes must be finite and positive");
  return {a, b};
}

IntervalBeta make_interval_beta(BetaParams params, double left, double right) {
  make_beta(params.a, params.b);
  require(std::isfinite(left) && std::isfinite(right) && left < right,
          "interval must satisfy left < right");
  return {params, left, right};
}

double beta_log_pdf(const IntervalBeta& d, double u) {
  require(std::isfinite(u), "density argument must be finite");
  if (u < d.left || u > d.right) return kNegInf;
  const double len = d.right - d.left;
  const double w = (u - d.left) / len;
  const double a = d.params.a, b = d.params.b;
  if (w <= 0.0 || w >= 1.0) {
    // Endpoint: the density is finite and nonzero only when the matching exponent vanishes.
    const double expo = (w <= 0.0) ? a - 1.0 : b - 1.0;
    if (expo > 0.0) return kNegInf;
    if (expo < 0.0) return std::numeric_limits<double>::infinity();
    return -special::log_beta(a, b) - std::log(len);
  }
  return unit_log_pdf(a, b, w) - std::log(len);
}

double beta_pdf(const IntervalBeta& d, double u) { return std::exp(beta_log_pdf(d, u)); }

double beta_cdf(const IntervalBeta& d, double u) {
  require(!std::isnan(u), "CDF argument must be a number");
  if (u <= d.left) return 0.0;
  if (u >= d.right) return 1.0;
  return special::inc_beta(d.params.a, d.params.b, (u - d.left) / (d.right - d.left));
}

double beta_sf(const IntervalBeta& d, double u) {
  require(!std::isnan(u), "CDF argument must be a number");
  if (u <= d.left) return 1.0;
  if (u >= d.right) return 0.0;
  return special::inc_beta_complement(d.params.a, d.params.b, (u - d.left) / (d.right - d.left));
}

double beta_max_density(const BetaParams& p) {
  require(p.a >= 1.0 && p.b >= 1.0 && p.a + p.b > 2.0, "max density needs a, b >= 1, a + b > 2");
  const double mode = (p.a - 1.0) / (p.a + p.b - 2.0);
  return beta_pdf({p, 0.0, 1.0}, mode);
}

GammaSampler::GammaSampler(double log_shape) {
  require(log_shape >= 0.0, "gamma sampler needs shape >= 1");
  if (log_shape > 690.0) {
    degenerate_ = true;
    return;
  }
  const double a = std::exp(log_shape);
  d_ = a - 1.0 / 3.0;
  c_ = 1.0 / std::sqrt(9.0 * d_);
  scale_ = d_ / a;
}

double GammaSampler::operator()(Rng& rng) const {
  if (degenerate_) return 1.0;
  for (;;) {
    const double z = rng.normal();
    const double x = c_ * z;
    if (x <= -1.0) continue;
    const double v = (1.0 + x) * (1.0 + x) * (1.0 + x);
    const double u = rng.uniform();
    const double z2 = z * z;
    if (u < 1.0 - 0.0331 * z2 * z2) return scale_ * v;
    // log u < z^2/2 + d (1 - v + log v), rewritten as d * h(x) to avoid cancellation.
    if (std::log(u) < d_ * mt_h(x)) return scale_ * v;
  }
}

BetaSampler::BetaSampler(double log_a, double log_b)
    : ga_(log_a), gb_(log_b), ratio_(std::exp(log_b - log_a)) {}

double sample_beta(const BetaParams& p, Rng& rng) {
  require(p.a >= 1.0 && p.b >= 1.0, "beta sampling needs shapes >= 1");
  return BetaSampler(std::log(p.a), std::log(p.b))(rng);
}

namespace {

void check_pair(const IntervalBeta& lower, const IntervalBeta& upper) {
  require(same_params(lower.params, upper.params), "interval betas must share their shapes");
  require(lower.left <= upper.left && lower.right <= upper.right,
          "interval endpoints must be ordered lower <= upper");
}

bool identical(const IntervalBeta& lower, const IntervalBeta& upper) {
  return lower.left == upper.left && lower.right == upper.right;
}

// log pdf_upper(u) - log pdf_lower(u) for u strictly inside the overlap.
double log_ratio(const IntervalBeta& lower, const IntervalBeta& upper, double u) {
  const double a = lower.params.a, b = lower.params.b;
  const double ll = lower.left, lr = lower.right, ul = upper.left, ur = upper.right;
  // A shared endpoint contributes nothing, which also gives the limit at that endpoint.
  const double left_term = (a == 1.0 || ll == ul) ? 0.0 : (a - 1.0) * std::log1p((ll - ul) / (u - ll));
  const double right_term = (b == 1.0 || lr == ur) ? 0.0 : (b - 1.0) * std::log1p((ur - lr) / (lr - u));
  // Length change as (ur - lr) - (ul - ll): for nearby endpoints both differences are exact,
  // while (ur - ul) - (lr - ll) loses the digits that a + b then amplifies.
  const double len_term = (a + b - 1.0) * std::log1p(((ur - lr) - (ul - ll)) / (lr - ll));
  return left_term + right_term - len_term;
}

}  // namespace

double log_density_ratio(const IntervalBeta& lower, const IntervalBeta& upper, double u) {
  if (u > upper.left && u < lower.right && u > lower.left) return log_ratio(lower, upper, u);
  const double ll = beta_log_pdf(lower, u);
  if (ll == kNegInf) return std::numeric_limits<double>::infinity();
  const double lu = beta_log_pdf(upper, u);
  if (lu == kNegInf) return kNegInf;
  return lu - ll;
}

double density_crossing(const IntervalBeta& lower, const IntervalBeta& upper) {
  check_pair(lower, upper);
  if (identical(lower, upper)) throw Error(ErrorKind::DegenerateEqual, "identical intervals");
  const double lo_end = upper.left;
  const double hi_end = lower.right;
  if (!(lo_end < hi_end)) throw Error(ErrorKind::NoOverlap, "intervals do not overlap");

  auto phi = [&](double u) {
    const double lu = beta_log_pdf(upper, u);
    const double ll = beta_log_pdf(lower, u);
    if (lu == kNegInf && ll == kNegInf) {
      // Both vanish at a shared endpoint, where the ratio still has a finite limit.
      const bool shared = (u == upper.right && u == lower.right) || (u == upper.left && u == lower.left);
      return shared ? log_ratio(lower, upper, u) : 0.0;
    }
    if (lu == kNegInf) return kNegInf;
    if (ll == kNegInf) return std::numeric_limits<double>::infinity();
    return (u > lo_end && u < hi_end) ? log_ratio(lower, upper, u) : lu - ll;
  };
  const double f_lo = phi(lo_end);
  const double f_hi = phi(hi_end);
  if (f_lo == 0.0 && f_hi == 0.0) return 0.5 * (lo_end + hi_end);  // densities coincide
  if (f_lo >= 0.0) return lo_end;
  if (f_hi <= 0.0) return hi_end;
  double lo = lo_end, hi = hi_end;
  for (int i = 0; i < 2000; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (phi(mid) < 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

double tv_interval_betas(const IntervalBeta& lower, const IntervalBeta& upper) {
  check_pair(lower, upper);
  if (identical(lower, upper)) return 0.0;
  if (upper.left >= lower.right) return 1.0;
  const double s = density_crossing(lower, upper);
  // F_lower(s) - F_upper(s), written on whichever side keeps the terms small.
  const double tv = (beta_cdf(lower, s) < 0.5) ? beta_cdf(lower, s) - beta_cdf(upper, s)
                                                : beta_sf(upper, s) - beta_sf(lower, s);
  return std::clamp(tv, 0.0, 1.0);
}

TailReport check_tail_domination(double u_shape, double v_shape, std::span<const double> probes) {
  require(u_shape >= 1.0 && v_shape >= 1.0, "tail domination needs shapes >= 1");
  require(u_shape / (u_shape + v_shape) <= 0.5, "tail domination needs u/(u+v) <= 1/2");
  TailReport rep;
  const double rate = u_shape + v_shape;
  for (double t : probes) {
    const double lhs = special::inc_beta(u_shape, v_shape, std::clamp(t, 0.0, 1.0));
    const double rhs = special::inc_gamma_lower(u_shape, rate * std::max(t, 0.0));
    rep.grid.push_back(t);
    rep.lhs.push_back(lhs);
    rep.rhs.push_back(rhs);
    const double ratio = (lhs == 0.0) ? 0.0 : lhs / rhs;
    rep.ratio_max = std::max(rep.ratio_max, ratio);
  }
  return rep;
}

double check_left_tail(int k, const ModelParams& p, double C) {
  require(k >= 0 && k <= p.N() - 1, "site index must lie in [0, N-1]");
  const double delta = C * std::log(static_cast<double>(p.N())) * std::exp(-0.5 * k * p.log_r());
  const double threshold = (1.0 - p.lambda()) / 2.0 - delta;
  if (threshold <= 0.0) return 0.0;
  const double la = p.log_alpha(k);
  const double lb = p.log_alpha(k + 1);
  if (la > kGaussianLogShape) {
    // The spread is below the resolution of `threshold` itself, so standardize the offset delta
    // from the mean 1/(1+r) = (1-lambda)/2 directly. Skewness is O(a^-1/2) here.
    const double r = p.r();
    const double log_var = p.log_r() - 3.0 * std::log1p(r) - la;
    return special::normal_cdf(-delta / std::exp(0.5 * log_var));
  }
  return special::inc_beta(std::exp(la), std::exp(lb), threshold);
}

}  // namespace adjwalk
