#include "adjwalk/model.hpp"

#include <cmath>
#include <limits>

#include "adjwalk/error.hpp"

namespace adjwalk {

ModelParams::ModelParams(int N, double lambda, double alpha1)
    : N_(N), lambda_(lambda), alpha1_(alpha1) {
  require(N >= 2, "N must be at least 2");
  require(lambda >= 0.0 && lambda < 1.0, "lambda must lie in [0,1)");
  require(std::isfinite(alpha1) && alpha1 >= 1.0, "alpha1 must be a finite real >= 1");
  log_r_ = 2.0 * std::atanh(lambda);
  r_ = (1.0 + lambda) / (1.0 - lambda);
}

double ModelParams::log_alpha(int k) const {
  require(k >= 0 && k <= N_, "site index out of range");
  return std::log(alpha1_) + (k - 1) * log_r_;
}

double ModelParams::alpha(int k) const { return std::exp(log_alpha(k)); }

namespace {

// log((r^m - 1)/(r - 1)) for m >= 1, with log r = lr >= 0.
double log_geometric_sum(int m, double lr) {
  if (lr == 0.0) return std::log(static_cast<double>(m));
  const double ml = m * lr;
  const double num = ml + std::log(-std::expm1(-ml));
  return num - std::log(std::expm1(lr));
}

}  // namespace

double ModelParams::log_alpha_partial(int k) const {
  require(k >= 0 && k <= N_, "site index out of range");
  if (k == 0) return -std::numeric_limits<double>::infinity();
  return std::log(alpha1_) + log_geometric_sum(k, log_r_);
}

double ModelParams::log_alpha_tail(int k) const {
  require(k >= 0 && k <= N_, "site index out of range");
  if (k == N_) return -std::numeric_limits<double>::infinity();
  return std::log(alpha1_) + k * log_r_ + log_geometric_sum(N_ - k, log_r_);
}

double ModelParams::log_a_N() const {
  require(lambda_ > 0.0, "a_N requires lambda > 0");
  return std::log(static_cast<double>(N_)) - std::log(-std::expm1(-N_ * log_r_));
}

double ModelParams::a_N() const { return std::exp(log_a_N()); }

double ModelParams::k0_fraction() const {
  require(lambda_ > 0.0, "k0 requires lambda > 0");
  return std::sqrt(std::log(static_cast<double>(N_)) / (lambda_ * N_));
}

int ModelParams::k0() const { return static_cast<int>(std::floor(N_ * k0_fraction())); }

Configuration max_configuration(int N) {
  require(N >= 2, "N must be at least 2");
  Configuration c{std::vector<double>(N + 1, static_cast<double>(N))};
  c.x[0] = 0.0;
  return c;
}

Configuration min_configuration(int N) {
  require(N >= 2, "N must be at least 2");
  Configuration c{std::vector<double>(N + 1, 0.0)};
  c.x[N] = static_cast<double>(N);
  return c;
}

bool is_valid(const Configuration& c) {
  const int N = c.N();
  if (N < 1 || c.x[0] != 0.0 || c.x[N] != static_cast<double>(N)) return false;
  for (int k = 1; k <= N; ++k) {
    if (!std::isfinite(c.x[k]) || c.x[k] < c.x[k - 1]) return false;
  }
  return true;
}

void validate(const Configuration& c) {
  require(is_valid(c), "configuration must satisfy 0 = x_0 <= ... <= x_N = N");
}

Configuration from_heights(std::vector<double> heights) {
  Configuration c{std::move(heights)};
  validate(c);
  return c;
}

std::vector<double> gaps(const Configuration& c) {
  std::vector<double> eta(c.x.size(), 0.0);
  for (std::size_t k = 1; k < c.x.size(); ++k) eta[k] = c.x[k] - c.x[k - 1];
  return eta;
}

}  // namespace adjwalk
