#pragma once

#include <cstddef>
#include <vector>

namespace adjwalk {

// System size N, asymmetry lambda and base shape alpha_1, with the derived quantities
// r = (1+lambda)/(1-lambda), alpha_k = alpha_1 r^(k-1), a_N and k0. Shapes are kept in log
// form because alpha_N = alpha_1 r^(N-1) overflows a double once N log r exceeds ~709.
class ModelParams {
 public:
  ModelParams(int N, double lambda, double alpha1 = 1.0);

  int N() const { return N_; }
  double lambda() const { return lambda_; }
  double alpha1() const { return alpha1_; }
  double r() const { return r_; }
  double log_r() const { return log_r_; }

  // k in [0, N]; k = 0 extends the geometric progression (alpha_0 = alpha_1 / r).
  double log_alpha(int k) const;
  double alpha(int k) const;
  // log of sum_{i<=k} alpha_i (k = 0 gives -inf) and of sum_{i>k} alpha_i.
  double log_alpha_partial(int k) const;
  double log_alpha_tail(int k) const;
  double log_alpha_total() const { return log_alpha_partial(N_); }

  // Transform-related quantities; they need lambda > 0.
  double a_N() const;
  double log_a_N() const;
  int k0() const;
  // sqrt(log N / (lambda N)), the macroscopic position of k0.
  double k0_fraction() const;

  bool symmetric() const { return lambda_ == 0.0; }

 private:
  int N_;
  double lambda_;
  double alpha1_;
  double r_;
  double log_r_;
};

// Heights x_0 = 0 <= x_1 <= ... <= x_N = N.
struct Configuration {
  std::vector<double> x;

  int N() const { return static_cast<int>(x.size()) - 1; }
  double operator[](std::size_t k) const { return x[k]; }
  double& operator[](std::size_t k) { return x[k]; }
  bool operator==(const Configuration&) const = default;
};

Configuration max_configuration(int N);
Configuration min_configuration(int N);
Configuration from_heights(std::vector<double> heights);
bool is_valid(const Configuration& c);
void validate(const Configuration& c);

// Gap view eta_k = x_k - x_{k-1}, k = 1..N (index 0 unused and zero).
std::vector<double> gaps(const Configuration& c);

}  // namespace adjwalk
