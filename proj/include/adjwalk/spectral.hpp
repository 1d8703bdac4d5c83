#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "adjwalk/model.hpp"

namespace adjwalk {

// gamma_N = -(1 - sqrt(1 - lambda^2) cos(pi / N)).
double gamma_N(const ModelParams& p);

// Spectrum of the mean dynamics d/dt m_k = r/(1+r) m_{k-1} - m_k + 1/(1+r) m_{k+1}.
// In y_k = r^{-k/2}(m_k - xbar_k) the generator is symmetric with modes sin(k j pi / N).
struct EigenSystem {
  int N = 0;
  double lambda = 0.0;
  std::vector<double> gamma;  // gamma[j-1] for j = 1..N-1
  std::vector<double> xbar;   // equilibrium mean, k = 0..N
};

EigenSystem eigen_system(const ModelParams& p);

// xbar_k = N (r^k - 1) / (r^N - 1), computed without overflow (k for lambda = 0).
std::vector<double> equilibrium_mean(const ModelParams& p);

// Mode j on sites 0..N: w_k = r^{-k/2} sin(k j pi / N).
std::vector<double> mode_weights(const ModelParams& p, int j);

// f_N(x) = sum_k r^{-k/2} sin(k pi / N) (x_k - xbar_k).
double f_N(const Configuration& c, const ModelParams& p);

// sum_k r^{-k/2} sin(k pi / N) (upper_k - lower_k).
double twisted_area(const Configuration& upper, const Configuration& lower, const ModelParams& p);

// One application of the mean generator (the three-term recursion) to a site vector on 0..N
// with the boundary entries treated as zero.
std::vector<double> apply_mean_generator(std::span<const double> g, const ModelParams& p);

// E[x_k(t)] from c0, exact in the sine basis. Throws IllConditioned when undoing the r^{-k/2}
// scaling would lose more than ~1e-7 in transformed units.
std::vector<double> mean_profile_exact(const Configuration& c0, const ModelParams& p, double t);

// Same expectation by classical RK4 on the tridiagonal ODE (independent oracle).
std::vector<double> mean_profile_rk4(const Configuration& c0, const ModelParams& p, double t, double dt);

struct DecayReport {
  double slope = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  double gamma_N = 0.0;
  std::vector<double> times;       // grid points used in the fit
  std::vector<double> mean_f;      // Monte Carlo mean of f_N(X^max(t)) at every grid point
  std::vector<double> se_f;
  std::size_t excluded = 0;        // grid points with a nonpositive mean
};

// Regresses log E[f_N(X^max(t))] on t; percentile bootstrap CI over trajectories.
DecayReport decay_check(const ModelParams& p, std::span<const double> t_grid, std::size_t trajectories,
                        std::uint64_t seed, std::size_t bootstrap = 1000, int threads = 0);

}  // namespace adjwalk
