#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "adjwalk/model.hpp"
#include "adjwalk/process.hpp"

namespace adjwalk {

// T(u) = -(1/N) log_r(u / a_N + r^{-N}), a decreasing bijection [0, N] -> [0, 1].
class TransformT {
 public:
  explicit TransformT(const ModelParams& p);
  double operator()(double u) const;
  double inverse(double f) const;

 private:
  int N_;
  double log_r_;
  double log_a_N_;
};

// S(x, t) = min(1 - x, (t - x)_+^2 / (4 t)), with S(., 0) = 0.
double lax_solution(double x, double t);

// Values on k = 0..N at one rescaled time.
struct GridProfile {
  std::vector<double> values;
  double time = 0.0;
};

enum class SchemeVariant { X, M, Naive };

struct SchemeKind {
  SchemeVariant variant = SchemeVariant::X;
  std::optional<MuSchedule> mu;  // required for M
};

double H_X(double x, double y, double z, const ModelParams& p);
double H_M(double x, double y, double z, int k, const ModelParams& p, const MuSchedule& mu);
double H_naive(double x, double y, double z, const ModelParams& p);

// d/dt f_k = -H(f_{k-1}, f_k, f_{k+1}[, k]) on interior sites, zero at both ends.
std::vector<double> scheme_rhs(const SchemeKind& kind, const GridProfile& profile, const ModelParams& p);

// Allocation-free kernel behind scheme_rhs; `parallel` splits the sites over OpenMP threads.
void scheme_rhs_into(const SchemeKind& kind, std::span<const double> f, const ModelParams& p,
                     std::span<double> out, std::span<double> scratch, bool parallel);

// Boundary and initial data: X: 1 at x = 0, else 0. M: 1 for k < k0, else 0. Naive: 0 at x = 0, else 1.
GridProfile scheme_initial(const SchemeKind& kind, const ModelParams& p);

struct SchemeRun {
  std::vector<GridProfile> frames;  // initial profile, then every store_every, then t_end
  double dt = 0.0;
  std::size_t steps = 0;
};

// Classical RK4 in rescaled time. Requires dt <= 0.1 lambda / N; throws StepTooLarge when a value
// leaves [-0.1, 1.1]. The step is shrunk so frames fall exactly on multiples of store_every, and
// the final frame is at t_end.
SchemeRun integrate_scheme(const SchemeKind& kind, const GridProfile& initial, const ModelParams& p,
                           double t_end, double dt, double store_every, bool parallel = false);

// T applied to the exact mean of X^max at real time t N / lambda. When the spectral sum is too
// ill-conditioned (large N lambda), integrates the X scheme instead.
GridProfile exact_fX(const ModelParams& p, double t);

struct ComparisonResult {
  bool pass = true;
  double time = 0.0;    // first violating frame time
  int site = -1;        // first violating site
  double excess = 0.0;  // sub - super there
};

// sub <= super + tol at every site of every frame; frames must share their times.
ComparisonResult comparison_check(std::span<const GridProfile> sub, std::span<const GridProfile> super,
                                  double tol = 1e-12);

// Naive-scheme barriers at rescaled time t (height units divided by N).
std::pair<GridProfile, GridProfile> barrier_profiles_naive(const ModelParams& p, double t);

// v_X = 1 - x and v_M = 1 for x < k0/N, c_N (1 - x) after, with c_N = 1 / (1 - k0/N).
GridProfile super_solution_X(const ModelParams& p, double t);
GridProfile super_solution_M(const ModelParams& p, double t);

// u(x, t) = -x^2 / (16 - 4t) - x/2 + t/4 - C max(lambda, 1/(N lambda)) t for t < 4.
GridProfile sub_solution_barrier(const ModelParams& p, double t, double C);

// Smallest C making the barrier a sub-solution of the given scheme on the (k, t) grid
// t = 0, dt_probe, ..., t_max.
double calibrate_barrier_constant(const SchemeKind& kind, const ModelParams& p, double t_max, double dt_probe);

// E[x_k(t N / lambda)] / N from max by RK4 on the naive (linear) scheme.
GridProfile naive_mean_profile(const ModelParams& p, double t);

struct FrontReport {
  std::vector<double> x_grid;
  std::vector<std::vector<double>> g;  // g[trajectory][i] = X_{floor(x_i N)} / N
  std::vector<double> mean_g;
  std::vector<double> mean_profile;    // E-hat[x_k] / N on k = 0..N
  double step_location = 0.0;          // first x with mean g >= 1/2
  double sharpness = 0.0;              // distance between the 0.05 and 0.95 crossings of mean g
  bool regime_ok = false;              // lambda N >= 20
};

FrontReport naive_front(const ModelParams& p, double t, std::span<const double> x_grid, std::size_t trajectories,
                        std::uint64_t seed, int threads = 0);

// Central-difference residual of dS/dt + dS/dx + (dS/dx)^2 at (x, t); max over the points.
double pde_residual_S(std::span<const std::pair<double, double>> points, double h);

// Interior points at least `margin` away from x = 0, 1, t = 0 (below t_min), the line x = t and
// the curve 1 - x = (t - x)^2 / (4t).
std::vector<std::pair<double, double>> smooth_points(std::size_t count, double margin, double t_min,
                                                     double t_max, std::uint64_t seed);

struct TransformedProfile {
  double time = 0.0;
  std::vector<double> mean_TX;   // E-hat[T(X_k)]
  std::vector<double> se_TX;
  std::vector<double> T_meanX;   // T(E-hat[X_k])
  std::vector<double> mean_TM;   // E-hat[T(M_k)]
  std::vector<double> se_TM;
  double sup_distance = 0.0;     // sup over x >= eps of |mean_TX - S|
  bool regime_ok = false;        // lambda >= 4 log N / N
  std::size_t dominated = 0;     // trajectories with M <= X^max throughout
};

TransformedProfile empirical_transformed_profile(const ModelParams& p, double t, std::size_t trajectories,
                                                 std::uint64_t seed, double eps = 0.1, int threads = 0);

// sup over k/N >= eps of |values_k - S(k/N, t)|.
double sup_distance(const GridProfile& profile, double eps);

}  // namespace adjwalk
