#include "adjwalk/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "adjwalk/ensemble.hpp"
#include "adjwalk/error.hpp"
#include "adjwalk/process.hpp"
#include "adjwalk/rng.hpp"
#include "adjwalk/stats.hpp"

namespace adjwalk {

namespace {

double sqrt_one_minus_l2(double lambda) { return std::sqrt((1.0 - lambda) * (1.0 + lambda)); }

double site_sin(int k, int j, int N) {
  // sin(k j pi / N) with the argument reduced modulo 2N to keep it accurate.
  const long long m = (static_cast<long long>(k) * j) % (2LL * N);
  return std::sin(std::numbers::pi * static_cast<double>(m) / N);
}

}  // namespace

double gamma_N(const ModelParams& p) {
  return -(1.0 - sqrt_one_minus_l2(p.lambda()) * std::cos(std::numbers::pi / p.N()));
}

std::vector<double> equilibrium_mean(const ModelParams& p) {
  const int N = p.N();
  std::vector<double> xbar(static_cast<std::size_t>(N + 1));
  const double lr = p.log_r();
  for (int k = 0; k <= N; ++k) {
    double v;
    if (lr == 0.0) {
      v = k;
    } else {
      // N r^{k-N} (1 - r^{-k}) / (1 - r^{-N})
      v = N * std::exp((k - N) * lr) * std::expm1(-k * lr) / std::expm1(-N * lr);
    }
    xbar[static_cast<std::size_t>(k)] = v;
  }
  xbar[0] = 0.0;
  xbar[static_cast<std::size_t>(N)] = N;
  return xbar;
}

EigenSystem eigen_system(const ModelParams& p) {
  EigenSystem es;
  es.N = p.N();
  es.lambda = p.lambda();
  const double s = sqrt_one_minus_l2(p.lambda());
  for (int j = 1; j <= es.N - 1; ++j) es.gamma.push_back(-(1.0 - s * std::cos(std::numbers::pi * j / es.N)));
  es.xbar = equilibrium_mean(p);
  return es;
}

std::vector<double> mode_weights(const ModelParams& p, int j) {
  const int N = p.N();
  require(j >= 1 && j <= N - 1, "mode index must lie in [1, N-1]");
  std::vector<double> w(static_cast<std::size_t>(N + 1), 0.0);
  for (int k = 1; k <= N - 1; ++k) w[static_cast<std::size_t>(k)] = std::exp(-0.5 * k * p.log_r()) * site_sin(k, j, N);
  return w;
}

double twisted_area(const Configuration& upper, const Configuration& lower, const ModelParams& p) {
  const int N = p.N();
  require(upper.N() == N && lower.N() == N, "configuration size does not match N");
  double a = 0.0;
  for (int k = 1; k <= N - 1; ++k)
    a += std::exp(-0.5 * k * p.log_r()) * site_sin(k, 1, N) * (upper[k] - lower[k]);
  return a;
}

double f_N(const Configuration& c, const ModelParams& p) {
  const int N = p.N();
  require(c.N() == N, "configuration size does not match N");
  const std::vector<double> xbar = equilibrium_mean(p);
  double a = 0.0;
  for (int k = 1; k <= N - 1; ++k)
    a += std::exp(-0.5 * k * p.log_r()) * site_sin(k, 1, N) * (c[k] - xbar[static_cast<std::size_t>(k)]);
  return a;
}

std::vector<double> apply_mean_generator(std::span<const double> g, const ModelParams& p) {
  const int N = p.N();
  require(static_cast<int>(g.size()) == N + 1, "vector size must be N + 1");
  const double wl = p.r() / (1.0 + p.r()), wr = 1.0 / (1.0 + p.r());
  std::vector<double> out(g.size(), 0.0);
  for (int k = 1; k <= N - 1; ++k) {
    const auto i = static_cast<std::size_t>(k);
    const double left = k - 1 == 0 ? 0.0 : g[i - 1];
    const double right = k + 1 == N ? 0.0 : g[i + 1];
    out[i] = wl * left - g[i] + wr * right;
  }
  return out;
}

std::vector<double> mean_profile_exact(const Configuration& c0, const ModelParams& p, double t) {
  const int N = p.N();
  require(c0.N() == N, "configuration size does not match N");
  require(t >= 0.0, "time must be nonnegative");
  const EigenSystem es = eigen_system(p);
  const double lr = p.log_r();
  std::vector<double> y(static_cast<std::size_t>(N + 1), 0.0);
  for (int k = 1; k <= N - 1; ++k)
    y[static_cast<std::size_t>(k)] = std::exp(-0.5 * k * lr) * (c0[k] - es.xbar[static_cast<std::size_t>(k)]);

  // Sine transform, decay, inverse transform. O(N^2) is fine at the sizes used here.
  std::vector<double> amp(static_cast<std::size_t>(N), 0.0);
  double amp_abs = 0.0;
  for (int j = 1; j <= N - 1; ++j) {
    double c = 0.0;
    for (int k = 1; k <= N - 1; ++k) c += y[static_cast<std::size_t>(k)] * site_sin(k, j, N);
    c *= 2.0 / N * std::exp(es.gamma[static_cast<std::size_t>(j - 1)] * t);
    amp[static_cast<std::size_t>(j)] = c;
    amp_abs += std::fabs(c);
  }

  const double eps = std::numeric_limits<double>::epsilon();
  std::vector<double> m(static_cast<std::size_t>(N + 1), 0.0);
  double worst = 0.0;
  for (int k = 1; k <= N - 1; ++k) {
    double yk = 0.0;
    for (int j = 1; j <= N - 1; ++j) yk += amp[static_cast<std::size_t>(j)] * site_sin(k, j, N);
    const double scale = std::exp(0.5 * k * lr);
    const double v = es.xbar[static_cast<std::size_t>(k)] + scale * yk;
    m[static_cast<std::size_t>(k)] = std::clamp(v, 0.0, static_cast<double>(N));
    if (p.lambda() > 0.0) {
      // Rounding in yk is amplified by r^{k/2}; compare against the slope of the transform.
      const double err = 4.0 * N * eps * amp_abs * scale + eps * N;
      const double slope = 1.0 / (N * lr * (m[static_cast<std::size_t>(k)] + p.a_N() * std::exp(-N * lr)));
      worst = std::max(worst, err * slope);
    }
  }
  if (worst > 1e-7) throw Error(ErrorKind::IllConditioned, "spectral mean profile too ill-conditioned");
  m[static_cast<std::size_t>(N)] = N;
  return m;
}

std::vector<double> mean_profile_rk4(const Configuration& c0, const ModelParams& p, double t, double dt) {
  const int N = p.N();
  require(c0.N() == N, "configuration size does not match N");
  require(t >= 0.0 && dt > 0.0, "need t >= 0 and dt > 0");
  const double wl = p.r() / (1.0 + p.r()), wr = 1.0 / (1.0 + p.r());
  std::vector<double> m = c0.x;
  auto rhs = [&](const std::vector<double>& v, std::vector<double>& out) {
    out.assign(v.size(), 0.0);
    for (int k = 1; k <= N - 1; ++k) {
      const auto i = static_cast<std::size_t>(k);
      out[i] = wl * v[i - 1] - v[i] + wr * v[i + 1];
    }
  };
  std::vector<double> k1, k2, k3, k4, tmp(m.size());
  const auto steps = static_cast<long long>(std::ceil(t / dt - 1e-9));
  const double h = steps > 0 ? t / steps : 0.0;
  for (long long s = 0; s < steps; ++s) {
    rhs(m, k1);
    for (std::size_t i = 0; i < m.size(); ++i) tmp[i] = m[i] + 0.5 * h * k1[i];
    rhs(tmp, k2);
    for (std::size_t i = 0; i < m.size(); ++i) tmp[i] = m[i] + 0.5 * h * k2[i];
    rhs(tmp, k3);
    for (std::size_t i = 0; i < m.size(); ++i) tmp[i] = m[i] + h * k3[i];
    rhs(tmp, k4);
    for (std::size_t i = 0; i < m.size(); ++i) m[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  }
  return m;
}

namespace {

double fit_log_slope(std::span<const double> times, std::span<const double> means) {
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (means[i] > 0.0) {
      xs.push_back(times[i]);
      ys.push_back(std::log(means[i]));
    }
  }
  return stats::ols(xs, ys).slope;
}

}  // namespace

DecayReport decay_check(const ModelParams& p, std::span<const double> t_grid, std::size_t trajectories,
                        std::uint64_t seed, std::size_t bootstrap, int threads) {
  if (t_grid.size() < 2) throw Error(ErrorKind::InsufficientGrid, "decay fit needs at least two times");
  require(std::is_sorted(t_grid.begin(), t_grid.end()), "time grid must be increasing");
  require(trajectories >= 1000, "decay check needs at least 1000 trajectories");
  const std::size_t m = t_grid.size();
  const SiteKernel kernel(p);
  const std::vector<double> times(t_grid.begin(), t_grid.end());

  auto rows = run_ensemble(
      trajectories,
      [&](std::size_t i) {
        Rng rng = seed_stream(seed, i);
        std::vector<double> f(m, 0.0);
        Snapshots obs{times, [&](std::size_t j, const Configuration& c) { f[j] = f_N(c, p); }};
        simulate_X(kernel, max_configuration(p.N()), times.back(), rng, &obs);
        return f;
      },
      threads);

  DecayReport rep;
  rep.gamma_N = gamma_N(p);
  rep.times = times;
  rep.mean_f.assign(m, 0.0);
  rep.se_f.assign(m, 0.0);
  std::vector<double> column(trajectories);
  for (std::size_t j = 0; j < m; ++j) {
    for (std::size_t i = 0; i < trajectories; ++i) column[i] = rows[i][j];
    const stats::MeanSe ms = stats::mean_se(column);
    rep.mean_f[j] = ms.mean;
    rep.se_f[j] = ms.se;
    if (ms.mean <= 0.0) ++rep.excluded;
  }
  if (m - rep.excluded < 2) throw Error(ErrorKind::InsufficientGrid, "fewer than two positive means");
  rep.slope = fit_log_slope(times, rep.mean_f);

  // Percentile bootstrap over trajectories; a dedicated stream keeps it reproducible.
  Rng boot = seed_stream(seed ^ 0x5bd1e995b00757ULL, 0);
  std::vector<double> slopes;
  slopes.reserve(bootstrap);
  std::vector<double> means(m);
  for (std::size_t b = 0; b < bootstrap; ++b) {
    std::fill(means.begin(), means.end(), 0.0);
    for (std::size_t i = 0; i < trajectories; ++i) {
      const auto& row = rows[boot.below(trajectories)];
      for (std::size_t j = 0; j < m; ++j) means[j] += row[j];
    }
    for (double& v : means) v /= static_cast<double>(trajectories);
    if (std::count_if(means.begin(), means.end(), [](double v) { return v > 0.0; }) >= 2)
      slopes.push_back(fit_log_slope(times, means));
  }
  if (slopes.empty()) {
    rep.ci_low = rep.ci_high = rep.slope;
  } else {
    rep.ci_low = stats::quantile(slopes, 0.025);
    rep.ci_high = stats::quantile(slopes, 0.975);
  }
  return rep;
}

}  // namespace adjwalk
