#include "adjwalk/hydro.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "adjwalk/ensemble.hpp"
#include "adjwalk/error.hpp"
#include "adjwalk/rng.hpp"
#include "adjwalk/special.hpp"
#include "adjwalk/spectral.hpp"
#include "adjwalk/stats.hpp"

namespace adjwalk {

TransformT::TransformT(const ModelParams& p) : N_(p.N()), log_r_(p.log_r()), log_a_N_(0.0) {
  require(p.lambda() > 0.0, "the transform requires lambda > 0");
  log_a_N_ = p.log_a_N();
}

double TransformT::operator()(double u) const {
  require(std::isfinite(u) && u >= 0.0 && u <= N_, "transform argument must lie in [0, N]");
  const double nl = N_ * log_r_;
  if (u == 0.0) return 1.0;
  const double v = -special::log_add_exp(std::log(u) - log_a_N_, -nl) / nl;
  return std::clamp(v, 0.0, 1.0);
}

double TransformT::inverse(double f) const {
  require(std::isfinite(f) && f >= 0.0 && f <= 1.0, "inverse transform argument must lie in [0, 1]");
  const double nl = N_ * log_r_;
  const double v = std::exp(log_a_N_ - f * nl) * -std::expm1(-(1.0 - f) * nl);
  return std::clamp(v, 0.0, static_cast<double>(N_));
}

double lax_solution(double x, double t) {
  if (t <= 0.0) return 0.0;
  const double d = std::max(t - x, 0.0);
  return std::min(1.0 - x, d * d / (4.0 * t));
}

double H_X(double x, double y, double z, const ModelParams& p) {
  const double lam = p.lambda(), lr = p.log_r(), N = p.N();
  return ((1.0 + lam) / 2.0 * std::expm1(N * (y - x) * lr) + (1.0 - lam) / 2.0 * std::expm1(N * (y - z) * lr)) /
         (lam * lr);
}

namespace {

double h_m_from(double a, double b, double ea, double eb, double A, double B, double lam, double lr) {
  if (B == 0.0) return a / (lam * lr);
  if (std::fabs(a) < 1.0 && std::fabs(b) < 1.0) return std::log1p(A * ea + B * eb) / (lam * lr);
  return special::log_add_exp(std::log(A) + a, std::log(B) + b) / (lam * lr);
}

double mu_at(const MuSchedule& mu, int k) { return mu.mu[static_cast<std::size_t>(k)]; }

}  // namespace

double H_M(double x, double y, double z, int k, const ModelParams& p, const MuSchedule& mu) {
  require(k >= 1 && k <= p.N() - 1, "site must lie in [1, N-1]");
  const double lam = p.lambda(), lr = p.log_r(), N = p.N();
  const double m = mu_at(mu, k);
  const double a = N * (y - x) * lr, b = N * (y - z) * lr;
  return h_m_from(a, b, std::expm1(a), std::expm1(b), (1.0 + lam + m) / 2.0, (1.0 - lam - m) / 2.0, lam, lr);
}

double H_naive(double x, double y, double z, const ModelParams& p) {
  const double lam = p.lambda();
  return -(p.N() / lam) * ((1.0 + lam) / 2.0 * (x - y) + (1.0 - lam) / 2.0 * (z - y));
}

void scheme_rhs_into(const SchemeKind& kind, std::span<const double> f, const ModelParams& p,
                     std::span<double> out, std::span<double> scratch, bool parallel) {
  const int N = p.N();
  const double lam = p.lambda(), lr = p.log_r();
  const double nl = N * lr;
  const double wl = (1.0 + lam) / 2.0, wr = (1.0 - lam) / 2.0;
  out[0] = 0.0;
  out[static_cast<std::size_t>(N)] = 0.0;

  if (kind.variant == SchemeVariant::Naive) {
    const double scale = N / lam;
#pragma omp parallel for schedule(static) if (parallel)
    for (int k = 1; k < N; ++k) {
      const auto i = static_cast<std::size_t>(k);
      out[i] = scale * (wl * (f[i - 1] - f[i]) + wr * (f[i + 1] - f[i]));
    }
    return;
  }

  // scratch[k] = expm1(D_k), D_k = N log r (f_k - f_{k-1}); site k needs expm1(D_k) and expm1(-D_{k+1}).
#pragma omp parallel for schedule(static) if (parallel)
  for (int k = 1; k <= N; ++k) {
    const auto i = static_cast<std::size_t>(k);
    scratch[i] = std::expm1(nl * (f[i] - f[i - 1]));
  }
  const MuSchedule* mu = kind.variant == SchemeVariant::M ? &kind.mu.value() : nullptr;
#pragma omp parallel for schedule(static) if (parallel)
  for (int k = 1; k < N; ++k) {
    const auto i = static_cast<std::size_t>(k);
    const double a = nl * (f[i] - f[i - 1]);
    const double d_next = nl * (f[i + 1] - f[i]);
    const double ea = scratch[i];
    // expm1(-D) = -E / (1 + E), accurate while 1 + E does not cancel.
    const double eb = d_next >= -1.0 ? -scratch[i + 1] / (1.0 + scratch[i + 1]) : std::expm1(-d_next);
    if (mu == nullptr) {
      out[i] = -(wl * ea + wr * eb) / (lam * lr);
    } else {
      const double m = mu_at(*mu, k);
      out[i] = -h_m_from(a, -d_next, ea, eb, (1.0 + lam + m) / 2.0, (1.0 - lam - m) / 2.0, lam, lr);
    }
  }
}

std::vector<double> scheme_rhs(const SchemeKind& kind, const GridProfile& profile, const ModelParams& p) {
  require(static_cast<int>(profile.values.size()) == p.N() + 1, "profile size must be N + 1");
  require(p.lambda() > 0.0, "schemes require lambda > 0");
  require(kind.variant != SchemeVariant::M || (kind.mu && static_cast<int>(kind.mu->mu.size()) == p.N()),
          "the M scheme needs a mu schedule for this N");
  for (double v : profile.values) require(std::isfinite(v), "profile values must be finite");
  std::vector<double> out(profile.values.size()), scratch(profile.values.size());
  scheme_rhs_into(kind, profile.values, p, out, scratch, false);
  return out;
}

GridProfile scheme_initial(const SchemeKind& kind, const ModelParams& p) {
  const int N = p.N();
  GridProfile g{std::vector<double>(static_cast<std::size_t>(N + 1), 0.0), 0.0};
  switch (kind.variant) {
    case SchemeVariant::X:
      g.values[0] = 1.0;
      break;
    case SchemeVariant::M: {
      // Cut at k0 itself, matching M_k(0) = 0 for k < k0; the site k0 starts at 0.
      const int k0 = std::clamp(p.k0(), 1, N);
      for (int k = 0; k < k0; ++k) g.values[static_cast<std::size_t>(k)] = 1.0;
      break;
    }
    case SchemeVariant::Naive:
      std::fill(g.values.begin() + 1, g.values.end(), 1.0);
      break;
  }
  return g;
}

SchemeRun integrate_scheme(const SchemeKind& kind, const GridProfile& initial, const ModelParams& p, double t_end,
                           double dt, double store_every, bool parallel) {
  const int N = p.N();
  require(p.lambda() > 0.0, "schemes require lambda > 0");
  require(static_cast<int>(initial.values.size()) == N + 1, "profile size must be N + 1");
  require(kind.variant != SchemeVariant::M || (kind.mu && static_cast<int>(kind.mu->mu.size()) == N),
          "the M scheme needs a mu schedule for this N");
  require(t_end >= 0.0 && dt > 0.0 && store_every > 0.0, "need t_end >= 0, dt > 0, store_every > 0");
  require(dt <= 0.1 * p.lambda() / N * (1.0 + 1e-12), "dt must not exceed 0.1 lambda / N");

  // A whole number of steps per store interval, so frames land on multiples of store_every; the
  // last step is shortened to end exactly at t_end.
  SchemeRun run;
  const auto per_store = static_cast<std::size_t>(std::max(1.0, std::ceil(store_every / dt - 1e-9)));
  const double h = std::min(dt, store_every / static_cast<double>(per_store));
  const auto steps = static_cast<std::size_t>(std::ceil(t_end / h - 1e-9));
  run.dt = h;
  run.steps = steps;
  const std::size_t n = initial.values.size();
  std::vector<double> f = initial.values, tmp(n), k1(n), k2(n), k3(n), k4(n), scratch(n);
  run.frames.push_back({f, initial.time});
  auto elapsed = [&](std::size_t s) { return s == steps ? t_end : static_cast<double>(s) * h; };

  for (std::size_t s = 1; s <= steps; ++s) {
    const double hs = elapsed(s) - elapsed(s - 1);
    scheme_rhs_into(kind, f, p, k1, scratch, parallel);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = f[i] + 0.5 * hs * k1[i];
    scheme_rhs_into(kind, tmp, p, k2, scratch, parallel);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = f[i] + 0.5 * hs * k2[i];
    scheme_rhs_into(kind, tmp, p, k3, scratch, parallel);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = f[i] + hs * k3[i];
    scheme_rhs_into(kind, tmp, p, k4, scratch, parallel);
    bool unstable = false;
    for (std::size_t i = 0; i < n; ++i) {
      f[i] += hs / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
      unstable |= !(f[i] >= -0.1 && f[i] <= 1.1);
    }
    if (unstable) throw Error(ErrorKind::StepTooLarge, "scheme left [-0.1, 1.1]");
    if (s == steps) {
      run.frames.push_back({f, initial.time + t_end});
    } else if (s % per_store == 0) {
      run.frames.push_back({f, initial.time + static_cast<double>(s / per_store) * store_every});
    }
  }
  return run;
}

GridProfile exact_fX(const ModelParams& p, double t) {
  require(p.lambda() > 0.0, "f_X requires lambda > 0");
  require(t >= 0.0, "time must be nonnegative");
  const TransformT T(p);
  std::vector<double> m;
  try {
    m = mean_profile_exact(max_configuration(p.N()), p, t * p.N() / p.lambda());
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::IllConditioned) throw;
    // f_X solves the X scheme exactly, and RK4 there works directly in transformed units.
    const SchemeKind kind{SchemeVariant::X, std::nullopt};
    SchemeRun run = integrate_scheme(kind, scheme_initial(kind, p), p, t, 0.1 * p.lambda() / p.N(), std::max(t, 1.0));
    GridProfile g = std::move(run.frames.back());
    g.time = t;
    return g;
  }
  GridProfile g{std::vector<double>(m.size()), t};
  for (std::size_t k = 0; k < m.size(); ++k) g.values[k] = T(m[k]);
  return g;
}

ComparisonResult comparison_check(std::span<const GridProfile> sub, std::span<const GridProfile> super, double tol) {
  require(sub.size() == super.size(), "trajectories must have the same number of frames");
  ComparisonResult res;
  for (std::size_t f = 0; f < sub.size(); ++f) {
    require(sub[f].values.size() == super[f].values.size(), "frames must share the grid");
    require(std::fabs(sub[f].time - super[f].time) <= 1e-9 * std::max(1.0, std::fabs(sub[f].time)),
            "frames must share their times");
    for (std::size_t k = 0; k < sub[f].values.size(); ++k) {
      const double excess = sub[f].values[k] - super[f].values[k];
      if (excess > tol) {
        res.pass = false;
        res.time = sub[f].time;
        res.site = static_cast<int>(k);
        res.excess = excess;
        return res;
      }
    }
  }
  return res;
}

std::pair<GridProfile, GridProfile> barrier_profiles_naive(const ModelParams& p, double t) {
  require(p.lambda() > 0.0, "barriers require lambda > 0");
  const int N = p.N();
  const double nl = N * p.lambda();
  const double c = std::cbrt(nl);  // (N lambda)^{1/3}
  GridProfile lo{std::vector<double>(static_cast<std::size_t>(N + 1)), t};
  GridProfile hi = lo;
  for (int k = 0; k <= N; ++k) {
    const double x = static_cast<double>(k) / N;
    const double dm = std::max(t - x + 1.0 / c, 0.0);
    const double dp = std::max(x + 1.0 / c - t, 0.0);
    lo.values[static_cast<std::size_t>(k)] = 1.0 - c * c * dm * dm - t / c;
    hi.values[static_cast<std::size_t>(k)] = c * c * dp * dp + t / c;
  }
  return {lo, hi};
}

GridProfile super_solution_X(const ModelParams& p, double t) {
  const int N = p.N();
  GridProfile g{std::vector<double>(static_cast<std::size_t>(N + 1)), t};
  for (int k = 0; k <= N; ++k) g.values[static_cast<std::size_t>(k)] = 1.0 - static_cast<double>(k) / N;
  return g;
}

GridProfile super_solution_M(const ModelParams& p, double t) {
  const int N = p.N(), k0 = p.k0();
  const double cN = 1.0 / (1.0 - static_cast<double>(k0) / N);
  GridProfile g{std::vector<double>(static_cast<std::size_t>(N + 1)), t};
  for (int k = 0; k <= N; ++k)
    g.values[static_cast<std::size_t>(k)] = k < k0 ? 1.0 : cN * (1.0 - static_cast<double>(k) / N);
  return g;
}

namespace {

double barrier_value(double x, double t) { return -x * x / (16.0 - 4.0 * t) - x / 2.0 + t / 4.0; }
double barrier_dt(double x, double t) { return -4.0 * x * x / ((16.0 - 4.0 * t) * (16.0 - 4.0 * t)) + 0.25; }
double barrier_scale(const ModelParams& p) { return std::max(p.lambda(), 1.0 / (p.N() * p.lambda())); }

}  // namespace

GridProfile sub_solution_barrier(const ModelParams& p, double t, double C) {
  require(t >= 0.0 && t < 4.0, "the barrier is defined for t in [0, 4)");
  const int N = p.N();
  const double shift = C * barrier_scale(p) * t;
  GridProfile g{std::vector<double>(static_cast<std::size_t>(N + 1)), t};
  for (int k = 0; k <= N; ++k) g.values[static_cast<std::size_t>(k)] = barrier_value(static_cast<double>(k) / N, t) - shift;
  return g;
}

double calibrate_barrier_constant(const SchemeKind& kind, const ModelParams& p, double t_max, double dt_probe) {
  require(t_max < 4.0 && dt_probe > 0.0, "need t_max < 4 and dt_probe > 0");
  require(kind.variant != SchemeVariant::Naive, "the barrier applies to the X and M schemes");
  const int N = p.N();
  // H is translation invariant, so the C-term only enters through the time derivative.
  double worst = 0.0;
  const auto probes = static_cast<int>(std::floor(t_max / dt_probe + 1e-9));
  for (int i = 0; i <= probes; ++i) {
    const double t = std::min(i * dt_probe, t_max);
    for (int k = 1; k < N; ++k) {
      const double xm = static_cast<double>(k - 1) / N, x = static_cast<double>(k) / N,
                   xp = static_cast<double>(k + 1) / N;
      const double a = barrier_value(xm, t), b = barrier_value(x, t), c = barrier_value(xp, t);
      const double H = kind.variant == SchemeVariant::X ? H_X(a, b, c, p) : H_M(a, b, c, k, p, *kind.mu);
      worst = std::max(worst, barrier_dt(x, t) + H);
    }
  }
  return worst / barrier_scale(p);
}

GridProfile naive_mean_profile(const ModelParams& p, double t) {
  const SchemeKind kind{SchemeVariant::Naive, std::nullopt};
  const double dt = 0.1 * p.lambda() / p.N();
  SchemeRun run = integrate_scheme(kind, scheme_initial(kind, p), p, t, dt, std::max(t, dt));
  return run.frames.back();
}

FrontReport naive_front(const ModelParams& p, double t, std::span<const double> x_grid, std::size_t trajectories,
                        std::uint64_t seed, int threads) {
  require(p.lambda() > 0.0, "the naive front requires lambda > 0");
  require(t >= 0.0 && trajectories > 0, "need t >= 0 and at least one trajectory");
  const int N = p.N();
  for (double x : x_grid) require(x >= 0.0 && x <= 1.0, "x grid must lie in [0, 1]");
  const SiteKernel kernel(p);
  const double t_real = t * N / p.lambda();
  auto finals = run_ensemble(
      trajectories,
      [&](std::size_t i) {
        Rng rng = seed_stream(seed, i);
        return simulate_X(kernel, max_configuration(N), t_real, rng).x;
      },
      threads);

  FrontReport rep;
  rep.regime_ok = p.lambda() * N >= 20.0;
  rep.x_grid.assign(x_grid.begin(), x_grid.end());
  rep.mean_g.assign(x_grid.size(), 0.0);
  rep.mean_profile.assign(static_cast<std::size_t>(N + 1), 0.0);
  for (const auto& x : finals) {
    std::vector<double> g(x_grid.size());
    for (std::size_t j = 0; j < x_grid.size(); ++j) {
      const auto k = static_cast<std::size_t>(std::floor(x_grid[j] * N));
      g[j] = x[k] / N;
      rep.mean_g[j] += g[j];
    }
    for (std::size_t k = 0; k < x.size(); ++k) rep.mean_profile[k] += x[k] / N;
    rep.g.push_back(std::move(g));
  }
  for (double& v : rep.mean_g) v /= static_cast<double>(trajectories);
  for (double& v : rep.mean_profile) v /= static_cast<double>(trajectories);

  rep.step_location = 1.0;
  for (std::size_t j = 0; j < x_grid.size(); ++j) {
    if (rep.mean_g[j] >= 0.5) {
      rep.step_location = x_grid[j];
      break;
    }
  }
  auto first_at = [&](double level) {
    for (int k = 1; k <= N; ++k)
      if (rep.mean_profile[static_cast<std::size_t>(k)] >= level) return static_cast<double>(k) / N;
    return 1.0;
  };
  rep.sharpness = first_at(0.95) - first_at(0.05);
  return rep;
}

double pde_residual_S(std::span<const std::pair<double, double>> points, double h) {
  require(h > 0.0, "step must be positive");
  double worst = 0.0;
  for (const auto& [x, t] : points) {
    const double st = (lax_solution(x, t + h) - lax_solution(x, t - h)) / (2.0 * h);
    const double sx = (lax_solution(x + h, t) - lax_solution(x - h, t)) / (2.0 * h);
    worst = std::max(worst, std::fabs(st + sx + sx * sx));
  }
  return worst;
}

std::vector<std::pair<double, double>> smooth_points(std::size_t count, double margin, double t_min, double t_max,
                                                     std::uint64_t seed) {
  require(margin > 0.0 && margin < 0.25 && t_min > margin && t_max > t_min, "invalid sampling region");
  Rng rng(seed);
  std::vector<std::pair<double, double>> pts;
  pts.reserve(count);
  while (pts.size() < count) {
    const double x = margin + (1.0 - 2.0 * margin) * rng.uniform();
    const double t = t_min + (t_max - t_min) * rng.uniform();
    if (std::fabs(x - t) < margin) continue;
    // The two branches meet on x = 2 sqrt(t) - t, which matters for 1 < t < 4.
    if (t > 1.0 - margin && std::fabs(x - (2.0 * std::sqrt(t) - t)) < margin) continue;
    if (std::fabs(t - 4.0) < margin || std::fabs(t - 1.0) < margin) continue;
    pts.emplace_back(x, t);
  }
  return pts;
}

TransformedProfile empirical_transformed_profile(const ModelParams& p, double t, std::size_t trajectories,
                                                 std::uint64_t seed, double eps, int threads) {
  require(p.lambda() > 0.0, "transformed profiles require lambda > 0");
  require(t >= 0.0 && trajectories >= 2, "need t >= 0 and at least two trajectories");
  const int N = p.N();
  const auto n = static_cast<std::size_t>(N + 1);
  const SiteKernel kernel(p);
  const MuSchedule mu = mu_k_calibrate(p);
  const TransformT T(p);
  const double t_real = t * N / p.lambda();

  struct Row {
    std::vector<double> x, m;
    bool dominated = true;
  };
  auto rows = run_ensemble(
      trajectories,
      [&](std::size_t i) {
        Rng rng = seed_stream(seed, i);
        DominationRun run = simulate_X_and_M(kernel, mu, t_real, rng);
        return Row{std::move(run.X.x), std::move(run.M.x), run.dominated};
      },
      threads);

  TransformedProfile out;
  out.time = t;
  out.regime_ok = p.lambda() >= 4.0 * std::log(static_cast<double>(N)) / N;
  out.mean_TX.assign(n, 0.0);
  out.se_TX.assign(n, 0.0);
  out.T_meanX.assign(n, 0.0);
  out.mean_TM.assign(n, 0.0);
  out.se_TM.assign(n, 0.0);
  std::vector<double> tx(trajectories), tm(trajectories), xs(trajectories);
  for (const Row& r : rows) out.dominated += r.dominated ? 1 : 0;
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t i = 0; i < trajectories; ++i) {
      xs[i] = rows[i].x[k];
      tx[i] = T(rows[i].x[k]);
      tm[i] = T(std::clamp(rows[i].m[k], 0.0, static_cast<double>(N)));
    }
    const stats::MeanSe a = stats::mean_se(tx), b = stats::mean_se(tm), c = stats::mean_se(xs);
    out.mean_TX[k] = a.mean;
    out.se_TX[k] = a.se;
    out.mean_TM[k] = b.mean;
    out.se_TM[k] = b.se;
    out.T_meanX[k] = T(std::clamp(c.mean, 0.0, static_cast<double>(N)));
  }
  out.sup_distance = sup_distance({out.mean_TX, t}, eps);
  return out;
}

double sup_distance(const GridProfile& profile, double eps) {
  const int N = static_cast<int>(profile.values.size()) - 1;
  require(N >= 1, "profile needs at least two points");
  double worst = 0.0;
  for (int k = 0; k <= N; ++k) {
    const double x = static_cast<double>(k) / N;
    if (x < eps) continue;
    worst = std::max(worst, std::fabs(profile.values[static_cast<std::size_t>(k)] - lax_solution(x, profile.time)));
  }
  return worst;
}

}  // namespace adjwalk
