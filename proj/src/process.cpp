#include "adjwalk/process.hpp"

#include <algorithm>
#include <cmath>

#include "adjwalk/error.hpp"
#include "adjwalk/special.hpp"

namespace adjwalk {

SiteKernel::SiteKernel(const ModelParams& p) : p_(p) {
  samplers_.reserve(static_cast<std::size_t>(p.N() - 1));
  for (int k = 1; k <= p.N() - 1; ++k) {
    samplers_.emplace_back(p.log_alpha(k), p.log_alpha(k + 1));
    shapes_.push_back({p.alpha(k), p.alpha(k + 1)});
  }
}

void resample_site(Configuration& c, int k, double u) {
  require(k >= 1 && k <= c.N() - 1, "site must lie in [1, N-1]");
  require(u >= 0.0 && u <= 1.0, "resampling variable must lie in [0,1]");
  apply_resample(c.x.data(), k, u);
}

namespace {

// Emits pending observations strictly before time t (and not after t_end).
struct ObserverCursor {
  const Snapshots* obs;
  std::size_t next = 0;

  void advance(double t, double t_end, const Configuration& c) {
    if (obs == nullptr) return;
    while (next < obs->times.size() && obs->times[next] < t && obs->times[next] <= t_end) {
      obs->callback(next, c);
      ++next;
    }
  }
};

void check_observer(const Snapshots* obs) {
  if (obs == nullptr) return;
  require(std::is_sorted(obs->times.begin(), obs->times.end()), "observer times must be sorted");
  require(static_cast<bool>(obs->callback), "observer needs a callback");
}

}  // namespace

Configuration simulate_X(const SiteKernel& kernel, Configuration c, double t_end, Rng& rng,
                         const Snapshots* observer) {
  const int N = kernel.params().N();
  require(c.N() == N, "configuration size does not match N");
  require(t_end >= 0.0, "t_end must be nonnegative");
  check_observer(observer);
  const EventSchedule clock(N);
  ObserverCursor cursor{observer};
  double* x = c.x.data();
  double t = 0.0;
  for (;;) {
    t += clock.next_gap(rng);
    cursor.advance(t, t_end, c);
    if (t > t_end) break;
    const int k = clock.next_site(rng);
    apply_resample(x, k, kernel.draw(k, rng));
  }
  if (c.x[N] != static_cast<double>(N)) throw Error(ErrorKind::Domain, "x_N changed during simulation");
  return c;
}

Configuration simulate_X(Configuration c0, const ModelParams& p, double t_end, Rng& rng,
                         const Snapshots* observer) {
  return simulate_X(SiteKernel(p), std::move(c0), t_end, rng, observer);
}

MuSchedule mu_k_calibrate(const ModelParams& p) {
  require(p.lambda() > 0.0, "mu calibration requires lambda > 0");
  const int N = p.N();
  const double target = std::pow(static_cast<double>(N), -5.0);
  auto holds = [&](double C) {
    for (int k = 1; k <= N - 1; ++k) {
      if (check_left_tail(k, p, C) > target) return false;
    }
    return true;
  };
  double lo = 0.0, hi = 1.0;
  while (!holds(hi)) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e6) throw Error(ErrorKind::Domain, "mu calibration did not bracket a constant");
  }
  while (hi - lo > 1e-3) {
    const double mid = 0.5 * (lo + hi);
    (holds(mid) ? hi : lo) = mid;
  }
  MuSchedule s;
  s.C_cal = hi;
  s.k0 = p.k0();
  s.mu.assign(static_cast<std::size_t>(N), 0.0);
  const double logN = std::log(static_cast<double>(N));
  for (int k = 1; k <= N - 1; ++k) {
    const double raw = 2.0 * s.C_cal * logN * std::exp(-0.5 * k * p.log_r());
    // The right weight (1 - lambda - mu_k)/2 must stay nonnegative.
    s.mu[static_cast<std::size_t>(k)] = (k < s.k0) ? 1.0 - p.lambda() : std::min(raw, 1.0 - p.lambda());
  }
  s.mu_k0 = (s.k0 >= 1 && s.k0 <= N - 1) ? s.mu[static_cast<std::size_t>(s.k0)] : 1.0 - p.lambda();
  s.regime_violation = s.mu_k0 >= p.lambda() * p.lambda() / 4.0;
  return s;
}

Configuration initial_M(const ModelParams& p) {
  const int N = p.N();
  const int k0 = p.k0();
  Configuration m{std::vector<double>(static_cast<std::size_t>(N + 1), 0.0)};
  for (int k = std::max(1, k0); k <= N - 1; ++k) m.x[static_cast<std::size_t>(k)] = 1.0;
  m.x[static_cast<std::size_t>(N)] = static_cast<double>(N);
  return m;
}

Configuration simulate_M(const ModelParams& p, const MuSchedule& mu, double t_end, Rng& rng,
                         const Snapshots* observer) {
  require(t_end >= 0.0, "t_end must be nonnegative");
  require(static_cast<int>(mu.mu.size()) == p.N(), "mu schedule does not match N");
  check_observer(observer);
  const EventSchedule clock(p.N());
  Configuration m = initial_M(p);
  ObserverCursor cursor{observer};
  double t = 0.0;
  for (;;) {
    t += clock.next_gap(rng);
    cursor.advance(t, t_end, m);
    if (t > t_end) break;
    apply_resample_M(m.x.data(), clock.next_site(rng), p, mu);
  }
  return m;
}

DominationRun simulate_X_and_M(const SiteKernel& kernel, const MuSchedule& mu, double t_end, Rng& rng,
                               const Snapshots* x_observer, const Snapshots* m_observer) {
  const ModelParams& p = kernel.params();
  require(t_end >= 0.0, "t_end must be nonnegative");
  require(static_cast<int>(mu.mu.size()) == p.N(), "mu schedule does not match N");
  check_observer(x_observer);
  check_observer(m_observer);
  DominationRun run{max_configuration(p.N()), initial_M(p)};
  const EventSchedule clock(p.N());
  ObserverCursor xc{x_observer}, mc{m_observer};
  double* x = run.X.x.data();
  double* m = run.M.x.data();
  double t = 0.0;
  for (;;) {
    t += clock.next_gap(rng);
    xc.advance(t, t_end, run.X);
    mc.advance(t, t_end, run.M);
    if (t > t_end) break;
    const int k = clock.next_site(rng);
    apply_resample(x, k, kernel.draw(k, rng));
    apply_resample_M(m, k, p, mu);
    if (run.dominated && m[k] > x[k]) {
      run.dominated = false;
      run.first_violation = t;
    }
  }
  return run;
}

StationarySampler::StationarySampler(const ModelParams& p) : N_(p.N()) {
  log_alpha_.reserve(static_cast<std::size_t>(N_));
  gammas_.reserve(static_cast<std::size_t>(N_));
  for (int i = 1; i <= N_; ++i) {
    log_alpha_.push_back(p.log_alpha(i));
    gammas_.emplace_back(p.log_alpha(i));
  }
}

Configuration StationarySampler::operator()(Rng& rng) const {
  const auto n = static_cast<std::size_t>(N_);
  std::vector<double> log_g(n);
  double top = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    log_g[i] = log_alpha_[i] + std::log(gammas_[i](rng));
    top = std::max(top, log_g[i]);
  }
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    log_g[i] = std::exp(log_g[i] - top);
    total += log_g[i];
  }
  Configuration c{std::vector<double>(n + 1, 0.0)};
  const double scale = static_cast<double>(N_) / total;
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    acc += log_g[i] * scale;
    c.x[i + 1] = std::min(acc, static_cast<double>(N_));
  }
  c.x[n] = static_cast<double>(N_);
  return c;
}

Configuration sample_stationary(const ModelParams& p, Rng& rng) { return StationarySampler(p)(rng); }

BetaParams stationary_marginal(const ModelParams& p, int k) {
  require(k >= 1 && k <= p.N() - 1, "marginal site must lie in [1, N-1]");
  return make_beta(std::exp(p.log_alpha_partial(k)), std::exp(p.log_alpha_tail(k)));
}

BetaParams stationary_gradient(const ModelParams& p, int k) {
  require(k >= 1 && k <= p.N() - 1, "gradient site must lie in [1, N-1]");
  const double la = special::log_add_exp(p.log_alpha(k), p.log_alpha(k + 1));
  // sum of alpha_i over i not in {k, k+1}
  const double lb = special::log_add_exp(p.log_alpha_partial(k - 1), p.log_alpha_tail(k + 1));
  return make_beta(std::exp(la), std::exp(lb));
}

double gradient_tail_probability(const ModelParams& p, int k, double threshold) {
  if (threshold <= 0.0) return 0.0;
  const BetaParams g = stationary_gradient(p, k);
  return special::inc_beta(g.a, g.b, std::min(1.0, threshold / p.N()));
}

GradientTailReport gradient_tail_check(const ModelParams& p, int k, double c_prime, double c_second) {
  const double N = p.N();
  GradientTailReport rep;
  rep.threshold = c_prime * std::pow(N, -4.0) * p.lambda() * std::exp((k - N) * p.log_r());
  rep.probability = gradient_tail_probability(p, k, rep.threshold);
  rep.bound = c_second * std::pow(N, -5.0);
  rep.within_bound = rep.probability <= rep.bound;
  return rep;
}

}  // namespace adjwalk
