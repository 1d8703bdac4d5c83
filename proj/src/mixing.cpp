#include "adjwalk/mixing.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "adjwalk/coupling.hpp"
#include "adjwalk/ensemble.hpp"
#include "adjwalk/error.hpp"
#include "adjwalk/hydro.hpp"
#include "adjwalk/process.hpp"
#include "adjwalk/rng.hpp"
#include "adjwalk/special.hpp"
#include "adjwalk/stats.hpp"

namespace adjwalk {

namespace {

constexpr std::uint64_t kPilotTag = 0x9e3779b97f4a7c15ULL;
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr std::size_t kPilotPatience = 4;
constexpr double kBetas[] = {1e-1, 3e-2, 1e-2, 3e-3, 1e-3, 3e-4, 1e-4};

std::vector<int> candidate_sites(int N) {
  std::vector<int> sites;
  if (N <= 33) {
    for (int k = 1; k < N; ++k) sites.push_back(k);
    return sites;
  }
  for (int i = 1; i <= 32; ++i) {
    const int k = static_cast<int>(std::lround(static_cast<double>(i) * N / 33.0));
    if (k >= 1 && k < N && (sites.empty() || sites.back() != k)) sites.push_back(k);
  }
  return sites;
}

struct Statistic {
  int site = 0;
  double threshold = 0.0;
  double pi_probability = 0.0;
};

// Thresholds at pi-quantiles 1 - beta for one site; unresolvable ones are dropped.
std::vector<Statistic> quantile_thresholds(const ModelParams& p, int k) {
  const BetaParams m = stationary_marginal(p, k);
  const double median = special::inc_beta_inverse(m.a, m.b, 0.5);
  std::vector<Statistic> out;
  for (double beta : kBetas) {
    const double q = special::inc_beta_inverse(m.a, m.b, 1.0 - beta);
    if (!(q > 0.0 && q < 1.0 - 1e-9) || (q - median) <= 1e-9 * q) continue;
    out.push_back({k, q * p.N(), special::inc_beta_complement(m.a, m.b, q)});
  }
  return out;
}

struct Plan {
  std::vector<Statistic> per_time;  // chosen statistic per grid time (site 0: none)
  std::size_t last_time = 0;        // observe the chain at grid indices < last_time
};

Plan plan_pilot(const ModelParams& p, std::span<const double> times, const MixingConfig& cfg, double floor_score) {
  const std::vector<int> sites = candidate_sites(p.N());
  std::vector<std::vector<Statistic>> table;
  for (int k : sites) table.push_back(quantile_thresholds(p, k));

  const std::size_t pilots = cfg.pilot_trajectories > 0 ? cfg.pilot_trajectories
                                                        : std::max<std::size_t>(200, cfg.trajectories / 4);
  const SiteKernel kernel(p);
  const std::size_t m = times.size(), ns = sites.size();

  // The pilot chains advance in lockstep over the grid so that the scan can stop once the score
  // has stayed below the floor for kPilotPatience consecutive times (TV from max only decreases).
  std::vector<Configuration> states(pilots, max_configuration(p.N()));
  std::vector<Rng> rngs;
  rngs.reserve(pilots);
  for (std::size_t i = 0; i < pilots; ++i) rngs.push_back(seed_stream(cfg.seed ^ kPilotTag, i));

  Plan plan;
  plan.per_time.assign(m, Statistic{});
  std::size_t below = 0;
  double now = 0.0;
  for (std::size_t j = 0; j < m; ++j) {
    const double step = times[j] - now;
    now = times[j];
    run_ensemble(
        pilots,
        [&](std::size_t i) {
          states[i] = simulate_X(kernel, std::move(states[i]), step, rngs[i]);
          return 0;
        },
        cfg.threads);
    double best = -kInf;
    for (std::size_t s = 0; s < ns; ++s) {
      const auto site = static_cast<std::size_t>(sites[s]);
      for (const Statistic& st : table[s]) {
        std::size_t hits = 0;
        for (const auto& c : states) hits += c[site] >= st.threshold;
        const double score = static_cast<double>(hits) / static_cast<double>(pilots) - st.pi_probability;
        if (score > best) {
          best = score;
          plan.per_time[j] = st;
        }
      }
    }
    if (best >= floor_score) {
      plan.last_time = j + 1;
      below = 0;
    } else if (plan.last_time > 0 && ++below >= kPilotPatience) {
      break;
    }
  }
  for (std::size_t j = plan.last_time; j < m; ++j) plan.per_time[j] = Statistic{};
  return plan;
}

Plan plan_sprofile(const ModelParams& p, std::span<const double> times) {
  require(p.lambda() > 0.0, "the S-profile chooser requires lambda > 0");
  const int N = p.N();
  const TransformT T(p);
  Plan plan;
  plan.per_time.assign(times.size(), Statistic{});
  for (std::size_t j = 0; j < times.size(); ++j) {
    const double tau = times[j] * p.lambda() / N;
    double best_gap = 0.0;
    int best_k = 0;
    for (int k = 1; k < N; ++k) {
      const double y = static_cast<double>(k) / N;
      const double gap = 1.0 - y - lax_solution(y, tau);
      if (gap > best_gap) {
        best_gap = gap;
        best_k = k;
      }
    }
    if (best_k == 0) continue;
    const double y = static_cast<double>(best_k) / N;
    const double h = T.inverse(1.0 - y - 0.5 * best_gap);
    const BetaParams m = stationary_marginal(p, best_k);
    plan.per_time[j] = {best_k, h, special::inc_beta_complement(m.a, m.b, h / N)};
    plan.last_time = j + 1;
  }
  return plan;
}

LowerEstimate lower_from(const Statistic& st, double t, std::size_t hits, std::size_t n) {
  LowerEstimate e;
  e.t = t;
  if (st.site == 0 || n == 0) return e;
  const stats::Interval w = stats::wilson(hits, n);
  e.evaluated = true;
  e.site = st.site;
  e.threshold = st.threshold;
  e.pi_probability = st.pi_probability;
  e.estimate = std::max(0.0, w.estimate - st.pi_probability);
  e.low = std::max(0.0, w.low - st.pi_probability);
  e.high = std::clamp(w.high - st.pi_probability, 0.0, 1.0);
  return e;
}

TvEstimate upper_from(const std::vector<double>& taus, double t) {
  std::size_t alive = 0;
  for (double tau : taus) alive += tau > t;
  const stats::Interval w = stats::wilson(alive, taus.size());
  return {t, w.estimate, w.low, w.high};
}

struct Sample {
  std::vector<double> tau_ref, tau_mid;   // merge times (mid unused in pair mode)
  std::vector<std::vector<double>> obs;   // obs[traj][j]: top height at the planned site
  std::uint64_t violations = 0;
};

Sample coupled_sample(const ModelParams& p, std::span<const double> times, const Plan& plan, UpperMode mode,
                      std::size_t trajectories, std::uint64_t seed, int threads) {
  const int N = p.N();
  const SiteKernel kernel(p);
  const StationarySampler pi(p);
  const double t_end = times.empty() ? 0.0 : times.back();
  const std::vector<double> obs_times(times.begin(), times.begin() + static_cast<long>(plan.last_time));
  struct Row {
    double tau_ref = kInf, tau_mid = kInf;
    std::vector<double> obs;
    std::uint64_t violations = 0;
  };
  auto rows = run_ensemble(
      trajectories,
      [&](std::size_t i) {
        Rng rng = seed_stream(seed, i);
        Row row;
        row.obs.assign(obs_times.size(), 0.0);
        Configuration ref0 = pi(rng);
        if (mode == UpperMode::Pair) {
          CoupledObserver o{obs_times, [&](std::size_t j, const CoupledState& s) {
                              row.obs[j] = s.upper[static_cast<std::size_t>(plan.per_time[j].site)];
                            }};
          const CoalescenceRecord rec = simulate_coupled(kernel, max_configuration(N), std::move(ref0), t_end, rng,
                                                         MergeRule::SharedProposal, obs_times.empty() ? nullptr : &o);
          row.tau_ref = rec.merge_time;
          row.violations = rec.counters.order_violations;
        } else {
          TripleObserver o{obs_times, [&](std::size_t j, const TripleState& s) {
                             row.obs[j] = s.top[static_cast<std::size_t>(plan.per_time[j].site)];
                           }};
          const TripleRecord rec =
              simulate_triple(kernel, min_configuration(N), std::move(ref0), t_end, rng, obs_times.empty() ? nullptr : &o);
          row.tau_ref = rec.merge_time_ref;
          row.tau_mid = rec.merge_time_mid;
          row.violations = rec.counters.order_violations;
        }
        return row;
      },
      threads);
  Sample s;
  for (auto& r : rows) {
    s.tau_ref.push_back(r.tau_ref);
    s.tau_mid.push_back(r.tau_mid);
    s.obs.push_back(std::move(r.obs));
    s.violations += r.violations;
  }
  return s;
}

std::vector<LowerEstimate> lower_estimates(std::span<const double> times, const Plan& plan,
                                           const std::vector<std::vector<double>>& obs) {
  std::vector<LowerEstimate> out;
  for (std::size_t j = 0; j < times.size(); ++j) {
    const Statistic& st = plan.per_time[j];
    if (j >= plan.last_time || st.site == 0) {
      out.push_back(lower_from(Statistic{}, times[j], 0, 0));
      continue;
    }
    std::size_t hits = 0;
    for (const auto& r : obs) hits += r[j] >= st.threshold;
    out.push_back(lower_from(st, times[j], hits, obs.size()));
  }
  return out;
}

std::vector<TvEstimate> upper_estimates(std::span<const double> times, const Sample& s, UpperMode mode) {
  std::vector<TvEstimate> out;
  for (double t : times) {
    TvEstimate e = upper_from(s.tau_ref, t);
    if (mode == UpperMode::WorstStart) {
      const TvEstimate m = upper_from(s.tau_mid, t);
      e.estimate = std::min(1.0, e.estimate + m.estimate);
      e.low = std::max(e.low, m.low);
      e.high = std::min(1.0, e.high + m.high);
    }
    out.push_back(e);
  }
  return out;
}

void check_grid(std::span<const double> times) {
  require(!times.empty(), "time grid must not be empty");
  require(std::is_sorted(times.begin(), times.end()) && times.front() >= 0.0,
          "time grid must be nonnegative and increasing");
}

}  // namespace

double t_delta(const ModelParams& p, double delta) {
  require(p.lambda() > 0.0, "t_delta requires lambda > 0");
  const double lam = p.lambda();
  // 1 - sqrt(1 - lambda^2) = lambda^2 / (1 + sqrt(1 - lambda^2)) avoids cancellation.
  const double denom = lam * lam / (1.0 + std::sqrt((1.0 - lam) * (1.0 + lam)));
  return (1.0 + delta) * p.N() * p.log_r() / denom;
}

std::vector<TvEstimate> tv_upper(const ModelParams& p, std::span<const double> times, std::size_t trajectories,
                                 std::uint64_t seed, UpperMode mode, int threads) {
  check_grid(times);
  require(trajectories >= 1, "need at least one trajectory");
  const Sample s = coupled_sample(p, times, Plan{std::vector<Statistic>(times.size()), 0}, mode, trajectories, seed, threads);
  return upper_estimates(times, s, mode);
}

std::vector<LowerEstimate> tv_lower(const ModelParams& p, std::span<const double> times, const MixingConfig& cfg) {
  check_grid(times);
  const Plan plan = cfg.chooser == LowerChooser::Pilot ? plan_pilot(p, times, cfg, -1.0) : plan_sprofile(p, times);
  const SiteKernel kernel(p);
  const std::vector<double> obs_times(times.begin(), times.begin() + static_cast<long>(plan.last_time));
  auto obs = run_ensemble(
      cfg.trajectories,
      [&](std::size_t i) {
        Rng rng = seed_stream(cfg.seed, i);
        std::vector<double> v(obs_times.size(), 0.0);
        Snapshots o{obs_times, [&](std::size_t j, const Configuration& c) {
                      v[j] = c[static_cast<std::size_t>(plan.per_time[j].site)];
                    }};
        simulate_X(kernel, max_configuration(p.N()), obs_times.empty() ? 0.0 : obs_times.back(), rng, &o);
        return v;
      },
      cfg.threads);
  return lower_estimates(times, plan, obs);
}

void finalize_window(MixingWindow& w) {
  const std::size_t m = w.upper.size();
  require(w.lower.size() == m, "bound sequences must share the grid");
  double running = 1.0;
  w.upper_reached = false;
  w.t_upper = kInf;
  for (std::size_t j = 0; j < m; ++j) {
    running = std::min(running, w.upper[j].high);
    if (running <= w.epsilon) {
      w.t_upper = w.upper[j].t;
      w.upper_reached = true;
      break;
    }
  }
  double best = 0.0;
  w.t_lower = 0.0;
  for (std::size_t j = m; j-- > 0;) {
    best = std::max(best, w.lower[j].evaluated ? w.lower[j].low : 0.0);
    if (best >= w.epsilon) {
      w.t_lower = w.lower[j].t;
      break;
    }
  }
  w.consistent = !(w.t_lower > w.t_upper);
}

MixingWindow mixing_window(const ModelParams& p, double epsilon, std::span<const double> times,
                           const MixingConfig& cfg) {
  check_grid(times);
  require(epsilon > 0.0 && epsilon < 1.0, "epsilon must lie in (0, 1)");
  const UpperMode mode = cfg.auto_upper ? (p.N() == 2 ? UpperMode::Pair : UpperMode::WorstStart) : cfg.upper_mode;
  MixingWindow w;
  w.epsilon = epsilon;
  w.trajectories = cfg.trajectories;
  Plan plan;
  if (cfg.chooser == LowerChooser::Pilot) {
    // Times whose pilot separation is far below epsilon cannot produce a lower endpoint.
    plan = plan_pilot(p, times, cfg, 0.5 * epsilon);
    w.pilot_trajectories = cfg.pilot_trajectories > 0 ? cfg.pilot_trajectories
                                                      : std::max<std::size_t>(200, cfg.trajectories / 4);
    w.lower_method = "pilot-quantile";
  } else {
    plan = plan_sprofile(p, times);
    w.lower_method = "s-profile";
  }
  const Sample s = coupled_sample(p, times, plan, mode, cfg.trajectories, cfg.seed, cfg.threads);
  w.upper_method = mode == UpperMode::Pair ? "pair-coalescence" : "triple-coalescence";
  w.upper = upper_estimates(times, s, mode);
  w.lower = lower_estimates(times, plan, s.obs);
  w.order_violations = s.violations;
  finalize_window(w);
  return w;
}

const char* to_string(Regime r) { return r == Regime::Fixed ? "fixed" : "vanishing"; }

std::vector<double> sweep_grid(const SweepEntry& e) {
  const ModelParams p(e.N, e.lambda);
  std::vector<double> grid;
  if (e.regime == Regime::Vanishing) {
    const double unit = 4.0 * e.N / e.lambda;
    for (int i = 12; i <= 80; ++i) grid.push_back(unit * i * 0.025);
  } else {
    const double unit = e.N / e.lambda;
    const double top = 1.3 * t_delta(p, 0.0) / unit;
    for (int i = 10; i * 0.05 <= top + 1e-12; ++i) grid.push_back(unit * i * 0.05);
  }
  return grid;
}

std::vector<SweepRow> cutoff_sweep(std::span<const SweepEntry> schedule, double epsilon, const MixingConfig& cfg) {
  std::vector<SweepRow> rows;
  std::uint64_t salt = 0;
  for (const SweepEntry& e : schedule) {
    const ModelParams p(e.N, e.lambda);
    const std::vector<double> grid = sweep_grid(e);
    MixingConfig c = cfg;
    c.seed = cfg.seed + 0x1000003ULL * ++salt;
    const MixingWindow w = mixing_window(p, epsilon, grid, c);
    SweepRow r;
    r.entry = e;
    r.epsilon = epsilon;
    r.t_lower = w.t_lower;
    r.t_upper = w.t_upper;
    r.normalizer = e.regime == Regime::Vanishing ? 4.0 * e.N / e.lambda : e.N / e.lambda;
    r.ratio_low = r.t_lower / r.normalizer;
    r.ratio_high = r.t_upper / r.normalizer;
    if (e.regime == Regime::Fixed) {
      r.bracket_low = e.N / e.lambda;
      r.bracket_high = t_delta(p, 0.0);
    }
    r.consistent = w.consistent;
    r.upper_reached = w.upper_reached;
    rows.push_back(r);
  }
  return rows;
}

}  // namespace adjwalk
