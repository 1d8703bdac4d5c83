#include "adjwalk/cli/commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <iostream>
#include <limits>
#include <map>
#include <sstream>

#include <CLI11.hpp>

#include "adjwalk/cli/output.hpp"
#include "adjwalk/coupling.hpp"
#include "adjwalk/ensemble.hpp"
#include "adjwalk/error.hpp"
#include "adjwalk/hydro.hpp"
#include "adjwalk/mixing.hpp"
#include "adjwalk/process.hpp"
#include "adjwalk/special.hpp"
#include "adjwalk/spectral.hpp"
#include "adjwalk/stats.hpp"

namespace adjwalk::cli {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Context {
  const Manifest& m;
  fs::path dir;
  std::string hash;
  int threads = 0;
  ordered_json results = ordered_json::object();
  std::vector<Assertion> assertions;

  ModelParams params() const { return ModelParams(m.n, m.lambda, m.alpha1); }
  CsvWriter csv(const std::string& name, const std::vector<std::string>& header) const {
    return CsvWriter(dir / name, hash, header);
  }
  void check(std::string name, bool pass, std::string detail = {}) {
    assertions.push_back({std::move(name), pass, std::move(detail)});
  }
};

std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> v;
  for (int i = 0; i < n; ++i) v.push_back(a + (b - a) * i / (n - 1));
  return v;
}

std::vector<double> grid_or(const Manifest& m, std::vector<double> fallback) {
  std::vector<double> g = m.times.empty() ? std::move(fallback) : m.times;
  require(!g.empty() && std::is_sorted(g.begin(), g.end()) && g.front() >= 0.0,
          "time grid must be nonempty, nonnegative and increasing");
  return g;
}

Configuration start_configuration(const std::string& which, const ModelParams& p, Rng& rng) {
  if (which == "max") return max_configuration(p.N());
  if (which == "min") return min_configuration(p.N());
  if (which == "stationary") return sample_stationary(p, rng);
  throw Error(ErrorKind::Usage, "start must be max, min or stationary, got '" + which + "'");
}

std::string describe(double v) { return std::isfinite(v) ? format_number(v) : "inf"; }

ordered_json finite_or_null(double v) { return std::isfinite(v) ? ordered_json(v) : ordered_json(nullptr); }

// ---------------------------------------------------------------------------------------------

void run_simulate(Context& c) {
  const Manifest& m = c.m;
  const ModelParams p = c.params();
  require(m.t_max >= 0.0, "t_max must be nonnegative");
  require(m.trajectories >= 1, "need at least one trajectory");
  const std::vector<double> times = grid_or(m, linspace(0.0, m.t_max, 9));
  const auto n = static_cast<std::size_t>(p.N() + 1);
  const SiteKernel kernel(p);
  struct Row {
    std::vector<double> snap;
    bool valid = true;
  };
  auto rows = run_ensemble(
      m.trajectories,
      [&](std::size_t i) {
        Rng rng = seed_stream(m.seed, i);
        Row r;
        r.snap.assign(times.size() * n, 0.0);
        Configuration c0 = start_configuration(m.start, p, rng);
        Snapshots obs{times, [&](std::size_t j, const Configuration& cfg) {
                        std::copy(cfg.x.begin(), cfg.x.end(), r.snap.begin() + static_cast<long>(j * n));
                        r.valid = r.valid && is_valid(cfg);
                      }};
        simulate_X(kernel, std::move(c0), times.back(), rng, &obs);
        return r;
      },
      c.threads);

  {
    CsvWriter w = c.csv("trajectory.csv", {"t", "k", "x_k"});
    for (std::size_t j = 0; j < times.size(); ++j)
      for (std::size_t k = 0; k < n; ++k) {
        w.num(times[j]).integer(static_cast<long long>(k)).num(rows[0].snap[j * n + k]);
        w.end_row();
      }
  }
  CsvWriter w = c.csv("mean_profile.csv", {"t", "k", "mean_x_k", "se"});
  std::vector<double> col(rows.size());
  std::size_t invalid = 0;
  for (const Row& r : rows) invalid += r.valid ? 0 : 1;
  for (std::size_t j = 0; j < times.size(); ++j)
    for (std::size_t k = 0; k < n; ++k) {
      for (std::size_t i = 0; i < rows.size(); ++i) col[i] = rows[i].snap[j * n + k];
      const stats::MeanSe ms = stats::mean_se(col);
      w.num(times[j]).integer(static_cast<long long>(k)).num(ms.mean).num(rows.size() > 1 ? ms.se : 0.0);
      w.end_row();
    }
  c.results["times"] = times;
  c.results["invalid_trajectories"] = invalid;
  c.check("configurations_ordered", invalid == 0, std::to_string(invalid) + " trajectories left the simplex");
}

void run_stationary_test(Context& c) {
  const Manifest& m = c.m;
  const ModelParams p = c.params();
  const int N = p.N();
  require(m.trajectories >= 10, "need at least 10 samples");
  require(m.burn_in >= 0.0, "burn_in must be nonnegative");
  std::vector<int> sites = m.sites;
  if (sites.empty()) sites = {N / 4, N / 2, (3 * N) / 4};
  std::sort(sites.begin(), sites.end());
  sites.erase(std::unique(sites.begin(), sites.end()), sites.end());
  for (int k : sites) require(k >= 1 && k < N, "sites must lie in 1..N-1");

  const SiteKernel kernel(p);
  const StationarySampler pi(p);
  auto rows = run_ensemble(
      m.trajectories,
      [&](std::size_t i) {
        Rng rng = seed_stream(m.seed, i);
        Configuration x = pi(rng);
        if (m.burn_in > 0.0) x = simulate_X(kernel, std::move(x), m.burn_in, rng);
        std::vector<double> v;
        for (int k : sites) v.push_back(x[static_cast<std::size_t>(k)] / N);
        return v;
      },
      c.threads);

  CsvWriter w = c.csv("ks.csv", {"k", "a", "b", "statistic", "p_value"});
  auto table = ordered_json::array();
  for (std::size_t s = 0; s < sites.size(); ++s) {
    const BetaParams law = stationary_marginal(p, sites[s]);
    std::vector<double> sample;
    for (const auto& r : rows) sample.push_back(r[s]);
    const stats::KsResult ks =
        stats::ks_test(std::move(sample), [&](double u) { return special::inc_beta(law.a, law.b, std::clamp(u, 0.0, 1.0)); });
    w.integer(sites[s]).num(law.a).num(law.b).num(ks.statistic).num(ks.p_value);
    w.end_row();
    table.push_back({{"k", sites[s]}, {"statistic", ks.statistic}, {"p_value", ks.p_value}});
    c.check("ks_site_" + std::to_string(sites[s]), ks.p_value > 0.01, "p = " + format_number(ks.p_value));
  }
  c.results["burn_in"] = m.burn_in;
  c.results["ks"] = table;
}

void run_decay(Context& c) {
  const Manifest& m = c.m;
  const ModelParams p = c.params();
  std::vector<double> fallback;
  for (int i = 1; i <= 10; ++i) fallback.push_back(2.0 * i);
  const std::vector<double> times = grid_or(m, fallback);
  const DecayReport rep = decay_check(p, times, m.trajectories, m.seed, 1000, c.threads);

  ordered_json body;
  body["params"] = {{"n", p.N()}, {"lambda", p.lambda()}, {"alpha1", p.alpha1()}};
  body["slope"] = rep.slope;
  body["ci_low"] = rep.ci_low;
  body["ci_high"] = rep.ci_high;
  body["gamma_N"] = rep.gamma_N;
  write_json(c.dir / "decay.json", c.hash, body);

  CsvWriter w = c.csv("decay.csv", {"t", "mean_f", "se_f"});
  for (std::size_t j = 0; j < rep.times.size(); ++j) {
    w.num(rep.times[j]).num(rep.mean_f[j]).num(rep.se_f[j]);
    w.end_row();
  }
  for (const auto& [k, v] : body.items()) c.results[k] = v;
  c.results["excluded_points"] = rep.excluded;
  c.check("gamma_in_ci", rep.ci_low <= rep.gamma_N && rep.gamma_N <= rep.ci_high,
          "gamma_N = " + format_number(rep.gamma_N) + ", CI [" + format_number(rep.ci_low) + ", " +
              format_number(rep.ci_high) + "]");
}

void run_coupling(Context& c) {
  const Manifest& m = c.m;
  const ModelParams p = c.params();
  require(m.t_max >= 0.0 && m.trajectories >= 1, "need t_max >= 0 and at least one trajectory");
  const SiteKernel kernel(p);
  auto recs = run_ensemble(
      m.trajectories,
      [&](std::size_t i) {
        Rng rng = seed_stream(m.seed, i);
        Configuration lower = start_configuration(m.lower_start, p, rng);
        return simulate_coupled(kernel, max_configuration(p.N()), std::move(lower), m.t_max, rng);
      },
      c.threads);

  CsvWriter w = c.csv("coupling.csv", {"trajectory", "seed", "merge_time", "merged"});
  std::size_t merged = 0;
  std::uint64_t violations = 0, retries = 0;
  std::vector<double> times;
  for (std::size_t i = 0; i < recs.size(); ++i) {
    const CoalescenceRecord& r = recs[i];
    w.integer(static_cast<long long>(i)).integer(static_cast<long long>(m.seed)).optional(r.merge_time).integer(r.merged);
    w.end_row();
    merged += r.merged;
    violations += r.counters.order_violations;
    retries += r.counters.retries;
    if (r.merged) times.push_back(r.merge_time);
  }
  const stats::Interval frac = stats::wilson(merged, recs.size());
  c.results["merged_fraction"] = frac.estimate;
  c.results["merged_fraction_ci"] = {frac.low, frac.high};
  c.results["median_merge_time"] = times.empty() ? ordered_json(nullptr) : ordered_json(stats::quantile(times, 0.5));
  c.results["order_violations"] = violations;
  c.results["rejection_retries"] = retries;
  c.check("monotone_coupling", violations == 0, std::to_string(violations) + " order violations");
}

void run_hydro_naive(Context& c) {
  const Manifest& m = c.m;
  const ModelParams p = c.params();
  const int N = p.N();
  std::vector<double> grid;
  for (int i = 1; i <= 19; ++i) grid.push_back(0.05 * i);
  const FrontReport rep = naive_front(p, m.t, grid, m.trajectories, m.seed, c.threads);
  const auto [lo, hi] = barrier_profiles_naive(p, m.t);

  {
    CsvWriter w = c.csv("front.csv", {"x", "mean_g"});
    for (std::size_t j = 0; j < grid.size(); ++j) {
      w.num(grid[j]).num(rep.mean_g[j]);
      w.end_row();
    }
  }
  CsvWriter w = c.csv("naive_profile.csv", {"t", "x", "emp_mean", "f_minus", "f_plus"});
  int outside = 0;
  for (int k = 0; k <= N; ++k) {
    const auto ku = static_cast<std::size_t>(k);
    w.num(m.t).num(static_cast<double>(k) / N).num(rep.mean_profile[ku]).num(lo.values[ku]).num(hi.values[ku]);
    w.end_row();
    outside += rep.mean_profile[ku] < lo.values[ku] || rep.mean_profile[ku] > hi.values[ku];
  }
  // Grid indices 7 and 11 are x = 0.4 and x = 0.6.
  std::size_t sharp = 0;
  for (const auto& g : rep.g) sharp += g[7] <= 0.05 && g[11] >= 0.95;
  const double frac = static_cast<double>(sharp) / static_cast<double>(rep.g.size());
  c.results["regime_ok"] = rep.regime_ok;
  c.results["step_location"] = rep.step_location;
  c.results["sharpness"] = rep.sharpness;
  c.results["sharp_fraction"] = frac;
  c.results["barrier_violations"] = outside;
  if (!rep.regime_ok) std::cerr << "warning: lambda N < 20, outside the naive hydrodynamic regime\n";
  c.check("front_sharp", frac >= 0.95, "fraction " + format_number(frac));
  c.check("barrier_sandwich", outside == 0, std::to_string(outside) + " sites outside [f_minus, f_plus]");
}

GridProfile fX_profile(const ModelParams& p, double t) {
  try {
    return exact_fX(p, t);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::IllConditioned) throw;
    const SchemeKind kind{SchemeVariant::X, std::nullopt};
    const double dt = 0.1 * p.lambda() / p.N();
    return integrate_scheme(kind, scheme_initial(kind, p), p, t, dt, std::max(t, dt)).frames.back();
  }
}

void run_hydro_transformed(Context& c) {
  const Manifest& m = c.m;
  const ModelParams p = c.params();
  const int N = p.N();
  const TransformedProfile tp = empirical_transformed_profile(p, m.t, m.trajectories, m.seed, m.eps_x, c.threads);
  const GridProfile fx = fX_profile(p, m.t);
  CsvWriter w = c.csv("profile.csv", {"t", "x", "f_X", "S", "emp_TmeanX", "emp_meanTX", "se"});
  for (int k = 0; k <= N; ++k) {
    const auto ku = static_cast<std::size_t>(k);
    const double x = static_cast<double>(k) / N;
    w.num(m.t).num(x).num(fx.values[ku]).num(lax_solution(x, m.t)).num(tp.T_meanX[ku]).num(tp.mean_TX[ku]).num(tp.se_TX[ku]);
    w.end_row();
  }
  GridProfile mean_tm{tp.mean_TM, m.t};
  c.results["regime_ok"] = tp.regime_ok;
  c.results["sup_distance"] = tp.sup_distance;
  c.results["sup_distance_fX"] = sup_distance(fx, m.eps_x);
  c.results["sup_distance_TM"] = sup_distance(mean_tm, m.eps_x);
  c.results["dominated_fraction"] = static_cast<double>(tp.dominated) / static_cast<double>(m.trajectories);
  if (!tp.regime_ok) std::cerr << "warning: lambda < 4 log N / N, outside the transformed hydrodynamic regime\n";
  if (m.tolerance)
    c.check("sup_distance", tp.sup_distance <= *m.tolerance,
            format_number(tp.sup_distance) + " against tolerance " + format_number(*m.tolerance));
}

std::vector<GridProfile> integrate_through(const SchemeKind& kind, const ModelParams& p,
                                           const std::vector<double>& times, double store_every,
                                           std::vector<GridProfile>& at_times) {
  const double dt = 0.1 * p.lambda() / p.N();
  GridProfile cur = scheme_initial(kind, p);
  std::vector<GridProfile> frames{cur};
  for (double t : times) {
    if (t > cur.time) {
      SchemeRun run = integrate_scheme(kind, cur, p, t - cur.time, dt, store_every, p.N() >= 256);
      frames.insert(frames.end(), run.frames.begin() + 1, run.frames.end());
      cur = run.frames.back();
    }
    at_times.push_back(cur);
  }
  return frames;
}

void run_schemes(Context& c) {
  const Manifest& m = c.m;
  const ModelParams p = c.params();
  const int N = p.N();
  const std::vector<double> times = grid_or(m, {m.t});
  const MuSchedule mu = mu_k_calibrate(p);
  const SchemeKind kx{SchemeVariant::X, std::nullopt}, km{SchemeVariant::M, mu};
  const double store = std::max(0.01, 0.1 * p.lambda() / N);
  std::vector<GridProfile> fx_at, fm_at;
  const std::vector<GridProfile> fx = integrate_through(kx, p, times, store, fx_at);
  const std::vector<GridProfile> fm = integrate_through(km, p, times, store, fm_at);

  CsvWriter w = c.csv("profile.csv", {"t", "x", "f_X", "f_M", "S"});
  auto sup = ordered_json::array();
  for (std::size_t j = 0; j < times.size(); ++j) {
    for (int k = 0; k <= N; ++k) {
      const auto ku = static_cast<std::size_t>(k);
      const double x = static_cast<double>(k) / N;
      w.num(times[j]).num(x).num(fx_at[j].values[ku]).num(fm_at[j].values[ku]).num(lax_solution(x, times[j]));
      w.end_row();
    }
    sup.push_back({{"t", times[j]},
                   {"f_X", sup_distance(fx_at[j], m.eps_x)},
                   {"f_M", sup_distance(fm_at[j], m.eps_x)}});
  }

  // Structural checks at every stored frame.
  auto nonneg = [](const std::vector<GridProfile>& fr) {
    for (const auto& g : fr)
      for (double v : g.values)
        if (v < -1e-12) return false;
    return true;
  };
  auto monotone = [](const std::vector<GridProfile>& fr) {
    for (std::size_t i = 1; i < fr.size(); ++i)
      for (std::size_t k = 0; k < fr[i].values.size(); ++k)
        if (fr[i].values[k] < fr[i - 1].values[k] - 1e-12) return false;
    return true;
  };
  auto supers = [&](const std::vector<GridProfile>& fr, bool is_x) {
    std::vector<GridProfile> s;
    for (const auto& g : fr) s.push_back(is_x ? super_solution_X(p, g.time) : super_solution_M(p, g.time));
    return s;
  };
  auto barrier_frames = [&](const std::vector<GridProfile>& fr, double C, std::vector<GridProfile>& own) {
    std::vector<GridProfile> s;
    for (const auto& g : fr)
      if (g.time <= 3.9) {
        s.push_back(sub_solution_barrier(p, g.time, C));
        own.push_back(g);
      }
    return s;
  };
  const double t_cal = std::min(3.9, times.back());
  const double cx = calibrate_barrier_constant(kx, p, t_cal, 0.01);
  const double cm = calibrate_barrier_constant(km, p, t_cal, 0.01);
  std::vector<GridProfile> fx_b, fm_b;
  const auto bx = barrier_frames(fx, cx, fx_b);
  const auto bm = barrier_frames(fm, cm, fm_b);
  const ComparisonResult up_x = comparison_check(fx, supers(fx, true), 1e-12);
  const ComparisonResult up_m = comparison_check(fm, supers(fm, false), 1e-12);
  const ComparisonResult lo_x = comparison_check(bx, fx_b, 1e-12);
  const ComparisonResult lo_m = comparison_check(bm, fm_b, 1e-12);

  c.results["sup_distance"] = sup;
  c.results["barrier_constant_X"] = cx;
  c.results["barrier_constant_M"] = cm;
  c.results["mu_regime_violation"] = mu.regime_violation;
  c.results["frames"] = fx.size();
  c.check("fX_nonnegative", nonneg(fx));
  c.check("fM_nonnegative", nonneg(fm));
  c.check("fX_below_1_minus_x", up_x.pass, up_x.pass ? "" : "t = " + format_number(up_x.time));
  c.check("fM_below_cN_1_minus_x", up_m.pass, up_m.pass ? "" : "t = " + format_number(up_m.time));
  c.check("fX_above_barrier", lo_x.pass, lo_x.pass ? "" : "t = " + format_number(lo_x.time));
  c.check("fM_above_barrier", lo_m.pass, lo_m.pass ? "" : "t = " + format_number(lo_m.time));
  c.check("fX_time_monotone", monotone(fx));
  c.check("fM_time_monotone", monotone(fm));
  if (m.tolerance) {
    const double d = sup.back()["f_X"].get<double>();
    c.check("sup_distance", d <= *m.tolerance, format_number(d) + " against tolerance " + format_number(*m.tolerance));
  }
}

MixingConfig mixing_config(const Manifest& m, int threads) {
  MixingConfig cfg;
  cfg.trajectories = m.trajectories;
  cfg.pilot_trajectories = m.pilot_trajectories;
  cfg.seed = m.seed;
  cfg.threads = threads;
  if (m.chooser == "pilot") {
    cfg.chooser = LowerChooser::Pilot;
  } else if (m.chooser == "s-profile") {
    cfg.chooser = LowerChooser::SProfile;
  } else {
    throw Error(ErrorKind::Usage, "chooser must be pilot or s-profile, got '" + m.chooser + "'");
  }
  return cfg;
}

void run_mixing(Context& c) {
  const Manifest& m = c.m;
  const ModelParams p = c.params();
  std::vector<double> fallback;
  if (p.N() == 2) {
    for (int i = 1; i <= 80; ++i) fallback.push_back(0.05 * i);
  } else {
    fallback = sweep_grid({p.N(), p.lambda(), Regime::Vanishing});
  }
  const std::vector<double> times = grid_or(m, fallback);
  const MixingWindow w = mixing_window(p, m.epsilon, times, mixing_config(m, c.threads));

  CsvWriter out = c.csv("tv.csv", {"t", "upper", "upper_low", "upper_high", "lower", "lower_low", "lower_high", "site",
                                    "threshold", "pi_probability"});
  for (std::size_t j = 0; j < times.size(); ++j) {
    const TvEstimate& u = w.upper[j];
    const LowerEstimate& l = w.lower[j];
    out.num(u.t).num(u.estimate).num(u.low).num(u.high).num(l.estimate).num(l.low).num(l.high);
    if (l.evaluated) {
      out.integer(l.site).num(l.threshold).num(l.pi_probability);
    } else {
      out.missing().missing().missing();
    }
    out.end_row();
  }
  c.results["epsilon"] = w.epsilon;
  c.results["t_lower"] = w.t_lower;
  c.results["t_upper"] = finite_or_null(w.t_upper);
  c.results["upper_reached"] = w.upper_reached;
  c.results["consistent"] = w.consistent;
  c.results["upper_method"] = w.upper_method;
  c.results["lower_method"] = w.lower_method;
  c.results["trajectories"] = w.trajectories;
  c.results["pilot_trajectories"] = w.pilot_trajectories;
  c.results["order_violations"] = w.order_violations;
  c.check("window_consistent", w.consistent,
          "t_lower = " + describe(w.t_lower) + ", t_upper = " + describe(w.t_upper));
  c.check("monotone_coupling", w.order_violations == 0, std::to_string(w.order_violations) + " order violations");
}

void run_cutoff_sweep(Context& c) {
  const Manifest& m = c.m;
  require(!m.schedule.empty(), "cutoff-sweep needs a schedule");
  const std::vector<SweepRow> rows = cutoff_sweep(m.schedule, m.epsilon, mixing_config(m, c.threads));
  CsvWriter w = c.csv("sweep.csv", {"N", "lambda", "regime", "epsilon", "t_lower", "t_upper", "normalizer", "ratio_low",
                                     "ratio_high"});
  auto table = ordered_json::array();
  for (const SweepRow& r : rows) {
    w.integer(r.entry.N).num(r.entry.lambda).text(to_string(r.entry.regime)).num(r.epsilon).num(r.t_lower)
        .optional(r.t_upper).num(r.normalizer).num(r.ratio_low).optional(r.ratio_high);
    w.end_row();
    ordered_json row = {{"n", r.entry.N},
                        {"lambda", r.entry.lambda},
                        {"regime", to_string(r.entry.regime)},
                        {"t_lower", r.t_lower},
                        {"t_upper", finite_or_null(r.t_upper)},
                        {"ratio_low", r.ratio_low},
                        {"ratio_high", finite_or_null(r.ratio_high)},
                        {"consistent", r.consistent}};
    if (r.entry.regime == Regime::Fixed) row["bracket"] = {r.bracket_low, r.bracket_high};
    table.push_back(row);
    c.check("window_consistent_N" + std::to_string(r.entry.N), r.consistent,
            "t_lower = " + describe(r.t_lower) + ", t_upper = " + describe(r.t_upper));
  }
  c.results["rows"] = table;
}

int exit_code_for(const Error& e) {
  switch (e.kind()) {
    case ErrorKind::Domain:
    case ErrorKind::Usage:
    case ErrorKind::InsufficientGrid:
      return kExitUsage;
    default:
      return kExitAssertion;
  }
}

}  // namespace

fs::path resolve_output_dir(const Manifest& m) {
  if (!m.output_dir.empty()) return m.output_dir;
  if (const char* env = std::getenv("ADJWALK_OUTPUT_DIR"); env && *env) return env;
  return "adjwalk-out";
}

RunResult run(const Manifest& m, int threads) {
  RunResult res;
  res.output_dir = resolve_output_dir(m);
  res.hash = manifest_hash(m);
  std::error_code ec;
  fs::create_directories(res.output_dir, ec);
  if (ec) throw Error(ErrorKind::Usage, "cannot create output directory '" + res.output_dir.string() + "'");

  Context c{m, res.output_dir, res.hash, threads, ordered_json::object(), {}};
  const std::string& x = m.experiment;
  if (x == "simulate") {
    run_simulate(c);
  } else if (x == "stationary-test") {
    run_stationary_test(c);
  } else if (x == "decay") {
    run_decay(c);
  } else if (x == "coupling") {
    run_coupling(c);
  } else if (x == "hydro-naive") {
    run_hydro_naive(c);
  } else if (x == "hydro-transformed") {
    run_hydro_transformed(c);
  } else if (x == "schemes") {
    run_schemes(c);
  } else if (x == "mixing") {
    run_mixing(c);
  } else if (x == "cutoff-sweep") {
    run_cutoff_sweep(c);
  } else {
    throw Error(ErrorKind::Usage, "unknown experiment '" + x + "'");
  }

  // Echo without output_dir, like the hash: a relocated run reproduces byte for byte.
  ordered_json manifest_json = to_json(m);
  manifest_json.erase("output_dir");
  ordered_json summary;
  summary["tool_version"] = kToolVersion;
  summary["experiment"] = x;
  summary["manifest"] = manifest_json;
  if (x == "cutoff-sweep") {
    auto tags = ordered_json::array();
    for (const SweepEntry& e : m.schedule)
      tags.push_back({{"n", e.N}, {"naive_hydro", naive_regime(e.N, e.lambda)},
                      {"transformed_hydro", transformed_regime(e.N, e.lambda)}});
    summary["regime_tags"] = tags;
  } else {
    summary["regime_tags"] = {{"naive_hydro", naive_regime(m.n, m.lambda)},
                              {"transformed_hydro", transformed_regime(m.n, m.lambda)}};
  }
  summary["results"] = c.results;
  auto list = ordered_json::array();
  bool ok = true;
  for (const Assertion& a : c.assertions) {
    list.push_back({{"name", a.name}, {"pass", a.pass}, {"detail", a.detail}});
    ok = ok && a.pass;
  }
  summary["assertions"] = list;
  summary["status"] = ok ? "pass" : "fail";
  write_json(res.output_dir / "summary.json", res.hash, summary);
  res.summary = summary;
  res.assertions = c.assertions;
  res.exit_code = ok ? kExitOk : kExitAssertion;
  return res;
}

namespace {

void report_failure(std::ostream& os, const std::string& experiment, const std::vector<Assertion>& failed,
                    const std::string& error = {}) {
  ordered_json j;
  j["status"] = "fail";
  j["experiment"] = experiment;
  auto arr = ordered_json::array();
  for (const Assertion& a : failed) arr.push_back({{"name", a.name}, {"detail", a.detail}});
  j["failed"] = arr;
  if (!error.empty()) j["error"] = error;
  os << j.dump() << "\n";
}

void add_common(CLI::App* sub, Manifest& m, std::string& output_dir) {
  sub->add_option("--n", m.n, "System size N")->capture_default_str();
  sub->add_option("--lambda", m.lambda, "Asymmetry in [0, 1)")->capture_default_str();
  sub->add_option("--alpha1", m.alpha1, "Base shape alpha_1 >= 1")->capture_default_str();
  sub->add_option("--seed", m.seed, "Master seed")->capture_default_str();
  sub->add_option("--trajectories", m.trajectories, "Monte Carlo sample size")->capture_default_str();
  sub->add_option("--times", m.times, "Comma-separated time grid")->delimiter(',');
  sub->add_option("--output-dir", output_dir, "Output directory");
}

}  // namespace

int main_entry(int argc, char** argv) {
  // A --config file sets the baseline; flags given on the command line override it.
  Manifest m;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    try {
      if (a == "--config" && i + 1 < argc) m = load_manifest(argv[i + 1]);
      if (a.rfind("--config=", 0) == 0) m = load_manifest(a.substr(9));
    } catch (const Error& e) {
      std::cerr << e.what() << "\n";
      return kExitUsage;
    }
  }

  CLI::App app{"Adjacent walk simulator and verification suite", "adjwalk"};
  app.set_version_flag("--version", std::string("adjwalk ") + kToolVersion + " (model spec " + kModelVersion + ")");
  int threads = 0;
  std::string config, output_dir, schedule;
  double tolerance = 0.0;
  app.add_option("--threads", threads, "Worker threads (0: hardware count)");
  app.add_option("--config", config, "JSON manifest providing defaults");
  app.require_subcommand(1);

  std::vector<CLI::App*> subs;
  std::vector<std::pair<CLI::App*, CLI::Option*>> tolerance_opts;
  const std::map<std::string, std::string> blurbs{
      {"simulate", "Trajectories and the mean profile from one start"},
      {"stationary-test", "KS tests of stationary marginals"},
      {"decay", "Exponential decay of the twisted area"},
      {"coupling", "Coalescence of the monotone coupling"},
      {"hydro-naive", "Step front and barriers when lambda N is large"},
      {"hydro-transformed", "Transformed profile against the Lax solution"},
      {"schemes", "Both discrete schemes, barriers and comparisons"},
      {"mixing", "TV envelope and mixing window"},
      {"cutoff-sweep", "Mixing windows over a schedule of (N, lambda)"}};
  for (const std::string& name : kExperiments) {
    CLI::App* sub = app.add_subcommand(name, blurbs.at(name));
    add_common(sub, m, output_dir);
    if (name == "simulate" || name == "coupling")
      sub->add_option("--t-max", m.t_max, "Horizon in real time")->capture_default_str();
    if (name == "simulate") sub->add_option("--start", m.start, "max, min or stationary")->capture_default_str();
    if (name == "coupling")
      sub->add_option("--lower-start", m.lower_start, "Lower copy start: min or stationary")->capture_default_str();
    if (name == "stationary-test") {
      sub->add_option("--sites", m.sites, "Comma-separated sites")->delimiter(',');
      sub->add_option("--burn-in", m.burn_in, "Evolve stationary samples this long")->capture_default_str();
    }
    if (name == "hydro-naive" || name == "hydro-transformed" || name == "schemes")
      sub->add_option("--t", m.t, "Rescaled time")->capture_default_str();
    if (name == "hydro-transformed" || name == "schemes") {
      sub->add_option("--eps", m.eps_x, "Exclude x below eps from sup-distances")->capture_default_str();
      tolerance_opts.emplace_back(sub, sub->add_option("--tolerance", tolerance, "Fail above this sup-distance"));
    }
    if (name == "mixing" || name == "cutoff-sweep") {
      sub->add_option("--epsilon", m.epsilon, "TV level")->capture_default_str();
      sub->add_option("--chooser", m.chooser, "pilot or s-profile")->capture_default_str();
      sub->add_option("--pilot-trajectories", m.pilot_trajectories, "Pilot sample size (0: automatic)");
    }
    if (name == "cutoff-sweep") sub->add_option("--schedule", schedule, "N:lambda:regime,...");
    subs.push_back(sub);
  }
  std::string manifest_path;
  CLI::App* run_sub = app.add_subcommand("run", "Run a JSON manifest as is");
  run_sub->add_option("manifest", manifest_path, "Manifest file")->required();
  run_sub->add_option("--output-dir", output_dir, "Output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (run_sub->parsed()) {
      m = load_manifest(manifest_path);
    } else {
      for (CLI::App* sub : subs)
        if (sub->parsed()) m.experiment = sub->get_name();
      for (auto& [sub, opt] : tolerance_opts)
        if (sub->parsed() && opt->count() > 0) m.tolerance = tolerance;
      if (!schedule.empty()) m.schedule = parse_schedule(schedule);
    }
    if (!output_dir.empty()) m.output_dir = output_dir;
    const RunResult r = run(m, threads);
    std::vector<Assertion> failed;
    for (const Assertion& a : r.assertions)
      if (!a.pass) failed.push_back(a);
    std::cout << (r.output_dir / "summary.json").string() << "\n";
    if (!failed.empty()) report_failure(std::cerr, m.experiment, failed);
    return r.exit_code;
  } catch (const Error& e) {
    report_failure(std::cerr, m.experiment, {}, e.what());
    return exit_code_for(e);
  } catch (const std::exception& e) {
    report_failure(std::cerr, m.experiment, {}, e.what());
    return kExitAssertion;
  }
}

}  // namespace adjwalk::cli
