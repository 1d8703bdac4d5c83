#include "adjwalk/coupling.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>

#include "adjwalk/error.hpp"

namespace adjwalk {

namespace {

std::atomic<std::uint64_t> g_order_violations{0};

constexpr double kInf = std::numeric_limits<double>::infinity();

double place(double left, double right, double u) {
  const double v = left + u * (right - left);
  return v < right ? v : right;
}

// Rejection samplers for the three parts. `unit` returns Beta(a, b) draws on [0, 1].
template <class Unit>
double nu_lower(const IntervalBeta& lo, const IntervalBeta& up, Unit&& unit, Rng& rng) {
  for (std::uint64_t i = 0; i < kRejectionBudget; ++i) {
    const double y = place(lo.left, lo.right, unit());
    if (std::log(rng.uniform()) > log_density_ratio(lo, up, y)) return y;
  }
  throw Error(ErrorKind::RejectionBudgetExceeded, "nu_1 proposal budget exhausted");
}

template <class Unit>
double nu_upper(const IntervalBeta& lo, const IntervalBeta& up, Unit&& unit, Rng& rng) {
  for (std::uint64_t i = 0; i < kRejectionBudget; ++i) {
    const double w = place(up.left, up.right, unit());
    if (std::log(rng.uniform()) > -log_density_ratio(lo, up, w)) return w;
  }
  throw Error(ErrorKind::RejectionBudgetExceeded, "nu_3 proposal budget exhausted");
}

template <class Unit>
double nu_shared(const IntervalBeta& lo, const IntervalBeta& up, Unit&& unit, Rng& rng) {
  for (std::uint64_t i = 0; i < kRejectionBudget; ++i) {
    const double w = place(up.left, up.right, unit());
    if (std::log(rng.uniform()) <= -log_density_ratio(lo, up, w)) return w;
  }
  throw Error(ErrorKind::RejectionBudgetExceeded, "nu_2 proposal budget exhausted");
}

void note_violation(CouplingCounters* counters) {
  g_order_violations.fetch_add(1, std::memory_order_relaxed);
  if (counters != nullptr) ++counters->order_violations;
}

// Value of a follower copy X <= top at site k, given the top draw w on [tl, tr] and the shared
// uniform. log_v is evaluated lazily (NaN until first use).
template <class Unit>
double follow(const BetaParams& shapes, double tl, double tr, double w, double xl, double xr, double& log_v,
              Unit&& unit, Rng& rng) {
  if (xl == tl && xr == tr) return w;
  if (nearly_identical(xl, xr, tl, tr)) return std::min(w, xr);
  if (xl == xr) return xl;
  if (tl == tr || xr <= tl) return place(xl, xr, unit());
  const IntervalBeta lo{shapes, xl, xr};
  const IntervalBeta up{shapes, tl, tr};
  if (std::isnan(log_v)) log_v = std::log(rng.uniform());
  if (log_v <= -log_density_ratio(lo, up, w)) return w;
  return nu_lower(lo, up, unit, rng);
}

}  // namespace

bool nearly_identical(double l1, double r1, double l2, double r2) {
  const double scale = std::max(std::fabs(r1), std::fabs(r2));
  const double tol = 64.0 * std::numeric_limits<double>::epsilon() * scale;
  return std::fabs(l1 - l2) <= tol && std::fabs(r1 - r2) <= tol && std::max(l1, l2) <= std::min(r1, r2);
}

double sample_nu(Nu which, const IntervalBeta& lower, const IntervalBeta& upper, Rng& rng) {
  require(lower.params.a == upper.params.a && lower.params.b == upper.params.b,
          "interval betas must share their shapes");
  require(lower.left <= upper.left && lower.right <= upper.right, "interval endpoints must be ordered");
  const BetaSampler base(std::log(lower.params.a), std::log(lower.params.b));
  auto unit = [&] { return base(rng); };
  switch (which) {
    case Nu::Lower:
      return nu_lower(lower, upper, unit, rng);
    case Nu::Upper:
      return nu_upper(lower, upper, unit, rng);
    case Nu::Shared:
      break;
  }
  return nu_shared(lower, upper, unit, rng);
}

CoupledState make_coupled_state(Configuration upper, Configuration lower) {
  validate(upper);
  validate(lower);
  require(upper.N() == lower.N(), "coupled copies must have the same N");
  CoupledState s{std::move(upper), std::move(lower), {}, 0, false};
  const auto n = s.upper.x.size();
  s.merged_sites.assign(n, 1);
  for (std::size_t k = 0; k < n; ++k) {
    require(s.lower.x[k] <= s.upper.x[k], "coupled copies must be ordered lower <= upper");
    if (s.lower.x[k] != s.upper.x[k]) {
      s.merged_sites[k] = 0;
      ++s.unmerged;
    }
  }
  s.fully_merged = s.unmerged == 0;
  return s;
}

bool coupled_resample(CoupledState& s, int k, const SiteKernel& kernel, Rng& rng, MergeRule rule,
                      CouplingCounters* counters) {
  double* up = s.upper.x.data();
  double* lo = s.lower.x.data();
  const double ul = up[k - 1], ur = up[k + 1], ll = lo[k - 1], lr = lo[k + 1];
  const BetaParams& shapes = kernel.shapes(k);
  auto unit = [&] { return kernel.draw(k, rng); };
  if (counters != nullptr) ++counters->events;

  for (;;) {
    try {
      if (rule == MergeRule::SharedProposal || (ul == ll && ur == lr) || nearly_identical(ll, lr, ul, ur) ||
          ll == lr || ul == ur || lr <= ul) {
        const double w = place(ul, ur, unit());
        double log_v = std::numeric_limits<double>::quiet_NaN();
        up[k] = w;
        lo[k] = follow(shapes, ul, ur, w, ll, lr, log_v, unit, rng);
      } else {
        const IntervalBeta lower{shapes, ll, lr};
        const IntervalBeta upper{shapes, ul, ur};
        const double p = 1.0 - tv_interval_betas(lower, upper);
        if (rng.uniform() < p) {
          up[k] = lo[k] = nu_shared(lower, upper, unit, rng);
        } else {
          lo[k] = nu_lower(lower, upper, unit, rng);
          up[k] = nu_upper(lower, upper, unit, rng);
        }
      }
      break;
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::RejectionBudgetExceeded) throw;
      if (counters != nullptr) ++counters->retries;
    }
  }

  if (lo[k] > up[k]) note_violation(counters);
  const bool now = lo[k] == up[k];
  const bool was = s.merged_sites[static_cast<std::size_t>(k)] != 0;
  if (now != was) {
    s.merged_sites[static_cast<std::size_t>(k)] = now ? 1 : 0;
    s.unmerged += now ? -1 : 1;
    s.fully_merged = s.unmerged == 0;
  }
  return now;
}

CoalescenceRecord simulate_coupled(const SiteKernel& kernel, Configuration upper0, Configuration lower0,
                                   double t_end, Rng& rng, MergeRule rule, const CoupledObserver* observer) {
  const int N = kernel.params().N();
  require(upper0.N() == N && lower0.N() == N, "configuration size does not match N");
  require(t_end >= 0.0, "t_end must be nonnegative");
  for (int k = 1; k < N; ++k) {
    const BetaParams& sh = kernel.shapes(k);
    require(std::isfinite(sh.a) && std::isfinite(sh.b), "coupled runs need finite shapes");
  }
  if (observer != nullptr) {
    require(std::is_sorted(observer->times.begin(), observer->times.end()), "observer times must be sorted");
    require(static_cast<bool>(observer->callback), "observer needs a callback");
  }
  CoupledState s = make_coupled_state(std::move(upper0), std::move(lower0));
  CoalescenceRecord rec;
  rec.site_first_merge.assign(static_cast<std::size_t>(N + 1), 0.0);
  for (int k = 0; k <= N; ++k)
    if (!s.merged_sites[static_cast<std::size_t>(k)]) rec.site_first_merge[static_cast<std::size_t>(k)] = kInf;
  if (s.fully_merged) {
    rec.merged = true;
    rec.merge_time = 0.0;
  }

  std::size_t next_obs = 0;
  auto pending = [&] {
    return observer != nullptr && next_obs < observer->times.size() && observer->times[next_obs] <= t_end;
  };
  const EventSchedule clock(N);
  double t = 0.0;
  for (;;) {
    if (s.fully_merged && !pending()) break;
    t += clock.next_gap(rng);
    while (pending() && observer->times[next_obs] < t) {
      observer->callback(next_obs, s);
      ++next_obs;
    }
    if (t > t_end) break;
    const int k = clock.next_site(rng);
    const bool was = s.merged_sites[static_cast<std::size_t>(k)] != 0;
    if (coupled_resample(s, k, kernel, rng, rule, &rec.counters) && !was) {
      double& first = rec.site_first_merge[static_cast<std::size_t>(k)];
      if (first == kInf) first = t;
      if (s.fully_merged && !rec.merged) {
        rec.merged = true;
        rec.merge_time = t;
      }
    }
  }
  return rec;
}

QDiagnostic q_diagnostic(const CoupledState& s, int k, const ModelParams& p) {
  const int N = s.upper.N();
  require(k >= 1 && k <= N - 1, "site must lie in [1, N-1]");
  const double ul = s.upper[k - 1], ur = s.upper[k + 1], ll = s.lower[k - 1], lr = s.lower[k + 1];
  QDiagnostic d;
  const double lam = p.lambda();
  d.Q = ((1.0 - lam) * (ur - lr) + (1.0 + lam) * (ul - ll)) / 2.0 / std::max(ur - ul, lr - ll);
  if (ul == ll && ur == lr) {
    d.q = 0.0;
  } else if (ll == lr || ul == ur) {
    d.q = 1.0;
  } else {
    const BetaParams shapes = make_beta(p.alpha(k), p.alpha(k + 1));
    d.q = tv_interval_betas({shapes, ll, lr}, {shapes, ul, ur});
  }
  if (!(d.Q > 0.0)) {
    d.Q = 0.0;
    d.anomaly = d.q > 0.0;
    d.ratio = d.anomaly ? kInf : 0.0;
  } else {
    d.ratio = d.q / (std::exp(0.5 * k * p.log_r()) * d.Q);
  }
  return d;
}

TripleState make_triple_state(Configuration top, Configuration mid, Configuration ref) {
  validate(top);
  validate(mid);
  validate(ref);
  require(mid.N() == top.N() && ref.N() == top.N(), "triple copies must have the same N");
  TripleState s{std::move(top), std::move(mid), std::move(ref), 0, 0};
  for (std::size_t k = 0; k < s.top.x.size(); ++k) {
    require(s.mid.x[k] <= s.top.x[k] && s.ref.x[k] <= s.top.x[k], "triple copies must lie below top");
    s.unmerged_mid += s.mid.x[k] != s.top.x[k];
    s.unmerged_ref += s.ref.x[k] != s.top.x[k];
  }
  return s;
}

void triple_resample(TripleState& s, int k, const SiteKernel& kernel, Rng& rng, CouplingCounters* counters) {
  double* top = s.top.x.data();
  double* mid = s.mid.x.data();
  double* ref = s.ref.x.data();
  const double tl = top[k - 1], tr = top[k + 1];
  const BetaParams& shapes = kernel.shapes(k);
  auto unit = [&] { return kernel.draw(k, rng); };
  if (counters != nullptr) ++counters->events;

  const bool mid_was = mid[k] == top[k];
  const bool ref_was = ref[k] == top[k];
  double w = 0.0, m = 0.0, f = 0.0;
  for (;;) {
    try {
      w = place(tl, tr, unit());
      double log_v = std::numeric_limits<double>::quiet_NaN();
      m = follow(shapes, tl, tr, w, mid[k - 1], mid[k + 1], log_v, unit, rng);
      f = follow(shapes, tl, tr, w, ref[k - 1], ref[k + 1], log_v, unit, rng);
      break;
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::RejectionBudgetExceeded) throw;
      if (counters != nullptr) ++counters->retries;
    }
  }
  top[k] = w;
  mid[k] = m;
  ref[k] = f;
  if (m > w || f > w) note_violation(counters);
  s.unmerged_mid += static_cast<int>(mid_was) - static_cast<int>(m == w);
  s.unmerged_ref += static_cast<int>(ref_was) - static_cast<int>(f == w);
}

TripleRecord simulate_triple(const SiteKernel& kernel, Configuration mid0, Configuration ref0, double t_end,
                             Rng& rng, const TripleObserver* observer) {
  const int N = kernel.params().N();
  require(mid0.N() == N && ref0.N() == N, "configuration size does not match N");
  require(t_end >= 0.0, "t_end must be nonnegative");
  for (int k = 1; k < N; ++k) {
    const BetaParams& sh = kernel.shapes(k);
    require(std::isfinite(sh.a) && std::isfinite(sh.b), "coupled runs need finite shapes");
  }
  if (observer != nullptr) {
    require(std::is_sorted(observer->times.begin(), observer->times.end()), "observer times must be sorted");
    require(static_cast<bool>(observer->callback), "observer needs a callback");
  }
  TripleState s = make_triple_state(max_configuration(N), std::move(mid0), std::move(ref0));
  TripleRecord rec;
  if (s.unmerged_mid == 0) rec.merge_time_mid = 0.0;
  if (s.unmerged_ref == 0) rec.merge_time_ref = 0.0;

  std::size_t next_obs = 0;
  auto pending = [&] {
    return observer != nullptr && next_obs < observer->times.size() && observer->times[next_obs] <= t_end;
  };
  const EventSchedule clock(N);
  double* top = s.top.x.data();
  double t = 0.0;
  for (;;) {
    const bool merged = s.unmerged_mid == 0 && s.unmerged_ref == 0;
    if (merged && !pending()) break;
    t += clock.next_gap(rng);
    while (pending() && observer->times[next_obs] < t) {
      observer->callback(next_obs, s);
      ++next_obs;
    }
    if (t > t_end) break;
    const int k = clock.next_site(rng);
    if (merged) {
      // All three copies coincide: one ordinary update, mirrored.
      apply_resample(top, k, kernel.draw(k, rng));
      s.mid.x[static_cast<std::size_t>(k)] = s.ref.x[static_cast<std::size_t>(k)] = top[k];
      continue;
    }
    triple_resample(s, k, kernel, rng, &rec.counters);
    if (s.unmerged_mid == 0 && rec.merge_time_mid == kInf) rec.merge_time_mid = t;
    if (s.unmerged_ref == 0 && rec.merge_time_ref == kInf) rec.merge_time_ref = t;
  }
  return rec;
}

std::uint64_t total_order_violations() { return g_order_violations.load(std::memory_order_relaxed); }

}  // namespace adjwalk
