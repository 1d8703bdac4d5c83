#include <doctest.h>

#include <cmath>
#include <vector>

#include "adjwalk/error.hpp"
#include "adjwalk/hydro.hpp"
#include "adjwalk/process.hpp"
#include "adjwalk/rng.hpp"
#include "adjwalk/stats.hpp"

using namespace adjwalk;
using doctest::Approx;

namespace {

SchemeKind x_kind() { return {SchemeVariant::X, std::nullopt}; }
SchemeKind m_kind(const ModelParams& p) { return {SchemeVariant::M, mu_k_calibrate(p)}; }

GridProfile zero_profile(const ModelParams& p, double t) {
  return {std::vector<double>(static_cast<std::size_t>(p.N() + 1), 0.0), t};
}

bool time_monotone(const SchemeRun& run, double tol = 1e-12) {
  for (std::size_t f = 1; f < run.frames.size(); ++f)
    for (std::size_t k = 0; k < run.frames[f].values.size(); ++k)
      if (run.frames[f].values[k] < run.frames[f - 1].values[k] - tol) return false;
  return true;
}

}  // namespace

TEST_CASE("transform examples") {
  const ModelParams p(2, 0.6);
  const TransformT T(p);
  CHECK(T(0.0) == 1.0);
  CHECK(T(2.0) == Approx(0.0).epsilon(1e-14));
  // Hand value: -(1/2) log_4(1/a_N + 1/16) with a_N = 32/15.
  CHECK(T(1.0) == Approx(-0.5 * std::log(15.0 / 32.0 + 1.0 / 16.0) / std::log(4.0)).epsilon(1e-12));
  CHECK(T(1.0) == Approx(0.228134).epsilon(1e-6));
  CHECK_THROWS_AS(T(-0.1), Error);
  CHECK_THROWS_AS(T(2.5), Error);
  CHECK_THROWS_AS(TransformT(ModelParams(4, 0.0)), Error);
}

TEST_CASE("property: transform round trip and monotonicity") {
  Rng rng(1);
  for (auto [N, lambda] : std::vector<std::pair<int, double>>{{4, 0.3}, {64, 0.125}, {512, 0.8}, {4096, 0.5}}) {
    const ModelParams p(N, lambda);
    const TransformT T(p);
    double prev = 2.0;
    for (int i = 0; i <= 200; ++i) {
      const double u = N * i / 200.0;
      const double v = T(u);
      CHECK(v <= prev);
      prev = v;
    }
    for (int i = 0; i < 200; ++i) {
      const double u = N * rng.uniform();
      CHECK(T.inverse(T(u)) == Approx(u).epsilon(1e-10));
      // The inverse underflows once a_N r^(-fN) drops below the smallest double.
      const double f = rng.uniform();
      if (T.inverse(f) > 1e-290) CHECK(T(T.inverse(f)) == Approx(f).epsilon(1e-10));
    }
  }
}

TEST_CASE("lax_solution examples") {
  CHECK(lax_solution(0.8, 0.5) == 0.0);
  CHECK(lax_solution(0.0, 2.0) == Approx(0.5));
  CHECK(lax_solution(0.5, 4.0) == Approx(0.5));
  CHECK(lax_solution(0.2, 1.0) == Approx(0.16));
  CHECK(lax_solution(0.0, 0.0) == 0.0);
  for (int i = 0; i <= 10; ++i) CHECK(lax_solution(i / 10.0, 4.0) == Approx(1.0 - i / 10.0));
}

TEST_CASE("scheme_rhs examples") {
  const ModelParams p(16, 0.4);
  const GridProfile flat{std::vector<double>(17, 0.3), 0.0};
  for (const auto& kind : {x_kind(), m_kind(p)})
    for (double d : scheme_rhs(kind, flat, p)) CHECK(std::fabs(d) < 1e-14);
  GridProfile lin{std::vector<double>(17), 0.0};
  for (int k = 0; k <= 16; ++k) lin.values[static_cast<std::size_t>(k)] = 1.0 - k / 16.0;
  for (double d : scheme_rhs(x_kind(), lin, p)) CHECK(std::fabs(d) < 1e-12);
  GridProfile bad = flat;
  bad.values[3] = std::nan("");
  CHECK_THROWS_AS(scheme_rhs(x_kind(), bad, p), Error);
}

TEST_CASE("property: translation invariance and monotone scheme") {
  Rng rng(2);
  const ModelParams p(64, 0.2);
  const MuSchedule mu = mu_k_calibrate(p);
  for (int i = 0; i < 1000; ++i) {
    const double x = rng.uniform(), z = x - 0.05 * rng.uniform();
    const double y = x - 0.05 * rng.uniform();
    const double a = rng.uniform() - 0.5;
    const int k = 1 + static_cast<int>(rng.uniform() * 62);
    const double hx = H_X(x, y, z, p), hm = H_M(x, y, z, k, p, mu);
    CHECK(H_X(x + a, y + a, z + a, p) == Approx(hx).epsilon(1e-9).scale(1.0));
    CHECK(H_M(x + a, y + a, z + a, k, p, mu) == Approx(hm).epsilon(1e-9).scale(1.0));
    const double e = 1e-6;
    CHECK(H_X(x + e, y, z, p) <= hx + 1e-12);
    CHECK(H_X(x, y, z + e, p) <= hx + 1e-12);
    CHECK(H_M(x + e, y, z, k, p, mu) <= hm + 1e-12);
    CHECK(H_M(x, y, z + e, k, p, mu) <= hm + 1e-12);
    CHECK(H_naive(x + e, y, z, p) <= H_naive(x, y, z, p) + 1e-9);
  }
}

TEST_CASE("scheme consistency with the Hamiltonian p + p^2") {
  // phi(x) = -x/2 - x^2/8 on the interior point x = 0.4.
  const auto phi = [](double x) { return -x / 2 - x * x / 8; };
  const double x = 0.4, dphi = -0.5 - x / 4;
  double prev = 1e9;
  for (int N : {64, 128, 256}) {
    const double lambda = 1.0 / std::sqrt(N);
    const ModelParams p(N, lambda);
    const double h = 1.0 / N;
    const double err = std::fabs(H_X(phi(x - h), phi(x), phi(x + h), p) - (dphi + dphi * dphi));
    CHECK(err < prev);
    CHECK(err <= 2.0 * (lambda + 1.0 / (N * lambda)));
    prev = err;
  }
}

TEST_CASE("integrate_scheme examples") {
  const ModelParams p(16, 0.5);
  const double dt = 0.1 * p.lambda() / p.N();
  const auto init = scheme_initial(x_kind(), p);
  const auto still = integrate_scheme(x_kind(), init, p, 0.0, dt, 1.0);
  REQUIRE(still.frames.size() == 1);
  CHECK(still.frames[0].values == init.values);
  CHECK_THROWS_AS(integrate_scheme(x_kind(), init, p, 1.0, 2 * dt, 1.0), Error);

  const auto run = integrate_scheme(x_kind(), init, p, 4.0, dt, 0.5);
  CHECK(time_monotone(run));
  for (const auto& fr : run.frames) {
    if (fr.time == 1.0 || fr.time == 2.0 || fr.time == 4.0) {
      const auto ex = exact_fX(p, fr.time);
      for (std::size_t k = 0; k < 17; ++k) CHECK(std::fabs(ex.values[k] - fr.values[k]) < 1e-6);
    }
  }
  CHECK(run.frames.back().time == Approx(4.0));

  const auto mk = m_kind(p);
  const auto mrun = integrate_scheme(mk, scheme_initial(mk, p), p, 2.0, dt, 0.25);
  CHECK(time_monotone(mrun));
}

TEST_CASE("integrate_scheme flags instability") {
  // Alternating 0/1 data is far outside the scheme's Lipschitz scale even at the admissible step.
  const ModelParams p(8, 0.5);
  GridProfile rough{std::vector<double>(9, 0.0), 0.0};
  for (std::size_t k = 0; k < 9; k += 2) rough.values[k] = 1.0;
  try {
    integrate_scheme(x_kind(), rough, p, 0.1, 0.1 * 0.5 / 8, 0.1);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::StepTooLarge);
  }
}

TEST_CASE("exact_fX examples and a priori bounds") {
  const ModelParams p(32, 0.25);
  const auto f0 = exact_fX(p, 0.0);
  CHECK(f0.values[0] == Approx(1.0));
  for (std::size_t k = 1; k <= 32; ++k) CHECK(f0.values[k] == Approx(0.0).scale(1.0).epsilon(1e-9));
  for (double t : {0.25, 0.5, 1.0, 2.0, 3.0, 4.0, 6.0}) {
    const auto f = exact_fX(p, t);
    for (int k = 0; k <= 32; ++k) {
      CHECK(f.values[static_cast<std::size_t>(k)] >= -1e-12);
      CHECK(f.values[static_cast<std::size_t>(k)] <= 1.0 - k / 32.0 + 1e-9);
    }
  }
  CHECK(sup_distance(exact_fX(ModelParams(256, 1.0 / 16), 4.0), 0.1) < 0.1);
}

TEST_CASE("exact_fX equals T of the simulated mean") {
  const ModelParams p(16, 0.5);
  const SiteKernel kernel(p);
  const TransformT T(p);
  const double t = 1.0;
  const int n = 4000;
  std::vector<std::vector<double>> cols(17);
  for (int i = 0; i < n; ++i) {
    Rng rng = seed_stream(3, static_cast<std::uint64_t>(i));
    const auto c = simulate_X(kernel, max_configuration(16), t * 16 / 0.5, rng);
    for (std::size_t k = 0; k < 17; ++k) cols[k].push_back(c.x[k]);
  }
  const auto ex = exact_fX(p, t);
  for (std::size_t k = 1; k < 16; ++k) {
    const auto ms = stats::mean_se(cols[k]);
    // T is decreasing: the band maps to [T(m + 4se), T(m - 4se)].
    const double hi = T(std::clamp(ms.mean - 4 * ms.se, 0.0, 16.0));
    const double lo = T(std::clamp(ms.mean + 4 * ms.se, 0.0, 16.0));
    CHECK(ex.values[k] >= lo - 1e-12);
    CHECK(ex.values[k] <= hi + 1e-12);
  }
}

TEST_CASE("comparison_check") {
  const ModelParams p(32, 0.25);
  const double dt = 0.1 * p.lambda() / p.N();
  const auto run = integrate_scheme(x_kind(), scheme_initial(x_kind(), p), p, 3.0, dt, 0.5);
  CHECK(comparison_check(run.frames, run.frames).pass);

  std::vector<GridProfile> zeros, vx;
  for (const auto& fr : run.frames) {
    zeros.push_back(zero_profile(p, fr.time));
    vx.push_back(super_solution_X(p, fr.time));
  }
  CHECK(comparison_check(zeros, run.frames).pass);
  CHECK(comparison_check(run.frames, vx).pass);
  const auto wrong = comparison_check(vx, run.frames);
  CHECK_FALSE(wrong.pass);
  CHECK(wrong.site >= 1);
  CHECK(wrong.excess > 0.0);

  const auto mk = m_kind(p);
  const auto mrun = integrate_scheme(mk, scheme_initial(mk, p), p, 3.0, dt, 0.5);
  std::vector<GridProfile> vm, mzeros;
  for (const auto& fr : mrun.frames) {
    vm.push_back(super_solution_M(p, fr.time));
    mzeros.push_back(zero_profile(p, fr.time));
  }
  CHECK(comparison_check(mrun.frames, vm).pass);
  CHECK(comparison_check(mzeros, mrun.frames).pass);

  std::vector<GridProfile> shifted = run.frames;
  shifted.back().time += 0.1;
  CHECK_THROWS_AS(comparison_check(run.frames, shifted), Error);
}

TEST_CASE("sub-solution barrier stays below both schemes") {
  const ModelParams p(64, 0.25);
  const double dt = 0.1 * p.lambda() / p.N();
  for (const auto& kind : {x_kind(), m_kind(p)}) {
    const double C = calibrate_barrier_constant(kind, p, 3.9, 0.05);
    CHECK(std::isfinite(C));
    CHECK(C >= 0.0);
    const auto run = integrate_scheme(kind, scheme_initial(kind, p), p, 3.9, dt, 0.1);
    std::vector<GridProfile> barrier;
    for (const auto& fr : run.frames) barrier.push_back(sub_solution_barrier(p, fr.time, C));
    const auto res = comparison_check(barrier, run.frames, 1e-9);
    CHECK(res.pass);
  }
  CHECK_THROWS_AS(sub_solution_barrier(p, 4.0, 1.0), Error);
}

TEST_CASE("naive barriers") {
  const ModelParams p(512, 0.8);
  const auto [lo0, hi0] = barrier_profiles_naive(p, 0.0);
  for (double v : lo0.values) CHECK(v <= 1.0);
  for (double t : {0.0, 0.25, 0.5, 0.75}) {
    const auto [lo, hi] = barrier_profiles_naive(p, t);
    CHECK(lo.values.front() <= 1e-12);
    CHECK(hi.values.back() >= 1.0);
    const auto u = naive_mean_profile(p, t);
    for (std::size_t k = 0; k <= 512; ++k) {
      CHECK(lo.values[k] <= u.values[k] + 1e-12);
      CHECK(u.values[k] <= hi.values[k] + 1e-12);
    }
  }
}

TEST_CASE("naive front") {
  const ModelParams p(512, 0.8);
  const std::vector<double> xs{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
  SUBCASE("t = 0 is the max profile") {
    const auto rep = naive_front(p, 0.0, xs, 4, 1);
    for (double g : rep.mean_g) CHECK(g == Approx(1.0));
    CHECK(rep.regime_ok);
  }
  SUBCASE("t = 0.5: sharp step near x = 0.5") {
    const auto rep = naive_front(p, 0.5, xs, 60, 2);
    int good = 0;
    for (const auto& g : rep.g) good += (g[3] <= 0.05 && g[5] >= 0.95);
    CHECK(good >= 57);
    CHECK(rep.step_location == Approx(0.5).epsilon(0.25));
    CHECK(rep.sharpness < 0.2);
  }
  SUBCASE("after t = 1 the front has left") {
    const auto rep = naive_front(p, 1.5, xs, 20, 3);
    for (double g : rep.mean_g) CHECK(g <= 0.05);
  }
  CHECK_FALSE(naive_front(ModelParams(16, 0.5), 0.1, xs, 2, 4).regime_ok);
}

TEST_CASE("pde residual of the Lax solution") {
  const std::vector<std::pair<double, double>> flat{{0.7, 3.9 + 0.1}, {0.9, 4.5}, {0.3, 5.0}};
  CHECK(pde_residual_S(flat, 1e-4) <= 1e-9);
  const std::vector<std::pair<double, double>> curved{{0.2, 1.0}, {0.1, 0.5}, {0.5, 2.0}, {0.3, 3.0}};
  CHECK(pde_residual_S(curved, 1e-4) <= 1e-6);
  const auto pts = smooth_points(1000, 0.01, 0.05, 6.0, 5);
  REQUIRE(pts.size() == 1000);
  const double r1 = pde_residual_S(pts, 1e-4), r2 = pde_residual_S(pts, 5e-5);
  CHECK(r1 <= 1e-6);
  CHECK(r2 <= r1);
  // The quadratic branch is itself a quadratic form over t, so the scaling check uses a point with
  // nonzero third derivatives.
  const std::vector<std::pair<double, double>> one{{0.1, 0.3}};
  const double e1 = pde_residual_S(one, 1e-2), e2 = pde_residual_S(one, 5e-3);
  CHECK(e1 > 0.0);
  CHECK(e1 / e2 == Approx(4.0).epsilon(0.1));
}

TEST_CASE("empirical transformed profile") {
  const ModelParams p(64, 0.3);
  const auto at0 = empirical_transformed_profile(p, 0.0, 4, 6);
  CHECK(at0.mean_TX[0] == Approx(1.0));
  for (std::size_t k = 1; k <= 64; ++k) CHECK(at0.mean_TX[k] == Approx(0.0).scale(1.0).epsilon(1e-9));
  CHECK(at0.regime_ok);

  const auto prof = empirical_transformed_profile(p, 1.0, 200, 7);
  CHECK(prof.dominated >= 198);
  for (std::size_t k = 0; k <= 64; ++k) {
    CHECK(prof.mean_TX[k] <= prof.mean_TM[k] + 4 * (prof.se_TX[k] + prof.se_TM[k]) + 1e-12);
    // T is convex, so T of the mean sits below the mean of T.
    CHECK(prof.T_meanX[k] <= prof.mean_TX[k] + 1e-12);
  }
  CHECK(std::isfinite(prof.sup_distance));
}
