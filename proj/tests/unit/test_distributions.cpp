#include <doctest.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

#include "adjwalk/distributions.hpp"
#include "adjwalk/error.hpp"
#include "adjwalk/model.hpp"
#include "adjwalk/rng.hpp"
#include "adjwalk/special.hpp"
#include "adjwalk/stats.hpp"
#include "support/oracles.hpp"

using namespace adjwalk;
using doctest::Approx;

TEST_CASE("beta_pdf reference values") {
  CHECK(beta_pdf({{1, 1}, 0, 1}, 0.3) == Approx(1.0));
  CHECK(beta_pdf({{2, 2}, 0, 1}, 0.5) == Approx(1.5).epsilon(1e-13));
  CHECK(beta_pdf({{1, 1}, 0, 1}, 1.2) == 0.0);
  CHECK(beta_pdf({{3, 5}, 2, 4}, 2.7) == Approx(oracle::beta_density(3, 5, 2, 4, 2.7)).epsilon(1e-12));
  // Large shapes go through the Stirling-corrected path.
  CHECK(beta_pdf({{40, 70}, 0, 1}, 0.37) == Approx(oracle::beta_density(40, 70, 0, 1, 0.37)).epsilon(1e-10));
  CHECK_THROWS_AS(beta_pdf({{1, 1}, 0, 1}, std::nan("")), Error);
}

TEST_CASE("beta_cdf reference values") {
  CHECK(beta_cdf({{1, 1}, 0, 1}, 0.25) == Approx(0.25));
  CHECK(beta_cdf({{2, 1}, 0, 1}, 0.5) == Approx(0.25));
  CHECK(beta_cdf({{2.5, 4}, 0, 1}, 1.0) == 1.0);
  CHECK(beta_cdf({{2.5, 4}, 0, 1}, 0.0) == 0.0);
  CHECK(beta_cdf({{3, 5}, 1, 3}, 1.6) == Approx(oracle::beta_cdf(3, 5, 0.3)).epsilon(1e-10));
  CHECK(beta_sf({{3, 5}, 1, 3}, 1.6) + beta_cdf({{3, 5}, 1, 3}, 1.6) == Approx(1.0));
}

TEST_CASE("interval betas integrate to one") {
  for (auto [a, b, l, r] : std::vector<std::array<double, 4>>{{1, 1, 0, 1}, {2, 3, -1, 2}, {7.5, 1.5, 3, 3.5},
                                                                 {30, 60, 10, 40}}) {
    const double mass = oracle::integrate([&](double u) { return beta_pdf({{a, b}, l, r}, u); }, l, r, 256);
    CHECK(mass == Approx(1.0).epsilon(1e-10));
  }
}

TEST_CASE("constructors validate their inputs") {
  CHECK_THROWS_AS(make_beta(0.0, 1.0), Error);
  CHECK_THROWS_AS(make_beta(1.0, INFINITY), Error);
  CHECK_THROWS_AS(make_interval_beta({1, 1}, 1.0, 1.0), Error);
  CHECK_NOTHROW(make_interval_beta({1, 1}, 0.0, 1.0));
  CHECK_THROWS_AS(GammaSampler(-0.1), Error);
}

TEST_CASE("property: numerical derivative of the cdf matches the pdf") {
  Rng rng(11);
  const std::vector<BetaParams> sets{{1.5, 2.5}, {4, 9}, {20, 12}, {1, 3}};
  for (const auto& ps : sets) {
    const IntervalBeta d{ps, 0.0, 1.0};
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
      const double u = 0.05 + 0.9 * rng.uniform();
      const double h = 1e-5;
      const double deriv = (beta_cdf(d, u + h) - beta_cdf(d, u - h)) / (2 * h);
      worst = std::max(worst, std::fabs(deriv - beta_pdf(d, u)) / std::max(1.0, beta_pdf(d, u)));
    }
    CHECK(worst < 1e-6);
  }
}

TEST_CASE("property: sample moments match a/(a+b) and the beta variance") {
  Rng pick(5);
  for (int rep = 0; rep < 20; ++rep) {
    const double a = 1.0 + 20.0 * pick.uniform(), b = 1.0 + 20.0 * pick.uniform();
    Rng rng(100 + rep);
    const std::size_t n = 20000;
    std::vector<double> xs(n);
    for (auto& x : xs) x = sample_beta({a, b}, rng);
    const auto m = stats::mean_se(xs);
    const double mean = a / (a + b);
    const double var = a * b / ((a + b) * (a + b) * (a + b + 1));
    CHECK(std::fabs(m.mean - mean) < 4 * std::sqrt(var / n));
    // SE of the sample variance from the empirical fourth central moment.
    double m4 = 0.0;
    for (double x : xs) m4 += std::pow(x - m.mean, 4);
    m4 /= n;
    CHECK(std::fabs(m.variance - var) < 4 * std::sqrt((m4 - var * var) / n));
  }
}

TEST_CASE("Beta(alpha_k, alpha_k+1) has mean (1 - lambda)/2") {
  const ModelParams p(16, 0.3);
  Rng rng(3);
  for (int k : {1, 5, 10}) {
    std::vector<double> xs(20000);
    for (auto& x : xs) x = sample_beta({p.alpha(k), p.alpha(k + 1)}, rng);
    const auto m = stats::mean_se(xs);
    CHECK(std::fabs(m.mean - 0.35) < 4 * m.se);
  }
  Rng r2(4);
  std::vector<double> us(20000);
  for (auto& u : us) u = sample_beta({1, 1}, r2);
  const auto m = stats::mean_se(us);
  CHECK(std::fabs(m.mean - 0.5) < 4 * m.se);
}

TEST_CASE("sampler stays exact for astronomically large shapes") {
  // Shapes near e^60: spread ~ e^-30, centred on a/(a+b).
  const double la = 60.0, lb = 60.0 + std::log(1.5);
  const BetaSampler s(la, lb);
  Rng rng(9);
  std::vector<double> z(5000);
  const double mean = 1.0 / 2.5;
  const double sd = std::sqrt(1.5 / (2.5 * 2.5 * 2.5)) * std::exp(-0.5 * la);
  for (auto& v : z) v = (s(rng) - mean) / sd;
  const auto m = stats::mean_se(z);
  CHECK(std::fabs(m.mean) < 0.1);
  CHECK(m.variance == Approx(1.0).epsilon(0.1));
  // Past e^690 the sampler returns the mean.
  const BetaSampler huge(700.0, 700.0);
  CHECK(huge(rng) == Approx(0.5));
}

TEST_CASE("KS check of the gamma-ratio sampler") {
  Rng rng(21);
  for (const BetaParams ps : {BetaParams{1, 1}, BetaParams{2.5, 7}, BetaParams{50, 3}}) {
    std::vector<double> xs(20000);
    for (auto& x : xs) x = sample_beta(ps, rng);
    const auto ks = stats::ks_test(xs, [&](double u) { return special::inc_beta(ps.a, ps.b, u); });
    CHECK(ks.p_value > 0.001);
  }
}

TEST_CASE("density_crossing examples") {
  CHECK_THROWS_AS(density_crossing({{2, 2}, 0, 1}, {{2, 2}, 0, 1}), Error);
  try {
    density_crossing({{2, 2}, 0, 1}, {{2, 2}, 0, 1});
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::DegenerateEqual);
  }
  try {
    density_crossing({{2, 2}, 0, 1}, {{2, 2}, 2, 3});
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NoOverlap);
  }
  CHECK(density_crossing({{1, 1}, 0, 1}, {{1, 1}, 0.5, 1.5}) == Approx(0.75));
  // Beta(2,2) on [0,1] vs [0.2,1.2]: u(1-u) = (u-0.2)(1.2-u) gives u = 0.6.
  CHECK(density_crossing({{2, 2}, 0, 1}, {{2, 2}, 0.2, 1.2}) == Approx(0.6).epsilon(1e-12));
}

TEST_CASE("tv_interval_betas examples and oracle") {
  CHECK(tv_interval_betas({{2, 3}, 0, 1}, {{2, 3}, 0, 1}) == 0.0);
  CHECK(tv_interval_betas({{2, 3}, 0, 1}, {{2, 3}, 1, 2}) == 1.0);
  CHECK(tv_interval_betas({{1, 1}, 0, 1}, {{1, 1}, 0.5, 1.5}) == Approx(0.5));
  // F(0.6) - G(0.6) for Beta(2,2): 0.648 - 0.352.
  CHECK(tv_interval_betas({{2, 2}, 0, 1}, {{2, 2}, 0.2, 1.2}) == Approx(0.296).epsilon(1e-12));
  CHECK(tv_interval_betas({{3, 5}, 0, 1}, {{3, 5}, 0.1, 1.3}) ==
        Approx(oracle::tv_quadrature(3, 5, 0, 1, 0.1, 1.3)).epsilon(1e-9));
}

TEST_CASE("property: single crossing and TV range on random ordered pairs") {
  Rng rng(77);
  for (int rep = 0; rep < 100; ++rep) {
    const double a = 1.0 + 8.0 * rng.uniform(), b = 1.0 + 8.0 * rng.uniform();
    const double ll = rng.uniform(), lr = ll + 0.2 + rng.uniform();
    const double ul = ll + 0.5 * (lr - ll) * rng.uniform(), ur = lr + rng.uniform();
    const IntervalBeta lo{{a, b}, ll, lr}, up{{a, b}, ul, ur};
    int changes = 0;
    int prev = 0;
    for (int i = 1; i < 10000; ++i) {
      const double u = ul + (lr - ul) * i / 10000.0;
      const double d = beta_pdf(lo, u) - beta_pdf(up, u);
      const int sgn = (d > 1e-12) - (d < -1e-12);
      if (sgn != 0 && prev != 0 && sgn != prev) ++changes;
      if (sgn != 0) prev = sgn;
    }
    CHECK(changes <= 1);
    const double tv = tv_interval_betas(lo, up);
    CHECK(tv > 0.0);
    CHECK(tv <= 1.0);
  }
}

TEST_CASE("log_density_ratio keeps its sign for huge shapes") {
  // Shapes ~5e27 and intervals offset by ~1e-7: the lower mean sits far in the upper law's left
  // tail, so the log ratio there is about -1.9e12.
  const double a = std::exp(125 * std::log(5.0 / 3.0)), b = a * 5.0 / 3.0;
  const IntervalBeta lo{{a, b}, 27.648000013008474, 76.80000000791199};
  const IntervalBeta up{{a, b}, 27.648000482595801, 76.800000258090648};
  const double v = log_density_ratio(lo, up, 46.080000011097241);
  CHECK(v < -1e12);
}

TEST_CASE("check_tail_domination examples") {
  std::vector<double> probes;
  for (int i = 1; i <= 9; ++i) probes.push_back(0.1 * i);
  const auto r1 = check_tail_domination(1, 3, probes);
  CHECK(std::isfinite(r1.ratio_max));
  CHECK(r1.ratio_max < 10);
  for (double v : r1.lhs) CHECK((v >= 0.0 && v <= 1.0));
  const auto r2 = check_tail_domination(4, 100, probes);
  CHECK(std::isfinite(r2.ratio_max));
  CHECK_THROWS_AS(check_tail_domination(3, 1, probes), Error);
}

TEST_CASE("check_left_tail examples") {
  const ModelParams big(64, 0.2);
  CHECK(check_left_tail(5, big, 1e6) == 0.0);
  // lambda = 0: U_0 ~ Beta(1,1); threshold 1/2 - C log N = 0.25.
  const ModelParams flat(4, 0.0);
  const double C = 0.25 / std::log(4.0);
  CHECK(check_left_tail(0, flat, C) == Approx(0.25).epsilon(1e-12));
}

TEST_CASE("max density grows like r^(k/2)") {
  const ModelParams p(40, 0.3);
  std::vector<double> scaled;
  for (int k = 2; k < 40; ++k) {
    const double m = beta_max_density({p.alpha(k), p.alpha(k + 1)});
    scaled.push_back(m / std::exp(0.5 * k * p.log_r()));
  }
  const auto [lo, hi] = std::minmax_element(scaled.begin(), scaled.end());
  CHECK(*lo > 0.0);
  CHECK(*hi / *lo < 3.0);
}

TEST_CASE("concentrated laws sharing a right endpoint are nearly disjoint") {
  // Both densities vanish at 32; the crossing must come from the limit of the ratio there.
  const BetaParams sh{1.16241e8, 2.15876e8};
  const IntervalBeta lo{sh, 9.2792018506347524, 32}, up{sh, 31.989102959427218, 32};
  const double s = density_crossing(lo, up);
  CHECK(s > 17.3);
  CHECK(s < 31.99);
  CHECK(tv_interval_betas(lo, up) == Approx(1.0));
  // Mirror image: shared left endpoint.
  const IntervalBeta lo2{sh, 0.0, 0.010897040572782}, up2{sh, 0.0, 22.720798149365248};
  CHECK(tv_interval_betas(lo2, up2) == Approx(1.0));
}
