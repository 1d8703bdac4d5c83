#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "adjwalk/error.hpp"
#include "adjwalk/process.hpp"
#include "adjwalk/rng.hpp"
#include "adjwalk/spectral.hpp"
#include "support/oracles.hpp"

using namespace adjwalk;
using doctest::Approx;

namespace {

// det(A - g I) for the interior block of the mean generator, by the continuant recursion.
double characteristic(const ModelParams& p, double g) {
  const double up = p.r() / (1.0 + p.r()), down = 1.0 / (1.0 + p.r());
  double prev = 1.0, cur = -1.0 - g;
  for (int k = 2; k < p.N(); ++k) {
    const double next = (-1.0 - g) * cur - up * down * prev;
    prev = cur;
    cur = next;
  }
  return cur;
}

}  // namespace

TEST_CASE("gamma_N examples") {
  CHECK(gamma_N(ModelParams(2, 0.7)) == Approx(-1.0));
  CHECK(gamma_N(ModelParams(10, 0.0)) == Approx(-(1.0 - std::cos(std::numbers::pi / 10))));
  CHECK(gamma_N(ModelParams(4, 0.6)) == Approx(-0.43431457505076198048).epsilon(1e-14));
  // Root of the characteristic polynomial of the N = 4 generator.
  CHECK(std::fabs(characteristic(ModelParams(4, 0.6), gamma_N(ModelParams(4, 0.6)))) < 1e-14);
}

TEST_CASE("eigen system invariants") {
  for (auto [N, lambda] : std::vector<std::pair<int, double>>{{8, 0.4}, {16, 0.2}, {33, 0.5}, {64, 0.1}}) {
    const ModelParams p(N, lambda);
    const auto es = eigen_system(p);
    REQUIRE(es.gamma.size() == static_cast<std::size_t>(N - 1));
    CHECK(es.gamma[0] == gamma_N(p));
    for (std::size_t j = 1; j < es.gamma.size(); ++j) CHECK(es.gamma[j] < es.gamma[j - 1]);
    // Eigen identity. The weights are a left eigenvector: sum_k w_k (L m)_k = gamma_j sum_k w_k m_k for
    // every m. The matching right eigenvector is r^(k/2) sin(k j pi / N).
    Rng rng(static_cast<std::uint64_t>(N));
    std::vector<double> m(static_cast<std::size_t>(N + 1), 0.0);
    for (int k = 1; k < N; ++k) m[static_cast<std::size_t>(k)] = rng.normal();
    const auto lm = apply_mean_generator(m, p);
    for (int j = 1; j < N; j += std::max(1, N / 8)) {
      const double g = es.gamma[static_cast<std::size_t>(j - 1)];
      const auto w = mode_weights(p, j);
      double lhs = 0.0, rhs = 0.0, scale = 0.0;
      for (int k = 1; k < N; ++k) {
        const auto kk = static_cast<std::size_t>(k);
        lhs += w[kk] * lm[kk];
        rhs += g * w[kk] * m[kk];
        scale += std::fabs(w[kk] * m[kk]);
      }
      CHECK(std::fabs(lhs - rhs) <= 1e-12 * scale);
      if (N <= 33) {
        std::vector<double> v(static_cast<std::size_t>(N + 1), 0.0);
        for (int k = 1; k < N; ++k)
          v[static_cast<std::size_t>(k)] = std::exp(0.5 * k * p.log_r()) * std::sin(k * j * std::numbers::pi / N);
        const auto lv = apply_mean_generator(v, p);
        double err = 0.0, vmax = 0.0;
        for (int k = 1; k < N; ++k) {
          const auto kk = static_cast<std::size_t>(k);
          err = std::max(err, std::fabs(lv[kk] - g * v[kk]));
          vmax = std::max(vmax, std::fabs(v[kk]));
        }
        CHECK(err <= 1e-12 * vmax);
      }
    }
    // Orthogonality under the weight r^k.
    if (N <= 16) {
      for (int i = 1; i < N; ++i)
        for (int j = i + 1; j < N; ++j) {
          const auto a = mode_weights(p, i), b = mode_weights(p, j);
          double dot = 0.0;
          for (int k = 1; k < N; ++k) {
            const auto kk = static_cast<std::size_t>(k);
            dot += std::exp(k * p.log_r()) * a[kk] * b[kk];
          }
          CHECK(std::fabs(dot) < 1e-10);
        }
    }
  }
}

TEST_CASE("equilibrium mean") {
  const ModelParams p(10, 0.3);
  const auto xb = equilibrium_mean(p);
  const double r = p.r();
  for (int k = 0; k <= 10; ++k)
    CHECK(xb[static_cast<std::size_t>(k)] == Approx(10.0 * (std::pow(r, k) - 1) / (std::pow(r, 10) - 1)));
  const auto flat = equilibrium_mean(ModelParams(5, 0.0));
  for (int k = 0; k <= 5; ++k) CHECK(flat[static_cast<std::size_t>(k)] == Approx(k));
  // No overflow at large N lambda.
  const auto big = equilibrium_mean(ModelParams(4096, 0.9));
  for (double v : big) CHECK(std::isfinite(v));
}

TEST_CASE("twisted area examples") {
  const ModelParams p(2, 0.0);
  CHECK(twisted_area(max_configuration(2), min_configuration(2), p) == Approx(2.0));
  const ModelParams q(12, 0.4);
  Rng rng(1);
  const auto a = sample_stationary(q, rng);
  CHECK(twisted_area(a, a, q) == 0.0);
  CHECK(twisted_area(max_configuration(12), a, q) >= 0.0);
  CHECK(twisted_area(a, min_configuration(12), q) >= 0.0);
}

TEST_CASE("mean_profile_exact") {
  const ModelParams p(8, 0.4);
  const auto c0 = max_configuration(8);
  const auto at0 = mean_profile_exact(c0, p, 0.0);
  for (int k = 0; k <= 8; ++k) CHECK(at0[static_cast<std::size_t>(k)] == Approx(c0.x[static_cast<std::size_t>(k)]).epsilon(1e-10));
  const auto late = mean_profile_exact(c0, p, 500.0);
  const auto xb = equilibrium_mean(p);
  for (int k = 0; k <= 8; ++k) CHECK(late[static_cast<std::size_t>(k)] == Approx(xb[static_cast<std::size_t>(k)]).epsilon(1e-9));
  // Independent RK4 oracle with dt = 1e-4.
  const double up = p.r() / (1 + p.r()), down = 1 / (1 + p.r());
  const auto ref = oracle::mean_ode_rk4(c0.x, up, down, 5.0, 50000);
  const auto ex = mean_profile_exact(c0, p, 5.0);
  for (int k = 0; k <= 8; ++k) CHECK(std::fabs(ex[static_cast<std::size_t>(k)] - ref[static_cast<std::size_t>(k)]) < 1e-7);
  const auto lib_rk4 = mean_profile_rk4(c0, p, 5.0, 1e-4);
  for (int k = 0; k <= 8; ++k) CHECK(std::fabs(ex[static_cast<std::size_t>(k)] - lib_rk4[static_cast<std::size_t>(k)]) < 1e-7);
  CHECK_THROWS_AS(mean_profile_exact(c0, p, -1.0), Error);
}

TEST_CASE("mean_profile_exact averaged over stationary starts stays at equilibrium") {
  const ModelParams p(12, 0.3);
  Rng rng(2);
  std::vector<double> acc(13, 0.0), sq(13, 0.0);
  const int n = 4000;
  for (int i = 0; i < n; ++i) {
    const auto m = mean_profile_exact(sample_stationary(p, rng), p, 3.0);
    for (std::size_t k = 0; k < 13; ++k) {
      acc[k] += m[k];
      sq[k] += m[k] * m[k];
    }
  }
  const auto xb = equilibrium_mean(p);
  for (std::size_t k = 1; k < 12; ++k) {
    const double mean = acc[k] / n;
    const double se = std::sqrt(std::max(sq[k] / n - mean * mean, 0.0) / n);
    CHECK(std::fabs(mean - xb[k]) < 4 * se + 1e-12);
  }
}

TEST_CASE("f_N is the twisted area against the equilibrium mean") {
  const ModelParams p(10, 0.25);
  Rng rng(3);
  const auto c = sample_stationary(p, rng);
  const auto xb = equilibrium_mean(p);
  double direct = 0.0;
  for (int k = 1; k < 10; ++k) {
    const auto kk = static_cast<std::size_t>(k);
    direct += std::exp(-0.5 * k * p.log_r()) * std::sin(k * std::numbers::pi / 10) * (c.x[kk] - xb[kk]);
  }
  CHECK(f_N(c, p) == Approx(direct).epsilon(1e-12));
}

TEST_CASE("decay_check") {
  SUBCASE("N = 2: slope -1") {
    const std::vector<double> grid{0.5, 1.0, 1.5, 2.0, 2.5};
    const auto rep = decay_check(ModelParams(2, 0.3), grid, 4000, 5, 300);
    CHECK(rep.gamma_N == Approx(-1.0));
    CHECK(rep.slope == Approx(-1.0).epsilon(0.1));
    CHECK(rep.ci_low <= -1.0);
    CHECK(rep.ci_high >= -1.0);
  }
  SUBCASE("one grid point is not enough") {
    const std::vector<double> one{1.0};
    try {
      decay_check(ModelParams(4, 0.3), one, 1000, 1);
      CHECK(false);
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::InsufficientGrid);
    }
  }
  SUBCASE("deterministic across thread counts") {
    const std::vector<double> grid{1.0, 2.0, 3.0};
    const auto a = decay_check(ModelParams(8, 0.3), grid, 1000, 9, 100, 1);
    const auto b = decay_check(ModelParams(8, 0.3), grid, 1000, 9, 100, 4);
    CHECK(a.slope == b.slope);
    CHECK(a.ci_low == b.ci_low);
    CHECK(a.mean_f == b.mean_f);
  }
}
