#include "robustreg/subset.hpp"
#include "robustreg/rng.hpp"

#include "catch2/catch_amalgamated.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "helpers.hpp"

using namespace robustreg;

namespace {

// Simple line data with a controllable number of gross outliers in front.
Dataset contaminated_line(CounterRng& rng, int n, int n_bad,
                          double noise = 0.0) {
  Matrix x(n, 1);
  Vector y(n);
  for (int i = 0; i < n; ++i) {
    x(i, 0) = rng.normal() * 3.0;
    y(i) = 1.0 + 2.0 * x(i, 0) + noise * rng.normal();
  }
  for (int i = 0; i < n_bad; ++i) y(i) += 25.0 + 5.0 * rng.uniform();
  return Dataset(x, y, true);
}

void all_subsets(int n, int k, std::vector<std::vector<int>>& out) {
  std::vector<int> idx(static_cast<size_t>(k));
  for (int i = 0; i < k; ++i) idx[static_cast<size_t>(i)] = i;
  while (true) {
    out.push_back(idx);
    int pos = k - 1;
    while (pos >= 0 && idx[static_cast<size_t>(pos)] == n - k + pos) --pos;
    if (pos < 0) break;
    ++idx[static_cast<size_t>(pos)];
    for (int j = pos + 1; j < k; ++j)
      idx[static_cast<size_t>(j)] = idx[static_cast<size_t>(j - 1)] + 1;
  }
}

}  // namespace

TEST_CASE("elemental enumeration visits every pair exactly once") {
  CounterRng rng(201);
  const Dataset d = test_helpers::noisy_dataset(rng, 5, 1);
  int count = 0;
  const long visited = detail::for_each_elemental(
      d, SubsetSearchConfig{}, [&](const std::vector<int>& idx, const Vector& beta) {
        ++count;
        // The elemental fit interpolates its two rows.
        const Vector r = residuals(d, beta);
        CHECK(std::fabs(r(idx[0])) < 1e-9);
        CHECK(std::fabs(r(idx[1])) < 1e-9);
      });
  CHECK(visited == 10);
  CHECK(count == 10);
}

TEST_CASE("median-of-squares objective matches a hand sort") {
  CounterRng rng(203);
  const Dataset d = test_helpers::noisy_dataset(rng, 11, 1);
  Vector beta(2);
  beta << 0.3, 1.2;
  Vector r = residuals(d, beta);
  std::vector<double> sq;
  for (int i = 0; i < d.n(); ++i) sq.push_back(r(i) * r(i));
  std::sort(sq.begin(), sq.end());
  const int h = lms_order_statistic(11, 2);
  CHECK(h == 7);
  CHECK(lms_objective(d, beta) == sq[static_cast<size_t>(h - 1)]);
}

TEST_CASE("randomized and exhaustive elemental search agree on small problems") {
  CounterRng rng(205);
  for (int rep = 0; rep < 20; ++rep) {
    const Dataset d = contaminated_line(rng, 12, 3, 0.4);

    const RegressionFit ex = fit_lms(d);  // C(12,2) = 66: exhaustive

    SubsetSearchConfig random_cfg;
    random_cfg.exhaustive_threshold = 1;  // force the seeded random path
    random_cfg.n_starts = 2000;
    random_cfg.rng_seed = static_cast<uint64_t>(rep);
    const RegressionFit rnd = fit_lms(d, random_cfg);

    CHECK(rnd.objective == Catch::Approx(ex.objective).epsilon(1e-12));
    CHECK((rnd.coefficients - ex.coefficients).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("LMS recovers an exact line past 40 percent contamination") {
  CounterRng rng(207);
  const Dataset d = contaminated_line(rng, 20, 8, 0.0);
  const RegressionFit f = fit_lms(d);
  CHECK(f.coefficients(0) == Catch::Approx(1.0).margin(1e-6));
  CHECK(f.coefficients(1) == Catch::Approx(2.0).margin(1e-6));
  CHECK(f.objective == Catch::Approx(0.0).margin(1e-12));
  CHECK(f.scale == Catch::Approx(0.0).margin(1e-9));
  // Covered flags: the 12 clean rows in, the 8 shifted rows out.
  for (int i = 0; i < 8; ++i) CHECK(f.weights(i) == 0.0);
  for (int i = 8; i < 20; ++i) CHECK(f.weights(i) == 1.0);
}

TEST_CASE("LMS scale follows the finite-sample formula") {
  CounterRng rng(209);
  const Dataset d = contaminated_line(rng, 15, 2, 0.5);
  const RegressionFit f = fit_lms(d);
  CHECK(f.scale == Catch::Approx(1.4826 * (1.0 + 5.0 / 13.0) *
                                 std::sqrt(f.objective))
                       .epsilon(1e-12));
}

TEST_CASE("trimmed squares matches brute force over all coverage subsets") {
  CounterRng rng(211);
  for (int rep = 0; rep < 20; ++rep) {
    const Dataset d = contaminated_line(rng, 9, 2, 0.5);
    const int q = 5;

    std::vector<std::vector<int>> subsets;
    all_subsets(9, q, subsets);
    REQUIRE(subsets.size() == 126);
    double oracle = std::numeric_limits<double>::infinity();
    for (const auto& rows : subsets) {
      const Vector beta = detail::ols_on_rows(d, rows);
      oracle = std::min(oracle, lts_objective(d, beta, q));
    }

    LtsConfig cfg;
    cfg.q = q;
    const RegressionFit f = fit_lts(d, cfg);
    CHECK(f.objective == Catch::Approx(oracle).margin(1e-8 * (1.0 + oracle)));
  }
}

TEST_CASE("trimmed squares recovers an exact line and reports its coverage") {
  CounterRng rng(213);
  const Dataset d = contaminated_line(rng, 20, 8, 0.0);
  const RegressionFit f = fit_lts(d);
  CHECK(f.coefficients(0) == Catch::Approx(1.0).margin(1e-6));
  CHECK(f.coefficients(1) == Catch::Approx(2.0).margin(1e-6));
  CHECK(f.objective == Catch::Approx(0.0).margin(1e-12));
  CHECK(f.scale == Catch::Approx(0.0).margin(1e-9));
  int covered = 0;
  for (int i = 0; i < 20; ++i) {
    if (f.weights(i) == 1.0) ++covered;
    if (i < 8) CHECK(f.weights(i) == 0.0);
  }
  CHECK(covered == 11);  // floor(n/2) + 1
}

TEST_CASE("trimmed squares rejects out-of-range coverage") {
  CounterRng rng(215);
  const Dataset d = test_helpers::noisy_dataset(rng, 10, 1);
  LtsConfig low;
  low.q = 2;  // == p*
  CHECK_THROWS_AS(fit_lts(d, low), FitError);
  LtsConfig high;
  high.q = 11;
  CHECK_THROWS_AS(fit_lts(d, high), FitError);
}

TEST_CASE("S-estimate: reported scale solves its defining equation") {
  CounterRng rng(217);
  const Dataset d = contaminated_line(rng, 30, 6, 0.5);
  const RegressionFit f = fit_s(d);
  REQUIRE(f.scale > 0.0);
  const double target = 0.5 * (30 - 2);
  CHECK(detail::m_scale_sum(to_std(f.residuals), kBisquareC_bp50, f.scale) ==
        Catch::Approx(target).margin(1e-6));
  // The reported scale is the residual M-scale, recomputable independently.
  CHECK(m_scale(f.residuals, s_scale_spec(d)) ==
        Catch::Approx(f.scale).epsilon(1e-9));
}

TEST_CASE("S-estimate scale undercuts random elemental competitors") {
  CounterRng rng(219);
  const Dataset d = contaminated_line(rng, 30, 6, 0.5);
  const RegressionFit f = fit_s(d);
  const MScaleSpec spec = s_scale_spec(d);
  for (int trial = 0; trial < 50; ++trial) {
    const int i = static_cast<int>(rng.below(30));
    int j = i;
    while (j == i) j = static_cast<int>(rng.below(30));
    if (d.x()(i, 0) == d.x()(j, 0)) continue;
    const double b = (d.y()(j) - d.y()(i)) / (d.x()(j, 0) - d.x()(i, 0));
    const double a = d.y()(i) - b * d.x()(i, 0);
    Vector beta(2);
    beta << a, b;
    CHECK(f.scale <= m_scale(residuals(d, beta), spec) + 1e-9);
  }
  // It should also beat the plain least-squares fit on contaminated data.
  CHECK(f.scale < m_scale(residuals(d, fit_ols(d).coefficients), spec));
}

TEST_CASE("S-estimate short-circuits when a majority sits on one hyperplane") {
  CounterRng rng(221);
  const Dataset d = contaminated_line(rng, 20, 8, 0.0);
  const RegressionFit f = fit_s(d);
  CHECK(f.coefficients(0) == Catch::Approx(1.0).margin(1e-9));
  CHECK(f.coefficients(1) == Catch::Approx(2.0).margin(1e-9));
  CHECK(f.scale == 0.0);
  CHECK(f.converged);
  for (int i = 0; i < 8; ++i) CHECK(f.weights(i) == 0.0);
  for (int i = 8; i < 20; ++i) CHECK(f.weights(i) == 1.0);
}

TEST_CASE("pairwise-difference quantile objective by hand") {
  Vector r(3);
  r << 0, 1, 2;
  // Differences {1, 2, 1} sorted: 1, 1, 2.
  CHECK(lqd_objective_residuals(r, 1) == 1.0);
  CHECK(lqd_objective_residuals(r, 2) == 1.0);
  CHECK(lqd_objective_residuals(r, 3) == 2.0);

  CHECK(lqd_k_pairs(11, 2) == 21);  // h_p = 7
  CHECK(lqd_k_pairs(20, 2) == 55);  // h_p = 11

  Vector big = Vector::Zero(2001);
  CHECK_THROWS_AS(lqd_objective_residuals(big, 10), FitError);
}

TEST_CASE("pairwise objective ignores a common residual shift") {
  CounterRng rng(223);
  Vector r(9);
  for (int i = 0; i < 9; ++i) r(i) = rng.normal();
  const long k = lqd_k_pairs(9, 2);
  const double base = lqd_objective_residuals(r, k);
  CHECK(lqd_objective_residuals(r.array() + 17.5, k) ==
        Catch::Approx(base).margin(1e-12));
}

TEST_CASE("LQD slope agrees with a dense grid search") {
  CounterRng rng(225);
  const int n = 15;
  Matrix x(n, 1);
  Vector y(n);
  for (int i = 0; i < n; ++i) {
    x(i, 0) = rng.normal() * 2.0;
    y(i) = 1.0 + 2.0 * x(i, 0) + 0.3 * rng.normal();
  }
  const Dataset d(x, y, true);
  const long k = lqd_k_pairs(n, 2);

  double grid_best = std::numeric_limits<double>::infinity();
  double grid_slope = 0.0;
  for (int g = 0; g <= 4000; ++g) {
    const double b = 1.0 + 2.0 * g / 4000.0;  // slope in [1, 3]
    Vector r = y - b * x.col(0);
    const double obj = lqd_objective_residuals(r, k);
    if (obj < grid_best) {
      grid_best = obj;
      grid_slope = b;
    }
  }

  const RegressionFit f = fit_lqd(d);
  CHECK(std::fabs(f.coefficients(1) - grid_slope) < 0.05);
  CHECK(f.objective == Catch::Approx(grid_best).margin(2e-3));
  // The returned intercept centers the residuals at median zero.
  CHECK(median(to_std(f.residuals)) == Catch::Approx(0.0).margin(1e-9));
}

TEST_CASE("LQD shifts its intercept with the data, slope untouched") {
  CounterRng rng(227);
  const int n = 13;
  Matrix x(n, 1);
  Vector y(n);
  for (int i = 0; i < n; ++i) {
    x(i, 0) = rng.normal();
    y(i) = 0.5 * x(i, 0) + 0.2 * rng.normal();
  }
  const Dataset d(x, y, true);
  const Dataset d5(x, y.array() + 5.0, true);
  const RegressionFit f = fit_lqd(d);
  const RegressionFit f5 = fit_lqd(d5);
  CHECK(f5.coefficients(1) == Catch::Approx(f.coefficients(1)).margin(1e-9));
  CHECK(f5.coefficients(0) - f.coefficients(0) == Catch::Approx(5.0).margin(1e-9));
  CHECK(f5.objective == Catch::Approx(f.objective).margin(1e-12));
}

TEST_CASE("affine response transforms map through LMS and LTS exactly") {
  CounterRng rng(229);
  const Dataset d = contaminated_line(rng, 12, 3, 0.4);
  Vector a(2);
  a << -1.5, 0.75;
  const Vector y2 = 2.0 * d.y() + d.design() * a;
  const Dataset d2(d.x(), y2, true);

  const RegressionFit lms1 = fit_lms(d);
  const RegressionFit lms2 = fit_lms(d2);
  CHECK((lms2.coefficients - 2.0 * lms1.coefficients - a).cwiseAbs().maxCoeff() <
        1e-8);
  CHECK(lms2.objective == Catch::Approx(4.0 * lms1.objective).epsilon(1e-10));
  CHECK(lms2.scale == Catch::Approx(2.0 * lms1.scale).epsilon(1e-10));

  const RegressionFit lts1 = fit_lts(d);
  const RegressionFit lts2 = fit_lts(d2);
  CHECK((lts2.coefficients - 2.0 * lts1.coefficients - a).cwiseAbs().maxCoeff() <
        1e-8);
  CHECK(lts2.objective == Catch::Approx(4.0 * lts1.objective).epsilon(1e-10));
  CHECK(lts2.scale == Catch::Approx(2.0 * lts1.scale).epsilon(1e-10));
}

TEST_CASE("randomized searches are reproducible for a fixed seed") {
  CounterRng rng(231);
  const Dataset d = contaminated_line(rng, 40, 8, 0.5);
  SubsetSearchConfig cfg;
  cfg.exhaustive_threshold = 1;
  cfg.n_starts = 100;
  cfg.rng_seed = 7;

  const RegressionFit a = fit_lms(d, cfg);
  const RegressionFit b = fit_lms(d, cfg);
  CHECK(a.objective == b.objective);
  CHECK((a.coefficients - b.coefficients).cwiseAbs().maxCoeff() == 0.0);

  LtsConfig lcfg;
  lcfg.search = cfg;
  const RegressionFit c = fit_lts(d, lcfg);
  const RegressionFit e = fit_lts(d, lcfg);
  CHECK(c.objective == e.objective);
  CHECK((c.coefficients - e.coefficients).cwiseAbs().maxCoeff() == 0.0);

  const RegressionFit f = fit_s(d, cfg);
  const RegressionFit g = fit_s(d, cfg);
  CHECK(f.scale == g.scale);
  CHECK((f.coefficients - g.coefficients).cwiseAbs().maxCoeff() == 0.0);
}
