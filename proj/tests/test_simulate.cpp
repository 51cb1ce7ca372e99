#include "robustreg/simulate.hpp"

#include "catch2/catch_amalgamated.hpp"

#include <cmath>
#include <cstdlib>
#include <string>

using namespace robustreg;

namespace {

struct ThreadEnvGuard {
  ~ThreadEnvGuard() { unsetenv("ROBUSTREG_THREADS"); }
};

Vector errors_of(const Dataset& d) { return d.y() - d.x().rowwise().sum(); }

}  // namespace

TEST_CASE("scenario parsing and validation") {
  CHECK(parse_example("1") == Example::one);
  CHECK(parse_example("two") == Example::two);
  CHECK_THROWS_AS(parse_example("3"), DataError);
  CHECK(parse_error_case("IV") == ErrorCase::IV);
  CHECK_THROWS_AS(parse_error_case("VII"), DataError);

  Scenario s;
  s.n = 9;
  CHECK_THROWS_AS(s.validate(), DataError);
  s.n = 10;
  s.replicates = 0;
  CHECK_THROWS_AS(s.validate(), DataError);
}

TEST_CASE("replicates are reproducible and distinct") {
  Scenario s;
  s.n = 25;
  s.seed = 9;
  const Dataset a = generate(s, 3);
  const Dataset b = generate(s, 3);
  const Dataset c = generate(s, 4);
  CHECK((a.x() - b.x()).cwiseAbs().maxCoeff() == 0.0);
  CHECK((a.y() - b.y()).cwiseAbs().maxCoeff() == 0.0);
  CHECK((a.y() - c.y()).cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("second design carries three covariates") {
  Scenario s;
  s.example = Example::two;
  s.n = 30;
  const Dataset d = generate(s, 0);
  CHECK(d.p() == 3);
  CHECK(scenario_truth(s).size() == 4);
  CHECK(scenario_truth(s)(0) == 0.0);
  CHECK(scenario_truth(s)(3) == 1.0);
}

TEST_CASE("contaminated cases overwrite exactly the leading tenth") {
  Scenario s;
  s.n = 35;
  s.error_case = ErrorCase::V;
  const Dataset v = generate(s, 1);
  for (int i = 0; i < 3; ++i) CHECK(v.y()(i) == 30.0);
  CHECK(v.y()(3) != 30.0);

  s.error_case = ErrorCase::VI;
  const Dataset w = generate(s, 1);
  for (int i = 0; i < 3; ++i) {
    CHECK(w.x()(i, 0) == 10.0);
    CHECK(w.y()(i) == 50.0);
  }
  CHECK(w.x()(3, 0) != 10.0);

  // The clean covariates agree across cases drawn from the same stream.
  s.error_case = ErrorCase::I;
  const Dataset clean = generate(s, 1);
  CHECK(clean.x()(7, 0) == v.x()(7, 0));
}

TEST_CASE("error distributions have the advertised shape") {
  Scenario s;
  s.n = 100000;

  s.error_case = ErrorCase::I;
  Vector e = errors_of(generate(s, 0));
  CHECK(e.mean() == Catch::Approx(0.0).margin(0.02));
  CHECK(e.squaredNorm() / s.n == Catch::Approx(1.0).margin(0.03));

  s.error_case = ErrorCase::II;
  e = errors_of(generate(s, 0));
  CHECK(e.squaredNorm() / s.n == Catch::Approx(3.0).margin(0.4));

  s.error_case = ErrorCase::III;
  e = errors_of(generate(s, 0));
  int beyond = 0;
  for (int i = 0; i < s.n; ++i)
    if (std::fabs(e(i)) > 1.0) ++beyond;
  CHECK(static_cast<double>(beyond) / s.n == Catch::Approx(0.5).margin(0.01));

  s.error_case = ErrorCase::IV;
  e = errors_of(generate(s, 0));
  CHECK(e.squaredNorm() / s.n == Catch::Approx(5.95).margin(0.6));
}

TEST_CASE("feeding the truth back gives a zero table") {
  Scenario s;
  s.n = 20;
  s.replicates = 10;
  const Vector truth = scenario_truth(s);
  const MseTable t = run_mse_with(
      s, {MethodId::ols}, [&](const Dataset&, MethodId, std::uint64_t) {
        RegressionFit f;
        f.coefficients = truth;
        f.converged = true;
        return f;
      });
  CHECK(t.mse.cwiseAbs().maxCoeff() == 0.0);
  CHECK(t.excluded[0] == 0);
}

TEST_CASE("failed and unconverged replicates are excluded from the average") {
  Scenario s;
  s.n = 20;
  s.replicates = 20;
  const Vector truth = scenario_truth(s);
  const MseTable t = run_mse_with(
      s, {MethodId::ols}, [&](const Dataset&, MethodId, std::uint64_t rep) {
        if (rep == 3) throw FitError("boom");
        RegressionFit f;
        f.coefficients = truth;
        f.coefficients(0) += static_cast<double>(rep);  // known offset
        f.converged = rep != 7;
        return f;
      });
  CHECK(t.excluded[0] == 2);
  double want = 0.0;
  for (int rep = 0; rep < 20; ++rep) {
    if (rep == 3 || rep == 7) continue;
    want += static_cast<double>(rep) * rep;
  }
  want /= 18.0;
  CHECK(t.mse(0, 0) == Catch::Approx(want).epsilon(1e-12));
  CHECK(t.mse(0, 1) == 0.0);
}

TEST_CASE("a method failing more than a tenth of replicates is reported by name") {
  Scenario s;
  s.n = 20;
  s.replicates = 20;
  CHECK_THROWS_WITH(
      run_mse_with(s, {MethodId::m_tukey},
                   [&](const Dataset&, MethodId, std::uint64_t rep) -> RegressionFit {
                     if (rep < 3) throw FitError("boom");
                     RegressionFit f;
                     f.coefficients = scenario_truth(s);
                     f.converged = true;
                     return f;
                   }),
      Catch::Matchers::ContainsSubstring("m_tukey"));
}

TEST_CASE("tables serialize to stable CSV and JSON") {
  Scenario s;
  s.n = 30;
  s.replicates = 10;
  s.seed = 2;
  const MseTable t = run_mse(s, {MethodId::ols, MethodId::m_huber});

  const std::string csv = mse_table_csv(t);
  CHECK(csv.rfind("method,coefficient,mse,replicates,excluded\n", 0) == 0);
  CHECK(static_cast<int>(std::count(csv.begin(), csv.end(), '\n')) == 1 + 2 * 2);
  CHECK(csv.find("ols,beta0,") != std::string::npos);
  CHECK(csv.find("m_huber,beta1,") != std::string::npos);

  const std::string json = mse_table_json(t);
  CHECK(json.find("\"example\":\"1\"") != std::string::npos);
  CHECK(json.find("\"case\":\"I\"") != std::string::npos);
  CHECK(json.find("\"seed\":2") != std::string::npos);
  CHECK(json.find("\"method\":\"m_huber\"") != std::string::npos);
}

TEST_CASE("results do not depend on the thread count") {
  ThreadEnvGuard guard;
  Scenario s;
  s.n = 30;
  s.replicates = 20;
  s.seed = 5;
  s.error_case = ErrorCase::V;
  const std::vector<MethodId> methods = {MethodId::ols, MethodId::m_huber,
                                         MethodId::lts};

  setenv("ROBUSTREG_THREADS", "1", 1);
  const std::string serial = mse_table_csv(run_mse(s, methods));
  setenv("ROBUSTREG_THREADS", "4", 1);
  const std::string threaded = mse_table_csv(run_mse(s, methods));
  CHECK(serial == threaded);

  // And re-running in-process is byte-identical too.
  const std::string again = mse_table_csv(run_mse(s, methods));
  CHECK(threaded == again);
}

TEST_CASE("a method's row does not depend on its table companions") {
  Scenario s;
  s.n = 30;
  s.replicates = 15;
  s.seed = 11;
  const MseTable alone = run_mse(s, {MethodId::ols});
  const MseTable joint = run_mse(s, {MethodId::m_huber, MethodId::ols});
  CHECK((alone.mse.row(0) - joint.mse.row(1)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("parallel failures surface in replicate order") {
  ThreadEnvGuard guard;
  setenv("ROBUSTREG_THREADS", "4", 1);
  CHECK_THROWS_WITH(parallel_for(10,
                                 [](int i) {
                                   if (i >= 5)
                                     throw FitError("rep " + std::to_string(i));
                                 }),
                    Catch::Matchers::ContainsSubstring("rep 5"));
}

TEST_CASE("divergence ladder rule") {
  CHECK(detail::ladder_diverges({10, 20, 40, 2e4}));
  CHECK_FALSE(detail::ladder_diverges({10, 20, 30, 1e5}));   // stalls mid-way
  CHECK_FALSE(detail::ladder_diverges({0, 0, 0, 0}));        // never moved
  CHECK_FALSE(detail::ladder_diverges({10, 20, 40, 80}));    // bounded drift
  const double inf = std::numeric_limits<double>::infinity();
  CHECK(detail::ladder_diverges({10, 20, inf, inf}));        // fit errors count
}

TEST_CASE("least squares breaks down at the first corrupted point") {
  const BreakdownReport r = breakdown_probe(MethodId::ols, 20, 1);
  REQUIRE(r.fractions.size() == 10);
  CHECK(r.diverged[0]);
  CHECK(r.delta_star == Catch::Approx(0.05));
  CHECK(r.delta_star_label() == "0.05");

  const std::string csv = breakdown_report_csv(r);
  CHECK(csv.rfind("method,n,m,fraction,diverged,delta_star\n", 0) == 0);
  CHECK(static_cast<int>(std::count(csv.begin(), csv.end(), '\n')) == 11);

  CHECK_THROWS_AS(breakdown_probe(MethodId::ols, 19, 1), DataError);
}

TEST_CASE("efficiency of least squares against itself is exactly one") {
  CHECK(efficiency_probe(MethodId::ols, 20, 200, 3) == 1.0);
  CHECK_THROWS_AS(efficiency_probe(MethodId::ols, 20, 199, 3), DataError);
}
