#pragma once

#include "robustreg/dispatch.hpp"
#include "robustreg/rng.hpp"
#include "robustreg/types.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <functional>
#include <limits>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace robustreg {

// ---------------------------------------------------------------------------
// Scenario grid: two designs x six error cases.

enum class Example { one, two };
enum class ErrorCase { I, II, III, IV, V, VI };

inline const char* example_name(Example e) { return e == Example::one ? "1" : "2"; }

inline const char* case_name(ErrorCase c) {
  switch (c) {
    case ErrorCase::I: return "I";
    case ErrorCase::II: return "II";
    case ErrorCase::III: return "III";
    case ErrorCase::IV: return "IV";
    case ErrorCase::V: return "V";
    case ErrorCase::VI: return "VI";
  }
  return "?";
}

inline ErrorCase parse_error_case(const std::string& s) {
  for (ErrorCase c : {ErrorCase::I, ErrorCase::II, ErrorCase::III,
                      ErrorCase::IV, ErrorCase::V, ErrorCase::VI})
    if (s == case_name(c)) return c;
  throw DataError("unknown error case '" + s + "' (expected I..VI)");
}

inline Example parse_example(const std::string& s) {
  if (s == "1" || s == "one") return Example::one;
  if (s == "2" || s == "two") return Example::two;
  throw DataError("unknown example '" + s + "' (expected 1 or 2)");
}

struct Scenario {
  Example example = Example::one;
  ErrorCase error_case = ErrorCase::I;
  int n = 100;
  int replicates = 200;
  std::uint64_t seed = 0;

  void validate() const {
    if (n < 10) throw DataError("scenario: n must be at least 10");
    if (replicates < 1) throw DataError("scenario: replicates must be positive");
  }
};

inline int scenario_slopes(const Scenario& s) {
  return s.example == Example::one ? 1 : 3;
}

// True coefficients behind both designs: zero intercept, unit slopes.
inline Vector scenario_truth(const Scenario& s) {
  Vector t = Vector::Ones(1 + scenario_slopes(s));
  t(0) = 0.0;
  return t;
}

// One replicate's dataset: covariates first, then errors, then any
// case-specific row overwrites, all from the (seed, replicate) stream.
inline Dataset generate(const Scenario& s, std::uint64_t replicate_index) {
  s.validate();
  CounterRng rng(s.seed, replicate_index);
  const int n = s.n;
  const int p = scenario_slopes(s);

  Matrix x(n, p);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < p; ++j) x(i, j) = rng.normal();

  Vector eps(n);
  switch (s.error_case) {
    case ErrorCase::I:
    case ErrorCase::V:
    case ErrorCase::VI:
      for (int i = 0; i < n; ++i) eps(i) = rng.normal();
      break;
    case ErrorCase::II:
      for (int i = 0; i < n; ++i) eps(i) = rng.student_t(3);
      break;
    case ErrorCase::III:
      for (int i = 0; i < n; ++i) eps(i) = rng.student_t(1);
      break;
    case ErrorCase::IV:
      for (int i = 0; i < n; ++i) {
        const double u = rng.uniform();
        const double z = rng.normal();
        eps(i) = z * (u < 0.05 ? 10.0 : 1.0);
      }
      break;
  }

  Vector y = x.rowwise().sum() + eps;
  const int contaminated = n / 10;
  if (s.error_case == ErrorCase::V) {
    for (int i = 0; i < contaminated; ++i) y(i) = 30.0;
  } else if (s.error_case == ErrorCase::VI) {
    // Leverage contamination enters through the first covariate only; the
    // remaining covariates keep their clean draws.
    for (int i = 0; i < contaminated; ++i) {
      x(i, 0) = 10.0;
      y(i) = 50.0;
    }
  }
  return Dataset(x, y, true);
}

// ---------------------------------------------------------------------------
// Parallel replicate execution. Work is split across threads but every
// result lands in a pre-assigned slot and reductions walk slots in index
// order, so outputs are identical for any thread count.

inline int thread_cap() {
  if (const char* env = std::getenv("ROBUSTREG_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v > 0) return static_cast<int>(v);
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

inline void parallel_for(int count, const std::function<void(int)>& body) {
  const int workers = std::min(thread_cap(), count);
  if (workers <= 1) {
    for (int i = 0; i < count; ++i) body(i);
    return;
  }
  std::vector<std::exception_ptr> errors(static_cast<size_t>(count));
  std::vector<std::thread> pool;
  pool.reserve(static_cast<size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (int i = w; i < count; i += workers) {
        try {
          body(i);
        } catch (...) {
          errors[static_cast<size_t>(i)] = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
}

// ---------------------------------------------------------------------------
// MSE tabulation.

struct MseTable {
  Scenario scenario;
  std::vector<MethodId> methods;
  int n_coef = 0;
  Matrix mse;                  // methods x coefficients
  std::vector<int> excluded;   // per method: replicates dropped as failures
};

using Fitter =
    std::function<RegressionFit(const Dataset&, MethodId, std::uint64_t replicate)>;

inline MseTable run_mse_with(const Scenario& s,
                             const std::vector<MethodId>& methods,
                             const Fitter& fitter) {
  s.validate();
  if (methods.empty()) throw DataError("run_mse: empty method list");
  const int reps = s.replicates;
  const int n_methods = static_cast<int>(methods.size());
  const int n_coef = 1 + scenario_slopes(s);
  const Vector truth = scenario_truth(s);

  // slot[rep][method]: squared errors, or empty when the fit failed
  std::vector<std::vector<Vector>> slot(
      static_cast<size_t>(reps), std::vector<Vector>(static_cast<size_t>(n_methods)));
  parallel_for(reps, [&](int rep) {
    const Dataset d = generate(s, static_cast<std::uint64_t>(rep));
    for (int m = 0; m < n_methods; ++m) {
      try {
        RegressionFit f = fitter(d, methods[static_cast<size_t>(m)],
                                 static_cast<std::uint64_t>(rep));
        if (!f.converged) continue;
        slot[static_cast<size_t>(rep)][static_cast<size_t>(m)] =
            (f.coefficients - truth).array().square().matrix();
      } catch (const FitError&) {
      } catch (const DataError&) {
      }
    }
  });

  MseTable table;
  table.scenario = s;
  table.methods = methods;
  table.n_coef = n_coef;
  table.mse = Matrix::Zero(n_methods, n_coef);
  table.excluded.assign(static_cast<size_t>(n_methods), 0);
  for (int m = 0; m < n_methods; ++m) {
    int used = 0;
    Vector acc = Vector::Zero(n_coef);
    for (int rep = 0; rep < reps; ++rep) {
      const Vector& sq = slot[static_cast<size_t>(rep)][static_cast<size_t>(m)];
      if (sq.size() == 0) continue;
      acc += sq;
      ++used;
    }
    table.excluded[static_cast<size_t>(m)] = reps - used;
    if (reps - used > reps / 10)
      throw FitError(std::string("run_mse: method ") +
                     method_name(methods[static_cast<size_t>(m)]) +
                     " failed on more than 10% of replicates");
    table.mse.row(m) = (acc / used).transpose();
  }
  return table;
}

inline MseTable run_mse(const Scenario& s, const std::vector<MethodId>& methods,
                        const FitOptions& opt = {}) {
  return run_mse_with(s, methods,
                      [&opt](const Dataset& d, MethodId m, std::uint64_t) {
                        return fit(d, m, opt);
                      });
}

namespace detail {

inline std::string format_full(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace detail

inline std::string mse_table_csv(const MseTable& t) {
  std::ostringstream out;
  out << "method,coefficient,mse,replicates,excluded\n";
  for (size_t m = 0; m < t.methods.size(); ++m)
    for (int j = 0; j < t.n_coef; ++j)
      out << method_name(t.methods[m]) << ",beta" << j << ','
          << detail::format_full(t.mse(static_cast<int>(m), j)) << ','
          << t.scenario.replicates << ',' << t.excluded[m] << '\n';
  return out.str();
}

inline std::string mse_table_json(const MseTable& t) {
  std::ostringstream out;
  out << "{\"example\":\"" << example_name(t.scenario.example)
      << "\",\"case\":\"" << case_name(t.scenario.error_case)
      << "\",\"n\":" << t.scenario.n
      << ",\"replicates\":" << t.scenario.replicates
      << ",\"seed\":" << t.scenario.seed << ",\"methods\":[";
  for (size_t m = 0; m < t.methods.size(); ++m) {
    if (m) out << ',';
    out << "{\"method\":\"" << method_name(t.methods[m])
        << "\",\"excluded\":" << t.excluded[m] << ",\"mse\":[";
    for (int j = 0; j < t.n_coef; ++j) {
      if (j) out << ',';
      out << detail::format_full(t.mse(static_cast<int>(m), j));
    }
    out << "]}";
  }
  out << "]}";
  return out.str();
}

// ---------------------------------------------------------------------------
// Empirical breakdown probe: escalating high-leverage corruption. For each
// contamination count m the first m rows are replaced by copies of a point
// whose leverage and response grow together; the method "diverges" at m when
// its displacement from the clean fit keeps growing as the corruption point
// marches out (superlinear response so that bounded-influence weights, which
// shrink like 1/M, cannot cancel it).

struct BreakdownReport {
  MethodId method = MethodId::ols;
  int n = 0;
  std::vector<double> fractions;
  std::vector<bool> diverged;
  double delta_star = std::numeric_limits<double>::infinity();

  bool any_diverged() const { return std::isfinite(delta_star); }
  std::string delta_star_label() const {
    if (!any_diverged()) return ">0.5";
    std::ostringstream out;
    out << delta_star;
    return out.str();
  }
};

namespace detail {

inline bool ladder_diverges(const std::vector<double>& dist) {
  for (size_t i = 1; i < dist.size(); ++i)
    if (!(dist[i] >= 2.0 * dist[i - 1])) return false;
  const double base = std::max(dist.front(), 1e-12);
  return dist.back() > 1e3 * base && dist.back() > 1e3;
}

}  // namespace detail

inline BreakdownReport breakdown_probe(MethodId method, int n,
                                       std::uint64_t seed,
                                       const FitOptions& opt = {}) {
  if (n < 20) throw DataError("breakdown_probe: n must be at least 20");
  Scenario s;
  s.n = n;
  s.seed = seed;
  const Dataset clean = generate(s, 0);
  const int p_star = clean.p_star();
  const Vector beta_clean = fit(clean, method, opt).coefficients;

  const std::vector<double> ladder = {1e2, 1e4, 1e6, 1e8};
  BreakdownReport report;
  report.method = method;
  report.n = n;

  const int max_m = n / 2;
  std::vector<char> flags(static_cast<size_t>(max_m), 0);
  parallel_for(max_m, [&](int idx) {
    const int m = idx + 1;
    std::vector<double> dist;
    dist.reserve(ladder.size());
    for (double big : ladder) {
      Matrix x = clean.x();
      Vector y = clean.y();
      for (int i = 0; i < m; ++i) {
        x.row(i).setConstant(big);
        y(i) = -std::pow(big, p_star);
      }
      double d;
      try {
        const Vector beta = fit(Dataset(x, y, true), method, opt).coefficients;
        d = (beta - beta_clean).norm();
      } catch (const FitError&) {
        d = std::numeric_limits<double>::infinity();
      }
      dist.push_back(d);
    }
    flags[static_cast<size_t>(idx)] = detail::ladder_diverges(dist) ? 1 : 0;
  });

  for (int m = 1; m <= max_m; ++m) {
    const bool div = flags[static_cast<size_t>(m - 1)] != 0;
    report.fractions.push_back(static_cast<double>(m) / n);
    report.diverged.push_back(div);
    if (div && !report.any_diverged())
      report.delta_star = static_cast<double>(m) / n;
    if (!div && report.any_diverged())
      throw FitError(std::string("breakdown_probe: non-monotone divergence for ") +
                     method_name(method));
  }
  return report;
}

inline std::string breakdown_report_csv(const BreakdownReport& r) {
  std::ostringstream out;
  out << "method,n,m,fraction,diverged,delta_star\n";
  for (size_t i = 0; i < r.fractions.size(); ++i)
    out << method_name(r.method) << ',' << r.n << ',' << (i + 1) << ','
        << detail::format_full(r.fractions[i]) << ',' << (r.diverged[i] ? 1 : 0)
        << ',' << r.delta_star_label() << '\n';
  return out.str();
}

// Monte-Carlo slope-MSE ratio against OLS on clean normal data; both methods
// see identical replicates.
inline double efficiency_probe(MethodId method, int n, int replicates,
                               std::uint64_t seed, const FitOptions& opt = {}) {
  if (replicates < 200)
    throw DataError("efficiency_probe: needs at least 200 replicates");
  Scenario s;
  s.n = n;
  s.replicates = replicates;
  s.seed = seed;
  const MseTable t = run_mse(s, {MethodId::ols, method}, opt);
  return t.mse(0, 1) / t.mse(1, 1);
}

}  // namespace robustreg
