#pragma once

#include "robustreg/gauss.hpp"
#include "robustreg/linalg.hpp"
#include "robustreg/mestim.hpp"
#include "robustreg/scale.hpp"
#include "robustreg/subset.hpp"
#include "robustreg/types.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

namespace robustreg {

// ---------------------------------------------------------------------------
// MM: high-breakdown start, robust residual scale, then an efficient
// redescending M-step at that fixed scale.

struct MmConfig {
  double k0 = kBisquareC_bp50;
  double k1 = 4.68;  // 0.95 efficiency
  int max_iter = 200;
  double tol = 1e-10;
  SubsetSearchConfig search;
};

inline RegressionFit fit_mm(const Dataset& d, const MmConfig& cfg = {}) {
  if (cfg.k1 < cfg.k0)
    throw FitError("mm: k1 must be >= k0 so the stage-3 loss sits below the stage-1 loss");

  RegressionFit stage1 = fit_s(d, cfg.search, cfg.k0);
  if (stage1.scale <= 0.0) {
    stage1.method = MethodId::mm;
    stage1.objective = 0.0;
    return stage1;
  }
  const double sigma = m_scale(stage1.residuals, s_scale_spec(d, cfg.k0));

  const PsiSpec psi1 = PsiSpec::bisquare(cfg.k1);
  auto loss = [&](const Vector& r) {
    double acc = 0.0;
    for (int i = 0; i < d.n(); ++i) acc += rho(psi1, r(i) / sigma);
    return acc;
  };

  Vector beta = stage1.coefficients;
  Vector r = stage1.residuals;
  const double initial_loss = loss(r);
  double objective = initial_loss;
  Vector w(d.n());
  int it = 0;
  bool converged = false;
  for (; it < cfg.max_iter; ++it) {
    for (int i = 0; i < d.n(); ++i) w(i) = irls_weight(psi1, r(i) / sigma);
    Vector next;
    try {
      next = wls_solve(d, w);
    } catch (const FitError&) {
      break;
    }
    const double step = (next - beta).cwiseAbs().maxCoeff();
    beta = std::move(next);
    r = residuals(d, beta);
    objective = loss(r);
    if (step < cfg.tol * (1.0 + beta.cwiseAbs().maxCoeff())) {
      converged = true;
      ++it;
      break;
    }
  }
  if (objective > initial_loss + 1e-12 * (1.0 + initial_loss)) {
    // Safeguard: never leave the high-breakdown start for a worse point.
    beta = stage1.coefficients;
    r = stage1.residuals;
    objective = initial_loss;
    converged = false;
  }
  for (int i = 0; i < d.n(); ++i) w(i) = irls_weight(psi1, r(i) / sigma);
  return detail::make_fit(MethodId::mm, d, std::move(beta), std::move(w), sigma,
                          objective, it, converged);
}

// ---------------------------------------------------------------------------
// GM (bounded-influence) estimators: leverage weights w_i = sqrt(1 - h_i),
// residual scale frozen at the MAD of the LAD residuals.

namespace detail {

enum class GmFlavor { mallows, schweppe };

inline RegressionFit fit_gm(const Dataset& d, const PsiSpec& psi,
                            GmFlavor flavor) {
  const int n = d.n();
  const MethodId id = flavor == GmFlavor::mallows ? MethodId::gm_mallows
                                                  : MethodId::gm_schweppe;
  Vector h = hat_diagonals(d);
  for (int i = 0; i < n; ++i)
    if (h(i) >= 1.0 - 1e-10)
      throw FitError("gm: exactly-leveraged point at " + d.row_label(i));
  Vector lev(n);
  for (int i = 0; i < n; ++i) lev(i) = std::sqrt(1.0 - h(i));

  RegressionFit init = fit_lad(d);
  const double sigma = mad_scale_or_zero(init.residuals);
  if (sigma <= 0.0 || near_exact_fit(init.residuals, d.y())) {
    return make_fit(id, d, init.coefficients, Vector::Ones(n), 0.0, 0.0, 0,
                    true);
  }

  auto combined_weight = [&](double ri, int i) {
    if (flavor == GmFlavor::mallows)
      return lev(i) * irls_weight(psi, ri / sigma);
    return irls_weight(psi, ri / (lev(i) * sigma));
  };
  auto equation_supnorm = [&](const Vector& r) {
    const Matrix design = d.design();
    Vector eq = Vector::Zero(d.p_star());
    for (int i = 0; i < n; ++i) {
      const double t = flavor == GmFlavor::mallows ? r(i) / sigma
                                                   : r(i) / (lev(i) * sigma);
      eq += lev(i) * robustreg::psi(psi, t) * design.row(i).transpose();
    }
    return eq.cwiseAbs().maxCoeff();
  };

  Vector beta = init.coefficients;
  Vector r = init.residuals;
  Vector w(n);
  int it = 0;
  double last_step = std::numeric_limits<double>::infinity();
  for (; it < 500; ++it) {
    for (int i = 0; i < n; ++i) w(i) = combined_weight(r(i), i);
    Vector next = wls_solve(d, w);
    last_step = (next - beta).cwiseAbs().maxCoeff();
    beta = std::move(next);
    r = residuals(d, beta);
    // run to a machine-precision stall so the estimating equation is met tightly
    if (last_step < 1e-14 * (1.0 + beta.cwiseAbs().maxCoeff())) {
      ++it;
      break;
    }
  }
  const bool converged = last_step < 1e-8 * (1.0 + beta.cwiseAbs().maxCoeff());
  for (int i = 0; i < n; ++i) w(i) = combined_weight(r(i), i);
  // objective records how well the printed estimating equation is satisfied
  return make_fit(id, d, std::move(beta), std::move(w), sigma,
                  equation_supnorm(r), it, converged);
}

}  // namespace detail

inline RegressionFit fit_gm_mallows(const Dataset& d,
                                    const PsiSpec& psi = PsiSpec::huber()) {
  return detail::fit_gm(d, psi, detail::GmFlavor::mallows);
}

inline RegressionFit fit_gm_schweppe(const Dataset& d,
                                     const PsiSpec& psi = PsiSpec::huber()) {
  // Note: known to be inconsistent under asymmetric error distributions;
  // results shift when errors are skewed. No mitigation applied.
  return detail::fit_gm(d, psi, detail::GmFlavor::schweppe);
}

// ---------------------------------------------------------------------------
// One-step GM update from high-breakdown starts: coefficients from LTS,
// scale from LMS, one Newton-type correction, no iteration.

// Downweights x-outliers by coordinatewise robust distance:
// z_ij = (x_ij - median_j)/mad_j, RD_i^2 = sum_j z_ij^2,
// w_i = min(1, chi2_{p,q} / RD_i^2). Unlike hat diagonals, these stay small
// for clustered leverage points (a cluster masks itself in the hat matrix,
// splitting h_i across copies), which is what keeps the one-step update
// high-breakdown.
inline Vector robust_leverage_weights(const Dataset& d, double quantile = 0.95) {
  const int n = d.n();
  const int p = d.p();
  Vector rd2 = Vector::Zero(n);
  for (int j = 0; j < p; ++j) {
    std::vector<double> col(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) col[static_cast<size_t>(i)] = d.x()(i, j);
    const double med = median(col);
    const double s = mad_scale_or_zero(col);
    for (int i = 0; i < n; ++i) {
      const double dev = d.x()(i, j) - med;
      if (s > 0.0)
        rd2(i) += (dev / s) * (dev / s);
      else if (dev != 0.0)
        rd2(i) = std::numeric_limits<double>::infinity();
    }
  }
  const double cutoff = chi_square_quantile(p, quantile);
  Vector w(n);
  for (int i = 0; i < n; ++i)
    w(i) = rd2(i) <= cutoff ? 1.0 : cutoff / rd2(i);
  return w;
}

struct S1sConfig {
  PsiSpec psi = PsiSpec::huber();
  // The printed update multiplies the score sum by sigma * w_i. Off switches
  // to the exact Newton step on the observation-standardized loss (identical
  // whenever the leverage weights are constant).
  bool literal_update = true;
  SubsetSearchConfig search;
};

inline RegressionFit fit_s1s(const Dataset& d, const S1sConfig& cfg = {}) {
  const int n = d.n();
  const int p = d.p_star();
  const Matrix design = d.design();

  Vector beta0 = fit_lts(d, LtsConfig{0, cfg.search}).coefficients;
  const double sigma = fit_lms(d, cfg.search).scale;
  Vector r = residuals(d, beta0);
  if (sigma <= 0.0 || detail::near_exact_fit(r, d.y())) {
    // High-breakdown start already interpolates the data; no step to take.
    return detail::make_fit(MethodId::s1s, d, std::move(beta0),
                            Vector::Ones(n), 0.0, 0.0, 0, true);
  }
  const Vector lev = robust_leverage_weights(d);

  Matrix a = Matrix::Zero(p, p);
  Vector b = Vector::Zero(p);
  Vector w(n);
  for (int i = 0; i < n; ++i) {
    const double wi = lev(i);
    const double denom = sigma * wi;
    double t;
    if (denom > 0.0)
      t = r(i) / denom;
    else
      t = r(i) == 0.0 ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), r(i));
    const double dpsi = std::isinf(t) ? 0.0 : psi_prime(cfg.psi, t);
    a += dpsi * design.row(i).transpose() * design.row(i);
    if (cfg.literal_update) {
      if (denom > 0.0) b += denom * psi(cfg.psi, t) * design.row(i).transpose();
    } else {
      if (denom > 0.0) b += psi(cfg.psi, t) / denom * design.row(i).transpose();
    }
    w(i) = std::isinf(t) ? 0.0 : irls_weight(cfg.psi, t);
  }
  if (!cfg.literal_update) {
    // Exact Newton on sum rho(r_i/(sigma w_i)) needs the squared denominators
    // in the curvature term as well.
    a.setZero();
    for (int i = 0; i < n; ++i) {
      const double denom = sigma * lev(i);
      if (denom <= 0.0) continue;
      a += psi_prime(cfg.psi, r(i) / denom) / (denom * denom) *
           design.row(i).transpose() * design.row(i);
    }
  }

  Eigen::ColPivHouseholderQR<Matrix> qr(a);
  qr.setThreshold(1e-12);
  if (qr.rank() < p) {
    return detail::make_fit(MethodId::s1s, d, std::move(beta0), std::move(w),
                            sigma, 0.0, 1, false);
  }
  Vector step = qr.solve(b);
  Vector beta = beta0 + step;
  return detail::make_fit(MethodId::s1s, d, std::move(beta), std::move(w),
                          sigma, step.cwiseAbs().maxCoeff(), 1, true);
}

// ---------------------------------------------------------------------------
// Rank-based fit: minimize the Jaeckel dispersion with Wilcoxon scores. The
// scores sum to zero, so the dispersion ignores the intercept; slopes are
// found by pattern search from the LAD slopes and the intercept is the
// median residual.

// Antisymmetric form: a(i) = -a(n+1-i) holds exactly in floating point.
inline double wilcoxon_score(int i, int n) {
  return std::sqrt(12.0) * (2.0 * i - (n + 1.0)) / (2.0 * (n + 1.0));
}

inline double rank_dispersion(const Vector& r) {
  const int n = static_cast<int>(r.size());
  std::vector<double> sorted = to_std(r);
  std::sort(sorted.begin(), sorted.end());
  double acc = 0.0;
  for (int i = 1; i <= n; ++i)
    acc += wilcoxon_score(i, n) * sorted[static_cast<size_t>(i - 1)];
  return acc;
}

inline RegressionFit fit_r_wilcoxon(const Dataset& d) {
  const int n = d.n();
  if (n < 3) throw FitError("r_wilcoxon: needs at least 3 observations");
  const int p_star = d.p_star();
  const int slope_begin = d.has_intercept() ? 1 : 0;

  Vector beta = fit_lad(d).coefficients;
  double best = rank_dispersion(residuals(d, beta));
  Vector step(p_star);
  for (int j = 0; j < p_star; ++j)
    step(j) = 0.1 * std::max(std::fabs(beta(j)), 0.01);

  int sweeps = 0;
  bool converged = false;
  for (; sweeps < 500; ++sweeps) {
    bool improved = false;
    for (int j = slope_begin; j < p_star; ++j) {
      for (double dir : {+1.0, -1.0}) {
        Vector trial = beta;
        trial(j) += dir * step(j);
        const double obj = rank_dispersion(residuals(d, trial));
        if (obj < best) {
          best = obj;
          beta = std::move(trial);
          improved = true;
          break;
        }
      }
    }
    if (!improved) {
      step *= 0.5;
      double biggest = 0.0;
      for (int j = slope_begin; j < p_star; ++j)
        biggest = std::max(biggest, step(j));
      if (biggest < 1e-8 * (1.0 + beta.cwiseAbs().maxCoeff())) {
        converged = true;
        ++sweeps;
        break;
      }
    }
  }

  if (d.has_intercept()) beta(0) += median(to_std(residuals(d, beta)));
  Vector r = residuals(d, beta);
  return detail::make_fit(MethodId::r_wilcoxon, d, std::move(beta),
                          Vector::Ones(n), mad_scale_or_zero(r), best, sweeps,
                          converged);
}

// ---------------------------------------------------------------------------
// REWLSE: adaptive hard trimming of standardized residuals from a
// high-breakdown initial fit, then one weighted least squares.

struct RewlseState {
  double eta = 2.5;
  int i0 = 0;        // count of standardized residuals below eta
  double d_n = 0.0;  // trimming fraction
  double t_n = std::numeric_limits<double>::infinity();
  int eliminated = 0;
};

// Input must be ascending. Measures the flagged tail (>= eta) against the
// normal |Z| cdf; any excess mass d_n > 0 sets the cutoff t_n at the order
// statistic of index n - floor(n*d_n). Weights below use a strict <, so the
// boundary observation is eliminated along with everything above it:
// floor(n*d_n) + 1 points in all. (F+ < 1 makes n*d_n land strictly below
// the integer tail count, so the inclusive boundary is what removes a full
// contaminated block, or a single extreme point when floor(n*d_n) = 0.)
inline RewlseState rewlse_threshold(const std::vector<double>& sorted_std,
                                    double eta = 2.5) {
  const int n = static_cast<int>(sorted_std.size());
  for (int i = 1; i < n; ++i)
    if (sorted_std[static_cast<size_t>(i)] < sorted_std[static_cast<size_t>(i - 1)])
      throw DataError("rewlse_threshold: input not ascending");

  RewlseState st;
  st.eta = eta;
  int i0 = 0;
  while (i0 < n && sorted_std[static_cast<size_t>(i0)] < eta) ++i0;
  st.i0 = i0;

  double dn = 0.0;
  for (int i = i0 + 1; i <= n; ++i) {
    const double v = sorted_std[static_cast<size_t>(i - 1)];
    const double term =
        (std::isinf(v) ? 1.0 : abs_normal_cdf(v)) - static_cast<double>(i - 1) / n;
    dn = std::max(dn, std::max(0.0, term));
  }
  st.d_n = dn;
  if (dn > 0.0) {
    st.eliminated = static_cast<int>(std::floor(n * dn)) + 1;
    st.t_n = sorted_std[static_cast<size_t>(n - st.eliminated)];
  }
  return st;
}

struct RewlseConfig {
  MethodId initial = MethodId::s;
  double eta = 2.5;
  SubsetSearchConfig search;
};

inline RegressionFit fit_rewlse(const Dataset& d, const RewlseConfig& cfg = {}) {
  RegressionFit init;
  switch (cfg.initial) {
    case MethodId::s: init = fit_s(d, cfg.search); break;
    case MethodId::lms: init = fit_lms(d, cfg.search); break;
    case MethodId::lts: init = fit_lts(d, LtsConfig{0, cfg.search}); break;
    case MethodId::mm: init = fit_mm(d, MmConfig{.search = cfg.search}); break;
    default:
      throw FitError("rewlse: initial estimator must be one of s, lms, lts, mm");
  }

  const int n = d.n();
  const double exact_tol = 1e-9 * std::max(1.0, d.y().cwiseAbs().maxCoeff());
  Vector std_res(n);
  for (int i = 0; i < n; ++i) {
    const double a = std::fabs(init.residuals(i));
    if (init.scale > 0.0)
      std_res(i) = a / init.scale;
    else
      std_res(i) = a <= exact_tol ? 0.0 : std::numeric_limits<double>::infinity();
  }
  std::vector<double> sorted = to_std(std_res);
  std::sort(sorted.begin(), sorted.end());
  const RewlseState st = rewlse_threshold(sorted, cfg.eta);

  Vector w(n);
  int kept = 0;
  for (int i = 0; i < n; ++i) {
    w(i) = std_res(i) < st.t_n ? 1.0 : 0.0;
    kept += w(i) > 0.0;
  }
  if (kept < d.p_star())
    throw FitError("rewlse: fewer than p* observations survive the trimming");

  Vector beta = wls_solve(d, w);
  Vector r = residuals(d, beta);
  double wssr = 0.0;
  for (int i = 0; i < n; ++i) wssr += w(i) * r(i) * r(i);
  return detail::make_fit(MethodId::rewlse, d, std::move(beta), std::move(w),
                          mad_scale_or_zero(r), wssr, 1, true);
}

// ---------------------------------------------------------------------------
// Mean-shift outlier model: per-observation shift gamma_i, sparsified by soft
// or hard thresholding, alternated with OLS on the shifted response.

struct MeanShiftConfig {
  enum class Penalty { soft, hard };
  Penalty penalty = Penalty::soft;
  double lambda = 2.5;  // threshold in units of the initial fit's scale
  int max_iter = 100;
  double tol = 1e-8;
  std::optional<MethodId> initial;  // defaults: ols (soft), lts (hard)
  SubsetSearchConfig search;
};

inline RegressionFit fit_meanshift(const Dataset& d,
                                   const MeanShiftConfig& cfg = {}) {
  const int n = d.n();
  const MethodId id = cfg.penalty == MeanShiftConfig::Penalty::soft
                          ? MethodId::meanshift_soft
                          : MethodId::meanshift_hard;
  const MethodId init_id = cfg.initial.value_or(
      cfg.penalty == MeanShiftConfig::Penalty::soft ? MethodId::ols
                                                    : MethodId::lts);
  RegressionFit init;
  switch (init_id) {
    case MethodId::ols: init = fit_ols(d); break;
    case MethodId::lts: init = fit_lts(d, LtsConfig{0, cfg.search}); break;
    case MethodId::lms: init = fit_lms(d, cfg.search); break;
    case MethodId::s: init = fit_s(d, cfg.search); break;
    case MethodId::lad: init = fit_lad(d); break;
    default: throw FitError("meanshift: unsupported initial estimator");
  }
  const double lambda = cfg.lambda * init.scale;
  if (lambda <= 0.0) {
    // Initial fit is exact; nothing to shift.
    init.method = id;
    return init;
  }

  const bool soft = cfg.penalty == MeanShiftConfig::Penalty::soft;
  auto threshold = [&](double ri) {
    if (soft) {
      const double a = std::fabs(ri) - lambda;
      return a > 0.0 ? std::copysign(a, ri) : 0.0;
    }
    return std::fabs(ri) > lambda ? ri : 0.0;
  };
  auto objective_of = [&](const Vector& r, const Vector& g) {
    double acc = 0.0;
    for (int i = 0; i < n; ++i) {
      const double e = r(i) - g(i);
      acc += 0.5 * e * e;
      if (soft)
        acc += lambda * std::fabs(g(i));
      else if (g(i) != 0.0)
        acc += 0.5 * lambda * lambda;
    }
    return acc;
  };

  Vector beta = init.coefficients;
  Vector gamma = Vector::Zero(n);
  Vector r = residuals(d, beta);
  double objective = objective_of(r, gamma);
  int it = 0;
  bool converged = false;
  for (; it < cfg.max_iter; ++it) {
    Vector next_gamma(n);
    for (int i = 0; i < n; ++i) next_gamma(i) = threshold(r(i));
    Vector next_beta = wls_solve(d.design(), d.y() - next_gamma, Vector::Ones(n));
    Vector next_r = residuals(d, next_beta);
    const double next_obj = objective_of(next_r, next_gamma);
    const double move = std::max((next_beta - beta).cwiseAbs().maxCoeff(),
                                 (next_gamma - gamma).cwiseAbs().maxCoeff());
    if (next_obj > objective * (1.0 + 1e-12) + 1e-12) break;  // should not happen
    beta = std::move(next_beta);
    gamma = std::move(next_gamma);
    r = std::move(next_r);
    objective = next_obj;
    if (move < cfg.tol * (1.0 + beta.cwiseAbs().maxCoeff())) {
      converged = true;
      ++it;
      break;
    }
  }

  Vector w(n);
  for (int i = 0; i < n; ++i) {
    if (gamma(i) == 0.0)
      w(i) = 1.0;
    else if (soft)
      w(i) = 1.0 - std::fabs(gamma(i)) / std::fabs(r(i));
    else
      w(i) = 0.0;
  }
  return detail::make_fit(id, d, std::move(beta), std::move(w),
                          mad_scale_or_zero(r), objective, it, converged);
}

}  // namespace robustreg
