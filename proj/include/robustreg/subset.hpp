#pragma once

#include "robustreg/gauss.hpp"
#include "robustreg/linalg.hpp"
#include "robustreg/mestim.hpp"
#include "robustreg/rng.hpp"
#include "robustreg/scale.hpp"
#include "robustreg/types.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

namespace robustreg {

struct SubsetSearchConfig {
  int n_starts = 500;   // random elemental starts beyond the exhaustive range
  int n_refine = 10;    // best candidates refined to convergence
  uint64_t rng_seed = 0;
  long exhaustive_threshold = 20000;  // enumerate all subsets when C(n,p*) fits
};

namespace detail {

inline bool combinations_within(int n, int k, long cap) {
  double c = 1.0;
  for (int i = 1; i <= k; ++i) {
    c *= static_cast<double>(n - k + i) / i;
    if (c > static_cast<double>(cap)) return false;
  }
  return true;
}

// Visit elemental candidates (exact fits through p* rows) in a deterministic
// order: lexicographic subsets when exhaustive, otherwise seeded random
// draws. Singular subsets are skipped. Returns the number of candidates
// actually visited.
template <class Fn>
long for_each_elemental(const Dataset& d, const SubsetSearchConfig& cfg,
                        Fn&& fn) {
  const int n = d.n();
  const int k = d.p_star();
  const Matrix design = d.design();

  long visited = 0;
  auto try_subset = [&](const std::vector<int>& idx) {
    Matrix a(k, k);
    Vector b(k);
    for (int i = 0; i < k; ++i) {
      a.row(i) = design.row(idx[static_cast<size_t>(i)]);
      b(i) = d.y()(idx[static_cast<size_t>(i)]);
    }
    Eigen::ColPivHouseholderQR<Matrix> qr(a);
    qr.setThreshold(1e-12);
    if (qr.rank() < k) return;
    Vector beta = qr.solve(b);
    if (!beta.allFinite()) return;
    ++visited;
    fn(idx, beta);
  };

  if (combinations_within(n, k, cfg.exhaustive_threshold)) {
    std::vector<int> idx(static_cast<size_t>(k));
    for (int i = 0; i < k; ++i) idx[static_cast<size_t>(i)] = i;
    while (true) {
      try_subset(idx);
      int pos = k - 1;
      while (pos >= 0 && idx[static_cast<size_t>(pos)] == n - k + pos) --pos;
      if (pos < 0) break;
      ++idx[static_cast<size_t>(pos)];
      for (int j = pos + 1; j < k; ++j)
        idx[static_cast<size_t>(j)] = idx[static_cast<size_t>(j - 1)] + 1;
    }
  } else {
    CounterRng rng(cfg.rng_seed, 0);
    std::vector<int> idx(static_cast<size_t>(k));
    for (int s = 0; s < cfg.n_starts; ++s) {
      for (int i = 0; i < k; ++i) {
        int cand;
        bool fresh;
        do {
          cand = static_cast<int>(rng.below(static_cast<uint64_t>(n)));
          fresh = true;
          for (int j = 0; j < i; ++j)
            if (idx[static_cast<size_t>(j)] == cand) fresh = false;
        } while (!fresh);
        idx[static_cast<size_t>(i)] = cand;
      }
      std::sort(idx.begin(), idx.end());
      try_subset(idx);
    }
  }
  return visited;
}

// Indices of the q smallest squared residuals, ties broken by row index.
inline std::vector<int> smallest_sq_indices(const Vector& r, int q) {
  const int n = static_cast<int>(r.size());
  std::vector<int> order(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) order[static_cast<size_t>(i)] = i;
  std::nth_element(order.begin(), order.begin() + (q - 1), order.end(),
                   [&](int a, int b) {
                     const double ra = r(a) * r(a), rb = r(b) * r(b);
                     return ra < rb || (ra == rb && a < b);
                   });
  order.resize(static_cast<size_t>(q));
  std::sort(order.begin(), order.end());
  return order;
}

inline Vector ols_on_rows(const Dataset& d, const std::vector<int>& rows) {
  const Matrix design = d.design();
  Matrix a(static_cast<long>(rows.size()), d.p_star());
  Vector b(static_cast<long>(rows.size()));
  for (size_t i = 0; i < rows.size(); ++i) {
    a.row(static_cast<long>(i)) = design.row(rows[i]);
    b(static_cast<long>(i)) = d.y()(rows[i]);
  }
  return wls_solve(a, b, Vector::Ones(static_cast<long>(rows.size())));
}

}  // namespace detail

// ---------------------------------------------------------------------------
// LMS: minimize the h-th smallest squared residual, h = floor((n+p*+1)/2).

inline int lms_order_statistic(int n, int p_star) {
  return (n + p_star + 1) / 2;
}

inline double lms_objective(const Dataset& d, const Vector& beta) {
  Vector r = residuals(d, beta);
  std::vector<double> sq(static_cast<size_t>(d.n()));
  for (int i = 0; i < d.n(); ++i) sq[static_cast<size_t>(i)] = r(i) * r(i);
  return kth_smallest(std::move(sq), lms_order_statistic(d.n(), d.p_star()));
}

// Pure elemental search: evaluate the objective at every candidate and keep
// the first strict minimizer (no local refinement).
inline RegressionFit fit_lms(const Dataset& d,
                             const SubsetSearchConfig& cfg = {}) {
  double best = std::numeric_limits<double>::infinity();
  Vector best_beta;
  const long visited = detail::for_each_elemental(
      d, cfg, [&](const std::vector<int>&, const Vector& beta) {
        const double obj = lms_objective(d, beta);
        if (obj < best) {
          best = obj;
          best_beta = beta;
        }
      });
  if (visited == 0) throw FitError("lms: all elemental subsets degenerate");

  Vector r = residuals(d, best_beta);
  Vector w(d.n());
  for (int i = 0; i < d.n(); ++i) w(i) = (r(i) * r(i) <= best) ? 1.0 : 0.0;
  const double scale =
      1.4826 * (1.0 + 5.0 / (d.n() - d.p_star())) * std::sqrt(best);
  return detail::make_fit(MethodId::lms, d, std::move(best_beta), std::move(w),
                          scale, best, static_cast<int>(visited), true);
}

// ---------------------------------------------------------------------------
// LTS: minimize the sum of the q smallest squared residuals by elemental
// starts plus concentration steps.

struct LtsConfig {
  int q = 0;  // 0 means the default floor(n/2) + 1
  SubsetSearchConfig search;
  int max_csteps = 50;
};

inline double lts_objective(const Dataset& d, const Vector& beta, int q) {
  Vector r = residuals(d, beta);
  double acc = 0.0;
  for (int i : detail::smallest_sq_indices(r, q)) acc += r(i) * r(i);
  return acc;
}

// Normal-consistency factor for the truncated variance at coverage q/n.
inline double lts_scale_factor(int q, int n) {
  const double alpha = static_cast<double>(q) / n;
  if (alpha >= 1.0 - 1e-12) return 1.0;
  const double k = normal_quantile(0.5 * (1.0 + alpha));
  return 1.0 / std::sqrt(1.0 - 2.0 * k * normal_pdf(k) / alpha);
}

inline RegressionFit fit_lts(const Dataset& d, LtsConfig cfg = {}) {
  const int n = d.n();
  const int q = cfg.q > 0 ? cfg.q : n / 2 + 1;
  if (q <= d.p_star() || q > n)
    throw FitError("lts: coverage q out of range");

  struct Candidate {
    double score;
    long order;
    Vector beta;
  };
  std::vector<Candidate> top;
  long order = 0;
  auto cstep = [&](const Vector& beta) {
    return detail::ols_on_rows(d,
                               detail::smallest_sq_indices(residuals(d, beta), q));
  };

  const long visited = detail::for_each_elemental(
      d, cfg.search, [&](const std::vector<int>&, const Vector& beta0) {
        Vector beta = cstep(cstep(beta0));
        Candidate c{lts_objective(d, beta, q), order++, std::move(beta)};
        top.push_back(std::move(c));
        std::sort(top.begin(), top.end(), [](const Candidate& a, const Candidate& b) {
          return a.score < b.score || (a.score == b.score && a.order < b.order);
        });
        if (static_cast<int>(top.size()) > cfg.search.n_refine) top.pop_back();
      });
  if (visited == 0) throw FitError("lts: all elemental subsets degenerate");

  Vector best_beta;
  double best_obj = std::numeric_limits<double>::infinity();
  long best_order = 0;
  int best_steps = 0;
  bool best_converged = false;
  for (const Candidate& c : top) {
    Vector beta = c.beta;
    std::vector<int> covered = detail::smallest_sq_indices(residuals(d, beta), q);
    double obj = lts_objective(d, beta, q);
    int steps = 0;
    bool stable = false;
    for (; steps < cfg.max_csteps; ++steps) {
      Vector next = detail::ols_on_rows(d, covered);
      std::vector<int> next_covered =
          detail::smallest_sq_indices(residuals(d, next), q);
      const double next_obj = lts_objective(d, next, q);
      if (next_obj > obj * (1.0 + 1e-12) + 1e-12)
        throw FitError("lts: concentration step increased the objective");
      beta = std::move(next);
      obj = next_obj;
      if (next_covered == covered) {
        stable = true;
        ++steps;
        break;
      }
      covered = std::move(next_covered);
    }
    if (obj < best_obj) {
      best_obj = obj;
      best_beta = beta;
      best_order = c.order;
      best_steps = steps;
      best_converged = stable;
    } else if (obj == best_obj && c.order < best_order) {
      best_beta = beta;
      best_order = c.order;
      best_steps = steps;
      best_converged = stable;
    }
  }

  Vector r = residuals(d, best_beta);
  std::vector<int> covered = detail::smallest_sq_indices(r, q);
  Vector w = Vector::Zero(n);
  for (int i : covered) w(i) = 1.0;
  const double scale = std::sqrt(best_obj / q) * lts_scale_factor(q, n);
  return detail::make_fit(MethodId::lts, d, std::move(best_beta), std::move(w),
                          scale, best_obj, best_steps, best_converged);
}

// ---------------------------------------------------------------------------
// S: minimize the residual M-scale. The scale equation target carries the
// fitted-coefficient degrees-of-freedom correction (dof = p*), the standard
// finite-sample adjustment for scales of regression residuals.

inline MScaleSpec s_scale_spec(const Dataset& d, double k0 = kBisquareC_bp50) {
  MScaleSpec spec;
  spec.c = k0;
  spec.dof = d.p_star();
  return spec;
}

inline RegressionFit fit_s(const Dataset& d, const SubsetSearchConfig& cfg = {},
                           double k0 = kBisquareC_bp50) {
  const int n = d.n();
  const MScaleSpec spec = s_scale_spec(d, k0);
  const double target = detail::m_scale_target(spec, n);
  const double exact_tol = 1e-9 * std::max(1.0, d.y().cwiseAbs().maxCoeff());
  const PsiSpec weight_psi = PsiSpec::bisquare(k0);

  struct Candidate {
    double scale;
    long order;
    Vector beta;
  };
  std::vector<Candidate> top;
  long order = 0;
  Vector exact_beta;
  bool exact_found = false;

  detail::for_each_elemental(d, cfg, [&](const std::vector<int>&,
                                         const Vector& beta) {
    if (exact_found) return;
    const long my_order = order++;
    Vector r = residuals(d, beta);
    int nonzero = 0;
    for (int i = 0; i < n; ++i)
      if (std::fabs(r(i)) > exact_tol) ++nonzero;
    if (static_cast<double>(nonzero) <= target) {
      // A majority sits on this hyperplane; scale degenerates to 0 and no
      // positive-scale candidate can beat it.
      exact_beta = beta;
      exact_found = true;
      return;
    }
    // Monotonicity of the scale equation gives an exact pruning test: if the
    // loss sum at the current worst kept scale still exceeds the target, this
    // candidate's scale is larger and cannot enter the short list.
    if (static_cast<int>(top.size()) >= cfg.n_refine) {
      const double worst = top.back().scale;
      if (detail::m_scale_sum(to_std(r), spec.c, worst) >= target) return;
    }
    double scale;
    try {
      scale = m_scale(r, spec);
    } catch (const FitError&) {
      return;  // candidate skipped
    }
    top.push_back(Candidate{scale, my_order, beta});
    std::sort(top.begin(), top.end(), [](const Candidate& a, const Candidate& b) {
      return a.scale < b.scale || (a.scale == b.scale && a.order < b.order);
    });
    if (static_cast<int>(top.size()) > cfg.n_refine) top.pop_back();
  });

  if (exact_found) {
    Vector r = residuals(d, exact_beta);
    Vector w(n);
    for (int i = 0; i < n; ++i) w(i) = std::fabs(r(i)) <= exact_tol ? 1.0 : 0.0;
    return detail::make_fit(MethodId::s, d, std::move(exact_beta), std::move(w),
                            0.0, 0.0, 0, true);
  }
  if (top.empty())
    throw FitError("s: no elemental candidate admitted a residual scale");

  Vector best_beta;
  double best_scale = std::numeric_limits<double>::infinity();
  int best_steps = 0;
  bool best_converged = false;
  for (const Candidate& c : top) {
    Vector beta = c.beta;
    double scale = c.scale;
    int steps = 0;
    bool settled = false;
    for (; steps < 100; ++steps) {
      Vector r = residuals(d, beta);
      Vector w(n);
      for (int i = 0; i < n; ++i) w(i) = irls_weight(weight_psi, r(i) / scale);
      Vector next;
      try {
        next = wls_solve(d, w);
      } catch (const FitError&) {
        break;
      }
      double next_scale;
      try {
        next_scale = m_scale(residuals(d, next), spec);
      } catch (const FitError&) {
        // Refinement walked onto a (near-)exact hyperplane.
        Vector rr = residuals(d, next);
        Vector we(n);
        for (int i = 0; i < n; ++i)
          we(i) = std::fabs(rr(i)) <= exact_tol ? 1.0 : 0.0;
        return detail::make_fit(MethodId::s, d, std::move(next), std::move(we),
                                0.0, 0.0, steps, true);
      }
      const bool done = std::fabs(next_scale - scale) < 1e-9 * scale;
      beta = std::move(next);
      scale = next_scale;
      if (done) {
        settled = true;
        ++steps;
        break;
      }
    }
    if (scale < best_scale) {
      best_scale = scale;
      best_beta = beta;
      best_steps = steps;
      best_converged = settled;
    }
  }

  Vector r = residuals(d, best_beta);
  Vector w(n);
  for (int i = 0; i < n; ++i) w(i) = irls_weight(weight_psi, r(i) / best_scale);
  return detail::make_fit(MethodId::s, d, std::move(best_beta), std::move(w),
                          best_scale, best_scale, best_steps, best_converged);
}

// ---------------------------------------------------------------------------
// LQD: minimize the k_pairs-th smallest pairwise absolute residual
// difference, k_pairs = C(h_p, 2), h_p = floor((n+p*+1)/2). The objective
// ignores the intercept, so the search runs over slopes and the intercept is
// recovered as the median residual.

struct LqdConfig {
  SubsetSearchConfig search;
  int pattern_iters = 200;
};

inline long lqd_k_pairs(int n, int p_star) {
  const long hp = lms_order_statistic(n, p_star);
  return hp * (hp - 1) / 2;
}

inline double lqd_objective_residuals(const Vector& r, long k_pairs) {
  const int n = static_cast<int>(r.size());
  if (n > 2000)
    throw FitError("lqd: n too large for pairwise materialization");
  std::vector<double> diffs;
  diffs.reserve(static_cast<size_t>(n) * (n - 1) / 2);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) diffs.push_back(std::fabs(r(i) - r(j)));
  return kth_smallest(std::move(diffs), static_cast<int>(k_pairs));
}

inline double lqd_objective(const Dataset& d, const Vector& beta,
                            const LqdConfig& = {}) {
  return lqd_objective_residuals(residuals(d, beta),
                                 lqd_k_pairs(d.n(), d.p_star()));
}

inline RegressionFit fit_lqd(const Dataset& d, const LqdConfig& cfg = {}) {
  const int n = d.n();
  const long k_pairs = lqd_k_pairs(n, d.p_star());
  const int slope_begin = d.has_intercept() ? 1 : 0;

  double best = std::numeric_limits<double>::infinity();
  Vector best_beta;
  const long visited = detail::for_each_elemental(
      d, cfg.search, [&](const std::vector<int>&, const Vector& beta) {
        const double obj = lqd_objective_residuals(residuals(d, beta), k_pairs);
        if (obj < best) {
          best = obj;
          best_beta = beta;
        }
      });
  if (visited == 0) throw FitError("lqd: all elemental subsets degenerate");

  // Coordinatewise pattern search over the slope coordinates.
  Vector beta = best_beta;
  const int p_star = d.p_star();
  Vector step(p_star);
  for (int j = 0; j < p_star; ++j)
    step(j) = 0.1 * std::max(std::fabs(beta(j)), 0.01);
  int sweeps = 0;
  for (; sweeps < cfg.pattern_iters; ++sweeps) {
    bool improved = false;
    for (int j = slope_begin; j < p_star; ++j) {
      for (double dir : {+1.0, -1.0}) {
        Vector trial = beta;
        trial(j) += dir * step(j);
        const double obj = lqd_objective_residuals(residuals(d, trial), k_pairs);
        if (obj < best) {
          best = obj;
          beta = std::move(trial);
          improved = true;
          break;
        }
      }
    }
    if (!improved) step *= 0.5;
  }

  if (d.has_intercept()) {
    Vector r = residuals(d, beta);
    beta(0) += median(to_std(r));
  }
  Vector r = residuals(d, beta);

  // Covered set: the h_p observations nearest the central residual.
  const int hp = lms_order_statistic(n, d.p_star());
  const double med = median(to_std(r));
  std::vector<double> dev(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) dev[static_cast<size_t>(i)] = std::fabs(r(i) - med);
  const double cutoff = kth_smallest(dev, hp);
  Vector w(n);
  for (int i = 0; i < n; ++i)
    w(i) = std::fabs(r(i) - med) <= cutoff ? 1.0 : 0.0;

  // Gaussian consistency for the pairwise-quantile scale.
  const double consistency = 1.0 / (std::sqrt(2.0) * normal_quantile(0.625));
  return detail::make_fit(MethodId::lqd, d, std::move(beta), std::move(w),
                          best * consistency, best, sweeps, true);
}

}  // namespace robustreg
