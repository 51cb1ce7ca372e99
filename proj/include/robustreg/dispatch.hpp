#pragma once

#include "robustreg/composite.hpp"
#include "robustreg/mestim.hpp"
#include "robustreg/subset.hpp"
#include "robustreg/types.hpp"

#include <optional>

namespace robustreg {

// Knobs shared by the single entry point used by the simulator and the CLI.
struct FitOptions {
  SubsetSearchConfig search;
  double mm_k1 = 4.68;
  double meanshift_lambda = 2.5;
  double rewlse_eta = 2.5;
  MethodId rewlse_initial = MethodId::s;
  std::optional<MethodId> meanshift_initial;
};

inline RegressionFit fit(const Dataset& d, MethodId method,
                         const FitOptions& opt = {}) {
  switch (method) {
    case MethodId::ols: return fit_ols(d);
    case MethodId::lad: return fit_lad(d);
    case MethodId::m_huber: return fit_m_huber(d);
    case MethodId::m_tukey: return fit_m_tukey(d);
    case MethodId::lms: return fit_lms(d, opt.search);
    case MethodId::lts: return fit_lts(d, LtsConfig{0, opt.search});
    case MethodId::s: return fit_s(d, opt.search);
    case MethodId::lqd: return fit_lqd(d, LqdConfig{opt.search});
    case MethodId::mm:
      return fit_mm(d, MmConfig{.k1 = opt.mm_k1, .search = opt.search});
    case MethodId::gm_mallows: return fit_gm_mallows(d);
    case MethodId::gm_schweppe: return fit_gm_schweppe(d);
    case MethodId::s1s: return fit_s1s(d, S1sConfig{.search = opt.search});
    case MethodId::r_wilcoxon: return fit_r_wilcoxon(d);
    case MethodId::rewlse:
      return fit_rewlse(
          d, RewlseConfig{opt.rewlse_initial, opt.rewlse_eta, opt.search});
    case MethodId::meanshift_soft:
      return fit_meanshift(
          d, MeanShiftConfig{MeanShiftConfig::Penalty::soft,
                             opt.meanshift_lambda, 100, 1e-8,
                             opt.meanshift_initial, opt.search});
    case MethodId::meanshift_hard:
      return fit_meanshift(
          d, MeanShiftConfig{MeanShiftConfig::Penalty::hard,
                             opt.meanshift_lambda, 100, 1e-8,
                             opt.meanshift_initial, opt.search});
  }
  throw FitError("unknown method id");
}

}  // namespace robustreg
