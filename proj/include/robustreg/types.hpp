#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace robustreg {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Bad or unusable input (file/parse/shape problems).
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// An estimator could not produce a fit (rank deficiency, degenerate scale, ...).
struct FitError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class MethodId {
  ols,
  lad,
  m_huber,
  m_tukey,
  lms,
  lts,
  s,
  lqd,
  mm,
  gm_mallows,
  gm_schweppe,
  s1s,
  r_wilcoxon,
  rewlse,
  meanshift_soft,
  meanshift_hard,
};

inline const std::vector<MethodId>& all_methods() {
  static const std::vector<MethodId> ids = {
      MethodId::ols,         MethodId::lad,        MethodId::m_huber,
      MethodId::m_tukey,     MethodId::lms,        MethodId::lts,
      MethodId::s,           MethodId::lqd,        MethodId::mm,
      MethodId::gm_mallows,  MethodId::gm_schweppe, MethodId::s1s,
      MethodId::r_wilcoxon,  MethodId::rewlse,     MethodId::meanshift_soft,
      MethodId::meanshift_hard};
  return ids;
}

inline std::string method_name(MethodId m) {
  switch (m) {
    case MethodId::ols: return "ols";
    case MethodId::lad: return "lad";
    case MethodId::m_huber: return "m_huber";
    case MethodId::m_tukey: return "m_tukey";
    case MethodId::lms: return "lms";
    case MethodId::lts: return "lts";
    case MethodId::s: return "s";
    case MethodId::lqd: return "lqd";
    case MethodId::mm: return "mm";
    case MethodId::gm_mallows: return "gm_mallows";
    case MethodId::gm_schweppe: return "gm_schweppe";
    case MethodId::s1s: return "s1s";
    case MethodId::r_wilcoxon: return "r_wilcoxon";
    case MethodId::rewlse: return "rewlse";
    case MethodId::meanshift_soft: return "meanshift_soft";
    case MethodId::meanshift_hard: return "meanshift_hard";
  }
  throw std::logic_error("unreachable method id");
}

inline std::optional<MethodId> parse_method(const std::string& s) {
  for (MethodId m : all_methods())
    if (method_name(m) == s) return m;
  return std::nullopt;
}

// Covariates without the intercept column; estimators prepend the constant
// column themselves when has_intercept is set.
class Dataset {
 public:
  Dataset(Matrix x, Vector y, bool intercept = true,
          std::vector<std::string> row_labels = {})
      : x_(std::move(x)),
        y_(std::move(y)),
        intercept_(intercept),
        labels_(std::move(row_labels)) {
    if (x_.rows() != y_.size())
      throw DataError("dataset: x has " + std::to_string(x_.rows()) +
                      " rows but y has " + std::to_string(y_.size()));
    if (!x_.allFinite()) throw DataError("dataset: non-finite covariate value");
    if (!y_.allFinite()) throw DataError("dataset: non-finite response value");
    if (n() < p_star() + 1)
      throw DataError("dataset: n too small (" + std::to_string(n()) +
                      " rows for " + std::to_string(p_star()) +
                      " coefficients)");
    if (!labels_.empty() && static_cast<int>(labels_.size()) != n())
      throw DataError("dataset: row label count mismatch");
  }

  int n() const { return static_cast<int>(x_.rows()); }
  int p() const { return static_cast<int>(x_.cols()); }
  int p_star() const { return p() + (intercept_ ? 1 : 0); }
  bool has_intercept() const { return intercept_; }
  const Matrix& x() const { return x_; }
  const Vector& y() const { return y_; }

  // n x p* matrix with the constant-1 column applied.
  Matrix design() const {
    if (!intercept_) return x_;
    Matrix d(n(), p_star());
    d.col(0).setOnes();
    d.rightCols(p()) = x_;
    return d;
  }

  std::string row_label(int i) const {
    if (!labels_.empty()) return labels_[static_cast<size_t>(i)];
    return "row " + std::to_string(i + 1);
  }

  Dataset without_row(int drop) const {
    Matrix x2(n() - 1, p());
    Vector y2(n() - 1);
    std::vector<std::string> l2;
    int k = 0;
    for (int i = 0; i < n(); ++i) {
      if (i == drop) continue;
      x2.row(k) = x_.row(i);
      y2(k) = y_(i);
      if (!labels_.empty()) l2.push_back(labels_[static_cast<size_t>(i)]);
      ++k;
    }
    return Dataset(std::move(x2), std::move(y2), intercept_, std::move(l2));
  }

 private:
  Matrix x_;
  Vector y_;
  bool intercept_;
  std::vector<std::string> labels_;
};

inline Vector residuals(const Dataset& d, const Vector& beta) {
  if (beta.size() != d.p_star())
    throw DataError("residuals: expected " + std::to_string(d.p_star()) +
                    " coefficients, got " + std::to_string(beta.size()));
  return d.y() - d.design() * beta;
}

struct RegressionFit {
  MethodId method = MethodId::ols;
  Vector coefficients;  // intercept first when present
  Vector residuals;     // y - design * coefficients
  Vector weights;       // final per-observation weights, each in [0,1]
  double scale = 0.0;   // residual scale in response units; 0 flags an exact fit
  double objective = 0.0;
  int iterations = 0;
  bool converged = true;
};

}  // namespace robustreg
