#ifndef GMATCH_MATCHING_HPP
#define GMATCH_MATCHING_HPP

// Group means, within-group differencing, matching errors and the regret
// diagnostics (SSME / MER / extrapolation error) built on them.

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "gmatch/core.hpp"
#include "gmatch/error.hpp"
#include "gmatch/solver.hpp"

namespace gmatch {

/// Cell means m_{j,t}, counts n_{j,t} and shares n_{j,t}/n_t. Rows are
/// groups 0..K, columns periods 1..T.
struct GroupMeans {
  TimeConfig time;
  Matrix means;
  CountMatrix counts;
  Matrix shares;

  int num_groups() const noexcept { return static_cast<int>(means.rows()) - 1; }

  /// Exact population means; counts and shares are left empty.
  static GroupMeans population(const TimeConfig& time, Matrix means) {
    if (means.cols() != time.num_periods() || means.rows() < 2) {
      throw ValidationError("population means: expected (K+1) x T matrix");
    }
    return {time, std::move(means), CountMatrix(), Matrix()};
  }
};

inline GroupMeans compute_group_means(const Dataset& data) {
  const int k = data.num_groups();
  const int periods = data.time_config().num_periods();
  Matrix sums = Matrix::Zero(k + 1, periods);
  for (const Observation& o : data.observations()) {
    sums(o.group, o.period - 1) += o.outcome;
  }
  const CountMatrix& counts = data.counts();
  Matrix means(k + 1, periods);
  Matrix shares(k + 1, periods);
  for (int t = 0; t < periods; ++t) {
    const double total = static_cast<double>(counts.col(t).sum());
    for (int j = 0; j <= k; ++j) {
      if (counts(j, t) == 0) {
        throw ValidationError("empty cell: group " + std::to_string(j) + ", period " +
                              std::to_string(t + 1));
      }
      means(j, t) = sums(j, t) / static_cast<double>(counts(j, t));
      shares(j, t) = static_cast<double>(counts(j, t)) / total;
    }
  }
  return {data.time_config(), std::move(means), counts, std::move(shares)};
}

/// mu_{j,t}(lambda) = m_{j,t} - sum_{s in pre} lambda_s m_{j,s}.
struct DifferencedMeans {
  TimeConfig time;
  Matrix mu;
  DifferencingScheme scheme;

  int num_groups() const noexcept { return static_cast<int>(mu.rows()) - 1; }
  /// Donor column vector (mu_{1,t}, ..., mu_{K,t}) for a 1-based period.
  Vector donors(int period) const { return mu.col(period - 1).tail(mu.rows() - 1); }
  double treated(int period) const { return mu(0, period - 1); }
};

inline Matrix difference_means(const Matrix& means, const Vector& lambda) {
  const Eigen::Index pre = lambda.size();
  if (pre > means.cols()) throw ValidationError("differencing: lambda longer than the panel");
  Matrix mu = means;
  for (Eigen::Index j = 0; j < means.rows(); ++j) {
    double baseline = 0.0;
    for (Eigen::Index s = 0; s < pre; ++s) baseline += lambda[s] * means(j, s);
    for (Eigen::Index t = 0; t < means.cols(); ++t) mu(j, t) = means(j, t) - baseline;
  }
  return mu;
}

inline DifferencedMeans apply_differencing(const GroupMeans& means,
                                           const DifferencingScheme& scheme) {
  if (scheme.lambda().size() != means.time.num_pre()) {
    throw ValidationError("differencing: scheme does not match the time configuration");
  }
  return {means.time, difference_means(means.means, scheme.lambda()), scheme};
}

inline std::vector<int> pre_periods(const TimeConfig& time) {
  std::vector<int> out;
  for (int t = 1; t < time.treatment_period(); ++t) out.push_back(t);
  return out;
}

inline std::vector<int> post_periods(const TimeConfig& time) {
  std::vector<int> out;
  for (int t = time.treatment_period(); t <= time.num_periods(); ++t) out.push_back(t);
  return out;
}

inline std::vector<int> all_periods(const TimeConfig& time) {
  std::vector<int> out;
  for (int t = 1; t <= time.num_periods(); ++t) out.push_back(t);
  return out;
}

/// e_t = mu_{0,t} - sum_j mu_{j,t} w_j for each requested period.
inline Vector matching_errors(const DifferencedMeans& dm, const SimplexVector& w,
                              const std::vector<int>& periods) {
  if (w.size() != dm.num_groups()) {
    throw ValidationError("matching_errors: weight length " + std::to_string(w.size()) +
                          " does not match K = " + std::to_string(dm.num_groups()));
  }
  Vector e(static_cast<Eigen::Index>(periods.size()));
  for (std::size_t i = 0; i < periods.size(); ++i) {
    const int t = periods[i];
    e[static_cast<Eigen::Index>(i)] = dm.treated(t) - dm.donors(t).dot(w.values());
  }
  return e;
}

/// Mean squared matching error over a regime.
inline double ssme(const Vector& errors) {
  if (errors.size() == 0) throw ValidationError("ssme: no periods");
  return errors.squaredNorm() / static_cast<double>(errors.size());
}

/// The quadratic form of the regime SSME as 1/2 w'Hw - h'w (+ const):
/// H = (2/|T_d|) sum mu_t mu_t', h = (2/|T_d|) sum mu_{0,t} mu_t.
inline QpProblem ssme_problem(const DifferencedMeans& dm, const std::vector<int>& periods) {
  const int k = dm.num_groups();
  QpProblem p{Matrix::Zero(k, k), Vector::Zero(k)};
  for (int t : periods) {
    const Vector d = dm.donors(t);
    p.hessian.noalias() += d * d.transpose();
    p.linear += dm.treated(t) * d;
  }
  const double scale = 2.0 / static_cast<double>(periods.size());
  p.hessian *= scale;
  p.linear *= scale;
  return p;
}

struct RegretDiagnostics {
  double ssme_pre = 0.0;
  double ssme_post = 0.0;
  double mer_pre = 0.0;
  double mer_post = 0.0;
  double delta_mer = 0.0;
  SimplexVector minimizer_pre{1.0};
  SimplexVector minimizer_post{1.0};
  /// lambda_min(Gamma'Gamma)/|T0| for the pre-period donor matrix.
  double rank_stat = 0.0;
  /// Pre-period minimiser is not unique (rank condition fails).
  bool non_unique = false;
  std::vector<std::string> warnings;
};

/// Smallest eigenvalue of Gamma'Gamma over |T0|, Gamma the |T0| x K matrix
/// of differenced donor means in the pre-treatment periods.
inline double rank_statistic(const DifferencedMeans& dm) {
  const int pre = dm.time.num_pre();
  const Matrix gamma = dm.mu.block(1, 0, dm.num_groups(), pre).transpose();
  const Matrix gram = gamma.transpose() * gamma;
  return symmetric_eig(gram).values[0] / static_cast<double>(pre);
}

/// Pointwise regret diagnostics of `w` at the supplied (estimated or
/// population) means.
inline RegretDiagnostics regret_diagnostics(const DifferencedMeans& dm, const SimplexVector& w) {
  const auto pre = pre_periods(dm.time);
  const auto post = post_periods(dm.time);
  RegretDiagnostics out;
  out.ssme_pre = ssme(matching_errors(dm, w, pre));
  out.ssme_post = ssme(matching_errors(dm, w, post));

  const QpSolution pre_fit = solve_simplex_qp(ssme_problem(dm, pre));
  const QpSolution post_fit = solve_simplex_qp(ssme_problem(dm, post), std::nullopt, false);
  out.minimizer_pre = pre_fit.w;
  out.minimizer_post = post_fit.w;
  out.mer_pre = out.ssme_pre - ssme(matching_errors(dm, pre_fit.w, pre));
  out.mer_post = out.ssme_post - ssme(matching_errors(dm, post_fit.w, post));
  out.delta_mer = out.mer_post - out.mer_pre;
  out.rank_stat = rank_statistic(dm);
  out.non_unique = !pre_fit.unique;
  if (static_cast<int>(pre.size()) < dm.num_groups()) {
    out.non_unique = true;
    out.warnings.emplace_back(
        "fewer pre-treatment periods than donor groups: pre-period minimiser is not unique");
  }
  return out;
}

}  // namespace gmatch

#endif  // GMATCH_MATCHING_HPP
