#ifndef GMATCH_ESTIMATORS_HPP
#define GMATCH_ESTIMATORS_HPP

// Weight rules (DID, SC, SCD, SDID) and per-period effect estimates
// theta_t(lambda, w) = mu_{0,t}(lambda) - mu_t(lambda)'w.

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "gmatch/core.hpp"
#include "gmatch/error.hpp"
#include "gmatch/matching.hpp"
#include "gmatch/solver.hpp"

namespace gmatch {

enum class WeightMethod { did, sc, scd, sdid };

inline std::string to_string(WeightMethod m) {
  switch (m) {
    case WeightMethod::did: return "did";
    case WeightMethod::sc: return "sc";
    case WeightMethod::scd: return "scd";
    case WeightMethod::sdid: return "sdid";
  }
  return "unknown";
}

inline WeightMethod parse_weight_method(std::string_view text) {
  if (text == "did") return WeightMethod::did;
  if (text == "sc") return WeightMethod::sc;
  if (text == "scd") return WeightMethod::scd;
  if (text == "sdid") return WeightMethod::sdid;
  throw ValidationError("unknown method '" + std::string(text) + "'");
}

struct WeightEstimate {
  WeightMethod method;
  SimplexVector w;
  /// Differencing used to fit (SC/SCD/SDID) or to estimate (DID) effects.
  DifferencingScheme lambda_used;
  /// SDID only: lambda*(w^unif), the differencing paired with w in estimation.
  std::optional<DifferencingScheme> sdid_lambda;
  std::optional<QpSolution> qp;
  std::optional<QpSolution> sdid_qp;

  /// Differencing applied when turning these weights into effects.
  const DifferencingScheme& effect_scheme() const {
    return sdid_lambda ? *sdid_lambda : lambda_used;
  }
};

/// Donor-pool group shares: units per group in panel mode, rows per group
/// pooled over periods for repeated cross-sections.
inline WeightEstimate did_weights(const Dataset& data) {
  const int k = data.num_groups();
  Vector counts = Vector::Zero(k);
  if (data.mode() == DatasetMode::panel) {
    for (int g : data.unit_groups()) {
      if (g >= 1) counts[g - 1] += 1.0;
    }
  } else {
    for (const Observation& o : data.observations()) {
      if (o.group >= 1) counts[o.group - 1] += 1.0;
    }
  }
  const double total = counts.sum();
  if (total <= 0.0) throw ValidationError("did_weights: no donor observations");
  return {WeightMethod::did, SimplexVector(counts / total),
          make_differencing(DifferencingKind::did, data.time_config())};
}

/// Pre-period fit of the simplex weights: minimises
/// sum_{t < T*} (mu_{0,t} - mu_t'w)^2, i.e. 1/2 w'Hw - h'w with
/// H = sum mu_t mu_t' and h = sum mu_{0,t} mu_t.
inline WeightEstimate fit_weights(const DifferencedMeans& dm, WeightMethod method) {
  if (method != WeightMethod::sc && method != WeightMethod::scd) {
    throw ValidationError("fit_weights: method must be sc or scd");
  }
  const bool zero_lambda = dm.scheme.kind() == DifferencingKind::none;
  if (method == WeightMethod::sc && !zero_lambda) {
    throw ValidationError("fit_weights: sc requires the zero (none) differencing");
  }
  if (method == WeightMethod::scd && zero_lambda) {
    throw ValidationError("fit_weights: scd requires a non-zero differencing");
  }
  const int k = dm.num_groups();
  const auto pre = pre_periods(dm.time);
  if (pre.empty()) throw ValidationError("fit_weights: no pre-treatment periods");
  QpProblem problem{Matrix::Zero(k, k), Vector::Zero(k)};
  for (int t : pre) {
    const Vector d = dm.donors(t);
    problem.hessian.noalias() += d * d.transpose();
    problem.linear += dm.treated(t) * d;
  }
  QpSolution solution = solve_simplex_qp(problem);
  return {method, solution.w, dm.scheme, std::nullopt, std::move(solution)};
}

/// Objective of the SDID time-weight problem,
/// sum_k ( sum_{s post} [mu_{k,s}(lambda) - sum_j mu_{j,s}(lambda) w_j] )^2,
/// written as a quadratic in lambda.
inline QpProblem sdid_lambda_problem(const Matrix& means, const TimeConfig& time,
                                     const SimplexVector& w) {
  const int k = static_cast<int>(means.rows()) - 1;
  const int pre = time.num_pre();
  const double post = time.num_post();
  // D_{k,s}: donor k's deviation from the w-weighted donor average.
  const Matrix donors = means.bottomRows(k);
  const Eigen::RowVectorXd average = w.values().transpose() * donors;
  const Matrix deviation = donors.rowwise() - average;
  QpProblem p{Matrix::Zero(pre, pre), Vector::Zero(pre)};
  for (int r = 0; r < k; ++r) {
    const double a = deviation.row(r).segment(pre, time.num_post()).sum();
    const Vector d = deviation.row(r).head(pre).transpose();
    p.hessian.noalias() += (post * post) * d * d.transpose();
    p.linear += (post * a) * d;
  }
  return p;
}

/// Synthetic difference-in-differences without regularisation:
/// w = w*(lambda^unif) and lambda = lambda*(w^unif).
inline WeightEstimate sdid_fit(const GroupMeans& means) {
  const TimeConfig& time = means.time;
  if (time.num_pre() < 1 || time.num_post() < 1) {
    throw ValidationError("sdid_fit: need pre- and post-treatment periods");
  }
  const DifferencingScheme uniform = make_differencing(DifferencingKind::uniform, time);
  WeightEstimate fit = fit_weights(apply_differencing(means, uniform), WeightMethod::scd);
  const int k = means.num_groups();
  QpSolution lambda_fit =
      solve_simplex_qp(sdid_lambda_problem(means.means, time, SimplexVector::uniform(k)));
  fit.method = WeightMethod::sdid;
  fit.sdid_lambda = make_differencing(DifferencingKind::custom, time, lambda_fit.w.values());
  fit.sdid_qp = std::move(lambda_fit);
  return fit;
}

struct EffectEstimate {
  TimeConfig time;
  /// theta_hat_t for t = 1..T; pre-period values are pre-trend diagnostics.
  Vector theta;
  /// Observed treated-group mean m_{0,t}.
  Vector observed;
  /// m_{0,t} - theta_hat_t.
  Vector counterfactual;
  WeightEstimate weights;
};

inline Vector effect_path(const DifferencedMeans& dm, const Vector& w) {
  const Eigen::Index k = dm.mu.rows() - 1;
  return (dm.mu.row(0) - w.transpose() * dm.mu.bottomRows(k)).transpose();
}

inline EffectEstimate estimate_effects(const GroupMeans& means, const DifferencingScheme& scheme,
                                       const WeightEstimate& weights) {
  if (weights.w.size() != means.num_groups()) {
    throw ValidationError("estimate_effects: weight length does not match K");
  }
  const DifferencedMeans dm = apply_differencing(means, scheme);
  EffectEstimate out{means.time, effect_path(dm, weights.w.values()),
                     means.means.row(0).transpose(), Vector(), weights};
  out.counterfactual = out.observed - out.theta;
  return out;
}

inline EffectEstimate estimate_effects(const Dataset& data, const DifferencingScheme& scheme,
                                       const WeightEstimate& weights) {
  return estimate_effects(compute_group_means(data), scheme, weights);
}

/// Fits the requested weight rule on `data`. `scheme` is the differencing for
/// SC/SCD fits (SC forces none, DID forces did, SDID chooses its own).
inline WeightEstimate estimate_weights(const Dataset& data, const GroupMeans& means,
                                       WeightMethod method, const DifferencingScheme& scheme) {
  switch (method) {
    case WeightMethod::did: return did_weights(data);
    case WeightMethod::sc:
      return fit_weights(
          apply_differencing(means, make_differencing(DifferencingKind::none, means.time)),
          WeightMethod::sc);
    case WeightMethod::scd: return fit_weights(apply_differencing(means, scheme), method);
    case WeightMethod::sdid: return sdid_fit(means);
  }
  throw ValidationError("estimate_weights: unknown method");
}

}  // namespace gmatch

#endif  // GMATCH_ESTIMATORS_HPP
