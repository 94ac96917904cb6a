#ifndef GMATCH_INFERENCE_HPP
#define GMATCH_INFERENCE_HPP

// Influence functions, variance estimators for the weight moment condition,
// the test statistic T(w) with data-driven degrees of freedom, and the
// projection confidence intervals for theta_t obtained by inverting it over
// random simplex draws.

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "gmatch/core.hpp"
#include "gmatch/error.hpp"
#include "gmatch/estimators.hpp"
#include "gmatch/matching.hpp"
#include "gmatch/parallel.hpp"
#include "gmatch/rng.hpp"
#include "gmatch/solver.hpp"

namespace gmatch {

// ---------------------------------------------------------------------------
// B2: orthonormal basis of the hyperplane orthogonal to the ones vector
// ---------------------------------------------------------------------------

struct B2Matrix {
  Matrix b2;  // K x (K-1)
};

/// Eigenvectors of I - 11'/K with eigenvalue one; each column's first
/// non-zero entry is made positive.
inline B2Matrix build_b2(int k) {
  if (k < 2) throw ValidationError("build_b2: single-donor case unsupported (K < 2)");
  const Matrix centering =
      Matrix::Identity(k, k) - Matrix::Constant(k, k, 1.0 / static_cast<double>(k));
  const EigenDecomposition eig = symmetric_eig(centering);
  // Ascending order: column 0 carries the zero eigenvalue (the ones direction).
  Matrix b2 = eig.vectors.rightCols(k - 1);
  for (Eigen::Index c = 0; c < b2.cols(); ++c) {
    for (Eigen::Index r = 0; r < b2.rows(); ++r) {
      if (std::abs(b2(r, c)) > 1e-12) {
        if (b2(r, c) < 0.0) b2.col(c) *= -1.0;
        break;
      }
    }
  }
  return {std::move(b2)};
}

// ---------------------------------------------------------------------------
// Influence functions
// ---------------------------------------------------------------------------

/// Per-observation influence values. An "influence unit" i is a panel unit or,
/// for repeated cross-sections, a single row; each belongs to one group, so
/// psi*_{ij,t} is non-zero only for j = group[i].
struct InfluenceSet {
  DatasetMode mode;
  std::size_t n = 0;
  int num_groups = 0;
  TimeConfig time;
  Vector lambda;
  std::vector<int> group;
  // Observed (period, psi*) pairs of unit i live in [offsets[i], offsets[i+1]).
  std::vector<std::size_t> offsets;
  std::vector<int> periods;
  std::vector<double> psi_star_values;
  /// sum_{s in pre} lambda_s psi*_{i,s}
  Vector baseline;
  /// z_hat_i = (1/(T*-1)) sum_{t in pre} mu_t psi_{i,t}; row i, K columns.
  Matrix z_hat;
  /// Per group j: (1/n) sum_{i in j} z_i z_i'.
  std::vector<Matrix> z_outer;
  /// (1/n) sum_{i in j} psi_{i,t}^2, (K+1) x T.
  Matrix psi_sq;
  /// (1/n) sum_{i in j} psi*_{i,t}^2, (K+1) x T.
  Matrix psi_star_sq;

  double psi_star(std::size_t i, int j, int t) const {
    if (group[i] != j) return 0.0;
    for (std::size_t e = offsets[i]; e < offsets[i + 1]; ++e) {
      if (periods[e] == t) return psi_star_values[e];
    }
    return 0.0;
  }

  /// psi_{ij,t} = psi*_{ij,t} - sum_s lambda_s psi*_{ij,s}.
  double psi(std::size_t i, int j, int t) const {
    if (group[i] != j) return 0.0;
    return psi_star(i, j, t) - baseline[static_cast<Eigen::Index>(i)];
  }

  /// sigma_t^2(w) = (1/n) sum_i (psi_{i0,t} - sum_j psi_{ij,t} w_j)^2.
  double sigma_sq(int t, const SimplexVector& w) const {
    double total = psi_sq(0, t - 1);
    for (int j = 1; j <= num_groups; ++j) total += w[j - 1] * w[j - 1] * psi_sq(j, t - 1);
    return std::max(0.0, total);
  }
};

inline InfluenceSet influence_functions(const Dataset& data, const DifferencingScheme& scheme,
                                        const GroupMeans& means) {
  const TimeConfig& time = data.time_config();
  const int k = data.num_groups();
  const int periods = time.num_periods();
  const int pre = time.num_pre();
  if (scheme.lambda().size() != pre) {
    throw ValidationError("influence_functions: scheme does not match the time configuration");
  }
  const DifferencedMeans dm = apply_differencing(means, scheme);
  const CountMatrix& counts = data.counts();

  InfluenceSet inf{data.mode(), data.sample_size(), k, time, scheme.lambda()};
  const std::size_t n = inf.n;
  const double nd = static_cast<double>(n);
  const bool panel = data.mode() == DatasetMode::panel;
  const auto& rows = data.observations();

  inf.group.assign(n, -1);
  std::vector<std::size_t> fill(n + 1, 0);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const std::size_t i = panel ? rows[r].unit : r;
    inf.group[i] = rows[r].group;
    ++fill[i + 1];
  }
  for (std::size_t i = 0; i < n; ++i) fill[i + 1] += fill[i];
  inf.offsets = fill;
  inf.periods.assign(rows.size(), 0);
  inf.psi_star_values.assign(rows.size(), 0.0);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const Observation& o = rows[r];
    const std::size_t i = panel ? o.unit : r;
    const long cell = counts(o.group, o.period - 1);
    if (cell <= 0) {
      throw NumericalError("influence_functions: zero share for group " + std::to_string(o.group) +
                           " in period " + std::to_string(o.period));
    }
    const std::size_t slot = fill[i]++;
    inf.periods[slot] = o.period;
    // (n/n_t) / p_{j,t} = n / n_{j,t}
    inf.psi_star_values[slot] =
        nd / static_cast<double>(cell) * (o.outcome - means.means(o.group, o.period - 1));
  }

  Matrix pre_mu(k, pre);
  for (int t = 1; t <= pre; ++t) pre_mu.col(t - 1) = dm.donors(t);
  const Vector mu_bar = pre_mu.rowwise().mean();
  const double inv_pre = 1.0 / static_cast<double>(pre);

  inf.baseline = Vector::Zero(static_cast<Eigen::Index>(n));
  inf.z_hat = Matrix::Zero(static_cast<Eigen::Index>(n), k);
  inf.z_outer.assign(static_cast<std::size_t>(k + 1), Matrix::Zero(k, k));
  inf.psi_sq = Matrix::Zero(k + 1, periods);
  inf.psi_star_sq = Matrix::Zero(k + 1, periods);
  Vector baseline_sq = Vector::Zero(k + 1);

  for (std::size_t i = 0; i < n; ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    const int g = inf.group[i];
    if (g < 0) continue;
    double base = 0.0;
    Vector z = Vector::Zero(k);
    for (std::size_t e = inf.offsets[i]; e < inf.offsets[i + 1]; ++e) {
      const int t = inf.periods[e];
      if (t <= pre) {
        base += inf.lambda[t - 1] * inf.psi_star_values[e];
        z += pre_mu.col(t - 1) * inf.psi_star_values[e];
      }
    }
    z = inv_pre * z - mu_bar * base;
    inf.baseline[ii] = base;
    inf.z_hat.row(ii) = z.transpose();
    inf.z_outer[static_cast<std::size_t>(g)].noalias() += (z * z.transpose()) / nd;
    baseline_sq[g] += base * base;
    for (std::size_t e = inf.offsets[i]; e < inf.offsets[i + 1]; ++e) {
      const int t = inf.periods[e];
      const double v = inf.psi_star_values[e];
      inf.psi_star_sq(g, t - 1) += v * v / nd;
      inf.psi_sq(g, t - 1) += (v * v - 2.0 * v * base) / nd;
    }
  }
  for (int j = 0; j <= k; ++j) inf.psi_sq.row(j).array() += baseline_sq[j] / nd;
  return inf;
}

// ---------------------------------------------------------------------------
// Variance estimators
// ---------------------------------------------------------------------------

/// Panel form: B2' (1/n) sum_i a_i a_i' B2 with a_i = sum_j w_j z_ij - z_i0.
inline Matrix variance_panel(const InfluenceSet& inf, const SimplexVector& w, const B2Matrix& b2) {
  const int k = inf.num_groups;
  Matrix s = inf.z_outer[0];
  for (int j = 1; j <= k; ++j) s += (w[j - 1] * w[j - 1]) * inf.z_outer[static_cast<std::size_t>(j)];
  Matrix v = b2.b2.transpose() * s * b2.b2;
  return 0.5 * (v + v.transpose());
}

/// Repeated cross-section form exploiting independence across periods.
inline Matrix variance_rc(const InfluenceSet& inf, const DifferencedMeans& dm,
                          const SimplexVector& w, const B2Matrix& b2) {
  const int k = inf.num_groups;
  const int pre = inf.time.num_pre();
  const double pre_d = static_cast<double>(pre);
  Matrix pre_mu(k, pre);
  for (int t = 1; t <= pre; ++t) pre_mu.col(t - 1) = dm.donors(t);
  const Vector mu_bar = pre_mu.rowwise().mean();
  Matrix total = Matrix::Zero(k, k);
  for (int t = 1; t <= pre; ++t) {
    double scalar = inf.psi_star_sq(0, t - 1);
    for (int j = 1; j <= k; ++j) scalar += w[j - 1] * w[j - 1] * inf.psi_star_sq(j, t - 1);
    const Vector mu = pre_mu.col(t - 1);
    const double lam = inf.lambda[t - 1];
    const Matrix kernel = (mu * mu.transpose()) / pre_d -
                          lam * (mu_bar * mu.transpose() + mu * mu_bar.transpose()) +
                          (pre_d * lam * lam) * (mu_bar * mu_bar.transpose());
    total += scalar * kernel;
  }
  Matrix v = b2.b2.transpose() * (total / pre_d) * b2.b2;
  return 0.5 * (v + v.transpose());
}

/// Adds eps * trace(V)/(K-1) to the diagonal.
inline Matrix ridge_variance(const Matrix& v, double eps) {
  const double shift = eps * v.trace() / static_cast<double>(std::max<Eigen::Index>(1, v.rows()));
  return v + shift * Matrix::Identity(v.rows(), v.cols());
}

/// Inverse of a symmetric positive definite variance; singular input
/// (min eigenvalue <= 1e-12 * trace) is a numerical failure.
inline Matrix invert_variance(const Matrix& v) {
  const EigenDecomposition eig = symmetric_eig(v);
  const double trace = v.trace();
  if (!(trace > 0.0) || eig.values[0] <= 1e-12 * trace) {
    throw NumericalError(
        "singular variance estimate (min eigenvalue " + std::to_string(eig.values[0]) +
        "); rerun with --ridge to regularise");
  }
  return eig.vectors * eig.values.cwiseInverse().asDiagonal() * eig.vectors.transpose();
}

// ---------------------------------------------------------------------------
// Weight tests
// ---------------------------------------------------------------------------

struct WeightTest {
  double statistic = 0.0;
  int dof = 1;
  double critical = 0.0;
  Vector r_hat;
  bool accepted = false;
};

/// Tests the moment condition H w - h = 0 at a candidate w on the simplex,
/// allowing slack r >= 0 on coordinates where w_j = 0.
class MomentWeightTest {
 public:
  MomentWeightTest(Matrix hessian, Vector linear, const Matrix& variance, const B2Matrix& b2,
                   double n, double kappa)
      : hessian_(std::move(hessian)), linear_(std::move(linear)), n_(n) {
    const Eigen::Index k = hessian_.rows();
    omega_ = b2.b2 * invert_variance(variance) * b2.b2.transpose();
    omega_ = 0.5 * (omega_ + omega_.transpose());
    critical_.assign(static_cast<std::size_t>(std::max<Eigen::Index>(k, 2)), 0.0);
    for (Eigen::Index d = 1; d < std::max<Eigen::Index>(k, 2); ++d) {
      critical_[static_cast<std::size_t>(d)] = chi2_quantile(static_cast<int>(d), 1.0 - kappa);
    }
  }

  WeightTest operator()(const SimplexVector& w) const {
    const Eigen::Index k = hessian_.rows();
    const Vector phi = hessian_ * w.values() - linear_;
    WeightTest out;
    out.r_hat = Vector::Zero(k);
    std::vector<Eigen::Index> zeros;
    for (Eigen::Index j = 0; j < k; ++j) {
      if (w[j] == 0.0) zeros.push_back(j);
    }
    if (!zeros.empty()) {
      const auto z = static_cast<Eigen::Index>(zeros.size());
      const Vector omega_phi = omega_ * phi;
      Matrix a(z, z);
      Vector b(z);
      for (Eigen::Index x = 0; x < z; ++x) {
        for (Eigen::Index y = 0; y < z; ++y) a(x, y) = omega_(zeros[x], zeros[y]);
        b[x] = omega_phi[zeros[x]];
      }
      const Vector r = solve_nonneg_qp(a, b).r;
      for (Eigen::Index x = 0; x < z; ++x) out.r_hat[zeros[x]] = r[x];
    }
    const Vector resid = phi - out.r_hat;
    const Vector u = omega_ * resid;
    const double zero_tol = 1e-8 * (1.0 + u.cwiseAbs().maxCoeff());
    const auto zero_count = static_cast<Eigen::Index>((u.array().abs() <= zero_tol).count());
    out.dof = static_cast<int>(std::max<Eigen::Index>(k - 1 - zero_count, 1));
    out.statistic = std::max(0.0, n_ * resid.dot(u));
    out.critical = critical_[static_cast<std::size_t>(out.dof)];
    out.accepted = out.statistic <= out.critical;
    return out;
  }

  const Matrix& omega() const noexcept { return omega_; }

 private:
  Matrix hessian_;
  Vector linear_;
  double n_;
  Matrix omega_;
  std::vector<double> critical_;
};

/// T(w), r_hat(w), k_hat(w) and the chi-square critical value for one w.
inline WeightTest weight_test(const SimplexVector& w, const Matrix& hessian, const Vector& linear,
                              const Matrix& variance, double n, double kappa) {
  const auto b2 = build_b2(static_cast<int>(hessian.rows()));
  return MomentWeightTest(hessian, linear, variance, b2, n, kappa)(w);
}

/// Wald test of donor-pool shares: the weight set for DID-style designs where
/// w is the vector of group proportions rather than a pre-period fit.
class ShareWeightTest {
 public:
  ShareWeightTest(const SimplexVector& shares, double donor_n, const B2Matrix& b2, double kappa,
                  std::optional<double> ridge = std::nullopt)
      : shares_(shares.values()), donor_n_(donor_n), b2_(b2.b2) {
    const Vector& p = shares_;
    const Matrix cov = Matrix(p.asDiagonal()) - p * p.transpose();
    Matrix m = b2_.transpose() * cov * b2_;
    m = 0.5 * (m + m.transpose());
    if (ridge) m = ridge_variance(m, *ridge);
    inverse_ = invert_variance(m);
    covariance_ = m;
    const int dof = static_cast<int>(b2_.cols());
    critical_ = chi2_quantile(dof, 1.0 - kappa);
  }

  /// Point of the acceptance ellipsoid maximising a'w, pulled back towards
  /// the shares until it lies on the simplex.
  SimplexVector extreme_point(const Vector& a) const {
    const Vector g = b2_.transpose() * a;
    const Vector mg = covariance_ * g;
    const double q = g.dot(mg);
    if (!(q > 0.0)) return SimplexVector(shares_);
    const double radius = std::sqrt(critical_ / donor_n_ / q) * (1.0 - 1e-9);
    const Vector step = radius * (b2_ * mg);
    double scale = 1.0;
    for (Eigen::Index j = 0; j < step.size(); ++j) {
      if (step[j] < 0.0) scale = std::min(scale, shares_[j] / -step[j]);
    }
    return SimplexVector(shares_ + scale * step, 1e-9);
  }

  WeightTest operator()(const SimplexVector& w) const {
    const Vector diff = b2_.transpose() * (w.values() - shares_);
    WeightTest out;
    out.r_hat = Vector::Zero(w.size());
    out.dof = static_cast<int>(b2_.cols());
    out.statistic = std::max(0.0, donor_n_ * diff.dot(inverse_ * diff));
    out.critical = critical_;
    out.accepted = out.statistic <= out.critical;
    return out;
  }

 private:
  Vector shares_;
  double donor_n_;
  Matrix b2_;
  Matrix inverse_;
  Matrix covariance_;
  double critical_;
};

// ---------------------------------------------------------------------------
// Confidence intervals for theta_t
// ---------------------------------------------------------------------------

struct InferenceOptions {
  double alpha = 0.05;
  double kappa = 0.005;
  int draws = 10000;
  std::uint64_t seed = 0;
  std::optional<double> ridge;
  int threads = 1;
};

struct PeriodInference {
  int t = 0;
  double theta_hat = 0.0;
  double sigma_hat = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  bool is_post = false;
};

struct EffectInference {
  std::vector<PeriodInference> periods;
  double alpha = 0.0;
  double kappa = 0.0;
  DatasetMode mode = DatasetMode::panel;
  int num_draws = 0;
  std::uint64_t seed = 0;
  std::size_t candidate_count = 0;
  std::size_t accepted_count = 0;
  double beta = 0.0;
  double z = 0.0;
  std::size_t n = 0;
  EffectEstimate effects;
};

/// (alpha - kappa)/2 for panels, (alpha - kappa)/(2(1 - kappa)) for
/// repeated cross-sections.
inline double bonferroni_beta(double alpha, double kappa, DatasetMode mode) {
  return mode == DatasetMode::panel ? (alpha - kappa) / 2.0
                                    : (alpha - kappa) / (2.0 * (1.0 - kappa));
}

inline void validate_inference_options(const InferenceOptions& o) {
  if (!(o.kappa > 0.0 && o.kappa < o.alpha && o.alpha < 1.0)) {
    throw ValidationError("inference: need 0 < kappa < alpha < 1");
  }
  if (o.draws < 1) throw ValidationError("inference: need at least one simplex draw");
  if (o.ridge && !(*o.ridge > 0.0)) throw ValidationError("inference: ridge must be positive");
}

/// Candidate c of the weight search: Dirichlet draws for c < R, then the
/// fixed list (w_hat, the K vertices, any extra points). Draw c uses its own
/// substream so results do not depend on scheduling or on R beyond the prefix.
inline SimplexVector inference_candidate(std::size_t c, int draws, Eigen::Index k,
                                         const std::vector<SimplexVector>& fixed,
                                         std::uint64_t seed) {
  const auto r = static_cast<std::size_t>(draws);
  if (c < r) {
    RngStream stream(derive_key(seed, 0xD1B1C4u), c);
    return sample_simplex(k, stream);
  }
  return fixed[c - r];
}

/// Projection confidence intervals for every period: min/max of theta_t(w)
/// over the accepted candidates, widened by z_{1-beta} sigma_t(w_hat)/sqrt(n).
/// SC/SCD weights are tested through the pre-period moment condition with
/// V evaluated at w_hat; DID weights through a Wald test on group shares.
inline EffectInference infer_effects(const Dataset& data, const WeightEstimate& weights,
                                     const InferenceOptions& options) {
  validate_inference_options(options);
  if (weights.method == WeightMethod::sdid) {
    throw ValidationError("inference: not available for sdid (data-driven lambda)");
  }
  const TimeConfig& time = data.time_config();
  const int k = data.num_groups();
  const DifferencingScheme& scheme = weights.lambda_used;
  const GroupMeans means = compute_group_means(data);
  const DifferencedMeans dm = apply_differencing(means, scheme);
  const InfluenceSet inf = influence_functions(data, scheme, means);
  const double n = static_cast<double>(inf.n);

  EffectInference out{.effects = estimate_effects(means, scheme, weights)};
  out.alpha = options.alpha;
  out.kappa = options.kappa;
  out.mode = data.mode();
  out.num_draws = options.draws;
  out.seed = options.seed;
  out.n = inf.n;
  out.beta = bonferroni_beta(options.alpha, options.kappa, data.mode());
  out.z = normal_quantile(1.0 - out.beta);

  const SimplexVector& w_hat = weights.w;
  const int periods = time.num_periods();
  Vector lo = Vector::Constant(periods, std::numeric_limits<double>::infinity());
  Vector hi = Vector::Constant(periods, -std::numeric_limits<double>::infinity());

  if (k == 1) {
    // The simplex is a single point; no weight uncertainty to project.
    out.candidate_count = 1;
    out.accepted_count = 1;
    lo = hi = out.effects.theta;
  } else {
    const B2Matrix b2 = build_b2(k);
    std::function<WeightTest(const SimplexVector&)> test;
    std::vector<SimplexVector> extras;
    if (weights.method == WeightMethod::did) {
      double donor_n = 0.0;
      if (data.mode() == DatasetMode::panel) {
        for (int g : data.unit_groups()) donor_n += g >= 1 ? 1.0 : 0.0;
      } else {
        for (const Observation& o : data.observations()) donor_n += o.group >= 1 ? 1.0 : 0.0;
      }
      const ShareWeightTest share(w_hat, donor_n, b2, options.kappa, options.ridge);
      // The share test's acceptance region is an ellipsoid, so its extreme
      // points in each period's theta direction are known.
      for (int t = 1; t <= periods; ++t) {
        const Vector a = dm.donors(t);
        extras.push_back(share.extreme_point(a));
        extras.push_back(share.extreme_point(-a));
      }
      test = share;
    } else {
      const auto pre = pre_periods(time);
      Matrix hessian = Matrix::Zero(k, k);
      Vector linear = Vector::Zero(k);
      for (int t : pre) {
        const Vector d = dm.donors(t);
        hessian.noalias() += d * d.transpose();
        linear += dm.treated(t) * d;
      }
      hessian /= static_cast<double>(pre.size());
      linear /= static_cast<double>(pre.size());
      Matrix variance = data.mode() == DatasetMode::panel ? variance_panel(inf, w_hat, b2)
                                                          : variance_rc(inf, dm, w_hat, b2);
      if (options.ridge) variance = ridge_variance(variance, *options.ridge);
      test = MomentWeightTest(std::move(hessian), std::move(linear), variance, b2, n,
                              options.kappa);
    }

    std::vector<SimplexVector> fixed{w_hat};
    for (int j = 0; j < k; ++j) fixed.push_back(SimplexVector::vertex(k, j));
    fixed.insert(fixed.end(), extras.begin(), extras.end());
    const std::size_t count = static_cast<std::size_t>(options.draws) + fixed.size();
    out.candidate_count = count;
    std::vector<char> accepted(count, 0);
    parallel_for(count, options.threads, [&](std::size_t c) {
      accepted[c] = test(inference_candidate(c, options.draws, k, fixed, options.seed)).accepted ? 1 : 0;
    });
    const Eigen::Index kk = k;
    const Matrix donors = dm.mu.bottomRows(kk);
    for (std::size_t c = 0; c < count; ++c) {
      if (!accepted[c]) continue;
      ++out.accepted_count;
      const SimplexVector w = inference_candidate(c, options.draws, k, fixed, options.seed);
      const Vector path = (dm.mu.row(0) - w.values().transpose() * donors).transpose();
      lo = lo.cwiseMin(path);
      hi = hi.cwiseMax(path);
    }
    if (out.accepted_count == 0) {
      throw NumericalError("empty weight confidence set at level kappa=" +
                           std::to_string(options.kappa));
    }
  }

  for (int t = 1; t <= periods; ++t) {
    PeriodInference p;
    p.t = t;
    p.theta_hat = out.effects.theta[t - 1];
    p.sigma_hat = std::sqrt(inf.sigma_sq(t, w_hat));
    const double half = out.z * p.sigma_hat / std::sqrt(n);
    p.ci_low = lo[t - 1] - half;
    p.ci_high = hi[t - 1] + half;
    p.is_post = time.is_post(t);
    out.periods.push_back(p);
  }
  return out;
}

/// Fits SCD (or SC for the zero differencing) weights and returns the
/// projection confidence intervals.
inline EffectInference algorithm1_ci(const Dataset& data, const DifferencingScheme& scheme,
                                     double alpha, double kappa, int draws, std::uint64_t seed,
                                     int threads = 1) {
  const GroupMeans means = compute_group_means(data);
  const WeightMethod method =
      scheme.kind() == DifferencingKind::none ? WeightMethod::sc : WeightMethod::scd;
  const WeightEstimate weights = fit_weights(apply_differencing(means, scheme), method);
  InferenceOptions options;
  options.alpha = alpha;
  options.kappa = kappa;
  options.draws = draws;
  options.seed = seed;
  options.threads = threads;
  return infer_effects(data, weights, options);
}

}  // namespace gmatch

#endif  // GMATCH_INFERENCE_HPP
