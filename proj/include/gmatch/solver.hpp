#ifndef GMATCH_SOLVER_HPP
#define GMATCH_SOLVER_HPP

// Numerical kernels: simplex-constrained QP, orthant-constrained QP,
// symmetric eigendecomposition, chi-square and normal quantiles, and flat
// Dirichlet sampling on the simplex.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "gmatch/core.hpp"
#include "gmatch/error.hpp"
#include "gmatch/rng.hpp"

namespace gmatch {

// ---------------------------------------------------------------------------
// Symmetric eigendecomposition
// ---------------------------------------------------------------------------

struct EigenDecomposition {
  Vector values;   // ascending
  Matrix vectors;  // column i pairs with values[i]; orthonormal
};

inline double max_abs_entry(const Matrix& a) {
  return a.size() == 0 ? 0.0 : a.cwiseAbs().maxCoeff();
}

inline void require_symmetric(const Matrix& a, const char* what) {
  if (a.rows() != a.cols()) {
    throw ValidationError(std::string(what) + ": matrix is not square");
  }
  const double scale = std::max(1.0, max_abs_entry(a));
  if (max_abs_entry(a - a.transpose()) > 1e-10 * scale) {
    throw ValidationError(std::string(what) + ": matrix is not symmetric");
  }
}

inline EigenDecomposition symmetric_eig(const Matrix& a) {
  require_symmetric(a, "symmetric_eig");
  const Matrix sym = 0.5 * (a + a.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> solver(sym);
  if (solver.info() != Eigen::Success) {
    throw NumericalError("symmetric_eig: eigensolver did not converge");
  }
  return {solver.eigenvalues(), solver.eigenvectors()};
}

// ---------------------------------------------------------------------------
// Projections
// ---------------------------------------------------------------------------

/// Euclidean projection onto the probability simplex, O(K log K).
inline Vector project_to_simplex(const Vector& y) {
  const Eigen::Index k = y.size();
  std::vector<double> sorted(y.data(), y.data() + k);
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  double cumulative = 0.0;
  double shift = 0.0;
  for (Eigen::Index i = 0; i < k; ++i) {
    cumulative += sorted[static_cast<std::size_t>(i)];
    const double candidate = (cumulative - 1.0) / static_cast<double>(i + 1);
    if (sorted[static_cast<std::size_t>(i)] - candidate > 0.0) shift = candidate;
  }
  Vector out = (y.array() - shift).max(0.0).matrix();
  const double total = out.sum();
  if (total > 0.0) out /= total;
  return out;
}

// ---------------------------------------------------------------------------
// Simplex-constrained QP:  min 1/2 w'Hw - h'w  over the simplex
// ---------------------------------------------------------------------------

struct QpProblem {
  Matrix hessian;
  Vector linear;
  double tolerance = 1e-10;
  int max_iterations = 100000;
};

struct QpSolution {
  SimplexVector w;
  double objective = 0.0;
  /// Frank-Wolfe gap g'w - min_j g_j with g = Hw - h, relative to the
  /// problem scale. Zero exactly at a KKT point.
  double kkt_residual = 0.0;
  std::vector<int> active_set;  // coordinates equal to zero
  bool unique = true;
  int iterations = 0;
};

inline double qp_objective(const Matrix& hessian, const Vector& linear, const Vector& w) {
  return 0.5 * w.dot(hessian * w) - linear.dot(w);
}

namespace detail {

inline double qp_scale(const Matrix& hessian, const Vector& linear) {
  return 1.0 + max_abs_entry(hessian) * static_cast<double>(hessian.rows()) +
         (linear.size() ? linear.cwiseAbs().maxCoeff() : 0.0);
}

inline double simplex_gap(const Matrix& hessian, const Vector& linear, const Vector& w) {
  const Vector g = hessian * w - linear;
  return std::max(0.0, g.dot(w) - g.minCoeff());
}

/// Newton step on the face spanned by the support of w: the minimum-norm
/// correction d with 1'd = 0 that zeroes the projected gradient there.
inline std::optional<Vector> polish_on_face(const Matrix& hessian, const Vector& linear,
                                            const Vector& w) {
  std::vector<Eigen::Index> support;
  for (Eigen::Index j = 0; j < w.size(); ++j) {
    if (w[j] > 0.0) support.push_back(j);
  }
  const auto s = static_cast<Eigen::Index>(support.size());
  if (s == 0) return std::nullopt;
  Matrix kkt = Matrix::Zero(s + 1, s + 1);
  Vector rhs = Vector::Zero(s + 1);
  const Vector g = hessian * w - linear;
  for (Eigen::Index a = 0; a < s; ++a) {
    for (Eigen::Index b = 0; b < s; ++b) kkt(a, b) = hessian(support[a], support[b]);
    kkt(a, s) = 1.0;
    kkt(s, a) = 1.0;
    rhs[a] = -g[support[a]];
  }
  const Vector step = kkt.completeOrthogonalDecomposition().solve(rhs);
  Vector out = w;
  for (Eigen::Index a = 0; a < s; ++a) out[support[a]] += step[a];
  const double floor = -1e-12;
  if ((out.array() < floor).any() || !out.allFinite()) return std::nullopt;
  out = out.cwiseMax(0.0);
  const double total = out.sum();
  if (total <= 0.0) return std::nullopt;
  return Vector(out / total);
}

/// Accelerated projected gradient with fixed-period restarts and face
/// polishing. Returns the final iterate and the iteration count.
inline std::pair<Vector, int> simplex_apg(const Matrix& hessian, const Vector& linear,
                                          Vector w, double step, double tol_abs,
                                          int max_iterations) {
  constexpr int kRestart = 50;
  Vector y = w;
  double momentum = 1.0;
  double best_obj = qp_objective(hessian, linear, w);
  for (int it = 1; it <= max_iterations; ++it) {
    const Vector grad = hessian * y - linear;
    Vector next = project_to_simplex(y - step * grad);
    const double next_obj = qp_objective(hessian, linear, next);
    if (next_obj > best_obj) {
      // Non-monotone step: fall back to a plain projected-gradient step from w.
      next = project_to_simplex(w - step * (hessian * w - linear));
      momentum = 1.0;
      y = next;
    } else {
      const double m_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * momentum * momentum));
      y = next + ((momentum - 1.0) / m_next) * (next - w);
      momentum = m_next;
    }
    w = next;
    best_obj = std::min(best_obj, qp_objective(hessian, linear, w));
    if (it % kRestart == 0) {
      momentum = 1.0;
      y = w;
      if (auto polished = polish_on_face(hessian, linear, w)) {
        if (qp_objective(hessian, linear, *polished) <= best_obj + 1e-15 * std::abs(best_obj)) {
          w = *polished;
          y = w;
          best_obj = qp_objective(hessian, linear, w);
        }
      }
    }
    if (it % 10 == 0 && simplex_gap(hessian, linear, w) <= tol_abs) {
      // Finish on the face; a few Newton refinements clean up ill-conditioned supports.
      double gap = simplex_gap(hessian, linear, w);
      const double obj_slack = 1e-13 * (1.0 + std::abs(best_obj));
      for (int r = 0; r < 3 && gap > 0.0; ++r) {
        const auto polished = polish_on_face(hessian, linear, w);
        if (!polished) break;
        const double pgap = simplex_gap(hessian, linear, *polished);
        if (pgap > gap || qp_objective(hessian, linear, *polished) > best_obj + obj_slack) break;
        w = *polished;
        gap = pgap;
        best_obj = std::min(best_obj, qp_objective(hessian, linear, w));
      }
      return {w, it};
    }
  }
  return {w, max_iterations};
}

}  // namespace detail

inline void validate_qp(const QpProblem& problem) {
  const Eigen::Index k = problem.hessian.rows();
  require_symmetric(problem.hessian, "qp");
  if (problem.linear.size() != k) {
    throw ValidationError("qp: linear term has length " + std::to_string(problem.linear.size()) +
                          ", expected " + std::to_string(k));
  }
  if (!problem.hessian.allFinite() || !problem.linear.allFinite()) {
    throw NumericalError("qp: non-finite problem data");
  }
}

/// Minimises 1/2 w'Hw - h'w over the simplex. The default start is the
/// uniform vector; among multiple minimisers the limit from that start is
/// returned and `unique` is cleared.
inline QpSolution solve_simplex_qp(const QpProblem& problem,
                                   const std::optional<SimplexVector>& start = std::nullopt,
                                   bool check_uniqueness = true) {
  validate_qp(problem);
  const Eigen::Index k = problem.hessian.rows();
  if (k == 0) throw ValidationError("qp: empty problem");
  const Matrix& hessian = problem.hessian;
  const Vector& linear = problem.linear;
  if (k == 1) {
    QpSolution one{SimplexVector::uniform(1)};
    one.objective = qp_objective(hessian, linear, one.w.values());
    return one;
  }

  const Matrix sym = 0.5 * (hessian + hessian.transpose());
  const EigenDecomposition eig = symmetric_eig(sym);
  const double spectral = std::max(std::abs(eig.values[0]), std::abs(eig.values[k - 1]));
  if (eig.values[0] < -1e-8 * std::max(spectral, 1e-300)) {
    throw NumericalError("qp: hessian is not positive semidefinite (min eigenvalue " +
                         std::to_string(eig.values[0]) + ")");
  }
  const double scale = detail::qp_scale(sym, linear);
  const double tol_abs = problem.tolerance * scale;
  const double lipschitz = std::max(eig.values[k - 1], 1e-12 * scale);
  const double step = 1.0 / lipschitz;

  auto run = [&](const Vector& w0) {
    auto [w, iterations] = detail::simplex_apg(sym, linear, w0, step, tol_abs,
                                               problem.max_iterations);
    const double gap = detail::simplex_gap(sym, linear, w);
    if (!(gap <= tol_abs)) {
      throw NumericalError("qp: no convergence after " + std::to_string(problem.max_iterations) +
                           " iterations (kkt residual " + std::to_string(gap / scale) + ")");
    }
    return std::pair<Vector, int>{w, iterations};
  };

  const Vector w0 = start ? start->values() : Vector::Constant(k, 1.0 / static_cast<double>(k));
  if (w0.size() != k) throw ValidationError("qp: start point has wrong length");
  auto [w, iterations] = run(w0);

  QpSolution out{SimplexVector(w)};
  out.iterations = iterations;
  out.objective = qp_objective(sym, linear, out.w.values());
  out.kkt_residual = detail::simplex_gap(sym, linear, out.w.values()) / scale;
  for (Eigen::Index j = 0; j < k; ++j) {
    if (out.w[j] == 0.0) out.active_set.push_back(static_cast<int>(j));
  }

  if (check_uniqueness) {
    // Curvature along the simplex tangent space: eigenvalues of P H P with
    // P = I - 11'/K, dropping the zero paired with the ones direction.
    const Matrix proj = Matrix::Identity(k, k) - Matrix::Constant(k, k, 1.0 / static_cast<double>(k));
    const Vector tangent = symmetric_eig(proj * sym * proj).values;
    const double floor = 1e-6 * std::max(spectral, 1e-300);
    if (tangent[1] > floor) {
      out.unique = true;
    } else {
      Vector ramp(k);
      for (Eigen::Index j = 0; j < k; ++j) ramp[j] = static_cast<double>(k - j);
      ramp /= ramp.sum();
      const Vector other = run(ramp).first;
      out.unique = (other - out.w.values()).cwiseAbs().maxCoeff() < 1e-6;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Orthant-constrained QP:  min 1/2 r'Ar - b'r  subject to r >= 0
// ---------------------------------------------------------------------------

namespace detail {

/// Lawson-Hanson active-set method in Gram form. Returns nullopt if the
/// outer loop cycles.
inline std::optional<Vector> nonneg_active_set(const Matrix& a, const Vector& b, double tol_abs) {
  const Eigen::Index k = a.rows();
  Vector r = Vector::Zero(k);
  std::vector<char> passive(static_cast<std::size_t>(k), 0);
  auto solve_passive = [&]() {
    std::vector<Eigen::Index> idx;
    for (Eigen::Index j = 0; j < k; ++j) {
      if (passive[static_cast<std::size_t>(j)]) idx.push_back(j);
    }
    const auto s = static_cast<Eigen::Index>(idx.size());
    Matrix sub(s, s);
    Vector rhs(s);
    for (Eigen::Index x = 0; x < s; ++x) {
      for (Eigen::Index y = 0; y < s; ++y) sub(x, y) = a(idx[x], idx[y]);
      rhs[x] = b[idx[x]];
    }
    const Vector z = sub.completeOrthogonalDecomposition().solve(rhs);
    Vector full = Vector::Zero(k);
    for (Eigen::Index x = 0; x < s; ++x) full[idx[x]] = z[x];
    return full;
  };
  for (int outer = 0; outer < 3 * static_cast<int>(k) + 10; ++outer) {
    const Vector g = a * r - b;
    Eigen::Index enter = -1;
    double most = -tol_abs;
    for (Eigen::Index j = 0; j < k; ++j) {
      if (!passive[static_cast<std::size_t>(j)] && g[j] < most) {
        most = g[j];
        enter = j;
      }
    }
    if (enter < 0) return r;
    passive[static_cast<std::size_t>(enter)] = 1;
    for (int inner = 0; inner <= static_cast<int>(k); ++inner) {
      const Vector z = solve_passive();
      double alpha = 1.0;
      bool feasible = true;
      for (Eigen::Index j = 0; j < k; ++j) {
        if (passive[static_cast<std::size_t>(j)] && z[j] <= 0.0) {
          feasible = false;
          const double denom = r[j] - z[j];
          if (denom > 0.0) alpha = std::min(alpha, r[j] / denom);
        }
      }
      if (feasible) {
        r = z;
        break;
      }
      r += alpha * (z - r);
      for (Eigen::Index j = 0; j < k; ++j) {
        if (passive[static_cast<std::size_t>(j)] && r[j] <= 1e-300) {
          passive[static_cast<std::size_t>(j)] = 0;
          r[j] = 0.0;
        }
      }
    }
  }
  return std::nullopt;
}

}  // namespace detail

struct NonnegQpSolution {
  Vector r;
  double objective = 0.0;
  double kkt_residual = 0.0;  // max_j |min(r_j, g_j)|, relative to scale
  int iterations = 0;
};

inline NonnegQpSolution solve_nonneg_qp(const Matrix& a, const Vector& b,
                                        double tolerance = 1e-12,
                                        int max_iterations = 100000) {
  require_symmetric(a, "nonneg qp");
  const Eigen::Index k = a.rows();
  NonnegQpSolution out;
  out.r = Vector::Zero(k);
  if (k == 0) return out;
  const Matrix sym = 0.5 * (a + a.transpose());
  const double scale = detail::qp_scale(sym, b);
  const double tol_abs = tolerance * scale;
  const EigenDecomposition eig = symmetric_eig(sym);
  const double lipschitz = std::max(eig.values[k - 1], 1e-12 * scale);
  const double step = 1.0 / lipschitz;

  auto residual = [&](const Vector& r) {
    const Vector g = sym * r - b;
    return r.cwiseMin(g).cwiseAbs().maxCoeff();
  };
  auto objective = [&](const Vector& r) { return 0.5 * r.dot(sym * r) - b.dot(r); };
  auto polish = [&](const Vector& r) -> std::optional<Vector> {
    std::vector<Eigen::Index> support;
    for (Eigen::Index j = 0; j < k; ++j) {
      if (r[j] > 0.0) support.push_back(j);
    }
    const auto s = static_cast<Eigen::Index>(support.size());
    if (s == 0) return std::nullopt;
    Matrix sub(s, s);
    Vector rhs(s);
    const Vector g = sym * r - b;
    for (Eigen::Index x = 0; x < s; ++x) {
      for (Eigen::Index y = 0; y < s; ++y) sub(x, y) = sym(support[x], support[y]);
      rhs[x] = -g[support[x]];
    }
    const Vector d = sub.completeOrthogonalDecomposition().solve(rhs);
    Vector next = r;
    for (Eigen::Index x = 0; x < s; ++x) next[support[x]] += d[x];
    if ((next.array() < -1e-12).any() || !next.allFinite()) return std::nullopt;
    return Vector(next.cwiseMax(0.0));
  };

  Vector r = Vector::Zero(k);
  Vector y = r;
  double momentum = 1.0;
  double best = objective(r);
  int it = 0;
  for (it = 1; it <= max_iterations; ++it) {
    if (residual(r) <= tol_abs) break;
    Vector next = (y - step * (sym * y - b)).cwiseMax(0.0);
    if (objective(next) > best) {
      next = (r - step * (sym * r - b)).cwiseMax(0.0);
      momentum = 1.0;
      y = next;
    } else {
      const double m_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * momentum * momentum));
      y = next + ((momentum - 1.0) / m_next) * (next - r);
      momentum = m_next;
    }
    r = next;
    best = std::min(best, objective(r));
    if (it % 50 == 0) {
      momentum = 1.0;
      y = r;
      if (auto p = polish(r); p && objective(*p) <= best + 1e-15 * std::abs(best)) {
        r = *p;
        y = r;
        best = objective(r);
      }
    }
  }
  double res = residual(r);
  if (!(res <= tol_abs)) {
    // Ill-conditioned A: finish with a Lawson-Hanson active-set pass.
    if (auto exact = detail::nonneg_active_set(sym, b, tol_abs)) {
      if (residual(*exact) < res) {
        r = *exact;
        res = residual(r);
      }
    }
  }
  if (!(res <= tol_abs)) {
    throw NumericalError("nonneg qp: no convergence after " + std::to_string(max_iterations) +
                         " iterations");
  }
  out.r = r;
  out.objective = objective(r);
  out.kkt_residual = res / scale;
  out.iterations = it;
  return out;
}

// ---------------------------------------------------------------------------
// Distribution functions
// ---------------------------------------------------------------------------

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

/// Standard normal inverse CDF: Acklam's rational approximation refined by a
/// Halley step against erfc.
inline double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw ValidationError("normal_quantile: p must lie in (0, 1), got " + std::to_string(p));
  }
  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                 -2.759285104469687e+02, 1.383577518672690e+02,
                                 -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                 -1.556989798598866e+02, 6.680131188771972e+01,
                                 -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                 -2.400758277161838e+00, -2.549732539343734e+00,
                                 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                 2.445134137142996e+00, 3.754408661907416e+00};
  constexpr double low = 0.02425;
  double x;
  if (p < low) {
    const double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - low) {
    const double q = p - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log1p(-p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  for (int i = 0; i < 2; ++i) {
    const double e = normal_cdf(x) - p;
    const double u = e * std::sqrt(2.0 * std::numbers::pi) * std::exp(0.5 * x * x);
    x -= u / (1.0 + 0.5 * x * u);
  }
  return x;
}

/// Regularised lower incomplete gamma P(a, x): series for x < a + 1,
/// Lentz continued fraction for the complement otherwise.
inline double regularized_gamma_p(double a, double x) {
  if (x <= 0.0) return 0.0;
  const double log_prefix = a * std::log(x) - x - std::lgamma(a);
  constexpr double eps = 1e-16;
  if (x < a + 1.0) {
    double term = 1.0 / a;
    double sum = term;
    for (int n = 1; n < 10000; ++n) {
      term *= x / (a + n);
      sum += term;
      if (std::abs(term) < std::abs(sum) * eps) break;
    }
    return std::min(1.0, sum * std::exp(log_prefix));
  }
  constexpr double tiny = 1e-300;
  double bcf = x + 1.0 - a;
  double ccf = 1.0 / tiny;
  double dcf = 1.0 / bcf;
  double h = dcf;
  for (int i = 1; i < 10000; ++i) {
    const double an = -i * (i - a);
    bcf += 2.0;
    dcf = an * dcf + bcf;
    if (std::abs(dcf) < tiny) dcf = tiny;
    ccf = bcf + an / ccf;
    if (std::abs(ccf) < tiny) ccf = tiny;
    dcf = 1.0 / dcf;
    const double delta = dcf * ccf;
    h *= delta;
    if (std::abs(delta - 1.0) < eps) break;
  }
  return std::max(0.0, 1.0 - std::exp(log_prefix) * h);
}

inline double chi2_cdf(int df, double x) { return regularized_gamma_p(0.5 * df, 0.5 * x); }

inline double chi2_pdf(int df, double x) {
  if (x <= 0.0) return 0.0;
  const double k = 0.5 * df;
  return std::exp((k - 1.0) * std::log(x) - 0.5 * x - k * std::numbers::ln2 - std::lgamma(k));
}

/// Inverse chi-square CDF by safeguarded Newton iteration from a
/// Wilson-Hilferty start.
inline double chi2_quantile(int df, double p) {
  if (df < 1) throw ValidationError("chi2_quantile: degrees of freedom must be positive");
  if (!(p > 0.0 && p < 1.0)) {
    throw ValidationError("chi2_quantile: p must lie in (0, 1), got " + std::to_string(p));
  }
  const double k = df;
  const double z = normal_quantile(p);
  const double wh = 1.0 - 2.0 / (9.0 * k) + z * std::sqrt(2.0 / (9.0 * k));
  double x = std::max(k * wh * wh * wh, 1e-8);

  double lo = 0.0;
  double hi = std::max(2.0 * x, k + 10.0);
  while (chi2_cdf(df, hi) < p) hi *= 2.0;
  for (int it = 0; it < 200; ++it) {
    const double f = chi2_cdf(df, x) - p;
    if (f < 0.0) lo = std::max(lo, x); else hi = std::min(hi, x);
    const double dens = chi2_pdf(df, x);
    double next = dens > 0.0 ? x - f / dens : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - x) <= 1e-15 * std::max(1.0, x)) {
      x = next;
      break;
    }
    x = next;
  }
  return x;
}

// ---------------------------------------------------------------------------
// Simplex sampling
// ---------------------------------------------------------------------------

/// Flat Dirichlet draw: normalised i.i.d. unit exponentials.
inline SimplexVector sample_simplex(Eigen::Index size, RngStream& rng) {
  if (size < 1) throw ValidationError("sample_simplex: size must be positive");
  Vector e(size);
  for (Eigen::Index j = 0; j < size; ++j) e[j] = rng.exponential();
  return SimplexVector(e / e.sum());
}

}  // namespace gmatch

#endif  // GMATCH_SOLVER_HPP
