#ifndef GMATCH_SIMULATION_HPP
#define GMATCH_SIMULATION_HPP

// Factor-model data generating processes (scenarios A, B, C) and the Monte
// Carlo harness reporting MAD, coverage and mean CI length at t = T*.

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "gmatch/core.hpp"
#include "gmatch/error.hpp"
#include "gmatch/estimators.hpp"
#include "gmatch/inference.hpp"
#include "gmatch/matching.hpp"
#include "gmatch/parallel.hpp"
#include "gmatch/rng.hpp"

namespace gmatch {

enum class Scenario { A, B, C };

inline std::string to_string(Scenario s) {
  switch (s) {
    case Scenario::A: return "A";
    case Scenario::B: return "B";
    case Scenario::C: return "C";
  }
  return "?";
}

inline Scenario parse_scenario(std::string_view text) {
  if (text == "A" || text == "a") return Scenario::A;
  if (text == "B" || text == "b") return Scenario::B;
  if (text == "C" || text == "c") return Scenario::C;
  throw ValidationError("unknown scenario '" + std::string(text) + "'");
}

inline constexpr double kTrueEffect = 0.1;

struct DgpConfig {
  int num_groups = 10;
  int num_periods = 60;
  /// Units per replication (each observed in every period).
  int n = 1250;
  Scenario scenario = Scenario::A;
  /// Over groups 0..K; uniform 1/(K+1) when empty.
  std::optional<SimplexVector> group_probs;
  int num_factors = 8;
  std::uint64_t seed = 0;
  /// false: treated post-period rows carry Y(0); the random stream is unchanged.
  bool include_effect = true;

  TimeConfig time() const { return TimeConfig(num_periods, num_periods); }

  SimplexVector probabilities() const {
    return group_probs ? *group_probs : SimplexVector::uniform(num_groups + 1);
  }

  void validate() const {
    if (num_groups < 1) throw ValidationError("dgp: K must be positive");
    if (scenario == Scenario::B && num_groups < 2) {
      throw ValidationError("dgp: scenario B requires K >= 2");
    }
    if (scenario == Scenario::C && num_groups < 3) {
      throw ValidationError("dgp: scenario C requires K >= 3");
    }
    if (num_periods < 2) throw ValidationError("dgp: T must be at least 2");
    if (n < 1) throw ValidationError("dgp: n must be positive");
    if (num_factors < 1) throw ValidationError("dgp: need at least one factor");
    if (group_probs && group_probs->size() != num_groups + 1) {
      throw ValidationError("dgp: group_probs must have K+1 entries");
    }
  }
};

/// K=40 uses the (0.925/K, ..., 0.075) preset, any other K the
/// (0.7/K, ..., 0.3) one; the large group is the last donor.
inline SimplexVector unequal_group_probs(int k) {
  if (k < 1) throw ValidationError("unequal_group_probs: K must be positive");
  const double large = k == 40 ? 0.075 : 0.3;
  Vector p = Vector::Constant(k + 1, (1.0 - large) / static_cast<double>(k));
  p[k] = large;
  return SimplexVector(p);
}

/// Donor-pool shares implied by the group probabilities (w^DID).
inline Vector scenario_donor_shares(const DgpConfig& config) {
  const Vector p = config.probabilities().values();
  const Vector donors = p.tail(config.num_groups);
  return donors / donors.sum();
}

inline Vector scenario_scd_weights(int k) {
  Vector w = Vector::Zero(k);
  w[k - 2] = 0.1;
  w[k - 1] = 0.9;
  return w;
}

inline Vector scenario_out_weights(int k) {
  Vector w = Vector::Zero(k);
  w[k - 3] = -0.3;
  w[k - 2] = 0.4;
  w[k - 1] = 0.9;
  return w;
}

/// tau = eta^2 with eta ~ N(0, 0.1), so E[tau] = 0.1.
inline double draw_effect(RngStream& rng) {
  const double eta = rng.normal(0.0, std::sqrt(kTrueEffect));
  return eta * eta;
}

/// Population quantities of one replication.
struct Population {
  /// Row j: loading mean m_j (row 0 the treated group's post-regime mean).
  Matrix loading_means;
  /// Scenario C only: treated pre-regime loading mean m~_0.
  std::optional<Vector> treated_pre_loading;
  /// Row t-1: factor F_t.
  Matrix factors;
  /// Untreated population means m_j'F_t, (K+1) x T.
  Matrix means;
};

struct SimulatedData {
  Dataset data;
  Population population;
};

/// Draws replication `rep` of the configured DGP. Each replication owns the
/// substream (seed, rep).
inline SimulatedData generate(const DgpConfig& config, std::uint64_t rep = 0) {
  config.validate();
  const int k = config.num_groups;
  const int periods = config.num_periods;
  const int m = config.num_factors;
  const TimeConfig time = config.time();
  RngStream rng(derive_key(config.seed, 0x5EED0001u), rep);

  Population pop;
  pop.loading_means = Matrix::Zero(k + 1, m);
  for (int j = 1; j <= k; ++j) {
    for (int c = 0; c < m; ++c) pop.loading_means(j, c) = rng.normal(0.0, 2.5);
  }
  const Matrix donor_means = pop.loading_means.bottomRows(k);
  const Vector base = config.scenario == Scenario::B ? scenario_scd_weights(k)
                                                     : scenario_donor_shares(config);
  pop.loading_means.row(0) = base.transpose() * donor_means;
  if (config.scenario == Scenario::C) {
    pop.treated_pre_loading = (scenario_out_weights(k).transpose() * donor_means).transpose();
  }

  pop.factors = Matrix(periods, m);
  for (int t = 1; t <= periods; ++t) {
    const double drift = 0.02 * std::sqrt(static_cast<double>(t));
    for (int c = 0; c < m; ++c) pop.factors(t - 1, c) = rng.normal(drift, 0.5);
  }
  pop.means = pop.loading_means * pop.factors.transpose();
  // Scenario C: periods t <= T*-2 of the treated group use m~_0.
  const int switch_period = time.treatment_period() - 1;
  if (pop.treated_pre_loading) {
    for (int t = 1; t < switch_period; ++t) {
      pop.means(0, t - 1) = pop.treated_pre_loading->dot(pop.factors.row(t - 1));
    }
  }

  const Vector probs = config.probabilities().values();
  std::vector<double> cumulative(static_cast<std::size_t>(k + 1));
  double acc = 0.0;
  for (int j = 0; j <= k; ++j) {
    acc += probs[j];
    cumulative[static_cast<std::size_t>(j)] = acc;
  }
  cumulative.back() = 1.0;

  std::vector<Observation> rows;
  rows.reserve(static_cast<std::size_t>(config.n) * static_cast<std::size_t>(periods));
  std::vector<std::string> names;
  names.reserve(static_cast<std::size_t>(config.n));
  Vector loading(m);
  Vector pre_loading(m);
  for (int i = 0; i < config.n; ++i) {
    const int g = rng.categorical(cumulative);
    for (int c = 0; c < m; ++c) loading[c] = pop.loading_means(g, c) + rng.normal();
    const bool varying = g == 0 && pop.treated_pre_loading.has_value();
    if (varying) {
      for (int c = 0; c < m; ++c) pre_loading[c] = (*pop.treated_pre_loading)[c] + rng.normal();
    }
    names.push_back(std::to_string(i + 1));
    for (int t = 1; t <= periods; ++t) {
      const Vector& lam = varying && t < switch_period ? pre_loading : loading;
      double y = lam.dot(pop.factors.row(t - 1)) + rng.normal();
      if (g == 0 && time.is_post(t)) {
        const double tau = draw_effect(rng);
        if (config.include_effect) y += tau;
      }
      rows.push_back({static_cast<std::size_t>(i), t, g, y});
    }
  }
  return {Dataset::build(DatasetMode::panel, time, k, std::move(rows), std::move(names)),
          std::move(pop)};
}

/// Differencing the SCD estimator uses in each scenario.
inline DifferencingKind scenario_lambda(Scenario s) {
  return s == Scenario::B ? DifferencingKind::uniform : DifferencingKind::did;
}

struct McOptions {
  WeightMethod method = WeightMethod::scd;
  double alpha = 0.05;
  double kappa = 0.005;
  int draws = 10000;
  /// SCD differencing; the scenario default when empty.
  std::optional<DifferencingKind> lambda;
  int threads = 1;
};

struct McReplication {
  bool ok = false;
  double theta_hat = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  std::string error;
};

struct McResult {
  double mad = 0.0;
  double coverage = 0.0;
  double ci_length = 0.0;
  int replications = 0;
  int failures = 0;
  WeightMethod method = WeightMethod::scd;
  std::vector<McReplication> runs;
};

/// One replication: generate, estimate, and the Algorithm 1 interval at T*.
inline McReplication run_replication(const DgpConfig& config, const McOptions& options,
                                     std::uint64_t rep) {
  McReplication out;
  try {
    const SimulatedData sim = generate(config, rep);
    const TimeConfig time = config.time();
    WeightEstimate weights = [&] {
      if (options.method == WeightMethod::did) return did_weights(sim.data);
      if (options.method != WeightMethod::scd) {
        throw ValidationError("monte carlo: method must be scd or did");
      }
      const auto kind = options.lambda.value_or(scenario_lambda(config.scenario));
      const GroupMeans means = compute_group_means(sim.data);
      return fit_weights(apply_differencing(means, make_differencing(kind, time)),
                         WeightMethod::scd);
    }();
    InferenceOptions inf;
    inf.alpha = options.alpha;
    inf.kappa = options.kappa;
    inf.draws = options.draws;
    inf.seed = derive_key(config.seed, 0xC1000000u + rep);
    inf.threads = 1;
    const EffectInference result = infer_effects(sim.data, weights, inf);
    const PeriodInference& p = result.periods[static_cast<std::size_t>(time.treatment_period() - 1)];
    out.ok = true;
    out.theta_hat = p.theta_hat;
    out.ci_low = p.ci_low;
    out.ci_high = p.ci_high;
  } catch (const NumericalError& e) {
    out.error = e.what();
  }
  return out;
}

/// Replications run in parallel, each on its own substream; aggregation is
/// in replication order so results do not depend on the worker count.
/// Numerical failures are skipped and counted; more than 1% is an error.
inline McResult run_monte_carlo(const DgpConfig& config, int reps, const McOptions& options) {
  if (reps < 1) throw ValidationError("monte carlo: reps must be at least 1");
  config.validate();
  if (options.method != WeightMethod::scd && options.method != WeightMethod::did) {
    throw ValidationError("monte carlo: method must be scd or did");
  }
  validate_inference_options({options.alpha, options.kappa, options.draws});
  McResult result;
  result.method = options.method;
  result.runs.resize(static_cast<std::size_t>(reps));
  parallel_for(static_cast<std::size_t>(reps), resolve_threads(options.threads),
               [&](std::size_t r) { result.runs[r] = run_replication(config, options, r); });
  double abs_dev = 0.0;
  double covered = 0.0;
  double length = 0.0;
  for (const McReplication& run : result.runs) {
    if (!run.ok) {
      ++result.failures;
      continue;
    }
    ++result.replications;
    abs_dev += std::abs(run.theta_hat - kTrueEffect);
    covered += (run.ci_low <= kTrueEffect && kTrueEffect <= run.ci_high) ? 1.0 : 0.0;
    length += run.ci_high - run.ci_low;
  }
  if (static_cast<double>(result.failures) > 0.01 * static_cast<double>(reps)) {
    std::string first;
    for (const McReplication& run : result.runs) {
      if (!run.ok) {
        first = run.error;
        break;
      }
    }
    throw NumericalError("monte carlo: " + std::to_string(result.failures) + " of " +
                         std::to_string(reps) + " replications failed (" + first + ")");
  }
  const double done = static_cast<double>(result.replications);
  result.mad = abs_dev / done;
  result.coverage = covered / done;
  result.ci_length = length / done;
  return result;
}

}  // namespace gmatch

#endif  // GMATCH_SIMULATION_HPP
