#include <random>

#include <gtest/gtest.h>

#include "gmatch/estimators.hpp"
#include "oracles.hpp"

using namespace gmatch;

namespace {

double mean_of(const Dataset& d, int group, int period) {
  double s = 0.0;
  int c = 0;
  for (const auto& o : d.observations()) {
    if (o.group == group && o.period == period) {
      s += o.outcome;
      ++c;
    }
  }
  return s / c;
}

}  // namespace

TEST(ClassicDid, TwoGroupTwoPeriodIdentity) {
  for (unsigned seed = 1; seed <= 10; ++seed) {
    const auto d = oracle::random_panel(1, 2, 2, 30 + static_cast<int>(seed), seed, 0.2);
    const auto w = did_weights(d);
    EXPECT_EQ(w.w[0], 1.0);
    const auto eff = estimate_effects(d, w.lambda_used, w);
    const double expected =
        (mean_of(d, 0, 2) - mean_of(d, 0, 1)) - (mean_of(d, 1, 2) - mean_of(d, 1, 1));
    EXPECT_NEAR(eff.theta[1], expected, 4 * std::numeric_limits<double>::epsilon() *
                                            (1.0 + std::abs(expected) + std::abs(mean_of(d, 0, 2))));
    EXPECT_EQ(eff.theta[0], 0.0);
  }
}

TEST(DidWeights, GroupSharesPanelAndRc) {
  const auto p = oracle::random_panel(3, 4, 3, 41, 9, 0.3);
  const auto w = did_weights(p);
  Vector counts = Vector::Zero(3);
  for (int g : p.unit_groups()) {
    if (g > 0) counts[g - 1] += 1;
  }
  EXPECT_LT((w.w.values() - counts / counts.sum()).norm(), 1e-15);
  EXPECT_EQ(w.lambda_used.kind(), DifferencingKind::did);

  const auto rc = oracle::random_rc(3, 4, 3, 25, 10);
  Vector rows = Vector::Zero(3);
  for (const auto& o : rc.observations()) {
    if (o.group > 0) rows[o.group - 1] += 1;
  }
  EXPECT_LT((did_weights(rc).w.values() - rows / rows.sum()).norm(), 1e-15);
}

TEST(FitWeights, MethodLambdaPairing) {
  const auto d = oracle::random_panel(3, 6, 4, 40, 3);
  const auto gm = compute_group_means(d);
  const auto none = apply_differencing(gm, make_differencing(DifferencingKind::none, d.time_config()));
  const auto did = apply_differencing(gm, make_differencing(DifferencingKind::did, d.time_config()));
  EXPECT_THROW(fit_weights(none, WeightMethod::scd), ValidationError);
  EXPECT_THROW(fit_weights(did, WeightMethod::sc), ValidationError);
  EXPECT_THROW(fit_weights(did, WeightMethod::did), ValidationError);
  EXPECT_NO_THROW(fit_weights(none, WeightMethod::sc));
}

TEST(FitWeights, MinimisesPrePeriodError) {
  std::mt19937_64 gen(7);
  const auto d = oracle::random_panel(4, 10, 7, 60, 4);
  const auto gm = compute_group_means(d);
  const auto dm = apply_differencing(gm, make_differencing(DifferencingKind::uniform, d.time_config()));
  const auto fit = fit_weights(dm, WeightMethod::scd);
  const auto pre = pre_periods(d.time_config());
  const double best = ssme(matching_errors(dm, fit.w, pre));
  for (int rep = 0; rep < 200; ++rep) {
    const SimplexVector w(oracle::random_simplex(4, gen));
    EXPECT_GE(ssme(matching_errors(dm, w, pre)), best - 1e-12);
  }
}

// Noiseless populations satisfying parallel trends for the chosen lambda:
// SCD recovers the donor shares.
TEST(Equivalence, ScdEqualsDidUnderParallelTrends) {
  std::mt19937_64 gen(11);
  for (int rep = 0; rep < 20; ++rep) {
    const int k = 2 + rep % 5;
    const TimeConfig time(k + 8, k + 4);
    const auto pop = oracle::pta_population(k, time.num_periods(), gen);
    const Vector& shares = pop.w;
    const Matrix& m = pop.means;
    const auto kind = rep % 2 ? DifferencingKind::did : DifferencingKind::uniform;
    const auto dm = apply_differencing(GroupMeans::population(time, m), make_differencing(kind, time));
    ASSERT_GT(rank_statistic(dm), 0.0);
    const auto fit = fit_weights(dm, WeightMethod::scd);
    EXPECT_LE((fit.w.values() - shares).cwiseAbs().maxCoeff(), 1e-6);
  }
}

TEST(Overidentification, PostEffectsAgreeAcrossLambda) {
  std::mt19937_64 gen(12);
  for (int rep = 0; rep < 20; ++rep) {
    const int k = 3 + rep % 3;
    const TimeConfig time(3 * k + 6, 3 * k + 2);
    const auto pop = oracle::factor_population(k, time.num_periods(), time.treatment_period(), 0.7, gen);
    const auto means = GroupMeans::population(time, pop.means);
    std::vector<DifferencingScheme> schemes{
        make_differencing(DifferencingKind::did, time),
        make_differencing(DifferencingKind::uniform, time),
        make_differencing(DifferencingKind::none, time),
        make_differencing(DifferencingKind::custom, time, oracle::random_simplex(time.num_pre(), gen)),
        make_differencing(DifferencingKind::custom, time, oracle::random_simplex(time.num_pre(), gen))};
    std::vector<Vector> thetas;
    for (const auto& s : schemes) {
      const auto method = s.kind() == DifferencingKind::none ? WeightMethod::sc : WeightMethod::scd;
      const auto fit = fit_weights(apply_differencing(means, s), method);
      thetas.push_back(estimate_effects(means, s, fit).theta.tail(time.num_post()));
    }
    for (const auto& th : thetas) {
      EXPECT_LE((th - thetas[0]).cwiseAbs().maxCoeff(), 1e-8);
      EXPECT_NEAR(th[0], 0.7, 1e-8);
    }
  }
}

TEST(Sdid, LambdaProblemMatchesDirectObjective) {
  std::mt19937_64 gen(13);
  const int k = 4;
  const TimeConfig time(9, 6);
  std::normal_distribution<double> nd;
  Matrix m(k + 1, 9);
  for (int j = 0; j <= k; ++j) {
    for (int t = 0; t < 9; ++t) m(j, t) = nd(gen);
  }
  const SimplexVector w(oracle::random_simplex(k, gen));
  const QpProblem p = sdid_lambda_problem(m, time, w);
  auto direct = [&](const Vector& lambda) {
    const Matrix mu = difference_means(m, lambda);
    double total = 0.0;
    for (int r = 1; r <= k; ++r) {
      double s = 0.0;
      for (int t = time.treatment_period(); t <= 9; ++t) {
        s += mu(r, t - 1) - w.values().dot(mu.col(t - 1).tail(k));
      }
      total += s * s;
    }
    return total;
  };
  const double constant = direct(Vector::Zero(time.num_pre()));
  for (int rep = 0; rep < 10; ++rep) {
    const Vector lambda = oracle::random_simplex(time.num_pre(), gen);
    EXPECT_NEAR(2.0 * qp_objective(p.hessian, p.linear, lambda) + constant, direct(lambda),
                1e-9 * (1.0 + constant));
  }
}

TEST(Sdid, FitMatchesFaceEnumeration) {
  for (unsigned seed = 1; seed <= 5; ++seed) {
    const auto d = oracle::random_panel(3, 9, 7, 80, seed);
    const auto gm = compute_group_means(d);
    const auto fit = sdid_fit(gm);
    ASSERT_TRUE(fit.sdid_lambda.has_value());
    const auto scd = fit_weights(
        apply_differencing(gm, make_differencing(DifferencingKind::uniform, d.time_config())),
        WeightMethod::scd);
    EXPECT_LT((fit.w.values() - scd.w.values()).cwiseAbs().maxCoeff(), 1e-12);
    const QpProblem p = sdid_lambda_problem(gm.means, d.time_config(), SimplexVector::uniform(3));
    const auto [best, lambda] = oracle::face_enum_qp(p.hessian, p.linear);
    EXPECT_NEAR(qp_objective(p.hessian, p.linear, fit.sdid_lambda->lambda()), best,
                1e-9 * (1.0 + std::abs(best)));
    EXPECT_EQ(&fit.effect_scheme(), &*fit.sdid_lambda);
  }
}

TEST(Effects, CounterfactualIdentity) {
  const auto d = oracle::random_panel(3, 6, 4, 50, 21);
  const auto gm = compute_group_means(d);
  const auto s = make_differencing(DifferencingKind::uniform, d.time_config());
  const auto fit = estimate_weights(d, gm, WeightMethod::scd, s);
  const auto eff = estimate_effects(gm, s, fit);
  EXPECT_LT((eff.observed - eff.counterfactual - eff.theta).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LT((eff.observed - gm.means.row(0).transpose()).norm(), 1e-15);
  EXPECT_THROW(estimate_effects(gm, s, did_weights(oracle::random_panel(2, 6, 4, 30, 1))),
               ValidationError);
  EXPECT_EQ(parse_weight_method("sdid"), WeightMethod::sdid);
  EXPECT_THROW(parse_weight_method("ols"), ValidationError);
}
