// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fail.
// Tolerances and Monte Carlo settings are fixed here.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/normal.hpp>
#include <sys/wait.h>
#include <unistd.h>

#include "gmatch/gmatch.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;
using namespace gmatch;

namespace {

// Monte Carlo design
constexpr int kReps = 200;
constexpr int kDraws = 10000;
constexpr std::uint64_t kMcSeed = 1;
constexpr double kRuntimeLimitSec = 600.0;

// Scenario targets
constexpr double kMadALow = 0.06, kMadAHigh = 0.13, kCovAMin = 0.95;
constexpr double kLenALow = 0.9, kLenAHigh = 1.6;
constexpr double kCovBDidMax = 0.5, kMadBDidMin = 2.0, kCovBScdMin = 0.95;
constexpr double kCovCScdMax = 0.7, kCovCDidMin = 0.95;

// Deterministic checks
constexpr double kClassicDidUlps = 8.0;
constexpr double kGridStep = 1e-3, kGridTol = 1e-5;
constexpr double kEquivTol = 1e-6;
constexpr double kOverIdTol = 1e-8;
constexpr double kB2Tol = 1e-10, kCellSumTol = 1e-8, kVarianceTol = 1e-10, kQuantileTol = 1e-8;

int failures = 0;

void report(bool pass, const std::string& name, const std::string& detail) {
  std::printf("%s %s: %s\n", pass ? "PASS" : "FAIL", name.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

struct Timed {
  McResult result;
  double seconds;
};

Timed monte_carlo(Scenario s, WeightMethod m) {
  DgpConfig c;
  c.scenario = s;
  c.seed = kMcSeed;
  McOptions o;
  o.method = m;
  o.draws = kDraws;
  o.threads = resolve_threads(0);
  const auto start = std::chrono::steady_clock::now();
  McResult r = run_monte_carlo(c, kReps, o);
  const double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::printf("  scenario %s %s: MAD %.4f coverage %.3f length %.4f (%d ok, %d failed, %.1fs)\n",
              to_string(s).c_str(), to_string(m).c_str(), r.mad, r.coverage, r.ci_length,
              r.replications, r.failures, sec);
  return {std::move(r), sec};
}

void scenario_a() {
  const auto a = monte_carlo(Scenario::A, WeightMethod::scd);
  const auto& r = a.result;
  const bool pass = r.mad >= kMadALow && r.mad <= kMadAHigh && r.coverage >= kCovAMin &&
                    r.ci_length >= kLenALow && r.ci_length <= kLenAHigh &&
                    a.seconds <= kRuntimeLimitSec;
  report(pass, "scenario A scd (K=10 T=60 n=1250)",
         fmt("MAD %.4f in [0.06,0.13], coverage %.3f >= 0.95, length %.4f in [0.9,1.6], %.0fs",
             r.mad, r.coverage, r.ci_length, a.seconds));
}

void scenario_b() {
  const auto did = monte_carlo(Scenario::B, WeightMethod::did).result;
  const auto scd = monte_carlo(Scenario::B, WeightMethod::scd).result;
  const bool pass = did.coverage <= kCovBDidMax && did.mad >= kMadBDidMin && scd.coverage >= kCovBScdMin;
  report(pass, "scenario B did vs scd",
         fmt("did coverage %.3f <= 0.5, did MAD %.4f >= 2.0, scd coverage %.3f >= 0.95",
             did.coverage, did.mad, scd.coverage));
}

void scenario_c() {
  const auto scd = monte_carlo(Scenario::C, WeightMethod::scd).result;
  const auto did = monte_carlo(Scenario::C, WeightMethod::did).result;
  const bool pass = scd.coverage <= kCovCScdMax && did.coverage >= kCovCDidMin;
  report(pass, "scenario C scd vs did",
         fmt("scd coverage %.3f <= 0.7, did coverage %.3f >= 0.95", scd.coverage, did.coverage));
}

void classic_did() {
  double worst = 0.0;
  for (unsigned seed = 1; seed <= 50; ++seed) {
    const auto d = oracle::random_panel(1, 2, 2, 20 + static_cast<int>(seed), seed, 0.25);
    const auto w = did_weights(d);
    const double theta = estimate_effects(d, w.lambda_used, w).theta[1];
    double s[2][2] = {{0, 0}, {0, 0}};
    double c[2][2] = {{0, 0}, {0, 0}};
    double scale = 0.0;
    for (const auto& o : d.observations()) {
      s[o.group][o.period - 1] += o.outcome;
      c[o.group][o.period - 1] += 1.0;
      scale = std::max(scale, std::abs(o.outcome));
    }
    const double expected = (s[0][1] / c[0][1] - s[0][0] / c[0][0]) -
                            (s[1][1] / c[1][1] - s[1][0] / c[1][0]);
    worst = std::max(worst, std::abs(theta - expected) / (std::numeric_limits<double>::epsilon() * scale));
  }
  report(worst <= kClassicDidUlps, "classic DID reduction (K=1, T=2, 50 panels)",
         fmt("max error %.2f eps*scale <= 8", worst));
}

void qp_oracle() {
  std::mt19937_64 gen(2024);
  double worst = 0.0;
  for (int rep = 0; rep < 100; ++rep) {
    const int k = 2 + rep % 2;
    const Matrix h = oracle::random_psd(k, gen, rep % 4 == 0 ? 1 : -1);
    const Vector l = oracle::random_vector(k, gen);
    const double solver = solve_simplex_qp({h, l}).objective;
    worst = std::max(worst, std::abs(solver - oracle::grid_qp_min(h, l, kGridStep)));
  }
  report(worst <= kGridTol, "simplex QP vs grid search (100 instances, K in {2,3})",
         fmt("max objective gap %.3g <= 1e-5", worst));
}

void scd_did_equivalence() {
  std::mt19937_64 gen(4);
  double worst = 0.0;
  bool rank_ok = true;
  for (int rep = 0; rep < 20; ++rep) {
    const int k = 2 + rep % 6;
    const TimeConfig time(k + 10, k + 5);
    const auto pop = oracle::pta_population(k, time.num_periods(), gen);
    const auto kind = rep % 2 ? DifferencingKind::did : DifferencingKind::uniform;
    const auto dm = apply_differencing(GroupMeans::population(time, pop.means), make_differencing(kind, time));
    rank_ok = rank_ok && rank_statistic(dm) > 0.0;
    const auto fit = fit_weights(dm, WeightMethod::scd);
    worst = std::max(worst, (fit.w.values() - pop.w).cwiseAbs().maxCoeff());
  }
  report(rank_ok && worst <= kEquivTol, "SCD equals DID under parallel trends (20 populations)",
         fmt("max |w_scd - w_did| %.3g <= 1e-6", worst));
}

void overidentification() {
  std::mt19937_64 gen(1);
  double worst = 0.0;
  for (int rep = 0; rep < 20; ++rep) {
    const int k = 2 + rep % 5;
    const TimeConfig time(3 * k + 8, 3 * k + 3);
    const auto pop = oracle::factor_population(k, time.num_periods(), time.treatment_period(), 0.5, gen);
    const auto means = GroupMeans::population(time, pop.means);
    const std::vector<DifferencingScheme> schemes{
        make_differencing(DifferencingKind::did, time),
        make_differencing(DifferencingKind::uniform, time),
        make_differencing(DifferencingKind::none, time),
        make_differencing(DifferencingKind::custom, time, oracle::random_simplex(time.num_pre(), gen)),
        make_differencing(DifferencingKind::custom, time, oracle::random_simplex(time.num_pre(), gen))};
    Vector first;
    for (const auto& s : schemes) {
      const auto method = s.kind() == DifferencingKind::none ? WeightMethod::sc : WeightMethod::scd;
      const auto fit = fit_weights(apply_differencing(means, s), method);
      const Vector post = estimate_effects(means, s, fit).theta.tail(time.num_post());
      if (first.size() == 0) first = post;
      worst = std::max(worst, (post - first).cwiseAbs().maxCoeff());
    }
  }
  report(worst <= kOverIdTol, "post-period effects agree across 5 lambda (20 populations)",
         fmt("max spread %.3g <= 1e-8", worst));
}

// CDF inversion by bisection.
template <typename Dist>
double invert_cdf(const Dist& d, double p, double lo, double hi) {
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (boost::math::cdf(d, mid) < p ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

void inference_internals() {
  double b2_err = 0.0;
  for (int k = 2; k <= 50; ++k) {
    const Matrix b2 = build_b2(k).b2;
    b2_err = std::max(b2_err, (b2.transpose() * b2 - Matrix::Identity(k - 1, k - 1)).cwiseAbs().maxCoeff());
    b2_err = std::max(b2_err, (Vector::Ones(k).transpose() * b2).cwiseAbs().maxCoeff());
  }

  double cell_err = 0.0;
  double var_err = 0.0;
  std::mt19937_64 gen(8);
  for (unsigned seed = 1; seed <= 8; ++seed) {
    const int k = 2 + static_cast<int>(seed % 3);
    const bool panel = seed % 2 == 0;
    const auto d = panel ? oracle::random_panel(k, 7, 5, 10 * (k + 1), seed, 0.15)
                         : oracle::random_rc(k, 7, 5, 8 * (k + 1), seed);
    const auto scheme = make_differencing(seed % 4 < 2 ? DifferencingKind::did : DifferencingKind::uniform,
                                          d.time_config());
    const auto means = compute_group_means(d);
    const auto inf = influence_functions(d, scheme, means);
    for (int j = 0; j <= k; ++j) {
      for (int t = 1; t <= 7; ++t) {
        double sum = 0.0;
        double abs_sum = 0.0;
        for (std::size_t i = 0; i < inf.n; ++i) {
          sum += inf.psi_star(i, j, t);
          abs_sum += std::abs(inf.psi_star(i, j, t));
        }
        cell_err = std::max(cell_err, std::abs(sum) / (1.0 + abs_sum));
      }
    }
    auto o = oracle::dense_influence(d, scheme.lambda());
    const auto b2 = build_b2(k);
    const SimplexVector w(oracle::random_simplex(k, gen));
    const Matrix lib = panel ? variance_panel(inf, w, b2)
                             : variance_rc(inf, apply_differencing(means, scheme), w, b2);
    const Matrix ref = panel ? oracle::dense_variance_panel(o, w.values(), b2.b2)
                             : oracle::dense_variance_rc(o, w.values(), b2.b2);
    var_err = std::max(var_err, (lib - ref).cwiseAbs().maxCoeff() / (1.0 + ref.cwiseAbs().maxCoeff()));
  }

  double q_err = 0.0;
  const boost::math::normal_distribution<double> nd;
  for (double p : {1e-6, 0.0025, 0.01125, 0.025, 0.5, 0.95, 0.98875, 0.9975, 0.999999}) {
    const double ref = invert_cdf(nd, p, -40.0, 40.0);
    q_err = std::max(q_err, std::abs(normal_quantile(p) - ref) / std::max(1.0, std::abs(ref)));
  }
  for (int df = 1; df <= 60; ++df) {
    const boost::math::chi_squared_distribution<double> cd(df);
    for (double p : {0.01, 0.5, 0.95, 0.995}) {
      const double ref = invert_cdf(cd, p, 0.0, 500.0);
      q_err = std::max(q_err, std::abs(chi2_quantile(df, p) - ref) / std::max(1.0, ref));
    }
  }
  const bool pass = b2_err <= kB2Tol && cell_err <= kCellSumTol && var_err <= kVarianceTol &&
                    q_err <= kQuantileTol;
  report(pass, "inference internals",
         fmt("B2 %.2g, cell sums %.2g, variance vs oracle %.2g, quantiles %.2g", b2_err, cell_err,
             var_err, q_err));
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string("\"") + GMATCH_CLI_PATH + "\" " + args + " > /dev/null 2>&1";
  const int raw = std::system(cmd.c_str());
  return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
}

void determinism() {
  const fs::path dir = fs::temp_directory_path() / ("gmatch_accept_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  DgpConfig c;
  c.num_groups = 5;
  c.num_periods = 15;
  c.n = 600;
  c.seed = 17;
  const fs::path input = dir / "panel.csv";
  oracle::write_csv(generate(c).data, input);

  bool same = true;
  bool ok = true;
  int compared = 0;
  const std::string est = "estimate --input \"" + input.string() + "\" --t-star 15 --seed 5 --draws 3000";
  const std::string sim = "simulate --scenario C --groups 5 --periods 15 --n 400 --reps 8 --draws 1000 --seed 5";
  const std::vector<std::pair<std::string, std::vector<std::string>>> runs{
      {est + " --method scd --lambda uniform", {"", ".json", ".weights.csv"}},
      {est + " --method did", {"", ".json", ".weights.csv"}},
      {sim + " --method scd", {"", ".json"}},
      {sim + " --method did", {"", ".json"}}};
  int idx = 0;
  for (const auto& [args, suffixes] : runs) {
    std::vector<std::string> outputs;
    for (int threads : {1, 2, 4}) {
      const fs::path out = dir / ("run" + std::to_string(idx) + "_t" + std::to_string(threads) + ".csv");
      ok = ok && run_cli(args + " --threads " + std::to_string(threads) + " --output \"" + out.string() + "\"") == 0;
      std::string all;
      for (const auto& s : suffixes) all += slurp(out.string() + s) + '\x1f';
      outputs.push_back(all);
    }
    for (const auto& o : outputs) {
      same = same && o == outputs[0];
      ++compared;
    }
    ++idx;
  }
  fs::remove_all(dir);
  report(ok && same, "byte-identical outputs across --threads 1/2/4 (estimate, simulate)",
         std::to_string(compared) + " runs, all exit 0 " + (ok ? "yes" : "no") + ", identical " +
             (same ? "yes" : "no"));
}

}  // namespace

int main() {
  std::printf("acceptance: MC reps=%d draws=%d seed=%llu\n", kReps, kDraws,
              static_cast<unsigned long long>(kMcSeed));
  const std::vector<std::function<void()>> checks{
      classic_did, qp_oracle, scd_did_equivalence, overidentification, inference_internals,
      determinism, scenario_a, scenario_b, scenario_c};
  for (const auto& check : checks) {
    try {
      check();
    } catch (const std::exception& e) {
      report(false, "exception", e.what());
    }
  }
  std::printf("summary: %d of %zu criteria failing\n", failures, checks.size());
  return failures ? 1 : 0;
}
