#ifndef GMATCH_IO_HPP
#define GMATCH_IO_HPP

// CSV / JSON serialisation of estimates, inference results, diagnostics and
// Monte Carlo summaries. Doubles are written with 17 significant digits.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>

#include "json.hpp"

#include "gmatch/core.hpp"
#include "gmatch/error.hpp"
#include "gmatch/estimators.hpp"
#include "gmatch/inference.hpp"
#include "gmatch/matching.hpp"
#include "gmatch/simulation.hpp"

namespace gmatch {

using Json = nlohmann::ordered_json;

inline std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline Json to_json(const Vector& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

inline Json to_json(const SimplexVector& w) { return to_json(w.values()); }

inline Json to_json(const DifferencingScheme& s) {
  return Json{{"kind", to_string(s.kind())}, {"lambda", to_json(s.lambda())}};
}

inline Json to_json(const QpSolution& q) {
  return Json{{"objective", q.objective},
              {"kkt_residual", q.kkt_residual},
              {"active_set", q.active_set},
              {"unique", q.unique},
              {"iterations", q.iterations}};
}

inline Json to_json(const WeightEstimate& w) {
  Json out{{"method", to_string(w.method)}, {"w", to_json(w.w)}, {"lambda", to_json(w.lambda_used)}};
  if (w.sdid_lambda) out["sdid_lambda"] = to_json(*w.sdid_lambda);
  if (w.qp) out["qp"] = to_json(*w.qp);
  if (w.sdid_qp) out["sdid_qp"] = to_json(*w.sdid_qp);
  return out;
}

inline Json to_json(const RegretDiagnostics& d) {
  return Json{{"ssme_pre", d.ssme_pre},
              {"ssme_post", d.ssme_post},
              {"mer_pre", d.mer_pre},
              {"mer_post", d.mer_post},
              {"delta_mer", d.delta_mer},
              {"minimizer_pre", to_json(d.minimizer_pre)},
              {"minimizer_post", to_json(d.minimizer_post)},
              {"rank_stat", d.rank_stat},
              {"non_unique", d.non_unique},
              {"warnings", d.warnings}};
}

inline Json to_json(const EffectInference& inf) {
  Json periods = Json::array();
  for (const PeriodInference& p : inf.periods) {
    periods.push_back(Json{{"t", p.t},
                           {"theta_hat", p.theta_hat},
                           {"sigma_hat", p.sigma_hat},
                           {"ci_low", p.ci_low},
                           {"ci_high", p.ci_high},
                           {"is_post", p.is_post}});
  }
  return Json{{"alpha", inf.alpha},
              {"kappa", inf.kappa},
              {"R", inf.num_draws},
              {"seed", inf.seed},
              {"accepted_count", inf.accepted_count},
              {"candidate_count", inf.candidate_count},
              {"mode", to_string(inf.mode)},
              {"n", inf.n},
              {"z", inf.z},
              {"periods", std::move(periods)}};
}

inline void write_effects_csv(std::ostream& out, const EffectEstimate& e) {
  out << "t,theta_hat,counterfactual,is_post\n";
  for (int t = 1; t <= e.time.num_periods(); ++t) {
    out << t << ',' << format_double(e.theta[t - 1]) << ',' << format_double(e.counterfactual[t - 1])
        << ',' << (e.time.is_post(t) ? 1 : 0) << '\n';
  }
}

inline void write_inference_csv(std::ostream& out, const EffectInference& inf) {
  out << "t,theta_hat,sigma_hat,ci_low,ci_high,is_post\n";
  for (const PeriodInference& p : inf.periods) {
    out << p.t << ',' << format_double(p.theta_hat) << ',' << format_double(p.sigma_hat) << ','
        << format_double(p.ci_low) << ',' << format_double(p.ci_high) << ','
        << (p.is_post ? 1 : 0) << '\n';
  }
}

inline void write_weights_csv(std::ostream& out, const WeightEstimate& w) {
  out << "group,weight\n";
  for (Eigen::Index j = 0; j < w.w.size(); ++j) out << j + 1 << ',' << format_double(w.w[j]) << '\n';
}

/// Series behind an effects plot: observed and synthetic paths, theta and
/// (when available) the confidence band.
inline void write_plot_csv(std::ostream& out, const EffectEstimate& e, const EffectInference* inf) {
  out << "t,observed,counterfactual,theta_hat,ci_low,ci_high,is_post\n";
  for (int t = 1; t <= e.time.num_periods(); ++t) {
    out << t << ',' << format_double(e.observed[t - 1]) << ','
        << format_double(e.counterfactual[t - 1]) << ',' << format_double(e.theta[t - 1]) << ',';
    if (inf) {
      const PeriodInference& p = inf->periods[static_cast<std::size_t>(t - 1)];
      out << format_double(p.ci_low) << ',' << format_double(p.ci_high);
    } else {
      out << ',';
    }
    out << ',' << (e.time.is_post(t) ? 1 : 0) << '\n';
  }
}

inline void write_mc_csv(std::ostream& out, const DgpConfig& config, const McResult& r, int reps) {
  out << "K,T,n,scenario,method,mad,coverage,ci_length,reps,seed\n";
  out << config.num_groups << ',' << config.num_periods << ',' << config.n << ','
      << to_string(config.scenario) << ',' << to_string(r.method) << ',' << format_double(r.mad)
      << ',' << format_double(r.coverage) << ',' << format_double(r.ci_length) << ',' << reps << ','
      << config.seed << '\n';
}

/// Writes `text` to `path`, creating parent directories.
inline void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ValidationError("cannot write output file '" + path.string() + "'");
  out << text;
  if (!out) throw ValidationError("write failed for '" + path.string() + "'");
}

template <typename Writer>
std::string render(Writer&& writer) {
  std::ostringstream out;
  writer(out);
  return out.str();
}

}  // namespace gmatch

#endif  // GMATCH_IO_HPP
