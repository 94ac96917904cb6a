#ifndef GMATCH_CLI_HPP
#define GMATCH_CLI_HPP

// Command implementations behind the gmatch executable: estimate, simulate
// and diagnose. Each returns the process exit status (0 ok, 2 validation,
// 3 numerical) and reports failures as one `error[kind]: reason` line.

#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "gmatch/core.hpp"
#include "gmatch/error.hpp"
#include "gmatch/estimators.hpp"
#include "gmatch/inference.hpp"
#include "gmatch/io.hpp"
#include "gmatch/matching.hpp"
#include "gmatch/parallel.hpp"
#include "gmatch/rng.hpp"
#include "gmatch/simulation.hpp"

namespace gmatch {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitNumerical = 3;

enum class OutputFormat { csv, json };

inline std::string to_string(OutputFormat f) { return f == OutputFormat::csv ? "csv" : "json"; }

inline OutputFormat parse_output_format(std::string_view text) {
  if (text == "csv") return OutputFormat::csv;
  if (text == "json") return OutputFormat::json;
  throw ValidationError("unknown format '" + std::string(text) + "'");
}

struct RunConfig {
  std::string command;
  std::optional<std::filesystem::path> input;
  WeightMethod method = WeightMethod::scd;
  /// did for estimate/diagnose, the scenario's choice for simulate.
  std::optional<DifferencingKind> lambda;
  std::optional<std::vector<double>> custom_lambda;
  double alpha = 0.05;
  double kappa = 0.005;
  int draws = 10000;
  DatasetMode mode = DatasetMode::panel;
  /// T; inferred from the data when absent.
  std::optional<int> periods;
  std::optional<int> t_star;
  std::optional<int> num_groups;
  bool relabel_periods = false;
  std::uint64_t seed = 0;
  /// Not part of the echoed configuration: results do not depend on it.
  int threads = 0;
  std::optional<std::filesystem::path> output;
  OutputFormat format = OutputFormat::csv;
  std::optional<std::filesystem::path> plot_data;
  std::optional<double> ridge;
  bool no_inference = false;
  // simulate
  Scenario scenario = Scenario::A;
  int n = 1250;
  int reps = 200;
  bool unequal = false;
};

inline Json config_json(const RunConfig& c) {
  Json out{{"command", c.command},
           {"input", c.input ? Json(c.input->string()) : Json(nullptr)},
           {"method", to_string(c.method)},
           {"lambda", c.lambda ? Json(to_string(*c.lambda)) : Json(nullptr)},
           {"custom_lambda", c.custom_lambda ? Json(*c.custom_lambda) : Json(nullptr)},
           {"alpha", c.alpha},
           {"kappa", c.kappa},
           {"draws", c.draws},
           {"mode", to_string(c.mode)},
           {"periods", c.periods ? Json(*c.periods) : Json(nullptr)},
           {"t_star", c.t_star ? Json(*c.t_star) : Json(nullptr)},
           {"groups", c.num_groups ? Json(*c.num_groups) : Json(nullptr)},
           {"relabel_periods", c.relabel_periods},
           {"seed", c.seed},
           {"format", to_string(c.format)},
           {"ridge", c.ridge ? Json(*c.ridge) : Json(nullptr)},
           {"no_inference", c.no_inference},
           {"rng", kRngName}};
  if (c.command == "simulate") {
    out["scenario"] = to_string(c.scenario);
    out["n"] = c.n;
    out["reps"] = c.reps;
    out["unequal"] = c.unequal;
  }
  return out;
}

namespace detail {

template <typename Body>
int guarded(std::ostream& err, Body&& body) {
  try {
    body();
    return kExitOk;
  } catch (const ValidationError& e) {
    err << "error[validation]: " << e.what() << '\n';
    return kExitValidation;
  } catch (const NumericalError& e) {
    err << "error[numerical]: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error[validation]: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::exception& e) {
    err << "error[numerical]: " << e.what() << '\n';
    return kExitNumerical;
  }
}

struct LoadedData {
  Dataset data;
  RunConfig resolved;
};

inline LoadedData load_input(const RunConfig& config) {
  if (!config.input) throw ValidationError(config.command + " requires --input");
  if (!config.t_star) throw ValidationError(config.command + " requires --t-star");
  std::ifstream in(*config.input, std::ios::binary);
  if (!in) throw ValidationError("cannot open input file '" + config.input->string() + "'");
  CsvTable table = read_long_csv(in, config.input->string(), config.relabel_periods);
  RunConfig resolved = config;
  if (!resolved.periods) resolved.periods = table.max_period;
  if (!resolved.num_groups) resolved.num_groups = table.max_group;
  const TimeConfig time(*resolved.periods, *resolved.t_star);
  Dataset data = dataset_from_table(std::move(table), config.mode, time, resolved.num_groups);
  return {std::move(data), std::move(resolved)};
}

inline DifferencingScheme scheme_from(const RunConfig& c, const TimeConfig& time) {
  const DifferencingKind kind = c.lambda.value_or(DifferencingKind::did);
  if (c.custom_lambda && kind != DifferencingKind::custom) {
    throw ValidationError("--custom-lambda requires --lambda custom");
  }
  if (kind == DifferencingKind::custom) {
    if (!c.custom_lambda) throw ValidationError("--lambda custom requires --custom-lambda");
    Vector v(static_cast<Eigen::Index>(c.custom_lambda->size()));
    for (std::size_t i = 0; i < c.custom_lambda->size(); ++i) {
      v[static_cast<Eigen::Index>(i)] = (*c.custom_lambda)[i];
    }
    return make_differencing(DifferencingKind::custom, time, v);
  }
  return make_differencing(kind, time);
}

inline std::string fixed(double x, int width = 12) {
  std::ostringstream s;
  s << std::setw(width) << std::fixed << std::setprecision(5) << x;
  return s.str();
}

}  // namespace detail

/// Fits the requested weights, estimates theta_t for every period and (except
/// for sdid or --no-inference) the projection confidence intervals.
inline int cmd_estimate(const RunConfig& config, std::ostream& out, std::ostream& err) {
  return detail::guarded(err, [&] {
    auto [data, resolved] = detail::load_input(config);
    const TimeConfig& time = data.time_config();
    const GroupMeans means = compute_group_means(data);
    DifferencingScheme scheme = detail::scheme_from(resolved, time);
    resolved.lambda = scheme.kind();
    if (resolved.method == WeightMethod::sc) {
      scheme = make_differencing(DifferencingKind::none, time);
      resolved.lambda = DifferencingKind::none;
    }
    if (resolved.method == WeightMethod::did) {
      scheme = make_differencing(DifferencingKind::did, time);
      resolved.lambda = DifferencingKind::did;
    }
    if (resolved.method == WeightMethod::scd && scheme.kind() == DifferencingKind::none) {
      throw ValidationError("scd requires a non-zero differencing; use --method sc");
    }
    const WeightEstimate weights = estimate_weights(data, means, resolved.method, scheme);
    const EffectEstimate effects = estimate_effects(means, weights.effect_scheme(), weights);
    const bool with_inference = resolved.method != WeightMethod::sdid && !resolved.no_inference;
    std::optional<EffectInference> inference;
    if (with_inference) {
      InferenceOptions opt;
      opt.alpha = resolved.alpha;
      opt.kappa = resolved.kappa;
      opt.draws = resolved.draws;
      opt.seed = resolved.seed;
      opt.ridge = resolved.ridge;
      opt.threads = resolve_threads(resolved.threads);
      inference = infer_effects(data, weights, opt);
    }

    Json doc{{"config", config_json(resolved)}, {"weights", to_json(weights)}};
    if (inference) doc["inference"] = to_json(*inference);
    if (resolved.output) {
      const std::filesystem::path& path = *resolved.output;
      if (resolved.format == OutputFormat::csv) {
        write_text_file(path, render([&](std::ostream& s) {
                          if (inference) {
                            write_inference_csv(s, *inference);
                          } else {
                            write_effects_csv(s, effects);
                          }
                        }));
        write_text_file(path.string() + ".json", doc.dump(2) + "\n");
      } else {
        Json periods = Json::array();
        for (int t = 1; t <= time.num_periods(); ++t) {
          periods.push_back(Json{{"t", t},
                                 {"theta_hat", effects.theta[t - 1]},
                                 {"counterfactual", effects.counterfactual[t - 1]},
                                 {"is_post", time.is_post(t)}});
        }
        doc["effects"] = std::move(periods);
        write_text_file(path, doc.dump(2) + "\n");
      }
      write_text_file(path.string() + ".weights.csv",
                      render([&](std::ostream& s) { write_weights_csv(s, weights); }));
    }
    if (resolved.plot_data) {
      write_text_file(*resolved.plot_data, render([&](std::ostream& s) {
                        write_plot_csv(s, effects, inference ? &*inference : nullptr);
                      }));
    }

    out << "method " << to_string(weights.method) << ", lambda " << to_string(scheme.kind())
        << ", K=" << data.num_groups() << ", T=" << time.num_periods()
        << ", T*=" << time.treatment_period() << ", n=" << data.sample_size() << '\n';
    out << "weights:";
    for (Eigen::Index j = 0; j < weights.w.size(); ++j) out << ' ' << format_double(weights.w[j]);
    out << '\n';
    if (inference) {
      out << "accepted " << inference->accepted_count << " of " << inference->candidate_count
          << " candidate weights\n";
      out << "     t   theta_hat   sigma_hat      ci_low     ci_high  post\n";
      for (const PeriodInference& p : inference->periods) {
        out << std::setw(6) << p.t << detail::fixed(p.theta_hat) << detail::fixed(p.sigma_hat)
            << detail::fixed(p.ci_low) << detail::fixed(p.ci_high) << std::setw(6)
            << (p.is_post ? 1 : 0) << '\n';
      }
    } else {
      out << "     t   theta_hat  counterfact  post\n";
      for (int t = 1; t <= time.num_periods(); ++t) {
        out << std::setw(6) << t << detail::fixed(effects.theta[t - 1])
            << detail::fixed(effects.counterfactual[t - 1]) << std::setw(6)
            << (time.is_post(t) ? 1 : 0) << '\n';
      }
    }
  });
}

/// Monte Carlo run of one scenario and method.
inline int cmd_simulate(const RunConfig& config, std::ostream& out, std::ostream& err) {
  return detail::guarded(err, [&] {
    RunConfig resolved = config;
    if (resolved.reps < 1) throw ValidationError("--reps must be at least 1");
    if (resolved.method != WeightMethod::scd && resolved.method != WeightMethod::did) {
      throw ValidationError("simulate supports --method scd or did");
    }
    DgpConfig dgp;
    dgp.num_groups = resolved.num_groups.value_or(10);
    dgp.num_periods = resolved.periods.value_or(60);
    dgp.n = resolved.n;
    dgp.scenario = resolved.scenario;
    dgp.seed = resolved.seed;
    if (resolved.unequal) dgp.group_probs = unequal_group_probs(dgp.num_groups);
    if (resolved.t_star && *resolved.t_star != dgp.num_periods) {
      throw ValidationError("simulate uses T* = T (one post-treatment period)");
    }
    resolved.num_groups = dgp.num_groups;
    resolved.periods = dgp.num_periods;
    resolved.t_star = dgp.num_periods;
    McOptions mc;
    mc.method = resolved.method;
    mc.alpha = resolved.alpha;
    mc.kappa = resolved.kappa;
    mc.draws = resolved.draws;
    mc.threads = resolve_threads(resolved.threads);
    // --lambda applies to scd; did always differences at T*-1.
    if (resolved.method == WeightMethod::did) {
      resolved.lambda = DifferencingKind::did;
    } else if (!resolved.lambda) {
      resolved.lambda = scenario_lambda(dgp.scenario);
    }
    if (*resolved.lambda != DifferencingKind::did && *resolved.lambda != DifferencingKind::uniform) {
      throw ValidationError("simulate supports --lambda did or uniform");
    }
    mc.lambda = resolved.lambda;
    const McResult result = run_monte_carlo(dgp, resolved.reps, mc);

    const std::string csv = render([&](std::ostream& s) { write_mc_csv(s, dgp, result, resolved.reps); });
    if (resolved.output) {
      Json doc{{"config", config_json(resolved)},
               {"result",
                Json{{"mad", result.mad},
                     {"coverage", result.coverage},
                     {"ci_length", result.ci_length},
                     {"replications", result.replications},
                     {"failures", result.failures}}}};
      if (resolved.format == OutputFormat::csv) {
        write_text_file(*resolved.output, csv);
        write_text_file(resolved.output->string() + ".json", doc.dump(2) + "\n");
      } else {
        write_text_file(*resolved.output, doc.dump(2) + "\n");
      }
    }
    out << csv;
    if (result.failures > 0) {
      out << result.failures << " replication(s) skipped after numerical failure\n";
    }
  });
}

/// Regret diagnostics at the DID and SCD weights under the chosen
/// differencing, and the extrapolation-versus-trend comparison.
inline int cmd_diagnose(const RunConfig& config, std::ostream& out, std::ostream& err) {
  return detail::guarded(err, [&] {
    auto [data, resolved] = detail::load_input(config);
    const TimeConfig& time = data.time_config();
    const GroupMeans means = compute_group_means(data);
    const DifferencingScheme scheme = detail::scheme_from(resolved, time);
    resolved.lambda = scheme.kind();
    if (scheme.kind() == DifferencingKind::none) {
      throw ValidationError("diagnose requires a non-zero differencing");
    }
    const DifferencedMeans dm = apply_differencing(means, scheme);
    const WeightEstimate did = did_weights(data);
    const WeightEstimate scd = fit_weights(dm, WeightMethod::scd);
    const RegretDiagnostics d_did = regret_diagnostics(dm, did.w);
    const RegretDiagnostics d_scd = regret_diagnostics(dm, scd.w);
    const double mer_post_did = d_did.mer_post;
    const double delta_mer_scd = d_scd.delta_mer;
    const std::string favoured = delta_mer_scd > mer_post_did ? "did" : "scd";

    Json doc{{"config", config_json(resolved)},
             {"did", to_json(d_did)},
             {"scd", to_json(d_scd)},
             {"did_weights", to_json(did.w)},
             {"scd_weights", to_json(scd.w)},
             {"summary",
              Json{{"mer_post_did", mer_post_did},
                   {"delta_mer_scd", delta_mer_scd},
                   {"favoured", favoured}}}};
    if (resolved.output) write_text_file(*resolved.output, doc.dump(2) + "\n");

    out << "lambda " << to_string(scheme.kind()) << ", K=" << data.num_groups()
        << ", T=" << time.num_periods() << ", T*=" << time.treatment_period() << '\n';
    out << "rank_stat " << format_double(d_scd.rank_stat)
        << (d_scd.non_unique ? " (pre-period minimiser not unique)" : "") << '\n';
    for (const std::string& w : d_scd.warnings) out << "warning: " << w << '\n';
    out << "MER_post at DID weights:  " << format_double(mer_post_did) << '\n';
    out << "delta MER at SCD weights: " << format_double(delta_mer_scd) << '\n';
    out << (favoured == "did"
                ? "SCD extrapolation error exceeds the DID post-period regret: DID favoured\n"
                : "DID post-period regret is at least the SCD extrapolation error: SCD favoured\n");
  });
}

}  // namespace gmatch

#endif  // GMATCH_CLI_HPP
