// gmatch: groupwise matching estimation, inference, diagnostics and
// Monte Carlo from the command line.

#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "gmatch/cli.hpp"

namespace {

struct RawFlags {
  std::string input;
  std::string method = "scd";
  std::string lambda;
  std::vector<double> custom_lambda;
  std::string mode = "panel";
  std::string format = "csv";
  std::string output;
  std::string plot_data;
  std::string scenario = "A";
  int periods = 0;
  int t_star = 0;
  int groups = 0;
  double ridge = 0.0;
};

void add_common(CLI::App* app, gmatch::RunConfig& c, RawFlags& f) {
  app->add_option("--method", f.method, "did | sc | scd | sdid");
  app->add_option("--lambda", f.lambda, "did | uniform | custom | none");
  app->add_option("--custom-lambda", f.custom_lambda, "weights over pre-treatment periods")
      ->delimiter(',');
  app->add_option("--alpha", c.alpha, "confidence level complement");
  app->add_option("--kappa", c.kappa, "weight-test level");
  app->add_option("--draws", c.draws, "Dirichlet draws R");
  app->add_option("--mode", f.mode, "panel | rc");
  app->add_option("--t-star", f.t_star, "first treated period");
  app->add_option("--periods", f.periods, "number of periods T");
  app->add_option("--groups", f.groups, "number of donor groups K");
  app->add_option("--seed", c.seed, "random seed");
  app->add_option("--threads", c.threads, "worker threads (default GMATCH_THREADS or 1)");
  app->add_option("--output", f.output, "output file");
  app->add_option("--format", f.format, "csv | json");
  app->add_option("--plot-data", f.plot_data, "write the series behind an effects plot");
  app->add_option("--ridge", f.ridge, "ridge for a singular variance estimate");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"groupwise matching: DID, SC, SCD and SDID with uniform inference"};
  app.require_subcommand(1);
  gmatch::RunConfig config;
  RawFlags flags;

  auto* estimate = app.add_subcommand("estimate", "estimate weights, effects and intervals");
  add_common(estimate, config, flags);
  estimate->add_option("--input", flags.input, "long-format CSV")->required();
  estimate->add_flag("--relabel-periods", config.relabel_periods, "map raw periods to 1..T");
  estimate->add_flag("--no-inference", config.no_inference, "point estimates only");

  auto* diagnose = app.add_subcommand("diagnose", "regret diagnostics for DID and SCD weights");
  add_common(diagnose, config, flags);
  diagnose->add_option("--input", flags.input, "long-format CSV")->required();
  diagnose->add_flag("--relabel-periods", config.relabel_periods, "map raw periods to 1..T");

  auto* simulate = app.add_subcommand("simulate", "Monte Carlo over a factor-model scenario");
  add_common(simulate, config, flags);
  simulate->add_option("--scenario", flags.scenario, "A | B | C");
  simulate->add_option("--n", config.n, "units per replication");
  simulate->add_option("--reps", config.reps, "replications");
  simulate->add_flag("--unequal", config.unequal, "one large donor group");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error[validation]: " << e.what() << '\n';
    return gmatch::kExitValidation;
  }

  auto* active = app.get_subcommands().front();
  config.command = active->get_name();
  const int status = gmatch::detail::guarded(std::cerr, [&] {
    if (!flags.input.empty()) config.input = flags.input;
    config.method = gmatch::parse_weight_method(flags.method);
    if (!flags.lambda.empty()) config.lambda = gmatch::parse_differencing_kind(flags.lambda);
    if (!flags.custom_lambda.empty()) config.custom_lambda = flags.custom_lambda;
    config.mode = gmatch::parse_dataset_mode(flags.mode);
    config.format = gmatch::parse_output_format(flags.format);
    if (!flags.output.empty()) config.output = flags.output;
    if (!flags.plot_data.empty()) config.plot_data = flags.plot_data;
    if (active->count("--periods")) config.periods = flags.periods;
    if (active->count("--t-star")) config.t_star = flags.t_star;
    if (active->count("--groups")) config.num_groups = flags.groups;
    if (active->count("--ridge")) config.ridge = flags.ridge;
    if (config.command == "simulate") config.scenario = gmatch::parse_scenario(flags.scenario);
  });
  if (status != gmatch::kExitOk) return status;

  if (config.command == "estimate") return gmatch::cmd_estimate(config, std::cout, std::cerr);
  if (config.command == "diagnose") return gmatch::cmd_diagnose(config, std::cout, std::cerr);
  return gmatch::cmd_simulate(config, std::cout, std::cerr);
}
