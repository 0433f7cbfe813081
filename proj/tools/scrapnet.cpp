// scrapnet command-line entry point.
//
//   scrapnet run --config data/fixtures/config.json
//   scrapnet backbone --trade trade.csv --alpha 0.01 --out out/
//
// Exit codes: 0 success, 1 stage failure, 2 configuration error.

#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "scrapnet/pipeline.hpp"
#include "scrapnet/regression.hpp"
#include "scrapnet/report.hpp"

namespace {

using scrapnet::PipelineConfig;
using scrapnet::Stage;

struct Overrides {
  std::string config;
  std::optional<std::string> out, trade, registry, capacity, observations;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> prefix;
  std::optional<double> alpha;
  std::optional<std::string> keyword;
  std::vector<int> grid;
  std::optional<int> lda_iterations;
  std::vector<std::string> regressors;
  std::optional<std::string> covariance;
  std::optional<std::string> coefficient_source;
  std::optional<double> beta, beta_sd;
  std::optional<std::size_t> draws, mc_iterations;
  std::vector<std::string> formats;
};

void add_common(CLI::App* cmd, Overrides& o) {
  cmd->add_option("-c,--config", o.config, "JSON configuration file");
  cmd->add_option("-o,--out", o.out, "Output directory");
  cmd->add_option("--seed", o.seed, "Master seed");
  cmd->add_option("--trade", o.trade, "Bilateral trade file");
  cmd->add_option("--registry", o.registry, "Firm registry file");
  cmd->add_option("--capacity", o.capacity, "Capacity table (current, BOF, planned)");
  cmd->add_option("--observations", o.observations, "Ready-made regression table");
  cmd->add_option("--format", o.formats, "Output formats: csv, json, dot (repeatable)");
}

void add_trade(CLI::App* cmd, Overrides& o) { cmd->add_option("--prefix", o.prefix, "HS code prefix"); }
void add_backbone(CLI::App* cmd, Overrides& o) { cmd->add_option("--alpha", o.alpha, "Disparity filter level"); }
void add_firms(CLI::App* cmd, Overrides& o) { cmd->add_option("--keyword", o.keyword, "Description keyword"); }
void add_topics(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--grid", o.grid, "Topic counts to compare");
  cmd->add_option("--lda-iterations", o.lda_iterations, "Gibbs sweeps per fit");
}
void add_regress(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--regressors", o.regressors, "exports imports firms employees revenue bof");
  cmd->add_option("--covariance", o.covariance, "classical or hc1");
}
void add_extrapolate(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--coefficient-source", o.coefficient_source, "config or regression");
  cmd->add_option("--beta", o.beta, "kt/yr of EAF capacity per firm");
  cmd->add_option("--beta-sd", o.beta_sd, "Standard deviation of the firm coefficient");
  cmd->add_option("--draws", o.draws, "Coefficient draws");
  cmd->add_option("--mc-iterations", o.mc_iterations, "Simulated populations per country");
}

PipelineConfig build_config(const Overrides& o) {
  PipelineConfig cfg = o.config.empty() ? PipelineConfig{} : scrapnet::load_config(o.config);
  if (o.out) cfg.output_dir = *o.out;
  if (o.seed) cfg.seed = *o.seed;
  if (o.trade) cfg.inputs.trade = *o.trade;
  if (o.registry) cfg.inputs.registry = *o.registry;
  if (o.capacity) cfg.inputs.capacity = *o.capacity;
  if (o.observations) cfg.inputs.observations = *o.observations;
  if (!o.formats.empty()) {
    cfg.output_formats.clear();
    for (const auto& f : o.formats) {
      try {
        cfg.output_formats.push_back(scrapnet::parse_format(f));
      } catch (const scrapnet::UnknownFormat& e) {
        throw scrapnet::ConfigError(e.what());
      }
    }
  }
  if (o.prefix) cfg.commodity_prefix = *o.prefix;
  if (o.alpha) cfg.backbone.alpha = *o.alpha;
  if (o.keyword) cfg.match.keyword = *o.keyword;
  if (!o.grid.empty()) cfg.topic_grid = o.grid;
  if (o.lda_iterations) cfg.lda_iterations = *o.lda_iterations;
  if (!o.regressors.empty()) {
    cfg.regressors.clear();
    for (const auto& name : o.regressors) {
      auto r = scrapnet::parse_regressor(name);
      if (!r) throw scrapnet::ConfigError("unknown regressor '" + name + "'");
      cfg.regressors.push_back(*r);
    }
  }
  if (o.covariance) {
    if (*o.covariance == "classical") {
      cfg.covariance = scrapnet::Covariance::Classical;
    } else if (*o.covariance == "hc1") {
      cfg.covariance = scrapnet::Covariance::HC1;
    } else {
      throw scrapnet::ConfigError("covariance must be 'classical' or 'hc1'");
    }
  }
  if (o.coefficient_source) cfg.coefficient_source = *o.coefficient_source;
  if (o.beta) cfg.beta_firms = *o.beta;
  if (o.beta_sd) cfg.beta_sd = *o.beta_sd;
  if (o.draws) cfg.coefficient_draws = *o.draws;
  if (o.mc_iterations) cfg.mc_iterations = *o.mc_iterations;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Scrap trade networks, firm ecosystem and EAF capacity extrapolation"};
  app.require_subcommand(1);
  Overrides o;
  std::vector<Stage> stages;

  auto sub = [&](const char* name, const char* help, std::vector<Stage> run_stages) {
    auto* cmd = app.add_subcommand(name, help);
    add_common(cmd, o);
    cmd->callback([&stages, run_stages] { stages = run_stages; });
    return cmd;
  };

  auto* ingest = sub("ingest", "Build windowed trade networks and country statistics", scrapnet::stages_for(Stage::Ingest));
  add_trade(ingest, o);
  auto* backbone = sub("backbone", "Extract disparity-filter backbones", scrapnet::stages_for(Stage::Backbone));
  add_trade(backbone, o);
  add_backbone(backbone, o);
  auto* firms = sub("firms", "Filter the registry and summarize the firm population", scrapnet::stages_for(Stage::Firms));
  add_firms(firms, o);
  auto* topics = sub("topics", "Fit topic models to firm descriptions", scrapnet::stages_for(Stage::Topics));
  add_firms(topics, o);
  add_topics(topics, o);
  auto* regress = sub("regress", "Fit the no-intercept EAF capacity regression", scrapnet::stages_for(Stage::Regress));
  add_trade(regress, o);
  add_firms(regress, o);
  add_regress(regress, o);
  auto* extrap = sub("extrapolate", "Extrapolate the firm ecosystem for planned capacity",
                     scrapnet::stages_for(Stage::Extrapolate));
  add_trade(extrap, o);
  add_firms(extrap, o);
  add_regress(extrap, o);
  add_extrapolate(extrap, o);
  auto* all = sub("run", "Run the full pipeline", scrapnet::all_stages());
  add_trade(all, o);
  add_backbone(all, o);
  add_firms(all, o);
  add_topics(all, o);
  add_regress(all, o);
  add_extrapolate(all, o);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    const PipelineConfig cfg = build_config(o);
    const auto report = scrapnet::run(cfg, stages);
    for (const auto& [stage, status] : report.stages) std::cerr << "  " << stage << ": " << status << "\n";
    if (!report.ok()) {
      std::cerr << "error: " << *report.error << "\n";
      return 1;
    }
    return 0;
  } catch (const scrapnet::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
