#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "scrapnet/backbone.hpp"
#include "scrapnet/extrapolate.hpp"
#include "scrapnet/firms.hpp"
#include "scrapnet/regression.hpp"
#include "scrapnet/report.hpp"
#include "scrapnet/topics.hpp"
#include "scrapnet/trade.hpp"

namespace scrapnet {

/// Invalid configuration: unreadable or malformed config file, bad values,
/// or input paths that do not exist.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct PipelineConfig {
  struct Inputs {
    std::optional<std::filesystem::path> trade;
    std::optional<std::filesystem::path> registry;
    /// country, eaf_capacity_kt, bof_capacity_kt, planned_eaf_kt
    std::optional<std::filesystem::path> capacity;
    /// Ready-made regression table; replaces the joined one when given.
    std::optional<std::filesystem::path> observations;
  } inputs;

  TradeSchema trade_schema;
  std::string commodity_prefix = "7204";
  std::vector<TimeWindow> windows = TimeWindow::defaults();
  std::vector<std::string> series_countries = {"USA", "TUR", "CHN", "DEU", "FRA", "NLD", "GBR", "ITA", "ESP"};

  BackboneParams backbone;
  double global_threshold = 0.0;  // > 0 also writes a global-threshold baseline

  RegistrySchema registry_schema;
  MatchRule match;
  std::string provenance = "registry snapshot";

  std::vector<int> topic_grid = {1, 2, 3, 4, 5, 6, 7, 8};
  int lda_iterations = 500;
  double holdout_fraction = 0.1;
  LdaPriors priors;
  FoldIn perplexity_estimator = FoldIn::Completion;
  std::size_t top_terms = 20;
  std::optional<std::filesystem::path> stopwords_file;

  std::vector<Regressor> regressors = all_regressors();
  Covariance covariance = Covariance::Classical;
  TimeWindow regression_window{2017, 2021};

  /// "regression" uses the fitted firm coefficient when the regression ran;
  /// "config" always uses beta_firms / beta_sd below.
  std::string coefficient_source = "config";
  double beta_firms = 79.0;
  double beta_sd = 11.0;
  std::size_t coefficient_draws = 10000;
  std::size_t mc_iterations = 1000;
  std::size_t min_country_firms = 30;
  /// Countries pooled for CDFs; empty means every firm.
  std::set<std::string> pool_countries = FirmDistributions::european_pool();
  Coupling coupling = Coupling::Independent;

  std::uint64_t seed = 20230101;
  std::filesystem::path output_dir = "out";
  /// Tables are written in every tabular format listed; networks also as
  /// dot when it is listed.
  std::vector<Format> output_formats = {Format::Csv, Format::Json, Format::Dot};
};

/// Parses a JSON config. Relative paths resolve against `base_dir`.
/// Throws ConfigError.
PipelineConfig parse_config(const std::string& json_text, const std::filesystem::path& base_dir);
PipelineConfig load_config(const std::filesystem::path& path);

enum class Stage { Ingest, Backbone, Firms, Topics, Regress, Extrapolate };
std::string_view stage_name(Stage s);
std::vector<Stage> all_stages();
/// `target` plus every stage it depends on, in execution order.
std::vector<Stage> stages_for(Stage target);

/// Throws ConfigError if a referenced input path does not exist or a value
/// is out of range.
void validate(const PipelineConfig& config);

struct ArtifactEntry {
  std::string path;  // relative to the output directory
  std::string sha256;
  std::uintmax_t bytes = 0;
};

struct RunReport {
  /// "ok", "not run", "failed", "skipped" per requested stage.
  std::vector<std::pair<std::string, std::string>> stages;
  std::vector<ArtifactEntry> artifacts;
  std::optional<std::string> error;

  bool ok() const { return !error.has_value(); }
};

/// Runs the requested stages in dependency order, writing every output and
/// then manifest.json into config.output_dir. A stage whose inputs are not
/// configured is marked "not run"; a throwing stage is "failed" and every
/// later stage "skipped". Files listed by a manifest already in the output
/// directory are deleted first. Progress and timings go to std::cerr.
/// Throws ConfigError from validation before anything is written.
RunReport run(const PipelineConfig& config, const std::vector<Stage>& stages);

std::string sha256_hex(const std::string& bytes);
std::string sha256_file(const std::filesystem::path& path);

}  // namespace scrapnet
