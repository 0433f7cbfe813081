#include "scrapnet/pipeline.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <nlohmann/json.hpp>
#include <openssl/evp.h>

#include "scrapnet/country_codes.hpp"
#include "scrapnet/csv.hpp"
#include "scrapnet/random.hpp"
#include "scrapnet/report.hpp"

namespace scrapnet {

namespace fs = std::filesystem;
using nlohmann::json;

// ---------------------------------------------------------------------------
// configuration

namespace {

void check_keys(const json& obj, std::string_view section, std::initializer_list<std::string_view> allowed) {
  if (!obj.is_object()) throw ConfigError("config section '" + std::string(section) + "' must be an object");
  for (const auto& [key, value] : obj.items()) {
    bool ok = false;
    for (auto a : allowed) ok = ok || key == a;
    if (!ok) throw ConfigError("unknown key '" + key + "' in config section '" + std::string(section) + "'");
  }
}

fs::path resolve(const fs::path& base, const std::string& p) {
  fs::path path(p);
  return path.is_absolute() ? path : base / path;
}

char delimiter_of(const json& v) {
  auto s = v.get<std::string>();
  if (s == "\\t" || s == "tab") return '\t';
  if (s.size() != 1) throw ConfigError("delimiter must be a single character");
  return s[0];
}

Coupling parse_coupling(const std::string& s) {
  if (s == "independent") return Coupling::Independent;
  if (s == "rank") return Coupling::Rank;
  throw ConfigError("coupling must be 'independent' or 'rank'");
}

Covariance parse_covariance(const std::string& s) {
  if (s == "classical") return Covariance::Classical;
  if (s == "hc1") return Covariance::HC1;
  throw ConfigError("covariance must be 'classical' or 'hc1'");
}

}  // namespace

PipelineConfig parse_config(const std::string& json_text, const fs::path& base_dir) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  PipelineConfig c;
  try {
    check_keys(root, "top level",
               {"inputs", "trade", "backbone", "firms", "topics", "regression", "extrapolation", "seed", "output_dir",
                "output_formats"});
    if (root.contains("seed")) c.seed = root["seed"].get<std::uint64_t>();
    if (root.contains("output_formats")) {
      c.output_formats.clear();
      for (const auto& f : root["output_formats"].get<std::vector<std::string>>()) {
        try {
          c.output_formats.push_back(parse_format(f));
        } catch (const UnknownFormat& e) {
          throw ConfigError(e.what());
        }
      }
    }
    if (root.contains("output_dir")) c.output_dir = resolve(base_dir, root["output_dir"].get<std::string>());

    if (root.contains("inputs")) {
      const auto& in = root["inputs"];
      check_keys(in, "inputs", {"trade", "registry", "capacity", "observations"});
      auto path_of = [&](const char* key, std::optional<fs::path>& slot) {
        if (in.contains(key) && !in[key].is_null()) slot = resolve(base_dir, in[key].get<std::string>());
      };
      path_of("trade", c.inputs.trade);
      path_of("registry", c.inputs.registry);
      path_of("capacity", c.inputs.capacity);
      path_of("observations", c.inputs.observations);
    }

    if (root.contains("trade")) {
      const auto& t = root["trade"];
      check_keys(t, "trade", {"commodity_prefix", "windows", "delimiter", "columns", "min_year", "max_year",
                              "series_countries"});
      if (t.contains("commodity_prefix")) c.commodity_prefix = t["commodity_prefix"].get<std::string>();
      if (t.contains("windows")) {
        c.windows.clear();
        for (const auto& w : t["windows"]) c.windows.emplace_back(w.at(0).get<int>(), w.at(1).get<int>());
      }
      if (t.contains("delimiter")) c.trade_schema.delimiter = delimiter_of(t["delimiter"]);
      if (t.contains("min_year")) c.trade_schema.min_year = t["min_year"].get<int>();
      if (t.contains("max_year")) c.trade_schema.max_year = t["max_year"].get<int>();
      if (t.contains("series_countries")) c.series_countries = t["series_countries"].get<std::vector<std::string>>();
      if (t.contains("columns")) {
        const auto& cols = t["columns"];
        check_keys(cols, "trade.columns", {"year", "exporter", "importer", "hs_code", "value", "quantity"});
        auto col = [&](const char* key, std::string& slot) {
          if (cols.contains(key)) slot = cols[key].get<std::string>();
        };
        col("year", c.trade_schema.year);
        col("exporter", c.trade_schema.exporter);
        col("importer", c.trade_schema.importer);
        col("hs_code", c.trade_schema.hs_code);
        col("value", c.trade_schema.value);
        col("quantity", c.trade_schema.quantity);
      }
    }

    if (root.contains("backbone")) {
      const auto& b = root["backbone"];
      check_keys(b, "backbone", {"alpha", "keep_degree_one", "global_threshold"});
      if (b.contains("alpha")) c.backbone.alpha = b["alpha"].get<double>();
      if (b.contains("keep_degree_one")) c.backbone.keep_degree_one = b["keep_degree_one"].get<bool>();
      if (b.contains("global_threshold")) c.global_threshold = b["global_threshold"].get<double>();
    }

    if (root.contains("firms")) {
      const auto& f = root["firms"];
      check_keys(f, "firms", {"keyword", "exclusions", "provenance", "delimiter"});
      if (f.contains("keyword")) c.match.keyword = f["keyword"].get<std::string>();
      if (f.contains("exclusions")) c.match.exclusions = f["exclusions"].get<std::vector<std::string>>();
      if (f.contains("provenance")) c.provenance = f["provenance"].get<std::string>();
      if (f.contains("delimiter")) c.registry_schema.delimiter = delimiter_of(f["delimiter"]);
    }

    if (root.contains("topics")) {
      const auto& t = root["topics"];
      check_keys(t, "topics", {"grid", "iterations", "holdout_fraction", "doc_topic_prior", "topic_word_prior",
                               "top_terms", "stopwords_file", "perplexity_estimator"});
      if (t.contains("grid")) c.topic_grid = t["grid"].get<std::vector<int>>();
      if (t.contains("iterations")) c.lda_iterations = t["iterations"].get<int>();
      if (t.contains("holdout_fraction")) c.holdout_fraction = t["holdout_fraction"].get<double>();
      if (t.contains("doc_topic_prior") && !t["doc_topic_prior"].is_null()) {
        c.priors.doc_topic = t["doc_topic_prior"].get<double>();
      }
      if (t.contains("topic_word_prior")) c.priors.topic_word = t["topic_word_prior"].get<double>();
      if (t.contains("perplexity_estimator")) {
        const auto e = t["perplexity_estimator"].get<std::string>();
        if (e == "completion") {
          c.perplexity_estimator = FoldIn::Completion;
        } else if (e == "whole") {
          c.perplexity_estimator = FoldIn::WholeDocument;
        } else {
          throw ConfigError("topics.perplexity_estimator must be \"completion\" or \"whole\"");
        }
      }
      if (t.contains("top_terms")) c.top_terms = t["top_terms"].get<std::size_t>();
      if (t.contains("stopwords_file") && !t["stopwords_file"].is_null()) {
        c.stopwords_file = resolve(base_dir, t["stopwords_file"].get<std::string>());
      }
    }

    if (root.contains("regression")) {
      const auto& r = root["regression"];
      check_keys(r, "regression", {"regressors", "covariance", "trade_window"});
      if (r.contains("regressors")) {
        c.regressors.clear();
        for (const auto& name : r["regressors"].get<std::vector<std::string>>()) {
          auto reg = parse_regressor(name);
          if (!reg) throw ConfigError("unknown regressor '" + name + "'");
          c.regressors.push_back(*reg);
        }
      }
      if (r.contains("covariance")) c.covariance = parse_covariance(r["covariance"].get<std::string>());
      if (r.contains("trade_window")) {
        c.regression_window = TimeWindow(r["trade_window"].at(0).get<int>(), r["trade_window"].at(1).get<int>());
      }
    }

    if (root.contains("extrapolation")) {
      const auto& e = root["extrapolation"];
      check_keys(e, "extrapolation", {"coefficient_source", "beta_firms", "beta_sd", "coefficient_draws",
                                      "iterations", "min_country_firms", "pool_countries", "coupling"});
      if (e.contains("coefficient_source")) c.coefficient_source = e["coefficient_source"].get<std::string>();
      if (e.contains("beta_firms")) c.beta_firms = e["beta_firms"].get<double>();
      if (e.contains("beta_sd")) c.beta_sd = e["beta_sd"].get<double>();
      if (e.contains("coefficient_draws")) c.coefficient_draws = e["coefficient_draws"].get<std::size_t>();
      if (e.contains("iterations")) c.mc_iterations = e["iterations"].get<std::size_t>();
      if (e.contains("min_country_firms")) c.min_country_firms = e["min_country_firms"].get<std::size_t>();
      if (e.contains("pool_countries")) {
        const auto& p = e["pool_countries"];
        if (p.is_string() && p.get<std::string>() == "all") {
          c.pool_countries.clear();
        } else if (p.is_string() && p.get<std::string>() == "europe") {
          c.pool_countries = FirmDistributions::european_pool();
        } else {
          auto list = p.get<std::vector<std::string>>();
          c.pool_countries = {list.begin(), list.end()};
        }
      }
      if (e.contains("coupling")) c.coupling = parse_coupling(e["coupling"].get<std::string>());
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad config value: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("bad config value: ") + e.what());
  }
  return c;
}

PipelineConfig load_config(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file '" + path.string() + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path.parent_path());
}

void validate(const PipelineConfig& c) {
  auto exists = [](const std::optional<fs::path>& p, const char* what) {
    if (p && !fs::is_regular_file(*p)) {
      throw ConfigError(std::string(what) + " input '" + p->string() + "' does not exist");
    }
  };
  exists(c.inputs.trade, "trade");
  exists(c.inputs.registry, "registry");
  exists(c.inputs.capacity, "capacity");
  exists(c.inputs.observations, "observations");
  exists(c.stopwords_file, "stopwords");
  try {
    c.backbone.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (c.commodity_prefix.empty()) throw ConfigError("commodity prefix must be non-empty");
  if (c.windows.empty()) throw ConfigError("at least one time window is required");
  if (std::none_of(c.output_formats.begin(), c.output_formats.end(), [](Format f) { return f != Format::Dot; })) {
    throw ConfigError("output_formats needs csv or json");
  }
  if (c.match.keyword.empty()) throw ConfigError("firm keyword must be non-empty");
  if (c.topic_grid.empty()) throw ConfigError("topic grid must be non-empty");
  for (int k : c.topic_grid) {
    if (k < 1) throw ConfigError("topic counts must be at least 1");
  }
  if (c.lda_iterations < 1) throw ConfigError("LDA iterations must be at least 1");
  if (!(c.holdout_fraction > 0.0 && c.holdout_fraction < 1.0)) throw ConfigError("holdout fraction must lie in (0, 1)");
  if (c.regressors.empty()) throw ConfigError("at least one regressor is required");
  if (c.coefficient_source != "config" && c.coefficient_source != "regression") {
    throw ConfigError("coefficient_source must be 'config' or 'regression'");
  }
  if (!(c.beta_firms > 0.0) || c.beta_sd < 0.0) throw ConfigError("beta_firms must be > 0 and beta_sd >= 0");
  if (c.coefficient_draws < 1 || c.mc_iterations < 1) throw ConfigError("Monte Carlo counts must be at least 1");
}

std::string_view stage_name(Stage s) {
  switch (s) {
    case Stage::Ingest:
      return "ingest";
    case Stage::Backbone:
      return "backbone";
    case Stage::Firms:
      return "firms";
    case Stage::Topics:
      return "topics";
    case Stage::Regress:
      return "regress";
    case Stage::Extrapolate:
      return "extrapolate";
  }
  return "";
}

std::vector<Stage> all_stages() {
  return {Stage::Ingest, Stage::Backbone, Stage::Firms, Stage::Topics, Stage::Regress, Stage::Extrapolate};
}

std::vector<Stage> stages_for(Stage target) {
  switch (target) {
    case Stage::Ingest:
      return {Stage::Ingest};
    case Stage::Backbone:
      return {Stage::Ingest, Stage::Backbone};
    case Stage::Firms:
      return {Stage::Firms};
    case Stage::Topics:
      return {Stage::Firms, Stage::Topics};
    case Stage::Regress:
      return {Stage::Ingest, Stage::Firms, Stage::Regress};
    case Stage::Extrapolate:
      return {Stage::Ingest, Stage::Firms, Stage::Regress, Stage::Extrapolate};
  }
  return {};
}

// ---------------------------------------------------------------------------
// hashing

std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr);
  std::ostringstream out;
  for (unsigned int i = 0; i < len; ++i) out << std::hex << std::setw(2) << std::setfill('0') << int(digest[i]);
  return out.str();
}

std::string sha256_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream buf;
  buf << in.rdbuf();
  return sha256_hex(buf.str());
}

// ---------------------------------------------------------------------------
// stages

namespace {

class Outputs {
 public:
  Outputs(fs::path root, std::vector<Format> formats) : root_(std::move(root)), formats_(std::move(formats)) {}

  void write(const std::string& rel, const std::string& content) {
    const fs::path path = root_ / rel;
    fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << content;
    if (!out) throw std::runtime_error("failed writing '" + path.string() + "'");
    artifacts_.push_back({rel, sha256_hex(content), content.size()});
  }

  // Tables go out in every configured tabular format.
  void table(const std::string& stem, const ReportTable& t) {
    for (auto f : formats_) {
      if (f != Format::Dot) write(stem + std::string(extension(f)), render(t, f));
    }
  }

  // Networks additionally go out as dot when configured.
  void network(const std::string& stem, const TradeNetwork& net,
               const std::map<CountryPair, EdgeSignificance>& significance = {}) {
    for (auto f : formats_) write(stem + std::string(extension(f)), render(net, f, significance));
  }

  const fs::path& root() const { return root_; }
  std::vector<ArtifactEntry>& artifacts() { return artifacts_; }

 private:
  fs::path root_;
  std::vector<Format> formats_;
  std::vector<ArtifactEntry> artifacts_;
};

struct Context {
  std::vector<TradeRecord> trade;
  std::vector<TradeNetwork> networks;
  FirmPopulation population;
  std::optional<RegressionFit> fit;
};

void log(std::string_view stage, const std::string& msg) { std::cerr << "[scrapnet] " << stage << ": " << msg << "\n"; }

json skip_report_json(const SkipReport& r) {
  json j;
  j["missing_quantity"] = r.missing_quantity;
  j["malformed"] = r.malformed;
  j["self_loops"] = r.self_loops;
  j["out_of_range"] = r.out_of_range;
  j["unknown_codes"] = r.unknown_codes;
  j["messages"] = r.messages;
  return j;
}

void run_ingest(const PipelineConfig& cfg, Context& ctx, Outputs& out) {
  auto parsed = parse_trade_file(cfg.inputs.trade->string(), cfg.trade_schema);
  log("ingest", std::to_string(parsed.records.size()) + " records parsed, " + std::to_string(parsed.skipped.total()) +
                    " rows skipped");
  for (const auto& code : parsed.skipped.unknown_codes) log("ingest", "warning: unknown country code '" + code + "'");
  ctx.trade = filter_commodity(parsed.records, cfg.commodity_prefix);
  log("ingest", std::to_string(ctx.trade.size()) + " records match HS prefix " + cfg.commodity_prefix);

  json summary;
  summary["commodity_prefix"] = cfg.commodity_prefix;
  summary["records_parsed"] = parsed.records.size();
  summary["records_matching"] = ctx.trade.size();
  summary["skipped"] = skip_report_json(parsed.skipped);
  json windows = json::array();
  for (const auto& w : cfg.windows) {
    TradeNetwork net = build_network(ctx.trade, w);
    const auto stats = country_totals(net);
    const std::string label = w.label();
    out.network("trade/network_" + label, net);
    out.table("trade/countries_" + label, country_stats_table(stats));
    double imports = 0.0, exports = 0.0;
    for (const auto& s : stats) {
      imports += s.imports;
      exports += s.exports;
    }
    windows.push_back({{"window", label},
                       {"edges", net.edges.size()},
                       {"nodes", net.nodes().size()},
                       {"total_imports_t_per_year", imports},
                       {"total_exports_t_per_year", exports}});
    ctx.networks.push_back(std::move(net));
  }
  summary["windows"] = windows;

  std::map<std::string, std::vector<YearFlows>> series;
  for (const auto& c : cfg.series_countries) {
    auto code = to_alpha3(c).value_or(c);
    series[code] = country_time_series(ctx.trade, code, cfg.trade_schema.min_year, cfg.trade_schema.max_year);
  }
  out.table("trade/time_series", time_series_table(series));
  out.write("trade/summary.json", summary.dump(2) + "\n");
}

void run_backbone(const PipelineConfig& cfg, Context& ctx, Outputs& out) {
  for (const auto& net : ctx.networks) {
    const auto sig = edge_significance(net);
    TradeNetwork bb = extract_backbone(net, cfg.backbone);
    const std::string label = net.window.label();
    log("backbone", label + ": kept " + std::to_string(bb.edges.size()) + " of " + std::to_string(net.edges.size()) +
                        " edges");
    std::map<CountryPair, EdgeSignificance> kept;
    for (const auto& [pair, w] : bb.edges) kept.emplace(pair, sig.at(pair));
    out.network("backbone/backbone_" + label, bb, kept);
    if (cfg.global_threshold > 0.0) {
      out.network("backbone/threshold_" + label, global_threshold(net, cfg.global_threshold));
    }
  }
}

void run_firms(const PipelineConfig& cfg, Context& ctx, Outputs& out) {
  auto parsed = parse_registry_file(cfg.inputs.registry->string(), cfg.registry_schema);
  ctx.population = match_scrap_firms(parsed.firms, cfg.match, cfg.provenance);
  log("firms", std::to_string(ctx.population.firms.size()) + " of " + std::to_string(parsed.firms.size()) +
                   " registry firms match '" + cfg.match.keyword + "'");
  const auto aggregates = country_aggregates(ctx.population);
  const auto shares = naics_distribution(ctx.population);
  out.table("firms/population", population_table(ctx.population));
  out.table("firms/country_aggregates", firm_aggregate_table(aggregates));
  out.table("firms/naics_shares", naics_table(shares));

  json summary;
  summary["provenance"] = ctx.population.provenance;
  summary["registry_firms"] = parsed.firms.size();
  summary["registry_rows_skipped"] = parsed.skipped;
  summary["matched_firms"] = ctx.population.firms.size();
  double employees = 0.0, revenue = 0.0;
  for (const auto& a : aggregates) {
    employees += a.employees;
    revenue += a.revenue;
  }
  summary["total_employees_persons"] = employees;
  summary["total_revenue_usd"] = revenue;
  try {
    auto r = pearson(revenue_column(ctx.population), employee_column(ctx.population));
    summary["revenue_employee_correlation"] = {{"r", r.r}, {"p_value", r.p_value}, {"n", r.n}};
  } catch (const std::exception& e) {
    summary["revenue_employee_correlation"] = {{"error", e.what()}};
  }
  out.write("firms/summary.json", summary.dump(2) + "\n");
}

StopwordSet load_stopwords(const PipelineConfig& cfg) {
  StopwordSet words = default_stopwords();
  if (cfg.stopwords_file) {
    std::ifstream in(*cfg.stopwords_file);
    std::string line;
    while (std::getline(in, line)) {
      auto w = std::string(trim(line));
      std::transform(w.begin(), w.end(), w.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
      if (!w.empty() && w.front() != '#') words.insert(w);
    }
  }
  return words;
}

void run_topics(const PipelineConfig& cfg, Context& ctx, Outputs& out) {
  const StopwordSet stopwords = load_stopwords(cfg);
  std::vector<std::vector<std::string>> docs;
  for (const auto& f : ctx.population.firms) docs.push_back(preprocess(f.combined_description(), stopwords));
  Corpus corpus = build_corpus(docs);
  log("topics", std::to_string(corpus.documents.size()) + " documents, " + std::to_string(corpus.vocabulary.size()) +
                    " terms, " + std::to_string(corpus.dropped_empty) + " empty documents dropped");
  if (corpus.documents.size() < 2) throw std::runtime_error("too few non-empty documents for topic modelling");

  const std::uint64_t seed = derive_seed(cfg.seed, {fnv1a("topics")});
  SelectionOptions sel{cfg.holdout_fraction, cfg.lda_iterations, seed, cfg.priors, cfg.perplexity_estimator, true};
  TopicSelection selection = select_topic_count(corpus, cfg.topic_grid, sel);
  log("topics", "selected K = " + std::to_string(selection.topics));

  LdaOptions final_opts{selection.topics, cfg.lda_iterations,
                        derive_seed(seed, {fnv1a("final"), static_cast<std::uint64_t>(selection.topics)}), cfg.priors};
  LdaModel model = fit_lda(corpus, final_opts);

  std::vector<std::string> ids;
  for (auto i : corpus.source_index) ids.push_back(ctx.population.firms[i].id);
  out.table("topics/perplexity", perplexity_table(selection));
  out.table("topics/topic_word", topic_word_table(model));
  out.table("topics/doc_topic", doc_topic_table(model, ids));
  out.table("topics/top_terms", top_terms_table(model, cfg.top_terms));
  out.table("topics/contributions", topic_contribution_table(model));

  json summary;
  summary["documents"] = corpus.documents.size();
  summary["dropped_empty"] = corpus.dropped_empty;
  summary["vocabulary"] = corpus.vocabulary.size();
  summary["selected_topics"] = selection.topics;
  summary["holdout_documents"] = selection.holdout.size();
  summary["doc_topic_prior"] = model.doc_topic_prior;
  summary["topic_word_prior"] = model.topic_word_prior;
  out.write("topics/summary.json", summary.dump(2) + "\n");
}

// Joins current capacity with window-average trade and firm aggregates.
std::vector<CountryObservation> joined_observations(const PipelineConfig& cfg, const Context& ctx) {
  const Table cap = read_table_file(cfg.inputs.capacity->string());
  const std::size_t c_country = cap.require("country");
  const std::size_t c_eaf = cap.require("eaf_capacity_kt");
  const auto c_bof = cap.find("bof_capacity_kt");

  const TradeNetwork net = build_network(ctx.trade, cfg.regression_window);
  std::map<std::string, CountryTradeStats> trade;
  for (auto& s : country_totals(net)) trade.emplace(s.country, s);
  std::map<std::string, CountryFirmAggregate> firms;
  for (auto& a : country_aggregates(ctx.population)) firms.emplace(a.country, a);

  std::vector<CountryObservation> out;
  for (std::size_t i = 0; i < cap.rows.size(); ++i) {
    const auto& row = cap.rows[i];
    if (row.size() != cap.header.size()) throw SchemaError("capacity line " + std::to_string(i + 2) + ": wrong field count");
    auto eaf = parse_number(row[c_eaf]);
    if (!eaf) continue;
    if (*eaf < 0) throw SchemaError("capacity line " + std::to_string(i + 2) + ": negative eaf_capacity_kt");
    CountryObservation o;
    auto code = std::string(trim(row[c_country]));
    o.country = to_alpha3(code).value_or(code);
    o.eaf_capacity = *eaf;
    auto t = trade.find(o.country);
    o.exports = t == trade.end() ? 0.0 : t->second.exports;
    o.imports = t == trade.end() ? 0.0 : t->second.imports;
    auto f = firms.find(o.country);
    o.n_firms = f == firms.end() ? 0.0 : static_cast<double>(f->second.firms);
    o.employees = f == firms.end() ? 0.0 : f->second.employees;
    o.revenue = f == firms.end() ? 0.0 : f->second.revenue;
    if (c_bof) o.bof_capacity = parse_number(row[*c_bof]).value_or(0.0);
    out.push_back(std::move(o));
  }
  return out;
}

void run_regress(const PipelineConfig& cfg, Context& ctx, Outputs& out) {
  const auto observations =
      cfg.inputs.observations ? parse_observations_file(cfg.inputs.observations->string()) : joined_observations(cfg, ctx);
  ctx.fit = fit_no_intercept(observations, cfg.regressors, cfg.covariance);
  log("regress", std::to_string(observations.size()) + " countries, adjusted R^2 = " + format_number(ctx.fit->adjusted_r2));
  out.table("regression/observations", observation_table(observations));
  out.table("regression/coefficients", coefficient_table(*ctx.fit));
  out.table("regression/predictions", prediction_table(*ctx.fit));
  json diag;
  diag["n_observations"] = ctx.fit->n_observations;
  diag["n_regressors"] = ctx.fit->n_regressors;
  diag["r2_uncentered"] = ctx.fit->r2;
  diag["adjusted_r2"] = ctx.fit->adjusted_r2;
  diag["sigma2"] = ctx.fit->sigma2;
  diag["covariance"] = ctx.fit->covariance == Covariance::HC1 ? "hc1" : "classical";
  diag["exact_fit"] = ctx.fit->exact;
  out.write("regression/diagnostics.json", diag.dump(2) + "\n");
}

void run_extrapolate(const PipelineConfig& cfg, Context& ctx, Outputs& out) {
  const auto plans = parse_capacity_plans_file(cfg.inputs.capacity->string());
  ExtrapolationConfig ec;
  ec.beta_firms = cfg.beta_firms;
  ec.beta_sd = cfg.beta_sd;
  std::string source = "config";
  if (cfg.coefficient_source == "regression" && ctx.fit) {
    const auto label = display_label(Regressor::Firms);
    for (const auto& c : ctx.fit->coefficients) {
      if (c.name == label) {
        ec.beta_firms = c.estimate;
        ec.beta_sd = c.std_error;
        source = "regression";
      }
    }
    if (source != "regression") throw std::runtime_error("regression has no firm-count coefficient");
    if (!(ec.beta_firms > 0.0)) throw std::runtime_error("fitted firm coefficient is not positive");
  }
  ec.coefficient_draws = cfg.coefficient_draws;
  ec.iterations = cfg.mc_iterations;
  ec.seed = derive_seed(cfg.seed, {fnv1a("extrapolate")});
  ec.coupling = cfg.coupling;

  FirmDistributions dists(ctx.population, cfg.min_country_firms, cfg.pool_countries);
  const auto results = extrapolate(plans, dists, ec);
  const auto totals = aggregate_totals(results, ec.beta_firms);
  log("extrapolate", std::to_string(results.size()) + " countries, " + format_number(totals.companies.rounded) +
                         " additional companies (SD " + format_number(totals.companies.sd) + ")");
  out.table("extrapolation/company_counts", extrapolation_table(results, totals));
  json summary;
  summary["coefficient_source"] = source;
  summary["beta_firms_kt_per_firm"] = ec.beta_firms;
  summary["beta_sd"] = ec.beta_sd;
  summary["coefficient_draws"] = ec.coefficient_draws;
  summary["iterations"] = ec.iterations;
  summary["total_planned_eaf_kt"] = totals.planned_eaf;
  summary["total_companies_point"] = totals.companies.point;
  summary["total_companies_sd"] = totals.companies.sd;
  out.write("extrapolation/summary.json", summary.dump(2) + "\n");
}

// Deletes the files a previous run listed in its manifest, so that the new
// manifest again describes everything in the output directory. Paths that
// would leave the directory are ignored.
void remove_previous_outputs(const fs::path& root) {
  const fs::path manifest = root / "manifest.json";
  std::ifstream in(manifest, std::ios::binary);
  if (!in) return;
  const json old = json::parse(in, nullptr, false);
  if (old.is_discarded() || !old.contains("artifacts") || !old["artifacts"].is_array()) return;
  for (const auto& a : old["artifacts"]) {
    if (!a.contains("path") || !a["path"].is_string()) continue;
    const fs::path rel = fs::path(a["path"].get<std::string>()).lexically_normal();
    if (rel.empty() || rel.is_absolute() || *rel.begin() == "..") continue;
    std::error_code ec;
    fs::remove(root / rel, ec);
  }
  std::error_code ec;
  fs::remove(manifest, ec);
}

bool has_inputs(const PipelineConfig& cfg, Stage s) {
  switch (s) {
    case Stage::Ingest:
      return cfg.inputs.trade.has_value();
    case Stage::Firms:
      return cfg.inputs.registry.has_value();
    case Stage::Regress:
      return cfg.inputs.observations.has_value() || cfg.inputs.capacity.has_value();
    case Stage::Extrapolate:
      return cfg.inputs.capacity.has_value();
    default:
      return true;
  }
}

// Upstream stages whose success is required.
std::vector<Stage> requires_ok(const PipelineConfig& cfg, Stage s) {
  switch (s) {
    case Stage::Backbone:
      return {Stage::Ingest};
    case Stage::Topics:
      return {Stage::Firms};
    case Stage::Regress:
      if (cfg.inputs.observations) return {};
      return {Stage::Ingest, Stage::Firms};
    case Stage::Extrapolate:
      if (cfg.coefficient_source == "regression") return {Stage::Firms, Stage::Regress};
      return {Stage::Firms};
    default:
      return {};
  }
}

}  // namespace

RunReport run(const PipelineConfig& config, const std::vector<Stage>& requested) {
  validate(config);
  remove_previous_outputs(config.output_dir);
  RunReport report;
  Outputs out(config.output_dir, config.output_formats);
  Context ctx;
  std::map<Stage, std::string> status;

  std::vector<Stage> order;
  for (auto s : all_stages()) {
    if (std::find(requested.begin(), requested.end(), s) != requested.end()) order.push_back(s);
  }

  bool failed = false;
  for (auto s : order) {
    const auto name = stage_name(s);
    if (failed) {
      status[s] = "skipped";
    } else if (!has_inputs(config, s)) {
      status[s] = "not run";
    } else {
      bool deps_ok = true;
      for (auto d : requires_ok(config, s)) deps_ok = deps_ok && status.count(d) && status[d] == "ok";
      if (!deps_ok) {
        status[s] = "not run";
      } else {
        const auto t0 = std::chrono::steady_clock::now();
        try {
          switch (s) {
            case Stage::Ingest:
              run_ingest(config, ctx, out);
              break;
            case Stage::Backbone:
              run_backbone(config, ctx, out);
              break;
            case Stage::Firms:
              run_firms(config, ctx, out);
              break;
            case Stage::Topics:
              run_topics(config, ctx, out);
              break;
            case Stage::Regress:
              run_regress(config, ctx, out);
              break;
            case Stage::Extrapolate:
              run_extrapolate(config, ctx, out);
              break;
          }
          status[s] = "ok";
        } catch (const std::exception& e) {
          status[s] = "failed";
          failed = true;
          report.error = std::string(name) + ": " + e.what();
          log(name, std::string("FAILED: ") + e.what());
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::ostringstream msg;
        msg << std::fixed << std::setprecision(2) << status[s] << " in " << secs << " s";
        log(name, msg.str());
      }
    }
    if (status[s] == "not run") log(name, "not run");
    report.stages.emplace_back(std::string(name), status[s]);
  }

  std::sort(out.artifacts().begin(), out.artifacts().end(),
            [](const ArtifactEntry& a, const ArtifactEntry& b) { return a.path < b.path; });
  report.artifacts = out.artifacts();

  json manifest;
  manifest["seed"] = config.seed;
  json stages = json::array();
  for (const auto& [name, st] : report.stages) stages.push_back({{"stage", name}, {"status", st}});
  manifest["stages"] = stages;
  json artifacts = json::array();
  for (const auto& a : report.artifacts) artifacts.push_back({{"path", a.path}, {"sha256", a.sha256}, {"bytes", a.bytes}});
  manifest["artifacts"] = artifacts;
  if (report.error) manifest["error"] = *report.error;
  fs::create_directories(config.output_dir);
  std::ofstream mf(config.output_dir / "manifest.json", std::ios::binary | std::ios::trunc);
  mf << manifest.dump(2) << "\n";
  return report;
}

}  // namespace scrapnet
