#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <Eigen/Dense>

namespace scrapnet {

using StopwordSet = std::unordered_set<std::string>;

/// Bundled English stopwords plus filler words common in company
/// descriptions ("company", "products", "services", ...).
const StopwordSet& default_stopwords();

/// Rule-based suffix folding: plurals to singular and "-ed" verb forms to
/// their stem. Gerunds ("recycling", "trading") are left alone because in
/// business descriptions they are nouns.
std::string lemmatize(std::string_view token);

/// Lowercase letter tokens, lemmatized, with tokens of length <= 3 and
/// stopwords (before or after lemmatization) removed.
std::vector<std::string> preprocess(std::string_view text, const StopwordSet& stopwords = default_stopwords());

class Vocabulary {
 public:
  /// Id for `word`, adding it if new.
  int add(const std::string& word);
  std::optional<int> find(std::string_view word) const;
  const std::string& word(int id) const { return words_[static_cast<std::size_t>(id)]; }
  std::size_t count(int id) const { return counts_[static_cast<std::size_t>(id)]; }
  std::size_t size() const { return words_.size(); }
  const std::vector<std::string>& words() const { return words_; }

 private:
  std::vector<std::string> words_;
  std::vector<std::size_t> counts_;
  std::unordered_map<std::string, int> index_;
};

using Document = std::vector<int>;

struct Corpus {
  std::vector<Document> documents;
  Vocabulary vocabulary;
  /// For each kept document, its position in the input sequence.
  std::vector<std::size_t> source_index;
  /// Inputs that were empty after preprocessing.
  std::size_t dropped_empty = 0;

  std::size_t token_count() const;
};

/// Builds a corpus from already preprocessed token sequences; ids are
/// assigned in order of first appearance.
Corpus build_corpus(std::span<const std::vector<std::string>> tokenized);

struct LdaPriors {
  /// Symmetric document-topic prior; 50 / K when unset.
  std::optional<double> doc_topic;
  /// Symmetric topic-word prior.
  double topic_word = 0.1;

  double doc_topic_for(int topics) const { return doc_topic.value_or(50.0 / topics); }
};

struct LdaOptions {
  int topics = 3;
  int iterations = 500;
  std::uint64_t seed = 0;
  LdaPriors priors;
};

struct LdaModel {
  int topics = 0;
  std::vector<std::string> vocabulary;
  /// K x V, rows sum to 1.
  Eigen::MatrixXd topic_word;
  /// D x K, rows sum to 1.
  Eigen::MatrixXd doc_topic;
  double doc_topic_prior = 0.0;
  double topic_word_prior = 0.0;
  std::uint64_t seed = 0;
  /// Final topic of every token, per training document.
  std::vector<std::vector<int>> assignments;

  std::size_t vocabulary_size() const { return vocabulary.size(); }
};

/// Collapsed Gibbs sampling with symmetric priors. Deterministic for a fixed
/// seed. Throws std::invalid_argument for K < 1, an empty corpus, or K larger
/// than the number of tokens.
LdaModel fit_lda(const Corpus& corpus, const LdaOptions& options);

struct Perplexity {
  double value = 0.0;
  std::size_t tokens = 0;
  /// Tokens whose id or word is outside the model vocabulary.
  std::size_t out_of_vocabulary = 0;
};

enum class FoldIn {
  /// Mixture estimated from even token positions, odd positions scored.
  /// Scoring tokens that also fitted the mixture rewards large K.
  Completion,
  /// Mixture estimated from and scored on every token.
  WholeDocument,
};

struct PerplexityOptions {
  FoldIn estimator = FoldIn::Completion;
  /// EM sweeps for each document mixture.
  int iterations = 50;
};

/// exp(-log-likelihood / tokens) over the scored held-out tokens. Document
/// mixtures come from fold-in against the frozen topic_word matrix (EM on
/// the mixture weights, the model's document prior as pseudo-counts).
/// Throws std::invalid_argument if no scorable in-vocabulary token remains.
Perplexity held_out_perplexity(const LdaModel& model, std::span<const Document> documents,
                               const PerplexityOptions& options = {});
Perplexity held_out_perplexity(const LdaModel& model, std::span<const std::vector<std::string>> documents,
                               const PerplexityOptions& options = {});

struct TopicSelection {
  int topics = 0;
  /// (K, held-out perplexity) for every K in the grid, grid order.
  std::vector<std::pair<int, double>> curve;
  std::vector<std::size_t> holdout;
};

struct SelectionOptions {
  double holdout_fraction = 0.1;
  int iterations = 500;
  std::uint64_t seed = 0;
  LdaPriors priors;
  FoldIn estimator = FoldIn::Completion;
  /// Fits grid entries on separate threads when true.
  bool parallel = true;
};

/// Holds out a seeded uniform sample of documents, fits every K in the grid
/// on the rest (seed derived from the master seed and K), and returns the K
/// with the lowest held-out perplexity (the smaller K wins ties).
TopicSelection select_topic_count(const Corpus& corpus, std::span<const int> grid, const SelectionOptions& options);

struct TermWeight {
  std::string term;
  double weight = 0.0;
};

/// The n most probable terms of a topic, ties broken lexicographically.
/// Throws std::out_of_range for a bad topic index.
std::vector<TermWeight> top_terms(const LdaModel& model, int topic, std::size_t n);

/// Mean document-topic weight of every topic across training documents.
std::vector<double> topic_contributions(const LdaModel& model);

}  // namespace scrapnet
