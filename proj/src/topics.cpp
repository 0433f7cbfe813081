#include "scrapnet/topics.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <numeric>
#include <stdexcept>

#include "scrapnet/firms.hpp"
#include "scrapnet/random.hpp"

namespace scrapnet {

namespace {

bool is_vowel_at(const std::string& w, std::size_t i) {
  switch (w[i]) {
    case 'a':
    case 'e':
    case 'i':
    case 'o':
    case 'u':
      return true;
    case 'y':
      return i > 0 && !is_vowel_at(w, i - 1);
    default:
      return false;
  }
}

// Number of vowel-consonant sequences.
int measure(const std::string& w) {
  int m = 0;
  bool prev_vowel = false;
  for (std::size_t i = 0; i < w.size(); ++i) {
    bool v = is_vowel_at(w, i);
    if (prev_vowel && !v) ++m;
    prev_vowel = v;
  }
  return m;
}

bool has_vowel(const std::string& w) {
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (is_vowel_at(w, i)) return true;
  }
  return false;
}

bool ends_cvc(const std::string& w) {
  const std::size_t n = w.size();
  if (n < 3) return false;
  char last = w[n - 1];
  return !is_vowel_at(w, n - 3) && is_vowel_at(w, n - 2) && !is_vowel_at(w, n - 1) && last != 'w' &&
         last != 'x' && last != 'y';
}

bool ends_with(const std::string& w, std::string_view suffix) { return std::string_view(w).ends_with(suffix); }

}  // namespace

std::string lemmatize(std::string_view token) {
  std::string w(token);
  if (w.size() > 4 && ends_with(w, "ies")) {
    w.replace(w.size() - 3, 3, "y");
  } else if (ends_with(w, "sses")) {
    w.resize(w.size() - 2);
  } else if (ends_with(w, "xes") || ends_with(w, "ches") || ends_with(w, "shes")) {
    w.resize(w.size() - 2);
  } else if (w.size() > 3 && ends_with(w, "s") && !ends_with(w, "ss") && !ends_with(w, "us") && !ends_with(w, "is")) {
    w.pop_back();
  }

  if (w.size() > 4 && ends_with(w, "ied")) {
    w.replace(w.size() - 3, 3, "y");
  } else if (ends_with(w, "ed") && !ends_with(w, "eed") && w.size() >= 5) {
    std::string stem = w.substr(0, w.size() - 2);
    if (has_vowel(stem)) {
      w = std::move(stem);
      const std::size_t n = w.size();
      if (ends_with(w, "at") || ends_with(w, "bl") || ends_with(w, "iz")) {
        w.push_back('e');
      } else if (n >= 2 && w[n - 1] == w[n - 2] && !is_vowel_at(w, n - 1) && w[n - 1] != 'l' && w[n - 1] != 's' &&
                 w[n - 1] != 'z') {
        w.pop_back();
      } else if (measure(w) == 1 && ends_cvc(w)) {
        w.push_back('e');
      }
    }
  }
  return w;
}

std::vector<std::string> preprocess(std::string_view text, const StopwordSet& stopwords) {
  std::vector<std::string> out;
  for (auto& raw : letter_tokens(text)) {
    if (stopwords.contains(raw)) continue;
    std::string lemma = lemmatize(raw);
    if (lemma.size() <= 3 || stopwords.contains(lemma)) continue;
    out.push_back(std::move(lemma));
  }
  return out;
}

int Vocabulary::add(const std::string& word) {
  auto [it, inserted] = index_.try_emplace(word, static_cast<int>(words_.size()));
  if (inserted) {
    words_.push_back(word);
    counts_.push_back(0);
  }
  ++counts_[static_cast<std::size_t>(it->second)];
  return it->second;
}

std::optional<int> Vocabulary::find(std::string_view word) const {
  auto it = index_.find(std::string(word));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::size_t Corpus::token_count() const {
  std::size_t n = 0;
  for (const auto& d : documents) n += d.size();
  return n;
}

Corpus build_corpus(std::span<const std::vector<std::string>> tokenized) {
  Corpus corpus;
  for (std::size_t i = 0; i < tokenized.size(); ++i) {
    if (tokenized[i].empty()) {
      ++corpus.dropped_empty;
      continue;
    }
    Document doc;
    doc.reserve(tokenized[i].size());
    for (const auto& tok : tokenized[i]) doc.push_back(corpus.vocabulary.add(tok));
    corpus.documents.push_back(std::move(doc));
    corpus.source_index.push_back(i);
  }
  return corpus;
}

LdaModel fit_lda(const Corpus& corpus, const LdaOptions& options) {
  const int K = options.topics;
  if (K < 1) throw std::invalid_argument("topic count must be at least 1");
  if (corpus.documents.empty()) throw std::invalid_argument("cannot fit a topic model to an empty corpus");
  if (static_cast<std::size_t>(K) > corpus.token_count()) {
    throw std::invalid_argument("topic count exceeds the number of tokens in the corpus");
  }
  const std::size_t V = corpus.vocabulary.size();
  const std::size_t D = corpus.documents.size();
  const std::size_t k_count = static_cast<std::size_t>(K);
  const double alpha = options.priors.doc_topic_for(K);
  const double beta = options.priors.topic_word;
  if (!(alpha > 0.0) || !(beta > 0.0)) throw std::invalid_argument("LDA priors must be positive");
  const double v_beta = static_cast<double>(V) * beta;

  std::vector<int> word_topic(V * k_count, 0);  // [w * K + k]
  std::vector<int> topic_total(k_count, 0);
  std::vector<int> doc_topic(D * k_count, 0);  // [d * K + k]
  std::vector<std::vector<int>> z(D);

  Rng rng(options.seed);
  for (std::size_t d = 0; d < D; ++d) {
    const auto& doc = corpus.documents[d];
    z[d].resize(doc.size());
    for (std::size_t i = 0; i < doc.size(); ++i) {
      const auto k = static_cast<std::size_t>(rng.below(k_count));
      const auto w = static_cast<std::size_t>(doc[i]);
      z[d][i] = static_cast<int>(k);
      ++word_topic[w * k_count + k];
      ++topic_total[k];
      ++doc_topic[d * k_count + k];
    }
  }

  std::vector<double> cumulative(k_count);
  for (int it = 0; it < options.iterations; ++it) {
    for (std::size_t d = 0; d < D; ++d) {
      const auto& doc = corpus.documents[d];
      int* nd = &doc_topic[d * k_count];
      for (std::size_t i = 0; i < doc.size(); ++i) {
        const auto w = static_cast<std::size_t>(doc[i]);
        int* nw = &word_topic[w * k_count];
        auto k = static_cast<std::size_t>(z[d][i]);
        --nw[k];
        --topic_total[k];
        --nd[k];

        double total = 0.0;
        for (std::size_t t = 0; t < k_count; ++t) {
          total += (nd[t] + alpha) * (nw[t] + beta) / (topic_total[t] + v_beta);
          cumulative[t] = total;
        }
        const double u = rng.uniform() * total;
        k = static_cast<std::size_t>(std::upper_bound(cumulative.begin(), cumulative.end(), u) - cumulative.begin());
        if (k >= k_count) k = k_count - 1;

        z[d][i] = static_cast<int>(k);
        ++nw[k];
        ++topic_total[k];
        ++nd[k];
      }
    }
  }

  LdaModel model;
  model.topics = K;
  model.vocabulary = corpus.vocabulary.words();
  model.doc_topic_prior = alpha;
  model.topic_word_prior = beta;
  model.seed = options.seed;
  model.topic_word.resize(K, static_cast<Eigen::Index>(V));
  for (std::size_t k = 0; k < k_count; ++k) {
    for (std::size_t w = 0; w < V; ++w) {
      model.topic_word(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(w)) =
          (word_topic[w * k_count + k] + beta) / (topic_total[k] + v_beta);
    }
  }
  model.doc_topic.resize(static_cast<Eigen::Index>(D), K);
  for (std::size_t d = 0; d < D; ++d) {
    const double denom = static_cast<double>(corpus.documents[d].size()) + K * alpha;
    for (std::size_t k = 0; k < k_count; ++k) {
      model.doc_topic(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(k)) =
          (doc_topic[d * k_count + k] + alpha) / denom;
    }
  }
  model.assignments = std::move(z);
  return model;
}

namespace {

// EM estimate of a document mixture from `words` with topic_word frozen.
// The prior enters as pseudo-counts.
Eigen::VectorXd fold_in(const LdaModel& model, const std::vector<Eigen::Index>& words, int iterations) {
  const Eigen::Index K = model.topics;
  Eigen::VectorXd theta = Eigen::VectorXd::Constant(K, 1.0 / static_cast<double>(K));
  Eigen::VectorXd acc(K);
  for (int it = 0; it < iterations && !words.empty(); ++it) {
    acc.setConstant(model.doc_topic_prior);
    for (auto w : words) {
      Eigen::VectorXd r = theta.cwiseProduct(model.topic_word.col(w));
      acc += r / r.sum();
    }
    theta = acc / acc.sum();
  }
  return theta;
}

Perplexity perplexity_of(const LdaModel& model, const std::vector<std::vector<Eigen::Index>>& docs, std::size_t oov,
                         const PerplexityOptions& options) {
  Perplexity result;
  result.out_of_vocabulary = oov;
  double ll = 0.0;
  std::vector<Eigen::Index> fit_part, score_part;
  for (const auto& doc : docs) {
    if (doc.empty()) continue;
    if (options.estimator == FoldIn::WholeDocument) {
      fit_part = doc;
      score_part = doc;
    } else {
      // Even positions estimate the mixture, odd positions are scored.
      fit_part.clear();
      score_part.clear();
      for (std::size_t i = 0; i < doc.size(); ++i) (i % 2 == 0 ? fit_part : score_part).push_back(doc[i]);
    }
    const Eigen::VectorXd theta = fold_in(model, fit_part, options.iterations);
    for (auto w : score_part) ll += std::log(theta.dot(model.topic_word.col(w)));
    result.tokens += score_part.size();
  }
  if (result.tokens == 0) throw std::invalid_argument("held-out corpus has no scorable in-vocabulary tokens");
  result.value = std::exp(-ll / static_cast<double>(result.tokens));
  return result;
}

}  // namespace

Perplexity held_out_perplexity(const LdaModel& model, std::span<const Document> documents,
                               const PerplexityOptions& options) {
  const auto V = static_cast<int>(model.vocabulary_size());
  std::vector<std::vector<Eigen::Index>> docs;
  std::size_t oov = 0;
  for (const auto& doc : documents) {
    auto& out = docs.emplace_back();
    for (int w : doc) {
      if (w < 0 || w >= V) {
        ++oov;
      } else {
        out.push_back(w);
      }
    }
  }
  return perplexity_of(model, docs, oov, options);
}

Perplexity held_out_perplexity(const LdaModel& model, std::span<const std::vector<std::string>> documents,
                               const PerplexityOptions& options) {
  std::unordered_map<std::string_view, Eigen::Index> index;
  for (std::size_t i = 0; i < model.vocabulary.size(); ++i) index.emplace(model.vocabulary[i], static_cast<Eigen::Index>(i));
  std::vector<std::vector<Eigen::Index>> docs;
  std::size_t oov = 0;
  for (const auto& doc : documents) {
    auto& out = docs.emplace_back();
    for (const auto& tok : doc) {
      auto it = index.find(tok);
      if (it == index.end()) {
        ++oov;
      } else {
        out.push_back(it->second);
      }
    }
  }
  return perplexity_of(model, docs, oov, options);
}

TopicSelection select_topic_count(const Corpus& corpus, std::span<const int> grid, const SelectionOptions& options) {
  if (grid.empty()) throw std::invalid_argument("topic grid must be non-empty");
  const std::size_t D = corpus.documents.size();
  const auto holdout_size =
      std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(options.holdout_fraction * static_cast<double>(D))));
  if (holdout_size >= D) throw std::invalid_argument("corpus too small to hold out documents and still train");

  std::vector<std::size_t> order(D);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(derive_seed(options.seed, {0x686f6c646f7574ull}));
  rng.shuffle(std::span<std::size_t>(order));

  TopicSelection selection;
  selection.holdout.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(holdout_size));
  std::sort(selection.holdout.begin(), selection.holdout.end());

  Corpus train;
  train.vocabulary = corpus.vocabulary;
  std::vector<Document> held_out;
  {
    std::size_t h = 0;
    for (std::size_t d = 0; d < D; ++d) {
      if (h < selection.holdout.size() && selection.holdout[h] == d) {
        held_out.push_back(corpus.documents[d]);
        ++h;
      } else {
        train.documents.push_back(corpus.documents[d]);
        train.source_index.push_back(corpus.source_index.empty() ? d : corpus.source_index[d]);
      }
    }
  }

  auto evaluate = [&](int K) {
    LdaOptions lda{K, options.iterations, derive_seed(options.seed, {static_cast<std::uint64_t>(K)}), options.priors};
    return held_out_perplexity(fit_lda(train, lda), std::span<const Document>(held_out), {options.estimator}).value;
  };

  std::vector<double> values(grid.size());
  if (options.parallel) {
    std::vector<std::future<double>> jobs;
    for (int K : grid) jobs.push_back(std::async(std::launch::async, evaluate, K));
    for (std::size_t i = 0; i < jobs.size(); ++i) values[i] = jobs[i].get();
  } else {
    for (std::size_t i = 0; i < grid.size(); ++i) values[i] = evaluate(grid[i]);
  }

  double best = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    selection.curve.emplace_back(grid[i], values[i]);
    if (selection.topics == 0 || values[i] < best || (values[i] == best && grid[i] < selection.topics)) {
      best = values[i];
      selection.topics = grid[i];
    }
  }
  return selection;
}

std::vector<TermWeight> top_terms(const LdaModel& model, int topic, std::size_t n) {
  if (topic < 0 || topic >= model.topics) throw std::out_of_range("topic index out of range");
  std::vector<std::size_t> ids(model.vocabulary.size());
  std::iota(ids.begin(), ids.end(), 0);
  auto row = model.topic_word.row(topic);
  std::sort(ids.begin(), ids.end(), [&](std::size_t a, std::size_t b) {
    double pa = row(static_cast<Eigen::Index>(a)), pb = row(static_cast<Eigen::Index>(b));
    if (pa != pb) return pa > pb;
    return model.vocabulary[a] < model.vocabulary[b];
  });
  ids.resize(std::min(n, ids.size()));
  std::vector<TermWeight> out;
  for (auto id : ids) out.push_back({model.vocabulary[id], row(static_cast<Eigen::Index>(id))});
  return out;
}

std::vector<double> topic_contributions(const LdaModel& model) {
  std::vector<double> out(static_cast<std::size_t>(model.topics), 0.0);
  if (model.doc_topic.rows() == 0) return out;
  Eigen::VectorXd mean = model.doc_topic.colwise().mean();
  for (Eigen::Index k = 0; k < mean.size(); ++k) out[static_cast<std::size_t>(k)] = mean(k);
  return out;
}

}  // namespace scrapnet
