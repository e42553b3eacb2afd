#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "codeminer/error.hpp"
#include "codeminer/guidance.hpp"
#include "codeminer/matrix.hpp"
#include "codeminer/preprocess.hpp"
#include "codeminer/rng.hpp"
#include "codeminer/topics.hpp"

namespace codeminer {

// Per-topic Dirichlet base measure over the vocabulary. Rows are probability
// distributions; the sampler scales them by `strength` to get pseudo-counts.
struct EtaPrior {
  Matrix matrix;            // K x n_w, rows sum to 1
  double strength = 200.0;  // Dirichlet concentration multiplier
};

// Guided rows split keywords_total_probability evenly over a line's surviving
// keywords and the remainder evenly over all other terms; unguided rows are
// uniform. Out-of-vocabulary keywords are dropped (reported via `warnings`).
inline EtaPrior build_eta(const std::optional<GuidanceSpec>& guidance,
                          const Vocabulary& vocab, int K,
                          std::vector<std::string>* warnings = nullptr) {
  if (K < 1) throw ConfigError("K must be >= 1");
  const std::size_t n_w = vocab.size();
  if (n_w == 0) throw DataError("cannot build a topic-word prior over an empty vocabulary");

  EtaPrior prior;
  prior.matrix = Matrix(static_cast<std::size_t>(K), n_w, 1.0 / static_cast<double>(n_w));
  if (!guidance) return prior;

  const double total_p = guidance->keywords_total_probability;
  if (!(total_p > 0.0 && total_p < 1.0))
    throw ConfigError("keywords_total_probability must be in (0, 1)");
  if (guidance->lines.size() > static_cast<std::size_t>(K))
    throw ConfigError("guidance has " + std::to_string(guidance->lines.size()) +
                      " lines but K is only " + std::to_string(K));

  for (std::size_t t = 0; t < guidance->lines.size(); ++t) {
    std::vector<int> keyword_ids;
    for (const auto& kw : guidance->lines[t]) {
      int idx = vocab.index_of(kw);
      if (idx >= 0) {
        keyword_ids.push_back(idx);
      } else if (warnings) {
        warnings->push_back("guidance line " + std::to_string(t) + ": keyword \"" + kw +
                            "\" is not in the vocabulary, dropped");
      }
    }
    if (keyword_ids.empty())
      throw DataError("guidance line " + std::to_string(t) +
                      " has no in-vocabulary keywords");
    const std::size_t n_kt = keyword_ids.size();
    if (n_kt == n_w)
      throw DataError("guidance line " + std::to_string(t) +
                      " covers the entire vocabulary");

    const double kw_p = total_p / static_cast<double>(n_kt);
    const double rest_p = (1.0 - total_p) / static_cast<double>(n_w - n_kt);
    double* row = prior.matrix.row(t);
    for (std::size_t w = 0; w < n_w; ++w) row[w] = rest_p;
    for (int idx : keyword_ids) row[idx] = kw_p;
  }
  return prior;
}

struct LdaModel {
  int K = 0;
  Matrix topic_word;  // K x n_w, rows sum to 1
  Matrix doc_topic;   // num_docs x K, rows sum to 1
  std::vector<double> log_likelihood_trace;  // log p(w|z) after each sweep
  std::uint64_t seed = 0;
};

namespace detail {

// log p(w|z) under the Dirichlet-multinomial with asymmetric eta; sparse in
// the nonzero topic-word counts so it is cheap enough to record every sweep.
inline double lda_log_likelihood(const std::vector<std::vector<int>>& n_kw,
                                 const std::vector<long>& n_k, const Matrix& eta_params,
                                 const std::vector<double>& eta_row_sums) {
  const int K = static_cast<int>(n_kw.size());
  const std::size_t n_w = eta_params.cols;
  double ll = 0.0;
  for (int t = 0; t < K; ++t) {
    ll += std::lgamma(eta_row_sums[static_cast<std::size_t>(t)]) -
          std::lgamma(static_cast<double>(n_k[static_cast<std::size_t>(t)]) +
                      eta_row_sums[static_cast<std::size_t>(t)]);
    const double* eta_row = eta_params.row(static_cast<std::size_t>(t));
    const auto& counts = n_kw[static_cast<std::size_t>(t)];
    for (std::size_t w = 0; w < n_w; ++w) {
      if (counts[w] != 0)
        ll += std::lgamma(counts[w] + eta_row[w]) - std::lgamma(eta_row[w]);
    }
  }
  return ll;
}

}  // namespace detail

// Collapsed Gibbs sampling with symmetric document-topic prior `alpha` and
// topic-word pseudo-counts eta.matrix * eta.strength. Estimates come from the
// final sample's counts with prior smoothing. Same inputs and seed give
// bit-identical output.
inline LdaModel fit_lda(const std::vector<TokenDocument>& docs, const Vocabulary& vocab,
                        int K, const EtaPrior& eta, double alpha, int iterations,
                        std::uint64_t seed) {
  if (K < 2) throw ConfigError("K must be >= 2");
  if (iterations < 1) throw ConfigError("iterations must be >= 1");
  if (!(alpha > 0.0)) throw ConfigError("alpha must be > 0");
  const std::size_t n_w = vocab.size();
  if (static_cast<std::size_t>(K) > n_w)
    throw DataError("K (" + std::to_string(K) + ") exceeds vocabulary size (" +
                    std::to_string(n_w) + ")");
  if (eta.matrix.rows != static_cast<std::size_t>(K) || eta.matrix.cols != n_w)
    throw ConfigError("eta prior shape does not match K x n_w");
  if (!(eta.strength > 0.0)) throw ConfigError("eta strength must be > 0");

  const std::size_t num_docs = docs.size();
  std::vector<std::vector<int>> word_ids(num_docs);
  std::size_t total_tokens = 0;
  for (std::size_t d = 0; d < num_docs; ++d) {
    word_ids[d].reserve(docs[d].tokens.size());
    for (const auto& tok : docs[d].tokens) {
      int idx = vocab.index_of(tok);
      if (idx < 0) throw DataError("token \"" + tok + "\" is not in the vocabulary");
      word_ids[d].push_back(idx);
    }
    total_tokens += word_ids[d].size();
  }
  if (total_tokens == 0) throw DataError("all documents are empty");

  Matrix eta_params(static_cast<std::size_t>(K), n_w);
  std::vector<double> eta_row_sums(static_cast<std::size_t>(K), 0.0);
  for (std::size_t t = 0; t < static_cast<std::size_t>(K); ++t) {
    double sum = 0.0;
    for (std::size_t w = 0; w < n_w; ++w) {
      double v = eta.matrix.at(t, w) * eta.strength;
      eta_params.at(t, w) = v;
      sum += v;
    }
    eta_row_sums[t] = sum;
  }

  std::vector<std::vector<int>> n_kw(static_cast<std::size_t>(K),
                                     std::vector<int>(n_w, 0));
  std::vector<std::vector<int>> n_dk(num_docs, std::vector<int>(static_cast<std::size_t>(K), 0));
  std::vector<long> n_k(static_cast<std::size_t>(K), 0);
  std::vector<std::vector<int>> z(num_docs);

  Rng rng(seed);
  for (std::size_t d = 0; d < num_docs; ++d) {
    z[d].resize(word_ids[d].size());
    for (std::size_t i = 0; i < word_ids[d].size(); ++i) {
      int t = static_cast<int>(rng.bounded(static_cast<std::uint64_t>(K)));
      z[d][i] = t;
      ++n_kw[static_cast<std::size_t>(t)][static_cast<std::size_t>(word_ids[d][i])];
      ++n_dk[d][static_cast<std::size_t>(t)];
      ++n_k[static_cast<std::size_t>(t)];
    }
  }

  LdaModel model;
  model.K = K;
  model.seed = seed;
  model.log_likelihood_trace.reserve(static_cast<std::size_t>(iterations));

  std::vector<double> weights(static_cast<std::size_t>(K));
  for (int sweep = 0; sweep < iterations; ++sweep) {
    for (std::size_t d = 0; d < num_docs; ++d) {
      auto& doc_z = z[d];
      const auto& doc_w = word_ids[d];
      auto& dk = n_dk[d];
      for (std::size_t i = 0; i < doc_w.size(); ++i) {
        const std::size_t w = static_cast<std::size_t>(doc_w[i]);
        const std::size_t t_old = static_cast<std::size_t>(doc_z[i]);
        --n_kw[t_old][w];
        --dk[t_old];
        --n_k[t_old];

        double total = 0.0;
        for (std::size_t t = 0; t < static_cast<std::size_t>(K); ++t) {
          double p = (dk[t] + alpha) * (n_kw[t][w] + eta_params.at(t, w)) /
                     (static_cast<double>(n_k[t]) + eta_row_sums[t]);
          weights[t] = p;
          total += p;
        }
        double r = rng.uniform() * total;
        std::size_t t_new = 0;
        double acc = weights[0];
        while (acc < r && t_new + 1 < static_cast<std::size_t>(K)) acc += weights[++t_new];

        doc_z[i] = static_cast<int>(t_new);
        ++n_kw[t_new][w];
        ++dk[t_new];
        ++n_k[t_new];
      }
    }
    model.log_likelihood_trace.push_back(
        detail::lda_log_likelihood(n_kw, n_k, eta_params, eta_row_sums));
  }

  model.topic_word = Matrix(static_cast<std::size_t>(K), n_w);
  for (std::size_t t = 0; t < static_cast<std::size_t>(K); ++t) {
    const double denom = static_cast<double>(n_k[t]) + eta_row_sums[t];
    for (std::size_t w = 0; w < n_w; ++w)
      model.topic_word.at(t, w) = (n_kw[t][w] + eta_params.at(t, w)) / denom;
  }
  model.doc_topic = Matrix(num_docs, static_cast<std::size_t>(K));
  for (std::size_t d = 0; d < num_docs; ++d) {
    const double denom =
        static_cast<double>(word_ids[d].size()) + static_cast<double>(K) * alpha;
    for (std::size_t t = 0; t < static_cast<std::size_t>(K); ++t)
      model.doc_topic.at(d, t) = (n_dk[d][t] + alpha) / denom;  // empty doc -> 1/K
  }
  return model;
}

// Top terms per topic by probability, ties broken by vocabulary index.
inline std::vector<Topic> lda_topics(const LdaModel& model, const Vocabulary& vocab,
                                     int top_n) {
  if (top_n < 1) throw ConfigError("top_n must be >= 1");
  std::vector<Topic> topics;
  topics.reserve(static_cast<std::size_t>(model.K));
  const std::size_t n_w = vocab.size();
  std::vector<int> order(n_w);
  for (int t = 0; t < model.K; ++t) {
    const double* row = model.topic_word.row(static_cast<std::size_t>(t));
    for (std::size_t w = 0; w < n_w; ++w) order[w] = static_cast<int>(w);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
      if (row[a] != row[b]) return row[a] > row[b];
      return a < b;
    });
    Topic topic;
    topic.id = t;
    const std::size_t take = std::min<std::size_t>(static_cast<std::size_t>(top_n), n_w);
    for (std::size_t r = 0; r < take; ++r)
      topic.terms.push_back({vocab.terms()[static_cast<std::size_t>(order[r])],
                             row[order[r]]});
    topics.push_back(std::move(topic));
  }
  return topics;
}

}  // namespace codeminer
