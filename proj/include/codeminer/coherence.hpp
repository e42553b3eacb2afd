#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <thread>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "codeminer/error.hpp"
#include "codeminer/guided_lda.hpp"
#include "codeminer/preprocess.hpp"
#include "codeminer/rng.hpp"

namespace codeminer {

enum class CoherenceMeasure { c_v, u_mass };

inline const char* to_string(CoherenceMeasure m) {
  return m == CoherenceMeasure::c_v ? "c_v" : "u_mass";
}

// U_Mass: per topic, the mean over ordered pairs (w_i, w_j), i > j in list
// order, of ln((D(w_i, w_j) + 1) / D(w_j)), with D counting documents.
// Single-word topics score 0; the overall score is the mean over topics.
inline double coherence_umass(const std::vector<std::vector<std::string>>& topics,
                              const std::vector<TokenDocument>& docs) {
  if (topics.empty()) throw ConfigError("no topics to score");

  std::unordered_map<std::string, int> word_id;
  for (const auto& topic : topics) {
    if (topic.empty()) throw ConfigError("cannot score an empty topic");
    for (const auto& w : topic) word_id.emplace(w, static_cast<int>(word_id.size()));
  }

  const std::size_t m = word_id.size();
  std::vector<long> doc_count(m, 0);
  std::unordered_map<std::uint64_t, long> pair_count;
  std::vector<int> present;
  for (const auto& doc : docs) {
    std::unordered_set<int> ids;
    for (const auto& tok : doc.tokens) {
      auto it = word_id.find(tok);
      if (it != word_id.end()) ids.insert(it->second);
    }
    present.assign(ids.begin(), ids.end());
    std::sort(present.begin(), present.end());
    for (std::size_t a = 0; a < present.size(); ++a) {
      ++doc_count[static_cast<std::size_t>(present[a])];
      for (std::size_t b = a + 1; b < present.size(); ++b)
        ++pair_count[static_cast<std::uint64_t>(present[a]) * m +
                     static_cast<std::uint64_t>(present[b])];
    }
  }

  auto joint = [&](int a, int b) -> long {
    if (a > b) std::swap(a, b);
    auto it = pair_count.find(static_cast<std::uint64_t>(a) * m + static_cast<std::uint64_t>(b));
    return it == pair_count.end() ? 0 : it->second;
  };

  double total = 0.0;
  for (const auto& topic : topics) {
    double topic_sum = 0.0;
    std::size_t pairs = 0;
    for (std::size_t i = 0; i < topic.size(); ++i) {
      const int wi = word_id.at(topic[i]);
      if (doc_count[static_cast<std::size_t>(wi)] == 0)
        throw DataError("topic term \"" + topic[i] + "\" occurs in no document");
      for (std::size_t j = 0; j < i; ++j) {
        const int wj = word_id.at(topic[j]);
        topic_sum += std::log(
            (static_cast<double>(joint(wi, wj)) + 1.0) /
            static_cast<double>(doc_count[static_cast<std::size_t>(wj)]));
        ++pairs;
      }
    }
    total += pairs > 0 ? topic_sum / static_cast<double>(pairs) : 0.0;
  }
  return total / static_cast<double>(topics.size());
}

namespace detail {

struct WindowCounts {
  long n_windows = 0;
  std::vector<long> word;                          // per union-word id
  std::unordered_map<std::uint64_t, long> pair;    // key a * m + b, a < b
};

// Boolean sliding windows of `window` tokens (step 1); documents shorter than
// the window contribute a single window.
inline WindowCounts count_windows(const std::vector<std::vector<int>>& doc_ids,
                                  std::size_t num_words, int window) {
  WindowCounts counts;
  counts.word.assign(num_words, 0);
  std::vector<int> present;
  for (const auto& ids : doc_ids) {
    if (ids.empty()) continue;
    const std::size_t len = ids.size();
    const std::size_t w = static_cast<std::size_t>(window);
    const std::size_t n_win = len <= w ? 1 : len - w + 1;
    for (std::size_t start = 0; start < n_win; ++start) {
      const std::size_t end = std::min(len, start + w);
      std::unordered_set<int> seen;
      for (std::size_t p = start; p < end; ++p)
        if (ids[p] >= 0) seen.insert(ids[p]);
      ++counts.n_windows;
      if (seen.empty()) continue;
      present.assign(seen.begin(), seen.end());
      std::sort(present.begin(), present.end());
      for (std::size_t a = 0; a < present.size(); ++a) {
        ++counts.word[static_cast<std::size_t>(present[a])];
        for (std::size_t b = a + 1; b < present.size(); ++b)
          ++counts.pair[static_cast<std::uint64_t>(present[a]) * num_words +
                        static_cast<std::uint64_t>(present[b])];
      }
    }
  }
  return counts;
}

}  // namespace detail

// C_v: NPMI between topic-word pairs estimated from boolean sliding windows
// (epsilon 1e-12), each word represented by its NPMI vector against all words
// of its topic, one-set segmentation scored as the cosine of each vector
// against the topic's summed vector. Topic score is the mean cosine; the
// overall score is the mean over topics.
inline double coherence_cv(const std::vector<std::vector<std::string>>& topics,
                           const std::vector<TokenDocument>& docs, int window = 110) {
  if (topics.empty()) throw ConfigError("no topics to score");
  if (window < 2) throw ConfigError("window must be >= 2");
  constexpr double kEps = 1e-12;

  std::unordered_map<std::string, int> word_id;
  for (const auto& topic : topics) {
    if (topic.empty()) throw ConfigError("cannot score an empty topic");
    for (const auto& w : topic) word_id.emplace(w, static_cast<int>(word_id.size()));
  }
  const std::size_t m = word_id.size();

  std::vector<std::vector<int>> doc_ids(docs.size());
  for (std::size_t d = 0; d < docs.size(); ++d) {
    doc_ids[d].reserve(docs[d].tokens.size());
    for (const auto& tok : docs[d].tokens) {
      auto it = word_id.find(tok);
      doc_ids[d].push_back(it == word_id.end() ? -1 : it->second);
    }
  }

  const auto counts = detail::count_windows(doc_ids, m, window);
  if (counts.n_windows == 0) throw DataError("corpus has no windows to score against");
  const double n = static_cast<double>(counts.n_windows);

  for (const auto& [w, id] : word_id)
    if (counts.word[static_cast<std::size_t>(id)] == 0)
      throw DataError("topic term \"" + w + "\" occurs in no window");

  auto joint_p = [&](int a, int b) -> double {
    if (a == b) return static_cast<double>(counts.word[static_cast<std::size_t>(a)]) / n;
    if (a > b) std::swap(a, b);
    auto it = counts.pair.find(static_cast<std::uint64_t>(a) * m + static_cast<std::uint64_t>(b));
    return it == counts.pair.end() ? 0.0 : static_cast<double>(it->second) / n;
  };
  auto npmi = [&](int a, int b) -> double {
    const double pa = static_cast<double>(counts.word[static_cast<std::size_t>(a)]) / n;
    const double pb = static_cast<double>(counts.word[static_cast<std::size_t>(b)]) / n;
    const double pab = joint_p(a, b);
    return std::log((pab + kEps) / (pa * pb)) / -std::log(pab + kEps);
  };

  double total = 0.0;
  for (const auto& topic : topics) {
    const std::size_t t = topic.size();
    std::vector<int> ids(t);
    for (std::size_t i = 0; i < t; ++i) ids[i] = word_id.at(topic[i]);

    // rows: NPMI vector of each word against the whole topic
    std::vector<std::vector<double>> vec(t, std::vector<double>(t));
    for (std::size_t i = 0; i < t; ++i)
      for (std::size_t j = 0; j < t; ++j) vec[i][j] = npmi(ids[i], ids[j]);

    std::vector<double> sum(t, 0.0);
    for (std::size_t i = 0; i < t; ++i)
      for (std::size_t j = 0; j < t; ++j) sum[j] += vec[i][j];

    double sum_norm = 0.0;
    for (double v : sum) sum_norm += v * v;
    sum_norm = std::sqrt(sum_norm);

    double topic_score = 0.0;
    for (std::size_t i = 0; i < t; ++i) {
      double dot = 0.0, norm = 0.0;
      for (std::size_t j = 0; j < t; ++j) {
        dot += vec[i][j] * sum[j];
        norm += vec[i][j] * vec[i][j];
      }
      norm = std::sqrt(norm);
      topic_score += (norm == 0.0 || sum_norm == 0.0) ? 0.0 : dot / (norm * sum_norm);
    }
    total += topic_score / static_cast<double>(t);
  }
  return total / static_cast<double>(topics.size());
}

struct CoherenceReport {
  CoherenceMeasure measure = CoherenceMeasure::c_v;
  std::vector<std::pair<int, double>> scores;  // (K, median score), contiguous K range
  int best_k = 0;                              // argmax, ties to the smaller K
};

enum class ScanEngine { lda };

struct ScanParams {
  ScanEngine engine = ScanEngine::lda;
  CoherenceMeasure measure = CoherenceMeasure::c_v;
  int window = 110;
  int runs_per_k = 3;
  int top_n = 10;
  int iterations = 1000;
  double alpha = -1.0;  // < 0: use 1/K
  double eta_strength = 200.0;
  std::uint64_t seed = 42;
  int threads = 0;  // 0: hardware concurrency
};

// Fits the LDA engine runs_per_k times per K with seeds derived from
// (seed, K, run), scores the top-N topic terms, and records the per-K median.
inline CoherenceReport coherence_scan(const std::vector<TokenDocument>& docs,
                                      const Vocabulary& vocab, int k_min, int k_max,
                                      const ScanParams& params = {}) {
  if (k_min < 2) throw ConfigError("k_min must be >= 2");
  if (k_max < k_min) throw ConfigError("k_max must be >= k_min");
  if (params.runs_per_k < 1) throw ConfigError("runs_per_k must be >= 1");

  struct Task {
    int k;
    int run;
  };
  std::vector<Task> tasks;
  for (int k = k_min; k <= k_max; ++k)
    for (int run = 0; run < params.runs_per_k; ++run) tasks.push_back({k, run});

  std::vector<double> task_scores(tasks.size(), 0.0);
  std::vector<std::string> task_errors(tasks.size());
  std::atomic<std::size_t> next_task{0};

  auto worker = [&] {
    for (;;) {
      const std::size_t idx = next_task.fetch_add(1);
      if (idx >= tasks.size()) return;
      const auto [k, run] = tasks[idx];
      try {
        EtaPrior eta = build_eta(std::nullopt, vocab, k);
        eta.strength = params.eta_strength;
        const double alpha = params.alpha > 0.0 ? params.alpha : 1.0 / k;
        const std::uint64_t run_seed = derive_seed(
            params.seed, static_cast<std::uint64_t>(k), static_cast<std::uint64_t>(run));
        LdaModel model = fit_lda(docs, vocab, k, eta, alpha, params.iterations, run_seed);
        std::vector<std::vector<std::string>> term_lists;
        for (const auto& topic : lda_topics(model, vocab, params.top_n)) {
          std::vector<std::string> terms;
          for (const auto& st : topic.terms) terms.push_back(st.term);
          term_lists.push_back(std::move(terms));
        }
        task_scores[idx] = params.measure == CoherenceMeasure::c_v
                               ? coherence_cv(term_lists, docs, params.window)
                               : coherence_umass(term_lists, docs);
      } catch (const std::exception& e) {
        task_errors[idx] = e.what();
      }
    }
  };

  unsigned n_threads = params.threads > 0
                           ? static_cast<unsigned>(params.threads)
                           : std::max(1u, std::thread::hardware_concurrency());
  n_threads = std::min<unsigned>(n_threads, static_cast<unsigned>(tasks.size()));
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned i = 0; i < n_threads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  for (std::size_t i = 0; i < tasks.size(); ++i)
    if (!task_errors[i].empty())
      throw DataError("coherence scan failed at K=" + std::to_string(tasks[i].k) + ": " +
                      task_errors[i]);

  CoherenceReport report;
  report.measure = params.measure;
  for (int k = k_min; k <= k_max; ++k) {
    std::vector<double> runs;
    for (std::size_t i = 0; i < tasks.size(); ++i)
      if (tasks[i].k == k) runs.push_back(task_scores[i]);
    std::sort(runs.begin(), runs.end());
    const std::size_t mid = runs.size() / 2;
    const double median =
        runs.size() % 2 == 1 ? runs[mid] : 0.5 * (runs[mid - 1] + runs[mid]);
    report.scores.emplace_back(k, median);
  }
  report.best_k = report.scores.front().first;
  double best = report.scores.front().second;
  for (const auto& [k, score] : report.scores) {
    if (score > best) {
      best = score;
      report.best_k = k;
    }
  }
  return report;
}

}  // namespace codeminer
