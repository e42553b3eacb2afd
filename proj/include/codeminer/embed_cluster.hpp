#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "codeminer/error.hpp"
#include "codeminer/guidance.hpp"
#include "codeminer/matrix.hpp"
#include "codeminer/preprocess.hpp"
#include "codeminer/rng.hpp"
#include "codeminer/topics.hpp"

namespace codeminer {

// Pre-trained word vectors restricted to the corpus's unigram vocabulary.
// Word order follows the vector file, so downstream runs are reproducible.
struct EmbeddingTable {
  int dim = 0;
  std::vector<std::string> words;
  std::unordered_map<std::string, int> index;
  std::vector<double> data;  // words.size() x dim, row-major
  std::string source;
  std::vector<std::string> dropped;  // vocabulary unigrams missing from the file

  std::size_t size() const { return words.size(); }
  const double* vec(std::size_t i) const { return data.data() + i * static_cast<std::size_t>(dim); }
  const double* vec_of(const std::string& word) const {
    auto it = index.find(word);
    return it == index.end() ? nullptr : vec(static_cast<std::size_t>(it->second));
  }
};

// word2vec text format: header "count dim", then one "word v1 .. vdim" line
// per word. Accepts .gz files. Bigrams/trigrams are never embedded; there is
// no natural composition operator for them.
inline EmbeddingTable load_embeddings(const std::string& path, const Vocabulary& vocab) {
  EmbeddingTable table;
  table.source = path;

  std::unordered_set<std::string> wanted;
  for (const auto& term : vocab.terms())
    if (term.find('_') == std::string::npos) wanted.insert(term);

  const auto lines = split_lines(slurp_text(path));
  if (lines.empty()) throw DataError("embedding file is empty: " + path);
  {
    std::istringstream header(lines[0]);
    long long count = 0, dim = 0;
    if (!(header >> count >> dim) || count < 0 || dim < 1) {
      std::string rest;
      header >> rest;
      throw DataError("malformed embedding header (expected \"count dim\"): " + path);
    }
    std::string extra;
    if (header >> extra)
      throw DataError("malformed embedding header (expected \"count dim\"): " + path);
    table.dim = static_cast<int>(dim);
  }

  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (trim(lines[i]).empty()) continue;
    std::istringstream iss(lines[i]);
    std::string word;
    iss >> word;
    const bool keep = wanted.count(word) != 0 && table.index.count(word) == 0;
    std::vector<double> values(static_cast<std::size_t>(table.dim));
    for (int d = 0; d < table.dim; ++d) {
      if (!(iss >> values[static_cast<std::size_t>(d)]))
        throw DataError("embedding line " + std::to_string(i + 1) + " has fewer than " +
                        std::to_string(table.dim) + " components");
      if (!std::isfinite(values[static_cast<std::size_t>(d)]))
        throw DataError("embedding line " + std::to_string(i + 1) +
                        " contains a non-finite component");
    }
    double trailing;
    if (iss >> trailing)
      throw DataError("embedding line " + std::to_string(i + 1) + " has more than " +
                      std::to_string(table.dim) + " components");
    if (!keep) continue;
    table.index.emplace(word, static_cast<int>(table.words.size()));
    table.words.push_back(word);
    table.data.insert(table.data.end(), values.begin(), values.end());
  }

  if (table.words.empty())
    throw DataError("no overlap between the vocabulary and the embedding file: " + path);
  for (const auto& term : vocab.terms())
    if (term.find('_') == std::string::npos && table.index.count(term) == 0)
      table.dropped.push_back(term);
  return table;
}

namespace detail {

inline double sq_dist(const double* a, const double* b, int dim) {
  double s = 0.0;
  for (int d = 0; d < dim; ++d) {
    double diff = a[d] - b[d];
    s += diff * diff;
  }
  return s;
}

// k-means++ continuation: centroids [0, have) are fixed; the rest are drawn
// with probability proportional to squared distance from the nearest chosen
// centroid (uniform first pick when none exist yet).
inline void kmeanspp_fill(const EmbeddingTable& table, Matrix& centroids,
                          std::size_t have, Rng& rng) {
  const std::size_t n = table.size();
  const int dim = table.dim;
  const std::size_t K = centroids.rows;
  std::vector<double> best_d2(n, std::numeric_limits<double>::infinity());
  if (have == 0) {
    std::size_t first = static_cast<std::size_t>(rng.bounded(n));
    std::copy_n(table.vec(first), dim, centroids.row(0));
    have = 1;
  }
  for (std::size_t c = 0; c < have; ++c)
    for (std::size_t i = 0; i < n; ++i)
      best_d2[i] = std::min(best_d2[i], sq_dist(table.vec(i), centroids.row(c), dim));

  for (std::size_t c = have; c < K; ++c) {
    double total = 0.0;
    for (double d2 : best_d2) total += d2;
    std::size_t pick;
    if (total > 0.0) {
      double r = rng.uniform() * total;  // r < total since uniform() < 1
      double acc = 0.0;
      pick = n - 1;
      for (std::size_t i = 0; i < n; ++i) {
        acc += best_d2[i];
        if (acc > r && best_d2[i] > 0.0) {
          pick = i;
          break;
        }
      }
    } else {
      pick = static_cast<std::size_t>(rng.bounded(n));  // all points coincide with centroids
    }
    std::copy_n(table.vec(pick), dim, centroids.row(c));
    for (std::size_t i = 0; i < n; ++i)
      best_d2[i] = std::min(best_d2[i], sq_dist(table.vec(i), centroids.row(c), dim));
  }
}

}  // namespace detail

// Guidance lines become centroids at the mean of their in-table keyword
// vectors; remaining centroids come from k-means++ (all of them when there is
// no guidance).
inline Matrix init_centroids(const std::optional<GuidanceSpec>& guidance,
                             const EmbeddingTable& table, int K, std::uint64_t seed) {
  if (K < 1) throw ConfigError("K must be >= 1");
  if (static_cast<std::size_t>(K) > table.size())
    throw DataError("K (" + std::to_string(K) + ") exceeds the number of embedded words (" +
                    std::to_string(table.size()) + ")");
  Matrix centroids(static_cast<std::size_t>(K), static_cast<std::size_t>(table.dim));
  std::size_t seeded = 0;
  if (guidance) {
    if (guidance->lines.size() > static_cast<std::size_t>(K))
      throw ConfigError("guidance has " + std::to_string(guidance->lines.size()) +
                        " lines but K is only " + std::to_string(K));
    for (std::size_t t = 0; t < guidance->lines.size(); ++t) {
      int found = 0;
      double* row = centroids.row(t);
      for (const auto& kw : guidance->lines[t]) {
        const double* v = table.vec_of(kw);
        if (!v) continue;
        for (int d = 0; d < table.dim; ++d) row[d] += v[d];
        ++found;
      }
      if (found == 0)
        throw DataError("guidance line " + std::to_string(t) +
                        " has no keywords with embeddings");
      for (int d = 0; d < table.dim; ++d) row[d] /= static_cast<double>(found);
    }
    seeded = guidance->lines.size();
  }
  Rng rng(seed);
  detail::kmeanspp_fill(table, centroids, seeded, rng);
  return centroids;
}

struct ClusterModel {
  int K = 0;
  Matrix centroids;             // K x dim
  std::vector<int> assignment;  // per table word, cluster id
  double inertia = 0.0;         // sum of squared distances to assigned centroids
  bool seeded = false;
};

namespace detail {

struct LloydResult {
  Matrix centroids;
  std::vector<int> assignment;
  double inertia = 0.0;
};

inline double assign_points(const EmbeddingTable& table, const Matrix& centroids,
                            std::vector<int>& assignment) {
  const std::size_t n = table.size();
  const std::size_t K = centroids.rows;
  double inertia = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double best = std::numeric_limits<double>::infinity();
    int best_c = 0;
    for (std::size_t c = 0; c < K; ++c) {
      double d2 = sq_dist(table.vec(i), centroids.row(c), table.dim);
      if (d2 < best) {
        best = d2;
        best_c = static_cast<int>(c);
      }
    }
    assignment[i] = best_c;
    inertia += best;
  }
  return inertia;
}

// Empty clusters take over the point currently farthest from its centroid.
inline void repair_empty_clusters(const EmbeddingTable& table, const Matrix& centroids,
                                  std::vector<int>& assignment) {
  const std::size_t K = centroids.rows;
  std::vector<std::size_t> sizes(K, 0);
  for (int a : assignment) ++sizes[static_cast<std::size_t>(a)];
  for (std::size_t c = 0; c < K; ++c) {
    if (sizes[c] > 0) continue;
    std::size_t worst = 0;
    double worst_d2 = -1.0;
    for (std::size_t i = 0; i < table.size(); ++i) {
      const std::size_t owner = static_cast<std::size_t>(assignment[i]);
      if (sizes[owner] <= 1) continue;  // do not empty another cluster
      double d2 = sq_dist(table.vec(i), centroids.row(owner), table.dim);
      if (d2 > worst_d2) {
        worst_d2 = d2;
        worst = i;
      }
    }
    --sizes[static_cast<std::size_t>(assignment[worst])];
    assignment[worst] = static_cast<int>(c);
    ++sizes[c];
  }
}

inline LloydResult lloyd(const EmbeddingTable& table, Matrix centroids, int max_iter) {
  const std::size_t n = table.size();
  const std::size_t K = centroids.rows;
  const int dim = table.dim;

  LloydResult result;
  result.assignment.assign(n, 0);
  assign_points(table, centroids, result.assignment);
  repair_empty_clusters(table, centroids, result.assignment);

  std::vector<int> next(n, 0);
  for (int iter = 0; iter < max_iter; ++iter) {
    // update step: centroids become the mean of their members
    std::fill(centroids.data.begin(), centroids.data.end(), 0.0);
    std::vector<std::size_t> sizes(K, 0);
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t c = static_cast<std::size_t>(result.assignment[i]);
      double* row = centroids.row(c);
      const double* v = table.vec(i);
      for (int d = 0; d < dim; ++d) row[d] += v[d];
      ++sizes[c];
    }
    for (std::size_t c = 0; c < K; ++c) {
      if (sizes[c] == 0) continue;  // repaired below via assignment
      double* row = centroids.row(c);
      for (int d = 0; d < dim; ++d) row[d] /= static_cast<double>(sizes[c]);
    }

    double inertia = assign_points(table, centroids, next);
    repair_empty_clusters(table, centroids, next);
    const bool converged = next == result.assignment;
    result.assignment = next;
    result.inertia = inertia;
    if (converged) break;
  }
  result.centroids = std::move(centroids);
  // final sync so the stored inertia matches the stored assignment exactly
  result.inertia = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    result.inertia += sq_dist(table.vec(i),
                              result.centroids.row(static_cast<std::size_t>(result.assignment[i])),
                              dim);
  return result;
}

}  // namespace detail

// Lloyd's algorithm with Euclidean distance, at most 300 iterations. A seeded
// init (from guidance) runs once; otherwise `restarts` k-means++ runs keep the
// lowest-inertia result.
inline ClusterModel fit_kmeans(const EmbeddingTable& table, int K, const Matrix& init,
                               int restarts, std::uint64_t seed) {
  if (K < 1) throw ConfigError("K must be >= 1");
  if (static_cast<std::size_t>(K) > table.size())
    throw DataError("K (" + std::to_string(K) + ") exceeds the number of embedded words (" +
                    std::to_string(table.size()) + ")");
  if (restarts < 1) throw ConfigError("restarts must be >= 1");
  constexpr int kMaxIterations = 300;

  ClusterModel model;
  model.K = K;
  if (!init.empty()) {
    if (init.rows != static_cast<std::size_t>(K) ||
        init.cols != static_cast<std::size_t>(table.dim))
      throw ConfigError("initial centroids must be K x dim");
    auto run = detail::lloyd(table, init, kMaxIterations);
    model.centroids = std::move(run.centroids);
    model.assignment = std::move(run.assignment);
    model.inertia = run.inertia;
    model.seeded = true;
    return model;
  }

  bool first = true;
  for (int r = 0; r < restarts; ++r) {
    Matrix start =
        init_centroids(std::nullopt, table, K, derive_seed(seed, static_cast<std::uint64_t>(r)));
    auto run = detail::lloyd(table, std::move(start), kMaxIterations);
    if (first || run.inertia < model.inertia) {
      model.centroids = std::move(run.centroids);
      model.assignment = std::move(run.assignment);
      model.inertia = run.inertia;
      first = false;
    }
  }
  model.seeded = false;
  return model;
}

namespace detail {

inline double cosine(const double* a, const double* b, int dim) {
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (int d = 0; d < dim; ++d) {
    dot += a[d] * b[d];
    na += a[d] * a[d];
    nb += b[d] * b[d];
  }
  if (na == 0.0 || nb == 0.0) return -1.0;  // zero-norm vectors sort last
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

}  // namespace detail

// The `top_n` words of the whole table closest to each centroid by cosine
// similarity (not restricted to cluster members); ties break lexicographically.
inline std::vector<Topic> cluster_topics(const ClusterModel& model,
                                         const EmbeddingTable& table, int top_n = 5) {
  if (top_n < 1) throw ConfigError("top_n must be >= 1");
  std::vector<Topic> topics;
  topics.reserve(static_cast<std::size_t>(model.K));
  const std::size_t n = table.size();
  std::vector<int> order(n);
  std::vector<double> sims(n);
  for (int c = 0; c < model.K; ++c) {
    const double* centroid = model.centroids.row(static_cast<std::size_t>(c));
    for (std::size_t i = 0; i < n; ++i) {
      sims[i] = detail::cosine(table.vec(i), centroid, table.dim);
      order[i] = static_cast<int>(i);
    }
    std::sort(order.begin(), order.end(), [&](int a, int b) {
      if (sims[static_cast<std::size_t>(a)] != sims[static_cast<std::size_t>(b)])
        return sims[static_cast<std::size_t>(a)] > sims[static_cast<std::size_t>(b)];
      return table.words[static_cast<std::size_t>(a)] < table.words[static_cast<std::size_t>(b)];
    });
    Topic topic;
    topic.id = c;
    const std::size_t take = std::min<std::size_t>(static_cast<std::size_t>(top_n), n);
    for (std::size_t r = 0; r < take; ++r) {
      const std::size_t i = static_cast<std::size_t>(order[r]);
      topic.terms.push_back({table.words[i], sims[i]});
    }
    topics.push_back(std::move(topic));
  }
  return topics;
}

}  // namespace codeminer
