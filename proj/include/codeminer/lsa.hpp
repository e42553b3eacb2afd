#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "codeminer/error.hpp"
#include "codeminer/matrix.hpp"
#include "codeminer/preprocess.hpp"
#include "codeminer/topics.hpp"

namespace codeminer {

// Sparse term-document count matrix (raw frequencies, no weighting).
struct TermDocMatrix {
  std::size_t rows = 0;  // terms
  std::size_t cols = 0;  // documents
  // per document: (term index, count), sorted by term index
  std::vector<std::vector<std::pair<int, int>>> doc_entries;

  int count(std::size_t term, std::size_t doc) const {
    const auto& entries = doc_entries[doc];
    auto it = std::lower_bound(entries.begin(), entries.end(),
                               std::make_pair(static_cast<int>(term), 0),
                               [](const auto& a, const auto& b) { return a.first < b.first; });
    return (it != entries.end() && static_cast<std::size_t>(it->first) == term) ? it->second
                                                                                : 0;
  }

  std::size_t nnz() const {
    std::size_t n = 0;
    for (const auto& e : doc_entries) n += e.size();
    return n;
  }
};

inline TermDocMatrix build_term_doc_matrix(const std::vector<TokenDocument>& docs,
                                           const Vocabulary& vocab) {
  TermDocMatrix m;
  m.rows = vocab.size();
  m.cols = docs.size();
  m.doc_entries.resize(docs.size());
  std::vector<int> counts(vocab.size(), 0);
  std::vector<int> touched;
  for (std::size_t d = 0; d < docs.size(); ++d) {
    touched.clear();
    for (const auto& tok : docs[d].tokens) {
      int idx = vocab.index_of(tok);
      if (idx < 0)
        throw DataError("token \"" + tok + "\" in document \"" + docs[d].id +
                        "\" is not in the vocabulary");
      if (counts[static_cast<std::size_t>(idx)]++ == 0) touched.push_back(idx);
    }
    std::sort(touched.begin(), touched.end());
    auto& entries = m.doc_entries[d];
    entries.reserve(touched.size());
    for (int idx : touched) {
      entries.emplace_back(idx, counts[static_cast<std::size_t>(idx)]);
      counts[static_cast<std::size_t>(idx)] = 0;
    }
  }
  return m;
}

// Rank-k truncated SVD of the term-document matrix.
struct LsaModel {
  int k = 0;
  std::vector<double> singular_values;  // descending
  Matrix term_vectors;                  // n_terms x k, orthonormal columns
  Matrix doc_vectors;                   // n_docs x k, orthonormal columns
};

namespace detail {

// Fills column j of `factor` with a canonical basis vector orthogonalized
// against columns [0, j); used when a singular value is numerically zero.
inline void complete_orthonormal_column(Eigen::MatrixXd& factor, Eigen::Index j) {
  const Eigen::Index n = factor.rows();
  for (Eigen::Index cand = 0; cand < n; ++cand) {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(n);
    v(cand) = 1.0;
    for (int pass = 0; pass < 2; ++pass)
      for (Eigen::Index c = 0; c < j; ++c) v -= factor.col(c).dot(v) * factor.col(c);
    if (v.norm() > 0.5) {
      factor.col(j) = v / v.norm();
      return;
    }
  }
  throw NumericError("failed to complete an orthonormal basis for a rank-deficient factor");
}

}  // namespace detail

// Computes the decomposition from a dense eigendecomposition of the smaller
// Gram matrix (A A^T over terms or A^T A over documents), then recovers the
// other factor. Deterministic; no randomized iteration involved.
inline LsaModel fit_lsa(const TermDocMatrix& matrix, int k) {
  const std::size_t n_terms = matrix.rows;
  const std::size_t n_docs = matrix.cols;
  const std::size_t min_dim = std::min(n_terms, n_docs);
  if (k < 1 || static_cast<std::size_t>(k) > min_dim)
    throw ConfigError("k must be in [1, min(terms, docs)] = [1, " +
                      std::to_string(min_dim) + "], got " + std::to_string(k));

  const bool gram_over_terms = n_terms <= n_docs;
  const std::size_t g_dim = gram_over_terms ? n_terms : n_docs;

  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(g_dim),
                                               static_cast<Eigen::Index>(g_dim));
  if (gram_over_terms) {
    // A A^T: accumulate the outer product of every document column
    for (const auto& entries : matrix.doc_entries)
      for (const auto& [t1, c1] : entries)
        for (const auto& [t2, c2] : entries)
          gram(t1, t2) += static_cast<double>(c1) * static_cast<double>(c2);
  } else {
    // A^T A: accumulate over the documents each term appears in
    std::vector<std::vector<std::pair<int, int>>> term_entries(n_terms);
    for (std::size_t d = 0; d < n_docs; ++d)
      for (const auto& [t, c] : matrix.doc_entries[d])
        term_entries[static_cast<std::size_t>(t)].emplace_back(static_cast<int>(d), c);
    for (const auto& entries : term_entries)
      for (const auto& [d1, c1] : entries)
        for (const auto& [d2, c2] : entries)
          gram(d1, d2) += static_cast<double>(c1) * static_cast<double>(c2);
  }

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(gram);
  if (solver.info() != Eigen::Success)
    throw NumericError("eigendecomposition of the Gram matrix did not converge");

  // eigenvalues come back ascending; take the top k
  Eigen::MatrixXd gram_vecs(static_cast<Eigen::Index>(g_dim), k);
  std::vector<double> sigma(static_cast<std::size_t>(k));
  for (int j = 0; j < k; ++j) {
    const Eigen::Index src = static_cast<Eigen::Index>(g_dim) - 1 - j;
    sigma[static_cast<std::size_t>(j)] = std::sqrt(std::max(0.0, solver.eigenvalues()(src)));
    gram_vecs.col(j) = solver.eigenvectors().col(src);
  }
  const double sigma_max = sigma.empty() ? 0.0 : sigma[0];
  const double tol = sigma_max * 1e-12;

  Eigen::MatrixXd term_f(static_cast<Eigen::Index>(n_terms), k);
  Eigen::MatrixXd doc_f(static_cast<Eigen::Index>(n_docs), k);
  Eigen::MatrixXd& gram_side = gram_over_terms ? term_f : doc_f;
  Eigen::MatrixXd& derived_side = gram_over_terms ? doc_f : term_f;
  gram_side = gram_vecs;

  for (int j = 0; j < k; ++j) {
    if (sigma[static_cast<std::size_t>(j)] > tol && sigma_max > 0.0) {
      Eigen::VectorXd derived = Eigen::VectorXd::Zero(derived_side.rows());
      for (std::size_t d = 0; d < n_docs; ++d) {
        for (const auto& [t, c] : matrix.doc_entries[d]) {
          if (gram_over_terms)
            derived(static_cast<Eigen::Index>(d)) += c * gram_vecs(t, j);
          else
            derived(t) += c * gram_vecs(static_cast<Eigen::Index>(d), j);
        }
      }
      derived /= sigma[static_cast<std::size_t>(j)];
      const double norm = derived.norm();
      if (norm > 0.0) derived /= norm;
      derived_side.col(j) = derived;
    } else {
      sigma[static_cast<std::size_t>(j)] = 0.0;
      detail::complete_orthonormal_column(derived_side, j);
    }
  }

  // sign convention: the largest-magnitude entry of each term vector is
  // positive (first such index on ties), so output is backend-independent
  for (int j = 0; j < k; ++j) {
    Eigen::Index best = 0;
    double best_abs = -1.0;
    for (Eigen::Index i = 0; i < term_f.rows(); ++i) {
      double a = std::abs(term_f(i, j));
      if (a > best_abs) {
        best_abs = a;
        best = i;
      }
    }
    if (term_f(best, j) < 0.0) {
      term_f.col(j) = -term_f.col(j);
      doc_f.col(j) = -doc_f.col(j);
    }
  }

  LsaModel model;
  model.k = k;
  model.singular_values = std::move(sigma);
  model.term_vectors = Matrix(n_terms, static_cast<std::size_t>(k));
  model.doc_vectors = Matrix(n_docs, static_cast<std::size_t>(k));
  for (std::size_t i = 0; i < n_terms; ++i)
    for (int j = 0; j < k; ++j)
      model.term_vectors.at(i, static_cast<std::size_t>(j)) =
          term_f(static_cast<Eigen::Index>(i), j);
  for (std::size_t i = 0; i < n_docs; ++i)
    for (int j = 0; j < k; ++j)
      model.doc_vectors.at(i, static_cast<std::size_t>(j)) =
          doc_f(static_cast<Eigen::Index>(i), j);
  return model;
}

// Top terms per topic by absolute loading, reported with sign; ties broken by
// vocabulary index.
inline std::vector<Topic> lsa_topics(const LsaModel& model, const Vocabulary& vocab,
                                     int top_n) {
  if (top_n < 1) throw ConfigError("top_n must be >= 1");
  std::vector<Topic> topics;
  topics.reserve(static_cast<std::size_t>(model.k));
  const std::size_t n_w = vocab.size();
  std::vector<int> order(n_w);
  for (int j = 0; j < model.k; ++j) {
    for (std::size_t w = 0; w < n_w; ++w) order[w] = static_cast<int>(w);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
      double wa = std::abs(model.term_vectors.at(static_cast<std::size_t>(a),
                                                 static_cast<std::size_t>(j)));
      double wb = std::abs(model.term_vectors.at(static_cast<std::size_t>(b),
                                                 static_cast<std::size_t>(j)));
      if (wa != wb) return wa > wb;
      return a < b;
    });
    Topic topic;
    topic.id = j;
    const std::size_t take = std::min<std::size_t>(static_cast<std::size_t>(top_n), n_w);
    for (std::size_t r = 0; r < take; ++r) {
      const std::size_t w = static_cast<std::size_t>(order[r]);
      topic.terms.push_back(
          {vocab.terms()[w], model.term_vectors.at(w, static_cast<std::size_t>(j))});
    }
    topics.push_back(std::move(topic));
  }
  return topics;
}

}  // namespace codeminer
