#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>

#include <json.hpp>

#include "codeminer/embed_cluster.hpp"
#include "codeminer/error.hpp"
#include "codeminer/guided_lda.hpp"
#include "codeminer/lsa.hpp"
#include "codeminer/matrix.hpp"
#include "codeminer/preprocess.hpp"

namespace codeminer {

// Six significant digits, parsed back so JSON output carries the rounded
// value itself; keeps rendered reports byte-stable.
inline double round6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return std::strtod(buf, nullptr);
}

// Raw little-endian float64 row-major dump plus a JSON sidecar describing the
// shape, written to <path> and <path>.json.
inline void write_matrix_binary(const Matrix& m, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open file for writing: " + path);
  for (double v : m.data) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, sizeof(bits));
    char bytes[8];
    for (int i = 0; i < 8; ++i) bytes[i] = static_cast<char>((bits >> (8 * i)) & 0xFF);
    out.write(bytes, 8);
  }
  if (!out) throw DataError("I/O failure writing: " + path);

  nlohmann::json sidecar;
  sidecar["dtype"] = "float64";
  sidecar["byte_order"] = "little-endian";
  sidecar["layout"] = "row-major";
  sidecar["rows"] = m.rows;
  sidecar["cols"] = m.cols;
  std::ofstream side(path + ".json", std::ios::binary);
  if (!side) throw DataError("cannot open file for writing: " + path + ".json");
  side << sidecar.dump(2) << '\n';
}

inline nlohmann::json lsa_model_json(const LsaModel& model, const Vocabulary& vocab,
                                     int top_n) {
  nlohmann::json j;
  j["k"] = model.k;
  nlohmann::json sv = nlohmann::json::array();
  for (double s : model.singular_values) sv.push_back(round6(s));
  j["singular_values"] = sv;
  nlohmann::json topics = nlohmann::json::array();
  for (const auto& topic : lsa_topics(model, vocab, top_n)) {
    nlohmann::json t;
    t["id"] = topic.id;
    nlohmann::json terms = nlohmann::json::array();
    for (const auto& st : topic.terms)
      terms.push_back({{"term", st.term}, {"weight", round6(st.weight)}});
    t["terms"] = terms;
    topics.push_back(t);
  }
  j["topics"] = topics;
  return j;
}

inline nlohmann::json lda_model_json(const LdaModel& model, const Vocabulary& vocab,
                                     int top_n) {
  nlohmann::json j;
  j["k"] = model.K;
  j["seed"] = model.seed;
  nlohmann::json topics = nlohmann::json::array();
  for (const auto& topic : lda_topics(model, vocab, top_n)) {
    nlohmann::json t;
    t["id"] = topic.id;
    nlohmann::json terms = nlohmann::json::array();
    for (const auto& st : topic.terms)
      terms.push_back({{"term", st.term}, {"weight", round6(st.weight)}});
    t["terms"] = terms;
    topics.push_back(t);
  }
  j["topics"] = topics;
  nlohmann::json doc_topic = nlohmann::json::array();
  for (std::size_t d = 0; d < model.doc_topic.rows; ++d) {
    nlohmann::json row = nlohmann::json::array();
    for (std::size_t t = 0; t < model.doc_topic.cols; ++t)
      row.push_back(round6(model.doc_topic.at(d, t)));
    doc_topic.push_back(row);
  }
  j["doc_topic"] = doc_topic;
  return j;
}

}  // namespace codeminer
