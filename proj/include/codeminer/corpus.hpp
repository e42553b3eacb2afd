#pragma once

#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "codeminer/error.hpp"
#include "codeminer/io.hpp"

namespace codeminer {

// One discussion-board posting, byte-exact as ingested.
struct RawPost {
  std::string id;
  std::string text;
  std::map<std::string, std::string> meta;

  bool operator==(const RawPost&) const = default;
};

struct RawCorpus {
  std::vector<RawPost> posts;  // input file order; all downstream determinism relies on it

  std::size_t size() const { return posts.size(); }
  bool empty() const { return posts.empty(); }

  bool operator==(const RawCorpus&) const = default;
};

enum class CorpusFormat { csv, jsonl };

namespace detail {

// RFC-4180 records: quoted fields may contain commas, quotes ("" escape) and
// line breaks. Returns one vector of fields per record plus the 1-based line
// number the record started on.
inline std::vector<std::pair<std::vector<std::string>, std::size_t>>
parse_csv(const std::string& text) {
  std::vector<std::pair<std::vector<std::string>, std::size_t>> records;
  std::vector<std::string> fields;
  std::string field;
  bool in_quotes = false;
  bool field_was_quoted = false;
  std::size_t line = 1;
  std::size_t record_line = 1;

  auto end_field = [&] {
    fields.push_back(std::move(field));
    field.clear();
    field_was_quoted = false;
  };
  auto end_record = [&] {
    end_field();
    records.emplace_back(std::move(fields), record_line);
    fields.clear();
  };

  for (std::size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        if (c == '\n') ++line;
        field += c;
      }
      continue;
    }
    switch (c) {
      case '"':
        if (!field.empty() || field_was_quoted)
          throw DataError("malformed CSV: stray quote at line " + std::to_string(line));
        in_quotes = true;
        field_was_quoted = true;
        break;
      case ',':
        end_field();
        break;
      case '\r':
        break;
      case '\n':
        end_record();
        ++line;
        record_line = line;
        break;
      default:
        field += c;
    }
  }
  if (in_quotes)
    throw DataError("malformed CSV: unterminated quoted field starting near line " +
                    std::to_string(record_line));
  if (!field.empty() || !fields.empty() || field_was_quoted) end_record();
  return records;
}

inline void check_unique_id(std::unordered_set<std::string>& seen, const std::string& id,
                            std::size_t line) {
  if (id.empty())
    throw DataError("empty post id at line " + std::to_string(line));
  if (!seen.insert(id).second)
    throw DataError("duplicate post id \"" + id + "\" at line " + std::to_string(line));
}

inline RawCorpus load_csv(const std::string& path, bool synthesize_ids) {
  auto records = parse_csv(slurp_file(path));
  if (records.empty()) throw DataError("CSV file has no header row: " + path);

  const auto& header = records.front().first;
  std::optional<std::size_t> id_col, text_col;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (header[c] == "id") id_col = c;
    else if (header[c] == "text") text_col = c;
  }
  if (!text_col) throw DataError("CSV header is missing required column \"text\": " + path);
  if (!id_col && !synthesize_ids)
    throw DataError("CSV header is missing required column \"id\": " + path);

  RawCorpus corpus;
  std::unordered_set<std::string> seen;
  for (std::size_t r = 1; r < records.size(); ++r) {
    const auto& [fields, line] = records[r];
    if (fields.size() == 1 && fields[0].empty()) continue;  // trailing blank record
    if (fields.size() != header.size())
      throw DataError("CSV row at line " + std::to_string(line) + " has " +
                      std::to_string(fields.size()) + " fields, expected " +
                      std::to_string(header.size()));
    RawPost post;
    post.id = id_col ? fields[*id_col] : "row-" + std::to_string(r);
    post.text = fields[*text_col];
    for (std::size_t c = 0; c < fields.size(); ++c) {
      if ((id_col && c == *id_col) || c == *text_col) continue;
      post.meta[header[c]] = fields[c];
    }
    check_unique_id(seen, post.id, line);
    corpus.posts.push_back(std::move(post));
  }
  return corpus;
}

inline RawCorpus load_jsonl(const std::string& path, bool synthesize_ids) {
  RawCorpus corpus;
  std::unordered_set<std::string> seen;
  auto lines = split_lines(slurp_file(path));
  std::size_t row = 0;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (trim(lines[i]).empty()) continue;
    ++row;
    const std::size_t line_no = i + 1;
    nlohmann::json obj;
    try {
      obj = nlohmann::json::parse(lines[i]);
    } catch (const nlohmann::json::exception& e) {
      throw DataError("malformed JSONL at line " + std::to_string(line_no) + ": " + e.what());
    }
    if (!obj.is_object())
      throw DataError("JSONL line " + std::to_string(line_no) + " is not an object");

    RawPost post;
    if (obj.contains("id")) {
      if (!obj["id"].is_string())
        throw DataError("JSONL line " + std::to_string(line_no) + ": \"id\" must be a string");
      post.id = obj["id"].get<std::string>();
    } else if (synthesize_ids) {
      post.id = "row-" + std::to_string(row);
    } else {
      throw DataError("JSONL line " + std::to_string(line_no) + ": missing field \"id\"");
    }
    if (!obj.contains("text") || !obj["text"].is_string())
      throw DataError("JSONL line " + std::to_string(line_no) +
                      ": missing or non-string field \"text\"");
    post.text = obj["text"].get<std::string>();
    if (obj.contains("meta")) {
      if (!obj["meta"].is_object())
        throw DataError("JSONL line " + std::to_string(line_no) + ": \"meta\" must be an object");
      for (const auto& [key, value] : obj["meta"].items()) {
        if (!value.is_string())
          throw DataError("JSONL line " + std::to_string(line_no) + ": meta value for \"" + key +
                          "\" must be a string");
        post.meta[key] = value.get<std::string>();
      }
    }
    check_unique_id(seen, post.id, line_no);
    corpus.posts.push_back(std::move(post));
  }
  return corpus;
}

}  // namespace detail

inline RawCorpus load_corpus(const std::string& path, CorpusFormat format,
                             bool synthesize_ids = false) {
  return format == CorpusFormat::csv ? detail::load_csv(path, synthesize_ids)
                                     : detail::load_jsonl(path, synthesize_ids);
}

// Guesses csv by extension, jsonl otherwise (the canonical format).
inline CorpusFormat guess_corpus_format(const std::string& path) {
  return has_suffix(path, ".csv") ? CorpusFormat::csv : CorpusFormat::jsonl;
}

// Canonical persisted form: one JSON object per line, keys sorted, so that
// load_corpus(save_corpus(c)) == c.
inline void save_corpus(const RawCorpus& corpus, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open file for writing: " + path);
  for (const RawPost& post : corpus.posts) {
    nlohmann::json obj;
    obj["id"] = post.id;
    obj["text"] = post.text;
    if (!post.meta.empty()) obj["meta"] = post.meta;
    out << obj.dump() << '\n';
  }
  if (!out) throw DataError("I/O failure writing: " + path);
}

}  // namespace codeminer
