#pragma once

#include <algorithm>
#include <cstdint>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "codeminer/corpus.hpp"
#include "codeminer/error.hpp"
#include "codeminer/io.hpp"

namespace codeminer {

// Parameters of the shared token pipeline. All engines consume its output.
struct PreprocessConfig {
  std::string stopword_path;        // empty: no stopword removal
  std::string name_blocklist_path;  // empty: no name removal
  int min_token_len = 3;
  int max_token_len = 15;
  double max_doc_freq_fraction = 0.10;
  int min_doc_freq = 2;
  int ngram_min_count = 5;
  bool enable_ngrams = true;
};

// A post after preprocessing: surviving unigrams in order, then appended
// bigrams/trigrams joined with '_'. May be empty; ids stay aligned with posts.
struct TokenDocument {
  std::string id;
  std::vector<std::string> tokens;

  bool operator==(const TokenDocument&) const = default;
};

class Vocabulary {
 public:
  Vocabulary() = default;

  // Term order is first occurrence across the final documents, which makes
  // vocabulary indices reproducible for identical input.
  static Vocabulary build(const std::vector<TokenDocument>& docs) {
    Vocabulary v;
    for (const auto& doc : docs) {
      for (const auto& tok : doc.tokens) {
        if (v.index_.emplace(tok, static_cast<int>(v.terms_.size())).second)
          v.terms_.push_back(tok);
      }
    }
    v.doc_freq_.assign(v.terms_.size(), 0);
    std::unordered_set<int> seen;
    for (const auto& doc : docs) {
      seen.clear();
      for (const auto& tok : doc.tokens) seen.insert(v.index_.at(tok));
      for (int idx : seen) ++v.doc_freq_[static_cast<std::size_t>(idx)];
    }
    return v;
  }

  const std::vector<std::string>& terms() const { return terms_; }
  std::size_t size() const { return terms_.size(); }  // n_w

  bool contains(const std::string& term) const { return index_.count(term) != 0; }

  // -1 when absent
  int index_of(const std::string& term) const {
    auto it = index_.find(term);
    return it == index_.end() ? -1 : it->second;
  }

  long doc_freq(int index) const { return doc_freq_[static_cast<std::size_t>(index)]; }
  long doc_freq(const std::string& term) const {
    int idx = index_of(term);
    return idx < 0 ? 0 : doc_freq_[static_cast<std::size_t>(idx)];
  }

 private:
  std::vector<std::string> terms_;
  std::unordered_map<std::string, int> index_;
  std::vector<long> doc_freq_;
};

namespace detail {

// Decodes one UTF-8 codepoint; invalid bytes decode as one-byte U+FFFD so
// they act as token boundaries rather than aborting.
inline std::uint32_t decode_utf8(const std::string& s, std::size_t& i) {
  unsigned char c = static_cast<unsigned char>(s[i]);
  std::uint32_t cp = 0xFFFD;
  std::size_t len = 1;
  if (c < 0x80) {
    cp = c;
  } else if ((c >> 5) == 0x6 && i + 1 < s.size()) {
    cp = (static_cast<std::uint32_t>(c & 0x1F) << 6) |
         (static_cast<unsigned char>(s[i + 1]) & 0x3F);
    len = 2;
  } else if ((c >> 4) == 0xE && i + 2 < s.size()) {
    cp = (static_cast<std::uint32_t>(c & 0x0F) << 12) |
         ((static_cast<unsigned char>(s[i + 1]) & 0x3F) << 6) |
         (static_cast<unsigned char>(s[i + 2]) & 0x3F);
    len = 3;
  } else if ((c >> 3) == 0x1E && i + 3 < s.size()) {
    cp = (static_cast<std::uint32_t>(c & 0x07) << 18) |
         ((static_cast<unsigned char>(s[i + 1]) & 0x3F) << 12) |
         ((static_cast<unsigned char>(s[i + 2]) & 0x3F) << 6) |
         (static_cast<unsigned char>(s[i + 3]) & 0x3F);
    len = 4;
  }
  i += len;
  return cp;
}

inline void encode_utf8(std::uint32_t cp, std::string& out) {
  if (cp < 0x80) {
    out += static_cast<char>(cp);
  } else if (cp < 0x800) {
    out += static_cast<char>(0xC0 | (cp >> 6));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else if (cp < 0x10000) {
    out += static_cast<char>(0xE0 | (cp >> 12));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else {
    out += static_cast<char>(0xF0 | (cp >> 18));
    out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  }
}

// Letters of Latin, Latin-1/Extended, Greek and Cyrillic. Everything else
// (digits, punctuation, NBSP, other scripts) separates tokens.
inline bool is_alpha_cp(std::uint32_t cp) {
  if ((cp >= 'a' && cp <= 'z') || (cp >= 'A' && cp <= 'Z')) return true;
  if (cp >= 0xC0 && cp <= 0x24F) return cp != 0xD7 && cp != 0xF7;
  if (cp >= 0x386 && cp <= 0x3FF) return cp != 0x387;
  if (cp >= 0x400 && cp <= 0x4FF) return true;
  return false;
}

inline std::uint32_t lower_cp(std::uint32_t cp) {
  if (cp >= 'A' && cp <= 'Z') return cp + 0x20;
  if (cp >= 0xC0 && cp <= 0xDE && cp != 0xD7) return cp + 0x20;  // Latin-1
  if (cp >= 0x391 && cp <= 0x3A9 && cp != 0x3A2) return cp + 0x20;  // Greek
  if (cp >= 0x410 && cp <= 0x42F) return cp + 0x20;  // Cyrillic
  return cp;
}

inline std::string lowercase_utf8(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) encode_utf8(lower_cp(decode_utf8(s, i)), out);
  return out;
}

// Strict roman-numeral grammar M*(CM|CD|D?C{0,3})(XC|XL|L?X{0,3})(IX|IV|V?I{0,3}),
// whole-token match.
inline bool is_strict_roman(const std::string& s) {
  std::size_t i = 0;
  const std::size_t n = s.size();
  auto peek = [&](std::size_t off) { return i + off < n ? s[i + off] : '\0'; };

  while (peek(0) == 'M') ++i;

  if (peek(0) == 'C' && (peek(1) == 'M' || peek(1) == 'D')) {
    i += 2;
  } else {
    if (peek(0) == 'D') ++i;
    for (int k = 0; k < 3 && peek(0) == 'C'; ++k) ++i;
  }

  if (peek(0) == 'X' && (peek(1) == 'C' || peek(1) == 'L')) {
    i += 2;
  } else {
    if (peek(0) == 'L') ++i;
    for (int k = 0; k < 3 && peek(0) == 'X'; ++k) ++i;
  }

  if (peek(0) == 'I' && (peek(1) == 'X' || peek(1) == 'V')) {
    i += 2;
  } else {
    if (peek(0) == 'V') ++i;
    for (int k = 0; k < 3 && peek(0) == 'I'; ++k) ++i;
  }

  return i == n;
}

inline bool is_upper_roman_token(const std::string& run) {
  if (run.size() < 2) return false;
  for (char c : run)
    if (c < 'A' || c > 'Z') return false;
  return is_strict_roman(run);
}

inline bool is_space_cp(std::uint32_t cp) {
  return cp == ' ' || cp == '\t' || cp == '\n' || cp == '\r' || cp == 0xA0;
}

inline bool is_alnum_byte(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9');
}

inline bool starts_with_ci(const std::string& s, std::size_t pos, const char* prefix) {
  for (std::size_t k = 0; prefix[k]; ++k) {
    if (pos + k >= s.size()) return false;
    char c = s[pos + k];
    if (c >= 'A' && c <= 'Z') c += 0x20;
    if (c != prefix[k]) return false;
  }
  return true;
}

// Blanks out http(s):// and www. runs up to the next whitespace.
inline std::string strip_urls(const std::string& text) {
  std::string out;
  out.reserve(text.size());
  std::size_t i = 0;
  while (i < text.size()) {
    bool at_boundary = i == 0 || !is_alnum_byte(text[i - 1]);
    if (at_boundary && (starts_with_ci(text, i, "http://") ||
                        starts_with_ci(text, i, "https://") ||
                        starts_with_ci(text, i, "www."))) {
      while (i < text.size()) {
        std::size_t j = i;
        if (is_space_cp(decode_utf8(text, j))) break;
        i = j;
      }
      out += ' ';
      continue;
    }
    out += text[i++];
  }
  return out;
}

}  // namespace detail

// Maximal alphabetic runs, lowercased, with codepoint length inside
// [min_token_len, max_token_len]. URLs are blanked first; digits, punctuation
// and NBSP never enter a token; fully-uppercase strict roman numerals of
// length >= 2 are dropped before lowercasing.
inline std::vector<std::string> tokenize(const std::string& text,
                                         const PreprocessConfig& config = {}) {
  std::vector<std::string> tokens;
  const std::string clean = detail::strip_urls(text);

  std::string run;       // original bytes of the current alphabetic run
  std::size_t run_len = 0;  // codepoints
  auto flush = [&] {
    if (run_len >= static_cast<std::size_t>(config.min_token_len) &&
        run_len <= static_cast<std::size_t>(config.max_token_len) &&
        !detail::is_upper_roman_token(run)) {
      tokens.push_back(detail::lowercase_utf8(run));
    }
    run.clear();
    run_len = 0;
  };

  std::size_t i = 0;
  while (i < clean.size()) {
    std::size_t start = i;
    std::uint32_t cp = detail::decode_utf8(clean, i);
    if (detail::is_alpha_cp(cp)) {
      run.append(clean, start, i - start);
      ++run_len;
    } else if (run_len > 0) {
      flush();
    }
  }
  if (run_len > 0) flush();
  return tokens;
}

inline std::vector<std::string> filter_stopwords(
    const std::vector<std::string>& tokens,
    const std::unordered_set<std::string>& stopwords) {
  std::vector<std::string> out;
  out.reserve(tokens.size());
  for (const auto& tok : tokens)
    if (!stopwords.count(tok)) out.push_back(tok);
  return out;
}

// Gazetteer-based stand-in for NER: drops exact blocklisted tokens.
inline std::vector<std::string> filter_names(
    const std::vector<std::string>& tokens,
    const std::unordered_set<std::string>& blocklist) {
  return filter_stopwords(tokens, blocklist);
}

// tokens + consecutive bigrams + consecutive trigrams, '_'-joined.
inline std::vector<std::string> extend_ngrams(const std::vector<std::string>& tokens) {
  std::vector<std::string> out = tokens;
  const std::size_t n = tokens.size();
  out.reserve(n + (n > 1 ? n - 1 : 0) + (n > 2 ? n - 2 : 0));
  for (std::size_t i = 0; i + 1 < n; ++i) out.push_back(tokens[i] + "_" + tokens[i + 1]);
  for (std::size_t i = 0; i + 2 < n; ++i)
    out.push_back(tokens[i] + "_" + tokens[i + 1] + "_" + tokens[i + 2]);
  return out;
}

namespace detail {

inline bool doc_freq_in_bounds(long df, std::size_t num_docs, const PreprocessConfig& cfg) {
  if (df < cfg.min_doc_freq) return false;
  double limit = cfg.max_doc_freq_fraction * static_cast<double>(num_docs);
  return static_cast<double>(df) <= limit * (1.0 + 1e-12) + 1e-12;
}

}  // namespace detail

// Full pipeline: tokenize -> stopwords -> names -> unigram doc-frequency
// filter -> n-gram extension -> n-gram count/doc-frequency filter.
// Documents emptied by filtering are kept so ids stay aligned with posts.
inline std::pair<std::vector<TokenDocument>, Vocabulary> build_documents(
    const RawCorpus& corpus, const PreprocessConfig& config) {
  if (config.min_token_len < 1) throw ConfigError("min_token_len must be >= 1");
  if (config.max_token_len < config.min_token_len)
    throw ConfigError("max_token_len must be >= min_token_len");
  if (config.max_doc_freq_fraction <= 0.0 || config.max_doc_freq_fraction > 1.0)
    throw ConfigError("max_doc_freq_fraction must be in (0, 1]");

  std::unordered_set<std::string> stopwords, names;
  if (!config.stopword_path.empty()) stopwords = read_word_set(config.stopword_path);
  if (!config.name_blocklist_path.empty()) names = read_word_set(config.name_blocklist_path);

  const std::size_t num_docs = corpus.size();
  std::vector<std::vector<std::string>> unigrams(num_docs);
  std::unordered_map<std::string, long> uni_df;
  for (std::size_t d = 0; d < num_docs; ++d) {
    auto toks = tokenize(corpus.posts[d].text, config);
    if (!stopwords.empty()) toks = filter_stopwords(toks, stopwords);
    if (!names.empty()) toks = filter_names(toks, names);
    std::unordered_set<std::string> uniq(toks.begin(), toks.end());
    for (const auto& t : uniq) ++uni_df[t];
    unigrams[d] = std::move(toks);
  }

  for (auto& doc : unigrams) {
    std::erase_if(doc, [&](const std::string& t) {
      return !detail::doc_freq_in_bounds(uni_df.at(t), num_docs, config);
    });
  }

  std::vector<TokenDocument> docs(num_docs);
  for (std::size_t d = 0; d < num_docs; ++d) docs[d].id = corpus.posts[d].id;

  if (!config.enable_ngrams) {
    for (std::size_t d = 0; d < num_docs; ++d) docs[d].tokens = std::move(unigrams[d]);
    Vocabulary vocab = Vocabulary::build(docs);
    return {std::move(docs), std::move(vocab)};
  }

  // n-grams are generated from the already-filtered unigram sequences and get
  // their own corpus-count floor on top of the doc-frequency bounds.
  std::vector<std::vector<std::string>> grams(num_docs);
  std::unordered_map<std::string, long> gram_count, gram_df;
  for (std::size_t d = 0; d < num_docs; ++d) {
    const auto& uni = unigrams[d];
    auto extended = extend_ngrams(uni);
    grams[d].assign(extended.begin() + static_cast<std::ptrdiff_t>(uni.size()),
                    extended.end());
    std::unordered_set<std::string> uniq;
    for (const auto& g : grams[d]) {
      ++gram_count[g];
      uniq.insert(g);
    }
    for (const auto& g : uniq) ++gram_df[g];
  }

  for (std::size_t d = 0; d < num_docs; ++d) {
    docs[d].tokens = std::move(unigrams[d]);
    for (auto& g : grams[d]) {
      if (gram_count.at(g) >= config.ngram_min_count &&
          detail::doc_freq_in_bounds(gram_df.at(g), num_docs, config))
        docs[d].tokens.push_back(std::move(g));
    }
  }
  Vocabulary vocab = Vocabulary::build(docs);
  return {std::move(docs), std::move(vocab)};
}

}  // namespace codeminer
