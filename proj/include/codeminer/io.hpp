#pragma once

#include <fstream>
#include <sstream>
#include <string>
#include <unordered_set>
#include <vector>

#include <zlib.h>

#include "codeminer/error.hpp"

namespace codeminer {

inline bool has_suffix(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() &&
         s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

inline std::string slurp_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open file: " + path);
  std::ostringstream oss;
  oss << in.rdbuf();
  if (in.bad()) throw DataError("I/O error reading: " + path);
  return oss.str();
}

inline std::string slurp_gzip(const std::string& path) {
  gzFile gz = gzopen(path.c_str(), "rb");
  if (!gz) throw DataError("cannot open gzip file: " + path);
  std::string out;
  char buf[1 << 16];
  int n;
  while ((n = gzread(gz, buf, sizeof(buf))) > 0) out.append(buf, static_cast<std::size_t>(n));
  bool bad = n < 0;
  gzclose(gz);
  if (bad) throw DataError("gzip decompression failed: " + path);
  return out;
}

// Reads a whole text file, transparently inflating *.gz.
inline std::string slurp_text(const std::string& path) {
  return has_suffix(path, ".gz") ? slurp_gzip(path) : slurp_file(path);
}

inline std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string::npos) {
      if (start < text.size()) lines.push_back(text.substr(start));
      break;
    }
    std::string line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
    start = end + 1;
  }
  return lines;
}

inline std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

// One entry per line, '#' starts a comment, blank lines ignored.
inline std::vector<std::string> read_list_file(const std::string& path) {
  std::vector<std::string> entries;
  for (const std::string& raw : split_lines(slurp_file(path))) {
    std::string line = raw;
    std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (!line.empty()) entries.push_back(std::move(line));
  }
  return entries;
}

inline std::unordered_set<std::string> read_word_set(const std::string& path) {
  auto entries = read_list_file(path);
  return {entries.begin(), entries.end()};
}

}  // namespace codeminer
