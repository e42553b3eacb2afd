#pragma once

#include <sstream>
#include <string>
#include <unordered_set>
#include <vector>

#include "codeminer/error.hpp"
#include "codeminer/io.hpp"
#include "codeminer/preprocess.hpp"

namespace codeminer {

// Instructor keywords, one line per intended code. Consumed by the guided LDA
// prior and by K-means centroid seeding. Multi-word keywords use the '_' join
// convention of the n-gram extension ("interleaved_practice").
struct GuidanceSpec {
  std::vector<std::vector<std::string>> lines;
  double keywords_total_probability = 0.5;
};

inline GuidanceSpec load_guidance(const std::string& path) {
  GuidanceSpec spec;
  for (const std::string& raw : split_lines(slurp_file(path))) {
    std::string line = raw;
    std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;

    std::vector<std::string> keywords;
    std::unordered_set<std::string> seen;
    std::istringstream iss(line);
    std::string word;
    while (iss >> word) {
      word = detail::lowercase_utf8(word);
      if (seen.insert(word).second) keywords.push_back(std::move(word));
    }
    spec.lines.push_back(std::move(keywords));
  }
  if (spec.lines.empty()) throw DataError("no guidance lines in " + path);
  return spec;
}

}  // namespace codeminer
