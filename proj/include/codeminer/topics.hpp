#pragma once

#include <string>
#include <vector>

namespace codeminer {

// One (term, weight) entry of an extracted topic. The weight is a signed SVD
// loading for LSA, a probability for LDA, and a cosine similarity for the
// clustering engine.
struct ScoredTerm {
  std::string term;
  double weight = 0.0;

  bool operator==(const ScoredTerm&) const = default;
};

struct Topic {
  int id = 0;
  std::vector<ScoredTerm> terms;

  bool operator==(const Topic&) const = default;
};

}  // namespace codeminer
