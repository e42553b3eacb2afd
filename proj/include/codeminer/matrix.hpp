#pragma once

#include <cstddef>
#include <vector>

namespace codeminer {

// Dense row-major matrix of doubles. Deliberately minimal; heavy linear
// algebra goes through Eigen inside lsa.hpp.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0)
      : rows(r), cols(c), data(r * c, fill) {}

  double& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  const double& at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

  double* row(std::size_t r) { return data.data() + r * cols; }
  const double* row(std::size_t r) const { return data.data() + r * cols; }

  bool empty() const { return data.empty(); }

  bool operator==(const Matrix&) const = default;
};

}  // namespace codeminer
