#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace crfattr {

/// Dense row-major matrix of doubles.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> v;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), v(r * c, 0.0) {}

  double* row(std::size_t r) { return v.data() + r * cols; }
  const double* row(std::size_t r) const { return v.data() + r * cols; }
  double& at(std::size_t r, std::size_t c) { return v[r * cols + c]; }
  double at(std::size_t r, std::size_t c) const { return v[r * cols + c]; }
};

/// Dense row-major matrix with entries restricted to {0, 1}.
struct BinaryMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<uint8_t> v;

  BinaryMatrix() = default;
  BinaryMatrix(std::size_t r, std::size_t c) : rows(r), cols(c), v(r * c, 0) {}

  uint8_t* row(std::size_t r) { return v.data() + r * cols; }
  const uint8_t* row(std::size_t r) const { return v.data() + r * cols; }
  uint8_t& at(std::size_t r, std::size_t c) { return v[r * cols + c]; }
  uint8_t at(std::size_t r, std::size_t c) const { return v[r * cols + c]; }
};

}  // namespace crfattr
