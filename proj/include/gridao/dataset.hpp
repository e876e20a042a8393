#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace gridao {

// One observation: a rows x cols grid of p-channel values, optionally with a
// missing-cell mask. Missingness is whole-cell: either every channel of a
// cell is present or the cell is masked.
struct GridFunction {
  std::string id;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::size_t channels = 1;
  std::vector<double> values;      // (row, col, channel) row-major
  std::vector<std::uint8_t> mask;  // empty, or rows*cols flags with 1 = missing

  double value(std::size_t r, std::size_t c, std::size_t ch = 0) const {
    return values[(r * cols + c) * channels + ch];
  }
  double& value(std::size_t r, std::size_t c, std::size_t ch = 0) {
    return values[(r * cols + c) * channels + ch];
  }
  bool is_masked(std::size_t r, std::size_t c) const {
    return !mask.empty() && mask[r * cols + c] != 0;
  }
  bool has_mask() const;
  std::size_t cell_count() const { return rows * cols; }

  void validate() const;
};

// A collection of same-shape observations plus one grid of nonnegative cell
// weights summing to 1.
struct FunctionalDataset {
  std::vector<GridFunction> observations;
  std::vector<double> weights;

  std::size_t size() const { return observations.size(); }
  std::size_t rows() const { return observations.empty() ? 0 : observations.front().rows; }
  std::size_t cols() const { return observations.empty() ? 0 : observations.front().cols; }
  std::size_t channels() const {
    return observations.empty() ? 0 : observations.front().channels;
  }
  bool any_mask() const;

  void validate() const;

  static std::vector<double> uniform_weights(std::size_t rows, std::size_t cols);
  static FunctionalDataset from_observations(std::vector<GridFunction> obs);
};

}  // namespace gridao
