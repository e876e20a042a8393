#include "gridao/dataset.hpp"

#include <cmath>
#include <string>
#include <utility>

#include "gridao/errors.hpp"

namespace gridao {

bool GridFunction::has_mask() const {
  for (std::uint8_t m : mask) {
    if (m != 0) return true;
  }
  return false;
}

void GridFunction::validate() const {
  if (rows == 0 || cols == 0 || channels == 0) {
    throw InvalidInputError("grid function '" + id + "' has a zero dimension");
  }
  if (values.size() != rows * cols * channels) {
    throw InvalidInputError("grid function '" + id + "' has " + std::to_string(values.size()) +
                            " values, expected " + std::to_string(rows * cols * channels));
  }
  if (!mask.empty() && mask.size() != rows * cols) {
    throw InvalidInputError("grid function '" + id + "' has a mask of wrong size");
  }
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      if (is_masked(r, c)) continue;
      for (std::size_t ch = 0; ch < channels; ++ch) {
        if (!std::isfinite(value(r, c, ch))) {
          throw InvalidInputError("grid function '" + id + "' has a non-finite value at (" +
                                  std::to_string(r) + ", " + std::to_string(c) + ")");
        }
      }
    }
  }
}

bool FunctionalDataset::any_mask() const {
  for (const auto& obs : observations) {
    if (obs.has_mask()) return true;
  }
  return false;
}

void FunctionalDataset::validate() const {
  if (observations.empty()) throw InsufficientDataError("dataset has no observations");
  const auto& first = observations.front();
  for (const auto& obs : observations) {
    obs.validate();
    if (obs.rows != first.rows || obs.cols != first.cols || obs.channels != first.channels) {
      throw InvalidInputError("observation '" + obs.id + "' does not match the shape of '" +
                              first.id + "'");
    }
  }
  if (weights.size() != first.rows * first.cols) {
    throw InvalidInputError("weight grid size does not match the observation grid");
  }
  double sum = 0.0;
  for (double w : weights) {
    if (!std::isfinite(w) || w < 0.0) throw InvalidInputError("weights must be finite and >= 0");
    sum += w;
  }
  if (std::abs(sum - 1.0) > 1e-12) {
    throw InvalidInputError("weights must sum to 1, got " + std::to_string(sum));
  }
}

std::vector<double> FunctionalDataset::uniform_weights(std::size_t rows, std::size_t cols) {
  return std::vector<double>(rows * cols, 1.0 / static_cast<double>(rows * cols));
}

FunctionalDataset FunctionalDataset::from_observations(std::vector<GridFunction> obs) {
  FunctionalDataset ds;
  ds.observations = std::move(obs);
  if (!ds.observations.empty()) {
    ds.weights = uniform_weights(ds.observations.front().rows, ds.observations.front().cols);
  }
  return ds;
}

}  // namespace gridao
