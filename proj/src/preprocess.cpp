#include "gridao/preprocess.hpp"

#include <string>
#include <vector>

#include "gridao/errors.hpp"

namespace gridao {

namespace {

// Derivative of a length-m line of samples at position t with unit spacing.
double line_derivative(const std::vector<double>& line, std::size_t t) {
  const std::size_t m = line.size();
  if (t == 0) return (-3.0 * line[0] + 4.0 * line[1] - line[2]) / 2.0;
  if (t == m - 1) return (line[m - 3] - 4.0 * line[m - 2] + 3.0 * line[m - 1]) / 2.0;
  return (line[t + 1] - line[t - 1]) / 2.0;
}

}  // namespace

GridFunction gradient_augment(const GridFunction& gf) {
  gf.validate();
  if (gf.channels != 1) {
    throw InvalidInputError("gradient_augment expects a single-channel observation");
  }
  if (gf.has_mask()) {
    throw InvalidInputError("gradient_augment cannot differentiate masked data; impute first");
  }
  if (gf.rows < 3 || gf.cols < 3) {
    throw GridTooSmallError("gradient_augment needs a grid of at least 3 x 3, got " +
                            std::to_string(gf.rows) + " x " + std::to_string(gf.cols));
  }

  GridFunction out;
  out.id = gf.id;
  out.rows = gf.rows;
  out.cols = gf.cols;
  out.channels = 3;
  out.values.resize(gf.rows * gf.cols * 3);

  std::vector<double> line;
  for (std::size_t r = 0; r < gf.rows; ++r) {
    for (std::size_t c = 0; c < gf.cols; ++c) {
      out.value(r, c, 0) = gf.value(r, c);
    }
  }
  line.resize(gf.rows);
  for (std::size_t c = 0; c < gf.cols; ++c) {
    for (std::size_t r = 0; r < gf.rows; ++r) line[r] = gf.value(r, c);
    for (std::size_t r = 0; r < gf.rows; ++r) out.value(r, c, 1) = line_derivative(line, r);
  }
  line.resize(gf.cols);
  for (std::size_t r = 0; r < gf.rows; ++r) {
    for (std::size_t c = 0; c < gf.cols; ++c) line[c] = gf.value(r, c);
    for (std::size_t c = 0; c < gf.cols; ++c) out.value(r, c, 2) = line_derivative(line, c);
  }
  return out;
}

FunctionalDataset gradient_augment(const FunctionalDataset& ds) {
  FunctionalDataset out;
  out.weights = ds.weights;
  out.observations.reserve(ds.size());
  for (const auto& obs : ds.observations) out.observations.push_back(gradient_augment(obs));
  return out;
}

GridFunction impute_missing(const GridFunction& gf, ImputeAxis axis) {
  gf.validate();
  GridFunction out = gf;
  out.mask.clear();
  if (!gf.has_mask()) return out;

  const bool along_cols = axis == ImputeAxis::kAlongCols;
  const std::size_t num_profiles = along_cols ? gf.rows : gf.cols;
  const std::size_t profile_len = along_cols ? gf.cols : gf.rows;

  auto masked_at = [&](std::size_t profile, std::size_t t) {
    return along_cols ? gf.is_masked(profile, t) : gf.is_masked(t, profile);
  };
  auto cell_value = [&](GridFunction& g, std::size_t profile, std::size_t t,
                        std::size_t ch) -> double& {
    return along_cols ? g.value(profile, t, ch) : g.value(t, profile, ch);
  };

  std::vector<std::size_t> observed;
  for (std::size_t profile = 0; profile < num_profiles; ++profile) {
    observed.clear();
    for (std::size_t t = 0; t < profile_len; ++t) {
      if (!masked_at(profile, t)) observed.push_back(t);
    }
    if (observed.size() == profile_len) continue;
    if (observed.size() < 2) {
      throw ImputationError("profile " + std::to_string(profile) + " of '" + gf.id + "' has " +
                                std::to_string(observed.size()) +
                                " observed cells; need at least 2 to interpolate",
                            profile);
    }
    std::size_t seg = 0;  // observed[seg] is the last observed position <= t when possible
    for (std::size_t t = 0; t < profile_len; ++t) {
      if (!masked_at(profile, t)) {
        while (seg + 1 < observed.size() && observed[seg + 1] <= t) ++seg;
        continue;
      }
      for (std::size_t ch = 0; ch < gf.channels; ++ch) {
        double filled;
        if (t < observed.front()) {
          filled = cell_value(out, profile, observed.front(), ch);
        } else if (t > observed.back()) {
          filled = cell_value(out, profile, observed.back(), ch);
        } else {
          const std::size_t t0 = observed[seg];
          const std::size_t t1 = observed[seg + 1];
          const double v0 = cell_value(out, profile, t0, ch);
          const double v1 = cell_value(out, profile, t1, ch);
          filled = v0 + (v1 - v0) * (static_cast<double>(t - t0) /
                                     static_cast<double>(t1 - t0));
        }
        cell_value(out, profile, t, ch) = filled;
      }
    }
  }
  return out;
}

FunctionalDataset impute_missing(const FunctionalDataset& ds, ImputeAxis axis) {
  FunctionalDataset out;
  out.weights = ds.weights;
  out.observations.reserve(ds.size());
  for (const auto& obs : ds.observations) out.observations.push_back(impute_missing(obs, axis));
  return out;
}

}  // namespace gridao
