#pragma once

#include "gridao/dataset.hpp"

namespace gridao {

// Expands a single-channel observation to (value, d/drow, d/dcol) channels.
// Derivatives use second-order stencils: central differences inside,
// one-sided three-point stencils on the boundary, so quadratic surfaces are
// differentiated exactly. Requires rows >= 3 and cols >= 3.
GridFunction gradient_augment(const GridFunction& gf);

FunctionalDataset gradient_augment(const FunctionalDataset& ds);

enum class ImputeAxis {
  kAlongCols,  // interpolate each row profile across its columns
  kAlongRows,  // interpolate each column profile across its rows
};

// Fills masked cells by piecewise-linear interpolation between the observed
// cells of each profile, extending the outermost observed values to the
// border. Observed cells are copied bit for bit and the result carries no
// mask. A profile with fewer than two observed cells cannot be interpolated.
GridFunction impute_missing(const GridFunction& gf, ImputeAxis axis = ImputeAxis::kAlongCols);

FunctionalDataset impute_missing(const FunctionalDataset& ds,
                                 ImputeAxis axis = ImputeAxis::kAlongCols);

}  // namespace gridao
