#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "gridao/dataset.hpp"

namespace gridao {

// Trilinear decomposition of an n x rows x cols tensor of single-channel
// observations: value(i, j, k) is modeled as sum_f A(i,f) B(j,f) C(k,f).
// The fit is trimmed: alternating least squares runs on the h-fraction of
// observations with the smallest residuals, and that subset is re-selected
// after every pass, so grossly deviating observations cannot steer the fit.

struct TrilinearConfig {
  std::size_t num_factors = 1;  // F
  double trim_fraction = 0.75;  // h, fraction of observations kept, in (0.5, 1]
  std::size_t max_iter = 500;
  double tolerance = 1e-8;      // relative change of the trimmed loss
  std::size_t num_restarts = 5;
  std::uint64_t seed = 42;
};

struct TrilinearModel {
  Eigen::MatrixXd a;  // n x F, carries magnitudes and signs
  Eigen::MatrixXd b;  // rows x F, columns unit-norm, largest entry positive
  Eigen::MatrixXd c;  // cols x F, columns unit-norm, largest entry positive
  std::vector<std::size_t> subset;  // observations the final fit was trained on, sorted
  std::vector<double> loss_trace;   // trimmed loss after every outer iteration
  double trimmed_loss = 0;
  std::size_t iterations = 0;
  bool converged = false;  // loss change tolerance or exact-fit floor met before max_iter
  std::size_t restart_index = 0;  // which restart produced this model

  double fitted(std::size_t i, std::size_t j, std::size_t k) const {
    double s = 0.0;
    for (Eigen::Index f = 0; f < a.cols(); ++f) s += a(i, f) * b(j, f) * c(k, f);
    return s;
  }
};

TrilinearModel fit_trilinear(const FunctionalDataset& ds, const TrilinearConfig& cfg);

// Observation-wise residuals ds - fitted, same shape and ids as ds.
FunctionalDataset residuals(const FunctionalDataset& ds, const TrilinearModel& model);

}  // namespace gridao
