#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

namespace gridao {

// Quartiles, medcouple, adjusted-boxplot fence and univariate adjusted
// outlyingness (AO). AO is a robust analogue of the absolute z-score: the
// distance to the median, divided by a whisker-based scale estimated
// separately on each side of the median, so skewed samples are scored
// without symmetrizing them first.

struct FenceWhiskers {
  double q1 = 0;
  double q3 = 0;
  double med = 0;
  double mc = 0;  // medcouple, in [-1, 1]
  double fence_lo = 0;
  double fence_hi = 0;
  double w1 = 0;  // smallest sample value inside the fence
  double w2 = 0;  // largest sample value inside the fence
};

// A finite univariate sample, kept sorted.
class UnivariateSample {
 public:
  explicit UnivariateSample(std::vector<double> values);
  std::span<const double> sorted() const { return values_; }
  std::size_t size() const { return values_.size(); }

 private:
  std::vector<double> values_;
};

// Primitives on presorted data. These skip validation and are the hot path
// for per-grid-point scoring; callers guarantee ordering and finiteness.
double median_sorted(std::span<const double> xs);
std::pair<double, double> quartiles_sorted(std::span<const double> xs);
double medcouple_sorted(std::span<const double> xs);        // dispatches by size
double medcouple_naive_sorted(std::span<const double> xs);  // O(n^2) reference
double medcouple_fast_sorted(std::span<const double> xs);   // O(n log n), matches naive exactly
FenceWhiskers adjusted_fence_sorted(std::span<const double> xs);
double ao_against_fence(double x, const FenceWhiskers& fw);

// Validated interface.
std::pair<double, double> quartiles(const UnivariateSample& s);  // n >= 4
double medcouple(const UnivariateSample& s);                     // n >= 3
FenceWhiskers adjusted_fence(const UnivariateSample& s);         // n >= 4
double univariate_ao(double x, const UnivariateSample& s);       // n >= 4
double mad(const UnivariateSample& s);

// Standard normal quantile, absolute error below 1e-9 on (0, 1).
double inverse_normal_cdf(double p);

}  // namespace gridao
