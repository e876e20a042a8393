#include "gridao/robust.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numbers>
#include <string>

#include "gridao/errors.hpp"

namespace gridao {

namespace {

constexpr double kMadScale = 1.4826;

double sign_as_double(long long v) {
  if (v < 0) return -1.0;
  if (v > 0) return 1.0;
  return 0.0;
}

// Medcouple kernel for xi <= med <= xj with xi < xj. The same expression is
// used by the naive and the fast path so their results agree bit for bit.
inline double mc_kernel(double xi, double xj, double med) {
  return ((xj - med) - (med - xi)) / (xj - xi);
}

// Order statistic at 1-based fractional position h = (n-1)*q + 1, linearly
// interpolated between the neighbouring sample values.
double interpolated_quantile(std::span<const double> xs, double q) {
  const double h = static_cast<double>(xs.size() - 1) * q + 1.0;
  const double fl = std::floor(h);
  const std::size_t i = static_cast<std::size_t>(fl);  // 1-based lower index
  const double lower = xs[i - 1];
  if (h == fl) return lower;
  return lower + (h - fl) * (xs[i] - lower);
}

// Implicit matrix of medcouple kernel values. Rows walk the left candidates
// (values <= med) in descending order, columns walk the right candidates
// (values >= med) in descending order. The kernel is nondecreasing in both
// of its value arguments, so entries are nonincreasing along every row and
// down every column; pairs tied at the median get rank-based substitutes
// arranged to preserve that ordering.
class KernelMatrix {
 public:
  KernelMatrix(std::span<const double> xs, double med, std::size_t left_count,
               std::size_t right_start)
      : xs_(xs),
        med_(med),
        left_count_(left_count),
        rows_(left_count),
        cols_(xs.size() - right_start),
        ties_(static_cast<long long>(left_count - right_start)) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  double at(std::size_t i, std::size_t j) const {
    const double a = xs_[left_count_ - 1 - i];
    const double b = xs_[xs_.size() - 1 - j];
    if (a == med_ && b == med_) {
      const long long p = ties_ - static_cast<long long>(i);
      const long long q = static_cast<long long>(cols_) - static_cast<long long>(j);
      return sign_as_double(p + q - 1 - ties_);
    }
    return mc_kernel(a, b, med_);
  }

 private:
  std::span<const double> xs_;
  double med_;
  std::size_t left_count_;
  std::size_t rows_;
  std::size_t cols_;
  long long ties_;
};

// Per-row prefix counts of entries strictly greater than t, summed. The
// prefix length is nonincreasing from row to row, so one staircase pass
// costs O(rows + cols) kernel evaluations.
std::uint64_t count_greater(const KernelMatrix& m, double t, std::vector<std::size_t>& bound) {
  std::size_t j = m.cols();
  std::uint64_t total = 0;
  for (std::size_t i = 0; i < m.rows(); ++i) {
    while (j > 0 && m.at(i, j - 1) <= t) --j;
    bound[i] = j;
    total += j;
  }
  return total;
}

std::uint64_t count_greater_equal(const KernelMatrix& m, double t,
                                  std::vector<std::size_t>& bound) {
  std::size_t j = m.cols();
  std::uint64_t total = 0;
  for (std::size_t i = 0; i < m.rows(); ++i) {
    while (j > 0 && m.at(i, j - 1) < t) --j;
    bound[i] = j;
    total += j;
  }
  return total;
}

// K-th largest entry of the kernel matrix, 1-based. Candidate columns per
// row are narrowed around weighted-median pivots until few enough remain to
// select directly. Columns left of lo[i] are already known to exceed the
// target, which keeps the rank bookkeeping implicit.
double select_kth_largest(const KernelMatrix& m, std::uint64_t k) {
  const std::size_t rows = m.rows();
  std::vector<std::size_t> lo(rows, 0);
  std::vector<std::size_t> hi(rows, m.cols());
  std::vector<std::size_t> bound(rows);
  std::vector<std::pair<double, std::uint64_t>> mids;
  std::vector<double> candidates;

  for (;;) {
    std::uint64_t remaining = 0;
    std::uint64_t above = 0;
    for (std::size_t i = 0; i < rows; ++i) {
      remaining += hi[i] - lo[i];
      above += lo[i];
    }

    if (remaining <= 4096) {
      candidates.clear();
      for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t j = lo[i]; j < hi[i]; ++j) candidates.push_back(m.at(i, j));
      }
      const std::uint64_t idx = k - above - 1;
      std::nth_element(candidates.begin(), candidates.begin() + idx, candidates.end(),
                       std::greater<double>());
      return candidates[idx];
    }

    mids.clear();
    for (std::size_t i = 0; i < rows; ++i) {
      if (hi[i] > lo[i]) {
        mids.emplace_back(m.at(i, lo[i] + (hi[i] - lo[i]) / 2), hi[i] - lo[i]);
      }
    }
    std::sort(mids.begin(), mids.end(),
              [](const auto& a, const auto& b) { return a.first > b.first; });
    std::uint64_t acc = 0;
    double pivot = mids.back().first;
    for (const auto& [value, weight] : mids) {
      acc += weight;
      if (2 * acc >= remaining) {
        pivot = value;
        break;
      }
    }

    const std::uint64_t greater = count_greater(m, pivot, bound);
    if (k <= greater) {
      for (std::size_t i = 0; i < rows; ++i) hi[i] = std::clamp(bound[i], lo[i], hi[i]);
      continue;
    }
    const std::uint64_t greater_equal = count_greater_equal(m, pivot, bound);
    if (k > greater_equal) {
      for (std::size_t i = 0; i < rows; ++i) lo[i] = std::clamp(bound[i], lo[i], hi[i]);
      continue;
    }
    return pivot;  // rank k falls inside the run of entries equal to the pivot
  }
}

void require_size(const UnivariateSample& s, std::size_t n, const char* what) {
  if (s.size() < n) {
    throw InsufficientDataError(std::string(what) + " needs at least " + std::to_string(n) +
                                " values, got " + std::to_string(s.size()));
  }
}

}  // namespace

UnivariateSample::UnivariateSample(std::vector<double> values) : values_(std::move(values)) {
  if (values_.empty()) throw InsufficientDataError("sample is empty");
  for (double v : values_) {
    if (!std::isfinite(v)) throw InvalidInputError("sample contains a non-finite value");
  }
  std::sort(values_.begin(), values_.end());
}

double median_sorted(std::span<const double> xs) {
  const std::size_t n = xs.size();
  const std::size_t mid = n / 2;
  return (n % 2 == 1) ? xs[mid] : (xs[mid - 1] + xs[mid]) / 2.0;
}

std::pair<double, double> quartiles_sorted(std::span<const double> xs) {
  return {interpolated_quantile(xs, 0.25), interpolated_quantile(xs, 0.75)};
}

double medcouple_naive_sorted(std::span<const double> xs) {
  const std::size_t n = xs.size();
  const double med = median_sorted(xs);
  // Values equal to the median sit in [right_start, left_count) and belong to
  // both candidate sets.
  const std::size_t left_count = std::upper_bound(xs.begin(), xs.end(), med) - xs.begin();
  const std::size_t right_start = std::lower_bound(xs.begin(), xs.end(), med) - xs.begin();
  const long long ties = static_cast<long long>(left_count - right_start);

  std::vector<double> kernels;
  kernels.reserve(left_count * (n - right_start));
  for (std::size_t i = 0; i < left_count; ++i) {
    const double xi = xs[i];
    for (std::size_t j = right_start; j < n; ++j) {
      const double xj = xs[j];
      if (xi == med && xj == med) {
        const long long p = static_cast<long long>(i - right_start) + 1;
        const long long q = static_cast<long long>(j - right_start) + 1;
        kernels.push_back(sign_as_double(p + q - 1 - ties));
      } else {
        kernels.push_back(mc_kernel(xi, xj, med));
      }
    }
  }
  std::sort(kernels.begin(), kernels.end());
  return median_sorted(kernels);
}

double medcouple_fast_sorted(std::span<const double> xs) {
  const double med = median_sorted(xs);
  const std::size_t left_count = std::upper_bound(xs.begin(), xs.end(), med) - xs.begin();
  const std::size_t right_start = std::lower_bound(xs.begin(), xs.end(), med) - xs.begin();

  const KernelMatrix m(xs, med, left_count, right_start);
  const std::uint64_t total = static_cast<std::uint64_t>(m.rows()) * m.cols();
  if (total % 2 == 1) return select_kth_largest(m, (total + 1) / 2);
  const double a = select_kth_largest(m, total / 2);
  const double b = select_kth_largest(m, total / 2 + 1);
  return (a + b) / 2.0;
}

double medcouple_sorted(std::span<const double> xs) {
  return xs.size() <= 150 ? medcouple_naive_sorted(xs) : medcouple_fast_sorted(xs);
}

FenceWhiskers adjusted_fence_sorted(std::span<const double> xs) {
  FenceWhiskers fw;
  std::tie(fw.q1, fw.q3) = quartiles_sorted(xs);
  fw.med = median_sorted(xs);
  fw.mc = medcouple_sorted(xs);
  const double iqr = fw.q3 - fw.q1;
  if (fw.mc >= 0) {
    fw.fence_lo = fw.q1 - 1.5 * std::exp(-4.0 * fw.mc) * iqr;
    fw.fence_hi = fw.q3 + 1.5 * std::exp(3.0 * fw.mc) * iqr;
  } else {
    // Mirrored exponents for left-skewed samples, so a sample and its
    // reflection get reflected fences.
    fw.fence_lo = fw.q1 - 1.5 * std::exp(-3.0 * fw.mc) * iqr;
    fw.fence_hi = fw.q3 + 1.5 * std::exp(4.0 * fw.mc) * iqr;
  }
  const auto lo_it = std::lower_bound(xs.begin(), xs.end(), fw.fence_lo);
  const auto hi_it = std::upper_bound(xs.begin(), xs.end(), fw.fence_hi);
  // The median always lies inside the fence, so both whiskers exist.
  fw.w1 = *lo_it;
  fw.w2 = *(hi_it - 1);
  return fw;
}

double ao_against_fence(double x, const FenceWhiskers& fw) {
  if (x == fw.med) return 0.0;
  if (x > fw.med) {
    const double scale = fw.w2 - fw.med;
    if (scale > 0.0) return (x - fw.med) / scale;
    return std::numeric_limits<double>::infinity();
  }
  const double scale = fw.med - fw.w1;
  if (scale > 0.0) return (fw.med - x) / scale;
  return std::numeric_limits<double>::infinity();
}

std::pair<double, double> quartiles(const UnivariateSample& s) {
  require_size(s, 4, "quartiles");
  return quartiles_sorted(s.sorted());
}

double medcouple(const UnivariateSample& s) {
  require_size(s, 3, "medcouple");
  return medcouple_sorted(s.sorted());
}

FenceWhiskers adjusted_fence(const UnivariateSample& s) {
  require_size(s, 4, "adjusted_fence");
  return adjusted_fence_sorted(s.sorted());
}

double univariate_ao(double x, const UnivariateSample& s) {
  if (!std::isfinite(x)) throw InvalidInputError("univariate_ao: x must be finite");
  require_size(s, 4, "univariate_ao");
  return ao_against_fence(x, adjusted_fence_sorted(s.sorted()));
}

double mad(const UnivariateSample& s) {
  const double med = median_sorted(s.sorted());
  std::vector<double> dev;
  dev.reserve(s.size());
  for (double v : s.sorted()) dev.push_back(std::abs(v - med));
  std::sort(dev.begin(), dev.end());
  return kMadScale * median_sorted(dev);
}

double inverse_normal_cdf(double p) {
  if (!(p > 0.0) || !(p < 1.0)) {
    throw InvalidInputError("inverse_normal_cdf: p must lie strictly in (0, 1)");
  }

  // Acklam's rational approximation, then one Halley refinement step driven
  // by erfc, which brings the absolute error well under 1e-9.
  static constexpr double a[6] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                  -2.759285104469687e+02, 1.383577518672690e+02,
                                  -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[5] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                  -1.556989798598866e+02, 6.680131188771972e+01,
                                  -1.328068155288572e+01};
  static constexpr double c[6] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                  -2.400758277161838e+00, -2.549732539343734e+00,
                                  4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[4] = {7.784695709041462e-03, 3.224671290700398e-01,
                                  2.445134137142996e+00, 3.754408661907416e+00};
  constexpr double p_low = 0.02425;

  double x;
  if (p < p_low) {
    const double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - p_low) {
    const double q = p - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log(1.0 - p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }

  // Residual via the smaller tail, avoiding cancellation against p near 1.
  const double err = p > 0.5 ? (1.0 - p) - 0.5 * std::erfc(x / std::numbers::sqrt2)
                             : 0.5 * std::erfc(-x / std::numbers::sqrt2) - p;
  const double u = err * std::sqrt(2.0 * std::numbers::pi) * std::exp(0.5 * x * x);
  return x - u / (1.0 + 0.5 * x * u);
}

}  // namespace gridao
