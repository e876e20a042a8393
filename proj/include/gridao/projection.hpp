#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace gridao {

// Multivariate adjusted outlyingness by projection pursuit: a point's AO is
// the largest univariate AO of its projection onto any of a set of scoring
// directions, each direction orthogonal to a hyperplane through p sampled
// data points.

// An n x p set of finite points, rows are observations.
class PointCloud {
 public:
  PointCloud(std::size_t num_points, std::size_t dim, std::vector<double> data);

  std::size_t size() const { return num_points_; }
  std::size_t dim() const { return dim_; }
  double at(std::size_t i, std::size_t d) const { return data_[i * dim_ + d]; }
  std::span<const double> row(std::size_t i) const {
    return {data_.data() + i * dim_, dim_};
  }
  std::span<const double> data() const { return data_; }

 private:
  std::size_t num_points_;
  std::size_t dim_;
  std::vector<double> data_;
};

struct DirectionConfig {
  std::size_t num_directions = 0;  // 0 means the default of 250 * dim
  std::uint64_t seed = 42;
  int max_retries_per_direction = 100;

  std::size_t resolved(std::size_t dim) const {
    return num_directions != 0 ? num_directions : 250 * dim;
  }
};

// Unit directions, one per row.
struct DirectionSet {
  std::size_t dim = 0;
  std::vector<double> data;

  std::size_t count() const { return dim == 0 ? 0 : data.size() / dim; }
  std::span<const double> row(std::size_t i) const { return {data.data() + i * dim, dim}; }
};

// Unit normal of the hyperplane spanned by dim points (row-major dim x dim),
// sign-normalized so the entry of largest magnitude is positive. Throws
// DegenerateDataError when the points fail to span a unique hyperplane.
std::vector<double> direction_from_points(std::span<const double> points, std::size_t dim);

// Directions for scoring against the cloud, deterministic in cfg.seed. Point
// subsets are drawn by index only, so two clouds of equal size consume
// identical index sequences under the same seed.
DirectionSet generate_directions(const PointCloud& cloud, const DirectionConfig& cfg);

// AO of each query point (row-major num_queries x dim) against the cloud,
// maximised over an explicit direction set.
std::vector<double> score_with_directions(std::span<const double> queries,
                                          std::size_t num_queries, const PointCloud& cloud,
                                          const DirectionSet& directions);

// generate_directions followed by score_with_directions.
std::vector<double> batch_ao(std::span<const double> queries, std::size_t num_queries,
                             const PointCloud& cloud, const DirectionConfig& cfg);

double multivariate_ao(std::span<const double> point, const PointCloud& cloud,
                       const DirectionConfig& cfg);

}  // namespace gridao
