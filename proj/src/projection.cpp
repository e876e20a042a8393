#include "gridao/projection.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <utility>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "gridao/errors.hpp"
#include "gridao/rng.hpp"
#include "gridao/robust.hpp"

namespace gridao {

namespace {

// A point subset is degenerate when the (dim-1) x dim matrix of differences
// loses rank: smallest singular value below 1e-12 times the largest, or all
// rows zero.
constexpr double kRankTolerance = 1e-12;

void canonicalize_sign(std::vector<double>& v) {
  std::size_t arg = 0;
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (std::abs(v[i]) > std::abs(v[arg])) arg = i;
  }
  if (v[arg] < 0.0) {
    for (double& x : v) x = -x;
  }
}

// Normal of the hyperplane through the given points, or nullopt when the
// subset is degenerate. points is row-major dim x dim.
std::optional<std::vector<double>> try_direction(std::span<const double> points,
                                                 std::size_t dim) {
  if (dim == 1) return std::vector<double>{1.0};

  if (dim == 2) {
    const double dx = points[2] - points[0];
    const double dy = points[3] - points[1];
    const double norm = std::hypot(dx, dy);
    if (norm == 0.0) return std::nullopt;
    std::vector<double> v{-dy / norm, dx / norm};
    canonicalize_sign(v);
    return v;
  }

  if (dim == 3) {
    const double ux = points[3] - points[0], uy = points[4] - points[1],
                 uz = points[5] - points[2];
    const double vx = points[6] - points[0], vy = points[7] - points[1],
                 vz = points[8] - points[2];
    // Singular values of the 2 x 3 difference matrix via its 2 x 2 Gram.
    const double g11 = ux * ux + uy * uy + uz * uz;
    const double g22 = vx * vx + vy * vy + vz * vz;
    const double g12 = ux * vx + uy * vy + uz * vz;
    const double tr = g11 + g22;
    const double disc = std::sqrt(std::max(0.0, (g11 - g22) * (g11 - g22) + 4.0 * g12 * g12));
    const double lam_max = 0.5 * (tr + disc);
    const double lam_min = std::max(0.0, 0.5 * (tr - disc));
    if (lam_max <= 0.0) return std::nullopt;
    if (std::sqrt(lam_min) < kRankTolerance * std::sqrt(lam_max)) return std::nullopt;
    const double cx = uy * vz - uz * vy;
    const double cy = uz * vx - ux * vz;
    const double cz = ux * vy - uy * vx;
    const double norm = std::sqrt(cx * cx + cy * cy + cz * cz);
    if (norm == 0.0) return std::nullopt;
    std::vector<double> v{cx / norm, cy / norm, cz / norm};
    canonicalize_sign(v);
    return v;
  }

  Eigen::MatrixXd diff(dim - 1, dim);
  for (std::size_t r = 1; r < dim; ++r) {
    for (std::size_t c = 0; c < dim; ++c) {
      diff(r - 1, c) = points[r * dim + c] - points[c];
    }
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(diff, Eigen::ComputeFullV);
  const auto& sigma = svd.singularValues();
  if (sigma(0) <= 0.0) return std::nullopt;
  if (sigma(sigma.size() - 1) < kRankTolerance * sigma(0)) return std::nullopt;
  const Eigen::VectorXd normal = svd.matrixV().col(dim - 1);
  std::vector<double> v(normal.data(), normal.data() + dim);
  const double norm = normal.norm();
  for (double& x : v) x /= norm;
  canonicalize_sign(v);
  return v;
}

inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace

PointCloud::PointCloud(std::size_t num_points, std::size_t dim, std::vector<double> data)
    : num_points_(num_points), dim_(dim), data_(std::move(data)) {
  if (dim_ == 0) throw InvalidInputError("point cloud dimension must be >= 1");
  if (data_.size() != num_points_ * dim_) {
    throw InvalidInputError("point cloud data size does not match n x p");
  }
  if (num_points_ <= dim_) {
    throw InsufficientDataError("point cloud needs more than p points to span hyperplanes");
  }
  for (double v : data_) {
    if (!std::isfinite(v)) throw InvalidInputError("point cloud contains a non-finite value");
  }
}

std::vector<double> direction_from_points(std::span<const double> points, std::size_t dim) {
  if (dim == 0 || points.size() != dim * dim) {
    throw InvalidInputError("direction_from_points expects dim x dim coordinates");
  }
  auto v = try_direction(points, dim);
  if (!v) throw DegenerateDataError("points do not span a unique hyperplane");
  return *v;
}

DirectionSet generate_directions(const PointCloud& cloud, const DirectionConfig& cfg) {
  const std::size_t p = cloud.dim();
  const std::size_t n = cloud.size();
  const std::size_t count = cfg.resolved(p);
  if (count == 0) throw InvalidInputError("direction count must be >= 1");

  DirectionSet out;
  out.dim = p;
  out.data.resize(count * p);

  if (p == 1) {
    std::fill(out.data.begin(), out.data.end(), 1.0);
    return out;
  }

  std::vector<std::size_t> idx(p);
  std::vector<double> pts(p * p);
  for (std::size_t d = 0; d < count; ++d) {
    CounterRng rng(cfg.seed, d);
    bool found = false;
    for (int attempt = 0; attempt < cfg.max_retries_per_direction && !found; ++attempt) {
      for (std::size_t t = 0; t < p; ++t) {
        std::size_t v;
        bool fresh;
        do {
          v = static_cast<std::size_t>(rng.uniform_index(n));
          fresh = true;
          for (std::size_t u = 0; u < t; ++u) {
            if (idx[u] == v) {
              fresh = false;
              break;
            }
          }
        } while (!fresh);
        idx[t] = v;
      }
      for (std::size_t t = 0; t < p; ++t) {
        const auto row = cloud.row(idx[t]);
        std::copy(row.begin(), row.end(), pts.begin() + t * p);
      }
      if (auto v = try_direction(pts, p)) {
        std::copy(v->begin(), v->end(), out.data.begin() + d * p);
        found = true;
      }
    }
    if (!found) {
      throw DegenerateDataError("no nondegenerate point subset for direction " +
                                std::to_string(d) + " after " +
                                std::to_string(cfg.max_retries_per_direction) + " retries");
    }
  }
  return out;
}

std::vector<double> score_with_directions(std::span<const double> queries,
                                          std::size_t num_queries, const PointCloud& cloud,
                                          const DirectionSet& directions) {
  const std::size_t p = cloud.dim();
  const std::size_t n = cloud.size();
  if (directions.dim != p) {
    throw InvalidInputError("direction dimension does not match the cloud");
  }
  if (directions.count() == 0) throw InvalidInputError("direction set is empty");
  if (queries.size() != num_queries * p) {
    throw InvalidInputError("query data size does not match m x p");
  }
  if (n < 4) throw InsufficientDataError("AO needs at least 4 points in the cloud");
  for (double v : queries) {
    if (!std::isfinite(v)) throw InvalidInputError("query contains a non-finite value");
  }

  std::vector<double> result(num_queries, 0.0);
  std::vector<double> proj(n);
  for (std::size_t d = 0; d < directions.count(); ++d) {
    const auto dir = directions.row(d);
    for (std::size_t i = 0; i < n; ++i) proj[i] = dot(cloud.row(i), dir);
    std::sort(proj.begin(), proj.end());
    const FenceWhiskers fence = adjusted_fence_sorted(proj);
    for (std::size_t q = 0; q < num_queries; ++q) {
      const double t = dot(queries.subspan(q * p, p), dir);
      const double ao = ao_against_fence(t, fence);
      if (ao > result[q]) result[q] = ao;
    }
  }
  return result;
}

std::vector<double> batch_ao(std::span<const double> queries, std::size_t num_queries,
                             const PointCloud& cloud, const DirectionConfig& cfg) {
  return score_with_directions(queries, num_queries, cloud,
                               generate_directions(cloud, cfg));
}

double multivariate_ao(std::span<const double> point, const PointCloud& cloud,
                       const DirectionConfig& cfg) {
  return batch_ao(point, 1, cloud, cfg).front();
}

}  // namespace gridao
