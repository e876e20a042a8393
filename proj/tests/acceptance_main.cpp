// Acceptance harness: one self-contained check per shipping criterion, each
// printing a single [PASS]/[FAIL]/[SKIP] line. Exit code 0 means every
// non-skipped criterion passed.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "gridao/dataset.hpp"
#include "gridao/errors.hpp"
#include "gridao/fom.hpp"
#include "gridao/io.hpp"
#include "gridao/preprocess.hpp"
#include "gridao/projection.hpp"
#include "gridao/robust.hpp"
#include "gridao/trilinear.hpp"
#include "test_support.hpp"

using namespace gridao;
using testsupport::Rng;

namespace {

struct Outcome {
  bool pass = true;
  bool skipped = false;
  std::vector<std::string> problems;
  std::string info;
};

void require(Outcome& o, bool cond, const std::string& msg) {
  if (cond) return;
  o.pass = false;
  if (o.problems.size() < 8) o.problems.push_back(msg);
}

std::string fmt(double v) { return format_real(v); }

std::string join_sizes(const std::set<std::size_t>& xs) {
  std::string out = "{";
  bool first = true;
  for (std::size_t x : xs) {
    if (!first) out += ",";
    out += std::to_string(x);
    first = false;
  }
  return out + "}";
}

double interpolated_quantile(std::vector<double> xs, double q) {
  std::sort(xs.begin(), xs.end());
  const double h = static_cast<double>(xs.size() - 1) * q;
  const std::size_t lo = static_cast<std::size_t>(h);
  if (lo + 1 >= xs.size()) return xs.back();
  return xs[lo] + (h - static_cast<double>(lo)) * (xs[lo + 1] - xs[lo]);
}

// ---------------------------------------------------------------- C1

Outcome c1_medcouple_oracle() {
  Outcome o;
  const auto start = std::chrono::steady_clock::now();
  Rng rng(1101);
  std::size_t tie_samples = 0;

  for (int s = 0; s < 200; ++s) {
    const std::size_t n = 4 + rng.integer(57);
    std::vector<double> xs(n);
    for (auto& x : xs) x = rng.normal() * rng.uniform(0.5, 3.0) + rng.uniform(-4.0, 4.0);
    if (s % 5 == 0) {
      // Force ties at the median, with varying multiplicity.
      std::sort(xs.begin(), xs.end());
      const std::size_t mid = n / 2;
      if (n % 2 == 0) xs[mid] = xs[mid - 1];
      const std::size_t extra = 1 + rng.integer(3);
      for (std::size_t e = 1; e <= extra; ++e) {
        if (mid + e < n) xs[mid + e] = xs[mid];
        if (mid >= e) xs[mid - e] = xs[mid];
      }
      ++tie_samples;
    }

    const double ref = testsupport::reference_medcouple(xs);
    const double got = medcouple(UnivariateSample(xs));
    require(o, got == ref,
            "sample " + std::to_string(s) + " (n=" + std::to_string(n) + "): medcouple " +
                fmt(got) + " != oracle " + fmt(ref));

    std::vector<double> sorted = xs;
    std::sort(sorted.begin(), sorted.end());
    const double fast = medcouple_fast_sorted(sorted);
    require(o, fast == ref,
            "sample " + std::to_string(s) + ": fast path " + fmt(fast) + " != oracle " + fmt(ref));
  }

  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  require(o, tie_samples >= 30,
          "only " + std::to_string(tie_samples) + " samples with median ties");
  require(o, elapsed < 5.0, "runtime " + fmt(elapsed) + " s exceeds the 5 s budget");
  o.info = "200 samples, " + std::to_string(tie_samples) + " with median ties";
  return o;
}

// ---------------------------------------------------------------- C2

Outcome c2_univariate_contract() {
  Outcome o;
  Rng rng(1202);

  for (int s = 0; s < 100; ++s) {
    const std::size_t n = 6 + rng.integer(55);
    std::vector<double> xs(n);
    for (auto& x : xs) x = rng.normal() * rng.uniform(0.5, 2.5) + rng.uniform(-3.0, 3.0);

    const UnivariateSample sample(xs);
    const FenceWhiskers fw = adjusted_fence(sample);
    require(o, fw.w1 < fw.med && fw.med < fw.w2,
            "sample " + std::to_string(s) + ": whiskers do not straddle the median");
    require(o, ao_against_fence(fw.med, fw) == 0.0,
            "sample " + std::to_string(s) + ": AO at the median is not 0");
    require(o, ao_against_fence(fw.w1, fw) == 1.0,
            "sample " + std::to_string(s) + ": AO at the lower whisker is not 1");
    require(o, ao_against_fence(fw.w2, fw) == 1.0,
            "sample " + std::to_string(s) + ": AO at the upper whisker is not 1");

    const double lo = *std::min_element(xs.begin(), xs.end());
    const double hi = *std::max_element(xs.begin(), xs.end());
    const double reach = 0.5 * (hi - lo);
    for (int side = 0; side < 2; ++side) {
      const double end = side == 0 ? hi + reach : lo - reach;
      double prev = -1.0;
      for (int g = 0; g < 50; ++g) {
        const double t = static_cast<double>(g) / 49.0;
        const double x = fw.med + t * (end - fw.med);
        const double ao = ao_against_fence(x, fw);
        require(o, ao >= prev,
                "sample " + std::to_string(s) + ": AO not monotone away from the median");
        prev = ao;
      }
    }
  }
  o.info = "100 samples, 50-point grid per side";
  return o;
}

// ---------------------------------------------------------------- C3

constexpr double kPi = 3.14159265358979323846;

DirectionSet angular_grid(std::size_t count) {
  DirectionSet set;
  set.dim = 2;
  set.data.reserve(2 * count);
  for (std::size_t i = 0; i < count; ++i) {
    const double theta = kPi * static_cast<double>(i) /
                         static_cast<double>(count);
    set.data.push_back(std::cos(theta));
    set.data.push_back(std::sin(theta));
  }
  return set;
}

Outcome c3_direction_oracle() {
  Outcome o;
  const DirectionSet grid = angular_grid(3600);
  double worst_rel = 0.0;

  // Ring-shaped clouds keep the adjusted fence clear of the extreme
  // projections in every direction, so the directional AO profile stays
  // continuous in the angle and a 500-direction sample can track the dense
  // grid. Queries sit well outside the ring so each has a broad peak.
  for (int c = 0; c < 50; ++c) {
    Rng rng(28303 + static_cast<std::uint64_t>(c) * 977);
    std::vector<double> data(30 * 2);
    for (std::size_t i = 0; i < 30; ++i) {
      const double a = rng.uniform(0.0, 2.0 * kPi);
      data[2 * i] = std::cos(a);
      data[2 * i + 1] = std::sin(a);
    }
    std::vector<double> queries(5 * 2);
    for (std::size_t q = 0; q < 5; ++q) {
      const double r = rng.uniform(4.0, 6.0);
      const double psi = rng.uniform(0.0, 2.0 * kPi);
      queries[2 * q] = r * std::cos(psi);
      queries[2 * q + 1] = r * std::sin(psi);
    }

    const PointCloud cloud(30, 2, data);
    DirectionConfig cfg;
    cfg.num_directions = 500;
    cfg.seed = 42 + static_cast<std::uint64_t>(c);
    const DirectionSet sampled = generate_directions(cloud, cfg);

    DirectionSet combined;
    combined.dim = 2;
    combined.data = grid.data;
    combined.data.insert(combined.data.end(), sampled.data.begin(), sampled.data.end());

    const auto ref = score_with_directions(queries, 5, cloud, grid);
    const auto got = score_with_directions(queries, 5, cloud, sampled);
    const auto all = score_with_directions(queries, 5, cloud, combined);

    for (std::size_t q = 0; q < 5; ++q) {
      const double rel = std::abs(got[q] - ref[q]) / ref[q];
      worst_rel = std::max(worst_rel, rel);
      require(o, rel <= 0.05,
              "cloud " + std::to_string(c) + " query " + std::to_string(q) + ": 500-direction AO " +
                  fmt(got[q]) + " deviates " + fmt(100.0 * rel) + "% from the 3600-direction grid");
      // A direction superset can only raise the maximum; each side must sit at
      // or below the combined run up to floating-point tolerance.
      const double sup = all[q] * (1.0 + 1e-12);
      require(o, got[q] <= sup && ref[q] <= sup,
              "cloud " + std::to_string(c) + " query " + std::to_string(q) +
                  ": AO exceeds its direction-superset value");
      require(o, all[q] <= std::max(got[q], ref[q]) * (1.0 + 1e-12),
              "cloud " + std::to_string(c) + " query " + std::to_string(q) +
                  ": combined maximum is not the max of its parts");
    }
  }
  o.info = "worst relative deviation " + fmt(worst_rel);
  return o;
}

// ---------------------------------------------------------------- C4

std::vector<double> random_orthogonal(std::size_t p, Rng& rng) {
  std::vector<double> q(p * p);
  for (std::size_t r = 0; r < p; ++r) {
    for (;;) {
      for (std::size_t c = 0; c < p; ++c) q[r * p + c] = rng.normal();
      for (std::size_t s = 0; s < r; ++s) {
        double dot = 0.0;
        for (std::size_t c = 0; c < p; ++c) dot += q[r * p + c] * q[s * p + c];
        for (std::size_t c = 0; c < p; ++c) q[r * p + c] -= dot * q[s * p + c];
      }
      double norm = 0.0;
      for (std::size_t c = 0; c < p; ++c) norm += q[r * p + c] * q[r * p + c];
      norm = std::sqrt(norm);
      if (norm > 1e-6) {
        for (std::size_t c = 0; c < p; ++c) q[r * p + c] /= norm;
        break;
      }
    }
  }
  return q;
}

Outcome c4_affine_invariance() {
  Outcome o;
  double worst_rel = 0.0;

  for (std::size_t p : {std::size_t{2}, std::size_t{3}}) {
    Rng trng(7000);
    const std::size_t n = 30;
    std::vector<double> data(n * p);
    for (auto& v : data) v = trng.normal();
    std::vector<double> queries(5 * p);
    for (auto& v : queries) v = trng.normal() * 2.5;

    const PointCloud cloud(n, p, data);
    DirectionConfig cfg;
    cfg.num_directions = 500;
    cfg.seed = 42;
    const auto base = batch_ao(queries, 5, cloud, cfg);

    Rng mrng(7000 ^ 0xabcdef);
    for (int m = 0; m < 50; ++m) {
      const double kappa = std::pow(10.0, mrng.uniform(0.0, 3.0));
      const auto q1 = random_orthogonal(p, mrng);
      const auto q2 = random_orthogonal(p, mrng);
      const double s = mrng.uniform(0.5, 2.0);
      std::vector<double> diag(p);
      for (std::size_t i = 0; i < p; ++i) {
        diag[i] = s * std::pow(kappa, -static_cast<double>(i) /
                                          static_cast<double>(p - 1));
      }
      std::vector<double> a(p * p, 0.0);
      for (std::size_t r = 0; r < p; ++r) {
        for (std::size_t c = 0; c < p; ++c) {
          for (std::size_t k = 0; k < p; ++k) {
            a[r * p + c] += q1[r * p + k] * diag[k] * q2[k * p + c];
          }
        }
      }
      std::vector<double> b(p);
      for (auto& v : b) v = mrng.uniform(-4.0, 4.0);

      auto apply = [&](const std::vector<double>& pts, std::size_t count) {
        std::vector<double> out(count * p);
        for (std::size_t i = 0; i < count; ++i) {
          for (std::size_t r = 0; r < p; ++r) {
            double acc = b[r];
            for (std::size_t c = 0; c < p; ++c) acc += a[r * p + c] * pts[i * p + c];
            out[i * p + r] = acc;
          }
        }
        return out;
      };

      const PointCloud mapped_cloud(n, p, apply(data, n));
      const auto mapped = batch_ao(apply(queries, 5), 5, mapped_cloud, cfg);
      for (std::size_t q = 0; q < 5; ++q) {
        const double rel = std::abs(mapped[q] - base[q]) / base[q];
        worst_rel = std::max(worst_rel, rel);
        require(o, rel < 1e-8,
                "p=" + std::to_string(p) + " map " + std::to_string(m) + " query " +
                    std::to_string(q) + ": relative AO change " + fmt(rel));
      }
    }
  }
  o.info = "worst relative change " + fmt(worst_rel) + " over 2x50 maps";
  return o;
}

// ---------------------------------------------------------------- C5 (+ data for C11)

// 50 regular surfaces (shared smooth base + unit-variance noise) plus a level
// shift, an isolated patch and a curvature flip. The noise is a 90/10 scale
// mixture of normals: heavy tails keep the per-cell fences well below the +8
// shift while spreading the regulars' vAO values, which is the regime the
// whisker-based scale is designed for.
FunctionalDataset taxonomy_dataset() {
  Rng rng(1537);
  const std::size_t rows = 20, cols = 20;
  const double tail_sd = 2.5;
  const double core_sd = std::sqrt((1.0 - 0.1 * tail_sd * tail_sd) / 0.9);
  auto noise = [&]() {
    const double sd = rng.uniform(0.0, 1.0) < 0.1 ? tail_sd : core_sd;
    return sd * rng.normal();
  };

  std::vector<double> linear(rows * cols), curve(rows * cols);
  double curve_mean = 0.0;
  for (std::size_t j = 0; j < rows; ++j) {
    for (std::size_t k = 0; k < cols; ++k) {
      const double u = (static_cast<double>(j) - 9.5) / 9.5;
      const double v = (static_cast<double>(k) - 9.5) / 9.5;
      linear[j * cols + k] = 5.0 + 0.3 * static_cast<double>(j) + 0.2 * static_cast<double>(k);
      curve[j * cols + k] = 4.0 * (u * u + v * v);
      curve_mean += curve[j * cols + k];
    }
  }
  curve_mean /= static_cast<double>(rows * cols);
  for (double& c : curve) c -= curve_mean;

  FunctionalDataset ds;
  auto add = [&](const std::string& id, double shift, double curve_sign) {
    GridFunction gf;
    gf.id = id;
    gf.rows = rows;
    gf.cols = cols;
    gf.channels = 1;
    gf.values.resize(rows * cols);
    for (std::size_t c = 0; c < rows * cols; ++c) {
      gf.values[c] = linear[c] + curve_sign * curve[c] + shift + noise();
    }
    ds.observations.push_back(std::move(gf));
  };

  for (int i = 0; i < 50; ++i) add("r" + std::to_string(i + 1), 0.0, 1.0);
  add("shift", 8.0, 1.0);
  add("isolated", 0.0, 1.0);
  add("shape", 0.0, -1.0);
  for (std::size_t j = 8; j < 11; ++j) {
    for (std::size_t k = 11; k < 14; ++k) {
      ds.observations[51].values[j * cols + k] += 10.0;
    }
  }
  ds.weights = FunctionalDataset::uniform_weights(rows, cols);
  return ds;
}

Outcome c5_taxonomy() {
  Outcome o;
  const auto start = std::chrono::steady_clock::now();
  const FunctionalDataset ds = taxonomy_dataset();

  AnalysisConfig cfg;
  const FomResult result = fom(ds, cfg);
  const FomResult again = fom(ds, cfg);
  for (std::size_t i = 0; i < result.records.size(); ++i) {
    const auto& x = result.records[i];
    const auto& y = again.records[i];
    require(o, x.fao == y.fao && x.vao == y.vao && x.zscore == y.zscore && x.flagged == y.flagged,
            "repeat run diverged at observation " + x.id);
  }

  const FomRecord* shift = nullptr;
  const FomRecord* isolated = nullptr;
  const FomRecord* shape = nullptr;
  std::size_t false_positives = 0;
  std::vector<double> all_vao;
  double regular_vao_max = 0.0;
  for (const auto& rec : result.records) {
    all_vao.push_back(rec.vao);
    if (rec.id == "shift") {
      shift = &rec;
    } else if (rec.id == "isolated") {
      isolated = &rec;
    } else if (rec.id == "shape") {
      shape = &rec;
    } else {
      if (rec.flagged) ++false_positives;
      regular_vao_max = std::max(regular_vao_max, rec.vao);
    }
  }

  require(o, shift->flagged, "shift outlier not flagged (zscore " + fmt(shift->zscore) + ")");
  require(o, isolated->flagged,
          "isolated outlier not flagged (zscore " + fmt(isolated->zscore) + ")");
  require(o, shape->flagged, "shape outlier not flagged (zscore " + fmt(shape->zscore) + ")");
  require(o, false_positives <= 2,
          std::to_string(false_positives) + " regular surfaces flagged");
  require(o, shift->fao > isolated->fao && shift->fao > shape->fao,
          "shift fAO " + fmt(shift->fao) + " is not the largest of the three");
  require(o, shift->vao < interpolated_quantile(all_vao, 0.9),
          "shift vAO " + fmt(shift->vao) + " is not below the 90th percentile");
  require(o, isolated->fao < shift->fao, "isolated fAO is not below the shift fAO");
  require(o, isolated->vao > regular_vao_max,
          "isolated vAO " + fmt(isolated->vao) + " does not exceed the regulars' max " +
              fmt(regular_vao_max));

  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  require(o, elapsed < 60.0, "runtime " + fmt(elapsed) + " s exceeds the 60 s budget");
  o.info = "fAO shift/isolated/shape = " + fmt(shift->fao) + "/" + fmt(isolated->fao) + "/" +
           fmt(shape->fao) + ", false positives " + std::to_string(false_positives);
  return o;
}

// ---------------------------------------------------------------- C6

Outcome c6_video_localization() {
  Outcome o;
  const auto start = std::chrono::steady_clock::now();
  const std::size_t rows = 48, cols = 64;
  Rng rng(1606);

  auto blob_origin = [](std::size_t frame_1based) {
    const std::size_t step = frame_1based - 40;
    return std::pair<std::size_t, std::size_t>{4 + step, 6 + 2 * step};
  };

  FunctionalDataset ds;
  for (std::size_t f = 1; f <= 100; ++f) {
    GridFunction gf;
    gf.id = std::to_string(f);
    gf.rows = rows;
    gf.cols = cols;
    gf.channels = 3;
    gf.values.resize(rows * cols * 3);
    for (std::size_t j = 0; j < rows; ++j) {
      for (std::size_t k = 0; k < cols; ++k) {
        for (std::size_t c = 0; c < 3; ++c) {
          const double texture =
              128.0 +
              55.0 * std::sin((static_cast<double>(j) + 5.0 * static_cast<double>(c)) / 4.0) *
                  std::cos((static_cast<double>(k) + 3.0 * static_cast<double>(c)) / 6.0) +
              20.0 * std::sin(static_cast<double>(k) / 9.0 + static_cast<double>(c));
          gf.values[(j * cols + k) * 3 + c] = texture + 3.0 * rng.normal();
        }
      }
    }
    if (f >= 40 && f <= 60) {
      const auto [j0, k0] = blob_origin(f);
      for (std::size_t j = j0; j < j0 + 8; ++j) {
        for (std::size_t k = k0; k < k0 + 8; ++k) {
          gf.value(j, k, 0) = 240.0 + rng.normal();
          gf.value(j, k, 1) = 12.0 + rng.normal();
          gf.value(j, k, 2) = 12.0 + rng.normal();
        }
      }
    }
    ds.observations.push_back(std::move(gf));
  }
  ds.weights = FunctionalDataset::uniform_weights(rows, cols);

  AnalysisConfig cfg;
  cfg.directions.num_directions = 250;
  const auto fields = ao_fields(ds, cfg);
  std::vector<std::string> ids;
  std::vector<double> faos, vaos;
  for (const auto& field : fields) {
    ids.push_back(field.id);
    const double f = fao(field, ds.weights);
    faos.push_back(f);
    vaos.push_back(vao(field, f));
  }
  const FomResult result = fom_from_scores(ids, faos, vaos, cfg.cutoff_quantile);

  std::set<std::size_t> flagged;
  for (const auto& rec : result.records) {
    if (rec.flagged) flagged.insert(std::stoul(rec.id));
  }
  std::set<std::size_t> missing, outside;
  for (std::size_t f = 41; f <= 59; ++f) {
    if (!flagged.count(f)) missing.insert(f);
  }
  for (std::size_t f : flagged) {
    if (f < 40 || f > 60) outside.insert(f);
  }
  require(o, missing.empty(), "blob frames not flagged: " + join_sizes(missing));
  require(o, outside.size() <= 3,
          std::to_string(outside.size()) + " false positives: " + join_sizes(outside));

  for (std::size_t f = 45; f <= 55; ++f) {
    const AOField& field = fields[f - 1];
    const auto it = std::max_element(field.ao.begin(), field.ao.end());
    const std::size_t flat = static_cast<std::size_t>(it - field.ao.begin());
    const std::size_t ja = flat / cols, ka = flat % cols;
    const auto [j0, k0] = blob_origin(f);
    const bool inside = ja + 2 >= j0 && ja <= j0 + 9 && ka + 2 >= k0 && ka <= k0 + 9;
    require(o, inside,
            "frame " + std::to_string(f) + ": heatmap peak at (" + std::to_string(ja) + "," +
                std::to_string(ka) + ") outside the dilated blob box at (" + std::to_string(j0) +
                "," + std::to_string(k0) + ")");
  }

  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  require(o, elapsed < 120.0, "runtime " + fmt(elapsed) + " s exceeds the 120 s budget");
  o.info = std::to_string(flagged.size()) + " frames flagged, " +
           std::to_string(outside.size()) + " outside 40-60";
  return o;
}

// ---------------------------------------------------------------- C7

Outcome c7_gradient_exactness() {
  Outcome o;
  Rng rng(1707);
  double worst = 0.0;

  for (int s = 0; s < 20; ++s) {
    const double alpha = rng.uniform(-3.0, 3.0);
    const double beta = rng.uniform(-3.0, 3.0);
    const double gamma = rng.uniform(-3.0, 3.0);
    const double delta = rng.uniform(-3.0, 3.0);
    const double eps = rng.uniform(-3.0, 3.0);

    for (const auto& [rows, cols] : {std::pair<std::size_t, std::size_t>{3, 3},
                                     std::pair<std::size_t, std::size_t>{12, 17}}) {
      GridFunction gf;
      gf.id = "poly";
      gf.rows = rows;
      gf.cols = cols;
      gf.channels = 1;
      gf.values.resize(rows * cols);
      for (std::size_t j = 0; j < rows; ++j) {
        for (std::size_t k = 0; k < cols; ++k) {
          const double jj = static_cast<double>(j), kk = static_cast<double>(k);
          gf.values[j * cols + k] = alpha + beta * jj + gamma * kk + delta * jj * jj +
                                    eps * kk * kk;
        }
      }
      const GridFunction aug = gradient_augment(gf);
      for (std::size_t j = 0; j < rows; ++j) {
        for (std::size_t k = 0; k < cols; ++k) {
          const double jj = static_cast<double>(j), kk = static_cast<double>(k);
          const double ej = std::abs(aug.value(j, k, 1) - (beta + 2.0 * delta * jj));
          const double ek = std::abs(aug.value(j, k, 2) - (gamma + 2.0 * eps * kk));
          worst = std::max({worst, ej, ek});
          require(o, ej <= 1e-10 && ek <= 1e-10,
                  "set " + std::to_string(s) + " pixel (" + std::to_string(j) + "," +
                      std::to_string(k) + "): derivative error " + fmt(std::max(ej, ek)));
          require(o, aug.value(j, k, 0) == gf.value(j, k),
                  "value channel was altered at (" + std::to_string(j) + "," +
                      std::to_string(k) + ")");
        }
      }
    }
  }
  o.info = "worst derivative error " + fmt(worst);
  return o;
}

// ---------------------------------------------------------------- C8 / C9

struct TrilinearRuns {
  Outcome fit;  // criterion 8
  std::vector<std::vector<double>> traces;
  std::vector<double> trace_floors;  // absolute slack per trace
};

TrilinearRuns run_trilinear_criteria() {
  TrilinearRuns runs;
  Outcome& o = runs.fit;
  Rng rng(1808);

  const std::size_t n = 30, rows = 15, cols = 25, rank = 3;
  std::vector<double> fa(n * rank), fb(rows * rank), fc(cols * rank);
  for (auto& v : fa) v = rng.normal();
  for (auto& v : fb) v = rng.normal();
  for (auto& v : fc) v = rng.normal();

  FunctionalDataset clean;
  double norm_sq = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    GridFunction gf;
    gf.id = std::to_string(i + 1);
    gf.rows = rows;
    gf.cols = cols;
    gf.channels = 1;
    gf.values.resize(rows * cols);
    for (std::size_t j = 0; j < rows; ++j) {
      for (std::size_t k = 0; k < cols; ++k) {
        double s = 0.0;
        for (std::size_t f = 0; f < rank; ++f) {
          s += fa[i * rank + f] * fb[j * rank + f] * fc[k * rank + f];
        }
        gf.values[j * cols + k] = s;
        norm_sq += s * s;
      }
    }
    clean.observations.push_back(std::move(gf));
  }
  clean.weights = FunctionalDataset::uniform_weights(rows, cols);
  const double floor_slack = 1e-28 * norm_sq;

  TrilinearConfig cfg;
  cfg.num_factors = 3;
  cfg.trim_fraction = 1.0;
  const TrilinearModel exact = fit_trilinear(clean, cfg);
  runs.traces.push_back(exact.loss_trace);
  runs.trace_floors.push_back(floor_slack);

  double resid_sq = 0.0;
  const FunctionalDataset exact_res = residuals(clean, exact);
  for (const auto& obs : exact_res.observations) {
    for (double v : obs.values) resid_sq += v * v;
  }
  const double rel = std::sqrt(resid_sq / norm_sq);
  require(o, rel < 1e-8, "exact rank-3 fit leaves relative residual " + fmt(rel));

  const std::set<std::size_t> corrupted = {3, 7, 12, 18, 24, 29};
  FunctionalDataset dirty = clean;
  for (std::size_t i : corrupted) {
    for (double& v : dirty.observations[i].values) v = rng.uniform(-20.0, 20.0);
  }

  int good = 0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    TrilinearConfig tcfg;
    tcfg.num_factors = 3;
    tcfg.trim_fraction = 0.75;
    tcfg.seed = seed;
    const TrilinearModel model = fit_trilinear(dirty, tcfg);
    runs.traces.push_back(model.loss_trace);
    runs.trace_floors.push_back(floor_slack);

    bool excluded_all = true;
    for (std::size_t i : model.subset) {
      if (corrupted.count(i)) excluded_all = false;
    }
    double clean_sq = 0.0;
    std::size_t clean_cells = 0;
    const FunctionalDataset res = residuals(dirty, model);
    for (std::size_t i = 0; i < n; ++i) {
      if (corrupted.count(i)) continue;
      for (double v : res.observations[i].values) clean_sq += v * v;
      clean_cells += rows * cols;
    }
    const double clean_rms = std::sqrt(clean_sq / static_cast<double>(clean_cells));
    if (excluded_all && clean_rms < 1e-6) ++good;
  }
  require(o, good >= 4,
          "only " + std::to_string(good) + " of 5 seeded fits isolated the corrupted third");
  o.info = "exact-fit relative residual " + fmt(rel) + ", trimmed success " +
           std::to_string(good) + "/5";
  return runs;
}

Outcome c9_monotone_loss(const TrilinearRuns& runs) {
  Outcome o;
  require(o, runs.traces.size() == 6, "expected 6 recorded fits, found " +
                                          std::to_string(runs.traces.size()));
  std::size_t iterations = 0;
  for (std::size_t t = 0; t < runs.traces.size(); ++t) {
    const auto& trace = runs.traces[t];
    iterations += trace.size();
    for (std::size_t i = 1; i < trace.size(); ++i) {
      // Relative slack per the criterion; absolute slack covers round-off
      // once a trace has already collapsed onto an exact fit.
      const bool ok = trace[i] <= trace[i - 1] * (1.0 + 1e-12) + runs.trace_floors[t];
      require(o, ok,
              "run " + std::to_string(t) + " iteration " + std::to_string(i) + ": loss rose " +
                  fmt(trace[i - 1]) + " -> " + fmt(trace[i]));
    }
  }
  o.info = std::to_string(runs.traces.size()) + " runs, " + std::to_string(iterations) +
           " recorded iterations";
  return o;
}

// ---------------------------------------------------------------- C10

Outcome c10_null_flags() {
  Outcome o;
  Rng rng(2910);
  std::size_t total_flags = 0;

  for (int d = 0; d < 20; ++d) {
    FunctionalDataset ds;
    for (int i = 0; i < 50; ++i) {
      GridFunction gf;
      gf.id = std::to_string(i + 1);
      gf.rows = 15;
      gf.cols = 15;
      gf.channels = 1;
      gf.values.resize(225);
      for (auto& v : gf.values) v = rng.normal();
      ds.observations.push_back(std::move(gf));
    }
    ds.weights = FunctionalDataset::uniform_weights(15, 15);
    const FomResult result = fom(ds, AnalysisConfig{});
    for (const auto& rec : result.records) {
      if (rec.flagged) ++total_flags;
    }
  }
  const double mean_flags = static_cast<double>(total_flags) / 20.0;
  require(o, mean_flags <= 1.5, "mean flags per null dataset is " + fmt(mean_flags));
  o.info = "mean flags " + fmt(mean_flags) + " over 20 pure-noise datasets";
  return o;
}

// ---------------------------------------------------------------- C11

std::string file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

Outcome c11_determinism_roundtrips() {
  Outcome o;
  testsupport::TempDir tmp("gridao-acceptance");
  const FunctionalDataset ds = taxonomy_dataset();

  AnalysisConfig one;
  one.num_threads = 1;
  AnalysisConfig many;
  many.num_threads = std::max(8u, std::thread::hardware_concurrency());
  const FomResult r1 = fom(ds, one);
  const FomResult rn = fom(ds, many);
  write_result_table(r1.records, tmp.file("one.csv"));
  write_result_table(rn.records, tmp.file("many.csv"));
  require(o, file_bytes(tmp.file("one.csv")) == file_bytes(tmp.file("many.csv")),
          "result tables differ between 1 thread and " + std::to_string(many.num_threads) +
              " threads");

  write_tensor(ds, tmp.file("a.fdt"));
  const FunctionalDataset back = read_tensor(tmp.file("a.fdt"));
  write_tensor(back, tmp.file("b.fdt"));
  require(o, file_bytes(tmp.file("a.fdt")) == file_bytes(tmp.file("b.fdt")),
          "tensor read/write round trip changed the file bytes");
  bool values_equal = back.size() == ds.size();
  for (std::size_t i = 0; values_equal && i < ds.size(); ++i) {
    values_equal = back.observations[i].values == ds.observations[i].values;
  }
  require(o, values_equal, "tensor round trip changed cell values");

  {
    std::string bytes = "P5\n2 2\n255\n";
    for (unsigned char c : {0, 255, 128, 64}) bytes.push_back(static_cast<char>(c));
    std::ofstream out(tmp.file("f.pgm"), std::ios::binary);
    out << bytes;
    out.close();
    const GridFunction img = read_image(tmp.file("f.pgm"));
    require(o,
            img.rows == 2 && img.cols == 2 && img.channels == 1 && img.value(0, 0) == 0.0 &&
                img.value(0, 1) == 255.0 && img.value(1, 0) == 128.0 && img.value(1, 1) == 64.0,
            "grayscale fixture bytes were not mapped 1:1");
  }
  {
    std::string bytes = "P6\n2 1\n255\n";
    for (unsigned char c : {10, 20, 30, 40, 50, 60}) bytes.push_back(static_cast<char>(c));
    std::ofstream out(tmp.file("f.ppm"), std::ios::binary);
    out << bytes;
    out.close();
    const GridFunction img = read_image(tmp.file("f.ppm"));
    require(o,
            img.channels == 3 && img.value(0, 0, 0) == 10.0 && img.value(0, 0, 1) == 20.0 &&
                img.value(0, 0, 2) == 30.0 && img.value(0, 1, 0) == 40.0 &&
                img.value(0, 1, 2) == 60.0,
            "color fixture bytes were not mapped 1:1 in R,G,B order");
  }
  {
    AOField field;
    field.rows = 1;
    field.cols = 4;
    field.ao = {0.0, 4.0, 8.0, 16.0};
    write_heatmap(field, tmp.file("h.pgm"), HeatmapFormat::kPgm, 8.0);
    std::string expected = "P5\n4 1\n255\n";
    for (unsigned char c : {0, 128, 255, 255}) expected.push_back(static_cast<char>(c));
    require(o, file_bytes(tmp.file("h.pgm")) == expected,
            "heatmap writer bytes deviate from the fixture");
  }
  o.info = "thread counts 1 vs " + std::to_string(many.num_threads) +
           ", tensor and image fixtures byte-exact";
  return o;
}

// ---------------------------------------------------------------- C12 (optional, external data)

std::set<std::size_t> flagged_positions(const FomResult& result) {
  std::set<std::size_t> out;
  for (std::size_t i = 0; i < result.records.size(); ++i) {
    if (result.records[i].flagged) out.insert(i + 1);
  }
  return out;
}

std::size_t symmetric_difference_size(const std::set<std::size_t>& a,
                                      const std::set<std::size_t>& b) {
  std::vector<std::size_t> diff;
  std::set_symmetric_difference(a.begin(), a.end(), b.begin(), b.end(),
                                std::back_inserter(diff));
  return diff.size();
}

Outcome c12_external_data() {
  Outcome o;
  const char* dorrit = std::getenv("GRIDAO_DORRIT_FDT");
  const char* beach = std::getenv("GRIDAO_BEACH_DIR");
  if (!dorrit && !beach) {
    o.skipped = true;
    o.info = "set GRIDAO_DORRIT_FDT and/or GRIDAO_BEACH_DIR to run";
    return o;
  }

  if (dorrit) {
    const FunctionalDataset ds = read_tensor(dorrit);
    require(o, ds.size() == 27, "expected 27 observations, found " + std::to_string(ds.size()));

    const FomResult raw = fom(ds, AnalysisConfig{});
    const auto raw_flags = flagged_positions(raw);
    require(o, symmetric_difference_size(raw_flags, {3, 5}) <= 1,
            "raw flags " + join_sizes(raw_flags) + " deviate from {3,5} by more than 1");

    TrilinearConfig tcfg;
    tcfg.num_factors = 4;
    tcfg.trim_fraction = 0.75;
    const TrilinearModel model = fit_trilinear(ds, tcfg);
    const FomResult res = fom(residuals(ds, model), AnalysisConfig{});
    const auto res_flags = flagged_positions(res);
    require(o, symmetric_difference_size(res_flags, {2, 3, 5}) <= 1,
            "residual flags " + join_sizes(res_flags) + " deviate from {2,3,5} by more than 1");
    o.info += "raw flags " + join_sizes(raw_flags) + ", residual flags " + join_sizes(res_flags);
  }

  if (beach) {
    const FunctionalDataset frames = read_frame_dir(beach);
    AnalysisConfig cfg;
    cfg.directions.num_directions = 150;
    const FomResult result = fom(frames, cfg);
    const auto flags = flagged_positions(result);

    std::size_t early = 0;
    for (std::size_t f : flags) {
      if (f <= 480) ++early;
    }
    std::size_t hits = 0;
    for (std::size_t f = 484; f <= 487; ++f) {
      if (flags.count(f)) ++hits;
    }
    require(o, early <= 1, std::to_string(early) + " of the first 480 frames flagged");
    require(o, hits >= 3, "only " + std::to_string(hits) + " of frames 484-487 flagged");
    if (!o.info.empty()) o.info += "; ";
    o.info += "beach flags " + join_sizes(flags);
  }
  return o;
}

}  // namespace

int main() {
  struct Entry {
    std::string label;
    Outcome outcome;
    double seconds = 0.0;
  };
  std::vector<Entry> entries;

  TrilinearRuns trilinear_runs;
  const auto timed = [&](const std::string& label, auto&& fn) {
    Entry e;
    e.label = label;
    const auto start = std::chrono::steady_clock::now();
    try {
      e.outcome = fn();
    } catch (const std::exception& ex) {
      e.outcome.pass = false;
      e.outcome.problems.push_back(std::string("exception: ") + ex.what());
    }
    e.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    entries.push_back(std::move(e));
  };

  timed("C1: medcouple equals the pairwise kernel-median oracle", c1_medcouple_oracle);
  timed("C2: univariate AO anchors and one-sided monotonicity", c2_univariate_contract);
  timed("C3: sampled directions track a dense angular grid", c3_direction_oracle);
  timed("C4: AO is invariant under affine maps of the data", c4_affine_invariance);
  timed("C5: taxonomy surfaces are flagged and ordered correctly", c5_taxonomy);
  timed("C6: video frames with a moving blob are flagged and localized", c6_video_localization);
  timed("C7: gradient stencils are exact on quadratic surfaces", c7_gradient_exactness);
  timed("C8: trimmed trilinear fit recovers exact and contaminated tensors", [&] {
    trilinear_runs = run_trilinear_criteria();
    return trilinear_runs.fit;
  });
  timed("C9: trimmed ALS loss never increases", [&] { return c9_monotone_loss(trilinear_runs); });
  timed("C10: pure-noise datasets stay essentially unflagged", c10_null_flags);
  timed("C11: thread-count determinism and byte-exact formats", c11_determinism_roundtrips);
  timed("C12: reference datasets reproduce published flag sets", c12_external_data);

  bool all_pass = true;
  for (const auto& e : entries) {
    const char* tag = e.outcome.skipped ? "[SKIP]" : (e.outcome.pass ? "[PASS]" : "[FAIL]");
    if (!e.outcome.skipped && !e.outcome.pass) all_pass = false;
    std::printf("%s %s", tag, e.label.c_str());
    if (!e.outcome.info.empty()) std::printf(" - %s", e.outcome.info.c_str());
    std::printf(" (%.2f s)\n", e.seconds);
    for (const auto& p : e.outcome.problems) std::printf("       %s\n", p.c_str());
  }
  std::printf("%s\n", all_pass ? "acceptance: all criteria passed"
                               : "acceptance: FAILURES above");
  return all_pass ? 0 : 1;
}
