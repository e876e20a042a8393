#include "gridao/fom.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <utility>

#include "gridao/errors.hpp"
#include "gridao/parallel.hpp"
#include "gridao/robust.hpp"

namespace gridao {

namespace {

double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return median_sorted(v);
}

// Ratio against a median that is zero when at least half the scores are
// zero; 0/0 counts as not outlying at all, x/0 as infinitely outlying.
double median_ratio(double v, double med) {
  if (med > 0.0) return v / med;
  return v == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
}

void check_weights(std::span<const double> weights, std::size_t cells) {
  if (weights.size() != cells) {
    throw InvalidInputError("weight grid does not match the field shape");
  }
  double sum = 0.0;
  for (double w : weights) {
    if (!std::isfinite(w) || w < 0.0) throw InvalidInputError("weights must be finite and >= 0");
    sum += w;
  }
  if (std::abs(sum - 1.0) > 1e-12) throw InvalidInputError("weights must sum to 1");
}

}  // namespace

std::vector<AOField> ao_fields(const FunctionalDataset& ds, const AnalysisConfig& cfg) {
  ds.validate();
  if (ds.any_mask()) {
    throw InvalidInputError("dataset has missing cells; impute before scoring");
  }
  const std::size_t n = ds.size();
  if (n < 4) {
    throw InsufficientDataError("AO scoring needs at least 4 observations, got " +
                                std::to_string(n));
  }
  if (!(cfg.ao_clamp > 0.0)) throw InvalidInputError("ao_clamp must be positive");

  const std::size_t rows = ds.rows();
  const std::size_t cols = ds.cols();
  const std::size_t p = ds.channels();
  const std::size_t cells = rows * cols;

  std::vector<AOField> fields(n);
  for (std::size_t i = 0; i < n; ++i) {
    fields[i].id = ds.observations[i].id;
    fields[i].rows = rows;
    fields[i].cols = cols;
    fields[i].ao.assign(cells, 0.0);
  }

  parallel_for(0, cells, cfg.num_threads, [&](std::size_t cell) {
    const std::size_t j = cell / cols;
    const std::size_t k = cell % cols;
    try {
      if (p == 1) {
        std::vector<double> vals(n);
        for (std::size_t i = 0; i < n; ++i) vals[i] = ds.observations[i].values[cell];
        std::vector<double> sorted = vals;
        std::sort(sorted.begin(), sorted.end());
        const FenceWhiskers fence = adjusted_fence_sorted(sorted);
        for (std::size_t i = 0; i < n; ++i) {
          fields[i].ao[cell] = std::min(ao_against_fence(vals[i], fence), cfg.ao_clamp);
        }
      } else {
        std::vector<double> flat(n * p);
        for (std::size_t i = 0; i < n; ++i) {
          const double* src = ds.observations[i].values.data() + cell * p;
          std::copy(src, src + p, flat.begin() + i * p);
        }
        PointCloud cloud(n, p, std::move(flat));
        const auto scores = batch_ao(cloud.data(), n, cloud, cfg.directions);
        for (std::size_t i = 0; i < n; ++i) {
          fields[i].ao[cell] = std::min(scores[i], cfg.ao_clamp);
        }
      }
    } catch (const DegenerateDataError& e) {
      throw DegenerateDataError(std::string(e.what()) + " at grid point (j=" +
                                    std::to_string(j) + ", k=" + std::to_string(k) + ")",
                                j, k);
    }
  });
  return fields;
}

double fao(const AOField& field, std::span<const double> weights) {
  check_weights(weights, field.ao.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < field.ao.size(); ++i) sum += field.ao[i] * weights[i];
  return sum;
}

double vao(const AOField& field, double fao_value) {
  if (!(fao_value >= 0.0)) throw InvalidInputError("vao: fao_value must be >= 0");
  if (field.ao.empty()) throw InvalidInputError("vao: empty field");
  const double cells = static_cast<double>(field.ao.size());
  double mean = 0.0;
  for (double a : field.ao) mean += a;
  mean /= cells;
  double var = 0.0;
  for (double a : field.ao) var += (a - mean) * (a - mean);
  var /= cells;
  return std::sqrt(var) / (1.0 + fao_value);
}

FomResult fom_from_scores(std::span<const std::string> ids, std::span<const double> fao_values,
                          std::span<const double> vao_values, double quantile) {
  const std::size_t n = ids.size();
  if (n == 0) throw InsufficientDataError("no observations to aggregate");
  if (fao_values.size() != n || vao_values.size() != n) {
    throw InvalidInputError("score vectors do not match the id list");
  }
  if (!(quantile > 0.5) || !(quantile < 1.0)) {
    throw InvalidInputError("cutoff quantile must lie in (0.5, 1)");
  }

  FomResult out;
  out.records.resize(n);
  out.cutoff.med_fao = median_of({fao_values.begin(), fao_values.end()});
  out.cutoff.med_vao = median_of({vao_values.begin(), vao_values.end()});

  std::vector<double> lcfo(n);
  for (std::size_t i = 0; i < n; ++i) {
    FomRecord& rec = out.records[i];
    rec.id = ids[i];
    rec.fao = fao_values[i];
    rec.vao = vao_values[i];
    const double cf = median_ratio(rec.fao, out.cutoff.med_fao);
    const double cv = median_ratio(rec.vao, out.cutoff.med_vao);
    rec.cfo = std::sqrt(cf * cf + cv * cv);
    rec.lcfo = std::log(0.1 + rec.cfo);
    lcfo[i] = rec.lcfo;
  }

  out.cutoff.med_lcfo = median_of(lcfo);
  std::vector<double> dev(n);
  for (std::size_t i = 0; i < n; ++i) dev[i] = std::abs(lcfo[i] - out.cutoff.med_lcfo);
  double scale = 1.4826 * median_of(dev);
  if (scale == 0.0) {
    // MAD collapses when more than half the scores coincide; fall back to
    // the mean absolute deviation before giving up on flagging.
    double mean_dev = 0.0;
    for (double d : dev) mean_dev += d;
    scale = 1.4826 * (mean_dev / static_cast<double>(n));
  }
  out.cutoff.scale_lcfo = scale;
  out.cutoff.z_threshold = inverse_normal_cdf(quantile);

  const bool usable =
      std::isfinite(out.cutoff.med_lcfo) && std::isfinite(scale) && scale > 0.0;
  if (usable) {
    for (auto& rec : out.records) {
      rec.zscore = (rec.lcfo - out.cutoff.med_lcfo) / scale;
      rec.flagged = rec.zscore > out.cutoff.z_threshold;
    }
    out.cutoff.cfo_star =
        std::exp(out.cutoff.z_threshold * scale + out.cutoff.med_lcfo) - 0.1;
  } else {
    for (auto& rec : out.records) {
      rec.zscore = 0.0;
      rec.flagged = false;
    }
    out.cutoff.cfo_star = std::numeric_limits<double>::infinity();
  }
  return out;
}

FomResult fom_from_fields(std::span<const AOField> fields, std::span<const double> weights,
                          double quantile) {
  std::vector<std::string> ids(fields.size());
  std::vector<double> fao_values(fields.size());
  std::vector<double> vao_values(fields.size());
  for (std::size_t i = 0; i < fields.size(); ++i) {
    ids[i] = fields[i].id;
    fao_values[i] = fao(fields[i], weights);
    vao_values[i] = vao(fields[i], fao_values[i]);
  }
  return fom_from_scores(ids, fao_values, vao_values, quantile);
}

FomResult fom(const FunctionalDataset& ds, const AnalysisConfig& cfg) {
  const auto fields = ao_fields(ds, cfg);
  return fom_from_fields(fields, ds.weights, cfg.cutoff_quantile);
}

std::vector<double> heatmap_export(const AOField& field, std::optional<double> cap) {
  if (cap && !(*cap > 0.0)) throw InvalidInputError("heatmap cap must be positive");
  std::vector<double> out(field.ao.size());
  for (std::size_t i = 0; i < field.ao.size(); ++i) {
    out[i] = cap ? std::min(field.ao[i], *cap) : field.ao[i];
  }
  return out;
}

std::vector<std::pair<double, double>> cutoff_curve(const FomCutoff& cutoff,
                                                    std::size_t segments) {
  std::vector<std::pair<double, double>> pts;
  if (!std::isfinite(cutoff.cfo_star) || cutoff.cfo_star <= 0.0 || cutoff.med_fao <= 0.0 ||
      cutoff.med_vao <= 0.0 || segments < 2) {
    return pts;
  }
  pts.reserve(segments);
  for (std::size_t s = 0; s < segments; ++s) {
    const double t =
        0.5 * std::numbers::pi * static_cast<double>(s) / static_cast<double>(segments - 1);
    pts.emplace_back(cutoff.med_fao * cutoff.cfo_star * std::cos(t),
                     cutoff.med_vao * cutoff.cfo_star * std::sin(t));
  }
  return pts;
}

}  // namespace gridao
