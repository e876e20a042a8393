#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gridao/dataset.hpp"
#include "gridao/projection.hpp"

namespace gridao {

// Per-grid-point AO scoring and the functional outlier map built on top of
// it: each observation collapses to (fAO, vAO), those collapse to a combined
// score CFO, and observations whose log-scaled CFO sits far above the bulk
// get flagged.

struct AnalysisConfig {
  DirectionConfig directions;
  double ao_clamp = 1e6;          // applied to every AO value before aggregation
  double cutoff_quantile = 0.995;
  unsigned num_threads = 0;       // 0 means hardware concurrency
};

// AO of one observation at every grid point.
struct AOField {
  std::string id;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> ao;  // rows x cols, row-major

  double at(std::size_t r, std::size_t c) const { return ao[r * cols + c]; }
};

struct FomRecord {
  std::string id;
  double fao = 0;
  double vao = 0;
  double cfo = 0;
  double lcfo = 0;
  double zscore = 0;
  bool flagged = false;
};

// Statistics shared by all records of one analysis; enough to redraw the
// flagging boundary in the (fAO, vAO) plane.
struct FomCutoff {
  double med_fao = 0;
  double med_vao = 0;
  double med_lcfo = 0;
  double scale_lcfo = 0;   // MAD of LCFO, or the mean-deviation fallback
  double z_threshold = 0;  // normal quantile at the configured level
  double cfo_star = 0;     // CFO value on the flagging boundary
};

struct FomResult {
  std::vector<FomRecord> records;
  FomCutoff cutoff;
};

std::vector<AOField> ao_fields(const FunctionalDataset& ds, const AnalysisConfig& cfg);

// Weighted mean of a field; weights must match the grid and sum to 1.
double fao(const AOField& field, std::span<const double> weights);

// Unweighted population standard deviation of the field over all cells,
// divided by (1 + fao_value).
double vao(const AOField& field, double fao_value);

// Aggregation from per-observation scores. Shared by the full pipeline and
// by replotting from a saved result table.
FomResult fom_from_scores(std::span<const std::string> ids, std::span<const double> fao_values,
                          std::span<const double> vao_values, double quantile);

FomResult fom_from_fields(std::span<const AOField> fields, std::span<const double> weights,
                          double quantile);

FomResult fom(const FunctionalDataset& ds, const AnalysisConfig& cfg);

// Field values capped for display.
std::vector<double> heatmap_export(const AOField& field, std::optional<double> cap);

// The flagging boundary as a quarter ellipse in the (fAO, vAO) plane; empty
// when the analysis produced no usable cutoff.
std::vector<std::pair<double, double>> cutoff_curve(const FomCutoff& cutoff,
                                                    std::size_t segments = 257);

}  // namespace gridao
