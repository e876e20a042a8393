#pragma once

#include <cstddef>
#include <span>
#include <string>

#include "gridao/fom.hpp"

namespace gridao {

struct FomPlotOptions {
  double width = 640;
  double height = 480;
  double margin_left = 64;
  double margin_right = 20;
  double margin_top = 20;
  double margin_bottom = 48;
  std::size_t curve_segments = 257;
};

// Scatter of (fAO, vAO) per observation with the flagging boundary drawn as
// a dashed curve. Flagged observations are drawn as red squares, the rest as
// filled circles. Every marker carries data-id, data-fao and data-vao
// attributes with full-precision values so the plot stays machine-readable.
std::string render_fom_svg(std::span<const FomRecord> records, const FomCutoff& cutoff,
                           const FomPlotOptions& options = {});

// The same boundary as CSV (header fao,vao); empty curve means no rows.
std::string render_cutoff_curve_csv(const FomCutoff& cutoff, std::size_t segments = 257);

}  // namespace gridao
