#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gridao/dataset.hpp"
#include "gridao/fom.hpp"

namespace gridao {

// Binary tensor container: magic "FDT1", one version byte (1), four
// little-endian u64 dimensions (n, rows, cols, channels), then
// n*rows*cols*channels doubles in (observation, row, col, channel) order.
// A missing cell is encoded as NaN in every channel; NaN in only some
// channels of a cell is rejected. Reads preserve payload bits, so reading
// and rewriting a file reproduces it byte for byte.
FunctionalDataset read_tensor(const std::filesystem::path& path);
void write_tensor(const FunctionalDataset& ds, const std::filesystem::path& path);

// Binary PNM images. P5 maps to one channel, P6 to three; rows = image
// height. ASCII variants and maxval > 255 are unsupported.
GridFunction read_image(const std::filesystem::path& path);

// All .pgm/.ppm files of a directory, ordered by file name, as one dataset.
// Needs at least 4 frames of identical shape.
FunctionalDataset read_frame_dir(const std::filesystem::path& dir);

enum class HeatmapFormat { kCsv, kPgm };

// Writes a field for display, optionally capped. The PGM rendering scales
// [0, cap] onto [0, 255] and therefore requires a cap.
void write_heatmap(const AOField& field, const std::filesystem::path& path,
                   HeatmapFormat format, std::optional<double> cap);

// CSV with header id,fao,vao,cfo,lcfo,zscore,flagged. Reals carry 17
// significant digits so they re-parse to the identical double.
void write_result_table(std::span<const FomRecord> records,
                        const std::filesystem::path& path);
std::vector<FomRecord> read_result_table(const std::filesystem::path& path);

struct CsvMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;  // row-major

  double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
};

void write_csv_matrix(const std::filesystem::path& path, std::span<const double> data,
                      std::size_t rows, std::size_t cols);
CsvMatrix read_csv_matrix(const std::filesystem::path& path);

// 17-significant-digit rendering used by every CSV writer.
std::string format_real(double v);

}  // namespace gridao
