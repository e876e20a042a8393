#include "gridao/io.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>
#include <utility>

#include "gridao/errors.hpp"

namespace gridao {

namespace {

constexpr char kMagic[4] = {'F', 'D', 'T', '1'};
constexpr std::uint8_t kVersion = 1;
constexpr std::size_t kHeaderSize = 4 + 1 + 4 * 8;

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open '" + path.string() + "' for reading");
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw FormatError("read failure on '" + path.string() + "'");
  return std::move(buf).str();
}

void write_file(const std::filesystem::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("cannot open '" + path.string() + "' for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  out.flush();
  if (!out) throw FormatError("write failure on '" + path.string() + "'");
}

std::uint64_t load_u64le(const unsigned char* p) {
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | p[i];
  return v;
}

void store_u64le(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) {
    out.push_back(static_cast<char>(v & 0xff));
    v >>= 8;
  }
}

void store_f64le(std::string& out, double d) {
  store_u64le(out, std::bit_cast<std::uint64_t>(d));
}

double load_f64le(const unsigned char* p) {
  return std::bit_cast<double>(load_u64le(p));
}

bool ends_with_icase(const std::string& name, const std::string& suffix) {
  if (name.size() < suffix.size()) return false;
  for (std::size_t i = 0; i < suffix.size(); ++i) {
    const char a = static_cast<char>(std::tolower(static_cast<unsigned char>(
        name[name.size() - suffix.size() + i])));
    if (a != suffix[i]) return false;
  }
  return true;
}

double parse_real(const std::string& field, const std::filesystem::path& path,
                  std::size_t line_no) {
  const char* begin = field.c_str();
  char* end = nullptr;
  const double v = std::strtod(begin, &end);
  if (end == begin || *end != '\0') {
    throw FormatError("'" + path.string() + "' line " + std::to_string(line_no) +
                      ": cannot parse real '" + field + "'");
  }
  return v;
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  for (;;) {
    const std::size_t pos = line.find(',', start);
    if (pos == std::string::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t pos = text.find('\n', start);
    if (pos == std::string::npos) pos = text.size();
    lines.push_back(text.substr(start, pos - start));
    start = pos + 1;
  }
  return lines;
}

void check_id_writable(const std::string& id) {
  if (id.find_first_of(",\"\r\n") != std::string::npos) {
    throw InvalidInputError("id '" + id + "' contains characters unsupported in CSV output");
  }
}

}  // namespace

std::string format_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

FunctionalDataset read_tensor(const std::filesystem::path& path) {
  const std::string bytes = read_file(path);
  const auto* data = reinterpret_cast<const unsigned char*>(bytes.data());

  if (bytes.size() < kHeaderSize) {
    throw FormatError("'" + path.string() + "': truncated header", bytes.size());
  }
  if (!std::equal(kMagic, kMagic + 4, bytes.data())) {
    throw FormatError("'" + path.string() + "': bad magic, not a tensor file", 0);
  }
  if (data[4] != kVersion) {
    throw FormatError("'" + path.string() + "': unsupported version " +
                          std::to_string(static_cast<int>(data[4])),
                      4);
  }

  std::uint64_t dims[4];
  for (int i = 0; i < 4; ++i) {
    dims[i] = load_u64le(data + 5 + 8 * i);
    if (dims[i] == 0) {
      throw FormatError("'" + path.string() + "': dimension " + std::to_string(i) + " is zero",
                        5 + 8 * static_cast<std::uint64_t>(i));
    }
  }
  const std::uint64_t n = dims[0], rows = dims[1], cols = dims[2], channels = dims[3];
  const unsigned __int128 total =
      static_cast<unsigned __int128>(n) * rows * cols * channels;
  if (total > (static_cast<unsigned __int128>(1) << 56)) {
    throw FormatError("'" + path.string() + "': dimensions overflow a plausible payload", 5);
  }
  const std::uint64_t payload = static_cast<std::uint64_t>(total) * 8;
  if (bytes.size() < kHeaderSize + payload) {
    throw FormatError("'" + path.string() + "': truncated payload", bytes.size());
  }
  if (bytes.size() > kHeaderSize + payload) {
    throw FormatError("'" + path.string() + "': trailing bytes after payload",
                      kHeaderSize + payload);
  }

  FunctionalDataset ds;
  ds.observations.resize(n);
  const std::size_t cell_doubles = channels;
  for (std::uint64_t i = 0; i < n; ++i) {
    GridFunction& gf = ds.observations[i];
    gf.id = std::to_string(i + 1);
    gf.rows = rows;
    gf.cols = cols;
    gf.channels = channels;
    gf.values.resize(rows * cols * channels);
    bool any_missing = false;
    std::vector<std::uint8_t> mask(rows * cols, 0);
    for (std::uint64_t cell = 0; cell < rows * cols; ++cell) {
      const std::uint64_t cell_index = i * rows * cols + cell;
      const unsigned char* src = data + kHeaderSize + cell_index * cell_doubles * 8;
      std::size_t nan_count = 0;
      for (std::size_t ch = 0; ch < channels; ++ch) {
        const double v = load_f64le(src + ch * 8);
        if (std::isinf(v)) {
          throw FormatError("'" + path.string() + "': infinite value in payload",
                            kHeaderSize + (cell_index * cell_doubles + ch) * 8);
        }
        gf.values[cell * channels + ch] = v;
        if (std::isnan(v)) ++nan_count;
      }
      if (nan_count == channels) {
        mask[cell] = 1;
        any_missing = true;
      } else if (nan_count > 0) {
        throw FormatError("'" + path.string() + "': cell " + std::to_string(cell) +
                              " of observation " + std::to_string(i + 1) +
                              " is missing in some channels only",
                          kHeaderSize + cell_index * cell_doubles * 8);
      }
    }
    if (any_missing) gf.mask = std::move(mask);
  }
  ds.weights = FunctionalDataset::uniform_weights(rows, cols);
  ds.validate();
  return ds;
}

void write_tensor(const FunctionalDataset& ds, const std::filesystem::path& path) {
  ds.validate();
  const std::uint64_t n = ds.size();
  const std::uint64_t rows = ds.rows(), cols = ds.cols(), channels = ds.channels();

  std::string out;
  out.reserve(kHeaderSize + n * rows * cols * channels * 8);
  out.append(kMagic, 4);
  out.push_back(static_cast<char>(kVersion));
  store_u64le(out, n);
  store_u64le(out, rows);
  store_u64le(out, cols);
  store_u64le(out, channels);

  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (const auto& gf : ds.observations) {
    for (std::size_t cell = 0; cell < rows * cols; ++cell) {
      const bool missing = !gf.mask.empty() && gf.mask[cell] != 0;
      for (std::size_t ch = 0; ch < channels; ++ch) {
        const double v = gf.values[cell * channels + ch];
        // Keep the stored bits when they already say NaN; only substitute
        // when a masked cell carries a stale finite value.
        store_f64le(out, missing && !std::isnan(v) ? nan : v);
      }
    }
  }
  write_file(path, out);
}

GridFunction read_image(const std::filesystem::path& path) {
  const std::string bytes = read_file(path);
  if (bytes.size() < 2 || bytes[0] != 'P') {
    throw FormatError("'" + path.string() + "': not a PNM image", 0);
  }
  const char kind = bytes[1];
  if (kind == '2' || kind == '3') {
    throw UnsupportedFormatError("'" + path.string() + "': ASCII PNM is unsupported", 1);
  }
  if (kind != '5' && kind != '6') {
    throw FormatError("'" + path.string() + "': unknown PNM type P" + std::string(1, kind), 1);
  }
  const std::size_t channels = kind == '5' ? 1 : 3;

  std::size_t pos = 2;
  auto next_token = [&]() -> std::uint64_t {
    for (;;) {
      while (pos < bytes.size() &&
             std::isspace(static_cast<unsigned char>(bytes[pos]))) {
        ++pos;
      }
      if (pos < bytes.size() && bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
        continue;
      }
      break;
    }
    if (pos >= bytes.size() || !std::isdigit(static_cast<unsigned char>(bytes[pos]))) {
      throw FormatError("'" + path.string() + "': malformed header", pos);
    }
    std::uint64_t v = 0;
    while (pos < bytes.size() && std::isdigit(static_cast<unsigned char>(bytes[pos]))) {
      v = v * 10 + static_cast<std::uint64_t>(bytes[pos] - '0');
      if (v > (1ULL << 32)) throw FormatError("'" + path.string() + "': header value too large", pos);
      ++pos;
    }
    return v;
  };

  const std::uint64_t width = next_token();
  const std::uint64_t height = next_token();
  const std::uint64_t maxval = next_token();
  if (width == 0 || height == 0) {
    throw FormatError("'" + path.string() + "': zero image dimension", pos);
  }
  if (maxval == 0) throw FormatError("'" + path.string() + "': maxval is zero", pos);
  if (maxval > 255) {
    throw UnsupportedFormatError(
        "'" + path.string() + "': maxval " + std::to_string(maxval) + " exceeds 255", pos);
  }
  if (pos >= bytes.size() || !std::isspace(static_cast<unsigned char>(bytes[pos]))) {
    throw FormatError("'" + path.string() + "': missing whitespace before payload", pos);
  }
  ++pos;

  const std::uint64_t payload = width * height * channels;
  if (bytes.size() - pos < payload) {
    throw FormatError("'" + path.string() + "': truncated payload", bytes.size());
  }
  if (bytes.size() - pos > payload) {
    throw FormatError("'" + path.string() + "': trailing bytes after payload", pos + payload);
  }

  GridFunction gf;
  gf.id = path.stem().string();
  gf.rows = height;
  gf.cols = width;
  gf.channels = channels;
  gf.values.resize(payload);
  for (std::size_t i = 0; i < payload; ++i) {
    gf.values[i] = static_cast<double>(static_cast<unsigned char>(bytes[pos + i]));
  }
  return gf;
}

FunctionalDataset read_frame_dir(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) {
    throw FormatError("'" + dir.string() + "' is not a directory");
  }
  std::vector<std::filesystem::path> frames;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const std::string name = entry.path().filename().string();
    if (ends_with_icase(name, ".pgm") || ends_with_icase(name, ".ppm")) {
      frames.push_back(entry.path());
    }
  }
  std::sort(frames.begin(), frames.end(), [](const auto& a, const auto& b) {
    return a.filename().string() < b.filename().string();
  });
  if (frames.size() < 4) {
    throw InsufficientDataError("'" + dir.string() + "' holds " +
                                std::to_string(frames.size()) +
                                " frames; need at least 4");
  }

  FunctionalDataset ds;
  ds.observations.reserve(frames.size());
  for (const auto& frame : frames) {
    GridFunction gf = read_image(frame);
    if (!ds.observations.empty()) {
      const auto& first = ds.observations.front();
      if (gf.rows != first.rows || gf.cols != first.cols || gf.channels != first.channels) {
        throw FormatError("'" + frame.string() + "' does not match the shape of the first frame");
      }
    }
    ds.observations.push_back(std::move(gf));
  }
  ds.weights = FunctionalDataset::uniform_weights(ds.rows(), ds.cols());
  return ds;
}

void write_heatmap(const AOField& field, const std::filesystem::path& path,
                   HeatmapFormat format, std::optional<double> cap) {
  if (field.ao.size() != field.rows * field.cols || field.ao.empty()) {
    throw InvalidInputError("heatmap field has inconsistent shape");
  }
  const std::vector<double> display = heatmap_export(field, cap);

  if (format == HeatmapFormat::kCsv) {
    write_csv_matrix(path, display, field.rows, field.cols);
    return;
  }
  if (!cap) throw InvalidInputError("PGM heatmaps need a cap to scale against");
  std::string out = "P5\n" + std::to_string(field.cols) + " " + std::to_string(field.rows) +
                    "\n255\n";
  for (double v : display) {
    const long pixel = std::lround(255.0 * v / *cap);
    out.push_back(static_cast<char>(static_cast<unsigned char>(std::clamp(pixel, 0L, 255L))));
  }
  write_file(path, out);
}

void write_result_table(std::span<const FomRecord> records,
                        const std::filesystem::path& path) {
  std::string out = "id,fao,vao,cfo,lcfo,zscore,flagged\n";
  for (const auto& rec : records) {
    check_id_writable(rec.id);
    out += rec.id;
    out += ',';
    out += format_real(rec.fao);
    out += ',';
    out += format_real(rec.vao);
    out += ',';
    out += format_real(rec.cfo);
    out += ',';
    out += format_real(rec.lcfo);
    out += ',';
    out += format_real(rec.zscore);
    out += ',';
    out += rec.flagged ? '1' : '0';
    out += '\n';
  }
  write_file(path, out);
}

std::vector<FomRecord> read_result_table(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  const auto lines = split_lines(text);
  if (lines.empty() || lines[0] != "id,fao,vao,cfo,lcfo,zscore,flagged") {
    throw FormatError("'" + path.string() + "': missing or wrong result table header");
  }
  std::vector<FomRecord> records;
  std::set<std::string> seen;
  for (std::size_t li = 1; li < lines.size(); ++li) {
    if (lines[li].empty() && li + 1 == lines.size()) break;
    const auto fields = split_fields(lines[li]);
    if (fields.size() != 7) {
      throw FormatError("'" + path.string() + "' line " + std::to_string(li + 1) + ": expected 7 fields, got " +
                        std::to_string(fields.size()));
    }
    FomRecord rec;
    rec.id = fields[0];
    if (rec.id.empty()) {
      throw FormatError("'" + path.string() + "' line " + std::to_string(li + 1) + ": empty id");
    }
    if (!seen.insert(rec.id).second) {
      throw FormatError("'" + path.string() + "': duplicate id '" + rec.id + "'");
    }
    rec.fao = parse_real(fields[1], path, li + 1);
    rec.vao = parse_real(fields[2], path, li + 1);
    rec.cfo = parse_real(fields[3], path, li + 1);
    rec.lcfo = parse_real(fields[4], path, li + 1);
    rec.zscore = parse_real(fields[5], path, li + 1);
    if (fields[6] == "0") {
      rec.flagged = false;
    } else if (fields[6] == "1") {
      rec.flagged = true;
    } else {
      throw FormatError("'" + path.string() + "' line " + std::to_string(li + 1) +
                        ": flagged must be 0 or 1");
    }
    records.push_back(std::move(rec));
  }
  if (records.empty()) {
    throw FormatError("'" + path.string() + "': result table has no rows");
  }
  return records;
}

void write_csv_matrix(const std::filesystem::path& path, std::span<const double> data,
                      std::size_t rows, std::size_t cols) {
  if (data.size() != rows * cols || rows == 0 || cols == 0) {
    throw InvalidInputError("csv matrix shape does not match the data");
  }
  std::string out;
  out.reserve(data.size() * 12);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      if (c != 0) out += ',';
      out += format_real(data[r * cols + c]);
    }
    out += '\n';
  }
  write_file(path, out);
}

CsvMatrix read_csv_matrix(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  const auto lines = split_lines(text);
  CsvMatrix m;
  for (std::size_t li = 0; li < lines.size(); ++li) {
    if (lines[li].empty() && li + 1 == lines.size()) break;
    const auto fields = split_fields(lines[li]);
    if (m.rows == 0) {
      m.cols = fields.size();
    } else if (fields.size() != m.cols) {
      throw FormatError("'" + path.string() + "' line " + std::to_string(li + 1) +
                        ": ragged row");
    }
    for (const auto& f : fields) m.data.push_back(parse_real(f, path, li + 1));
    ++m.rows;
  }
  if (m.rows == 0) throw FormatError("'" + path.string() + "': empty csv matrix");
  return m;
}

}  // namespace gridao
