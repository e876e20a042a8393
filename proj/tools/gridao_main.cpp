// Command-line front end: packs grid data into tensor files, preprocesses
// them, scores observations and renders the outlier map.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gridao/dataset.hpp"
#include "gridao/errors.hpp"
#include "gridao/fom.hpp"
#include "gridao/fom_plot.hpp"
#include "gridao/io.hpp"
#include "gridao/preprocess.hpp"
#include "gridao/trilinear.hpp"

namespace fs = std::filesystem;
using namespace gridao;

namespace {

struct CommonOpts {
  std::uint64_t seed = 42;
  std::size_t directions = 0;  // 0 = 250 per channel
  double quantile = 0.995;
  double clamp = 1e6;
  std::string weights = "uniform";
  unsigned threads = 0;
};

void add_scoring_flags(CLI::App* cmd, CommonOpts& opts, bool with_quantile,
                       bool with_weights) {
  cmd->add_option("--seed", opts.seed, "RNG seed for projection directions")
      ->capture_default_str();
  cmd->add_option("--directions", opts.directions,
                  "number of projection directions (0 = 250 per channel)")
      ->capture_default_str();
  cmd->add_option("--clamp", opts.clamp, "cap applied to every AO value")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_option("--threads", opts.threads, "worker threads (0 = all cores)")
      ->capture_default_str();
  if (with_quantile) {
    cmd->add_option("--quantile", opts.quantile, "flagging quantile of the normal scale")
        ->check(CLI::Range(0.5000001, 0.9999999))
        ->capture_default_str();
  }
  if (with_weights) {
    cmd->add_option("--weights", opts.weights,
                    "'uniform' or a CSV grid of cell weights (normalized on load)")
        ->capture_default_str();
  }
}

AnalysisConfig to_config(const CommonOpts& opts) {
  AnalysisConfig cfg;
  cfg.directions.seed = opts.seed;
  cfg.directions.num_directions = opts.directions;
  cfg.ao_clamp = opts.clamp;
  cfg.cutoff_quantile = opts.quantile;
  cfg.num_threads = opts.threads;
  return cfg;
}

void apply_weights(FunctionalDataset& ds, const std::string& weights) {
  if (weights == "uniform") return;
  const CsvMatrix m = read_csv_matrix(weights);
  if (m.rows != ds.rows() || m.cols != ds.cols()) {
    throw InvalidInputError("weight grid is " + std::to_string(m.rows) + " x " +
                            std::to_string(m.cols) + " but the data grid is " +
                            std::to_string(ds.rows()) + " x " + std::to_string(ds.cols()));
  }
  double sum = 0.0;
  for (double w : m.data) {
    if (!std::isfinite(w) || w < 0.0) {
      throw InvalidInputError("weights must be finite and >= 0");
    }
    sum += w;
  }
  if (!(sum > 0.0)) throw InvalidInputError("weights sum to zero");
  ds.weights = m.data;
  for (double& w : ds.weights) w /= sum;
}

FunctionalDataset load_unmasked_tensor(const fs::path& path) {
  FunctionalDataset ds = read_tensor(path);
  if (ds.any_mask()) {
    throw InvalidInputError("'" + path.string() +
                            "' has missing cells; run `gridao impute` first");
  }
  return ds;
}

bool is_tensor_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  char magic[4] = {};
  in.read(magic, 4);
  return in.gcount() == 4 && magic[0] == 'F' && magic[1] == 'D' && magic[2] == 'T' &&
         magic[3] == '1';
}

bool has_extension_icase(const fs::path& p, const std::string& ext) {
  std::string e = p.extension().string();
  std::transform(e.begin(), e.end(), e.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return e == ext;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("cannot open '" + path.string() + "' for writing");
  out << text;
  out.flush();
  if (!out) throw FormatError("write failure on '" + path.string() + "'");
}

// ---- convert ----

FunctionalDataset observations_from_csv(const std::vector<fs::path>& files) {
  FunctionalDataset ds;
  for (const auto& file : files) {
    const CsvMatrix m = read_csv_matrix(file);
    GridFunction gf;
    gf.id = file.stem().string();
    gf.rows = m.rows;
    gf.cols = m.cols;
    gf.channels = 1;
    gf.values = m.data;
    if (!ds.observations.empty()) {
      const auto& first = ds.observations.front();
      if (gf.rows != first.rows || gf.cols != first.cols) {
        throw InvalidInputError("'" + file.string() + "' is " + std::to_string(gf.rows) +
                                " x " + std::to_string(gf.cols) +
                                ", expected the shape of the first input");
      }
    }
    ds.observations.push_back(std::move(gf));
  }
  ds.weights = FunctionalDataset::uniform_weights(ds.rows(), ds.cols());
  return ds;
}

int cmd_convert(const std::vector<std::string>& inputs, const fs::path& out) {
  FunctionalDataset ds;
  if (inputs.size() == 1 && fs::is_directory(inputs[0])) {
    const fs::path dir = inputs[0];
    bool any_image = false;
    std::vector<fs::path> csvs;
    for (const auto& entry : fs::directory_iterator(dir)) {
      if (!entry.is_regular_file()) continue;
      if (has_extension_icase(entry.path(), ".pgm") || has_extension_icase(entry.path(), ".ppm")) {
        any_image = true;
      } else if (has_extension_icase(entry.path(), ".csv")) {
        csvs.push_back(entry.path());
      }
    }
    if (any_image) {
      ds = read_frame_dir(dir);
    } else if (!csvs.empty()) {
      std::sort(csvs.begin(), csvs.end(), [](const fs::path& a, const fs::path& b) {
        return a.filename().string() < b.filename().string();
      });
      ds = observations_from_csv(csvs);
    } else {
      throw InvalidInputError("'" + dir.string() + "' holds no .pgm/.ppm/.csv inputs");
    }
  } else {
    bool all_csv = true, all_image = true;
    std::vector<fs::path> files;
    for (const auto& input : inputs) {
      files.emplace_back(input);
      if (!has_extension_icase(files.back(), ".csv")) all_csv = false;
      if (!has_extension_icase(files.back(), ".pgm") &&
          !has_extension_icase(files.back(), ".ppm")) {
        all_image = false;
      }
    }
    if (all_csv) {
      ds = observations_from_csv(files);
    } else if (all_image) {
      for (const auto& file : files) {
        GridFunction gf = read_image(file);
        if (!ds.observations.empty()) {
          const auto& first = ds.observations.front();
          if (gf.rows != first.rows || gf.cols != first.cols ||
              gf.channels != first.channels) {
            throw InvalidInputError("'" + file.string() +
                                    "' does not match the shape of the first image");
          }
        }
        ds.observations.push_back(std::move(gf));
      }
      ds.weights = FunctionalDataset::uniform_weights(ds.rows(), ds.cols());
    } else {
      throw InvalidInputError("inputs must be all CSV grids or all PGM/PPM images");
    }
  }
  write_tensor(ds, out);
  std::cerr << "packed " << ds.size() << " observations of " << ds.rows() << " x " << ds.cols()
            << " x " << ds.channels() << " into " << out.string() << "\n";
  return 0;
}

// ---- pipeline commands ----

int cmd_impute(const fs::path& in, const std::string& axis, const fs::path& out) {
  const ImputeAxis ax = axis == "j" ? ImputeAxis::kAlongRows : ImputeAxis::kAlongCols;
  FunctionalDataset ds = read_tensor(in);
  ds = impute_missing(ds, ax);
  write_tensor(ds, out);
  return 0;
}

int cmd_gradient(const fs::path& in, const fs::path& out) {
  FunctionalDataset ds = read_tensor(in);
  write_tensor(gradient_augment(ds), out);
  return 0;
}

int cmd_parafac(const fs::path& in, const TrilinearConfig& cfg, const fs::path& prefix) {
  const FunctionalDataset ds = load_unmasked_tensor(in);
  const TrilinearModel model = fit_trilinear(ds, cfg);

  auto with_suffix = [&prefix](const std::string& suffix) {
    fs::path p = prefix;
    p += suffix;
    return p;
  };
  // Eigen stores column-major; rewrite row-major for the CSV.
  auto dump = [&](const Eigen::MatrixXd& mat, const std::string& suffix) {
    std::vector<double> rowmajor(mat.size());
    for (Eigen::Index r = 0; r < mat.rows(); ++r) {
      for (Eigen::Index c = 0; c < mat.cols(); ++c) {
        rowmajor[static_cast<std::size_t>(r) * mat.cols() + c] = mat(r, c);
      }
    }
    write_csv_matrix(with_suffix(suffix), rowmajor, mat.rows(), mat.cols());
  };
  dump(model.a, ".A.csv");
  dump(model.b, ".B.csv");
  dump(model.c, ".C.csv");
  write_tensor(residuals(ds, model), with_suffix(".residuals.fdt"));

  std::cerr << "trimmed loss " << format_real(model.trimmed_loss) << " after "
            << model.iterations << " iterations (restart " << model.restart_index << ", "
            << (model.converged ? "converged" : "hit max_iter") << ")\n";
  return 0;
}

int cmd_detect(const fs::path& in, const CommonOpts& opts, const fs::path& out) {
  FunctionalDataset ds = load_unmasked_tensor(in);
  apply_weights(ds, opts.weights);
  const FomResult result = fom(ds, to_config(opts));
  write_result_table(result.records, out);
  for (const auto& rec : result.records) {
    if (rec.flagged) std::cout << rec.id << "\n";
  }
  std::cerr << "scored " << result.records.size() << " observations, wrote " << out.string()
            << "\n";
  return 0;
}

fs::path curve_path_for(const fs::path& svg_out) {
  fs::path p = svg_out;
  p.replace_extension();
  p += ".curve.csv";
  return p;
}

int cmd_fom(const fs::path& in, const CommonOpts& opts, const fs::path& out) {
  FomResult result;
  if (is_tensor_file(in)) {
    FunctionalDataset ds = load_unmasked_tensor(in);
    apply_weights(ds, opts.weights);
    result = fom(ds, to_config(opts));
  } else {
    // Re-plot a saved result table: keep its flags, rebuild the boundary
    // statistics from the stored scores.
    const std::vector<FomRecord> table = read_result_table(in);
    std::vector<std::string> ids;
    std::vector<double> fao_values, vao_values;
    for (const auto& rec : table) {
      ids.push_back(rec.id);
      fao_values.push_back(rec.fao);
      vao_values.push_back(rec.vao);
    }
    result = fom_from_scores(ids, fao_values, vao_values, opts.quantile);
    for (std::size_t i = 0; i < table.size(); ++i) {
      result.records[i].flagged = table[i].flagged;
      result.records[i].zscore = table[i].zscore;
    }
  }
  write_text(out, render_fom_svg(result.records, result.cutoff));
  write_text(curve_path_for(out), render_cutoff_curve_csv(result.cutoff));
  std::cerr << "wrote " << out.string() << " and " << curve_path_for(out).string() << "\n";
  return 0;
}

int cmd_heatmap(const fs::path& in, const CommonOpts& opts, const std::string& obs_id,
                const std::string& fmt, std::optional<double> cap, const fs::path& out) {
  const FunctionalDataset ds = load_unmasked_tensor(in);
  const auto fields = ao_fields(ds, to_config(opts));
  const auto it = std::find_if(fields.begin(), fields.end(),
                               [&](const AOField& f) { return f.id == obs_id; });
  if (it == fields.end()) {
    throw InvalidInputError("no observation with id '" + obs_id + "' (ids run 1.." +
                            std::to_string(fields.size()) + " for tensor input)");
  }
  write_heatmap(*it, out, fmt == "pgm" ? HeatmapFormat::kPgm : HeatmapFormat::kCsv, cap);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"outlying-surface detection on grid data via adjusted outlyingness"};
  app.require_subcommand(1);
  int rc = 0;

  // convert
  auto* convert = app.add_subcommand(
      "convert", "pack CSV grids or PGM/PPM images (files or one directory) into a tensor");
  std::vector<std::string> convert_inputs;
  std::string convert_out;
  convert->add_option("inputs", convert_inputs, "input files or one directory")->required();
  convert->add_option("--out", convert_out, "output tensor path")->required();
  convert->callback([&] { rc = cmd_convert(convert_inputs, convert_out); });

  // impute
  auto* impute = app.add_subcommand("impute", "fill missing cells by linear interpolation");
  std::string impute_in, impute_out, impute_axis = "k";
  impute->add_option("input", impute_in, "input tensor")->required();
  impute->add_option("--axis", impute_axis, "interpolation axis: k (within rows) or j")
      ->check(CLI::IsMember({"k", "j"}))
      ->capture_default_str();
  impute->add_option("--out", impute_out, "output tensor path")->required();
  impute->callback([&] { rc = cmd_impute(impute_in, impute_axis, impute_out); });

  // gradient
  auto* gradient =
      app.add_subcommand("gradient", "augment a single-channel tensor with row/col derivatives");
  std::string gradient_in, gradient_out;
  gradient->add_option("input", gradient_in, "input tensor")->required();
  gradient->add_option("--out", gradient_out, "output tensor path")->required();
  gradient->callback([&] { rc = cmd_gradient(gradient_in, gradient_out); });

  // parafac
  auto* parafac =
      app.add_subcommand("parafac", "trimmed trilinear fit; writes factors and residuals");
  // The trim fraction is spelled --h, so this subcommand keeps only the long
  // help flag.
  parafac->set_help_flag("--help", "print help");
  std::string parafac_in, parafac_out;
  TrilinearConfig tri_cfg;
  parafac->add_option("input", parafac_in, "input tensor (single channel)")->required();
  parafac->add_option("--F", tri_cfg.num_factors, "number of factors")
      ->required()
      ->check(CLI::PositiveNumber);
  parafac->add_option("--h", tri_cfg.trim_fraction, "fraction of observations kept")
      ->capture_default_str();
  parafac->add_option("--seed", tri_cfg.seed, "RNG seed for restart subsets")
      ->capture_default_str();
  parafac->add_option("--restarts", tri_cfg.num_restarts, "number of restarts")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  parafac->add_option("--max-iter", tri_cfg.max_iter, "outer iteration limit")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  parafac->add_option("--tol", tri_cfg.tolerance, "relative loss-change tolerance")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  parafac->add_option("--out", parafac_out, "output prefix (.A/.B/.C.csv, .residuals.fdt)")
      ->required();
  parafac->callback([&] { rc = cmd_parafac(parafac_in, tri_cfg, parafac_out); });

  // detect
  auto* detect = app.add_subcommand("detect", "score a tensor and write the result table");
  std::string detect_in, detect_out;
  CommonOpts detect_opts;
  detect->add_option("input", detect_in, "input tensor")->required();
  add_scoring_flags(detect, detect_opts, true, true);
  detect->add_option("--out", detect_out, "result table path")->required();
  detect->callback([&] { rc = cmd_detect(detect_in, detect_opts, detect_out); });

  // fom
  auto* fom_cmd =
      app.add_subcommand("fom", "render the outlier map as SVG (plus the boundary as CSV)");
  std::string fom_in, fom_out;
  CommonOpts fom_opts;
  fom_cmd->add_option("input", fom_in, "input tensor or result table")->required();
  add_scoring_flags(fom_cmd, fom_opts, true, true);
  fom_cmd->add_option("--out", fom_out, "output SVG path")->required();
  fom_cmd->callback([&] { rc = cmd_fom(fom_in, fom_opts, fom_out); });

  // heatmap
  auto* heatmap = app.add_subcommand("heatmap", "export one observation's AO field");
  std::string heatmap_in, heatmap_out, heatmap_obs, heatmap_fmt = "csv";
  CommonOpts heatmap_opts;
  std::optional<double> heatmap_cap;
  double heatmap_cap_value = 0;
  heatmap->add_option("input", heatmap_in, "input tensor")->required();
  heatmap->add_option("--obs", heatmap_obs, "observation id (1-based for tensor input)")
      ->required();
  heatmap->add_option("--format", heatmap_fmt, "csv or pgm")
      ->check(CLI::IsMember({"csv", "pgm"}))
      ->capture_default_str();
  auto* cap_opt = heatmap->add_option("--cap", heatmap_cap_value,
                                      "display cap for AO values (required for pgm)");
  add_scoring_flags(heatmap, heatmap_opts, false, false);
  heatmap->add_option("--out", heatmap_out, "output path")->required();
  heatmap->callback([&] {
    if (cap_opt->count() > 0) heatmap_cap = heatmap_cap_value;
    rc = cmd_heatmap(heatmap_in, heatmap_opts, heatmap_obs, heatmap_fmt, heatmap_cap,
                     heatmap_out);
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_name() == "CallForHelp" || e.get_name() == "CallForAllHelp" ||
        e.get_name() == "CallForVersion") {
      return app.exit(e);
    }
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const DegenerateDataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const SingularUpdateError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 1;
  }
  return rc;
}
