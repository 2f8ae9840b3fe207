#include "cli.hpp"

#include <charconv>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "thermowave/baseline.hpp"
#include "thermowave/datacube.hpp"
#include "thermowave/detector.hpp"
#include "thermowave/errors.hpp"
#include "thermowave/metrics.hpp"
#include "thermowave/pgm.hpp"
#include "thermowave/phantom.hpp"
#include "thermowave/postproc.hpp"
#include "thermowave/selection.hpp"
#include "thermowave/wavelet.hpp"

namespace thermowave::cli {
namespace {

namespace fs = std::filesystem;

struct Range {
  int lo = 0;
  int hi = 0;
};

int parse_int(std::string_view text, std::string_view what) {
  int value = 0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc{} || ptr != end) {
    throw ConfigError(fmt::format("{} '{}' is not an integer", what, text));
  }
  return value;
}

Range parse_range(const std::string& text, std::string_view what) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) {
    throw ConfigError(fmt::format("{} '{}' must look like lo:hi", what, text));
  }
  return {parse_int(std::string_view(text).substr(0, colon), what),
          parse_int(std::string_view(text).substr(colon + 1), what)};
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

TemporalCombine parse_combine(const std::string& text) {
  if (text == "mean") return TemporalCombine::kMean;
  if (text == "median") return TemporalCombine::kMedian;
  throw ConfigError(fmt::format("unknown temporal combination '{}'", text));
}

RawReference parse_reference(const std::string& text) {
  if (text == "mean") return RawReference::kTemporalMean;
  if (text == "best") return RawReference::kBestFrame;
  throw ConfigError(fmt::format("unknown raw reference '{}'", text));
}

std::string num(double v) { return fmt::format("{:.10g}", v); }

DataCube single_frame(const Grid& map, double te_s, bool flipped_y = false) {
  return DataCube::from_frames(std::span<const Grid>(&map, 1), te_s, flipped_y);
}

Grid read_map(const fs::path& path) {
  const DataCube cube = read_cube(path);
  if (cube.nt() != 1) {
    throw ConfigError(fmt::format("{} holds {} frames, expected a single map", path.string(),
                                  cube.nt()));
  }
  return cube.frame(0);
}

void write_text(const std::string& text, const fs::path& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError(fmt::format("cannot open {} for writing", path.string()));
  f << text;
  if (!f) throw IoError(fmt::format("failed writing {}", path.string()));
}

Grid mask_to_grid(const Mask& m) { return m.cast<double>(); }

struct DetectorFlags {
  std::string basis = "rbio6.8";
  int levels = 6;
  std::string band;
  std::optional<int> margin;
  double quantile = 0.95;
  std::string boundary = "symmetric";
  std::string combine = "mean";

  void add_to(CLI::App* app) {
    app->add_option("--basis", basis, "Wavelet basis")->capture_default_str();
    app->add_option("--levels", levels, "Decomposition depth L")->capture_default_str();
    app->add_option("--band", band, "Detail levels kept, lo:hi (default 3:L)");
    app->add_option("--margin", margin, "Edge margin in pixels (default: synthesis filter length)");
    app->add_option("--quantile", quantile, "Fault-map threshold quantile")->capture_default_str();
    app->add_option("--boundary", boundary, "symmetric or periodic")->capture_default_str();
    app->add_option("--combine", combine, "Temporal combination: mean or median")
        ->capture_default_str();
  }

  DetectorConfig config() const {
    DetectorConfig cfg = DetectorConfig::with_levels(basis, levels);
    if (!band.empty()) {
      const auto r = parse_range(band, "band");
      cfg.band_lo = r.lo;
      cfg.band_hi = r.hi;
    }
    cfg.edge_margin = margin;
    cfg.threshold_quantile = quantile;
    cfg.boundary = parse_boundary_mode(boundary);
    cfg.combine = parse_combine(combine);
    cfg.validate();
    return cfg;
  }
};

int cmd_phantom(double te, std::uint64_t seed, std::optional<double> noise, bool no_faults,
                bool foil, const std::string& out_path, const std::string& excitation_path,
                const std::string& truth_path, std::ostream& out) {
  PhantomConfig cfg = PhantomConfig::standard(te, seed);
  if (noise) cfg.noise_sigma = *noise;
  cfg.include_faults = !no_faults;
  cfg.validate();
  Phantom ph = generate_phantom(cfg);
  if (foil) ph.cube = add_reflective_patch(ph.cube, ph.excitation, ReflectivePatch{});

  write_cube(ph.cube, out_path);
  if (!excitation_path.empty()) write_excitation(ph.excitation, excitation_path);
  if (!truth_path.empty()) write_ground_truth(ph.truth, truth_path);
  out << fmt::format("phantom {}x{}x{} te={} seed={}\n", ph.cube.nx(), ph.cube.ny(), ph.cube.nt(),
                     te, seed);
  return 0;
}

int cmd_dwt(const std::string& basis_name, int levels, int frame_index, const std::string& boundary,
            const std::string& in_path, const std::string& dump_dir, std::ostream& out) {
  const auto& basis = catalog_lookup(basis_name);
  const auto mode = parse_boundary_mode(boundary);
  const DataCube cube = read_cube(in_path);
  if (frame_index < 0 || frame_index >= cube.nt()) {
    throw ConfigError(fmt::format("frame {} is outside 0..{}", frame_index, cube.nt() - 1));
  }
  const auto tree = decompose(cube.frame(frame_index), basis, levels, mode);

  for (int l = 1; l <= tree.levels(); ++l) {
    const auto& a = tree.approximations[l - 1];
    const auto& b = tree.sub_bands[l - 1];
    out << fmt::format("level {}: approximation {}x{}, |H|={} |V|={} |D|={}\n", l, a.rows(),
                       a.cols(), num(b.horizontal.norm()), num(b.vertical.norm()),
                       num(b.diagonal.norm()));
  }
  if (!dump_dir.empty()) {
    fs::create_directories(dump_dir);
    const fs::path dir(dump_dir);
    for (int l = 1; l <= tree.levels(); ++l) {
      const auto& b = tree.sub_bands[l - 1];
      write_cube(single_frame(tree.approximations[l - 1], cube.te_s()),
                 dir / fmt::format("level{}_approximation.tic", l));
      write_cube(single_frame(b.horizontal, cube.te_s()), dir / fmt::format("level{}_horizontal.tic", l));
      write_cube(single_frame(b.vertical, cube.te_s()), dir / fmt::format("level{}_vertical.tic", l));
      write_cube(single_frame(b.diagonal, cube.te_s()), dir / fmt::format("level{}_diagonal.tic", l));
    }
  }
  return 0;
}

int cmd_detect(const DetectorFlags& flags, const std::string& in_path, const std::string& out_path,
               const std::string& map_path, const std::string& yr_path, std::ostream& out) {
  const DetectorConfig cfg = flags.config();
  const DataCube cube = read_cube(in_path);
  cfg.validate_for(cube.nx(), cube.ny());

  DataCube yr;
  const DetectionMap det = detect(cube, cfg, yr_path.empty() ? nullptr : &yr);
  std::optional<Mask> mask;
  if (!map_path.empty()) mask = fault_map(det);

  write_cube(single_frame(det.values, cube.te_s(), cube.flipped_y()), out_path);
  if (mask) render_map(mask_to_grid(*mask), map_path);
  if (!yr_path.empty()) write_cube(yr, yr_path);
  out << fmt::format("detect {} L={} band {}:{} over {} frames\n", cfg.basis, cfg.levels,
                     cfg.band_lo, cfg.band_hi, det.source_nt);
  return 0;
}

int cmd_select_basis(const DetectorFlags& flags, const std::string& in_path,
                     const std::string& truth_path, const std::string& bases,
                     const std::string& report_path, std::ostream& out, std::ostream& err) {
  const DetectorConfig cfg = flags.config();
  const auto catalog = bases.empty() ? sweep_catalog() : split_list(bases);
  for (const auto& name : catalog) catalog_lookup(name);
  const DataCube cube = read_cube(in_path);
  const GroundTruth truth = read_ground_truth(truth_path);

  const auto sel = select_basis(cube, truth, catalog, cfg);
  for (const auto& name : sel.skipped) err << fmt::format("skipped degenerate basis {}\n", name);

  std::string csv = "basis,cost,numerator_sum,denominator,selected\n";
  for (const auto& s : sel.scores) {
    double numerator = 0.0;
    for (double v : s.per_fault_numerators) numerator += v;
    csv += fmt::format("{},{},{},{},{}\n", s.basis, num(s.cost), num(numerator), num(s.denominator),
                       s.basis == sel.best ? 1 : 0);
  }
  if (!report_path.empty()) write_text(csv, report_path);
  out << sel.best << '\n';
  return 0;
}

int cmd_select_level(const std::string& in_path, const LevelSelectionConfig& cfg,
                     const std::string& report_path, std::ostream& out) {
  catalog_lookup(cfg.basis);
  if (cfg.max_level < 2) throw LevelError(fmt::format("--lmax {} must be at least 2", cfg.max_level));
  if (!(cfg.tau > 0.0 && cfg.tau < 1.0)) {
    throw ConfigError(fmt::format("--tau {} is outside (0, 1)", cfg.tau));
  }
  if (cfg.radius < 1) throw ConfigError(fmt::format("--radius {} must be at least 1", cfg.radius));
  if (cfg.frame_stride < 1) {
    throw ConfigError(fmt::format("--stride {} must be at least 1", cfg.frame_stride));
  }
  const DataCube cube = read_cube(in_path);
  const auto profile = select_level(cube, cfg);

  std::string csv = "level,m_avg,selected\n";
  for (std::size_t i = 0; i < profile.m_avg.size(); ++i) {
    const int level = static_cast<int>(i) + 1;
    csv += fmt::format("{},{},{}\n", level, num(profile.m_avg[i]),
                       level == profile.selected_level ? 1 : 0);
  }
  if (!report_path.empty()) write_text(csv, report_path);
  out << profile.selected_level << '\n';
  return 0;
}

int cmd_baseline(const std::string& in_path, const std::string& ranks, int background_rank,
                 const std::string& skew_path, const std::string& kurt_path, std::ostream& out) {
  const auto r = parse_range(ranks, "ranks");
  if (r.lo < 1 || r.hi < r.lo) throw ConfigError(fmt::format("ranks {} are not a valid range", ranks));
  const DataCube cube = read_cube(in_path);
  const auto matrix = unfold(cube);
  const auto spectrum = singular_spectrum(matrix);
  const auto split = SvdSplit::make(r.lo, r.hi, static_cast<int>(spectrum.values.size()), background_rank);
  const auto maps = hos_maps(svd_filter(matrix, spectrum, split), cube.nx(), cube.ny());

  if (!skew_path.empty()) render_map(maps.skewness, skew_path);
  if (!kurt_path.empty()) render_map(maps.kurtosis, kurt_path);
  const double total = spectrum.values.squaredNorm();
  out << fmt::format("first singular value energy fraction {}\n",
                     num(total > 0.0 ? spectrum.values(0) * spectrum.values(0) / total : 0.0));
  if (!maps.flagged_rows.empty()) {
    out << fmt::format("{} constant pixels set to 0\n", maps.flagged_rows.size());
  }
  return 0;
}

int cmd_evaluate(const std::string& in_path, const std::string& ydet_path,
                 const std::string& truth_path, const std::string& reference,
                 const std::string& report_path, std::ostream& out) {
  const auto ref = parse_reference(reference);
  const DataCube cube = read_cube(in_path);
  const Grid ydet = read_map(ydet_path);
  const GroundTruth truth = read_ground_truth(truth_path);
  const auto records = snr_improvement(cube, ydet, truth, ref);

  std::string csv = "fault_id,snr_raw_db,snr_wd_db,improvement_db\n";
  for (const auto& r : records) {
    csv += fmt::format("{},{},{},{}\n", r.fault_id, num(r.snr_raw_db), num(r.snr_wd_db),
                       num(r.improvement_db));
  }
  if (!report_path.empty()) write_text(csv, report_path);
  out << csv;
  return 0;
}

int cmd_correct(const std::string& yr_path, const std::string& excitation_path,
                const std::string& ydet_path, double threshold, const std::string& out_path,
                const std::string& corr_path, std::ostream& out) {
  if (!(threshold > 0.0 && threshold < 1.0)) {
    throw ConfigError(fmt::format("--threshold {} is outside (0, 1)", threshold));
  }
  const DataCube yr = read_cube(yr_path);
  const auto excitation = read_excitation(excitation_path, yr.te_s());
  const DataCube ydet_cube = read_cube(ydet_path);
  if (ydet_cube.nt() != 1) throw ConfigError("--ydet must hold a single map");
  const Grid corr = excitation_correlation(yr, excitation);
  const Grid corrected = suppress_correlated(ydet_cube.frame(0), corr, threshold);

  int removed = 0;
  for (Eigen::Index i = 0; i < corr.size(); ++i) removed += std::abs(corr.data()[i]) >= threshold;
  write_cube(single_frame(corrected, ydet_cube.te_s(), ydet_cube.flipped_y()), out_path);
  if (!corr_path.empty()) write_cube(single_frame(corr, yr.te_s(), yr.flipped_y()), corr_path);
  out << fmt::format("suppressed {} pixels\n", removed);
  return 0;
}

int cmd_render(const std::string& in_path, const std::string& out_path, std::ostream& out) {
  const DataCube cube = read_cube(in_path);
  if (cube.nt() != 1) {
    throw ConfigError(fmt::format("render needs a single-frame map, {} has {} frames", in_path,
                                  cube.nt()));
  }
  render_map(cube.frame(0), out_path);
  out << fmt::format("wrote {}x{} image\n", cube.nx(), cube.ny());
  return 0;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Sub-surface defect detection in pulsed thermography sequences", "thermowave"};
  app.require_subcommand(1);
  app.fallthrough(false);

  // phantom
  double te = 5.0;
  std::uint64_t seed = 42;
  std::optional<double> noise;
  bool no_faults = false;
  bool foil = false;
  std::string out_path;
  std::string excitation_path;
  std::string truth_path;
  auto* phantom = app.add_subcommand("phantom", "Generate a synthetic thermal sequence");
  phantom->add_option("--te", te, "Pulse duration in seconds (0.5, 1, 2, 5, 10)")->capture_default_str();
  phantom->add_option("--seed", seed, "Random seed")->capture_default_str();
  phantom->add_option("--noise", noise, "Noise standard deviation (default 0.12)");
  phantom->add_flag("--no-faults", no_faults, "Leave out the twelve holes");
  phantom->add_flag("--foil", foil, "Add a reflective patch that follows the excitation");
  phantom->add_option("--out", out_path, "Output cube (TIC1)")->required();
  phantom->add_option("--excitation", excitation_path, "Output excitation bits");
  phantom->add_option("--truth", truth_path, "Output ground truth (JSON)");

  // dwt
  std::string basis = "rbio6.8";
  int levels = 6;
  int frame_index = 0;
  std::string boundary = "symmetric";
  std::string in_path;
  std::string dump_dir;
  auto* dwt = app.add_subcommand("dwt", "Decompose one frame and report or dump the sub-bands");
  dwt->add_option("--basis", basis, "Wavelet basis")->capture_default_str();
  dwt->add_option("--levels", levels, "Decomposition depth")->capture_default_str();
  dwt->add_option("--frame", frame_index, "Frame index")->capture_default_str();
  dwt->add_option("--boundary", boundary, "symmetric or periodic")->capture_default_str();
  dwt->add_option("cube", in_path, "Input cube (TIC1)")->required();
  dwt->add_option("--dump-tree", dump_dir, "Directory receiving one TIC1 file per sub-band");

  // detect
  DetectorFlags detect_flags;
  std::string map_path;
  std::string yr_path;
  auto* det = app.add_subcommand("detect", "Band-selective reconstruction and temporal averaging");
  detect_flags.add_to(det);
  det->add_option("--in", in_path, "Input cube (TIC1)")->required();
  det->add_option("--out", out_path, "Output detection map (single-frame TIC1)")->required();
  det->add_option("--map", map_path, "Output thresholded fault map (PGM)");
  det->add_option("--dump-yr", yr_path, "Output per-frame useful subspace (TIC1)");

  // select-basis
  DetectorFlags select_flags;
  std::string bases;
  std::string report_path;
  auto* sb = app.add_subcommand("select-basis", "Score every basis of the catalog");
  select_flags.add_to(sb);
  sb->add_option("--in", in_path, "Input cube (TIC1)")->required();
  sb->add_option("--truth", truth_path, "Ground truth (JSON)")->required();
  sb->add_option("--bases", bases, "Comma-separated bases (default: full sweep)");
  sb->add_option("--report", report_path, "Output CSV");

  // select-level
  LevelSelectionConfig level_cfg;
  std::string level_boundary = "symmetric";
  auto* sl = app.add_subcommand("select-level", "Pick the decomposition depth from the RMI profile");
  sl->add_option("--in", in_path, "Input cube (TIC1)")->required();
  sl->add_option("--basis", level_cfg.basis, "Wavelet basis")->capture_default_str();
  sl->add_option("--lmax", level_cfg.max_level, "Deepest level evaluated")->capture_default_str();
  sl->add_option("--tau", level_cfg.tau, "Stagnation fraction of the first drop")->capture_default_str();
  sl->add_option("--radius", level_cfg.radius, "Neighbourhood radius")->capture_default_str();
  sl->add_option("--stride", level_cfg.frame_stride, "Use every n-th frame")->capture_default_str();
  sl->add_option("--boundary", level_boundary, "symmetric or periodic")->capture_default_str();
  sl->add_option("--report", report_path, "Output CSV");

  // baseline-svd
  std::string ranks = "2:10";
  int background_rank = 1;
  std::string skew_path;
  std::string kurt_path;
  auto* bs = app.add_subcommand("baseline-svd", "SVD filtering with skewness/kurtosis maps");
  bs->add_option("--in", in_path, "Input cube (TIC1)")->required();
  bs->add_option("--ranks", ranks, "Useful singular ranks lo:hi")->capture_default_str();
  bs->add_option("--background-rank", background_rank, "Ranks treated as background")
      ->capture_default_str();
  bs->add_option("--skew", skew_path, "Output skewness map (PGM)");
  bs->add_option("--kurt", kurt_path, "Output kurtosis map (PGM)");

  // evaluate
  std::string ydet_path;
  std::string reference = "mean";
  auto* ev = app.add_subcommand("evaluate", "Per-fault SNR of raw data and detection map");
  ev->add_option("--in", in_path, "Raw cube (TIC1)")->required();
  ev->add_option("--ydet", ydet_path, "Detection map (single-frame TIC1)")->required();
  ev->add_option("--truth", truth_path, "Ground truth (JSON)")->required();
  ev->add_option("--raw-reference", reference, "mean or best")->capture_default_str();
  ev->add_option("--report", report_path, "Output CSV");

  // correct
  double threshold = 0.7;
  std::string corr_path;
  auto* co = app.add_subcommand("correct", "Suppress pixels that follow the excitation");
  co->add_option("--yr", yr_path, "Per-frame useful subspace (TIC1)")->required();
  co->add_option("--excitation", excitation_path, "Excitation bits")->required();
  co->add_option("--ydet", ydet_path, "Detection map (single-frame TIC1)")->required();
  co->add_option("--threshold", threshold, "Correlation magnitude to suppress")->capture_default_str();
  co->add_option("--out", out_path, "Output corrected map (TIC1)")->required();
  co->add_option("--corr", corr_path, "Output correlation map (TIC1)");

  // render
  auto* rd = app.add_subcommand("render", "Render a single-frame map as 16-bit PGM");
  rd->add_option("--in", in_path, "Single-frame map (TIC1)")->required();
  rd->add_option("--out", out_path, "Output image (PGM)")->required();

  std::vector<const char*> argv{"thermowave"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 1;
  }

  try {
    if (phantom->parsed()) {
      return cmd_phantom(te, seed, noise, no_faults, foil, out_path, excitation_path, truth_path, out);
    }
    if (dwt->parsed()) return cmd_dwt(basis, levels, frame_index, boundary, in_path, dump_dir, out);
    if (det->parsed()) return cmd_detect(detect_flags, in_path, out_path, map_path, yr_path, out);
    if (sb->parsed()) {
      return cmd_select_basis(select_flags, in_path, truth_path, bases, report_path, out, err);
    }
    if (sl->parsed()) {
      level_cfg.boundary = parse_boundary_mode(level_boundary);
      return cmd_select_level(in_path, level_cfg, report_path, out);
    }
    if (bs->parsed()) return cmd_baseline(in_path, ranks, background_rank, skew_path, kurt_path, out);
    if (ev->parsed()) return cmd_evaluate(in_path, ydet_path, truth_path, reference, report_path, out);
    if (co->parsed()) {
      return cmd_correct(yr_path, excitation_path, ydet_path, threshold, out_path, corr_path, out);
    }
    if (rd->parsed()) return cmd_render(in_path, out_path, out);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
  return 1;
}

}  // namespace thermowave::cli
