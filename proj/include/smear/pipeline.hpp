#pragma once

// End-to-end analysis: lowpass -> equalize -> nucleus threshold -> label and
// merge -> Canny + circle Hough -> white-cell removal -> template counting ->
// class overlay and report.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "smear/canny.hpp"
#include "smear/error.hpp"
#include "smear/hough.hpp"
#include "smear/netpbm.hpp"
#include "smear/raster.hpp"
#include "smear/segmentation.hpp"
#include "smear/spectral.hpp"
#include "smear/template_match.hpp"

namespace smear {

struct PipelineConfig {
  ButterworthParams butterworth;
  CannyParams canny;
  HoughParams hough;
  double merge_dist_px = 60.0;
  int margin_px = 8;
  // Otsu passes over the dark class when picking the nucleus level.
  int nucleus_otsu_passes = 2;
  // Search-window padding; unset means the Hough radius.
  std::optional<int> search_pad_px;
  PeakParams peak;
  std::vector<TemplateSpec> templates;
  // Overlay radius of red cells; unset means half the mean template side.
  std::optional<double> red_radius_px;
  bool stage_dump = false;

  void validate() const {
    butterworth.validate();
    canny.validate();
    hough.validate();
    peak.validate();
    if (!(merge_dist_px > 0.0)) throw InvalidArgument("merge_dist_px must be > 0");
    if (margin_px < 0) throw InvalidArgument("margin_px must be >= 0");
    if (nucleus_otsu_passes < 1) throw InvalidArgument("nucleus_otsu_passes must be >= 1");
    if (search_pad_px && *search_pad_px < 0) throw InvalidArgument("search_pad_px must be >= 0");
    if (red_radius_px && !(*red_radius_px >= 0.0)) throw InvalidArgument("red_radius_px must be >= 0");
    for (const TemplateSpec& t : templates) {
      if (!t.rect.valid()) throw InvalidArgument("template '" + t.id + "' has an empty rect");
      if (!(t.weight > 0.0)) throw InvalidArgument("template '" + t.id + "' needs a positive weight");
    }
  }
  int search_pad() const { return search_pad_px.value_or(hough.radius); }
};

enum class PixelClass : std::uint8_t { background = 0, red_cell = 1, cytoplasm = 2, nucleus = 3 };

struct ClassTag;
using ClassOverlay = Raster<PixelClass, ClassTag>;

struct AnalysisReport {
  std::size_t white_count = 0;
  std::size_t red_count = 0;
  std::vector<WhiteCell> white_cells;
  std::vector<PointRC> red_centers;
  std::size_t rejected_fake_regions = 0;
  std::vector<std::pair<std::string, double>> stage_timings_ms;  // execution order
  PipelineConfig config;
};

/// Precedence nucleus > cytoplasm > red cell > background. Nucleus and
/// cytoplasm only exist inside accepted white-cell discs.
inline ClassOverlay classify_pixels(const std::vector<WhiteCell>& white_cells, const BinaryMask& nucleus_mask,
                                    const std::vector<PointRC>& red_centers, double red_radius) {
  const int w = nucleus_mask.width(), h = nucleus_mask.height();
  ClassOverlay out(w, h, PixelClass::background);
  const double r2 = red_radius * red_radius;
  for (const PointRC& c : red_centers) {
    const int r0 = std::max(0, static_cast<int>(std::floor(c.row - red_radius)));
    const int r1 = std::min(h - 1, static_cast<int>(std::ceil(c.row + red_radius)));
    const int c0 = std::max(0, static_cast<int>(std::floor(c.col - red_radius)));
    const int c1 = std::min(w - 1, static_cast<int>(std::ceil(c.col + red_radius)));
    for (int r = r0; r <= r1; ++r)
      for (int q = c0; q <= c1; ++q)
        if ((r - c.row) * (r - c.row) + (q - c.col) * (q - c.col) <= r2) out(r, q) = PixelClass::red_cell;
  }
  const BinaryMask discs = disc_mask(white_cells, w, h);
  for (std::size_t i = 0; i < out.size(); ++i)
    if (discs[i]) out[i] = nucleus_mask[i] ? PixelClass::nucleus : PixelClass::cytoplasm;
  return out;
}

inline Rgb class_color(PixelClass c) {
  switch (c) {
    case PixelClass::red_cell: return {255, 0, 0};
    case PixelClass::cytoplasm: return {255, 255, 0};
    case PixelClass::nucleus: return {0, 255, 255};
    case PixelClass::background: break;
  }
  return {0, 0, 255};
}

inline RgbImage render_overlay(const ClassOverlay& overlay) {
  RgbImage out(overlay.width(), overlay.height());
  for (std::size_t i = 0; i < overlay.size(); ++i) out[i] = class_color(overlay[i]);
  return out;
}

struct StageImage {
  std::string extension;  // "pgm" or "ppm"
  Bytes bytes;
};

struct PipelineResult {
  AnalysisReport report;
  ClassOverlay overlay;

  GrayImage input;
  GrayImage filtered;
  GrayImage equalized;
  int nucleus_level = 0;
  BinaryMask nucleus_mask;
  Labeling labeling;
  std::vector<NucleusGroup> groups;
  BinaryMask edges;
  WhiteCellDetection white;
  GrayImage red_only;
  std::vector<Template> templates;
  RedCellCount red;

  /// Encoded stage artifacts keyed by stage name.
  std::map<std::string, StageImage> stage_images() const {
    std::map<std::string, StageImage> out;
    out["original"] = {"pgm", save_pgm(input)};
    out["spectrum"] = {"pgm", save_pgm(spectrum_view(dft2(input)))};
    out["filtered"] = {"pgm", save_pgm(filtered)};
    out["equalized"] = {"pgm", save_pgm(equalized)};
    out["binary"] = {"pgm", save_pgm(nucleus_mask)};
    out["edges"] = {"pgm", save_pgm(edges)};
    out["red_only"] = {"pgm", save_pgm(red_only)};
    if (red.combined) out["res_combined"] = {"pgm", save_pgm(normalize_minmax(*red.combined))};
    for (std::size_t i = 0; i < red.maps.size() && i < templates.size(); ++i)
      out["res_" + templates[i].id] = {"pgm", save_pgm(normalize_minmax(red.maps[i]))};
    out["overlay"] = {"ppm", save_ppm(render_overlay(overlay))};
    return out;
  }
};

namespace detail {

class StageClock {
public:
  explicit StageClock(std::vector<std::pair<std::string, double>>& sink) : sink_(sink) {}

  template <class Fn>
  decltype(auto) operator()(const std::string& name, Fn&& fn) {
    const auto start = std::chrono::steady_clock::now();
    struct Record {
      StageClock& self;
      const std::string& name;
      std::chrono::steady_clock::time_point start;
      ~Record() {
        const std::chrono::duration<double, std::milli> ms = std::chrono::steady_clock::now() - start;
        self.sink_.emplace_back(name, ms.count());
      }
    } record{*this, name, start};
    try {
      return fn();
    } catch (const StageError&) {
      throw;
    } catch (const std::exception& e) {
      throw StageError(name, e.what());
    }
  }

private:
  std::vector<std::pair<std::string, double>>& sink_;
};

inline double mean_template_radius(const std::vector<TemplateSpec>& templates) {
  if (templates.empty()) return 0.0;
  double sum = 0.0;
  for (const TemplateSpec& t : templates) sum += std::min(t.rect.width(), t.rect.height()) / 2.0;
  return sum / static_cast<double>(templates.size());
}

}  // namespace detail

/// Runs every stage on `img`. Deterministic for a fixed input and config
/// (timings aside). Stage failures surface as StageError.
inline PipelineResult run_pipeline(const GrayImage& img, const PipelineConfig& cfg) {
  try {
    cfg.validate();
  } catch (const std::exception& e) {
    throw StageError("config", e.what());
  }
  PipelineResult res;
  res.input = img;
  res.report.config = cfg;
  detail::StageClock stage(res.report.stage_timings_ms);

  res.filtered = stage("lowpass", [&] { return lowpass_filter(img, cfg.butterworth); });
  res.equalized = stage("equalize", [&] { return equalize_histogram(res.filtered); });

  stage("threshold", [&] {
    // Level picked on the filtered histogram: equalization is monotone but
    // packs the dark classes into a few adjacent levels.
    const Histogram hist = histogram256(res.filtered);
    const auto occupied = std::count_if(hist.begin(), hist.end(), [](std::size_t n) { return n != 0; });
    if (occupied < 2) {
      res.nucleus_level = -1;
      res.nucleus_mask = BinaryMask(img.width(), img.height(), 0);
      return;
    }
    res.nucleus_level = dark_class_level(hist, cfg.nucleus_otsu_passes);
    res.nucleus_mask = binarize_dark(res.filtered, res.nucleus_level);
  });

  stage("label_merge", [&] {
    res.labeling = label_8conn(res.nucleus_mask, cfg.margin_px);
    res.groups = merge_nuclei(res.labeling.regions, cfg.merge_dist_px);
    for (NucleusGroup& g : res.groups) g.search_window = search_window(g, cfg.search_pad(), bounds_of(img));
  });

  res.edges = stage("canny", [&] { return canny(res.equalized, cfg.canny); });
  res.white = stage("hough", [&] { return detect_white_cells(res.groups, res.edges, cfg.hough); });
  res.red_only = stage("white_removal", [&] { return remove_white_cells(res.equalized, res.white.accepted); });

  stage("red_count", [&] {
    res.templates = extract_templates(res.red_only, cfg.templates);
    res.red = count_red_cells(res.red_only, res.templates, cfg.peak);
  });

  std::vector<PointRC> red_centers;
  for (const Peak& p : res.red.peaks) red_centers.push_back(p.center);
  res.overlay = stage("overlay", [&] {
    const double red_radius = cfg.red_radius_px.value_or(detail::mean_template_radius(cfg.templates));
    return classify_pixels(res.white.accepted, res.nucleus_mask, red_centers, red_radius);
  });

  AnalysisReport& rep = res.report;
  rep.white_cells = res.white.accepted;
  rep.white_count = rep.white_cells.size();
  rep.rejected_fake_regions = res.white.rejected_group_ids.size();
  rep.red_centers = std::move(red_centers);
  rep.red_count = rep.red_centers.size();
  return res;
}

}  // namespace smear
