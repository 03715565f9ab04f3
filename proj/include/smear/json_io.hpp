#pragma once

// JSON forms of the pipeline config, the analysis report, synth specs and
// ground truth. Objects serialize with alphabetically ordered keys.

#include <string>
#include <vector>

#include "json.hpp"
#include "smear/error.hpp"
#include "smear/pipeline.hpp"
#include "smear/synth.hpp"

namespace smear {

using Json = nlohmann::json;

class ConfigError : public InvalidArgument {
public:
  using InvalidArgument::InvalidArgument;
};

namespace json_detail {

template <class T>
void read(const Json& obj, const char* key, T& out) {
  if (!obj.contains(key) || obj.at(key).is_null()) return;
  try {
    out = obj.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(std::string("key '") + key + "' has the wrong type");
  }
}

template <class T>
void read(const Json& obj, const char* key, std::optional<T>& out) {
  if (!obj.contains(key) || obj.at(key).is_null()) return;
  T value{};
  read(obj, key, value);
  out = value;
}

inline const Json& object_at(const Json& obj, const char* key) {
  static const Json empty = Json::object();
  if (!obj.contains(key) || obj.at(key).is_null()) return empty;
  if (!obj.at(key).is_object()) throw ConfigError(std::string("key '") + key + "' must be an object");
  return obj.at(key);
}

inline Json point(const PointRC& p) { return Json{{"row", p.row}, {"col", p.col}}; }

inline PointRC read_point(const Json& j) {
  if (!j.is_object() || !j.contains("row") || !j.contains("col")) throw ConfigError("point needs 'row' and 'col'");
  PointRC p;
  read(j, "row", p.row);
  read(j, "col", p.col);
  return p;
}

template <class T>
Json optional_value(const std::optional<T>& v) {
  return v ? Json(*v) : Json(nullptr);
}

}  // namespace json_detail

inline Json rect_to_json(const Rect& r) {
  return Json{{"row_min", r.row_min}, {"row_max", r.row_max}, {"col_min", r.col_min}, {"col_max", r.col_max}};
}

inline Rect rect_from_json(const Json& j) {
  if (!j.is_object()) throw ConfigError("rect must be an object");
  for (const char* k : {"row_min", "row_max", "col_min", "col_max"})
    if (!j.contains(k)) throw ConfigError(std::string("rect is missing '") + k + "'");
  Rect r;
  json_detail::read(j, "row_min", r.row_min);
  json_detail::read(j, "row_max", r.row_max);
  json_detail::read(j, "col_min", r.col_min);
  json_detail::read(j, "col_max", r.col_max);
  return r;
}

inline Json config_to_json(const PipelineConfig& c) {
  Json templates = Json::array();
  for (const TemplateSpec& t : c.templates)
    templates.push_back(Json{{"id", t.id}, {"rect", rect_to_json(t.rect)}, {"weight", t.weight}});
  return Json{
      {"butterworth", {{"order", c.butterworth.order}, {"cutoff", c.butterworth.cutoff}}},
      {"canny",
       {{"sigma", c.canny.gauss_sigma}, {"high_quantile", c.canny.high_quantile}, {"low_ratio", c.canny.low_ratio}}},
      {"hough", {{"radius_px", c.hough.radius}, {"min_vote_fraction", c.hough.min_vote_fraction}}},
      {"merge_dist_px", c.merge_dist_px},
      {"margin_px", c.margin_px},
      {"nucleus_otsu_passes", c.nucleus_otsu_passes},
      {"search_pad_px", json_detail::optional_value(c.search_pad_px)},
      {"peak",
       {{"threshold_quantile", c.peak.threshold_quantile},
        {"min_peak_separation", json_detail::optional_value(c.peak.min_peak_separation)}}},
      {"red_radius_px", json_detail::optional_value(c.red_radius_px)},
      {"stage_dump", c.stage_dump},
      {"templates", templates},
  };
}

/// Missing keys keep their defaults; wrong types raise ConfigError.
inline PipelineConfig config_from_json(const Json& j) {
  using json_detail::object_at;
  using json_detail::read;
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  PipelineConfig c;
  const Json& bw = object_at(j, "butterworth");
  read(bw, "order", c.butterworth.order);
  read(bw, "cutoff", c.butterworth.cutoff);
  const Json& canny = object_at(j, "canny");
  read(canny, "sigma", c.canny.gauss_sigma);
  read(canny, "high_quantile", c.canny.high_quantile);
  read(canny, "low_ratio", c.canny.low_ratio);
  const Json& hough = object_at(j, "hough");
  read(hough, "radius_px", c.hough.radius);
  read(hough, "min_vote_fraction", c.hough.min_vote_fraction);
  read(j, "merge_dist_px", c.merge_dist_px);
  read(j, "margin_px", c.margin_px);
  read(j, "nucleus_otsu_passes", c.nucleus_otsu_passes);
  read(j, "search_pad_px", c.search_pad_px);
  const Json& peak = object_at(j, "peak");
  read(peak, "threshold_quantile", c.peak.threshold_quantile);
  read(peak, "min_peak_separation", c.peak.min_peak_separation);
  read(j, "red_radius_px", c.red_radius_px);
  read(j, "stage_dump", c.stage_dump);
  if (j.contains("templates") && !j.at("templates").is_null()) {
    if (!j.at("templates").is_array()) throw ConfigError("'templates' must be an array");
    for (const Json& t : j.at("templates")) {
      if (!t.is_object() || !t.contains("rect")) throw ConfigError("each template needs a 'rect'");
      TemplateSpec spec;
      spec.id = std::to_string(c.templates.size() + 1);
      if (t.contains("id") && t.at("id").is_number_integer())
        spec.id = std::to_string(t.at("id").get<long long>());
      else
        read(t, "id", spec.id);
      spec.rect = rect_from_json(t.at("rect"));
      read(t, "weight", spec.weight);
      c.templates.push_back(std::move(spec));
    }
  }
  try {
    c.validate();
  } catch (const InvalidArgument& e) {
    throw ConfigError(e.what());
  }
  return c;
}

inline PipelineConfig config_from_string(const std::string& text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  return config_from_json(j);
}

struct ReportFormat {
  bool timings = true;
  bool config = true;
};

inline Json report_to_json(const AnalysisReport& r, ReportFormat fmt = {}) {
  Json cells = Json::array();
  for (const WhiteCell& w : r.white_cells)
    cells.push_back(Json{{"row", w.center.row}, {"col", w.center.col}, {"radius", w.radius}, {"votes", w.votes}});
  Json reds = Json::array();
  for (const PointRC& p : r.red_centers) reds.push_back(json_detail::point(p));
  Json out{{"white_count", r.white_count},
           {"red_count", r.red_count},
           {"white_cells", cells},
           {"red_centers", reds},
           {"rejected_fake_regions", r.rejected_fake_regions}};
  if (fmt.timings) {
    Json timings = Json::object();
    for (const auto& [name, ms] : r.stage_timings_ms) timings[name] = ms;
    out["stage_timings_ms"] = timings;
  }
  if (fmt.config) out["config"] = config_to_json(r.config);
  return out;
}

inline std::string report_to_string(const AnalysisReport& r, ReportFormat fmt = {}) {
  return report_to_json(r, fmt).dump(2) + "\n";
}

inline SynthSpec synth_spec_from_json(const Json& j) {
  using json_detail::read;
  if (!j.is_object()) throw ConfigError("synth spec must be a JSON object");
  SynthSpec s;
  read(j, "width", s.width);
  read(j, "height", s.height);
  read(j, "n_red", s.n_red);
  read(j, "red_radius", s.red_radius);
  read(j, "n_white", s.n_white);
  read(j, "white_radius", s.white_radius);
  read(j, "n_smudges", s.n_smudges);
  read(j, "overlap_allowed", s.overlap_allowed);
  read(j, "noise_amplitude", s.noise_amplitude);
  read(j, "noise_frequency", s.noise_frequency);
  read(j, "contrast_scale", s.contrast_scale);
  read(j, "rng_seed", s.rng_seed);
  return s;
}

inline Json synth_spec_to_json(const SynthSpec& s) {
  return Json{{"width", s.width},
              {"height", s.height},
              {"n_red", s.n_red},
              {"red_radius", s.red_radius},
              {"n_white", s.n_white},
              {"white_radius", s.white_radius},
              {"n_smudges", s.n_smudges},
              {"overlap_allowed", s.overlap_allowed},
              {"noise_amplitude", s.noise_amplitude},
              {"noise_frequency", s.noise_frequency},
              {"contrast_scale", s.contrast_scale},
              {"rng_seed", s.rng_seed}};
}

inline Json truth_to_json(const SynthTruth& t) {
  auto points = [](const std::vector<PointRC>& ps) {
    Json a = Json::array();
    for (const PointRC& p : ps) a.push_back(json_detail::point(p));
    return a;
  };
  return Json{{"white_count", t.white_centers.size()},
              {"red_count", t.red_centers.size()},
              {"white_centers", points(t.white_centers)},
              {"red_centers", points(t.red_centers)},
              {"smudge_centers", points(t.smudge_centers)}};
}

inline SynthTruth truth_from_json(const Json& j) {
  if (!j.is_object()) throw ConfigError("truth must be a JSON object");
  auto points = [&](const char* key) {
    std::vector<PointRC> out;
    if (!j.contains(key)) return out;
    if (!j.at(key).is_array()) throw ConfigError(std::string("'") + key + "' must be an array");
    for (const Json& p : j.at(key)) out.push_back(json_detail::read_point(p));
    return out;
  };
  return {points("white_centers"), points("red_centers"), points("smudge_centers")};
}

/// Accepts either a bare array of weight vectors or {"grid": [...]}.
inline std::vector<std::vector<double>> grid_from_json(const Json& j) {
  const Json& arr = j.is_object() && j.contains("grid") ? j.at("grid") : j;
  if (!arr.is_array()) throw ConfigError("grid must be an array of weight vectors");
  std::vector<std::vector<double>> grid;
  for (const Json& row : arr) {
    try {
      grid.push_back(row.get<std::vector<double>>());
    } catch (const nlohmann::json::exception&) {
      throw ConfigError("grid entries must be arrays of numbers");
    }
  }
  return grid;
}

}  // namespace smear
