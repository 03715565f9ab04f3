// Command-line front end: analyze, synth, tune, serve.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "smear/json_io.hpp"
#include "smear/netpbm.hpp"
#include "smear/pipeline.hpp"
#include "smear/service.hpp"
#include "smear/synth.hpp"

namespace {

using namespace smear;

Json read_json(const std::string& path) {
  const Bytes bytes = read_file(path);
  try {
    return Json::parse(bytes.begin(), bytes.end());
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

GrayImage read_pgm(const std::string& path) {
  const Bytes bytes = read_file(path);
  try {
    return load_pgm(bytes);
  } catch (const ParseError& e) {
    throw Error(path + ": " + e.what());
  }
}

void write_json(const std::string& path, const Json& j) { write_file(path, j.dump(2) + "\n"); }

int analyze(const std::string& input, const std::string& config, const std::string& out_overlay,
            const std::string& out_report, const std::string& dump_dir, bool no_timings) {
  const GrayImage img = read_pgm(input);
  const PipelineConfig cfg = config.empty() ? PipelineConfig{} : config_from_json(read_json(config));
  const PipelineResult res = run_pipeline(img, cfg);

  if (!out_overlay.empty()) write_file(out_overlay, save_ppm(render_overlay(res.overlay)));
  const std::string report = report_to_string(res.report, {.timings = !no_timings});
  if (!out_report.empty())
    write_file(out_report, report);
  else
    std::cout << report;

  std::string dir = dump_dir;
  if (dir.empty() && cfg.stage_dump) dir = "stages";
  if (!dir.empty()) {
    std::filesystem::create_directories(dir);
    for (const auto& [name, image] : res.stage_images())
      write_file(std::filesystem::path(dir) / (name + "." + image.extension), image.bytes);
  }
  std::cerr << "white cells: " << res.report.white_count << ", red cells: " << res.report.red_count
            << ", rejected regions: " << res.report.rejected_fake_regions << "\n";
  return 0;
}

int synth(const std::string& spec_path, const std::string& out, const std::string& truth) {
  const SynthSpec spec = spec_path.empty() ? SynthSpec{} : synth_spec_from_json(read_json(spec_path));
  const SynthResult res = synth_smear(spec);
  write_file(out, save_pgm(res.image));
  if (!truth.empty()) write_json(truth, truth_to_json(res.truth));
  return 0;
}

int tune(const std::string& input, const std::string& config, const std::string& truth_path,
         const std::string& grid_path, const std::string& out) {
  const GrayImage img = read_pgm(input);
  const PipelineConfig cfg = config_from_json(read_json(config));
  if (cfg.templates.empty()) throw ConfigError("tune needs at least one template in the config");
  const SynthTruth truth = truth_from_json(read_json(truth_path));
  const auto grid = grid_from_json(read_json(grid_path));

  const PipelineResult res = run_pipeline(img, cfg);
  PeakParams peak = cfg.peak;
  peak.min_peak_separation = cfg.peak.separation_for(res.templates);
  const TuneResult tuned = tune_weights(res.red.maps, truth.red_centers, grid, peak);

  Json entries = Json::array();
  for (const TuneEntry& e : tuned.entries)
    entries.push_back(
        Json{{"weights", e.weights}, {"detected", e.detected}, {"count_error", e.count_error}, {"unmatched", e.unmatched}});
  const Json result{{"best_index", tuned.best_index},
                    {"best_weights", tuned.best_weights()},
                    {"truth_count", truth.red_centers.size()},
                    {"entries", entries}};
  if (out.empty())
    std::cout << result.dump(2) << "\n";
  else
    write_json(out, result);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Blood-smear white/red cell segmentation and counting"};
  app.require_subcommand(1);

  std::string input, config, out_overlay, out_report, dump_dir;
  bool no_timings = false;
  auto* analyze_cmd = app.add_subcommand("analyze", "Run the full pipeline on one PGM image");
  analyze_cmd->add_option("--input", input, "Input image (binary PGM)")->required();
  analyze_cmd->add_option("--config", config, "Pipeline config JSON");
  analyze_cmd->add_option("--out-overlay", out_overlay, "Class overlay (binary PPM)");
  analyze_cmd->add_option("--out-report", out_report, "Report JSON (stdout when omitted)");
  analyze_cmd->add_option("--dump-stages", dump_dir, "Directory for per-stage images");
  analyze_cmd->add_flag("--no-timings", no_timings, "Omit stage_timings_ms from the report");

  std::string spec, out, truth;
  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic smear with ground truth");
  synth_cmd->add_option("--spec", spec, "Synth spec JSON (defaults when omitted)");
  synth_cmd->add_option("--out", out, "Output image (binary PGM)")->required();
  synth_cmd->add_option("--truth", truth, "Ground-truth JSON");

  std::string tune_input, tune_config, tune_truth, grid, tune_out;
  auto* tune_cmd = app.add_subcommand("tune", "Grid-search template weights against ground truth");
  tune_cmd->add_option("--input", tune_input, "Input image (binary PGM)")->required();
  tune_cmd->add_option("--config", tune_config, "Pipeline config JSON with templates")->required();
  tune_cmd->add_option("--truth", tune_truth, "Ground-truth JSON (red_centers)")->required();
  tune_cmd->add_option("--grid", grid, "JSON array of weight vectors")->required();
  tune_cmd->add_option("--out", tune_out, "Result JSON (stdout when omitted)");

  int port = 8080;
  std::string host = "127.0.0.1", serve_config;
  auto* serve_cmd = app.add_subcommand("serve", "Serve the session HTTP API");
  serve_cmd->add_option("--port", port, "TCP port")->check(CLI::Range(1, 65535));
  serve_cmd->add_option("--host", host, "Bind address");
  serve_cmd->add_option("--config", serve_config, "Default config for runs posted without a body");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*analyze_cmd) return analyze(input, config, out_overlay, out_report, dump_dir, no_timings);
    if (*synth_cmd) return synth(spec, out, truth);
    if (*tune_cmd) return tune(tune_input, tune_config, tune_truth, grid, tune_out);
    if (*serve_cmd) {
      const PipelineConfig defaults = serve_config.empty() ? PipelineConfig{} : config_from_json(read_json(serve_config));
      std::cerr << "listening on http://" << host << ":" << port << "\n";
      if (!serve(defaults, port, host)) {
        std::cerr << "error: cannot listen on " << host << ":" << port << "\n";
        return 1;
      }
      return 0;
    }
  } catch (const StageError& e) {
    std::cerr << "error in stage '" << e.stage() << "': " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
