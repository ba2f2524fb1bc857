#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "netimg/fusion.hpp"
#include "netimg/geometry.hpp"
#include "netimg/interp.hpp"
#include "netimg/signal.hpp"
#include "netimg/single_view.hpp"

namespace netimg {

enum class Stage { simulate, phase1, interp, fuse, score, baseline };

const char* stage_name(Stage s);
Stage parse_stage(const std::string& name);
/// Comma-separated stage list; "all" selects every stage except baseline.
std::vector<Stage> parse_stages(const std::string& text);
std::vector<Stage> default_stages();

struct RunConfig {
  Scene scene;
  std::string scene_file;  // as written in the config, for the echo
  int n_tx = 16;
  int n_rx = 16;
  int l = 16;
  int m = 20;
  double power_dbm = 10.0;
  int q = 400;
  int q1 = 60;
  int q2 = 60;
  double psd_dbm_hz = -169.0;
  double bandwidth_hz = 1e6;
  double density = 200.0;
  PilotKind pilot = PilotKind::orthogonal;
  double support_fraction = 0.95;
  Phase1Config phase1;
  EPConfig interp;
  FusionConfig fusion;
  std::uint64_t seed = 1;
  std::filesystem::path out = "out";
  std::vector<Stage> stages = default_stages();
  int workers = 0;  // 0 selects the number of receivers

  void validate() const;
  /// Scene with the configured antenna counts applied to every array.
  Scene effective_scene() const;
  double noise_variance() const;
  double power_watts() const { return dbm_to_watts(power_dbm); }
  RasterSpec raster() const { return {q1, q2, scene.roi}; }
  /// Flat key/value echo of every setting.
  std::map<std::string, std::string> echo() const;
};

/// INI run configuration with sections [run], [phase1], [interp], [fusion].
/// The scene path in [run] is resolved relative to the config file.
RunConfig load_config(const std::filesystem::path& path);
std::string format_config(const RunConfig& config, const std::string& scene_file);

}  // namespace netimg
