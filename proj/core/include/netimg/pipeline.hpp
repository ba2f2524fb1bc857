#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "netimg/config.hpp"
#include "netimg/fusion.hpp"
#include "netimg/metrics.hpp"
#include "netimg/signal.hpp"
#include "netimg/single_view.hpp"

namespace netimg {

/// Raised when a stage cannot run, e.g. because an upstream artifact is missing.
class StageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string library_version();

struct SimulationOutput {
  Scene scene;  // effective scene (antenna counts applied)
  Pilot pilot;
  ScattererCloud cloud;
  double noise_variance = 0.0;
  std::vector<SampleCovariance> covariances;
};

/// Pilot regenerated deterministically from the seed.
Pilot make_run_pilot(const RunConfig& config);

/// Cloud and per-receiver sample covariances; receivers run on `workers` threads.
SimulationOutput simulate_scene(const RunConfig& config, int workers = 1);

std::vector<Phase1Result> image_views(const RunConfig& config, const Scene& scene, const Pilot& pilot,
                                      const std::vector<SampleCovariance>& covariances, int workers = 1);

/// Path loss of receiver k at every cell centre.
RVec path_loss_raster(const Scene& scene, int k, const RasterSpec& spec);

FusionInputs make_fusion_inputs(const Scene& scene, const RasterSpec& spec, const std::vector<RVec>& images);

/// Matched-filter images per receiver fused with the same fusion algorithm.
struct BaselineOutput {
  std::vector<RVec> views;
  RVec fused;
};
BaselineOutput matched_filter_baseline(const RunConfig& config, const Scene& scene, const Pilot& pilot,
                                       const std::vector<SampleCovariance>& covariances);

struct StageRecord {
  std::string name;
  std::vector<std::string> artifacts;
  double wall_s = 0.0;
  std::string note;
};

struct RunManifest {
  std::map<std::string, std::string> config;
  std::vector<StageRecord> stages;
  std::string version;
};

std::string to_json(const RunManifest& manifest);

/// Executes the configured stages in dependency order inside config.out.
RunManifest run(const RunConfig& config);

std::vector<std::string> preset_names();
/// Parameterizations of the reference scenarios: fig2, fig4, fig5, table1_col2.
RunConfig preset(const std::string& name);
Scene preset_scene(const std::string& name);

}  // namespace netimg
