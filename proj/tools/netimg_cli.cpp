// netimg: command-line front end of the imaging pipeline.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "netimg/config.hpp"
#include "netimg/pipeline.hpp"
#include "netimg/scene_io.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitStage = 3;

struct CommonFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::string> stages;
  std::optional<int> workers;
};

void add_common(CLI::App* cmd, CommonFlags& flags, bool with_stages) {
  cmd->add_option("--config", flags.config, "run configuration (INI)")->required();
  cmd->add_option("--seed", flags.seed, "override the RNG seed");
  cmd->add_option("--out", flags.out, "override the output directory");
  cmd->add_option("--workers", flags.workers, "threads for per-receiver stages");
  if (with_stages) cmd->add_option("--stages", flags.stages, "comma-separated stage list");
}

netimg::RunConfig resolve(const CommonFlags& flags, const std::optional<netimg::Stage>& only) {
  auto cfg = netimg::load_config(flags.config);
  if (flags.seed) {
    cfg.seed = *flags.seed;
    cfg.phase1.seed = *flags.seed;
  }
  if (flags.out) cfg.out = *flags.out;
  if (flags.workers) cfg.workers = *flags.workers;
  if (only) {
    cfg.stages = {*only};
  } else if (flags.stages) {
    cfg.stages = netimg::parse_stages(*flags.stages);
  }
  cfg.validate();
  return cfg;
}

int write_preset(const std::string& name, const std::string& out_dir) {
  namespace fs = std::filesystem;
  auto cfg = netimg::preset(name);
  fs::create_directories(out_dir);
  const std::string scene_file = name + "_scene.ini";
  netimg::save_scene(fs::path(out_dir) / scene_file, cfg.scene);
  cfg.out = (fs::path(out_dir) / ("run_" + name)).string();
  std::ofstream(fs::path(out_dir) / (name + ".ini")) << netimg::format_config(cfg, scene_file);
  std::cout << (fs::path(out_dir) / (name + ".ini")).string() << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multistatic covariance-based imaging pipeline"};
  app.set_version_flag("--version", netimg::library_version());
  app.require_subcommand(1);

  CommonFlags flags;
  std::optional<netimg::Stage> only;
  const std::pair<const char*, netimg::Stage> single[] = {
      {"simulate", netimg::Stage::simulate}, {"image", netimg::Stage::phase1}, {"interp", netimg::Stage::interp},
      {"fuse", netimg::Stage::fuse},         {"score", netimg::Stage::score},  {"baseline", netimg::Stage::baseline}};
  for (const auto& [verb, stage] : single) {
    auto* cmd = app.add_subcommand(verb, std::string("run the ") + netimg::stage_name(stage) + " stage");
    add_common(cmd, flags, false);
    cmd->callback([&only, stage = stage] { only = stage; });
  }
  auto* run_all = app.add_subcommand("run-all", "run every selected stage");
  add_common(run_all, flags, true);

  std::string preset_name;
  std::string preset_out = ".";
  auto* preset_cmd = app.add_subcommand("preset", "write a reference scenario config and scene");
  preset_cmd->add_option("name", preset_name, "fig2 | fig4 | fig5 | table1_col2")->required();
  preset_cmd->add_option("--out", preset_out, "directory for the generated files");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (preset_cmd->parsed()) return write_preset(preset_name, preset_out);
    const auto cfg = resolve(flags, only);
    const auto manifest = netimg::run(cfg);
    for (const auto& stage : manifest.stages) {
      std::cout << stage.name << ": " << stage.artifacts.size() << " artifact(s), " << stage.wall_s << " s";
      if (!stage.note.empty()) std::cout << " (" << stage.note << ")";
      std::cout << '\n';
    }
    return 0;
  } catch (const netimg::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "stage failure: " << e.what() << '\n';
    return kExitStage;
  }
}
