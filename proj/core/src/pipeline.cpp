#include "netimg/pipeline.hpp"

#include <chrono>
#include <exception>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "netimg/covariance_io.hpp"
#include "netimg/interp.hpp"
#include "netimg/raster.hpp"
#include "netimg/scene_io.hpp"

#ifndef NETIMG_VERSION_STRING
#define NETIMG_VERSION_STRING "dev"
#endif

namespace netimg {

namespace fs = std::filesystem;
using json = nlohmann::json;

std::string library_version() { return NETIMG_VERSION_STRING; }

namespace {

// Runs fn(i) for i in [0, count) on up to `workers` threads, rethrowing the
// first failure.
template <typename Fn>
void parallel_for(int count, int workers, Fn&& fn) {
  workers = std::max(1, std::min(workers, count));
  if (workers == 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> threads;
  for (int w = 0; w < workers; ++w) {
    threads.emplace_back([&, w] {
      try {
        for (int i = w; i < count; i += workers) fn(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : threads) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

std::string indexed(const std::string& stem, int k, const std::string& ext) {
  return stem + "_" + std::to_string(k) + ext;
}

void require(const fs::path& path, const char* stage) {
  if (!fs::exists(path)) {
    throw StageError("missing artifact " + path.string() + "; run the '" + stage + "' stage first");
  }
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw StageError("cannot write " + path.string());
  out << text;
}

void write_grid(const fs::path& dir, int k, const GridModel& grid) {
  std::ofstream pos(dir / indexed("grid", k, "_positions.csv"));
  std::ofstream inten(dir / indexed("grid", k, "_intensities.csv"));
  if (!pos || !inten) throw StageError("cannot write grid files in " + dir.string());
  pos << std::setprecision(17) << "q,x,y,x0,y0\n";
  inten << std::setprecision(17) << "q,gamma_r,gamma_beta\n";
  for (int q = 0; q < grid.size(); ++q) {
    pos << q << ',' << grid.positions[q].x() << ',' << grid.positions[q].y() << ','
        << grid.initial_positions[q].x() << ',' << grid.initial_positions[q].y() << '\n';
    inten << q << ',' << grid.gamma[q] << ',' << grid.gamma_beta[q] << '\n';
  }
}

std::vector<std::vector<double>> read_csv_rows(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw StageError("cannot read " + path.string());
  std::vector<std::vector<double>> rows;
  std::string line;
  std::getline(in, line);  // header
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
    rows.push_back(std::move(row));
  }
  return rows;
}

GridModel read_grid(const fs::path& dir, int k) {
  const auto pos_path = dir / indexed("grid", k, "_positions.csv");
  const auto int_path = dir / indexed("grid", k, "_intensities.csv");
  require(pos_path, "phase1");
  require(int_path, "phase1");
  const auto pos = read_csv_rows(pos_path);
  const auto inten = read_csv_rows(int_path);
  if (pos.size() != inten.size()) throw StageError("grid files disagree in " + dir.string());
  GridModel grid;
  grid.gamma.resize(static_cast<long>(pos.size()));
  grid.gamma_beta.resize(static_cast<long>(pos.size()));
  for (std::size_t i = 0; i < pos.size(); ++i) {
    if (pos[i].size() < 5 || inten[i].size() < 3) throw StageError("malformed grid row in " + dir.string());
    grid.positions.emplace_back(pos[i][1], pos[i][2]);
    grid.initial_positions.emplace_back(pos[i][3], pos[i][4]);
    grid.gamma[static_cast<long>(i)] = inten[i][1];
    grid.gamma_beta[static_cast<long>(i)] = inten[i][2];
  }
  return grid;
}

void write_raster(const fs::path& dir, const std::string& stem, const RasterSpec& spec, const RVec& values,
                  StageRecord& rec) {
  write_raster_csv(dir / (stem + ".csv"), spec, values);
  write_raster_pgm(dir / (stem + ".pgm"), spec, values);
  rec.artifacts.push_back(stem + ".csv");
  rec.artifacts.push_back(stem + ".pgm");
}

std::vector<SampleCovariance> read_covariances(const fs::path& dir, int count) {
  std::vector<SampleCovariance> out;
  for (int k = 0; k < count; ++k) {
    const auto path = dir / indexed("covariance", k, ".nisc");
    require(path, "simulate");
    out.push_back(read_covariance(path));
  }
  return out;
}

json metrics_json(const MetricsReport& r) { return json::parse(to_json(r)); }

}  // namespace

Pilot make_run_pilot(const RunConfig& config) {
  return make_pilot(config.pilot, config.n_tx, config.l, config.power_watts(), config.seed);
}

SimulationOutput simulate_scene(const RunConfig& config, int workers) {
  SimulationOutput out;
  out.scene = config.effective_scene();
  out.pilot = make_run_pilot(config);
  out.cloud = sample_cloud(out.scene, config.density, config.seed);
  out.noise_variance = config.noise_variance();
  const int k_count = out.scene.num_receivers();
  out.covariances.resize(k_count);
  parallel_for(k_count, workers, [&](int k) {
    out.covariances[k] = simulate_frames(out.cloud, out.pilot, out.scene, k, NoiseModel{out.noise_variance}, config.m,
                                         config.seed);
  });
  return out;
}

std::vector<Phase1Result> image_views(const RunConfig& config, const Scene& scene, const Pilot& pilot,
                                      const std::vector<SampleCovariance>& covariances, int workers) {
  std::vector<Phase1Result> out(covariances.size());
  Phase1Config p1 = config.phase1;
  p1.seed = config.seed;
  parallel_for(static_cast<int>(covariances.size()), workers, [&](int k) {
    out[k] = run_phase1(covariances[k].matrix, scene, k, pilot, config.noise_variance(), config.q, p1);
  });
  return out;
}

RVec path_loss_raster(const Scene& scene, int k, const RasterSpec& spec) {
  RVec out(spec.size());
  for (int i = 0; i < spec.size(); ++i) {
    out[i] = path_loss(scene.tx.position, scene.rxs.at(k).position, spec.center(i), scene.beta0_sq);
  }
  return out;
}

FusionInputs make_fusion_inputs(const Scene& scene, const RasterSpec& spec, const std::vector<RVec>& images) {
  FusionInputs in;
  in.spec = spec;
  in.images = images;
  for (int k = 0; k < static_cast<int>(images.size()); ++k) in.gamma_beta.push_back(path_loss_raster(scene, k, spec));
  return in;
}

BaselineOutput matched_filter_baseline(const RunConfig& config, const Scene& scene, const Pilot& pilot,
                                       const std::vector<SampleCovariance>& covariances) {
  BaselineOutput out;
  const auto spec = config.raster();
  for (int k = 0; k < static_cast<int>(covariances.size()); ++k) {
    const ArrayResponse response(scene, k, pilot);
    out.views.push_back(matched_filter_image(covariances[k].matrix, response, spec));
  }
  if (out.views.size() == 1) {
    out.fused = out.views.front();
  } else {
    out.fused = run_fusion(make_fusion_inputs(scene, spec, out.views), config.fusion).state.gamma;
  }
  return out;
}

std::string to_json(const RunManifest& manifest) {
  json j;
  j["version"] = manifest.version;
  j["config"] = manifest.config;
  j["stages"] = json::array();
  for (const auto& s : manifest.stages) {
    json rec{{"name", s.name}, {"artifacts", s.artifacts}, {"wall_s", s.wall_s}};
    if (!s.note.empty()) rec["note"] = s.note;
    j["stages"].push_back(rec);
  }
  return j.dump(2);
}

RunManifest run(const RunConfig& config) {
  config.validate();
  const fs::path dir = config.out;
  fs::create_directories(dir);
  const Scene scene = config.effective_scene();
  const int k_count = scene.num_receivers();
  const int workers = config.workers > 0 ? config.workers : k_count;
  const auto spec = config.raster();

  RunManifest manifest;
  manifest.config = config.echo();
  manifest.version = library_version();
  save_scene(dir / "scene.ini", scene);

  for (Stage stage : config.stages) {
    StageRecord rec;
    rec.name = stage_name(stage);
    const auto start = std::chrono::steady_clock::now();
    switch (stage) {
      case Stage::simulate: {
        const auto sim = simulate_scene(config, workers);
        for (int k = 0; k < k_count; ++k) {
          write_covariance(dir / indexed("covariance", k, ".nisc"), sim.covariances[k]);
          write_covariance_csv(dir / indexed("covariance", k, ".csv"), sim.covariances[k]);
          rec.artifacts.push_back(indexed("covariance", k, ".nisc"));
          rec.artifacts.push_back(indexed("covariance", k, ".csv"));
        }
        break;
      }
      case Stage::phase1: {
        const auto covs = read_covariances(dir, k_count);
        const auto results = image_views(config, scene, make_run_pilot(config), covs, workers);
        for (int k = 0; k < k_count; ++k) {
          write_grid(dir, k, results[k].grid);
          json meta{{"receiver", k},           {"seed", config.seed},
                    {"iterations", results[k].iterations}, {"converged", results[k].converged},
                    {"final_cost", results[k].final_cost}, {"eta", results[k].eta}};
          write_text(dir / indexed("phase1", k, ".json"), meta.dump(2));
          rec.artifacts.push_back(indexed("grid", k, "_positions.csv"));
          rec.artifacts.push_back(indexed("grid", k, "_intensities.csv"));
          rec.artifacts.push_back(indexed("phase1", k, ".json"));
        }
        break;
      }
      case Stage::interp: {
        for (int k = 0; k < k_count; ++k) {
          const auto grid = read_grid(dir, k);
          const auto res = interpolate(grid, spec, config.interp);
          write_raster(dir, indexed("raster", k, ""), spec, res.raster.values, rec);
        }
        break;
      }
      case Stage::fuse: {
        if (k_count == 1) {
          rec.note = "single view; the interpolated raster is the final image";
          break;
        }
        std::vector<RVec> images;
        for (int k = 0; k < k_count; ++k) {
          const auto path = dir / indexed("raster", k, ".csv");
          require(path, "interp");
          images.push_back(read_raster_csv(path, spec));
        }
        const auto fused = run_fusion(make_fusion_inputs(scene, spec, images), config.fusion);
        write_raster(dir, "fused", spec, fused.state.gamma, rec);
        for (int k = 0; k < k_count; ++k) {
          const RVec row = fused.state.lambda.row(k).transpose();
          write_raster_csv(dir / indexed("lambda", k, ".csv"), spec, row);
          rec.artifacts.push_back(indexed("lambda", k, ".csv"));
        }
        write_trace_csv(dir / "fusion_trace.csv", fused.trace);
        rec.artifacts.push_back("fusion_trace.csv");
        break;
      }
      case Stage::score: {
        const fs::path final_path = k_count == 1 ? dir / "raster_0.csv" : dir / "fused.csv";
        require(final_path, k_count == 1 ? "interp" : "fuse");
        const RegularRaster final_image{spec, read_raster_csv(final_path, spec)};
        json j;
        j["image"] = final_path.filename().string();
        j["final"] = metrics_json(score(final_image, scene, config.support_fraction));
        j["views"] = json::array();
        for (int k = 0; k < k_count; ++k) {
          const auto path = dir / indexed("raster", k, ".csv");
          require(path, "interp");
          const RegularRaster view{spec, read_raster_csv(path, spec)};
          if (view.values.sum() > 0) {
            j["views"].push_back(metrics_json(score(view, scene, config.support_fraction)));
          } else {
            j["views"].push_back(nullptr);
          }
        }
        write_text(dir / "metrics.json", j.dump(2) + "\n");
        rec.artifacts.push_back("metrics.json");
        break;
      }
      case Stage::baseline: {
        const auto covs = read_covariances(dir, k_count);
        const auto base = matched_filter_baseline(config, scene, make_run_pilot(config), covs);
        for (int k = 0; k < k_count; ++k) write_raster(dir, indexed("baseline", k, ""), spec, base.views[k], rec);
        if (k_count > 1) write_raster(dir, "baseline_fused", spec, base.fused, rec);
        json j;
        j["final"] = metrics_json(score({spec, base.fused}, scene, config.support_fraction));
        write_text(dir / "metrics_baseline.json", j.dump(2) + "\n");
        rec.artifacts.push_back("metrics_baseline.json");
        break;
      }
    }
    rec.wall_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    manifest.stages.push_back(std::move(rec));
  }
  write_text(dir / "manifest.json", to_json(manifest) + "\n");
  return manifest;
}

namespace {

const Vec2 kTx(-3.0, 7.5);
const Vec2 kRx[3] = {Vec2(18.0, 7.5), Vec2(7.5, 18.0), Vec2(7.5, -3.0)};
const Vec2 kRoiCenter(7.5, 7.5);

Scene base_scene(const std::vector<int>& receivers) {
  Scene s;
  s.roi = {0.0, 15.0, 0.0, 15.0};
  s.tx = {kTx, 1, ArrayRole::transmit};
  for (int r : receivers) s.rxs.push_back({kRx[r], 1, ArrayRole::receive});
  s.beta0_sq = std::pow(10.0, -35.0 / 10.0 * 2.0);
  return s;
}

RasterMaskShape letter(const std::string& rows_top_first, const Vec2& origin, double cell) {
  std::vector<std::string> rows;
  std::stringstream ss(rows_top_first);
  std::string row;
  while (std::getline(ss, row, '/')) rows.push_back(row);
  RasterMaskShape m;
  m.origin = origin;
  m.cell_size = cell;
  m.rows = static_cast<int>(rows.size());
  m.cols = static_cast<int>(rows.front().size());
  m.cells.assign(static_cast<std::size_t>(m.rows) * m.cols, 0);
  for (int r = 0; r < m.rows; ++r) {
    for (int c = 0; c < m.cols; ++c) m.cells[static_cast<std::size_t>(r) * m.cols + c] = rows[m.rows - 1 - r][c] == '#';
  }
  return m;
}

}  // namespace

std::vector<std::string> preset_names() { return {"fig2", "fig4", "fig5", "table1_col2"}; }

Scene preset_scene(const std::string& name) {
  if (name == "fig2") {
    Scene s = base_scene({0});
    s.targets.push_back(PolygonShape{{Vec2(2.5, 2.0), Vec2(7.5, 2.0), Vec2(5.0, 6.0)}});
    s.targets.push_back(DiscShape{Vec2(10.5, 10.5), 2.2});
    return s;
  }
  if (name == "fig4") {
    Scene s = base_scene({1});
    s.targets.push_back(AnnulusShape{kRoiCenter, 2.0, 4.0});
    return s;
  }
  if (name == "fig5") {
    Scene s = base_scene({0, 1, 2});
    s.targets.push_back(AnnulusShape{kRoiCenter, 2.0, 4.0});
    for (int k = 0; k < 3; ++k) s.fovs.push_back({k, bearing(kRx[k], kRoiCenter), kPi / 8.0});
    return s;
  }
  if (name == "table1_col2") {
    Scene s = base_scene({0, 1, 2});
    constexpr double cell = 0.8;
    s.targets.push_back(letter("#####/..#../..#../..#../..#../..#../#####", Vec2(1.5, 8.4), cell));
    s.targets.push_back(letter(".####/#..../#..../.###./....#/....#/####.", Vec2(9.5, 8.4), cell));
    s.targets.push_back(letter("..#../.#.#./#...#/#...#/#####/#...#/#...#", Vec2(1.5, 1.0), cell));
    s.targets.push_back(letter(".####/#..../#..../#..../#..../#..../.####", Vec2(9.5, 1.0), cell));
    for (int k = 0; k < 3; ++k) s.fovs.push_back({k, bearing(kRx[k], kTx), kPi / 5.0});
    return s;
  }
  throw ConfigError("unknown preset '" + name + "'");
}

RunConfig preset(const std::string& name) {
  RunConfig c;
  c.scene = preset_scene(name);
  c.scene_file = name + "_scene.ini";
  c.m = 20;
  c.q1 = 60;
  c.q2 = 60;
  c.phase1.iter_max = 30;
  c.phase1.eta_scale = 10.0;
  if (name == "fig2") {
    c.n_tx = c.n_rx = c.l = 16;
    c.power_dbm = 10.0;
    c.q = 400;
  } else if (name == "fig4") {
    c.n_tx = c.n_rx = c.l = 8;
    c.power_dbm = 10.0;
    c.q = 900;
  } else if (name == "fig5") {
    c.n_tx = c.n_rx = c.l = 8;
    c.power_dbm = 0.0;
    c.q = 900;
    c.fusion.eta_ratio = 3.0;  // TV-heavy fusion
  } else if (name == "table1_col2") {
    c.n_tx = c.n_rx = c.l = 12;
    c.power_dbm = 10.0;
    c.q = 900;
  }
  c.out = "out_" + name;
  c.validate();
  return c;
}

}  // namespace netimg
