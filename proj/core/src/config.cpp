#include "netimg/config.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "netimg/scene_io.hpp"

namespace netimg {

namespace pt = boost::property_tree;

namespace {

constexpr Stage kAllStages[] = {Stage::simulate, Stage::phase1, Stage::interp,
                                Stage::fuse,     Stage::score,  Stage::baseline};

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

template <typename T>
void read(const pt::ptree& tree, const std::string& key, T& target) {
  try {
    if (const auto v = tree.get_optional<T>(key)) target = *v;
  } catch (const pt::ptree_bad_data&) {
    throw ConfigError("config: bad value for '" + key + "'");
  }
}

template <typename T>
void read_optional(const pt::ptree& tree, const std::string& key, std::optional<T>& target) {
  const auto raw = tree.get_optional<std::string>(key);
  if (!raw || trim(*raw) == "auto" || trim(*raw).empty()) return;
  T value{};
  read(tree, key, value);
  target = value;
}

std::string fmt(double x) {
  std::array<char, 32> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), x);
  return std::string(buf.data(), res.ptr);
}

template <typename T>
std::string fmt_opt(const std::optional<T>& x) {
  return x ? fmt(*x) : std::string("auto");
}

}  // namespace

const char* stage_name(Stage s) {
  switch (s) {
    case Stage::simulate: return "simulate";
    case Stage::phase1: return "phase1";
    case Stage::interp: return "interp";
    case Stage::fuse: return "fuse";
    case Stage::score: return "score";
    case Stage::baseline: return "baseline";
  }
  return "?";
}

Stage parse_stage(const std::string& name) {
  for (Stage s : kAllStages) {
    if (name == stage_name(s)) return s;
  }
  if (name == "image") return Stage::phase1;
  throw ConfigError("unknown stage '" + name + "'");
}

std::vector<Stage> default_stages() {
  return {Stage::simulate, Stage::phase1, Stage::interp, Stage::fuse, Stage::score};
}

std::vector<Stage> parse_stages(const std::string& text) {
  std::vector<Stage> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    if (item == "all") {
      for (Stage s : default_stages()) out.push_back(s);
      continue;
    }
    out.push_back(parse_stage(item));
  }
  if (out.empty()) throw ConfigError("empty stage selection");
  std::vector<Stage> ordered;
  for (Stage s : kAllStages) {
    if (std::find(out.begin(), out.end(), s) != out.end()) ordered.push_back(s);
  }
  return ordered;
}

void RunConfig::validate() const {
  if (n_tx < 1 || n_rx < 1 || l < 1 || m < 1 || q < 1 || q1 < 1 || q2 < 1) {
    throw ConfigError("config: all dimensions must be positive");
  }
  const int side = static_cast<int>(std::lround(std::sqrt(static_cast<double>(q))));
  if (side * side != q) throw ConfigError("config: q must be a perfect square");
  if (pilot == PilotKind::orthogonal && l < n_tx) throw ConfigError("config: orthogonal pilots need L >= N_tx");
  if (!(bandwidth_hz > 0) || !(density > 0)) throw ConfigError("config: bandwidth and density must be positive");
  if (!(support_fraction > 0 && support_fraction <= 1)) throw ConfigError("config: support fraction out of range");
  if (workers < 0) throw ConfigError("config: workers must be nonnegative");
  if (stages.empty()) throw ConfigError("config: no stages selected");
  try {
    scene.validate();
    phase1.validate();
    interp.validate(raster());
    fusion.validate();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
}

Scene RunConfig::effective_scene() const {
  Scene s = scene;
  s.tx.num_antennas = n_tx;
  for (auto& rx : s.rxs) rx.num_antennas = n_rx;
  return s;
}

double RunConfig::noise_variance() const { return noise_variance_from_psd(psd_dbm_hz, bandwidth_hz); }

std::map<std::string, std::string> RunConfig::echo() const {
  std::map<std::string, std::string> e;
  e["scene"] = scene_file;
  e["n_tx"] = std::to_string(n_tx);
  e["n_rx"] = std::to_string(n_rx);
  e["l"] = std::to_string(l);
  e["m"] = std::to_string(m);
  e["power_dbm"] = fmt(power_dbm);
  e["q"] = std::to_string(q);
  e["q1"] = std::to_string(q1);
  e["q2"] = std::to_string(q2);
  e["psd_dbm_hz"] = fmt(psd_dbm_hz);
  e["bandwidth_hz"] = fmt(bandwidth_hz);
  e["density"] = fmt(density);
  e["pilot"] = pilot == PilotKind::orthogonal ? "orthogonal" : "random";
  e["support_fraction"] = fmt(support_fraction);
  e["seed"] = std::to_string(seed);
  std::string st;
  for (Stage s : stages) st += (st.empty() ? "" : ",") + std::string(stage_name(s));
  e["stages"] = st;
  e["phase1.eta"] = fmt_opt(phase1.eta);
  e["phase1.eta_scale"] = fmt(phase1.eta_scale);
  e["phase1.eps1"] = fmt(phase1.eps1);
  e["phase1.eps2"] = fmt(phase1.eps2);
  e["phase1.iter_max"] = std::to_string(phase1.iter_max);
  e["phase1.iter1"] = std::to_string(phase1.iter1);
  e["phase1.iter2"] = std::to_string(phase1.iter2);
  e["phase1.armijo_step"] = fmt(phase1.armijo_step);
  e["phase1.armijo_shrink"] = fmt(phase1.armijo_shrink);
  e["phase1.armijo_c"] = fmt(phase1.armijo_c);
  e["phase1.armijo_max_backtracks"] = std::to_string(phase1.armijo_max_backtracks);
  e["phase1.subset_size"] = std::to_string(phase1.subset_size);
  e["phase1.active_threshold"] = fmt(phase1.active_threshold);
  e["phase1.d_max"] = fmt_opt(phase1.d_max);
  e["phase1.optimize_positions"] = phase1.optimize_positions ? "true" : "false";
  e["interp.neighbors"] = std::to_string(interp.plane_fit_neighbors);
  e["interp.sigma_ep2"] = fmt_opt(interp.sigma_ep2);
  e["interp.resolution"] = std::to_string(interp.resolution);
  e["interp.mode"] = interp.mode == InterpMode::edge_preserving ? "ep" : "nni";
  e["fusion.mu"] = fmt_opt(fusion.mu);
  e["fusion.eta"] = fmt_opt(fusion.eta);
  e["fusion.eta_ratio"] = fmt(fusion.eta_ratio);
  e["fusion.rho"] = fmt(fusion.rho);
  e["fusion.cg_tol"] = fmt(fusion.cg_tol);
  e["fusion.cg_max_iter"] = std::to_string(fusion.cg_max_iter);
  e["fusion.iter_max"] = std::to_string(fusion.iter_max);
  e["fusion.iter1"] = std::to_string(fusion.iter1);
  e["fusion.eps1"] = fmt(fusion.eps1);
  e["fusion.eps2"] = fmt(fusion.eps2);
  return e;
}

RunConfig load_config(const std::filesystem::path& path) {
  pt::ptree tree;
  try {
    pt::read_ini(path.string(), tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  RunConfig c;
  const auto run = tree.get_child_optional("run");
  if (!run) throw ConfigError("config: missing [run] section");
  const auto scene_file = run->get_optional<std::string>("scene");
  if (!scene_file) throw ConfigError("config: [run] needs a 'scene' path");
  c.scene_file = *scene_file;
  std::filesystem::path scene_path(*scene_file);
  if (scene_path.is_relative()) scene_path = path.parent_path() / scene_path;
  c.scene = load_scene(scene_path);

  read(*run, "n_tx", c.n_tx);
  read(*run, "n_rx", c.n_rx);
  read(*run, "l", c.l);
  read(*run, "m", c.m);
  read(*run, "power_dbm", c.power_dbm);
  read(*run, "q", c.q);
  read(*run, "q1", c.q1);
  read(*run, "q2", c.q2);
  read(*run, "psd_dbm_hz", c.psd_dbm_hz);
  read(*run, "bandwidth_hz", c.bandwidth_hz);
  read(*run, "density", c.density);
  read(*run, "support_fraction", c.support_fraction);
  read(*run, "seed", c.seed);
  read(*run, "workers", c.workers);
  std::string out = c.out.string();
  read(*run, "out", out);
  c.out = out;
  std::string pilot = "orthogonal";
  read(*run, "pilot", pilot);
  if (pilot == "orthogonal") {
    c.pilot = PilotKind::orthogonal;
  } else if (pilot == "random") {
    c.pilot = PilotKind::random_sphere;
  } else {
    throw ConfigError("config: pilot must be 'orthogonal' or 'random'");
  }
  if (const auto st = run->get_optional<std::string>("stages")) c.stages = parse_stages(*st);

  if (const auto p = tree.get_child_optional("phase1")) {
    read_optional(*p, "eta", c.phase1.eta);
    read(*p, "eta_scale", c.phase1.eta_scale);
    read(*p, "eps1", c.phase1.eps1);
    read(*p, "eps2", c.phase1.eps2);
    read(*p, "iter_max", c.phase1.iter_max);
    read(*p, "iter1", c.phase1.iter1);
    read(*p, "iter2", c.phase1.iter2);
    read(*p, "armijo_step", c.phase1.armijo_step);
    read(*p, "armijo_shrink", c.phase1.armijo_shrink);
    read(*p, "armijo_c", c.phase1.armijo_c);
    read(*p, "armijo_max_backtracks", c.phase1.armijo_max_backtracks);
    read(*p, "subset_size", c.phase1.subset_size);
    read(*p, "active_threshold", c.phase1.active_threshold);
    read_optional(*p, "d_max", c.phase1.d_max);
    read(*p, "optimize_positions", c.phase1.optimize_positions);
  }
  if (const auto p = tree.get_child_optional("interp")) {
    read(*p, "neighbors", c.interp.plane_fit_neighbors);
    read_optional(*p, "sigma_ep2", c.interp.sigma_ep2);
    read(*p, "resolution", c.interp.resolution);
    std::string mode = "ep";
    read(*p, "mode", mode);
    if (mode == "ep") {
      c.interp.mode = InterpMode::edge_preserving;
    } else if (mode == "nni") {
      c.interp.mode = InterpMode::natural_neighbor;
    } else {
      throw ConfigError("config: interp mode must be 'ep' or 'nni'");
    }
  }
  if (const auto p = tree.get_child_optional("fusion")) {
    read_optional(*p, "mu", c.fusion.mu);
    read_optional(*p, "eta", c.fusion.eta);
    read(*p, "eta_ratio", c.fusion.eta_ratio);
    read(*p, "rho", c.fusion.rho);
    read(*p, "cg_tol", c.fusion.cg_tol);
    read(*p, "cg_max_iter", c.fusion.cg_max_iter);
    read(*p, "iter_max", c.fusion.iter_max);
    read(*p, "iter1", c.fusion.iter1);
    read(*p, "eps1", c.fusion.eps1);
    read(*p, "eps2", c.fusion.eps2);
  }
  c.phase1.seed = c.seed;
  c.validate();
  return c;
}

std::string format_config(const RunConfig& config, const std::string& scene_file) {
  const auto e = config.echo();
  std::ostringstream out;
  out << "[run]\nscene = " << scene_file << '\n';
  for (const char* key : {"n_tx", "n_rx", "l", "m", "power_dbm", "q", "q1", "q2", "psd_dbm_hz", "bandwidth_hz",
                          "density", "pilot", "support_fraction", "seed", "stages"}) {
    out << key << " = " << e.at(key) << '\n';
  }
  out << "out = " << config.out.string() << '\n';
  out << "workers = " << config.workers << '\n';
  std::string section;
  for (const auto& [key, value] : e) {
    const auto dot = key.find('.');
    if (dot == std::string::npos) continue;
    const std::string sec = key.substr(0, dot);
    if (sec != section) {
      out << "\n[" << sec << "]\n";
      section = sec;
    }
    out << key.substr(dot + 1) << " = " << value << '\n';
  }
  return out.str();
}

}  // namespace netimg
