#include "netimg/scene_io.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

namespace netimg {

namespace pt = boost::property_tree;

namespace {

constexpr double kDeg = kPi / 180.0;

template <typename T>
T required(const pt::ptree& node, const std::string& section, const std::string& key) {
  const auto value = node.get_optional<T>(key);
  if (!value) throw ConfigError("scene: [" + section + "] is missing '" + key + "'");
  return *value;
}

std::vector<Vec2> parse_vertices(const std::string& text) {
  std::vector<Vec2> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ';')) {
    std::stringstream pair(item);
    double x = 0;
    double y = 0;
    if (!(pair >> x >> y)) throw ConfigError("scene: malformed vertex '" + item + "'");
    out.emplace_back(x, y);
  }
  return out;
}

RasterMaskShape parse_mask(const pt::ptree& node, const std::string& section) {
  RasterMaskShape mask;
  mask.origin = Vec2(required<double>(node, section, "origin_x"), required<double>(node, section, "origin_y"));
  mask.cell_size = required<double>(node, section, "cell_size");
  std::vector<std::string> rows;
  std::stringstream ss(required<std::string>(node, section, "rows"));
  std::string row;
  while (std::getline(ss, row, '/')) rows.push_back(row);
  if (rows.empty()) throw ConfigError("scene: [" + section + "] mask has no rows");
  mask.rows = static_cast<int>(rows.size());
  mask.cols = static_cast<int>(rows.front().size());
  mask.cells.assign(static_cast<std::size_t>(mask.rows) * mask.cols, 0);
  for (int r = 0; r < mask.rows; ++r) {
    const std::string& line = rows[mask.rows - 1 - r];
    if (static_cast<int>(line.size()) != mask.cols) throw ConfigError("scene: [" + section + "] ragged mask rows");
    for (int c = 0; c < mask.cols; ++c) mask.cells[static_cast<std::size_t>(r) * mask.cols + c] = line[c] == '#';
  }
  return mask;
}

TargetShape parse_target(const pt::ptree& node, const std::string& section) {
  const auto kind = required<std::string>(node, section, "kind");
  if (kind == "polygon") return PolygonShape{parse_vertices(required<std::string>(node, section, "vertices"))};
  if (kind == "disc") {
    return DiscShape{Vec2(required<double>(node, section, "cx"), required<double>(node, section, "cy")),
                     required<double>(node, section, "radius")};
  }
  if (kind == "annulus") {
    return AnnulusShape{Vec2(required<double>(node, section, "cx"), required<double>(node, section, "cy")),
                        required<double>(node, section, "inner_radius"),
                        required<double>(node, section, "outer_radius")};
  }
  if (kind == "mask") return parse_mask(node, section);
  throw ConfigError("scene: [" + section + "] has unknown kind '" + kind + "'");
}

Scene from_tree(const pt::ptree& tree) {
  Scene scene;
  scene.beta0_sq = 1e-7;
  if (const auto s = tree.get_child_optional("scene")) {
    if (const auto db = s->get_optional<double>("beta0_db")) scene.beta0_sq = std::pow(10.0, *db / 10.0 * 2.0);
  }
  const auto roi = tree.get_child_optional("roi");
  if (!roi) throw ConfigError("scene: missing [roi]");
  scene.roi = {required<double>(*roi, "roi", "x1"), required<double>(*roi, "roi", "x2"),
               required<double>(*roi, "roi", "y1"), required<double>(*roi, "roi", "y2")};
  const auto tx = tree.get_child_optional("tx");
  if (!tx) throw ConfigError("scene: missing [tx]");
  scene.tx = {Vec2(required<double>(*tx, "tx", "x"), required<double>(*tx, "tx", "y")), tx->get<int>("antennas", 1),
              ArrayRole::transmit};
  for (int k = 0;; ++k) {
    const std::string name = "rx" + std::to_string(k);
    const auto rx = tree.get_child_optional(name);
    if (!rx) break;
    scene.rxs.push_back({Vec2(required<double>(*rx, name, "x"), required<double>(*rx, name, "y")),
                         rx->get<int>("antennas", 1), ArrayRole::receive});
    const double width = rx->get<double>("blind_width_deg", 0.0);
    if (width != 0.0) scene.fovs.push_back({k, rx->get<double>("blind_center_deg", 0.0) * kDeg, width * kDeg});
  }
  for (int t = 0;; ++t) {
    const std::string name = "target" + std::to_string(t);
    const auto node = tree.get_child_optional(name);
    if (!node) break;
    scene.targets.push_back(parse_target(*node, name));
  }
  try {
    scene.validate();
  } catch (const std::exception& e) {
    throw ConfigError(std::string("scene: ") + e.what());
  }
  return scene;
}

struct TargetWriter {
  std::ostream& out;
  void operator()(const PolygonShape& s) const {
    out << "kind = polygon\nvertices = ";
    for (std::size_t i = 0; i < s.vertices.size(); ++i) {
      out << (i ? "; " : "") << s.vertices[i].x() << ' ' << s.vertices[i].y();
    }
    out << '\n';
  }
  void operator()(const DiscShape& s) const {
    out << "kind = disc\ncx = " << s.center.x() << "\ncy = " << s.center.y() << "\nradius = " << s.radius << '\n';
  }
  void operator()(const AnnulusShape& s) const {
    out << "kind = annulus\ncx = " << s.center.x() << "\ncy = " << s.center.y()
        << "\ninner_radius = " << s.inner_radius << "\nouter_radius = " << s.outer_radius << '\n';
  }
  void operator()(const RasterMaskShape& s) const {
    out << "kind = mask\norigin_x = " << s.origin.x() << "\norigin_y = " << s.origin.y()
        << "\ncell_size = " << s.cell_size << "\nrows = ";
    for (int r = s.rows - 1; r >= 0; --r) {
      for (int c = 0; c < s.cols; ++c) out << (s.at(r, c) ? '#' : '.');
      if (r) out << '/';
    }
    out << '\n';
  }
};

}  // namespace

Scene parse_scene(const std::string& text) {
  pt::ptree tree;
  std::istringstream in(text);
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("scene: ") + e.what());
  }
  return from_tree(tree);
}

Scene load_scene(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("scene: cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_scene(buf.str());
}

std::string format_scene(const Scene& scene) {
  std::ostringstream out;
  out << std::setprecision(17);
  out << "[scene]\nbeta0_db = " << 10.0 * std::log10(scene.beta0_sq) / 2.0 << "\n\n";
  out << "[roi]\nx1 = " << scene.roi.x1 << "\nx2 = " << scene.roi.x2 << "\ny1 = " << scene.roi.y1
      << "\ny2 = " << scene.roi.y2 << "\n\n";
  out << "[tx]\nx = " << scene.tx.position.x() << "\ny = " << scene.tx.position.y()
      << "\nantennas = " << scene.tx.num_antennas << "\n\n";
  for (int k = 0; k < scene.num_receivers(); ++k) {
    const auto& rx = scene.rxs[k];
    out << "[rx" << k << "]\nx = " << rx.position.x() << "\ny = " << rx.position.y()
        << "\nantennas = " << rx.num_antennas << '\n';
    if (const auto* fov = scene.fov_for(k)) {
      out << "blind_center_deg = " << fov->blind_center / kDeg << "\nblind_width_deg = " << fov->blind_width / kDeg
          << '\n';
    }
    out << '\n';
  }
  for (std::size_t t = 0; t < scene.targets.size(); ++t) {
    out << "[target" << t << "]\n";
    std::visit(TargetWriter{out}, scene.targets[t]);
    out << '\n';
  }
  return out.str();
}

void save_scene(const std::filesystem::path& path, const Scene& scene) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << format_scene(scene);
}

}  // namespace netimg
