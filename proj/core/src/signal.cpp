#include "netimg/signal.hpp"

#include <cmath>

namespace netimg {

Pilot make_pilot(PilotKind kind, int n_tx, int l, double power, std::uint64_t seed) {
  if (n_tx < 1 || l < 1) throw std::invalid_argument("make_pilot: dimensions must be positive");
  if (!(power > 0)) throw std::invalid_argument("make_pilot: power must be positive");
  Pilot pilot;
  pilot.power = power;
  pilot.kind = kind;
  pilot.x.resize(n_tx, l);
  const double row_norm = std::sqrt(l * power);
  if (kind == PilotKind::orthogonal) {
    if (l < n_tx) throw std::invalid_argument("make_pilot: orthogonal pilots need L >= N_tx");
    const double amp = std::sqrt(power);
    for (int n = 0; n < n_tx; ++n) {
      for (int t = 0; t < l; ++t) {
        const long phase_index = (static_cast<long>(n) * t) % l;
        pilot.x(n, t) = std::polar(amp, -2.0 * kPi * static_cast<double>(phase_index) / l);
      }
    }
  } else {
    auto gen = substream(seed, 0x9117u);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (int n = 0; n < n_tx; ++n) {
      for (int t = 0; t < l; ++t) pilot.x(n, t) = Complex(normal(gen), normal(gen));
      pilot.x.row(n) *= row_norm / pilot.x.row(n).norm();
    }
  }
  return pilot;
}

std::mt19937_64 substream(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(a),    static_cast<std::uint32_t>(a >> 32),
                    static_cast<std::uint32_t>(b),    static_cast<std::uint32_t>(b >> 32)};
  return std::mt19937_64(seq);
}

ArrayResponse::ArrayResponse(const Vec2& tx_pos, const Vec2& rx_pos, int n_rx, const Pilot& pilot)
    : tx_(tx_pos),
      rx_(rx_pos),
      n_tx_(pilot.num_tx()),
      n_rx_(n_rx),
      length_(pilot.length()),
      x_transpose_(pilot.x.transpose()) {
  if (n_rx < 1) throw std::invalid_argument("ArrayResponse: receiver needs at least one antenna");
}

ArrayResponse::ArrayResponse(const Scene& scene, int k, const Pilot& pilot)
    : ArrayResponse(scene.tx.position, scene.rxs.at(k).position, scene.rxs.at(k).num_antennas, pilot) {
  if (scene.tx.num_antennas != pilot.num_tx()) {
    throw std::invalid_argument("ArrayResponse: pilot rows do not match the transmit antenna count");
  }
}

void ArrayResponse::column(const Vec2& p, Eigen::Ref<CVec> out) const {
  const CVec a = steer_from_sine(sine_of_angle(tx_, p), n_tx_);
  const CVec b = steer_from_sine(sine_of_angle(rx_, p), n_rx_);
  const CVec abar = x_transpose_ * a;
  for (int t = 0; t < length_; ++t) out.segment(static_cast<long>(t) * n_rx_, n_rx_) = abar[t] * b;
}

CVec ArrayResponse::column(const Vec2& p) const {
  CVec out(dim());
  column(p, out);
  return out;
}

ArrayResponse::Jet ArrayResponse::column_jet(const Vec2& p) const {
  const Vec2 dt = tx_ - p;
  const Vec2 dr = rx_ - p;
  const double nt = dt.norm();
  const double nr = dr.norm();
  if (nt == 0.0 || nr == 0.0) throw DomainError("column_jet: grid point coincides with an array position");
  // d sin / dx = dx_a dy_a / d^3, d sin / dy = -dx_a^2 / d^3
  const double nt3 = nt * nt * nt;
  const double nr3 = nr * nr * nr;
  const double at_x = dt.x() * dt.y() / nt3;
  const double at_y = -dt.x() * dt.x() / nt3;
  const double br_x = dr.x() * dr.y() / nr3;
  const double br_y = -dr.x() * dr.x() / nr3;

  const CVec a = steer_from_sine(dt.y() / nt, n_tx_);
  const CVec b = steer_from_sine(dr.y() / nr, n_rx_);
  CVec la(n_tx_);
  for (int i = 0; i < n_tx_; ++i) la[i] = Complex(0.0, -kPi * i) * a[i];
  CVec lb(n_rx_);
  for (int i = 0; i < n_rx_; ++i) lb[i] = Complex(0.0, -kPi * i) * b[i];

  const CVec abar = x_transpose_ * a;
  const CVec labar = x_transpose_ * la;
  Jet jet{CVec(dim()), CVec(dim()), CVec(dim())};
  for (int t = 0; t < length_; ++t) {
    const long off = static_cast<long>(t) * n_rx_;
    jet.v.segment(off, n_rx_) = abar[t] * b;
    jet.dx.segment(off, n_rx_) = (at_x * labar[t]) * b + (br_x * abar[t]) * lb;
    jet.dy.segment(off, n_rx_) = (at_y * labar[t]) * b + (br_y * abar[t]) * lb;
  }
  return jet;
}

CMat ArrayResponse::columns(const std::vector<Vec2>& points) const {
  CMat v(dim(), static_cast<long>(points.size()));
  for (std::size_t i = 0; i < points.size(); ++i) column(points[i], v.col(static_cast<long>(i)));
  return v;
}

ScattererCloud sample_cloud(const Scene& scene, double density, std::uint64_t seed) {
  if (!(density > 0)) throw std::invalid_argument("sample_cloud: density must be positive");
  if (scene.targets.empty()) throw std::invalid_argument("sample_cloud: scene has no targets");
  Box box = bounds(scene.targets.front());
  for (const auto& t : scene.targets) {
    const Box b = bounds(t);
    box.lo = box.lo.cwiseMin(b.lo);
    box.hi = box.hi.cwiseMax(b.hi);
  }
  const Vec2 extent = box.hi - box.lo;
  const auto candidates = static_cast<long>(std::llround(density * extent.x() * extent.y()));
  auto gen = substream(seed, 0xc10dU);
  std::uniform_real_distribution<double> ux(box.lo.x(), box.hi.x());
  std::uniform_real_distribution<double> uy(box.lo.y(), box.hi.y());
  ScattererCloud cloud;
  for (long i = 0; i < candidates; ++i) {
    const double x = ux(gen);
    const double y = uy(gen);
    const Vec2 p(x, y);
    if (scene.in_targets(p)) cloud.points.push_back(p);
  }
  if (cloud.points.empty()) throw std::invalid_argument("sample_cloud: target region produced no scatterers");
  cloud.weights.assign(cloud.points.size(), 1.0 / static_cast<double>(cloud.points.size()));
  cloud.visible.resize(scene.rxs.size());
  for (int k = 0; k < scene.num_receivers(); ++k) {
    auto& vis = cloud.visible[k];
    vis.resize(cloud.points.size());
    for (std::size_t i = 0; i < cloud.points.size(); ++i) vis[i] = visibility(scene, k, cloud.points[i]) ? 1 : 0;
  }
  return cloud;
}

namespace {

// Columns of visible points scaled by the square root of their variance.
CMat weighted_columns(const ScattererCloud& cloud, const ArrayResponse& response, const Scene& scene, int k) {
  std::vector<long> idx;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    if (cloud.visible.at(k)[i] != 0 && cloud.weights[i] > 0) idx.push_back(static_cast<long>(i));
  }
  CMat w(response.dim(), static_cast<long>(idx.size()));
  const Vec2& tx = scene.tx.position;
  const Vec2& rx = scene.rxs.at(k).position;
  for (std::size_t j = 0; j < idx.size(); ++j) {
    const Vec2& p = cloud.points[idx[j]];
    const double var = cloud.weights[idx[j]] * path_loss(tx, rx, p, scene.beta0_sq);
    response.column(p, w.col(static_cast<long>(j)));
    w.col(static_cast<long>(j)) *= std::sqrt(var);
  }
  return w;
}

}  // namespace

CMat true_covariance(const ScattererCloud& cloud, const Pilot& pilot, const Scene& scene, int k,
                     const NoiseModel& noise) {
  const ArrayResponse response(scene, k, pilot);
  const CMat w = weighted_columns(cloud, response, scene, k);
  CMat sigma = CMat::Identity(response.dim(), response.dim()) * noise.variance;
  if (w.cols() > 0) sigma.noalias() += w * w.adjoint();
  return sigma;
}

SampleCovariance simulate_frames(const ScattererCloud& cloud, const Pilot& pilot, const Scene& scene, int k,
                                 const NoiseModel& noise, int m, std::uint64_t seed) {
  if (m < 1) throw std::invalid_argument("simulate_frames: need at least one frame");
  const ArrayResponse response(scene, k, pilot);
  const CMat w = weighted_columns(cloud, response, scene, k);
  const long n = response.dim();
  const long p = w.cols();
  CMat gains(p, m);
  CMat noise_block(n, m);
  const double noise_scale = std::sqrt(noise.variance / 2.0);
  constexpr double unit_scale = 0.70710678118654752440;  // CN(0,1)
  for (int f = 0; f < m; ++f) {
    auto gen = substream(seed, static_cast<std::uint64_t>(k), static_cast<std::uint64_t>(f));
    std::normal_distribution<double> normal(0.0, 1.0);
    for (long i = 0; i < p; ++i) {
      const double re = normal(gen);
      const double im = normal(gen);
      gains(i, f) = Complex(re, im) * unit_scale;
    }
    for (long i = 0; i < n; ++i) {
      const double re = normal(gen);
      const double im = normal(gen);
      noise_block(i, f) = Complex(re, im) * noise_scale;
    }
  }
  CMat y = noise_block;
  if (p > 0) y.noalias() += w * gains;
  SampleCovariance out;
  out.matrix = (y * y.adjoint()) / static_cast<double>(m);
  out.num_frames = m;
  out.receiver = k;
  out.seed = seed;
  return out;
}

double noise_variance_from_psd(double psd_dbm_per_hz, double bandwidth_hz) {
  if (!(bandwidth_hz > 0)) throw std::invalid_argument("noise_variance_from_psd: bandwidth must be positive");
  return std::pow(10.0, (psd_dbm_per_hz + 10.0 * std::log10(bandwidth_hz) - 30.0) / 10.0);
}

}  // namespace netimg
