#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "netimg/geometry.hpp"
#include "netimg/types.hpp"

namespace netimg {

enum class PilotKind { orthogonal, random_sphere };

/// Transmitted pilot block, N_tx x L. Every row has squared norm L * P.
struct Pilot {
  CMat x;
  double power = 1.0;  // watts
  PilotKind kind = PilotKind::orthogonal;

  int num_tx() const { return static_cast<int>(x.rows()); }
  int length() const { return static_cast<int>(x.cols()); }
};

/// Orthogonal pilots are scaled DFT rows (X X^H = L P I, needs l >= n_tx);
/// random-sphere rows are isotropic complex Gaussian rows projected onto the
/// sphere of radius sqrt(L P).
Pilot make_pilot(PilotKind kind, int n_tx, int l, double power, std::uint64_t seed = 0);

/// Deterministic generator for the substream identified by (a, b) under `seed`.
std::mt19937_64 substream(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0);

/// Maps a position to its dictionary column v = (X^T a(phi)) kron b(theta) for
/// one transmitter/receiver pair, plus the spatial derivatives of v.
class ArrayResponse {
 public:
  ArrayResponse(const Vec2& tx_pos, const Vec2& rx_pos, int n_rx, const Pilot& pilot);
  ArrayResponse(const Scene& scene, int k, const Pilot& pilot);

  int dim() const { return length_ * n_rx_; }
  int num_tx() const { return n_tx_; }
  int num_rx() const { return n_rx_; }
  const Vec2& tx_position() const { return tx_; }
  const Vec2& rx_position() const { return rx_; }

  CVec column(const Vec2& p) const;
  void column(const Vec2& p, Eigen::Ref<CVec> out) const;

  struct Jet {
    CVec v;
    CVec dx;
    CVec dy;
  };
  /// v together with dv/dx and dv/dy.
  Jet column_jet(const Vec2& p) const;

  /// Columns for a list of positions, one per column of the result.
  CMat columns(const std::vector<Vec2>& points) const;

 private:
  Vec2 tx_;
  Vec2 rx_;
  int n_tx_;
  int n_rx_;
  int length_;
  CMat x_transpose_;  // L x N_tx
};

/// Monte-Carlo realization of the scattering region: uniform points with
/// equal variance weights summing to one, plus per-receiver visibility.
struct ScattererCloud {
  std::vector<Vec2> points;
  std::vector<double> weights;
  std::vector<std::vector<std::uint8_t>> visible;  // [receiver][point]

  std::size_t size() const { return points.size(); }
};

ScattererCloud sample_cloud(const Scene& scene, double density, std::uint64_t seed);

struct NoiseModel {
  double variance = 1.0;  // watts
};

struct SampleCovariance {
  CMat matrix;
  int num_frames = 0;
  int receiver = 0;
  std::uint64_t seed = 0;

  int dim() const { return static_cast<int>(matrix.rows()); }
};

/// sum over visible points of w * gamma_beta * v v^H, plus sigma^2 I.
CMat true_covariance(const ScattererCloud& cloud, const Pilot& pilot, const Scene& scene, int k,
                     const NoiseModel& noise);

/// Swerling-II frames Y = H X + Z accumulated into (1/M) sum y y^H. Frame m
/// draws from substream (seed, k, m).
SampleCovariance simulate_frames(const ScattererCloud& cloud, const Pilot& pilot, const Scene& scene, int k,
                                 const NoiseModel& noise, int m, std::uint64_t seed);

/// Thermal noise power for a PSD in dBm/Hz over a bandwidth in Hz.
double noise_variance_from_psd(double psd_dbm_per_hz, double bandwidth_hz);

}  // namespace netimg
