#pragma once

#include <random>

#include "netimg/geometry.hpp"
#include "netimg/signal.hpp"
#include "netimg/types.hpp"

namespace netimg::testing {

inline CMat random_complex(std::mt19937_64& rng, long rows, long cols) {
  std::normal_distribution<double> n(0.0, 1.0);
  CMat m(rows, cols);
  for (long j = 0; j < cols; ++j) {
    for (long i = 0; i < rows; ++i) m(i, j) = Complex(n(rng), n(rng));
  }
  return m;
}

inline CVec random_cvec(std::mt19937_64& rng, long n) { return random_complex(rng, n, 1).col(0); }

/// A A^H / n + shift I, well conditioned for shift ~ 1.
inline CMat random_hpd(std::mt19937_64& rng, long n, double shift = 1.0) {
  const CMat a = random_complex(rng, n, n);
  CMat s = a * a.adjoint() / static_cast<double>(n);
  s += CMat::Identity(n, n) * shift;
  return s;
}

inline double rel_err(const CMat& a, const CMat& b) { return (a - b).norm() / b.norm(); }

/// Reference geometry: transmitter and receivers around a 15 m square.
inline Scene reference_scene(int n_tx, int n_rx, int receivers = 3) {
  Scene s;
  s.roi = {0.0, 15.0, 0.0, 15.0};
  s.tx = {Vec2(-3.0, 7.5), n_tx, ArrayRole::transmit};
  const Vec2 rx[3] = {Vec2(18.0, 7.5), Vec2(7.5, 18.0), Vec2(7.5, -3.0)};
  for (int k = 0; k < receivers; ++k) s.rxs.push_back({rx[k], n_rx, ArrayRole::receive});
  s.beta0_sq = 1e-7;
  return s;
}

}  // namespace netimg::testing
