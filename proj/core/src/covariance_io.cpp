#include "netimg/covariance_io.hpp"

#include <array>
#include <cstring>
#include <fstream>
#include <iomanip>

namespace netimg {

namespace {

constexpr std::array<char, 4> kMagic{'N', 'I', 'S', 'C'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void put(std::ostream& out, const T& value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T get(std::istream& in, const std::filesystem::path& path) {
  T value{};
  if (!in.read(reinterpret_cast<char*>(&value), sizeof(T))) throw std::runtime_error("truncated covariance file " + path.string());
  return value;
}

}  // namespace

void write_covariance(const std::filesystem::path& path, const SampleCovariance& cov) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.write(kMagic.data(), kMagic.size());
  put(out, kVersion);
  put(out, static_cast<std::int64_t>(cov.matrix.rows()));
  put(out, static_cast<std::int64_t>(cov.matrix.cols()));
  put(out, static_cast<std::int32_t>(cov.num_frames));
  put(out, static_cast<std::int32_t>(cov.receiver));
  put(out, static_cast<std::uint64_t>(cov.seed));
  for (long r = 0; r < cov.matrix.rows(); ++r) {
    for (long c = 0; c < cov.matrix.cols(); ++c) {
      put(out, cov.matrix(r, c).real());
      put(out, cov.matrix(r, c).imag());
    }
  }
}

SampleCovariance read_covariance(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::array<char, 4> magic{};
  in.read(magic.data(), magic.size());
  if (!in || magic != kMagic) throw std::runtime_error("not a covariance file: " + path.string());
  if (get<std::uint32_t>(in, path) != kVersion) throw std::runtime_error("unsupported covariance version: " + path.string());
  const auto rows = get<std::int64_t>(in, path);
  const auto cols = get<std::int64_t>(in, path);
  if (rows < 0 || cols < 0 || rows > (1 << 16) || cols > (1 << 16)) throw std::runtime_error("bad dimensions in " + path.string());
  SampleCovariance cov;
  cov.num_frames = get<std::int32_t>(in, path);
  cov.receiver = get<std::int32_t>(in, path);
  cov.seed = get<std::uint64_t>(in, path);
  cov.matrix.resize(rows, cols);
  for (long r = 0; r < rows; ++r) {
    for (long c = 0; c < cols; ++c) {
      const double re = get<double>(in, path);
      const double im = get<double>(in, path);
      cov.matrix(r, c) = Complex(re, im);
    }
  }
  return cov;
}

void write_covariance_csv(const std::filesystem::path& path, const SampleCovariance& cov) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << std::setprecision(17);
  for (long r = 0; r < cov.matrix.rows(); ++r) {
    for (long c = 0; c < cov.matrix.cols(); ++c) {
      if (c) out << ',';
      out << cov.matrix(r, c).real() << ',' << cov.matrix(r, c).imag();
    }
    out << '\n';
  }
}

}  // namespace netimg
