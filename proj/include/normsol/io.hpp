#pragma once

// NSF1 binary field files and CSV profile export.
//
// NSF1 layout (little-endian): "NSF1", u32 N, u32 M, f64 L, u8 iscomplex,
// then f64 samples in row-major order, interleaved re/im when complex.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "normsol/error.hpp"
#include "normsol/field.hpp"

namespace normsol {

namespace detail {

template <typename T>
void put_le(std::ostream& os, T value) {
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  os.write(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template <typename T>
T get_le(std::istream& is) {
  unsigned char bytes[sizeof(T)];
  if (!is.read(reinterpret_cast<char*>(bytes), sizeof(T))) throw Error(ErrorCode::IoError, "truncated NSF1 stream");
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  T value;
  std::memcpy(&value, bytes, sizeof(T));
  return value;
}

}  // namespace detail

inline void write_nsf(std::ostream& os, const Field& u) {
  const auto& g = u.grid();
  const bool is_complex = !u.is_real();
  os.write("NSF1", 4);
  detail::put_le<std::uint32_t>(os, static_cast<std::uint32_t>(g.N));
  detail::put_le<std::uint32_t>(os, static_cast<std::uint32_t>(g.M));
  detail::put_le<double>(os, g.L);
  detail::put_le<std::uint8_t>(os, is_complex ? 1 : 0);
  for (const auto& z : u.values()) {
    detail::put_le<double>(os, z.real());
    if (is_complex) detail::put_le<double>(os, z.imag());
  }
  if (!os) throw Error(ErrorCode::IoError, "failed writing NSF1 stream");
}

inline Field read_nsf(std::istream& is) {
  char magic[4];
  if (!is.read(magic, 4) || std::memcmp(magic, "NSF1", 4) != 0)
    throw Error(ErrorCode::IoError, "missing NSF1 magic");
  Grid g;
  g.N = static_cast<int>(detail::get_le<std::uint32_t>(is));
  g.M = static_cast<int>(detail::get_le<std::uint32_t>(is));
  g.L = detail::get_le<double>(is);
  const auto flag = detail::get_le<std::uint8_t>(is);
  if (flag > 1) throw Error(ErrorCode::IoError, "bad iscomplex flag");
  try {
    g.validate();
  } catch (const Error& e) {
    throw Error(ErrorCode::IoError, std::string("bad NSF1 header: ") + e.what());
  }
  std::vector<Complex> vals(g.size());
  for (auto& z : vals) {
    const double re = detail::get_le<double>(is);
    const double im = flag ? detail::get_le<double>(is) : 0.0;
    z = Complex(re, im);
  }
  return Field(g, std::move(vals));
}

inline void save_nsf(const std::string& path, const Field& u) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error(ErrorCode::IoError, "cannot open " + path);
  write_nsf(os, u);
}

inline Field load_nsf(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error(ErrorCode::IoError, "cannot open " + path);
  return read_nsf(is);
}

/// Values along the first axis through the box center (other indices M/2).
inline void write_axis_profile_csv(std::ostream& os, const Field& u) {
  const auto& g = u.grid();
  std::size_t stride = 1;
  for (int d = 1; d < g.N; ++d) stride *= g.M;
  std::size_t offset = 0;
  for (int d = 1; d < g.N; ++d) {
    std::size_t s = 1;
    for (int e = g.N - 1; e > d; --e) s *= g.M;
    offset += static_cast<std::size_t>(g.M / 2) * s;
  }
  os << "x,re,im,abs2\n" << std::setprecision(17);
  for (int j = 0; j < g.M; ++j) {
    const auto& z = u[offset + j * stride];
    os << g.coordinate(j) << ',' << z.real() << ',' << z.imag() << ',' << std::norm(z) << '\n';
  }
}

/// Shell averages of |u|^2 about `center`, bin width = grid spacing.
inline void write_radial_profile_csv(std::ostream& os, const Field& u, const Point& center = {0.0, 0.0, 0.0}) {
  const auto& g = u.grid();
  const double h = g.spacing();
  std::map<long, std::pair<double, long>> bins;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const long b = std::lround(distance(g.point(i), center, g.N) / h);
    auto& [sum, count] = bins[b];
    sum += std::norm(u[i]);
    ++count;
  }
  os << "r,mean_abs2\n" << std::setprecision(17);
  for (const auto& [b, acc] : bins) os << b * h << ',' << acc.first / acc.second << '\n';
}

}  // namespace normsol
