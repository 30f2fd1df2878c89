#pragma once

// Periodic box [-L/2, L/2)^N with M points per axis and FFTW-backed
// spectral transforms.

#include <fftw3.h>

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <tuple>
#include <vector>

#include "normsol/error.hpp"

namespace normsol {

using Complex = std::complex<double>;
using Point = std::array<double, 3>;

inline double norm(const Point& x, int N) {
  double s = 0.0;
  for (int d = 0; d < N; ++d) s += x[d] * x[d];
  return std::sqrt(s);
}

inline double distance(const Point& x, const Point& y, int N) {
  double s = 0.0;
  for (int d = 0; d < N; ++d) s += (x[d] - y[d]) * (x[d] - y[d]);
  return std::sqrt(s);
}

struct Grid {
  int N = 1;
  double L = 1024.0;
  int M = 256;

  friend bool operator==(const Grid&, const Grid&) = default;

  double spacing() const { return L / M; }
  double cell_volume() const { return std::pow(spacing(), N); }

  std::size_t size() const {
    std::size_t n = 1;
    for (int d = 0; d < N; ++d) n *= static_cast<std::size_t>(M);
    return n;
  }

  double coordinate(int index) const { return -0.5 * L + index * spacing(); }

  /// Angular wavenumber of FFT index k along one axis.
  double wavenumber(int k) const {
    const int kk = k < M / 2 ? k : k - M;
    return 2.0 * std::numbers::pi / L * kk;
  }

  /// Per-axis indices of a row-major flat index (last axis fastest).
  std::array<int, 3> indices(std::size_t flat) const {
    std::array<int, 3> idx{0, 0, 0};
    for (int d = N - 1; d >= 0; --d) {
      idx[d] = static_cast<int>(flat % M);
      flat /= M;
    }
    return idx;
  }

  Point point(std::size_t flat) const {
    const auto idx = indices(flat);
    Point x{0.0, 0.0, 0.0};
    for (int d = 0; d < N; ++d) x[d] = coordinate(idx[d]);
    return x;
  }

  void validate() const {
    detail::require(N >= 1 && N <= 3, "grid dimension must be 1, 2 or 3");
    detail::require(L > 0.0, "box length must be positive");
    detail::require(M >= 16 && (M & (M - 1)) == 0, "points per axis must be a power of two >= 16");
  }
};

inline int default_points(int N) {
  switch (N) {
    case 1: return 256;
    case 2: return 128;
    default: return 64;
  }
}

namespace detail {

// FFTW planners of every precision share global state and are not thread-safe.
inline std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace detail

/// Unnormalized forward/backward DFTs and |k|^2 for one grid shape.
class Spectral {
 public:
  explicit Spectral(const Grid& grid) : grid_(grid) {
    grid.validate();
    const std::size_t n = grid.size();
    int dims[3] = {grid.M, grid.M, grid.M};
    {
      // Execution with new arrays is thread-safe; planning is not.
      std::lock_guard lock(detail::planner_mutex());
      auto* in = fftw_alloc_complex(n);
      auto* out = fftw_alloc_complex(n);
      const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
      forward_ = fftw_plan_dft(grid.N, dims, in, out, FFTW_FORWARD, flags);
      backward_ = fftw_plan_dft(grid.N, dims, in, out, FFTW_BACKWARD, flags);
      fftw_free(in);
      fftw_free(out);
    }
    if (!forward_ || !backward_) throw Error(ErrorCode::InvalidArgument, "FFTW plan creation failed");

    axis_k_.resize(grid.M);
    for (int k = 0; k < grid.M; ++k) axis_k_[k] = grid.wavenumber(k);
    k2_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      const auto idx = grid.indices(i);
      double s = 0.0;
      for (int d = 0; d < grid.N; ++d) s += axis_k_[idx[d]] * axis_k_[idx[d]];
      k2_[i] = s;
    }
  }

  Spectral(const Spectral&) = delete;
  Spectral& operator=(const Spectral&) = delete;

  ~Spectral() {
    fftw_destroy_plan(forward_);
    fftw_destroy_plan(backward_);
  }

  const Grid& grid() const { return grid_; }
  const std::vector<double>& k2() const { return k2_; }
  const std::vector<double>& axis_k() const { return axis_k_; }

  void forward(const Complex* in, Complex* out) const {
    fftw_execute_dft(forward_, reinterpret_cast<fftw_complex*>(const_cast<Complex*>(in)),
                     reinterpret_cast<fftw_complex*>(out));
  }
  void backward(const Complex* in, Complex* out) const {
    fftw_execute_dft(backward_, reinterpret_cast<fftw_complex*>(const_cast<Complex*>(in)),
                     reinterpret_cast<fftw_complex*>(out));
  }

  std::vector<Complex> forward(const std::vector<Complex>& in) const {
    std::vector<Complex> out(in.size());
    forward(in.data(), out.data());
    return out;
  }
  /// Inverse transform including the 1/size normalization.
  std::vector<Complex> inverse(const std::vector<Complex>& in) const {
    std::vector<Complex> out(in.size());
    backward(in.data(), out.data());
    const double scale = 1.0 / static_cast<double>(in.size());
    for (auto& v : out) v *= scale;
    return out;
  }

 private:
  Grid grid_;
  fftw_plan forward_ = nullptr;
  fftw_plan backward_ = nullptr;
  std::vector<double> axis_k_;
  std::vector<double> k2_;
};

/// Shared, lazily built transform set for a grid. Entries live for the
/// lifetime of the process.
inline const Spectral& spectral(const Grid& grid) {
  static std::mutex cache_mutex;
  static std::map<std::tuple<int, double, int>, std::unique_ptr<Spectral>> cache;
  std::lock_guard lock(cache_mutex);
  auto& slot = cache[{grid.N, grid.L, grid.M}];
  if (!slot) slot = std::make_unique<Spectral>(grid);
  return *slot;
}

}  // namespace normsol
