#pragma once

// Grid functions on the periodic box: quadrature norms, spectral gradient,
// mass normalization, dilation and translation.

#include <algorithm>
#include <cmath>
#include <complex>
#include <span>
#include <utility>
#include <vector>

#include "normsol/error.hpp"
#include "normsol/grid.hpp"

namespace normsol {

class Field {
 public:
  Field() = default;
  explicit Field(const Grid& grid) : grid_(grid), values_(grid.size()) { grid.validate(); }
  Field(const Grid& grid, std::vector<Complex> values) : grid_(grid), values_(std::move(values)) {
    grid.validate();
    detail::require(values_.size() == grid.size(), "field size does not match grid");
  }

  /// Samples f(x) at every grid point.
  template <typename F>
  static Field sample(const Grid& grid, F&& f) {
    Field u(grid);
    for (std::size_t i = 0; i < u.size(); ++i) u.values_[i] = Complex(f(grid.point(i)));
    return u;
  }

  const Grid& grid() const { return grid_; }
  std::size_t size() const { return values_.size(); }
  std::span<const Complex> values() const { return values_; }
  std::span<Complex> values() { return values_; }
  const std::vector<Complex>& data() const { return values_; }
  const Complex& operator[](std::size_t i) const { return values_[i]; }
  Complex& operator[](std::size_t i) { return values_[i]; }

  bool is_real() const {
    return std::all_of(values_.begin(), values_.end(), [](const Complex& v) { return v.imag() == 0.0; });
  }

  /// Drops imaginary parts.
  Field& make_real() {
    for (auto& v : values_) v = Complex(v.real(), 0.0);
    return *this;
  }

  Field& operator+=(const Field& o) {
    check_same(o);
    for (std::size_t i = 0; i < size(); ++i) values_[i] += o.values_[i];
    return *this;
  }
  Field& operator-=(const Field& o) {
    check_same(o);
    for (std::size_t i = 0; i < size(); ++i) values_[i] -= o.values_[i];
    return *this;
  }
  Field& operator*=(Complex s) {
    for (auto& v : values_) v *= s;
    return *this;
  }
  /// this += s * o
  Field& axpy(double s, const Field& o) {
    check_same(o);
    for (std::size_t i = 0; i < size(); ++i) values_[i] += s * o.values_[i];
    return *this;
  }

  friend Field operator+(Field a, const Field& b) { return a += b; }
  friend Field operator-(Field a, const Field& b) { return a -= b; }
  friend Field operator*(Complex s, Field a) { return a *= s; }
  friend Field operator*(double s, Field a) { return a *= Complex(s); }

 private:
  void check_same(const Field& o) const {
    detail::require(o.grid_ == grid_, "fields live on different grids");
  }

  Grid grid_;
  std::vector<Complex> values_;
};

/// ∫ conj(u) v dx by equal-weight quadrature.
inline Complex inner(const Field& u, const Field& v) {
  detail::require(u.grid() == v.grid(), "inner: grid mismatch");
  long double re = 0.0L, im = 0.0L;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const Complex z = std::conj(u[i]) * v[i];
    re += z.real();
    im += z.imag();
  }
  const double dv = u.grid().cell_volume();
  return {static_cast<double>(re) * dv, static_cast<double>(im) * dv};
}

/// Re ∫ conj(u) v dx, the real L² inner product.
inline double real_inner(const Field& u, const Field& v) { return inner(u, v).real(); }

inline double mass(const Field& u) {
  long double s = 0.0L;
  for (const auto& z : u.values()) s += std::norm(z);
  return static_cast<double>(s) * u.grid().cell_volume();
}

inline double l2_norm(const Field& u) { return std::sqrt(mass(u)); }

/// ∫ |u|^t dx.
inline double lp_power(const Field& u, double t) {
  long double s = 0.0L;
  for (const auto& z : u.values()) s += std::pow(std::abs(z), t);
  return static_cast<double>(s) * u.grid().cell_volume();
}

inline double lp_norm(const Field& u, double t) {
  detail::require(t >= 1.0, "lp_norm: t must be >= 1");
  return std::pow(lp_power(u, t), 1.0 / t);
}

/// ||∇u||_2^2 through the spectral multiplier |k|^2 (Parseval).
inline double grad_norm_sq(const Field& u) {
  const auto& sp = spectral(u.grid());
  const auto uh = sp.forward(u.data());
  const auto& k2 = sp.k2();
  long double s = 0.0L;
  for (std::size_t i = 0; i < uh.size(); ++i) s += k2[i] * std::norm(uh[i]);
  return static_cast<double>(s) * u.grid().cell_volume() / static_cast<double>(u.size());
}

inline double grad_norm(const Field& u) { return std::sqrt(grad_norm_sq(u)); }

inline double h1_norm(const Field& u) { return std::sqrt(mass(u) + grad_norm_sq(u)); }

/// -Δu. Real inputs give real outputs.
inline Field neg_laplacian(const Field& u) {
  const auto& sp = spectral(u.grid());
  auto uh = sp.forward(u.data());
  const auto& k2 = sp.k2();
  for (std::size_t i = 0; i < uh.size(); ++i) uh[i] *= k2[i];
  Field out(u.grid(), sp.inverse(uh));
  if (u.is_real()) out.make_real();
  return out;
}

/// Component d of ∇u.
inline Field partial(const Field& u, int d) {
  const auto& grid = u.grid();
  detail::require(d >= 0 && d < grid.N, "partial: axis out of range");
  const auto& sp = spectral(grid);
  auto uh = sp.forward(u.data());
  for (std::size_t i = 0; i < uh.size(); ++i) {
    const int kd = grid.indices(i)[d];
    // The Nyquist mode has no odd counterpart; its derivative is dropped.
    const double k = (kd == grid.M / 2) ? 0.0 : sp.axis_k()[kd];
    uh[i] *= Complex(0.0, k);
  }
  Field out(grid, sp.inverse(uh));
  if (u.is_real()) out.make_real();
  return out;
}

/// Fraction of the mass in the outer shell max_d |x_d| >= (1/2 - shell/2) L.
inline double boundary_mass_fraction(const Field& u, double shell = 0.1) {
  const auto& grid = u.grid();
  const double cut = (0.5 - 0.5 * shell) * grid.L;
  long double outer = 0.0L, total = 0.0L;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double w = std::norm(u[i]);
    total += w;
    const auto x = grid.point(i);
    bool in_shell = false;
    for (int d = 0; d < grid.N; ++d) in_shell = in_shell || std::abs(x[d]) >= cut;
    if (in_shell) outer += w;
  }
  if (total == 0.0L) return 0.0;
  return static_cast<double>(outer / total);
}

inline Field normalize_to_mass(Field u, double a) {
  detail::require(a > 0.0, "normalize_to_mass: a must be positive");
  const double m = mass(u);
  if (!(m > 0.0)) throw Error(ErrorCode::ZeroField, "cannot normalize the zero field");
  u *= Complex(a / std::sqrt(m));
  return u;
}

namespace detail {

// Evaluates the trigonometric interpolant along every axis at the positions
// produced by `position(j)` for output index j. The Nyquist column uses a
// cosine so real data stays real.
template <typename Pos>
std::vector<Complex> resample_spectral(const Field& u, Pos&& position) {
  const auto& grid = u.grid();
  const auto& sp = spectral(grid);
  const int M = grid.M;
  const double x0 = grid.coordinate(0);
  std::vector<Complex> basis(static_cast<std::size_t>(M) * M);
  for (int j = 0; j < M; ++j) {
    const double x = position(j) - x0;
    for (int k = 0; k < M; ++k) {
      const double kx = sp.axis_k()[k] * x;
      basis[static_cast<std::size_t>(j) * M + k] =
          (k == M / 2) ? Complex(std::cos(kx), 0.0) : Complex(std::cos(kx), std::sin(kx));
    }
  }
  std::vector<Complex> cur = sp.forward(u.data());
  for (auto& v : cur) v /= static_cast<double>(cur.size());

  const std::size_t n = cur.size();
  std::vector<Complex> next(n);
  std::vector<Complex> line(M);
  for (int d = 0; d < grid.N; ++d) {
    std::size_t stride = 1;
    for (int e = grid.N - 1; e > d; --e) stride *= M;
    for (std::size_t base = 0; base < n; ++base) {
      if ((base / stride) % M != 0) continue;
      for (int k = 0; k < M; ++k) line[k] = cur[base + k * stride];
      for (int j = 0; j < M; ++j) {
        Complex acc = 0.0;
        const Complex* row = &basis[static_cast<std::size_t>(j) * M];
        for (int k = 0; k < M; ++k) acc += row[k] * line[k];
        next[base + j * stride] = acc;
      }
    }
    std::swap(cur, next);
  }
  return cur;
}

}  // namespace detail

/// u_t(x) = t^{N/2} u(t x), by spectral interpolation.
inline Field dilate(const Field& u, double t, double overflow_tol = 1e-8) {
  detail::require(t > 0.0, "dilate: t must be positive");
  if (t == 1.0) return u;
  const auto& grid = u.grid();
  auto vals = detail::resample_spectral(u, [&](int j) { return t * grid.coordinate(j); });
  const double scale = std::pow(t, 0.5 * grid.N);
  for (std::size_t i = 0; i < vals.size(); ++i) {
    // For t > 1 some samples map outside the box, where the periodic
    // interpolant would bring back an image of the profile.
    const auto x = grid.point(i);
    bool outside = false;
    for (int d = 0; d < grid.N; ++d) outside = outside || std::abs(t * x[d]) >= 0.5 * grid.L;
    vals[i] = outside ? Complex(0.0) : vals[i] * scale;
  }
  Field out(grid, std::move(vals));
  if (u.is_real()) out.make_real();
  if (boundary_mass_fraction(out) > overflow_tol)
    throw Error(ErrorCode::SupportOverflow, "dilated profile reaches the box boundary");
  return out;
}

/// u(x - shift) through the Fourier shift theorem.
inline Field translate(const Field& u, const Point& shift) {
  const auto& grid = u.grid();
  const auto& sp = spectral(grid);
  auto uh = sp.forward(u.data());
  for (std::size_t i = 0; i < uh.size(); ++i) {
    const auto idx = grid.indices(i);
    Complex factor = 1.0;
    for (int d = 0; d < grid.N; ++d) {
      const double ks = sp.axis_k()[idx[d]] * shift[d];
      factor *= (idx[d] == grid.M / 2) ? Complex(std::cos(ks), 0.0) : std::polar(1.0, -ks);
    }
    uh[i] *= factor;
  }
  Field out(grid, sp.inverse(uh));
  if (u.is_real()) out.make_real();
  return out;
}

}  // namespace normsol
