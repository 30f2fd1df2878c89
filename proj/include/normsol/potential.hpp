#pragma once

// Bump-sum potentials h = h_infty + Σ A_j φ((x - c_j)/R_j) and the
// barycenter localization used to separate the minimizers.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "normsol/error.hpp"
#include "normsol/field.hpp"
#include "normsol/grid.hpp"

namespace normsol {

struct Peak {
  Point center{0.0, 0.0, 0.0};
  double amplitude = 0.0;  // height above h_infty at the center
  double radius = 1.0;     // support radius

  friend bool operator==(const Peak&, const Peak&) = default;
};

struct PotentialSpec {
  int N = 1;
  double h_infty = 0.5;
  std::vector<Peak> peaks;

  // Filled by build_potential.
  double h_max = 0.0;
  double h_0 = 0.0;
  std::vector<Point> maxima;  // maxima[0] is the origin

  std::size_t l() const { return maxima.size(); }

  double operator()(const Point& x) const {
    double h = h_infty;
    for (const auto& pk : peaks) {
      const double rho = distance(x, pk.center, N) / pk.radius;
      if (rho < 1.0) h += pk.amplitude * std::exp(1.0 - 1.0 / (1.0 - rho * rho));
    }
    return h;
  }
};

namespace detail {

inline std::string describe(const Point& x, int N) {
  std::ostringstream os;
  os << '(';
  for (int d = 0; d < N; ++d) os << (d ? ", " : "") << x[d];
  os << ')';
  return os.str();
}

}  // namespace detail

/// Validates positivity, the strict far-field gap and the finite set of
/// global maxima containing the origin; fills h_max, h_0 and the maxima.
inline PotentialSpec build_potential(PotentialSpec spec) {
  using detail::describe;
  detail::require(spec.N >= 1 && spec.N <= 3, "potential dimension must be 1, 2 or 3");
  detail::require(!spec.peaks.empty(), "potential needs at least one peak");
  for (const auto& pk : spec.peaks) detail::require(pk.radius > 0.0, "peak radius must be positive");

  if (!(spec.h_infty > 0.0))
    throw Error(ErrorCode::H1Violated, "h_infty must be positive (far field)");

  // Disjoint supports keep every peak value exact and off-center values lower.
  for (std::size_t i = 0; i < spec.peaks.size(); ++i)
    for (std::size_t j = i + 1; j < spec.peaks.size(); ++j) {
      const auto& a = spec.peaks[i];
      const auto& b = spec.peaks[j];
      if (distance(a.center, b.center, spec.N) < a.radius + b.radius) {
        Point mid{};
        for (int d = 0; d < spec.N; ++d) mid[d] = 0.5 * (a.center[d] + b.center[d]);
        throw Error(ErrorCode::H3Violated, "peak supports overlap near " + describe(mid, spec.N));
      }
    }

  double h0 = spec.h_infty;
  Point h0_at{};
  double top = 0.0;
  for (const auto& pk : spec.peaks) {
    if (spec.h_infty + pk.amplitude < h0) {
      h0 = spec.h_infty + pk.amplitude;
      h0_at = pk.center;
    }
    top = std::max(top, pk.amplitude);
  }
  if (!(h0 > 0.0)) throw Error(ErrorCode::H1Violated, "h is not positive at " + describe(h0_at, spec.N));
  if (!(top > 0.0))
    throw Error(ErrorCode::H2Violated, "h_infty is not strictly below the maximum of h");

  spec.h_0 = h0;
  spec.h_max = spec.h_infty + top;
  spec.maxima.clear();
  bool origin = false;
  for (const auto& pk : spec.peaks) {
    if (std::abs(pk.amplitude - top) > 1e-14 * top) continue;
    if (norm(pk.center, spec.N) == 0.0) {
      origin = true;
      spec.maxima.insert(spec.maxima.begin(), pk.center);
    } else {
      spec.maxima.push_back(pk.center);
    }
  }
  if (!origin) throw Error(ErrorCode::H3Violated, "the origin is not a global maximum of h");
  return spec;
}

/// h(ε x) at every grid point.
inline std::vector<double> sample_potential(const PotentialSpec& spec, const Grid& grid, double epsilon) {
  detail::require(spec.N == grid.N, "potential and grid dimensions differ");
  std::vector<double> h(grid.size());
  for (std::size_t i = 0; i < h.size(); ++i) {
    Point x = grid.point(i);
    for (int d = 0; d < grid.N; ++d) x[d] *= epsilon;
    h[i] = spec(x);
  }
  return h;
}

/// Radial projection onto the closed ball of radius r_tilde.
inline Point chi(const Point& x, double r_tilde, int N = 3) {
  const double r = norm(x, N);
  if (r <= r_tilde) return x;
  Point y{0.0, 0.0, 0.0};
  for (int d = 0; d < N; ++d) y[d] = r_tilde * x[d] / r;
  return y;
}

/// ∫ χ(εx)|u|^2 / ∫ |u|^2.
inline Point barycenter_Q(const Field& u, double epsilon, double r_tilde) {
  const auto& grid = u.grid();
  long double total = 0.0L;
  long double acc[3] = {0.0L, 0.0L, 0.0L};
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double w = std::norm(u[i]);
    if (w == 0.0) continue;
    Point x = grid.point(i);
    for (int d = 0; d < grid.N; ++d) x[d] *= epsilon;
    const Point c = chi(x, r_tilde, grid.N);
    total += w;
    for (int d = 0; d < grid.N; ++d) acc[d] += w * c[d];
  }
  if (total == 0.0L) throw Error(ErrorCode::ZeroField, "barycenter of the zero field");
  Point q{0.0, 0.0, 0.0};
  for (int d = 0; d < grid.N; ++d) q[d] = static_cast<double>(acc[d] / total);
  return q;
}

struct LocalizationConfig {
  double rho_tilde = 0.0;
  double r_tilde = 0.0;
};

inline LocalizationConfig default_localization(const PotentialSpec& spec) {
  detail::require(!spec.maxima.empty(), "potential has not been validated");
  double base = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < spec.maxima.size(); ++i)
    for (std::size_t j = i + 1; j < spec.maxima.size(); ++j)
      base = std::min(base, distance(spec.maxima[i], spec.maxima[j], spec.N));
  if (spec.maxima.size() == 1) {
    double rmax = 0.0;
    for (const auto& pk : spec.peaks) rmax = std::max(rmax, pk.radius);
    base = 2.0 * rmax;
  }
  LocalizationConfig cfg;
  cfg.rho_tilde = 0.49 * base;
  double reach = 0.0;
  for (const auto& m : spec.maxima) reach = std::max(reach, norm(m, spec.N));
  cfg.r_tilde = reach + cfg.rho_tilde + 1.0;
  return cfg;
}

struct RegionHit {
  std::size_t index = 0;  // 1-based region label
  double distance = 0.0;  // |Q - a_i|
  bool boundary = false;  // within tolerance of |Q - a_i| = rho_tilde
};

/// Region of a barycenter value; nearest center wins on the boundary.
inline std::optional<RegionHit> region_of(const Point& q, const LocalizationConfig& cfg, const PotentialSpec& spec,
                                          double boundary_tol = 1e-9) {
  std::optional<RegionHit> best;
  for (std::size_t i = 0; i < spec.maxima.size(); ++i) {
    const double d = distance(q, spec.maxima[i], spec.N);
    const double slack = boundary_tol * cfg.rho_tilde;
    if (d > cfg.rho_tilde + slack) continue;
    if (!best || d < best->distance) best = RegionHit{i + 1, d, std::abs(d - cfg.rho_tilde) <= slack};
  }
  return best;
}

inline std::optional<RegionHit> region_index(const Field& u, double epsilon, const LocalizationConfig& cfg,
                                             const PotentialSpec& spec) {
  return region_of(barycenter_Q(u, epsilon, cfg.r_tilde), cfg, spec);
}

/// Membership in the union of closed balls of radius rho_tilde/2 around the maxima.
inline bool in_half_balls(const Point& q, const LocalizationConfig& cfg, const PotentialSpec& spec) {
  return std::any_of(spec.maxima.begin(), spec.maxima.end(),
                     [&](const Point& m) { return distance(q, m, spec.N) <= 0.5 * cfg.rho_tilde; });
}

}  // namespace normsol
