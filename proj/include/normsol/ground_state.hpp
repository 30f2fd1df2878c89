#pragma once

// Radial ground state of -ΔQ + Q = |Q|^{t-2} Q by shooting on Q(0).

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include "normsol/error.hpp"

namespace normsol {

struct RadialGroundState {
  int N = 1;
  double t = 4.0;
  double center_value = 0.0;  // Q(0)
  // Integrals over R^N (surface factor included).
  double mass = 0.0;          // ||Q||_2^2
  double gradient_sq = 0.0;   // ||∇Q||_2^2
  double power = 0.0;         // ||Q||_t^t
  double truncation_radius = 0.0;
};

struct ShootingOptions {
  double step = 1e-3;
  double max_radius = 80.0;
  int max_bisections = 200;
};

namespace detail {

/// Surface measure of the unit sphere in R^N (2 for N = 1).
inline double sphere_area(int N) {
  return 2.0 * std::pow(std::numbers::pi, 0.5 * N) / std::tgamma(0.5 * N);
}

enum class ShotOutcome { Overshoot, Undershoot, Escaped };

// State: Q, Q', and the running integrals of Q^2, Q'^2, |Q|^t against r^{N-1}.
using ShotState = std::array<double, 5>;

inline ShotState shot_rhs(double r, const ShotState& y, int N, double t) {
  const double Q = y[0];
  const double dQ = y[1];
  const double w = N == 1 ? 1.0 : std::pow(r, N - 1);
  const double aq = std::abs(Q);
  ShotState f{};
  f[0] = dQ;
  f[1] = -(N - 1) / r * dQ + Q - std::pow(aq, t - 2.0) * Q;
  f[2] = Q * Q * w;
  f[3] = dQ * dQ * w;
  f[4] = std::pow(aq, t) * w;
  return f;
}

struct ShotResult {
  ShotOutcome outcome;
  ShotState state;
  double radius;
};

/// Integrates from the series start until the trajectory crosses zero
/// (overshoot) or turns upward while positive (undershoot).
inline ShotResult shoot(double s, int N, double t, const ShootingOptions& opt) {
  const double r_start = 1e-4;
  const double c = (s - std::pow(s, t - 1.0)) / (2.0 * N);
  double r = r_start;
  const double rn = std::pow(r_start, N);
  ShotState y{s + c * r * r, 2.0 * c * r, s * s * rn / N, 0.0, std::pow(s, t) * rn / N};
  while (r < opt.max_radius) {
    // Resolve the (N-1)/r term near the origin with proportionally small steps.
    const double h = N == 1 ? opt.step : std::min(opt.step, 0.05 * r);
    const ShotState k1 = shot_rhs(r, y, N, t);
    ShotState tmp{};
    for (int i = 0; i < 5; ++i) tmp[i] = y[i] + 0.5 * h * k1[i];
    const ShotState k2 = shot_rhs(r + 0.5 * h, tmp, N, t);
    for (int i = 0; i < 5; ++i) tmp[i] = y[i] + 0.5 * h * k2[i];
    const ShotState k3 = shot_rhs(r + 0.5 * h, tmp, N, t);
    for (int i = 0; i < 5; ++i) tmp[i] = y[i] + h * k3[i];
    const ShotState k4 = shot_rhs(r + h, tmp, N, t);
    ShotState next{};
    for (int i = 0; i < 5; ++i) next[i] = y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    if (next[0] <= 0.0) return {ShotOutcome::Overshoot, y, r};
    if (next[1] >= 0.0) return {ShotOutcome::Undershoot, y, r};
    y = next;
    r += h;
  }
  return {ShotOutcome::Escaped, y, r};
}

}  // namespace detail

/// Computes the positive radial ground state for 2 < t < 2N/(N-2) and its
/// norms. The returned integrals stop where the bisected trajectory departs
/// from the decaying branch, so tails below ~1e-8 in amplitude are dropped.
inline RadialGroundState radial_ground_state(int N, double t, const ShootingOptions& opt = {}) {
  detail::require(N >= 1, "dimension must be >= 1");
  detail::require(t > 2.0, "exponent must exceed 2");
  if (N >= 3) detail::require(t < 2.0 * N / (N - 2.0), "exponent must be Sobolev-subcritical");

  // Q(0)^{t-2} > 1 is necessary for Q'' < 0 at the origin.
  double lo = 1.0 + 1e-9;
  double hi = 2.0;
  while (detail::shoot(hi, N, t, opt).outcome != detail::ShotOutcome::Overshoot) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e6) throw Error(ErrorCode::NotConverged, "shooting bracket not found");
  }
  for (int it = 0; it < opt.max_bisections; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const auto shot = detail::shoot(mid, N, t, opt);
    if (shot.outcome == detail::ShotOutcome::Overshoot)
      hi = mid;
    else
      lo = mid;
  }
  const auto final_shot = detail::shoot(lo, N, t, opt);
  const double area = detail::sphere_area(N);
  // The 1-D "sphere area" of 2 counts both half-lines.
  RadialGroundState gs;
  gs.N = N;
  gs.t = t;
  gs.center_value = lo;
  gs.mass = area * final_shot.state[2];
  gs.gradient_sq = area * final_shot.state[3];
  gs.power = area * final_shot.state[4];
  gs.truncation_radius = final_shot.radius;
  return gs;
}

}  // namespace normsol
