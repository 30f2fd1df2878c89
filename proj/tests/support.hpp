#pragma once

#include <cmath>
#include <random>

#include "normsol/normsol.hpp"

namespace normsol::testing {

inline ProblemParams desk_params(double epsilon = 0.1) {
  ProblemParams p;
  p.N = 1;
  p.a = 0.5;
  p.epsilon = epsilon;
  p.eta = 1.0;
  p.p = 8.0;
  p.q = 4.0;
  return p;
}

inline PotentialSpec desk_potential() {
  PotentialSpec s;
  s.N = 1;
  s.h_infty = 0.5;
  s.peaks = {Peak{{0.0, 0.0, 0.0}, 0.5, 3.0}, Peak{{10.0, 0.0, 0.0}, 0.5, 3.0}};
  return build_potential(s);
}

inline Grid desk_grid() { return Grid{1, 1024.0, 256}; }

inline LocalizedProblem desk_problem(double epsilon = 0.1) {
  const auto prm = desk_params(epsilon);
  const auto pot = desk_potential();
  const auto rep = compute_landscape(prm, pot.h_max);
  return LocalizedProblem{prm, pot, rep.profile(), default_localization(pot), desk_grid()};
}

/// Sum of 1-4 Gaussian bumps with random signs, widths, centers and a slow
/// phase modulation; decays well inside the box.
inline Field random_localized(const Grid& grid, std::mt19937_64& rng, bool complex = false) {
  std::uniform_int_distribution<int> count(1, 4);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double h = grid.spacing();
  const double wmin = 3.0 * h;
  const double wmax = grid.L / 24.0;
  const int n = count(rng);
  struct Bump {
    Point c;
    double w, amp, k, phase;
  };
  std::vector<Bump> bumps;
  for (int b = 0; b < n; ++b) {
    Bump bp{};
    bp.w = wmin * std::pow(wmax / wmin, unit(rng));
    for (int d = 0; d < grid.N; ++d) bp.c[d] = (unit(rng) - 0.5) * 0.3 * grid.L;
    bp.amp = (unit(rng) < 0.5 ? -1.0 : 1.0) * (0.2 + unit(rng));
    bp.k = (unit(rng) - 0.5) / bp.w;
    bp.phase = 2.0 * std::numbers::pi * unit(rng);
    bumps.push_back(bp);
  }
  return Field::sample(grid, [&](const Point& x) {
    Complex v = 0.0;
    for (const auto& bp : bumps) {
      double r2 = 0.0;
      for (int d = 0; d < grid.N; ++d) r2 += (x[d] - bp.c[d]) * (x[d] - bp.c[d]);
      const double env = bp.amp * std::exp(-0.5 * r2 / (bp.w * bp.w));
      const double arg = bp.k * (x[0] - bp.c[0]) + bp.phase;
      v += complex ? env * std::polar(1.0, arg) : Complex(env * std::cos(arg));
    }
    return v;
  });
}

inline double rel_diff(double a, double b) { return std::abs(a - b) / std::max(std::abs(a), std::abs(b)); }

}  // namespace normsol::testing
