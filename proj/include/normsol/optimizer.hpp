#pragma once

// Local minimization of the truncated energies on the mass sphere S(a):
// projected gradient descent with Armijo backtracking and renormalization
// after every accepted step.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <future>
#include <limits>
#include <optional>
#include <random>
#include <utility>
#include <vector>

#include "normsol/energy.hpp"
#include "normsol/error.hpp"
#include "normsol/field.hpp"
#include "normsol/landscape.hpp"
#include "normsol/potential.hpp"

namespace normsol {

struct SolverSettings {
  double tol_res = 1e-8;        // residual target is tol_res * a * max(1, |λ| a)
  int max_iter = 100000;
  double armijo_c = 1e-4;
  double backtrack = 0.5;       // step shrink factor
  int max_backtracks = 60;
  double step_init = 1.0;
  double step_growth = 2.0;     // next trial step after an accepted one
  double boundary_tol = 1e-8;   // accepted solutions keep less mass than this in the outer shell
  std::uint64_t seed = 1;
  int restarts = 2;             // random-restart probes in the ordering report
  int restart_iter = 20000;
  bool parallel = true;

  void validate() const {
    detail::require(tol_res > 0.0 && max_iter > 0 && armijo_c > 0.0 && armijo_c < 1.0,
                    "solver tolerances must be positive");
    detail::require(backtrack > 0.0 && backtrack < 1.0, "backtrack factor must lie in (0, 1)");
    detail::require(step_init > 0.0 && step_growth >= 1.0 && max_backtracks > 0, "bad step rule");
    detail::require(boundary_tol > 0.0 && restarts >= 0 && restart_iter > 0, "bad solver settings");
  }

  double residual_target(double a, double lambda) const {
    return tol_res * a * std::max(1.0, std::abs(lambda) * a);
  }
};

struct MinimizerRecord {
  Field u;
  std::size_t region = 0;  // 1-based
  double beta = 0.0;       // E_{ε,T}(u)
  double lambda = 0.0;
  double residual = 0.0;   // ||E'(u) - λu||_2
  Point barycenter{0.0, 0.0, 0.0};
  double center_distance = 0.0;  // |Q_ε(u) - a_i|
  bool boundary_flag = false;
  double grad_norm = 0.0;
  double mass = 0.0;
  double boundary_fraction = 0.0;
  double plateau_energy_delta = 0.0;    // |E_{ε,T}(u) - E_ε(u)|
  double plateau_gradient_delta = 0.0;  // ||E'_{ε,T}(u) - E'_ε(u)||_2
  int iterations = 0;
  bool converged = false;
};

class MinimizationError : public Error {
 public:
  MinimizationError(ErrorCode code, const std::string& what, MinimizerRecord last)
      : Error(code, what), last_(std::move(last)) {}
  const MinimizerRecord& last() const { return last_; }

 private:
  MinimizerRecord last_;
};

/// g - λu with λ = <g, u>/||u||².
inline std::pair<Field, double> project_tangent(const Field& g, const Field& u) {
  const double m = mass(u);
  if (!(m > 0.0)) throw Error(ErrorCode::ZeroField, "tangent projection at the zero field");
  const double lambda = real_inner(g, u) / m;
  Field t = g;
  t.axpy(-lambda, u);
  return {std::move(t), lambda};
}

namespace detail {

inline Field retract(const Field& u, double t, const Field& d, double a) {
  Field v = u;
  v.axpy(t, d);
  return normalize_to_mass(std::move(v), a);
}

}  // namespace detail

struct DescentResult {
  Field u;
  double energy = 0.0;
  double lambda = 0.0;
  double residual = 0.0;
  int iterations = 0;
  bool converged = false;
  bool stalled = false;   // backtracking exhausted before the residual target
  bool stopped = false;   // the monitor asked to stop
};

/// Called after every accepted step; returning false stops the descent.
using DescentMonitor = std::function<bool(int iteration, const Field& u)>;

inline DescentResult sphere_descent(const EnergyModel& model, Field u, double a, const SolverSettings& s,
                                    int max_iter, const DescentMonitor& monitor = {}) {
  s.validate();
  u = normalize_to_mass(std::move(u), a);
  DescentResult res;
  double e = model.energy(u);
  double step = s.step_init;
  for (int it = 0;; ++it) {
    const Field g = model.gradient(u);
    auto [gt, lambda] = project_tangent(g, u);
    res.lambda = lambda;
    res.residual = l2_norm(gt);
    res.iterations = it;
    if (res.residual <= s.residual_target(a, lambda)) {
      res.converged = true;
      break;
    }
    if (it >= max_iter) break;

    const Field d = -1.0 * gt;
    const double slope = real_inner(g, d);  // -||gt||² up to rounding
    if (!(slope < 0.0)) {
      res.stalled = true;
      break;
    }

    bool accepted = false;
    double t = step;
    for (int k = 0; k < s.max_backtracks; ++k, t *= s.backtrack) {
      Field trial = detail::retract(u, t, d, a);
      const double et = model.energy(trial);
      if (et <= e + s.armijo_c * t * slope) {
        u = std::move(trial);
        e = et;
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      res.stalled = true;
      break;
    }
    step = t * s.step_growth;
    if (monitor && !monitor(it + 1, u)) {
      res.stopped = true;
      res.iterations = it + 1;
      break;
    }
  }
  res.energy = e;
  res.u = std::move(u);
  return res;
}

/// Gaussian of mass a1 with standard deviation `width` per axis, centered at the origin.
inline Field gaussian_profile(const Grid& grid, double a1, double width) {
  auto u = Field::sample(grid, [&](const Point& x) {
    double r2 = 0.0;
    for (int d = 0; d < grid.N; ++d) r2 += x[d] * x[d];
    return std::exp(-0.25 * r2 / (width * width));
  });
  return normalize_to_mass(std::move(u), a1);
}

struct AutonomousResult {
  double value = 0.0;  // Υ_{μ,T,a1}
  Field u;
  double lambda = 0.0;
  double residual = 0.0;
  double grad_norm = 0.0;
  double dilation = 1.0;       // t of the negative-energy start u_t
  double start_energy = 0.0;   // J_{μ,T}(u_t)
  int iterations = 0;
};

/// Smallest k with J_{μ,T}(u_{2^{-k}}) < 0 for a narrow Gaussian u of mass a1.
inline std::pair<Field, double> negative_dilation(const EnergyModel& model, double a1, int max_halvings = 40) {
  const auto& grid = model.grid();
  const Field base = gaussian_profile(grid, a1, 2.0 * grid.spacing());
  double t = 1.0;
  for (int k = 0; k <= max_halvings; ++k, t *= 0.5) {
    const Field ut = dilate(base, t);
    if (model.energy(ut) < 0.0) return {ut, t};
  }
  throw Error(ErrorCode::NotConverged, "no dilation with negative energy before the box overflowed");
}

inline AutonomousResult autonomous_minimize(double mu, double a1, const ProblemParams& params,
                                            const TruncationProfile& profile, const Grid& grid,
                                            const SolverSettings& settings) {
  validate(params);
  detail::require(mu > 0.0, "mu must be positive");
  detail::require(a1 > 0.0 && a1 <= params.a * (1.0 + 1e-12), "a1 must lie in (0, a]");
  const auto model = autonomous_model(params, mu, grid, profile);
  auto [start, t] = negative_dilation(model, a1);
  AutonomousResult out;
  out.dilation = t;
  out.start_energy = model.energy(start);
  auto res = sphere_descent(model, std::move(start), a1, settings, settings.max_iter);
  if (!res.converged)
    throw Error(ErrorCode::NotConverged, "autonomous descent stopped at residual " + std::to_string(res.residual));
  out.value = res.energy;
  out.lambda = res.lambda;
  out.residual = res.residual;
  out.iterations = res.iterations;
  out.grad_norm = grad_norm(res.u);
  out.u = std::move(res.u);
  return out;
}

/// base(x - a_i/ε) renormalized to mass a².
inline Field starter_profile(std::size_t i, const PotentialSpec& potential, const ProblemParams& params,
                             const Field& base, double overflow_tol = 1e-8) {
  detail::require(i >= 1 && i <= potential.l(), "region index out of range");
  Point shift{0.0, 0.0, 0.0};
  for (int d = 0; d < params.N; ++d) shift[d] = potential.maxima[i - 1][d] / params.epsilon;
  Field u = normalize_to_mass(translate(base, shift), params.a);
  if (boundary_mass_fraction(u) > overflow_tol)
    throw Error(ErrorCode::SupportOverflow, "translated starter reaches the box boundary; enlarge L");
  return u;
}

struct LocalizedProblem {
  ProblemParams params;
  PotentialSpec potential;
  TruncationProfile profile;
  LocalizationConfig localization;
  Grid grid;
};

namespace detail {

inline MinimizerRecord make_record(const LocalizedProblem& pb, const EnergyModel& model, std::size_t i,
                                   Field u, int iterations) {
  MinimizerRecord rec;
  rec.region = i;
  rec.iterations = iterations;
  const auto parts = model.parts(u);
  rec.beta = model.energy(parts);
  const Field g = model.gradient(u);
  auto [gt, lambda] = project_tangent(g, u);
  rec.lambda = lambda;
  rec.residual = l2_norm(gt);
  rec.grad_norm = std::sqrt(parts.grad_sq);
  rec.mass = mass(u);
  rec.boundary_fraction = boundary_mass_fraction(u);
  rec.barycenter = barycenter_Q(u, pb.params.epsilon, pb.localization.r_tilde);
  rec.center_distance = distance(rec.barycenter, pb.potential.maxima[i - 1], pb.params.N);
  if (auto hit = region_of(rec.barycenter, pb.localization, pb.potential)) rec.boundary_flag = hit->boundary;
  const auto plain = model.untruncated();
  rec.plateau_energy_delta = std::abs(rec.beta - plain.energy(u));
  rec.plateau_gradient_delta = l2_norm(g - plain.gradient(u));
  rec.u = std::move(u);
  return rec;
}

}  // namespace detail

/// Local minimizer of E_{ε,T} inside region i, started from the translated base profile.
inline MinimizerRecord minimize_localized(std::size_t i, const LocalizedProblem& pb, const Field& base,
                                          const SolverSettings& settings) {
  const auto& prm = pb.params;
  const auto model = truncated_model(prm, pb.potential, pb.grid, pb.profile);
  Field start = starter_profile(i, pb.potential, prm, base, settings.boundary_tol);
  // At coarse ε the translated profile can miss its ball before any step.
  if (const auto hit = region_index(start, prm.epsilon, pb.localization, pb.potential); !hit || hit->index != i) {
    const Point q = barycenter_Q(start, prm.epsilon, pb.localization.r_tilde);
    throw Error(ErrorCode::RegionEscape, "starter for region " + std::to_string(i) +
                                             " lies outside its barycenter ball (|Q - a_i| = " +
                                             format_real(distance(q, pb.potential.maxima[i - 1], prm.N)) + ")");
  }

  Field last_in_region = start;
  int last_iteration = 0;
  bool escaped = false;
  const DescentMonitor monitor = [&](int it, const Field& u) {
    const auto hit = region_index(u, prm.epsilon, pb.localization, pb.potential);
    if (!hit || hit->index != i) {
      escaped = true;
      return false;
    }
    if (grad_norm(u) >= pb.profile.R1) return false;
    last_in_region = u;
    last_iteration = it;
    return true;
  };
  auto res = sphere_descent(model, std::move(start), prm.a, settings, settings.max_iter, monitor);

  if (escaped) {
    throw MinimizationError(ErrorCode::RegionEscape,
                            "descent in region " + std::to_string(i) + " left its barycenter ball",
                            detail::make_record(pb, model, i, std::move(last_in_region), last_iteration));
  }
  auto rec = detail::make_record(pb, model, i, std::move(res.u), res.iterations);
  if (rec.grad_norm >= pb.profile.R1)
    throw MinimizationError(ErrorCode::LandscapeViolated, "gradient norm crossed R1", std::move(rec));
  if (!res.converged)
    throw MinimizationError(ErrorCode::NotConverged,
                            "residual " + std::to_string(rec.residual) + " after " +
                                std::to_string(rec.iterations) + " iterations",
                            std::move(rec));
  if (rec.boundary_fraction >= settings.boundary_tol)
    throw MinimizationError(ErrorCode::DomainTooSmall, "minimizer mass reaches the box boundary", std::move(rec));
  rec.converged = std::abs(rec.mass - prm.a * prm.a) <= 1e-10 * prm.a * prm.a && rec.grad_norm < pb.profile.R0 &&
                  rec.beta < 0.0 && rec.lambda < 0.0 && rec.center_distance <= pb.localization.rho_tilde;
  return rec;
}

/// Outcome of one region run: a record or the error that ended it.
struct RegionOutcome {
  std::size_t region = 0;
  std::optional<MinimizerRecord> record;
  std::optional<ErrorCode> error;
  std::string message;
  std::optional<MinimizerRecord> last;  // last in-region iterate for failed runs
};

inline RegionOutcome run_region(std::size_t i, const LocalizedProblem& pb, const Field& base,
                                const SolverSettings& settings) {
  RegionOutcome out;
  out.region = i;
  try {
    out.record = minimize_localized(i, pb, base, settings);
  } catch (const MinimizationError& e) {
    out.error = e.code();
    out.message = e.what();
    out.last = e.last();
  } catch (const Error& e) {
    out.error = e.code();
    out.message = e.what();
  }
  return out;
}

/// Base starter: the autonomous minimizer of J_{max,T} on S(a), centered at the origin.
inline Field default_base(const LocalizedProblem& pb, const SolverSettings& settings) {
  return autonomous_minimize(pb.potential.h_max, pb.params.a, pb.params, pb.profile, pb.grid, settings).u;
}

/// One run per region i = 1..l, optionally concurrent; results ordered by region.
inline std::vector<RegionOutcome> minimize_all(const LocalizedProblem& pb, const Field& base,
                                               const SolverSettings& settings) {
  const std::size_t l = pb.potential.l();
  std::vector<RegionOutcome> out(l);
  if (settings.parallel && l > 1) {
    std::vector<std::future<RegionOutcome>> jobs;
    for (std::size_t i = 1; i <= l; ++i)
      jobs.push_back(std::async(std::launch::async, [&, i] { return run_region(i, pb, base, settings); }));
    for (std::size_t i = 0; i < l; ++i) out[i] = jobs[i].get();
  } else {
    for (std::size_t i = 1; i <= l; ++i) out[i - 1] = run_region(i, pb, base, settings);
  }
  return out;
}

struct OrderingReport {
  double upsilon_max = 0.0;    // Υ_{max,T,a}
  double upsilon_infty = 0.0;  // Υ_{∞,T,a}
  double gamma_proxy = 0.0;    // smallest energy reached by any probe; bounds Γ_{ε,T,a} from above
  std::vector<double> region_betas;   // NaN where the region run failed
  std::vector<double> restart_energies;
  double rho1_proxy = 0.0;     // (Υ_∞ - Υ_max)/2
  bool strict_chain = false;   // Υ_max < Υ_∞ < 0
};

/// Υ_max, Υ_∞ and a proxy for the global level Γ from region runs plus random restarts.
inline OrderingReport ordering_report(const LocalizedProblem& pb, const SolverSettings& settings) {
  const auto& prm = pb.params;
  OrderingReport rep;
  auto top = autonomous_minimize(pb.potential.h_max, prm.a, prm, pb.profile, pb.grid, settings);
  auto far = autonomous_minimize(pb.potential.h_infty, prm.a, prm, pb.profile, pb.grid, settings);
  rep.upsilon_max = top.value;
  rep.upsilon_infty = far.value;
  rep.rho1_proxy = 0.5 * (far.value - top.value);
  rep.strict_chain = top.value < far.value && far.value < 0.0;

  double best = std::numeric_limits<double>::infinity();
  const auto model = truncated_model(prm, pb.potential, pb.grid, pb.profile);
  // Γ ignores the regions, so every probe descends without a barycenter monitor.
  for (std::size_t i = 1; i <= pb.potential.l(); ++i) {
    double beta = std::numeric_limits<double>::quiet_NaN();
    try {
      auto res = sphere_descent(model, starter_profile(i, pb.potential, prm, top.u, settings.boundary_tol), prm.a,
                                settings, settings.max_iter);
      beta = res.energy;
      best = std::min(best, beta);
    } catch (const Error&) {
    }
    rep.region_betas.push_back(beta);
  }

  std::mt19937_64 rng(settings.seed);
  const double reach = std::min(pb.localization.r_tilde / prm.epsilon, 0.3 * pb.grid.L);
  std::uniform_real_distribution<double> coord(-reach, reach);
  for (int r = 0; r < settings.restarts; ++r) {
    Point shift{0.0, 0.0, 0.0};
    for (int d = 0; d < prm.N; ++d) shift[d] = coord(rng);
    Field start = normalize_to_mass(translate(top.u, shift), prm.a);
    auto res = sphere_descent(model, std::move(start), prm.a, settings, settings.restart_iter);
    rep.restart_energies.push_back(res.energy);
    best = std::min(best, res.energy);
  }
  rep.gamma_proxy = best;
  return rep;
}

}  // namespace normsol
