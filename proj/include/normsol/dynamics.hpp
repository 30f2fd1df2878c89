#pragma once

// Strang-split integration of
//   i ψ_t + Δψ + h(εx)|ψ|^{q-2}ψ + η|ψ|^{p-2}ψ = 0
// and the orbital-stability experiment around a computed minimizer.

#include <cmath>
#include <cstdint>
#include <limits>
#include <mutex>
#include <numbers>
#include <optional>
#include <ostream>
#include <random>
#include <vector>

#include "normsol/energy.hpp"
#include "normsol/error.hpp"
#include "normsol/field.hpp"
#include "normsol/landscape.hpp"
#include "normsol/potential.hpp"

namespace normsol {

struct TraceSample {
  double t = 0.0;
  double mass_drift = 0.0;    // |m(t) - m(0)| / m(0)
  double energy_drift = 0.0;  // |E(t) - E(0)| / |E(0)|
  double grad_norm = 0.0;
  double dist = 0.0;              // phase-minimized H¹ distance to the reference
  double dist_translation = 0.0;  // also minimized over grid translations
  double phase = 0.0;             // unwrapped arg <reference, ψ(t)>
};

struct EvolutionTrace {
  std::vector<TraceSample> samples;

  double max_mass_drift() const { return max_of(&TraceSample::mass_drift); }
  double max_energy_drift() const { return max_of(&TraceSample::energy_drift); }
  double max_dist() const { return max_of(&TraceSample::dist); }
  double max_dist_translation() const { return max_of(&TraceSample::dist_translation); }
  double max_grad_norm() const { return max_of(&TraceSample::grad_norm); }

  /// Least-squares slope of the unwrapped phase; -λ for a standing wave e^{-iλt}u.
  double rotation_frequency() const {
    const double n = static_cast<double>(samples.size());
    if (samples.size() < 2) return 0.0;
    double st = 0.0, sp = 0.0, stt = 0.0, stp = 0.0;
    for (const auto& s : samples) {
      st += s.t;
      sp += s.phase;
      stt += s.t * s.t;
      stp += s.t * s.phase;
    }
    return (n * stp - st * sp) / (n * stt - st * st);
  }

 private:
  double max_of(double TraceSample::*m) const {
    double v = 0.0;
    for (const auto& s : samples) v = std::max(v, s.*m);
    return v;
  }
};

inline void write_trace_csv(std::ostream& os, const EvolutionTrace& trace) {
  os << "t,mass_drift,energy_drift,grad_norm,dist,dist_translation\n";
  os.precision(17);
  for (const auto& s : trace.samples)
    os << s.t << ',' << s.mass_drift << ',' << s.energy_drift << ',' << s.grad_norm << ',' << s.dist << ','
       << s.dist_translation << '\n';
}

/// min_θ ||ψ - e^{iθ} u||_{H¹}.
inline double phase_distance(const Field& psi, const Field& u) {
  const auto& sp = spectral(u.grid());
  const auto& k2 = sp.k2();
  const auto uh = sp.forward(u.data());
  const auto ph = sp.forward(psi.data());
  long double re = 0.0L, im = 0.0L;
  for (std::size_t i = 0; i < uh.size(); ++i) {
    const Complex z = std::conj(uh[i]) * ph[i] * (1.0 + k2[i]);
    re += z.real();
    im += z.imag();
  }
  const Complex rot = std::polar(1.0, std::atan2(static_cast<double>(im), static_cast<double>(re)));
  long double s = 0.0L;
  for (std::size_t i = 0; i < uh.size(); ++i) s += std::norm(ph[i] - rot * uh[i]) * (1.0 + k2[i]);
  return std::sqrt(static_cast<double>(s) * u.grid().cell_volume() / static_cast<double>(uh.size()));
}

/// min over θ and grid shifts s of ||ψ - e^{iθ} u(· - s)||_{H¹}.
inline double translation_distance(const Field& psi, const Field& u) {
  const auto& sp = spectral(u.grid());
  const auto& k2 = sp.k2();
  const auto uh = sp.forward(u.data());
  const auto ph = sp.forward(psi.data());
  std::vector<Complex> c(uh.size());
  long double nu = 0.0L, np = 0.0L;
  for (std::size_t i = 0; i < uh.size(); ++i) {
    c[i] = std::conj(uh[i]) * ph[i] * (1.0 + k2[i]);
    nu += std::norm(uh[i]) * (1.0 + k2[i]);
    np += std::norm(ph[i]) * (1.0 + k2[i]);
  }
  std::vector<Complex> corr(c.size());
  sp.backward(c.data(), corr.data());
  double best = 0.0;
  for (const auto& z : corr) best = std::max(best, std::abs(z));
  const double sq = static_cast<double>(nu + np) - 2.0 * best;
  const double scale = u.grid().cell_volume() / static_cast<double>(uh.size());
  return std::sqrt(std::max(0.0, sq * scale));
}

namespace detail {

// Extended-precision transforms for the integrator. A standing wave repeats
// nearly the same rounding pattern every step, so double-precision transforms
// accumulate a coherent mass drift of ~1e-16 per step.
class ExtendedTransform {
 public:
  using value_type = std::complex<long double>;

  explicit ExtendedTransform(const Grid& grid) : n_(grid.size()) {
    int dims[3] = {grid.M, grid.M, grid.M};
    std::lock_guard lock(planner_mutex());
    auto* in = fftwl_alloc_complex(n_);
    auto* out = fftwl_alloc_complex(n_);
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    forward_ = fftwl_plan_dft(grid.N, dims, in, out, FFTW_FORWARD, flags);
    backward_ = fftwl_plan_dft(grid.N, dims, in, out, FFTW_BACKWARD, flags);
    fftwl_free(in);
    fftwl_free(out);
    if (!forward_ || !backward_) throw Error(ErrorCode::InvalidArgument, "FFTW plan creation failed");
  }
  ExtendedTransform(const ExtendedTransform&) = delete;
  ExtendedTransform& operator=(const ExtendedTransform&) = delete;
  ~ExtendedTransform() {
    std::lock_guard lock(planner_mutex());
    fftwl_destroy_plan(forward_);
    fftwl_destroy_plan(backward_);
  }

  void forward(value_type* in, value_type* out) const {
    fftwl_execute_dft(forward_, reinterpret_cast<fftwl_complex*>(in), reinterpret_cast<fftwl_complex*>(out));
  }
  void backward(value_type* in, value_type* out) const {
    fftwl_execute_dft(backward_, reinterpret_cast<fftwl_complex*>(in), reinterpret_cast<fftwl_complex*>(out));
  }

 private:
  std::size_t n_;
  fftwl_plan forward_ = nullptr;
  fftwl_plan backward_ = nullptr;
};

}  // namespace detail

struct EvolveOptions {
  double dt = 1e-3;
  double T = 10.0;
  int sample_every = 100;              // steps between trace samples
  double blowup_radius = std::numeric_limits<double>::infinity();  // ||∇ψ|| guard, 10·R1 in practice
};

struct EvolutionResult {
  EvolutionTrace trace;
  Field final_state;
};

class EvolutionError : public Error {
 public:
  EvolutionError(ErrorCode code, const std::string& what, EvolutionResult partial)
      : Error(code, what), partial_(std::move(partial)) {}
  const EvolutionResult& partial() const { return partial_; }

 private:
  EvolutionResult partial_;
};

/// Largest |k|² the grid represents.
inline double max_wavenumber_sq(const Grid& grid) {
  const double kn = std::numbers::pi * grid.M / grid.L;
  return grid.N * kn * kn;
}

/// Strang splitting with weight w = h(εx): half nonlinear rotation, exact
/// linear propagator, half nonlinear rotation, carried in long double. The
/// trace distance is taken to `reference` (ψ0 when absent).
inline EvolutionResult evolve(const Field& psi0, const std::vector<double>& weight, const ProblemParams& params,
                              const EvolveOptions& opt, const std::optional<Field>& reference = std::nullopt) {
  const auto& grid = psi0.grid();
  detail::require(opt.dt > 0.0 && opt.T >= 0.0 && opt.sample_every > 0, "bad evolution options");
  detail::require(opt.dt * max_wavenumber_sq(grid) <= std::numbers::pi,
                  "time step violates dt * k_max^2 <= pi");
  detail::require(weight.size() == grid.size(), "weight size does not match grid");
  const Field& ref = reference ? *reference : psi0;
  detail::require(ref.grid() == grid, "reference lives on another grid");

  using LComplex = std::complex<long double>;
  const EnergyModel model(grid, weight, params.q, params.p, params.eta);
  const auto& sp = spectral(grid);
  const detail::ExtendedTransform fft(grid);
  const long double inv = 1.0L / static_cast<long double>(grid.size());
  std::vector<LComplex> propagator(grid.size());
  for (std::size_t i = 0; i < propagator.size(); ++i)
    propagator[i] = std::polar(1.0L, -static_cast<long double>(sp.k2()[i]) * opt.dt) * inv;

  const double m0 = mass(psi0);
  const double e0 = model.energy(psi0);
  const double ref_phase_mass = mass(ref);
  double last_phase = 0.0;
  double unwrapped = 0.0;

  EvolutionResult out;
  std::vector<LComplex> psi(grid.size());
  for (std::size_t i = 0; i < psi.size(); ++i) psi[i] = LComplex(psi0[i].real(), psi0[i].imag());
  std::vector<LComplex> hat(psi.size());

  auto snapshot = [&] {
    std::vector<Complex> v(psi.size());
    for (std::size_t i = 0; i < psi.size(); ++i)
      v[i] = Complex(static_cast<double>(psi[i].real()), static_cast<double>(psi[i].imag()));
    return Field(grid, std::move(v));
  };

  auto record = [&](double t) {
    const Field f = snapshot();
    TraceSample s;
    s.t = t;
    s.mass_drift = std::abs(mass(f) - m0) / m0;
    s.energy_drift = e0 != 0.0 ? std::abs(model.energy(f) - e0) / std::abs(e0) : std::abs(model.energy(f));
    s.grad_norm = grad_norm(f);
    s.dist = phase_distance(f, ref);
    s.dist_translation = translation_distance(f, ref);
    if (ref_phase_mass > 0.0) {
      const double ph = std::arg(inner(ref, f));
      double step = ph - last_phase;
      step -= 2.0 * std::numbers::pi * std::round(step / (2.0 * std::numbers::pi));
      unwrapped += out.trace.samples.empty() ? ph : step;
      last_phase = ph;
    }
    s.phase = unwrapped;
    out.trace.samples.push_back(s);
    return s;
  };

  // The rotation angle only needs double precision; unit modulus comes from
  // the long double polar form.
  const double hq = 0.5 * (params.q - 2.0);
  const double hp = 0.5 * (params.p - 2.0);
  auto nonlinear = [&](double tau) {
    for (std::size_t i = 0; i < psi.size(); ++i) {
      const double m2 = static_cast<double>(std::norm(psi[i]));
      if (m2 == 0.0) continue;
      const double pot = weight[i] * std::pow(m2, hq) + params.eta * std::pow(m2, hp);
      psi[i] *= std::polar(1.0L, static_cast<long double>(tau * pot));
    }
  };

  const long steps = std::lround(opt.T / opt.dt);
  record(0.0);
  for (long n = 1; n <= steps; ++n) {
    nonlinear(0.5 * opt.dt);
    fft.forward(psi.data(), hat.data());
    for (std::size_t i = 0; i < hat.size(); ++i) hat[i] *= propagator[i];
    fft.backward(hat.data(), psi.data());
    nonlinear(0.5 * opt.dt);
    if (n % opt.sample_every == 0 || n == steps) {
      const auto s = record(n * opt.dt);
      if (!(s.grad_norm <= opt.blowup_radius)) {
        out.final_state = snapshot();
        throw EvolutionError(ErrorCode::BlowUpGuard,
                             "gradient norm " + std::to_string(s.grad_norm) + " exceeded the guard at t = " +
                                 std::to_string(s.t),
                             std::move(out));
      }
    }
  }
  out.final_state = snapshot();
  return out;
}

inline EvolutionResult evolve(const Field& psi0, const ProblemParams& params, const PotentialSpec& potential,
                              const EvolveOptions& opt, const std::optional<Field>& reference = std::nullopt) {
  return evolve(psi0, sample_potential(potential, psi0.grid(), params.epsilon), params, opt, reference);
}

/// Seeded smooth perturbation direction: band-limited complex noise (|k| up to
/// a quarter of the grid cutoff) times the envelope |u|/max|u|, unit H¹ norm.
inline Field perturbation_direction(const Field& u, std::uint64_t seed) {
  const auto& grid = u.grid();
  const auto& sp = spectral(grid);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double cutoff = 0.25 * std::sqrt(max_wavenumber_sq(grid) / grid.N);
  std::vector<Complex> hat(grid.size());
  for (std::size_t i = 0; i < hat.size(); ++i) {
    const double re = normal(rng);
    const double im = normal(rng);
    if (sp.k2()[i] <= cutoff * cutoff) hat[i] = Complex(re, im);
  }
  Field xi(grid, sp.inverse(hat));
  double top = 0.0;
  for (const auto& z : u.values()) top = std::max(top, std::abs(z));
  if (!(top > 0.0)) throw Error(ErrorCode::ZeroField, "perturbation around the zero field");
  for (std::size_t i = 0; i < xi.size(); ++i) xi[i] *= std::abs(u[i]) / top;
  const double n = h1_norm(xi);
  if (!(n > 0.0)) throw Error(ErrorCode::ZeroField, "degenerate perturbation direction");
  xi *= Complex(1.0 / n);
  return xi;
}

struct StabilitySettings {
  double gamma = 1e-2;
  double T = 50.0;
  double dt = 1e-3;
  int sample_every = 100;
  double theta_target = 0.1;
  std::uint64_t seed = 1;
};

struct StabilityVerdict {
  double theta = 0.0;               // sup_t phase-minimized distance
  double theta_translation = 0.0;   // sup_t distance modulo phase and grid shifts
  double gamma = 0.0;
  double initial_distance = 0.0;
  double max_grad_norm = 0.0;
  bool guard_ok = false;            // ||∇ψ(t)|| < R0 at every sample
  bool blew_up = false;
  double T = 0.0;
  bool pass = false;
  std::string diagnostics;
  EvolutionResult result;
};

/// Perturbs u by γ||u||_{H¹}ξ, renormalizes to the mass of u, evolves and
/// measures the distance to the phase orbit of u.
inline StabilityVerdict stability_experiment(const Field& u, const ProblemParams& params,
                                             const PotentialSpec& potential, const TruncationProfile& profile,
                                             const StabilitySettings& s) {
  detail::require(s.gamma >= 0.0 && s.theta_target > 0.0, "bad stability settings");
  Field u0 = u;
  if (s.gamma > 0.0) u0.axpy(s.gamma * h1_norm(u), perturbation_direction(u, s.seed));
  u0 = normalize_to_mass(std::move(u0), std::sqrt(mass(u)));

  StabilityVerdict v;
  v.gamma = s.gamma;
  v.T = s.T;
  v.initial_distance = phase_distance(u0, u);
  EvolveOptions opt{s.dt, s.T, s.sample_every, 10.0 * profile.R1};
  try {
    v.result = evolve(u0, params, potential, opt, u);
  } catch (const EvolutionError& e) {
    v.result = e.partial();
    v.blew_up = true;
    v.diagnostics = e.what();
  }
  const auto& tr = v.result.trace;
  v.theta = tr.max_dist();
  v.theta_translation = tr.max_dist_translation();
  v.max_grad_norm = tr.max_grad_norm();
  v.guard_ok = !v.blew_up && v.max_grad_norm < profile.R0;
  v.pass = v.guard_ok && v.theta <= s.theta_target;
  return v;
}

}  // namespace normsol
