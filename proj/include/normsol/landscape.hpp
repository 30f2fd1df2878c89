#pragma once

// Scalar energy-landscape analysis: interpolation exponents, best constants,
// the profile functions w_a / g_a / ḡ_a, their thresholds, and the smooth
// truncation τ applied to the supercritical term.

#include <cmath>
#include <iomanip>
#include <limits>
#include <numbers>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>

#include "normsol/error.hpp"
#include "normsol/ground_state.hpp"

namespace normsol {

struct ProblemParams {
  int N = 1;
  double a = 0.5;        // ||u||_2^2 = a^2
  double epsilon = 0.1;  // potential dilation
  double eta = 1.0;      // supercritical coupling
  double p = 8.0;        // supercritical exponent
  double q = 4.0;        // subcritical exponent

  friend bool operator==(const ProblemParams&, const ProblemParams&) = default;
};

/// 2N/(N-2) for N >= 3, +inf otherwise.
inline double sobolev_exponent(int N) {
  return N >= 3 ? 2.0 * N / (N - 2.0) : std::numeric_limits<double>::infinity();
}

inline bool is_sobolev_critical(const ProblemParams& params) {
  return params.N >= 3 && std::abs(params.p - sobolev_exponent(params.N)) <= 1e-12;
}

inline void validate(const ProblemParams& params) {
  using detail::require;
  require(params.N >= 1, "N must be >= 1");
  const double mass_critical = 2.0 + 4.0 / params.N;
  require(params.q > 2.0 && params.q < mass_critical, "q must satisfy 2 < q < 2 + 4/N");
  require(params.p > mass_critical, "p must exceed 2 + 4/N");
  if (params.N >= 3)
    require(params.p <= sobolev_exponent(params.N) + 1e-12, "p must not exceed 2N/(N-2)");
  require(std::isfinite(params.p), "p must be finite");
  require(params.a > 0.0 && params.epsilon > 0.0 && params.eta > 0.0,
          "a, epsilon and eta must be positive");
}

/// γ_t = N/2 - N/t.
inline double gamma(double t, int N) {
  detail::require(t > 2.0, "gamma: exponent must exceed 2");
  detail::require(N >= 1, "gamma: dimension must be >= 1");
  return 0.5 * N - N / t;
}

/// Best constant S of the critical Sobolev embedding (Talenti).
inline double sobolev_constant(int N) {
  detail::require(N >= 3, "sobolev_constant: requires N >= 3");
  const double sphere = 2.0 * std::pow(std::numbers::pi, 0.5 * (N + 1)) / std::tgamma(0.5 * (N + 1));
  return 0.25 * N * (N - 2.0) * std::pow(sphere, 2.0 / N);
}

/// Best Gagliardo-Nirenberg constant C_{N,t} from the Weinstein quotient of
/// the radial ground state. At t = 2N/(N-2) returns S^{-1/2}.
inline double gn_constant(int N, double t) {
  detail::require(N >= 1, "gn_constant: dimension must be >= 1");
  detail::require(t > 2.0, "gn_constant: exponent must exceed 2");
  if (N >= 3) {
    const double critical = sobolev_exponent(N);
    if (std::abs(t - critical) <= 1e-12) return 1.0 / std::sqrt(sobolev_constant(N));
    detail::require(t < critical, "gn_constant: exponent above 2N/(N-2)");
  }
  detail::require(std::isfinite(t), "gn_constant: exponent must be finite");
  const auto gs = radial_ground_state(N, t);
  const double g = gamma(t, N);
  const double ct = gs.power / (std::pow(gs.gradient_sq, 0.5 * t * g) * std::pow(gs.mass, 0.5 * t * (1.0 - g)));
  return std::pow(ct, 1.0 / t);
}

/// Constants consumed by the closed forms below.
struct GnConstants {
  double gamma_q = 0.0;
  double gamma_p = 0.0;
  double C_q = 0.0;
  double C_p = 0.0;
  std::optional<double> S;  // only in the Sobolev-critical case
};

inline GnConstants compute_constants(const ProblemParams& params) {
  validate(params);
  GnConstants c;
  c.gamma_q = gamma(params.q, params.N);
  c.gamma_p = gamma(params.p, params.N);
  c.C_q = gn_constant(params.N, params.q);
  if (is_sobolev_critical(params)) {
    c.S = sobolev_constant(params.N);
    c.C_p = 1.0 / std::sqrt(*c.S);
  } else {
    c.C_p = gn_constant(params.N, params.p);
  }
  return c;
}

namespace detail {

// Coefficients of the two power laws in w_a.
struct PowerLaw {
  double kq;  // (1/q) h_max C_q^q a^{q(1-γ_q)}
  double kp;  // (η/p) C_p^p a^{p(1-γ_p)}
  double eq;  // qγ_q - 2 < 0
  double ep;  // pγ_p - 2 > 0
};

inline PowerLaw power_law(const ProblemParams& pr, double h_max, const GnConstants& c, double mass_level) {
  PowerLaw law;
  law.kq = h_max * std::pow(c.C_q, pr.q) * std::pow(mass_level, pr.q * (1.0 - c.gamma_q)) / pr.q;
  law.kp = pr.eta * std::pow(c.C_p, pr.p) * std::pow(mass_level, pr.p * (1.0 - c.gamma_p)) / pr.p;
  law.eq = pr.q * c.gamma_q - 2.0;
  law.ep = pr.p * c.gamma_p - 2.0;
  return law;
}

}  // namespace detail

inline double coefficient_B(const ProblemParams& params, double /*h_max*/, const GnConstants& c) {
  const double qg = params.q * c.gamma_q;
  const double pg = params.p * c.gamma_p;
  const double D = pg - qg;
  return D / (2.0 - qg) * std::pow((2.0 - qg) / (pg - 2.0), (pg - 2.0) / D) *
         std::pow(std::pow(c.C_q, params.q) / params.q, (pg - 2.0) / D) *
         std::pow(std::pow(c.C_p, params.p) / params.p, (2.0 - qg) / D);
}

inline double w_a(double r, const ProblemParams& params, double h_max, const GnConstants& c) {
  detail::require(r > 0.0, "w_a: r must be positive");
  const auto law = detail::power_law(params, h_max, c, params.a);
  return 0.5 - law.kq * std::pow(r, law.eq) - law.kp * std::pow(r, law.ep);
}

inline double w_a_prime(double r, const ProblemParams& params, double h_max, const GnConstants& c) {
  detail::require(r > 0.0, "w_a_prime: r must be positive");
  const auto law = detail::power_law(params, h_max, c, params.a);
  return -law.kq * law.eq * std::pow(r, law.eq - 1.0) - law.kp * law.ep * std::pow(r, law.ep - 1.0);
}

inline double g_a(double r, const ProblemParams& params, double h_max, const GnConstants& c) {
  if (r == 0.0) return 0.0;
  return r * r * w_a(r, params, h_max, c);
}

/// Closed-form unique critical point of w_a.
inline double r0(const ProblemParams& params, double h_max, const GnConstants& c) {
  const auto law = detail::power_law(params, h_max, c, params.a);
  return std::pow((-law.eq) * law.kq / (law.ep * law.kp), 1.0 / (law.ep - law.eq));
}

/// Displayed closed form of max w_a = w_a(r0).
inline double w_max_closed_form(const ProblemParams& params, double h_max, const GnConstants& c) {
  const double qg = params.q * c.gamma_q;
  const double pg = params.p * c.gamma_p;
  const double D = pg - qg;
  return 0.5 - coefficient_B(params, h_max, c) *
                   std::pow(h_max * std::pow(params.a, params.q * (1.0 - c.gamma_q)), (pg - 2.0) / D) *
                   std::pow(params.eta * std::pow(params.a, params.p * (1.0 - c.gamma_p)), (2.0 - qg) / D);
}

struct ConditionCheck {
  bool holds = false;
  double margin = 0.0;  // positive when the condition holds
};

/// Smallness of the mass/coupling product ensuring w_a has two zeros.
inline ConditionCheck check_two_zero_condition(const ProblemParams& params, double h_max, const GnConstants& c) {
  const double qg = params.q * c.gamma_q;
  const double pg = params.p * c.gamma_p;
  const double D = pg - qg;
  const double lhs = std::pow(h_max * std::pow(params.a, params.q * (1.0 - c.gamma_q)), (pg - 2.0) / D) *
                     std::pow(params.eta * std::pow(params.a, params.p * (1.0 - c.gamma_p)), (2.0 - qg) / D);
  const double rhs = 1.0 / (2.0 * coefficient_B(params, h_max, c));
  return {lhs < rhs, rhs - lhs};
}

/// Sobolev-critical requirement r0 < η^{-(N-2)/4} S^{N/4}; vacuous otherwise.
inline ConditionCheck check_critical_radius_condition(const ProblemParams& params, double h_max,
                                                      const GnConstants& c) {
  if (!is_sobolev_critical(params)) return {true, std::numeric_limits<double>::infinity()};
  detail::require(c.S.has_value(), "critical radius condition needs S");
  const double bound = std::pow(params.eta, -(params.N - 2.0) / 4.0) * std::pow(*c.S, params.N / 4.0);
  const double radius = r0(params, h_max, c);
  return {radius < bound, bound - radius};
}

/// The same requirement written as an explicit inequality in (h_max, a, η).
inline ConditionCheck critical_radius_condition_expanded(const ProblemParams& params, double h_max,
                                                         const GnConstants& c) {
  if (!is_sobolev_critical(params)) return {true, std::numeric_limits<double>::infinity()};
  detail::require(c.S.has_value(), "critical radius condition needs S");
  const int N = params.N;
  const double crit = params.p;
  const double qg = params.q * c.gamma_q;
  const double D = params.p * c.gamma_p - qg;
  const double S = *c.S;
  const double lhs = std::pow(h_max * std::pow(params.a, params.q * (1.0 - c.gamma_q)), 1.0 / D) *
                     std::pow(params.eta, (N - 2.0) / 4.0 - 1.0 / D);
  const double inner = (2.0 - qg) * std::pow(c.C_q, params.q) * crit * std::pow(S, crit / 2.0) /
                       (params.q * (params.p - 2.0));
  const double rhs = std::pow(inner, -1.0 / D) * std::pow(S, N / 4.0);
  return {lhs <= rhs, rhs - lhs};
}

struct LandscapeTolerances {
  double root_abs = 1e-10;        // |w_a| at the returned roots
  double scan_low = 1e-8;         // scan interval [scan_low, scan_high] * r0
  double scan_high = 1e8;
  double scan_factor = 1.05;
  double bisection_rel = 1e-15;   // relative bracket width at termination
};

/// Zeros R0 < r0 < R1 of w_a via certified sign-change brackets and bisection.
inline std::pair<double, double> find_R0_R1(const ProblemParams& params, double h_max, const GnConstants& c,
                                            const LandscapeTolerances& tol = {}) {
  const double peak = r0(params, h_max, c);
  auto w = [&](double r) { return w_a(r, params, h_max, c); };
  if (!(w(peak) > 0.0)) throw Error(ErrorCode::NoRoots, "max of w_a is not positive");

  auto bisect = [&](double lo, double hi) {
    // Invariant: sign(w(lo)) != sign(w(hi)).
    double wlo = w(lo);
    for (int it = 0; it < 400; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (mid <= lo || mid >= hi) break;
      const double wm = w(mid);
      if (wm == 0.0) return mid;
      if ((wm > 0.0) == (wlo > 0.0)) {
        lo = mid;
        wlo = wm;
      } else {
        hi = mid;
      }
      if (hi - lo <= tol.bisection_rel * std::abs(mid)) break;
    }
    const double wl = std::abs(w(lo));
    const double wh = std::abs(w(hi));
    return wl <= wh ? lo : hi;
  };

  double inner = peak;
  double outer = peak / tol.scan_factor;
  while (w(outer) > 0.0) {
    inner = outer;
    outer /= tol.scan_factor;
    if (outer < tol.scan_low * peak) throw Error(ErrorCode::NoRoots, "lower zero not bracketed");
  }
  const double R0 = bisect(outer, inner);

  inner = peak;
  outer = peak * tol.scan_factor;
  while (w(outer) > 0.0) {
    inner = outer;
    outer *= tol.scan_factor;
    if (outer > tol.scan_high * peak) throw Error(ErrorCode::NoRoots, "upper zero not bracketed");
  }
  const double R1 = bisect(inner, outer);
  return {R0, R1};
}

/// Non-increasing C^∞ cutoff: 1 below R0, 0 above R1.
struct TruncationProfile {
  double R0 = 0.0;
  double R1 = 0.0;
};

namespace detail {

// Bridge f(s) = φ(1-s)/(φ(s)+φ(1-s)), φ(s) = exp(-1/s), written as a logistic
// in z = 1/s - 1/(1-s) to avoid underflow near the endpoints.
inline double bridge(double s) {
  const double z = 1.0 / s - 1.0 / (1.0 - s);
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

}  // namespace detail

inline double tau(double r, const TruncationProfile& profile) {
  if (r <= profile.R0) return 1.0;
  if (r >= profile.R1) return 0.0;
  return detail::bridge((r - profile.R0) / (profile.R1 - profile.R0));
}

inline double tau_prime(double r, const TruncationProfile& profile) {
  if (r <= profile.R0 || r >= profile.R1) return 0.0;
  const double width = profile.R1 - profile.R0;
  const double s = (r - profile.R0) / width;
  const double z = 1.0 / s - 1.0 / (1.0 - s);
  // f (1 - f) of the logistic, written so it does not cancel on the plateaus.
  const double e = std::exp(-std::abs(z));
  const double slope = e / ((1.0 + e) * (1.0 + e));
  const double dz = -1.0 / (s * s) - 1.0 / ((1.0 - s) * (1.0 - s));
  return slope * dz / width;
}

/// Lower bound ḡ_a of the truncated energy in terms of ||∇u||_2.
inline double g_bar(double r, const ProblemParams& params, double h_max, const GnConstants& c,
                    const TruncationProfile& profile) {
  if (r == 0.0) return 0.0;
  const auto law = detail::power_law(params, h_max, c, params.a);
  return r * r * (0.5 - law.kq * std::pow(r, law.eq) - tau(r, profile) * law.kp * std::pow(r, law.ep));
}

struct LandscapeReport {
  ProblemParams params;
  double h_max = 0.0;
  double gamma_q = 0.0;
  double gamma_p = 0.0;
  double C_q = 0.0;
  double C_p = 0.0;
  std::optional<double> S;
  double B = 0.0;
  double r0 = 0.0;
  double R0 = std::numeric_limits<double>::quiet_NaN();
  double R1 = std::numeric_limits<double>::quiet_NaN();
  double w_max = 0.0;
  ConditionCheck two_zero;
  ConditionCheck critical_radius;

  GnConstants constants() const { return {gamma_q, gamma_p, C_q, C_p, S}; }
  bool admissible() const { return two_zero.holds && critical_radius.holds; }
  TruncationProfile profile() const { return {R0, R1}; }
};

inline LandscapeReport compute_landscape(const ProblemParams& params, double h_max) {
  detail::require(h_max > 0.0, "h_max must be positive");
  const auto c = compute_constants(params);
  LandscapeReport rep;
  rep.params = params;
  rep.h_max = h_max;
  rep.gamma_q = c.gamma_q;
  rep.gamma_p = c.gamma_p;
  rep.C_q = c.C_q;
  rep.C_p = c.C_p;
  rep.S = c.S;
  rep.B = coefficient_B(params, h_max, c);
  rep.r0 = r0(params, h_max, c);
  rep.w_max = w_a(rep.r0, params, h_max, c);
  rep.two_zero = check_two_zero_condition(params, h_max, c);
  rep.critical_radius = check_critical_radius_condition(params, h_max, c);
  if (rep.two_zero.holds) {
    const auto [lo, hi] = find_R0_R1(params, h_max, c);
    rep.R0 = lo;
    rep.R1 = hi;
  }
  return rep;
}

/// 17 significant digits; "inf"/"nan" spelled out.
inline std::string format_real(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

/// Flat key = value report, 17 significant digits.
inline void write_report(std::ostream& os, const LandscapeReport& rep) {
  os << "N = " << rep.params.N << '\n';
  os << "a = " << format_real(rep.params.a) << '\n';
  os << "eta = " << format_real(rep.params.eta) << '\n';
  os << "p = " << format_real(rep.params.p) << '\n';
  os << "q = " << format_real(rep.params.q) << '\n';
  os << "h_max = " << format_real(rep.h_max) << '\n';
  os << "gamma_q = " << format_real(rep.gamma_q) << '\n';
  os << "gamma_p = " << format_real(rep.gamma_p) << '\n';
  os << "C_q = " << format_real(rep.C_q) << '\n';
  os << "C_p = " << format_real(rep.C_p) << '\n';
  os << "S = " << (rep.S ? format_real(*rep.S) : std::string("none")) << '\n';
  os << "B = " << format_real(rep.B) << '\n';
  os << "r0 = " << format_real(rep.r0) << '\n';
  os << "R0 = " << format_real(rep.R0) << '\n';
  os << "R1 = " << format_real(rep.R1) << '\n';
  os << "w_max = " << format_real(rep.w_max) << '\n';
  os << "two_zero_condition = " << (rep.two_zero.holds ? "true" : "false") << '\n';
  os << "two_zero_margin = " << format_real(rep.two_zero.margin) << '\n';
  os << "critical_radius_condition = " << (rep.critical_radius.holds ? "true" : "false") << '\n';
  os << "critical_radius_margin = " << format_real(rep.critical_radius.margin) << '\n';
}

}  // namespace normsol
