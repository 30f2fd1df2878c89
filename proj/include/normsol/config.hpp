#pragma once

// Sectioned key = value run configuration with a canonical serialization.
//
//   [problem]   N a epsilon eta p q
//   [potential] h_infty, one "peak = c_1 .. c_N amplitude radius" line per bump
//   [grid]      L M
//   [solver]    tol_res max_iter armijo_c backtrack step_init restarts restart_iter
//   [dynamics]  dt T gamma (space-separated list) theta sample_every
//   [run]       out seed
//
// '#' starts a comment. Unknown sections or keys are errors.

#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "normsol/dynamics.hpp"
#include "normsol/error.hpp"
#include "normsol/grid.hpp"
#include "normsol/landscape.hpp"
#include "normsol/optimizer.hpp"
#include "normsol/potential.hpp"

namespace normsol {

struct DynamicsConfig {
  double dt = 1e-3;
  double T = 50.0;
  std::vector<double> gammas{1e-2};
  double theta = 0.1;
  int sample_every = 100;

  friend bool operator==(const DynamicsConfig&, const DynamicsConfig&) = default;
};

struct RunConfig {
  ProblemParams problem;
  PotentialSpec potential;  // raw peaks; validated copy via validated_potential()
  Grid grid;
  SolverSettings solver;
  DynamicsConfig dynamics;
  std::string out = "out";
  std::uint64_t seed = 1;

  PotentialSpec validated_potential() const { return build_potential(potential); }
};

namespace detail {

inline std::string format_shortest(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc()) throw Error(ErrorCode::ConfigError, "unformattable number");
  return std::string(buf, end);
}

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

[[noreturn]] inline void config_fail(int line, const std::string& what) {
  throw Error(ErrorCode::ConfigError, "line " + std::to_string(line) + ": " + what);
}

inline std::vector<double> parse_numbers(const std::string& value, int line) {
  std::vector<double> out;
  std::istringstream is(value);
  std::string tok;
  while (is >> tok) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || ptr != tok.data() + tok.size() || !std::isfinite(v))
      config_fail(line, "not a number: '" + tok + "'");
    out.push_back(v);
  }
  return out;
}

inline double parse_one(const std::string& value, int line) {
  const auto v = parse_numbers(value, line);
  if (v.size() != 1) config_fail(line, "expected one number");
  return v.front();
}

inline long long parse_integer(const std::string& value, int line) {
  long long v = 0;
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
  if (ec != std::errc() || ptr != value.data() + value.size()) config_fail(line, "not an integer: '" + value + "'");
  return v;
}

}  // namespace detail

inline RunConfig parse_config(std::istream& is) {
  using namespace detail;
  RunConfig c;
  c.potential.peaks.clear();
  std::vector<std::pair<std::vector<double>, int>> raw_peaks;
  std::string section;
  std::string raw;
  bool m_given = false;
  for (int line = 1; std::getline(is, raw); ++line) {
    const std::string text = trim(std::string_view(raw).substr(0, raw.find('#')));
    if (text.empty()) continue;
    if (text.front() == '[') {
      if (text.back() != ']') config_fail(line, "unterminated section header");
      section = trim(std::string_view(text).substr(1, text.size() - 2));
      static const char* known[] = {"problem", "potential", "grid", "solver", "dynamics", "run"};
      bool ok = false;
      for (const char* k : known) ok = ok || section == k;
      if (!ok) config_fail(line, "unknown section [" + section + "]");
      continue;
    }
    const auto eq = text.find('=');
    if (eq == std::string::npos) config_fail(line, "expected key = value");
    const std::string key = trim(std::string_view(text).substr(0, eq));
    const std::string value = trim(std::string_view(text).substr(eq + 1));
    if (section.empty()) config_fail(line, "key outside of a section");
    if (value.empty()) config_fail(line, "empty value for '" + key + "'");

    auto unknown = [&] { config_fail(line, "unknown key '" + key + "' in [" + section + "]"); };
    if (section == "problem") {
      if (key == "N") c.problem.N = static_cast<int>(parse_integer(value, line));
      else if (key == "a") c.problem.a = parse_one(value, line);
      else if (key == "epsilon") c.problem.epsilon = parse_one(value, line);
      else if (key == "eta") c.problem.eta = parse_one(value, line);
      else if (key == "p") c.problem.p = parse_one(value, line);
      else if (key == "q") c.problem.q = parse_one(value, line);
      else unknown();
    } else if (section == "potential") {
      if (key == "h_infty") c.potential.h_infty = parse_one(value, line);
      else if (key == "peak") raw_peaks.emplace_back(parse_numbers(value, line), line);
      else unknown();
    } else if (section == "grid") {
      if (key == "L") c.grid.L = parse_one(value, line);
      else if (key == "M") {
        c.grid.M = static_cast<int>(parse_integer(value, line));
        m_given = true;
      } else unknown();
    } else if (section == "solver") {
      auto& s = c.solver;
      if (key == "tol_res") s.tol_res = parse_one(value, line);
      else if (key == "max_iter") s.max_iter = static_cast<int>(parse_integer(value, line));
      else if (key == "armijo_c") s.armijo_c = parse_one(value, line);
      else if (key == "backtrack") s.backtrack = parse_one(value, line);
      else if (key == "step_init") s.step_init = parse_one(value, line);
      else if (key == "restarts") s.restarts = static_cast<int>(parse_integer(value, line));
      else if (key == "restart_iter") s.restart_iter = static_cast<int>(parse_integer(value, line));
      else unknown();
    } else if (section == "dynamics") {
      auto& d = c.dynamics;
      if (key == "dt") d.dt = parse_one(value, line);
      else if (key == "T") d.T = parse_one(value, line);
      else if (key == "gamma") d.gammas = parse_numbers(value, line);
      else if (key == "theta") d.theta = parse_one(value, line);
      else if (key == "sample_every") d.sample_every = static_cast<int>(parse_integer(value, line));
      else unknown();
    } else if (section == "run") {
      if (key == "out") c.out = value;
      else if (key == "seed") c.seed = static_cast<std::uint64_t>(parse_integer(value, line));
      else unknown();
    }
  }
  c.potential.N = c.problem.N;
  if (!m_given && c.problem.N >= 1 && c.problem.N <= 3) c.grid.M = default_points(c.problem.N);
  c.grid.N = c.problem.N;
  for (const auto& [nums, line] : raw_peaks) {
    if (static_cast<int>(nums.size()) != c.problem.N + 2)
      config_fail(line, "peak needs " + std::to_string(c.problem.N) + " coordinates, amplitude and radius");
    Peak pk;
    for (int d = 0; d < c.problem.N; ++d) pk.center[d] = nums[d];
    pk.amplitude = nums[c.problem.N];
    pk.radius = nums[c.problem.N + 1];
    c.potential.peaks.push_back(pk);
  }
  c.solver.seed = c.seed;
  return c;
}

inline RunConfig parse_config(const std::string& text) {
  std::istringstream is(text);
  return parse_config(is);
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw Error(ErrorCode::IoError, "cannot open " + path);
  return parse_config(is);
}

/// Canonical text: fixed key order, shortest round-trip numbers.
inline std::string serialize(const RunConfig& c) {
  using detail::format_shortest;
  std::ostringstream os;
  os << "[problem]\n"
     << "N = " << c.problem.N << '\n'
     << "a = " << format_shortest(c.problem.a) << '\n'
     << "epsilon = " << format_shortest(c.problem.epsilon) << '\n'
     << "eta = " << format_shortest(c.problem.eta) << '\n'
     << "p = " << format_shortest(c.problem.p) << '\n'
     << "q = " << format_shortest(c.problem.q) << '\n';
  os << "\n[potential]\n"
     << "h_infty = " << format_shortest(c.potential.h_infty) << '\n';
  for (const auto& pk : c.potential.peaks) {
    os << "peak =";
    for (int d = 0; d < c.problem.N; ++d) os << ' ' << format_shortest(pk.center[d]);
    os << ' ' << format_shortest(pk.amplitude) << ' ' << format_shortest(pk.radius) << '\n';
  }
  os << "\n[grid]\n"
     << "L = " << format_shortest(c.grid.L) << '\n'
     << "M = " << c.grid.M << '\n';
  os << "\n[solver]\n"
     << "tol_res = " << format_shortest(c.solver.tol_res) << '\n'
     << "max_iter = " << c.solver.max_iter << '\n'
     << "armijo_c = " << format_shortest(c.solver.armijo_c) << '\n'
     << "backtrack = " << format_shortest(c.solver.backtrack) << '\n'
     << "step_init = " << format_shortest(c.solver.step_init) << '\n'
     << "restarts = " << c.solver.restarts << '\n'
     << "restart_iter = " << c.solver.restart_iter << '\n';
  os << "\n[dynamics]\n"
     << "dt = " << format_shortest(c.dynamics.dt) << '\n'
     << "T = " << format_shortest(c.dynamics.T) << '\n'
     << "gamma =";
  for (double g : c.dynamics.gammas) os << ' ' << format_shortest(g);
  os << '\n'
     << "theta = " << format_shortest(c.dynamics.theta) << '\n'
     << "sample_every = " << c.dynamics.sample_every << '\n';
  os << "\n[run]\n"
     << "out = " << c.out << '\n'
     << "seed = " << c.seed << '\n';
  return os.str();
}

/// FNV-1a (64 bit) of the canonical serialization, as 16 hex digits.
inline std::string config_hash(const RunConfig& c) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : serialize(c)) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

/// Cross-section checks run before any computation.
inline void validate_config(const RunConfig& c) {
  auto wrap = [](auto&& fn) {
    try {
      fn();
    } catch (const Error& e) {
      if (e.code() == ErrorCode::InvalidArgument) throw Error(ErrorCode::ConfigError, e.what());
      throw;
    }
  };
  wrap([&] { validate(c.problem); });
  wrap([&] { c.grid.validate(); });
  wrap([&] { c.solver.validate(); });
  const auto pot = c.validated_potential();
  // Translated starters must sit well inside the box, clear of the outer shell.
  for (const auto& m : pot.maxima) {
    if (norm(m, c.problem.N) / c.problem.epsilon > 0.3 * c.grid.L)
      throw Error(ErrorCode::ConfigError, "box too small: a maximum maps to |a_i|/epsilon = " +
                                              detail::format_shortest(norm(m, c.problem.N) / c.problem.epsilon) +
                                              " > 0.3 L");
  }
  const auto& d = c.dynamics;
  if (!(d.dt > 0.0 && d.T > 0.0 && d.theta > 0.0 && d.sample_every > 0 && !d.gammas.empty()))
    throw Error(ErrorCode::ConfigError, "dynamics section needs positive dt, T, theta, sample_every and a gamma");
  for (double g : d.gammas)
    if (!(g >= 0.0)) throw Error(ErrorCode::ConfigError, "gamma must be non-negative");
  if (d.dt * max_wavenumber_sq(c.grid) > std::numbers::pi)
    throw Error(ErrorCode::ConfigError, "dt * k_max^2 exceeds pi for this grid");
}

}  // namespace normsol
