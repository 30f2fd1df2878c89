#pragma once

// Subcommand implementations behind the command-line tool. Each returns the
// process exit code and writes its artifacts below the configured output
// directory.

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "normsol/config.hpp"
#include "normsol/dynamics.hpp"
#include "normsol/io.hpp"
#include "normsol/landscape.hpp"
#include "normsol/optimizer.hpp"

namespace normsol {

enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,
  kExitTwoZero = 2,
  kExitCriticalRadius = 3,
  kExitMultiplicity = 4,
  kExitGuard = 5,
};

namespace detail {

inline std::filesystem::path prepare_out(const RunConfig& c) {
  std::filesystem::path dir(c.out);
  std::filesystem::create_directories(dir);
  return dir;
}

inline std::ofstream open_out(const std::filesystem::path& p) {
  std::ofstream os(p, std::ios::binary);
  if (!os) throw Error(ErrorCode::IoError, "cannot write " + p.string());
  return os;
}

inline void write_kv(std::ostream& os, const std::string& key, double v) {
  os << key << " = " << format_real(v) << '\n';
}

inline std::string point_text(const Point& x, int N) {
  std::string s;
  for (int d = 0; d < N; ++d) s += (d ? " " : "") + format_real(x[d]);
  return s;
}

inline LandscapeReport landscape_for(const RunConfig& c) {
  return compute_landscape(c.problem, c.validated_potential().h_max);
}

// The critical-radius check goes first: whenever the two-zero condition holds
// it holds too, so in the other order its exit code could never surface.
inline int landscape_exit(const LandscapeReport& rep, std::ostream& log) {
  if (!rep.critical_radius.holds) {
    log << "critical-radius condition fails (margin " << format_real(rep.critical_radius.margin) << ")\n";
    return kExitCriticalRadius;
  }
  if (!rep.two_zero.holds) {
    log << "two-zero condition fails (margin " << format_real(rep.two_zero.margin) << ")\n";
    return kExitTwoZero;
  }
  return kExitOk;
}

}  // namespace detail

inline int cmd_landscape(const RunConfig& c, std::ostream& log) {
  validate_config(c);
  const auto rep = detail::landscape_for(c);
  const auto dir = detail::prepare_out(c);
  auto os = detail::open_out(dir / "landscape.txt");
  os << "config_hash = " << config_hash(c) << '\n';
  write_report(os, rep);
  log << "landscape: r0 = " << format_real(rep.r0) << ", R0 = " << format_real(rep.R0)
      << ", R1 = " << format_real(rep.R1) << ", w_max = " << format_real(rep.w_max) << '\n';
  return detail::landscape_exit(rep, log);
}

inline void write_record(std::ostream& os, const MinimizerRecord& r, int N, const std::string& hash,
                         const std::string& field_file) {
  using detail::write_kv;
  os << "config_hash = " << hash << '\n';
  os << "region = " << r.region << '\n';
  os << "converged = " << (r.converged ? "true" : "false") << '\n';
  write_kv(os, "beta", r.beta);
  write_kv(os, "lambda", r.lambda);
  write_kv(os, "residual", r.residual);
  os << "barycenter = " << detail::point_text(r.barycenter, N) << '\n';
  write_kv(os, "center_distance", r.center_distance);
  os << "boundary_flag = " << (r.boundary_flag ? "true" : "false") << '\n';
  write_kv(os, "grad_norm", r.grad_norm);
  write_kv(os, "mass", r.mass);
  write_kv(os, "boundary_fraction", r.boundary_fraction);
  write_kv(os, "plateau_energy_delta", r.plateau_energy_delta);
  write_kv(os, "plateau_gradient_delta", r.plateau_gradient_delta);
  os << "iterations = " << r.iterations << '\n';
  os << "field = " << field_file << '\n';
}

inline int cmd_minimize(const RunConfig& c, std::ostream& log) {
  validate_config(c);
  const auto rep = detail::landscape_for(c);
  if (const int code = detail::landscape_exit(rep, log)) return code;
  const auto pot = c.validated_potential();
  const LocalizedProblem pb{c.problem, pot, rep.profile(), default_localization(pot), c.grid};
  auto settings = c.solver;
  settings.seed = c.seed;

  const Field base = default_base(pb, settings);
  const auto outcomes = minimize_all(pb, base, settings);

  const auto dir = detail::prepare_out(c);
  const auto hash = config_hash(c);
  std::ostringstream table;
  table << "config_hash = " << hash << '\n';
  table << std::left << std::setw(4) << "i" << std::setw(26) << "beta" << std::setw(26) << "lambda"
        << std::setw(26) << "|Q - a_i|" << std::setw(26) << "residual" << "status\n";
  std::size_t converged = 0;
  for (const auto& o : outcomes) {
    table << std::setw(4) << o.region;
    if (o.record) {
      const auto& r = *o.record;
      const std::string stem = "record_" + std::to_string(o.region);
      save_nsf((dir / (stem + ".nsf")).string(), r.u);
      auto os = detail::open_out(dir / (stem + ".txt"));
      write_record(os, r, c.problem.N, hash, stem + ".nsf");
      converged += r.converged ? 1 : 0;
      table << std::setw(26) << format_real(r.beta) << std::setw(26) << format_real(r.lambda) << std::setw(26)
            << format_real(r.center_distance) << std::setw(26) << format_real(r.residual)
            << (r.converged ? "converged" : "invariant-failure") << '\n';
    } else {
      const auto& r = o.last;
      if (r) {
        table << std::setw(26) << format_real(r->beta) << std::setw(26) << format_real(r->lambda) << std::setw(26)
              << format_real(r->center_distance) << std::setw(26) << format_real(r->residual);
      } else {
        table << std::setw(104) << "-";
      }
      table << to_string(*o.error) << '\n';
      log << o.message << '\n';
    }
  }
  auto os = detail::open_out(dir / "summary.txt");
  os << table.str();
  log << table.str();
  if (converged < pot.l()) {
    log << "only " << converged << " of " << pot.l() << " regions produced converged records\n";
    return kExitMultiplicity;
  }
  return kExitOk;
}

namespace detail {

inline void write_trace_file(const std::filesystem::path& p, const EvolutionTrace& tr, const std::string& hash) {
  auto os = open_out(p);
  os << "# config_hash = " << hash << '\n';
  write_trace_csv(os, tr);
}

}  // namespace detail

inline int cmd_evolve(const RunConfig& c, const std::string& field_path, std::ostream& log) {
  validate_config(c);
  const auto rep = detail::landscape_for(c);
  const auto pot = c.validated_potential();
  const Field psi0 = load_nsf(field_path);
  if (!(psi0.grid() == c.grid)) throw Error(ErrorCode::ConfigError, "field grid differs from the [grid] section");
  const EvolveOptions opt{c.dynamics.dt, c.dynamics.T, c.dynamics.sample_every, 10.0 * rep.R1};

  const auto dir = detail::prepare_out(c);
  const auto hash = config_hash(c);
  EvolutionResult res;
  int code = kExitOk;
  try {
    res = evolve(psi0, c.problem, pot, opt);
  } catch (const EvolutionError& e) {
    res = e.partial();
    log << e.what() << '\n';
    code = kExitGuard;
  }
  detail::write_trace_file(dir / "evolve_trace.csv", res.trace, hash);
  save_nsf((dir / "evolve_final.nsf").string(), res.final_state);
  auto os = detail::open_out(dir / "evolve.txt");
  os << "config_hash = " << hash << '\n';
  detail::write_kv(os, "T", res.trace.samples.empty() ? 0.0 : res.trace.samples.back().t);
  detail::write_kv(os, "max_mass_drift", res.trace.max_mass_drift());
  detail::write_kv(os, "max_energy_drift", res.trace.max_energy_drift());
  detail::write_kv(os, "max_grad_norm", res.trace.max_grad_norm());
  detail::write_kv(os, "max_dist", res.trace.max_dist());
  detail::write_kv(os, "rotation_frequency", res.trace.rotation_frequency());
  os << "guard = " << (code == kExitOk ? "ok" : "tripped") << '\n';
  log << "evolve: max mass drift " << format_real(res.trace.max_mass_drift()) << ", max energy drift "
      << format_real(res.trace.max_energy_drift()) << '\n';
  return code;
}

/// Runs the experiment for every γ (or `gamma_override`) around the record
/// `record_index` of a previous minimize run, or around `field_path`.
inline int cmd_stability(const RunConfig& c, std::optional<std::size_t> record_index,
                         std::optional<std::string> field_path, std::optional<double> gamma_override,
                         std::ostream& log) {
  validate_config(c);
  const auto rep = detail::landscape_for(c);
  const auto pot = c.validated_potential();
  const auto dir = detail::prepare_out(c);
  std::string label;
  std::string source;
  if (record_index) {
    label = "record_" + std::to_string(*record_index);
    source = (dir / (label + ".nsf")).string();
  } else if (field_path) {
    label = "field";
    source = *field_path;
  } else {
    throw Error(ErrorCode::ConfigError, "stability needs --record or --field");
  }
  const Field u = load_nsf(source);
  if (!(u.grid() == c.grid)) throw Error(ErrorCode::ConfigError, "field grid differs from the [grid] section");

  const auto gammas = gamma_override ? std::vector<double>{*gamma_override} : c.dynamics.gammas;
  const auto hash = config_hash(c);
  int code = kExitOk;
  for (std::size_t k = 0; k < gammas.size(); ++k) {
    StabilitySettings s;
    s.gamma = gammas[k];
    s.T = c.dynamics.T;
    s.dt = c.dynamics.dt;
    s.sample_every = c.dynamics.sample_every;
    s.theta_target = c.dynamics.theta;
    s.seed = c.seed;
    const auto v = stability_experiment(u, c.problem, pot, rep.profile(), s);
    const std::string stem = "stability_" + label + "_" + std::to_string(k + 1);
    detail::write_trace_file(dir / (stem + "_trace.csv"), v.result.trace, hash);
    save_nsf((dir / (stem + "_final.nsf")).string(), v.result.final_state);
    auto os = detail::open_out(dir / (stem + ".txt"));
    os << "config_hash = " << hash << '\n';
    os << "source = " << label << '\n';
    detail::write_kv(os, "gamma", v.gamma);
    detail::write_kv(os, "T", v.T);
    detail::write_kv(os, "initial_distance", v.initial_distance);
    detail::write_kv(os, "theta", v.theta);
    detail::write_kv(os, "theta_translation", v.theta_translation);
    detail::write_kv(os, "theta_target", s.theta_target);
    detail::write_kv(os, "max_grad_norm", v.max_grad_norm);
    detail::write_kv(os, "R0", rep.R0);
    os << "guard_ok = " << (v.guard_ok ? "true" : "false") << '\n';
    os << "verdict = " << (v.pass ? "PASS" : "FAIL") << '\n';
    if (!v.diagnostics.empty()) os << "diagnostics = " << v.diagnostics << '\n';
    log << "stability " << label << " gamma " << format_real(v.gamma) << ": sup dist " << format_real(v.theta)
        << ", verdict " << (v.pass ? "PASS" : "FAIL") << '\n';
    if (v.blew_up) code = kExitGuard;
  }
  return code;
}

}  // namespace normsol
