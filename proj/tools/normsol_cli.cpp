// normsol: landscape | minimize | evolve | stability

#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "normsol/commands.hpp"
#include "normsol/config.hpp"

namespace {

struct Common {
  std::string config;
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  bool quiet = false;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config, "run configuration file")->required()->check(CLI::ExistingFile);
  cmd->add_option("--out", c.out, "output directory (overrides [run] out)");
  cmd->add_option("--seed", c.seed, "random seed (overrides [run] seed)");
  cmd->add_flag("--quiet", c.quiet, "suppress progress output");
}

normsol::RunConfig load(const Common& c) {
  auto cfg = normsol::load_config(c.config);
  if (c.out) cfg.out = *c.out;
  if (c.seed) cfg.seed = *c.seed;
  cfg.solver.seed = cfg.seed;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Normalized solutions: landscape thresholds, localized minimizers, stability runs"};
  app.require_subcommand(1);

  Common common;
  auto* landscape = app.add_subcommand("landscape", "energy-landscape thresholds and admissibility");
  auto* minimize = app.add_subcommand("minimize", "one local minimizer per maximum of h");
  auto* evolve = app.add_subcommand("evolve", "time evolution of a stored field");
  auto* stability = app.add_subcommand("stability", "perturb a record and measure the orbit distance");
  for (auto* cmd : {landscape, minimize, evolve, stability}) add_common(cmd, common);

  std::string field;
  evolve->add_option("--field", field, "NSF1 initial state")->required()->check(CLI::ExistingFile);

  std::optional<std::size_t> record;
  std::optional<std::string> stability_field;
  std::optional<double> gamma;
  auto* rec_opt = stability->add_option("--record", record, "record index from a previous minimize run");
  auto* field_opt = stability->add_option("--field", stability_field, "NSF1 profile instead of a record");
  rec_opt->excludes(field_opt);
  stability->add_option("--gamma", gamma, "perturbation size (overrides [dynamics] gamma)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? normsol::kExitOk : normsol::kExitUsage;
  }

  std::ostringstream sink;
  std::ostream& log = common.quiet ? static_cast<std::ostream&>(sink) : std::cout;
  try {
    const auto cfg = load(common);
    if (landscape->parsed()) return normsol::cmd_landscape(cfg, log);
    if (minimize->parsed()) return normsol::cmd_minimize(cfg, log);
    if (evolve->parsed()) return normsol::cmd_evolve(cfg, field, log);
    if (!record && !stability_field) {
      std::cerr << "stability needs --record or --field\n";
      return normsol::kExitUsage;
    }
    return normsol::cmd_stability(cfg, record, stability_field, gamma, log);
  } catch (const normsol::Error& e) {
    std::cerr << e.what() << '\n';
    switch (e.code()) {
      case normsol::ErrorCode::NoRoots: return normsol::kExitTwoZero;
      case normsol::ErrorCode::RegionEscape: return normsol::kExitMultiplicity;
      case normsol::ErrorCode::BlowUpGuard: return normsol::kExitGuard;
      default: return normsol::kExitUsage;
    }
  } catch (const std::exception& e) {
    std::cerr << e.what() << '\n';
    return normsol::kExitUsage;
  }
}
