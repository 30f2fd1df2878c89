#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "support.hpp"

using namespace normsol;
using namespace normsol::testing;
namespace fs = std::filesystem;

namespace {

const std::string kDesk = std::string(NORMSOL_SOURCE_DIR) + "/configs/desk.ini";

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("normsol_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

RunConfig desk_config(const fs::path& out) {
  auto c = load_config(kDesk);
  c.out = out.string();
  return c;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

std::map<std::string, std::string> read_kv(const fs::path& p) {
  std::map<std::string, std::string> kv;
  std::istringstream is(slurp(p));
  std::string line;
  while (std::getline(is, line)) {
    const auto eq = line.find(" = ");
    if (eq != std::string::npos) kv[line.substr(0, eq)] = line.substr(eq + 3);
  }
  return kv;
}

std::map<std::string, std::string> snapshot(const fs::path& dir) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::directory_iterator(dir)) files[e.path().filename().string()] = slurp(e.path());
  return files;
}

std::string config_error(const std::string& text) {
  try {
    parse_config(text);
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ConfigError);
    return e.what();
  }
  ADD_FAILURE() << "accepted:\n" << text;
  return {};
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(NORMSOL_CLI) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream os(p, std::ios::binary);
  os << text;
}

}  // namespace

TEST(Config, DeskMatchesDefaults) {
  const auto c = load_config(kDesk);
  EXPECT_EQ(c.problem.N, 1);
  EXPECT_EQ(c.problem.a, 0.5);
  EXPECT_EQ(c.problem.epsilon, 0.1);
  EXPECT_EQ(c.grid, desk_grid());
  const auto pot = c.validated_potential();
  EXPECT_EQ(pot.l(), 2u);
  EXPECT_EQ(pot.h_max, 1.0);
  EXPECT_EQ(c.dynamics.gammas, std::vector<double>{1e-2});
  EXPECT_NO_THROW(validate_config(c));
}

TEST(Config, RoundTripIsByteIdentical) {
  const auto c = load_config(kDesk);
  const std::string once = serialize(c);
  const std::string twice = serialize(parse_config(once));
  EXPECT_EQ(once, twice);

  // Awkward numbers survive too.
  auto d = c;
  d.problem.a = 0.1 + 0.2;
  d.problem.epsilon = 1.0 / 3.0;
  d.potential.h_infty = 5e-324;
  d.dynamics.gammas = {0.0, 1e-2, 0.30000000000000004};
  const auto back = parse_config(serialize(d));
  EXPECT_EQ(back.problem.a, d.problem.a);
  EXPECT_EQ(back.problem.epsilon, d.problem.epsilon);
  EXPECT_EQ(back.potential.h_infty, d.potential.h_infty);
  EXPECT_EQ(back.dynamics, d.dynamics);
  EXPECT_EQ(serialize(back), serialize(d));
}

TEST(Config, ErrorsCarryLineNumbers) {
  EXPECT_NE(config_error("[problem]\nN = 1\n[bogus]\n").find("line 3"), std::string::npos);
  EXPECT_NE(config_error("[problem]\n\n# c\nwidth = 2\n").find("line 4"), std::string::npos);
  EXPECT_NE(config_error("[problem]\na = half\n").find("line 2"), std::string::npos);
  EXPECT_NE(config_error("N = 1\n").find("line 1"), std::string::npos);
  EXPECT_NE(config_error("[grid]\nM = 2.5\n").find("line 2"), std::string::npos);
  EXPECT_NE(config_error("[problem\n").find("line 1"), std::string::npos);
  EXPECT_NE(config_error("[run]\nseed\n").find("line 2"), std::string::npos);
  EXPECT_NE(config_error("[problem]\nN = 1\n[potential]\npeak = 0 0.5\n").find("line 4"), std::string::npos);
}

TEST(Config, HashIdentifiesConfig) {
  const auto c = load_config(kDesk);
  const auto h = config_hash(c);
  ASSERT_EQ(h.size(), 16u);
  EXPECT_EQ(h.find_first_not_of("0123456789abcdef"), std::string::npos);
  EXPECT_EQ(config_hash(parse_config(serialize(c))), h);
  auto d = c;
  d.seed = 2;
  EXPECT_NE(config_hash(d), h);
  d = c;
  d.problem.epsilon = std::nextafter(0.1, 1.0);
  EXPECT_NE(config_hash(d), h);
}

TEST(Config, CrossSectionValidation) {
  const auto c = load_config(kDesk);
  auto small = c;
  small.grid.L = 300.0;  // 10 / 0.1 = 100 > 0.3 * 300
  try {
    validate_config(small);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ConfigError);
    EXPECT_NE(std::string(e.what()).find("box too small"), std::string::npos);
  }
  auto fast = c;
  fast.dynamics.dt = 10.0;  // k_max^2 = 0.617 on the desk grid
  EXPECT_THROW(validate_config(fast), Error);
  auto bad = c;
  bad.problem.q = 1.5;
  EXPECT_THROW(validate_config(bad), Error);
  bad = c;
  bad.dynamics.gammas = {-1.0};
  EXPECT_THROW(validate_config(bad), Error);
}

TEST(Commands, LandscapeExitCodes) {
  const auto dir = scratch("landscape");
  std::ostringstream log;
  auto c = desk_config(dir);
  EXPECT_EQ(cmd_landscape(c, log), kExitOk);
  const auto kv = read_kv(dir / "landscape.txt");
  EXPECT_EQ(kv.at("config_hash"), config_hash(c));
  EXPECT_EQ(kv.at("two_zero_condition"), "true");
  EXPECT_NEAR(std::stod(kv.at("R0")), 0.0360875681507, 1e-12);

  c.problem.a *= 1e6;
  EXPECT_EQ(cmd_landscape(c, log), kExitTwoZero);

  // Sobolev-critical instance with r0 at 0.72 of the radius bound, inside the
  // two-zero range (which ends near 0.78 for q = 3). A 10^6 boost of the
  // coupling raises the ratio by 10^{1/6}, past the bound.
  RunConfig crit = desk_config(dir);
  crit.problem = ProblemParams{};
  crit.problem.N = 3;
  crit.problem.q = 3.0;
  crit.problem.p = 6.0;
  crit.problem.eta = 1.0;
  crit.problem.epsilon = 0.1;
  crit.potential.N = 3;
  crit.potential.h_infty = 0.5;
  crit.potential.peaks = {Peak{{0.0, 0.0, 0.0}, 0.5, 2.0}};
  crit.grid = Grid{3, 64.0, 32};
  const auto cst = compute_constants(crit.problem);
  const double bound = std::pow(*cst.S, 0.75);
  crit.problem.a = 1.0;
  crit.problem.a = std::pow(0.72 * bound / r0(crit.problem, 1.0, cst), 3.0);
  EXPECT_EQ(cmd_landscape(crit, log), kExitOk);
  crit.problem.eta *= 1e6;
  EXPECT_EQ(cmd_landscape(crit, log), kExitCriticalRadius);
}

TEST(Commands, MinimizeThenStability) {
  const auto dir = scratch("minimize");
  const auto c = desk_config(dir);
  const auto hash = config_hash(c);
  std::ostringstream log;
  ASSERT_EQ(cmd_minimize(c, log), kExitOk) << log.str();
  for (int i : {1, 2}) {
    const auto kv = read_kv(dir / ("record_" + std::to_string(i) + ".txt"));
    EXPECT_EQ(kv.at("config_hash"), hash);
    EXPECT_EQ(kv.at("converged"), "true");
    EXPECT_LT(std::stod(kv.at("beta")), 0.0);
    EXPECT_LT(std::stod(kv.at("lambda")), 0.0);
    const Field u = load_nsf((dir / kv.at("field")).string());
    EXPECT_EQ(u.grid(), c.grid);
    EXPECT_NEAR(mass(u), 0.25, 1e-12);
  }
  const auto summary = slurp(dir / "summary.txt");
  EXPECT_EQ(summary.rfind("config_hash = " + hash, 0), 0u);
  EXPECT_NE(summary.find("converged"), std::string::npos);

  const auto first = snapshot(dir);
  ASSERT_EQ(cmd_minimize(c, log), kExitOk);
  EXPECT_EQ(snapshot(dir), first) << "minimize output is not deterministic";

  ASSERT_EQ(cmd_stability(c, 1, std::nullopt, std::nullopt, log), kExitOk) << log.str();
  const auto st = read_kv(dir / "stability_record_1_1.txt");
  EXPECT_EQ(st.at("config_hash"), hash);
  EXPECT_EQ(st.at("verdict"), "PASS");
  EXPECT_EQ(st.at("guard_ok"), "true");
  EXPECT_EQ(slurp(dir / "stability_record_1_1_trace.csv").rfind("# config_hash = " + hash, 0), 0u);

  // Every text artifact leads with the hash; the binary fields carry it
  // through the record file that names them.
  for (const auto& e : fs::directory_iterator(dir)) {
    const auto ext = e.path().extension();
    if (ext == ".nsf") continue;
    EXPECT_NE(slurp(e.path()).find("config_hash = " + hash), std::string::npos) << e.path();
  }

  auto ev = c;
  ev.dynamics.T = 1.0;
  ASSERT_EQ(cmd_evolve(ev, (dir / "record_2.nsf").string(), log), kExitOk);
  const auto ekv = read_kv(dir / "evolve.txt");
  EXPECT_EQ(ekv.at("guard"), "ok");
  EXPECT_LE(std::stod(ekv.at("max_mass_drift")), 1e-12);
}

TEST(Commands, CoarseEpsilonIsAMultiplicityShortfall) {
  const auto dir = scratch("coarse");
  auto c = desk_config(dir);
  c.problem.epsilon = 2.0;
  std::ostringstream log;
  EXPECT_EQ(cmd_minimize(c, log), kExitMultiplicity);
  EXPECT_NE(slurp(dir / "summary.txt").find("RegionEscape"), std::string::npos);
}

TEST(Cli, ExitCodes) {
  const auto dir = scratch("cli");
  const std::string out = " --quiet --out " + dir.string();
  EXPECT_EQ(run_cli(""), kExitUsage);
  EXPECT_EQ(run_cli("landscape"), kExitUsage);
  EXPECT_EQ(run_cli("landscape --config " + (dir / "missing.ini").string()), kExitUsage);
  EXPECT_EQ(run_cli("landscape --config " + kDesk + out), kExitOk);
  EXPECT_TRUE(fs::exists(dir / "landscape.txt"));

  auto big = load_config(kDesk);
  big.problem.a *= 1e6;
  write_file(dir / "big.ini", serialize(big));
  EXPECT_EQ(run_cli("landscape --config " + (dir / "big.ini").string() + out), kExitTwoZero);

  write_file(dir / "broken.ini", "[problem]\nN = one\n");
  EXPECT_EQ(run_cli("landscape --config " + (dir / "broken.ini").string() + out), kExitUsage);

  auto coarse = load_config(kDesk);
  coarse.problem.epsilon = 2.0;
  write_file(dir / "coarse.ini", serialize(coarse));
  EXPECT_EQ(run_cli("minimize --config " + (dir / "coarse.ini").string() + out), kExitMultiplicity);

  EXPECT_EQ(run_cli("stability --config " + kDesk + out), kExitUsage);
}
