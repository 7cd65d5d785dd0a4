#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "isi/experiment.hpp"

using namespace isi;

namespace {

ExperimentConfig parse(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in);
}

void expect_error_at(const std::string& text, int line, int column) {
  try {
    parse(text);
    FAIL("expected a ConfigError");
  } catch (const ConfigError& e) {
    CHECK(e.line() == line);
    CHECK(e.column() == column);
  }
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream s;
  s << f.rdbuf();
  return s.str();
}

}  // namespace

TEST_CASE("config parsing", "[experiment]") {
  SECTION("sections, comments and types") {
    const auto cfg = parse(
        "# leading comment\n"
        "[run]\n"
        "seed = 42   # trailing comment\n"
        "[model]\n"
        "kind = random\n"
        "dS = 3\n"
        "dB = 16\n"
        "strength = 0.25\n"
        "[analysis]\n"
        "theorems = T0i, T2ii\n"
        "allow_degenerate = true\n"
        "[tolerances]\n"
        "gaps_rel = 1e-8\n");
    CHECK(cfg.seed == 42);
    CHECK(cfg.model.kind == ModelKind::random);
    CHECK(cfg.model.dS == 3);
    CHECK(cfg.model.dB == 16);
    CHECK(cfg.model.strength == 0.25);
    CHECK(cfg.analysis.theorems == std::vector<std::string>{"T0i", "T2ii"});
    CHECK(cfg.analysis.allow_degenerate);
    CHECK(cfg.tol.gaps_rel == 1e-8);
    CHECK_NOTHROW(validate(cfg));
  }

  SECTION("defaults are complete and valid") {
    const auto cfg = parse("");
    CHECK(cfg.seed == 1);
    CHECK_NOTHROW(validate(cfg));
  }

  SECTION("diagnostics carry line and column") {
    expect_error_at("[model]\ncolour = blue\n", 2, 1);
    expect_error_at("[model]\ndB = many\n", 2, 6);
    expect_error_at("[model]\n  dB =   12x\n", 2, 10);
    expect_error_at("[nonsense]\n", 1, 2);
    expect_error_at("dB = 4\n", 1, 1);
    expect_error_at("[model]\ndB 4\n", 2, 1);
    expect_error_at("[model\n", 1, 1);
    expect_error_at("[model]\nkind = spherical\n", 2, 8);
    expect_error_at("[analysis]\neth_fit = maybe\n", 2, 11);
    expect_error_at("[model]\ndB =\n", 2, 5);
  }

  SECTION("validation catches out-of-range values") {
    auto cfg = parse("[analysis]\ntheorems = T7\n");
    CHECK_THROWS_AS(validate(cfg), ConfigError);
    cfg = parse("[dynamics]\nn_times = 50\n");
    CHECK_THROWS_AS(validate(cfg), ConfigError);
    cfg = parse("[analysis]\np = 1.5\n");
    CHECK_THROWS_AS(validate(cfg), ConfigError);
    cfg = parse("[model]\nkind = file\n");
    CHECK_THROWS_AS(validate(cfg), ConfigError);
  }

  SECTION("overrides") {
    auto cfg = parse("[model]\ndB = 16\n");
    apply_overrides(cfg, {"model.dB=32", "analysis.epsilon = 0.2"});
    CHECK(cfg.model.dB == 32);
    CHECK(cfg.analysis.epsilon == 0.2);
    CHECK_THROWS_AS(apply_overrides(cfg, {"model.dB"}), ConfigError);
    CHECK_THROWS_AS(apply_overrides(cfg, {"model.size=3"}), ConfigError);
  }
}

TEST_CASE("experiment stages", "[experiment]") {
  const auto dir = std::filesystem::temp_directory_path() / "isi_experiment_test";
  std::filesystem::remove_all(dir);
  auto cfg = parse(
      "[model]\nkind = commuting\ndB = 8\n"
      "[analysis]\nmc_samples = 200\ndR = 4\n"
      "[dynamics]\nn_times = 100\ndraws = 3\ntrajectory_points = 11\n");
  cfg.out = dir.string();

  auto run_all = [&] {
    auto ctx = prepare(cfg, 1, true);
    stage_model_info(ctx);
    stage_spectrum(ctx);
    stage_equilibrium(ctx);
    const auto reports = stage_bounds(ctx);
    stage_dynamics(ctx);
    write_summary(ctx, "run");
    return std::make_pair(ctx.summary, reports);
  };

  const auto [summary, reports] = run_all();
  for (const auto& r : reports) CHECK(report_self_consistent(r));
  for (const char* f : {"model.json", "spectrum.csv", "spectrum.json", "reductions.csv", "equilibrium.json",
                        "theorems.csv", "trajectory.csv", "equilibration.csv", "summary.txt", "reports/T2ii.json"})
    CHECK(std::filesystem::exists(dir / f));

  bool conclusion = false;
  for (const auto& line : summary)
    conclusion |= line == "conclusion: system ISI cannot hold with accuracy better than ≈ 1/3";
  CHECK(conclusion);

  const auto j = nlohmann::json::parse(slurp(dir / "reports/T2ii_target.json"));
  CHECK(j["verdict"] == "violated");
  CHECK(j["schema_version"] == 1);

  SECTION("re-running gives identical data files") {
    const auto first = slurp(dir / "reductions.csv");
    const auto first_eq = slurp(dir / "equilibration.csv");
    const auto first_rep = slurp(dir / "reports/T0i.json");
    run_all();
    CHECK(slurp(dir / "reductions.csv") == first);
    CHECK(slurp(dir / "equilibration.csv") == first_eq);
    CHECK(slurp(dir / "reports/T0i.json") == first_rep);
  }

  SECTION("thread count does not change results") {
    const auto first = slurp(dir / "reports/T0i.json");
    auto ctx = prepare(cfg, 3, true);
    stage_bounds(ctx);
    CHECK(slurp(dir / "reports/T0i.json") == first);
  }

  SECTION("degenerate spectra are refused unless allowed") {
    // σ_z/2 with a trivial two-level bath: every level is doubly degenerate
    const SpaceLayout L(2, 2);
    const auto h = assemble(0.5 * pauli_matrices()[2], CMatrix::Zero(2, 2), CMatrix::Zero(4, 4), L);
    std::filesystem::create_directories(dir);
    save_hamiltonian((dir / "deg.ham").string(), h);
    auto deg = parse("[model]\nkind = file\nfile = deg.ham\n");
    deg.base_dir = dir.string();
    deg.out = (dir / "deg").string();
    CHECK_THROWS_AS(prepare(deg, 1, true), DegenerateSpectrumError);
    CHECK_NOTHROW(prepare(deg, 1, false));
    deg.analysis.allow_degenerate = true;
    CHECK_NOTHROW(prepare(deg, 1, true));
  }
}

TEST_CASE("sweep rows are ordered by value", "[experiment]") {
  const auto dir = std::filesystem::temp_directory_path() / "isi_sweep_test";
  std::filesystem::remove_all(dir);
  auto cfg = parse(
      "[model]\nkind = random\n"
      "[dynamics]\nenabled = false\n"
      "[sweep]\nparameter = model.dB\nvalues = 8, 2, 4\n");
  cfg.out = dir.string();
  const auto rows = run_sweep(cfg, 2);
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].value == "2");
  CHECK(rows[1].value == "4");
  CHECK(rows[2].value == "8");
  CHECK(rows[2].d == 16);
  CHECK(std::filesystem::exists(dir / "sweep.csv"));
  CHECK(std::filesystem::exists(dir / "points" / "model.dB=4.json"));
}
