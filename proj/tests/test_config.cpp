#include <doctest.h>

#include <cmath>

#include "branchlab/config.hpp"

using namespace branchlab;

namespace {

const char* kMinimal =
    "# tiny experiment\n"
    "[sim]\n"
    "level = 5\n"
    "replicates = 7\n"
    "[coefficients]\n"
    "gamma = constant 1\n";

}  // namespace

TEST_CASE("ini parsing: sections, comments, errors") {
    ConfigMap cfg = parse_ini_text(kMinimal);
    CHECK(cfg.has("sim", "level"));
    CHECK(cfg.get("sim", "level", "") == "5");
    CHECK(cfg.get("sim", "missing", "fallback") == "fallback");

    CHECK_THROWS_AS(parse_ini_text("key_without_section = 1\n"), config_error);
    CHECK_THROWS_AS(parse_ini_text("[sim]\nno_equals_here\n"), config_error);
    CHECK_THROWS_AS(parse_ini_text("[unclosed\n"), config_error);
}

TEST_CASE("schema rejects unknown sections and keys") {
    ConfigMap cfg = parse_ini_text(kMinimal);
    validate_schema(cfg);
    ConfigMap bad_sec = cfg;
    bad_sec.sections["nonsense"]["x"] = "1";
    CHECK_THROWS_AS(validate_schema(bad_sec), config_error);
    ConfigMap bad_key = cfg;
    bad_key.sections["sim"]["replicats"] = "10";  // typo must fail loudly
    CHECK_THROWS_AS(validate_schema(bad_key), config_error);
}

TEST_CASE("overrides") {
    ConfigMap cfg = parse_ini_text(kMinimal);
    apply_overrides(cfg, {"sim.level=9", "grid.nx=41"});
    CHECK(cfg.get("sim", "level", "") == "9");
    CHECK(cfg.get("grid", "nx", "") == "41");
    CHECK_THROWS_AS(apply_overrides(cfg, {"missing_equals"}), config_error);
    CHECK_THROWS_AS(apply_overrides(cfg, {"nodot=1"}), config_error);
}

TEST_CASE("function spec parsing") {
    TestFunction c = parse_test_function("constant 2.5", 1);
    double x = 0.3;
    CHECK(c.value(&x) == doctest::Approx(2.5));
    TestFunction g = parse_test_function("gaussian 1 0.5 2", 1);
    x = 0.5;
    CHECK(g.value(&x) == doctest::Approx(1.0));
    CHECK_THROWS_AS(parse_test_function("gaussian 1", 1), config_error);
    CHECK_THROWS_AS(parse_test_function("parabola 1 2", 1), config_error);
}

TEST_CASE("experiment assembly fills defaults and echoes them") {
    Experiment ex = build_experiment(parse_ini_text(kMinimal));
    CHECK(ex.dim == 1);
    CHECK(ex.sim.level == 5);
    CHECK(ex.sim.replicates == 7);
    CHECK(ex.sim.dt == doctest::Approx(1e-3));
    CHECK(ex.grid.t0 == doctest::Approx(ex.sim.t0));
    CHECK(ex.grid.T == doctest::Approx(ex.sim.t0 + ex.sim.horizon));
    CHECK(ex.family.size() == 8);
    CHECK(ex.controls.size() == 1);
    CHECK(ex.policy_kind == "hjb");
    // the echo contains materialized defaults, not just the two input keys
    CHECK(ex.resolved.find("sim.dt = 1e-3") != std::string::npos);
    CHECK(ex.resolved.find("grid.nx") != std::string::npos);
    CHECK(ex.config_hash.size() == 16);

    // hash tracks content, and identical content hashes identically
    Experiment ex2 = build_experiment(parse_ini_text(kMinimal));
    CHECK(ex2.config_hash == ex.config_hash);
    ConfigMap cfg = parse_ini_text(kMinimal);
    apply_overrides(cfg, {"sim.level=6"});
    CHECK(build_experiment(cfg).config_hash != ex.config_hash);
}

TEST_CASE("experiment wires coefficients, cost, and initial measure") {
    ConfigMap cfg = parse_ini_text(
        "[coefficients]\n"
        "b = action\n"
        "sigma = constant 0.5\n"
        "gamma = constant 0.2\n"
        "[controls]\n"
        "points = -1; 1\n"
        "[cost]\n"
        "h = gaussian 1 1 0.8\n"
        "[initial]\n"
        "kind = atoms\n"
        "coords = 0\n"
        "weights = 1\n"
        "[sim]\n"
        "level = 20\n"
        "[run]\n"
        "policy = constant -1\n"
        "alternatives = constant 1\n");
    Experiment ex = build_experiment(cfg);
    CHECK(ex.controls.size() == 2);
    CHECK(ex.coeffs.bound_b == doctest::Approx(1.0));
    CHECK(ex.coeffs.gamma_const.has_value());
    AtomicMeasure lam = ex.initial_measure();
    CHECK(lam.total_units() == 20);
    CHECK(lam.total_mass() == doctest::Approx(1.0));
    double xq = 1.0;
    CHECK(ex.terminal_h.value(&xq) == doctest::Approx(1.0));
    CHECK(ex.cost.psi_is_zero);
    CHECK(ex.policy_kind == "constant");
    REQUIRE(ex.policy_action.size() == 1);
    CHECK(ex.policy_action[0] == doctest::Approx(-1.0));
    REQUIRE(ex.alternatives.size() == 1);
    CHECK(ex.alternatives[0].second[0] == doctest::Approx(1.0));
    FeedbackPolicy pol = ex.run_policy(nullptr);
    double x = 0.0, feat = 0.0, a = 0.0;
    pol.action(0.0, &x, &feat, &a);
    CHECK(a == doctest::Approx(-1.0));
}

TEST_CASE("bad values fail with config errors") {
    CHECK_THROWS_AS(build_experiment(parse_ini_text("[space]\ndim = 0\n")), config_error);
    CHECK_THROWS_AS(build_experiment(parse_ini_text("[sim]\nlevel = -2\n")), config_error);
    CHECK_THROWS_AS(build_experiment(parse_ini_text("[initial]\nkind = blob\n")), config_error);
    CHECK_THROWS_AS(
        build_experiment(parse_ini_text("[run]\npolicy = quadratic\n")), config_error);
}
