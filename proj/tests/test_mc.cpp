#include <doctest.h>

#include <cmath>
#include <vector>

#include "branchlab/mc.hpp"
#include "branchlab/oracles.hpp"

using namespace branchlab;

namespace {

MeasureSpec delta0_spec(double mass = 1.0) {
    MeasureSpec spec;
    spec.kind = MeasureSpec::Kind::atoms;
    spec.dim = 1;
    spec.atom_coords = {0.0};
    spec.atom_weights = {mass};
    return spec;
}

}  // namespace

TEST_CASE("summaries of a tiny sample") {
    std::vector<double> xs{1.0, 2.0, 3.0, 4.0};
    Estimate e = summarize(xs);
    CHECK(e.mean == doctest::Approx(2.5));
    CHECK(e.std_error == doctest::Approx(std::sqrt(5.0 / 12.0)));
    CHECK(e.replicates == 4);
    CHECK(e.half_width() == doctest::Approx(3.0 * e.std_error));

    VarianceEstimate v = summarize_variance(xs);
    CHECK(v.variance == doctest::Approx(5.0 / 3.0));
    // m4 - v^2 = 2.5625 - 2.778 < 0 clamps to zero for this tiny sample
    CHECK(v.std_error == doctest::Approx(0.0));
}

TEST_CASE("deterministic cost evaluation is exact") {
    SimConfig cfg;
    cfg.level = 4;
    cfg.horizon = 1.0;
    cfg.dt = 0.25;
    cfg.replicates = 3;
    Coefficients coeffs = make_coefficients_const(1, 1, 1, {0.0}, 0.0, 0.0);
    CostSpec cost = zero_running_exp_terminal(tf_constant(1, 1.0));
    Estimate e = evaluate_cost(cfg, coeffs, cost, constant_policy({0.0}),
                               discretize(delta0_spec(), cfg.level));
    CHECK(e.mean == doctest::Approx(std::exp(-1.0)).epsilon(1e-15));
    CHECK(e.std_error == doctest::Approx(0.0));
    CHECK(e.replicates == 3);
}

TEST_CASE("censored replicates are excluded and counted") {
    SimConfig cfg;
    cfg.level = 1;
    cfg.horizon = 1.0;
    cfg.dt = 1e-2;
    cfg.replicates = 80;
    cfg.seed = 12;
    cfg.mass_cap_factor = 1.0;
    Coefficients coeffs = make_coefficients_const(1, 1, 1, {0.0}, 0.0, 1.0);
    RecordSpec rec;
    Estimate e = estimate_scalar(cfg, coeffs, constant_policy({0.0}),
                                 discretize(delta0_spec(), cfg.level), rec,
                                 [](const TrajectoryRecord& r) {
                                     return r.final_measure.total_mass();
                                 });
    CHECK(e.censored > 0);
    CHECK(e.replicates + e.censored == 80);
    // every kept replicate stayed at or below the cap, so masses lie in {0, 1}
    CHECK(e.mean >= 0.0);
    CHECK(e.mean <= 1.0);
}

TEST_CASE("verification accepts the solved candidate policy") {
    GridSpec grid;
    grid.nx = 21;
    grid.nt = 2000;
    Coefficients coeffs = make_coefficients_const(1, 1, 1, {0.0}, 0.0, 1.0);
    ControlSet controls{1, {{0.0}}};
    ValueSurface s = solve_w(grid, coeffs, controls, tf_constant(1, 1.0));

    SimConfig cfg;
    cfg.level = 20;
    cfg.horizon = 1.0;
    cfg.dt = 2e-3;
    cfg.replicates = 2000;
    cfg.seed = 710;
    CostSpec cost = zero_running_exp_terminal(tf_constant(1, 1.0));
    VerifyReport rep = verify_optimality(s, cfg, coeffs, cost,
                                         discretize(delta0_spec(), cfg.level), {}, 0.25);
    CHECK(rep.value == doctest::Approx(std::exp(-2.0 / 3.0)).epsilon(1e-6));
    CHECK(rep.candidate_ok);
    CHECK(rep.pass);
    CHECK(rep.tolerance >= 0.25 / 20.0);
    CHECK(std::abs(rep.j_candidate.mean - rep.value) <= rep.tolerance);
}

TEST_CASE("dpp consistency at the midpoint, and input validation") {
    GridSpec grid;
    grid.nx = 21;
    grid.nt = 2000;
    Coefficients coeffs = make_coefficients_const(1, 1, 1, {0.0}, 0.0, 1.0);
    ControlSet controls{1, {{0.0}}};
    ValueSurface s = solve_w(grid, coeffs, controls, tf_constant(1, 1.0));
    CostSpec cost = zero_running_exp_terminal(tf_constant(1, 1.0));

    SimConfig cfg;
    cfg.level = 10;
    cfg.horizon = 1.0;
    cfg.dt = 1e-3;
    cfg.replicates = 2000;
    cfg.seed = 218;
    AtomicMeasure lam = discretize(delta0_spec(), cfg.level);
    CHECK_THROWS_AS(dpp_check(s, cfg, coeffs, cost, lam, 0.0, 0.25), config_error);
    CHECK_THROWS_AS(dpp_check(s, cfg, coeffs, cost, lam, 1.5, 0.25), config_error);
    DppReport rep = dpp_check(s, cfg, coeffs, cost, lam, 0.5, 0.25);
    CHECK(rep.value_start == doctest::Approx(std::exp(-2.0 / 3.0)).epsilon(1e-6));
    CHECK(rep.tau == doctest::Approx(0.5));
    CHECK(rep.pass);
    // atoms never move here, so the continuation is exp(-w(tau,0) * m_tau)
    const double target = oracles::scheme_laplace(10, 1.0, 1e-3, 500, 0.8, 10);
    CHECK(std::abs(rep.continuation.mean - target) <=
          4.0 * rep.continuation.std_error + 1e-6);
}

TEST_CASE("scheme-bias allowance covers the calibrated finite-level biases") {
    // the kappa/level tolerance used by verify/dpp assumes kappa = 0.25
    // dominates level * |scheme - limit| with >= 1.5x margin on the
    // settings it was calibrated on (no motion, gamma = 1, dt = 1e-3, T = 1)
    const double kappa = 0.25;
    for (int level : {10, 50}) {
        const double scheme =
            oracles::scheme_laplace(level, 1.0, 1e-3, 1000, 1.0, level);
        const double limit = oracles::feller_laplace(1.0, 1.0, 1.0, 1.0);
        CHECK(1.5 * level * std::abs(scheme - limit) <= kappa);
    }
}

TEST_CASE("moment ladder ratios stay bounded across initial masses") {
    SimConfig cfg;
    cfg.level = 5;
    cfg.horizon = 0.5;
    cfg.dt = 2e-3;
    cfg.replicates = 200;
    cfg.seed = 90;
    Coefficients coeffs = make_coefficients_const(1, 1, 1, {0.0}, 1.0, 1.0);
    MomentBoundReport rep = moment_bound_check(cfg, coeffs, constant_policy({0.0}),
                                               default_family(1), {1.0, 2.0}, 3.0);
    REQUIRE(rep.rows.size() == 2);
    CHECK(rep.all_finite);
    CHECK(rep.pass);
    for (const auto& row : rep.rows) {
        CHECK(row.initial_distance > 0.0);
        // the sup over time dominates the initial value
        CHECK(row.ratio >= 1.0 - 1e-12);
        CHECK(row.ratio < 3.0);
    }
    CHECK(rep.spread >= 1.0);
    CHECK(rep.spread <= 3.0);
}

TEST_CASE("variance scaling: spatial sampling noise decays like 1/level") {
    SimConfig base;
    base.horizon = 0.5;
    base.dt = 2e-3;
    base.replicates = 4000;
    base.seed = 1234;
    Coefficients coeffs = make_coefficients_const(1, 1, 1, {0.0}, 1.0, 1.0);
    TestFunction phi = tf_gaussian(1, {0.0}, 1.0);
    ScalingReport rep = convergence_study(base, coeffs, constant_policy({0.0}), delta0_spec(),
                                          phi, {1, 4, 16});
    REQUIRE(rep.rows.size() == 3);
    CHECK(rep.slope > 0.0);
    CHECK(rep.r_squared > 0.4);
    CHECK(rep.v_inf > 0.0);
    for (const auto& row : rep.rows) CHECK(row.var.variance > 0.0);

    CHECK_THROWS_AS(convergence_study(base, coeffs, constant_policy({0.0}), delta0_spec(), phi,
                                      {1, 2}),
                    config_error);
}
