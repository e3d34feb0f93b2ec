#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "branchlab/hjb.hpp"
#include "branchlab/oracles.hpp"

using namespace branchlab;

namespace {

ControlSet singleton_control() { return ControlSet{1, {{0.0}}}; }

}  // namespace

TEST_CASE("grid validation") {
    GridSpec g;
    g.nx = 1;
    CHECK_THROWS_AS(g.validate(), config_error);
    g = GridSpec{};
    g.T = g.t0;
    CHECK_THROWS_AS(g.validate(), config_error);
    g = GridSpec{};
    g.x_max = g.x_min;
    CHECK_THROWS_AS(g.validate(), config_error);
}

TEST_CASE("pure reaction solve reproduces the riccati solution") {
    GridSpec grid;
    grid.x_min = -1.0;
    grid.x_max = 1.0;
    grid.nx = 21;
    grid.t0 = 0.0;
    grid.T = 1.0;
    grid.nt = 2000;
    Coefficients coeffs = make_coefficients_const(1, 1, 1, {0.0}, 0.0, 1.0);
    ControlSet controls = singleton_control();
    ValueSurface s = solve_w(grid, coeffs, controls, tf_constant(1, 1.0));
    double err = 0.0;
    for (int j = 0; j <= grid.nt; ++j) {
        double exact = oracles::riccati_w(1.0, 1.0, grid.T - grid.t(j));
        for (int i = 0; i < grid.nx; ++i)
            err = std::max(err, std::abs(s.at(j, i) - exact));
    }
    CHECK(err <= 1e-6);
    CHECK(residual_max(s, coeffs, controls) <= 1e-6);
    CHECK(s.at(0, 10) == doctest::Approx(2.0 / 3.0).epsilon(1e-7));
}

TEST_CASE("rescaled solve agrees with the plain solve") {
    GridSpec grid;
    grid.nx = 41;
    grid.nt = 400;
    grid.x_min = -2.0;
    grid.x_max = 2.0;
    Coefficients coeffs = make_coefficients_const(1, 1, 1, {0.3}, 0.6, 1.0);
    ControlSet controls = singleton_control();
    TestFunction h = tf_gaussian(1, {0.0}, 1.0);
    ValueSurface a = solve_w(grid, coeffs, controls, h);
    ValueSurface b = solve_w_transformed(grid, coeffs, controls, h);
    double diff = 0.0;
    for (size_t k = 0; k < a.w.size(); ++k) diff = std::max(diff, std::abs(a.w[k] - b.w[k]));
    CHECK(diff <= 1e-5);
}

TEST_CASE("cfl violations are rejected") {
    GridSpec grid;
    grid.nx = 201;  // dx = 0.01
    grid.nt = 100;  // dt = 0.01 -> dt*sigma^2/dx^2 = 200
    Coefficients coeffs = make_coefficients_const(1, 1, 1, {0.0}, std::sqrt(2.0), 0.0);
    CHECK_THROWS_AS(solve_w(grid, coeffs, singleton_control(), tf_constant(1, 1.0)),
                    config_error);
}

TEST_CASE("zero reaction with diffusion matches the heat kernel") {
    GridSpec grid;
    grid.x_min = -10.0;
    grid.x_max = 10.0;
    grid.nx = 201;  // dx = 0.1
    grid.t0 = 0.0;
    grid.T = 0.5;
    grid.nt = 500;  // dt = 1e-3, cfl = 2e-3/1e-2 = 0.2
    Coefficients coeffs = make_coefficients_const(1, 1, 1, {0.0}, std::sqrt(2.0), 0.0);
    TestFunction h = tf_gaussian(1, {0.0}, std::sqrt(2.0));
    ValueSurface s = solve_w(grid, coeffs, singleton_control(), h);
    double err = 0.0;
    for (int i = 0; i < grid.nx; ++i) {
        if (std::abs(grid.x(i)) > 5.0) continue;
        double exact = oracles::heat_gaussian(1.0, 0.0, std::sqrt(2.0), std::sqrt(2.0),
                                              grid.T, grid.x(i));
        err = std::max(err, std::abs(s.at(0, i) - exact));
    }
    CHECK(err <= 5e-3);
    // closed form and quadrature oracle agree with each other
    CHECK(oracles::heat_gaussian(1.0, 0.0, std::sqrt(2.0), std::sqrt(2.0), 0.5, 1.0) ==
          doctest::Approx(oracles::heat_convolution(h, std::sqrt(2.0), 0.5, 1.0)).epsilon(1e-9));
}

TEST_CASE("controlled drift points toward the terminal bump") {
    GridSpec grid;
    grid.x_min = -4.0;
    grid.x_max = 4.0;
    grid.nx = 81;
    grid.T = 0.5;
    grid.nt = 200;
    ControlSet controls{1, {{-1.0}, {1.0}}};
    Coefficients coeffs = make_coefficients(1, 1, 1, "action", "constant 0.4", "constant 0.2",
                                            {}, &controls);
    TestFunction h = tf_gaussian(1, {1.0}, 1.0);
    ValueSurface s = solve_w(grid, coeffs, controls, h);
    // w inherits the bump at x = 1; pushing mass toward it raises <w, mu>
    CHECK(s.policy_at(0, 20) == 1);  // x = -2, go right
    CHECK(s.policy_at(0, 70) == 0);  // x = 3, go left
    FeedbackPolicy pol = extract_policy(s);
    double x = -2.0, feat = 0.0, a = 0.0;
    pol.action(0.0, &x, &feat, &a);
    CHECK(a == doctest::Approx(1.0));
    x = 3.0;
    pol.action(0.0, &x, &feat, &a);
    CHECK(a == doctest::Approx(-1.0));
}

TEST_CASE("surface lookup helpers") {
    GridSpec grid;
    grid.nx = 11;
    grid.nt = 1000;
    Coefficients coeffs = make_coefficients_const(1, 1, 1, {0.0}, 0.0, 1.0);
    ValueSurface s = solve_w(grid, coeffs, singleton_control(), tf_constant(1, 1.0));
    CHECK(s.nearest_time_node(0.0) == 0);
    CHECK(s.nearest_time_node(1.0) == 1000);
    CHECK(s.nearest_time_node(0.5004) == 500);
    CHECK(s.interp(0, 0.05) == doctest::Approx(2.0 / 3.0).epsilon(1e-6));
    CHECK_THROWS_AS(s.interp(0, 1.5), domain_error);

    AtomicMeasure mu(1, 10, {0.0}, {10});  // delta_0 of mass 1 at level 10
    CHECK(value_of_measure(s, 0.0, mu) == doctest::Approx(std::exp(-2.0 / 3.0)).epsilon(1e-6));
    AtomicMeasure off(1, 1, {7.0}, {1});
    CHECK_THROWS_AS(value_of_measure(s, 0.0, off), domain_error);
}
