#pragma once

#include "branchlab/test_function.hpp"

// closed-form and semi-analytic reference values used by the test suites and
// the self-check command. everything here is independent of the simulator and
// the pde solver: compositions of exact per-unit maps, ode solutions in closed
// form, and plain quadrature.
namespace branchlab::oracles {

// solution of dw/dtau = -gamma w^2 / 2 run backwards from terminal data theta,
// evaluated at time-to-go tau
double riccati_w(double theta, double gamma, double tau);

// E[exp(-theta * Z_T)] for the continuous-mass critical branching limit
// started from mass0
double feller_laplace(double theta, double gamma, double T, double mass0);

// P(Z_T = 0) for the same limit process
double feller_extinction_prob(double gamma, double T, double mass0);

// heat evolution exp(tau * sigma^2/2 * d^2/dx^2) applied to
// height * exp(-(x - center)^2 / scale^2), in closed form
double heat_gaussian(double height, double center, double scale, double sigma, double tau,
                     double x);

// same evolution applied to an arbitrary bounded h by gaussian quadrature
double heat_convolution(const TestFunction& h, double sigma, double tau, double x);

// E[exp(-theta * M_k)] under the discrete update itself: per step each unit
// dies w.p. q/2, splits w.p. q/2, survives otherwise, q = 1 - exp(-level *
// gamma * dt); M_k = units / level. exact composition of the per-unit
// generating map, no sampling.
double scheme_laplace(int level, double gamma, double dt, int steps, double theta,
                      long long units0);

// exact Var(M_k) under the same update, initial mass mass0 (level*mass0 units)
double scheme_mass_variance(int level, double gamma, double dt, double T, double mass0);

// exact ratio E[sum dM^2] / E[int (F')^2 gamma phi^2 dmu dt] for the
// continuous-time model with F(y) = y^2, phi = 1, no motion: the predictable
// bracket carries an extra gamma*m/level^2 from the squared jump size, so the
// ratio exceeds 1 at small level and tends to 1 as level grows
double qv_ratio_quadratic(int level, double gamma, double T, double mass0);

}  // namespace branchlab::oracles
