#pragma once
// Finite-difference solver for the one-dimensional terminal-value problem
//   -dw/dt - sup_a { b(x,a) w_x + 0.5 sigma^2(x,a) w_xx - 0.5 gamma(x,a) w^2 } = 0,
//   w(T, x) = h(x),
// the finite-dimensional reduction of the exponential-terminal control
// problem; the measure-space value is v(t, lambda) = exp(-<w(t,.), lambda>).
//
// Scheme: explicit Heun (two-stage) time stepping backward from T, monotone
// spatial operators (first derivative upwinded by the sign of b, centered
// second derivative), exhaustive sup over the finite control set, reflecting
// or clamped ghost nodes. The CFL bound dt*(sigma_max^2/dx^2 + |b|_max/dx)
// <= 1/2 is validated at construction.

#include <cstdint>
#include <string>
#include <vector>

#include "branchlab/measure.hpp"
#include "branchlab/model.hpp"
#include "branchlab/test_function.hpp"
#include "branchlab/util.hpp"

namespace branchlab {

struct GridSpec {
    double x_min = -1.0, x_max = 1.0;
    int nx = 101;
    double t0 = 0.0, T = 1.0;
    int nt = 1000;  // number of time steps; nt+1 stored layers
    enum class Boundary { reflecting, clamped } boundary = Boundary::reflecting;

    double dx() const { return (x_max - x_min) / static_cast<double>(nx - 1); }
    double dt() const { return (T - t0) / static_cast<double>(nt); }
    double x(int i) const { return x_min + dx() * static_cast<double>(i); }
    double t(int j) const { return t0 + dt() * static_cast<double>(j); }
    void validate() const;
};

struct ValueSurface {
    GridSpec grid;
    std::vector<double> w;         // (nt+1) * nx, row-major in time
    std::vector<uint16_t> policy;  // argmax control index per node
    std::vector<Vec> controls;
    double cfl = 0.0;

    double at(int j, int i) const { return w[static_cast<size_t>(j) * grid.nx + i]; }
    uint16_t policy_at(int j, int i) const {
        return policy[static_cast<size_t>(j) * grid.nx + i];
    }
    int nearest_time_node(double t) const;
    // linear interpolation of w(t_j, .) at x; throws domain_error off-grid
    double interp(int j, double x) const;
};

// requires measure-free coefficients (no feature functions) and dim == 1
ValueSurface solve_w(const GridSpec& grid, const Coefficients& coeffs, const ControlSet& controls,
                     const TestFunction& h);

// test view: solves the exponentially rescaled unknown (the substitution
// w~(t,x) = exp(-t) w(t,x), which adds a linear reaction term and an
// exp(t)-scaled quadratic term) and maps back; must agree with solve_w to
// scheme accuracy
ValueSurface solve_w_transformed(const GridSpec& grid, const Coefficients& coeffs,
                                 const ControlSet& controls, const TestFunction& h);

// max over interior nodes of the PDE left-hand side with a centered time
// difference and the scheme's spatial operators
double residual_max(const ValueSurface& surface, const Coefficients& coeffs,
                    const ControlSet& controls);

// nearest-node lookup in time; in space, linear interpolation of the argmax
// control values followed by projection onto the nearest control point
FeedbackPolicy extract_policy(const ValueSurface& surface);

// v(t, lambda) = exp(-<w(t,.), lambda>); nearest time node (warns via return
// flag when |t - t_j| > dt/2), throws domain_error for atoms off the grid
double value_of_measure(const ValueSurface& surface, double t, const AtomicMeasure& lambda);

}  // namespace branchlab
