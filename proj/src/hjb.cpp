#include "branchlab/hjb.hpp"

#include <algorithm>
#include <cmath>

namespace branchlab {

void GridSpec::validate() const {
    if (nx < 3) throw config_error("grid: nx must be >= 3");
    if (nt < 1) throw config_error("grid: nt must be >= 1");
    if (!(x_max > x_min)) throw config_error("grid: x_max must exceed x_min");
    if (!(T > t0)) throw config_error("grid: T must exceed t0");
}

int ValueSurface::nearest_time_node(double t) const {
    double j = (t - grid.t0) / grid.dt();
    long long jj = std::llround(j);
    return static_cast<int>(std::clamp<long long>(jj, 0, grid.nt));
}

double ValueSurface::interp(int j, double x) const {
    const double dx = grid.dx();
    if (x < grid.x_min - 1e-12 || x > grid.x_max + 1e-12)
        throw domain_error("value surface: point " + format_double(x) + " outside the grid");
    double s = (x - grid.x_min) / dx;
    int i = std::clamp(static_cast<int>(std::floor(s)), 0, grid.nx - 2);
    double frac = std::clamp(s - static_cast<double>(i), 0.0, 1.0);
    return (1.0 - frac) * at(j, i) + frac * at(j, i + 1);
}

namespace {

// per-control tables of b, sigma^2, gamma over grid nodes; coefficients are
// time-independent so this is computed once
struct CoefTables {
    int nx = 0, nc = 0;
    std::vector<double> b, s2, g;  // [control * nx + node]
    double at_b(int c, int i) const { return b[static_cast<size_t>(c) * nx + i]; }
    double at_s2(int c, int i) const { return s2[static_cast<size_t>(c) * nx + i]; }
    double at_g(int c, int i) const { return g[static_cast<size_t>(c) * nx + i]; }
};

CoefTables build_tables(const GridSpec& grid, const Coefficients& coeffs,
                        const ControlSet& controls) {
    if (coeffs.dim != 1 || coeffs.noise_dim != 1)
        throw config_error("hjb: solver requires dim == noise_dim == 1");
    if (!coeffs.feature_functions.empty())
        throw config_error("hjb: solver requires measure-free coefficients");
    if (controls.size() < 1) throw config_error("hjb: control set is empty");
    CoefTables t;
    t.nx = grid.nx;
    t.nc = controls.size();
    t.b.resize(static_cast<size_t>(t.nc) * t.nx);
    t.s2.resize(static_cast<size_t>(t.nc) * t.nx);
    t.g.resize(static_cast<size_t>(t.nc) * t.nx);
    const double* feat = nullptr;
    for (int c = 0; c < t.nc; ++c) {
        const double* a = controls.points[static_cast<size_t>(c)].data();
        for (int i = 0; i < t.nx; ++i) {
            double x = grid.x(i);
            double bv, sv;
            coeffs.b(&x, feat, a, &bv);
            coeffs.sigma(&x, feat, a, &sv);
            t.b[static_cast<size_t>(c) * t.nx + i] = bv;
            t.s2[static_cast<size_t>(c) * t.nx + i] = sv * sv;
            t.g[static_cast<size_t>(c) * t.nx + i] = coeffs.gamma(&x, feat, a);
        }
    }
    return t;
}

// ghost-node values implementing the boundary condition
inline double ghost_left(const double* w, GridSpec::Boundary bc) {
    return bc == GridSpec::Boundary::reflecting ? w[1] : w[0];
}
inline double ghost_right(const double* w, int nx, GridSpec::Boundary bc) {
    return bc == GridSpec::Boundary::reflecting ? w[nx - 2] : w[nx - 1];
}

// sup over controls of the spatial Hamiltonian at node i for layer w;
// records the argmax index if policy_out is given (ties -> lowest index).
// reaction_scale multiplies the quadratic sink (1 for the plain equation,
// exp(t) for the rescaled test view); linear_reaction adds -w[i] (rescaled
// view only).
inline double ham_sup(const double* w, int i, int nx, double dx, const CoefTables& tab,
                      GridSpec::Boundary bc, double reaction_scale, uint16_t* policy_out) {
    const double wl = i > 0 ? w[i - 1] : ghost_left(w, bc);
    const double wr = i < nx - 1 ? w[i + 1] : ghost_right(w, nx, bc);
    const double wi = w[i];
    const double second = (wr - 2.0 * wi + wl) / (dx * dx);
    const double fwd = (wr - wi) / dx;
    const double bwd = (wi - wl) / dx;
    double best = -std::numeric_limits<double>::infinity();
    uint16_t best_c = 0;
    for (int c = 0; c < tab.nc; ++c) {
        const double b = tab.at_b(c, i);
        const double first = b >= 0.0 ? fwd : bwd;
        const double v = b * first + 0.5 * tab.at_s2(c, i) * second -
                         0.5 * reaction_scale * tab.at_g(c, i) * wi * wi;
        if (v > best) {
            best = v;
            best_c = static_cast<uint16_t>(c);
        }
    }
    if (policy_out) *policy_out = best_c;
    return best;
}

ValueSurface solve_impl(const GridSpec& grid, const Coefficients& coeffs,
                        const ControlSet& controls, const TestFunction& h, bool rescaled) {
    grid.validate();
    const CoefTables tab = build_tables(grid, coeffs, controls);
    const int nx = grid.nx;
    const double dx = grid.dx();
    const double dt = grid.dt();

    ValueSurface out;
    out.grid = grid;
    out.controls = controls.points;
    out.cfl = dt * (coeffs.bound_sigma * coeffs.bound_sigma / (dx * dx) + coeffs.bound_b / dx);
    if (out.cfl > 0.5 + 1e-12)
        throw config_error("hjb: CFL number " + format_double(out.cfl) +
                           " exceeds 1/2; refine nt or coarsen nx");

    out.w.assign(static_cast<size_t>(grid.nt + 1) * nx, 0.0);
    out.policy.assign(out.w.size(), 0);

    // terminal layer: w(T, x) = h(x) (rescaled view stores exp(-T) h)
    {
        double* wT = out.w.data() + static_cast<size_t>(grid.nt) * nx;
        const double scale = rescaled ? std::exp(-grid.T) : 1.0;
        for (int i = 0; i < nx; ++i) {
            double x = grid.x(i);
            wT[i] = scale * h.value(&x);
        }
    }

    std::vector<double> stage(static_cast<size_t>(nx)), k1(static_cast<size_t>(nx));
    for (int j = grid.nt - 1; j >= 0; --j) {
        const double* wn = out.w.data() + static_cast<size_t>(j + 1) * nx;  // layer at t_{j+1}
        double* wj = out.w.data() + static_cast<size_t>(j) * nx;
        const double t_next = grid.t(j + 1);
        const double t_this = grid.t(j);
        // backward marching: w(t_j) = w(t_{j+1}) + dt * rhs, two-stage Heun
        const double scale_next = rescaled ? std::exp(t_next) : 1.0;
        const double scale_this = rescaled ? std::exp(t_this) : 1.0;
        for (int i = 0; i < nx; ++i) {
            k1[i] = ham_sup(wn, i, nx, dx, tab, grid.boundary, scale_next, nullptr) +
                    (rescaled ? wn[i] : 0.0);
            stage[i] = wn[i] + dt * k1[i];
        }
        for (int i = 0; i < nx; ++i) {
            const double k2 = ham_sup(stage.data(), i, nx, dx, tab, grid.boundary, scale_this,
                                      nullptr) +
                              (rescaled ? stage[i] : 0.0);
            wj[i] = wn[i] + 0.5 * dt * (k1[i] + k2);
        }
    }

    if (rescaled) {  // map back to the original unknown
        for (int j = 0; j <= grid.nt; ++j) {
            const double scale = std::exp(grid.t(j));
            double* wj = out.w.data() + static_cast<size_t>(j) * nx;
            for (int i = 0; i < nx; ++i) wj[i] *= scale;
        }
    }

    // nonnegativity sanity: the terminal data is nonnegative and the scheme is
    // monotone, so a visible undershoot indicates a configuration error
    for (double v : out.w)
        if (v < -1e-10)
            throw config_error("hjb: negative solution value " + format_double(v) +
                               "; check grid and coefficient bounds");

    // policy post-pass on the solved surface, so the recorded index provably
    // attains the nodewise sup when re-evaluated
    for (int j = 0; j <= grid.nt; ++j) {
        const double* wj = out.w.data() + static_cast<size_t>(j) * nx;
        uint16_t* pj = out.policy.data() + static_cast<size_t>(j) * nx;
        for (int i = 0; i < nx; ++i)
            ham_sup(wj, i, nx, dx, tab, grid.boundary, 1.0, pj + i);
    }
    return out;
}

}  // namespace

ValueSurface solve_w(const GridSpec& grid, const Coefficients& coeffs, const ControlSet& controls,
                     const TestFunction& h) {
    return solve_impl(grid, coeffs, controls, h, false);
}

ValueSurface solve_w_transformed(const GridSpec& grid, const Coefficients& coeffs,
                                 const ControlSet& controls, const TestFunction& h) {
    return solve_impl(grid, coeffs, controls, h, true);
}

double residual_max(const ValueSurface& surface, const Coefficients& coeffs,
                    const ControlSet& controls) {
    const GridSpec& grid = surface.grid;
    const CoefTables tab = build_tables(grid, coeffs, controls);
    const int nx = grid.nx;
    const double dx = grid.dx();
    const double dt = grid.dt();
    double worst = 0.0;
    for (int j = 1; j < grid.nt; ++j) {
        const double* wp = surface.w.data() + static_cast<size_t>(j - 1) * nx;
        const double* wj = surface.w.data() + static_cast<size_t>(j) * nx;
        const double* wn = surface.w.data() + static_cast<size_t>(j + 1) * nx;
        for (int i = 1; i < nx - 1; ++i) {
            const double dwdt = (wn[i] - wp[i]) / (2.0 * dt);
            const double r = -dwdt - ham_sup(wj, i, nx, dx, tab, grid.boundary, 1.0, nullptr);
            worst = std::max(worst, std::abs(r));
        }
    }
    return worst;
}

FeedbackPolicy extract_policy(const ValueSurface& surface) {
    if (surface.controls.empty()) throw config_error("extract_policy: surface has no controls");
    const int adim = static_cast<int>(surface.controls.front().size());
    FeedbackPolicy p;
    p.name = "hjb-argmax";
    p.action_dim = adim;
    if (surface.controls.size() == 1) {
        p.const_action = surface.controls.front();
    } else {
        // constant-policy fast path when every node agrees
        bool all_same = true;
        for (uint16_t idx : surface.policy)
            if (idx != surface.policy.front()) {
                all_same = false;
                break;
            }
        if (all_same) p.const_action = surface.controls[surface.policy.front()];
    }
    ValueSurface s = surface;  // the closure owns a copy of the table
    p.action = [s, adim](double t, const double* x, const double*, double* out) {
        const GridSpec& g = s.grid;
        const int j = s.nearest_time_node(t);
        const double dx = g.dx();
        double pos = (std::clamp(x[0], g.x_min, g.x_max) - g.x_min) / dx;
        int i = std::clamp(static_cast<int>(std::floor(pos)), 0, g.nx - 2);
        double frac = std::clamp(pos - static_cast<double>(i), 0.0, 1.0);
        const Vec& a0 = s.controls[s.policy_at(j, i)];
        const Vec& a1 = s.controls[s.policy_at(j, i + 1)];
        // interpolate the control values, then project to the nearest point
        double best = std::numeric_limits<double>::infinity();
        size_t best_c = 0;
        for (size_t c = 0; c < s.controls.size(); ++c) {
            double d2 = 0.0;
            for (int k = 0; k < adim; ++k) {
                double target = (1.0 - frac) * a0[static_cast<size_t>(k)] +
                                frac * a1[static_cast<size_t>(k)];
                double diff = s.controls[c][static_cast<size_t>(k)] - target;
                d2 += diff * diff;
            }
            if (d2 < best) {
                best = d2;
                best_c = c;
            }
        }
        for (int k = 0; k < adim; ++k) out[k] = s.controls[best_c][static_cast<size_t>(k)];
    };
    return p;
}

double value_of_measure(const ValueSurface& surface, double t, const AtomicMeasure& lambda) {
    if (lambda.dim != 1) throw config_error("value_of_measure: requires dim == 1");
    const int j = surface.nearest_time_node(t);
    KahanSum s;
    for (int i = 0; i < lambda.atom_count(); ++i)
        s.add(static_cast<double>(lambda.mult[i]) * surface.interp(j, lambda.atom(i)[0]));
    return std::exp(-s.value() / static_cast<double>(lambda.level));
}

}  // namespace branchlab
