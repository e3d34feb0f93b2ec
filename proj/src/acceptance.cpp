#include "branchlab/acceptance.hpp"

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

#include "branchlab/config.hpp"
#include "branchlab/generators.hpp"
#include "branchlab/io.hpp"
#include "branchlab/mc.hpp"
#include "branchlab/oracles.hpp"

namespace branchlab {

namespace {

// frozen scheme-bias constant: the exact thinned-branching composition differs
// from the continuous-limit laplace values by less than kappa/level at every
// level used below (audited against oracles::scheme_laplace in the unit tests)
constexpr double kKappa = 0.25;

std::string fmt(const char* f, ...) {
    char buf[512];
    va_list ap;
    va_start(ap, f);
    vsnprintf(buf, sizeof buf, f, ap);
    va_end(ap);
    return buf;
}

AtomicMeasure delta0(long long level, double mass = 1.0) {
    return AtomicMeasure(1, level, {0.0}, {std::llround(mass * static_cast<double>(level))});
}

SimConfig base_sim(const AcceptanceOptions& opts, int criterion, long long level,
                   long long replicates, double horizon = 1.0, double dt = 1e-3) {
    SimConfig cfg;
    cfg.level = level;
    cfg.horizon = horizon;
    cfg.dt = dt;
    cfg.replicates = replicates;
    // decorrelate the criteria while staying a pure function of the master seed
    cfg.seed = opts.seed + 1000003ull * static_cast<uint64_t>(criterion);
    cfg.workers = opts.workers;
    return cfg;
}

// deterministic parameter stream for the randomized calculus trials
struct Det {
    uint64_t s, c = 0;
    explicit Det(uint64_t seed) : s(seed) {}
    double u() { return ((mix64(s ^ ++c) >> 11) + 0.5) * 0x1p-53; }
    double in(double lo, double hi) { return lo + (hi - lo) * u(); }
};

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw config_error("cannot read '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

}  // namespace

bool all_pass(const std::vector<CriterionResult>& results) {
    for (const auto& r : results)
        if (!r.pass) return false;
    return !results.empty();
}

std::vector<std::string> run_selftest(const std::string& out_dir, uint64_t seed) {
    std::filesystem::create_directories(out_dir);
    const auto path = [&](const char* name) { return out_dir + "/" + name; };

    // short branching-diffusion run with per-step records
    Coefficients coeffs = make_coefficients_const(1, 1, 1, {0.0}, 1.0, 1.0);
    SimConfig cfg;
    cfg.level = 10;
    cfg.horizon = 0.5;
    cfg.dt = 0.01;
    cfg.replicates = 5;
    cfg.seed = seed;
    RecordSpec rec;
    rec.per_step = true;
    rec.pairings = {tf_gaussian(1, {0.0}, 1.0)};
    auto records = simulate_batch(cfg, coeffs, constant_policy({0.0}), delta0(10), rec);
    {
        std::ofstream os(path("trajectories.csv"), std::ios::binary);
        write_trajectories_csv(os, records);
    }

    // small ode-reducible pde solve plus its closed-form error
    GridSpec grid{-1.0, 1.0, 11, 0.0, 1.0, 200, GridSpec::Boundary::reflecting};
    Coefficients pde_coeffs = make_coefficients_const(1, 1, 1, {0.0}, 0.0, 1.0);
    ControlSet controls{1, {{0.0}}};
    ValueSurface surface = solve_w(grid, pde_coeffs, controls, tf_constant(1, 1.0));
    {
        std::ofstream os(path("hjb_slice.csv"), std::ios::binary);
        write_surface_slice_csv(os, surface, 0.0);
    }
    double pde_err = 0.0;
    for (int j = 0; j <= grid.nt; ++j)
        for (int i = 0; i < grid.nx; ++i)
            pde_err = std::max(pde_err, std::abs(surface.at(j, i) -
                                                 oracles::riccati_w(1.0, 1.0, grid.T - grid.t(j))));

    // measure discretization round-trip artifact
    MeasureSpec uspec;
    uspec.kind = MeasureSpec::Kind::uniform;
    uspec.lo = 0.0;
    uspec.hi = 1.0;
    uspec.mass = 1.0;
    AtomicMeasure mu = discretize(uspec, 16);
    {
        std::ofstream os(path("measure.csv"), std::ios::binary);
        write_measure_csv(os, mu);
    }

    std::vector<double> masses;
    for (const auto& r : records) masses.push_back(r.final_measure.total_mass());
    nlohmann::json summary = {
        {"meta", run_meta(hex64(fnv1a64("selftest")))},
        {"riccati_sup_error", pde_err},
        {"feller_laplace_oracle", oracles::feller_laplace(1.0, 1.0, 1.0, 1.0)},
        {"terminal_mass_mean", summarize(masses).mean},
    };
    write_json_file(path("summary.json"), summary);
    return {"trajectories.csv", "hjb_slice.csv", "measure.csv"};
}

std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& opts) {
    namespace ch = std::chrono;
    std::filesystem::create_directories(opts.out_dir);
    std::vector<CriterionResult> results;

    auto timed = [&](int idx, const std::string& name, auto&& body) {
        CriterionResult r;
        r.index = idx;
        r.name = name;
        const auto t0 = ch::steady_clock::now();
        try {
            body(r);
        } catch (const std::exception& e) {
            r.pass = false;
            r.detail = std::string("error: ") + e.what();
        }
        r.seconds = ch::duration<double>(ch::steady_clock::now() - t0).count();
        if (opts.log)
            (*opts.log) << fmt("%s %2d %-22s %s  [%.1fs]", r.pass ? "PASS" : "FAIL", r.index,
                               r.name.c_str(), r.detail.c_str(), r.seconds)
                        << std::endl;
        results.push_back(std::move(r));
    };

    // ---- 1 & 2: critical mass martingale and its variance --------------------
    // shared runs: levels {1, 10, 50}, gamma = 1, no motion, delta_0 mass 1,
    // horizon 1, dt 1e-3, 1e4 replicates
    const std::vector<long long> mass_levels = {1, 10, 50};
    std::vector<std::vector<double>> mass_samples;

    timed(1, "mass-criticality", [&](CriterionResult& r) {
        Coefficients coeffs = make_coefficients_const(1, 1, 1, {0.0}, 0.0, 1.0);
        RecordSpec rec;
        rec.per_step = false;
        rec.mass = false;
        for (long long level : mass_levels) {
            SimConfig cfg = base_sim(opts, 1, level, 10000);
            auto records = simulate_batch(cfg, coeffs, constant_policy({0.0}), delta0(level), rec);
            std::vector<double> xs;
            xs.reserve(records.size());
            for (const auto& rec2 : records)
                if (!rec2.censored) xs.push_back(rec2.final_measure.total_mass());
            mass_samples.push_back(std::move(xs));
        }
        r.pass = true;
        std::string d;
        for (size_t i = 0; i < mass_levels.size(); ++i) {
            Estimate e = summarize(mass_samples[i]);
            const double z = e.std_error > 0.0 ? (e.mean - 1.0) / e.std_error : 0.0;
            r.pass = r.pass && std::abs(e.mean - 1.0) <= e.half_width();
            d += fmt("%sn=%lld mean %.4f z %+0.2f", i ? "; " : "", mass_levels[i], e.mean, z);
        }
        r.detail = d;
    });

    timed(2, "mass-variance", [&](CriterionResult& r) {
        r.pass = true;
        std::string d;
        for (size_t i = 0; i < mass_levels.size(); ++i) {
            VarianceEstimate v = summarize_variance(mass_samples[i]);
            const bool ok =
                std::abs(v.variance - 1.0) <= 0.05 || std::abs(v.variance - 1.0) <= 3.0 * v.std_error;
            r.pass = r.pass && ok;
            d += fmt("%sn=%lld var %.4f se %.4f", i ? "; " : "", mass_levels[i], v.variance,
                     v.std_error);
        }
        r.detail = d + " (target 1 within 5% or 3se)";
    });

    // ---- 3: laplace functional against the continuous-limit oracle -----------
    timed(3, "laplace-functional", [&](CriterionResult& r) {
        Coefficients coeffs = make_coefficients_const(1, 1, 1, {0.0}, 0.0, 1.0);
        CostSpec cost = zero_running_exp_terminal(tf_constant(1, 1.0), 1.0);
        SimConfig cfg = base_sim(opts, 3, 50, 20000);
        Estimate e = evaluate_cost(cfg, coeffs, cost, constant_policy({0.0}), delta0(50));
        const double target = oracles::feller_laplace(1.0, 1.0, 1.0, 1.0);
        const double tol = e.half_width() + kKappa / 50.0;
        r.pass = std::abs(e.mean - target) <= tol;
        r.detail = fmt("mean %.5f se %.5f target %.5f tol %.5f", e.mean, e.std_error, target, tol);
    });

    // ---- 4: pde solver vs the ode-reducible closed form ----------------------
    ValueSurface riccati_surface;  // reused by criterion 8
    Coefficients riccati_coeffs = make_coefficients_const(1, 1, 1, {0.0}, 0.0, 1.0);
    ControlSet riccati_controls{1, {{0.0}}};
    timed(4, "hjb-riccati", [&](CriterionResult& r) {
        GridSpec grid{-1.0, 1.0, 21, 0.0, 1.0, 10000, GridSpec::Boundary::reflecting};
        riccati_surface = solve_w(grid, riccati_coeffs, riccati_controls, tf_constant(1, 1.0));
        double err = 0.0;
        for (int j = 0; j <= grid.nt; ++j) {
            const double w_exact = oracles::riccati_w(1.0, 1.0, grid.T - grid.t(j));
            for (int i = 0; i < grid.nx; ++i)
                err = std::max(err, std::abs(riccati_surface.at(j, i) - w_exact));
        }
        const double res = residual_max(riccati_surface, riccati_coeffs, riccati_controls);
        r.pass = err <= 1e-6 && res <= 1e-6;
        r.detail = fmt("sup error %.2e residual %.2e (tol 1e-6)", err, res);
    });

    // ---- 5: pde solver vs the heat-kernel closed form -------------------------
    timed(5, "hjb-heat", [&](CriterionResult& r) {
        const double T = 0.5, sigma = std::sqrt(2.0), scale = std::sqrt(2.0);
        Coefficients coeffs = make_coefficients_const(1, 1, 1, {0.0}, sigma, 0.0);
        ControlSet controls{1, {{0.0}}};
        TestFunction h = tf_gaussian(1, {0.0}, scale);  // exp(-x^2/2)
        std::vector<int> rungs = {100, 200, 400};
        std::vector<double> errs;
        for (int nx : rungs) {
            const double dx = 20.0 / (nx - 1);
            const int nt = static_cast<int>(std::ceil(T / (0.25 * dx * dx)));
            GridSpec grid{-10.0, 10.0, nx, 0.0, T, nt, GridSpec::Boundary::reflecting};
            ValueSurface s = solve_w(grid, coeffs, controls, h);
            double err = 0.0;
            for (int j = 0; j <= grid.nt; ++j)
                for (int i = 0; i < nx; ++i) {
                    const double x = grid.x(i);
                    if (std::abs(x) > 5.0 + 1e-9) continue;  // inner half-grid
                    const double exact =
                        oracles::heat_gaussian(1.0, 0.0, scale, sigma, grid.T - grid.t(j), x);
                    err = std::max(err, std::abs(s.at(j, i) - exact));
                }
            errs.push_back(err);
        }
        const double r1 = errs[0] / errs[1], r2 = errs[1] / errs[2];
        r.pass = errs[2] <= 1e-3 && r1 >= 3.0 && r1 <= 5.0 && r2 >= 3.0 && r2 <= 5.0;
        r.detail = fmt("errors %.2e/%.2e/%.2e ratios %.2f %.2f (tol 1e-3, [3,5])", errs[0], errs[1],
                       errs[2], r1, r2);
    });

    // ---- 6: verification, branching control ----------------------------------
    timed(6, "verify-branch-ctrl", [&](CriterionResult& r) {
        ControlSet controls{1, {{0.5}, {2.0}}};
        Coefficients coeffs =
            make_coefficients(1, 1, 1, "constant 0", "constant 0", "action", {}, &controls);
        GridSpec grid{-1.0, 1.0, 21, 0.0, 1.0, 2000, GridSpec::Boundary::reflecting};
        TestFunction h = tf_constant(1, 1.0);
        ValueSurface surface = solve_w(grid, coeffs, controls, h);
        bool policy_low = true;
        for (uint16_t p : surface.policy) policy_low = policy_low && p == 0;

        SimConfig cfg = base_sim(opts, 6, 50, 20000);
        CostSpec cost = zero_running_exp_terminal(h, 1.0);
        VerifyReport rep =
            verify_optimality(surface, cfg, coeffs, cost, delta0(50),
                              {{"constant 2", constant_policy({2.0})}}, kKappa);
        const double j_opt_oracle = std::exp(-1.0 / 1.25);
        const double gap_oracle = std::exp(-0.5) - j_opt_oracle;
        const Estimate& ja = rep.j_candidate;
        const Estimate& j2 = rep.alternatives.at(0).j;
        const double gap = j2.mean - ja.mean;
        const double se_gap = std::sqrt(ja.std_error * ja.std_error + j2.std_error * j2.std_error);
        const bool gap_ok = gap > 0.0 && gap >= gap_oracle - 6.0 * se_gap;
        r.pass = policy_low && rep.candidate_ok && rep.pass && gap_ok;
        r.detail = fmt("policy0.5 %s; J* %.5f (oracle %.5f tol %.5f); gap %.4f >= %.4f", policy_low ? "all" : "NOT all",
                       ja.mean, j_opt_oracle, rep.tolerance, gap, gap_oracle - 6.0 * se_gap);
    });

    // ---- 7: verification, drift control ---------------------------------------
    timed(7, "verify-drift-ctrl", [&](CriterionResult& r) {
        ControlSet controls{1, {{-1.0}, {1.0}}};
        Coefficients coeffs =
            make_coefficients(1, 1, 1, "action", "constant 0.5", "constant 0.2", {}, &controls);
        GridSpec grid{-6.0, 6.0, 241, 0.0, 1.0, 256, GridSpec::Boundary::reflecting};
        TestFunction h = tf_gaussian(1, {1.0}, 0.8);
        ValueSurface surface = solve_w(grid, coeffs, controls, h);
        CostSpec cost = zero_running_exp_terminal(h, 1.0);
        SimConfig cfg = base_sim(opts, 7, 20, 10000);
        Estimate ja = evaluate_cost(cfg, coeffs, cost, extract_policy(surface), delta0(20));
        Estimate jm = evaluate_cost(cfg, coeffs, cost, constant_policy({-1.0}), delta0(20));
        const double se = std::sqrt(ja.std_error * ja.std_error + jm.std_error * jm.std_error);
        r.pass = ja.mean <= jm.mean - 3.0 * se;
        r.detail = fmt("J(policy) %.5f J(const -1) %.5f margin %.5f >= %.5f", ja.mean, jm.mean,
                       jm.mean - ja.mean, 3.0 * se);
    });

    // ---- 8: dynamic-programming consistency at the midpoint -------------------
    timed(8, "dpp-midpoint", [&](CriterionResult& r) {
        if (riccati_surface.w.empty()) throw config_error("criterion 4 surface unavailable");
        SimConfig cfg = base_sim(opts, 8, 50, 10000);
        CostSpec cost = zero_running_exp_terminal(tf_constant(1, 1.0), 1.0);
        DppReport rep = dpp_check(riccati_surface, cfg, riccati_coeffs, cost, delta0(50), 0.5, kKappa);
        r.pass = rep.pass;
        r.detail = fmt("E[v(tau,mu)] %.5f v(0) %.5f diff %.5f tol %.5f", rep.continuation.mean,
                       rep.value_start, std::abs(rep.continuation.mean - rep.value_start),
                       rep.tolerance);
    });

    // ---- 9: variance scaling in the level -------------------------------------
    timed(9, "variance-scaling", [&](CriterionResult& r) {
        MeasureSpec init;
        init.kind = MeasureSpec::Kind::atoms;
        init.atom_coords = {0.0};
        init.atom_weights = {1.0};
        TestFunction phi = tf_gaussian(1, {0.0}, 1.0);
        const std::vector<long long> levels = {1, 4, 16, 64};
        SimConfig cfg = base_sim(opts, 9, 1, 20000);

        Coefficients moving = make_coefficients_const(1, 1, 1, {0.0}, 1.0, 1.0);
        ScalingReport main_rep =
            convergence_study(cfg, moving, constant_policy({0.0}), init, phi, levels);
        Coefficients frozen = make_coefficients_const(1, 1, 1, {0.0}, 0.0, 1.0);
        cfg.seed += 7;  // control uses its own stream
        ScalingReport ctrl_rep =
            convergence_study(cfg, frozen, constant_policy({0.0}), init, phi, levels);

        const bool main_ok = main_rep.slope > 0.0 && main_rep.r_squared >= 0.9;
        const bool ctrl_ok = std::abs(ctrl_rep.slope) <= 3.0 * ctrl_rep.slope_se;
        r.pass = main_ok && ctrl_ok;
        r.detail = fmt("c %.4f se %.4f R2 %.3f; control c %.4f se %.4f", main_rep.slope,
                       main_rep.slope_se, main_rep.r_squared, ctrl_rep.slope, ctrl_rep.slope_se);
    });

    // ---- 10: derivative calculus against finite-difference oracles ------------
    timed(10, "derivative-oracles", [&](CriterionResult& r) {
        Det rng(opts.seed ^ 0x9e3779b97f4a7c15ull);
        double max_rel = 0.0;
        for (int trial = 0; trial < 50; ++trial) {
            const int dim = 1 + (trial % 2);
            const int p = 1 + (trial % 3);

            // inner gaussians, duplicated as long-double evaluators
            std::vector<TestFunction> inner;
            std::vector<long double> gh(p), gs(p);
            std::vector<std::vector<long double>> gc(p);
            for (int j = 0; j < p; ++j) {
                const double height = rng.in(0.5, 1.5), scl = rng.in(0.8, 1.6);
                Vec center(dim);
                for (int i = 0; i < dim; ++i) center[i] = rng.in(-1.0, 1.0);
                inner.push_back(tf_gaussian(dim, center, scl, height));
                gh[j] = height;
                gs[j] = scl;
                gc[j].assign(center.begin(), center.end());
            }
            // outer F(y) = c + a.y + y'Qy/2 + alpha exp(-beta.y)
            const double c0 = rng.in(-1.0, 1.0), alpha = rng.in(0.5, 1.5);
            Vec a(p), beta(p);
            Mat Q{p, p, Vec(static_cast<size_t>(p) * p, 0.0)};
            for (int j = 0; j < p; ++j) {
                a[j] = rng.in(-1.0, 1.0);
                beta[j] = rng.in(0.1, 0.5);
                for (int k = j; k < p; ++k) {
                    const double q = rng.in(-0.5, 0.5);
                    Q(j, k) = q;
                    Q(k, j) = q;
                }
            }
            CylindricalFunction u{outer_poly_exp(c0, a, Q, alpha, beta), inner};

            // random rational-mass measure
            const long long level = 1 + static_cast<long long>(rng.in(0.0, 5.0));
            const int na = 1 + static_cast<int>(rng.in(0.0, 4.0));
            std::vector<double> coords;
            std::vector<long long> mult;
            for (int i = 0; i < na; ++i) {
                for (int d = 0; d < dim; ++d) coords.push_back(rng.in(-1.5, 1.5));
                mult.push_back(1 + static_cast<long long>(rng.in(0.0, 3.0)));
            }
            AtomicMeasure lam(dim, level, coords, mult);

            // long-double functional on explicit weighted atoms
            struct LdAtom {
                long double w;
                long double x[2];
            };
            auto u_ld = [&](const std::vector<LdAtom>& atoms) {
                std::vector<long double> pr(p, 0.0L);
                for (int j = 0; j < p; ++j) {
                    long double s = 0.0L;
                    for (const auto& at : atoms) {
                        long double q2 = 0.0L;
                        for (int d = 0; d < dim; ++d) {
                            const long double dd = at.x[d] - gc[j][d];
                            q2 += dd * dd;
                        }
                        s += at.w * gh[j] * expl(-q2 / (gs[j] * gs[j]));
                    }
                    pr[j] = s;
                }
                long double y = c0;
                for (int j = 0; j < p; ++j) y += static_cast<long double>(a[j]) * pr[j];
                for (int j = 0; j < p; ++j)
                    for (int k = 0; k < p; ++k)
                        y += 0.5L * static_cast<long double>(Q(j, k)) * pr[j] * pr[k];
                long double e = 0.0L;
                for (int j = 0; j < p; ++j) e += static_cast<long double>(beta[j]) * pr[j];
                return y + static_cast<long double>(alpha) * expl(-e);
            };
            std::vector<LdAtom> base;
            for (int i = 0; i < lam.atom_count(); ++i) {
                LdAtom at{};
                at.w = static_cast<long double>(lam.mult[i]) / static_cast<long double>(lam.level);
                for (int d = 0; d < dim; ++d) at.x[d] = lam.atom(i)[d];
                base.push_back(at);
            }
            auto with = [&](const std::vector<LdAtom>& atoms, const double* x, long double eps,
                            int shift_axis = -1, long double shift = 0.0L) {
                std::vector<LdAtom> out = atoms;
                LdAtom at{};
                at.w = eps;
                for (int d = 0; d < dim; ++d) at.x[d] = x[d];
                if (shift_axis >= 0) at.x[shift_axis] += shift;
                out.push_back(at);
                return out;
            };

            // evaluation points with a non-degeneracy guard
            double x[2] = {0.0, 0.0}, yy[2] = {0.0, 0.0};
            double dflat = 0.0, dsec = 0.0;
            for (int att = 0; att < 12; ++att) {
                for (int d = 0; d < dim; ++d) {
                    x[d] = rng.in(-1.2, 1.2);
                    yy[d] = rng.in(-1.2, 1.2);
                }
                dflat = flat_derivative(u, lam, x);
                dsec = second_flat_derivative(u, lam, x, yy);
                if (std::abs(dflat) >= 0.02 && std::abs(dsec) >= 0.02) break;
            }

            const long double eps = 1e-6L / static_cast<long double>(level);
            const long double u0 = u_ld(base);
            const long double ux = u_ld(with(base, x, eps));
            const long double uy = u_ld(with(base, yy, eps));
            const long double uxy = u_ld(with(with(base, x, eps), yy, eps));
            const double fd1 = static_cast<double>((ux - u0) / eps);
            const double fd2 = static_cast<double>(((uxy - ux) - (uy - u0)) / (eps * eps));
            max_rel = std::max(max_rel, std::abs(dflat - fd1) / std::max(std::abs(fd1), 0.02));
            max_rel = std::max(max_rel, std::abs(dsec - fd2) / std::max(std::abs(fd2), 0.02));

            double grad[2];
            intrinsic_derivative(u, lam, x, grad);
            const long double hstep = 1e-3L;
            for (int d = 0; d < dim; ++d) {
                const long double up = u_ld(with(base, x, eps, d, hstep));
                const long double dn = u_ld(with(base, x, eps, d, -hstep));
                const double fd = static_cast<double>((up - dn) / (2.0L * hstep * eps));
                max_rel = std::max(max_rel, std::abs(grad[d] - fd) / std::max(std::abs(fd), 0.05));
            }
        }

        // generator identity: the calculus-path generator must reproduce the
        // direct cylindrical formula to rounding
        double max_gen = 0.0;
        for (int trial = 0; trial < 25; ++trial) {
            const int dim = 1 + (trial % 2);
            Vec center(dim);
            for (int i = 0; i < dim; ++i) center[i] = rng.in(-1.0, 1.0);
            TestFunction phi = tf_gaussian(dim, center, rng.in(0.8, 1.6), rng.in(0.5, 1.5));
            Vec a1{rng.in(-1.0, 1.0)}, b1{rng.in(0.1, 0.5)};
            Mat Q1{1, 1, {rng.in(-0.5, 0.5)}};
            ScalarOuter F = outer_poly_exp(rng.in(-1.0, 1.0), a1, Q1, rng.in(0.5, 1.5), b1);
            CylindricalFunction u{F, {phi}};

            Coefficients cf;
            cf.dim = dim;
            cf.noise_dim = dim;
            cf.action_dim = 1;
            const double b0 = rng.in(-0.5, 0.5), bl = rng.in(-0.5, 0.5);
            const double s0 = rng.in(0.3, 1.0), sl = rng.in(-0.3, 0.3);
            const double g0 = rng.in(0.2, 1.5);
            cf.b = [b0, bl, dim](const double* xx, const double*, const double*, double* out) {
                for (int i = 0; i < dim; ++i) out[i] = b0 + bl * xx[i];
            };
            cf.sigma = [s0, sl, dim](const double* xx, const double*, const double*, double* out) {
                for (int i = 0; i < dim * dim; ++i) out[i] = 0.0;
                for (int i = 0; i < dim; ++i) out[i * dim + i] = s0 + sl * xx[i];
            };
            cf.gamma = [g0](const double*, const double*, const double*) { return g0; };

            const long long level = 1 + static_cast<long long>(rng.in(0.0, 4.0));
            const int na = 1 + static_cast<int>(rng.in(0.0, 3.0));
            std::vector<double> coords;
            std::vector<long long> mult;
            for (int i = 0; i < na; ++i) {
                for (int d = 0; d < dim; ++d) coords.push_back(rng.in(-1.5, 1.5));
                mult.push_back(1 + static_cast<long long>(rng.in(0.0, 3.0)));
            }
            AtomicMeasure lam(dim, level, coords, mult);
            const double act = 0.0;
            double x[2];
            for (int d = 0; d < dim; ++d) x[d] = rng.in(-1.2, 1.2);
            const double lhs = apply_bold_L(u, cf, lam, x, &act);
            const double rhs = apply_L_limit(F, phi, cf, lam, x, &act);
            max_gen = std::max(max_gen, std::abs(lhs - rhs));
        }

        r.pass = max_rel <= 1e-3 && max_gen <= 1e-10;
        r.detail = fmt("max fd rel err %.2e (tol 1e-3); generator gap %.2e (tol 1e-10)", max_rel,
                       max_gen);
    });

    // ---- 11: moment-bound ratio across initial masses --------------------------
    timed(11, "moment-ratio", [&](CriterionResult& r) {
        Coefficients coeffs = make_coefficients_const(1, 1, 1, {0.0}, 1.0, 1.0);
        SeparatingFamily family = default_family(1);
        SimConfig cfg = base_sim(opts, 11, 20, 800);
        MomentBoundReport rep = moment_bound_check(cfg, coeffs, constant_policy({0.0}), family,
                                                   {0.5, 1.0, 2.0, 4.0}, 3.0);
        r.pass = rep.pass;
        std::string d;
        for (const auto& row : rep.rows) d += fmt("%s%.3g", d.empty() ? "ratios " : "/", row.ratio);
        r.detail = d + fmt(" spread %.2f (max 3) finite %s", rep.spread,
                           rep.all_finite ? "yes" : "NO");
    });

    // ---- 12: byte-level reproducibility of the selftest -------------------------
    timed(12, "reproducibility", [&](CriterionResult& r) {
        const std::string a = opts.out_dir + "/selftest_a";
        const std::string b = opts.out_dir + "/selftest_b";
        auto files_a = run_selftest(a, opts.seed);
        auto files_b = run_selftest(b, opts.seed);
        bool same = files_a == files_b;
        for (size_t i = 0; same && i < files_a.size(); ++i)
            same = read_file(a + "/" + files_a[i]) == read_file(b + "/" + files_b[i]);
        r.pass = same;
        r.detail = fmt("%zu csv files %s", files_a.size(), same ? "byte-identical" : "DIFFER");
    });

    // machine-readable report
    nlohmann::json rep = nlohmann::json::array();
    for (const auto& r : results)
        rep.push_back({{"index", r.index},
                       {"name", r.name},
                       {"pass", r.pass},
                       {"detail", r.detail},
                       {"seconds", r.seconds}});
    write_json_file(opts.out_dir + "/acceptance_report.json",
                    {{"meta", run_meta(hex64(fnv1a64("acceptance")))},
                     {"criteria", rep},
                     {"all_pass", all_pass(results)}});
    return results;
}

}  // namespace branchlab
