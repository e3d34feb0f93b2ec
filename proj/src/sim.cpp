#include "branchlab/sim.hpp"

#include <algorithm>
#include <cmath>

#include "branchlab/generators.hpp"

namespace branchlab {

namespace {
constexpr int kMaxDim = 8;  // stack-buffer bound for state/noise/action dims
}

long long SimConfig::steps() const {
    if (dt <= 0.0 || horizon <= 0.0) throw config_error("sim: dt and horizon must be positive");
    long long n = std::llround(horizon / dt);
    if (n < 1 || std::abs(static_cast<double>(n) * dt - horizon) > 1e-9 * std::max(1.0, horizon))
        throw config_error("sim: horizon must be an integral number of steps");
    return n;
}

int TrajectoryRecord::column_index(const std::string& name) const {
    for (size_t c = 0; c < columns.size(); ++c)
        if (columns[c] == name) return static_cast<int>(c);
    return -1;
}

AtomicMeasure SimState::to_measure() const {
    return AtomicMeasure(dim, level, x, std::vector<long long>(ids.size(), 1));
}

SimState SimState::from_measure(const AtomicMeasure& mu, double t0) {
    SimState st;
    st.dim = mu.dim;
    st.level = mu.level;
    st.t = t0;
    // expand multiplicities into units; canonical atom order makes unit ids,
    // and therefore every random draw, invariant to input atom permutations
    for (int i = 0; i < mu.atom_count(); ++i)
        for (long long k = 0; k < mu.mult[i]; ++k) {
            st.x.insert(st.x.end(), mu.atom(i), mu.atom(i) + mu.dim);
            st.ids.push_back(st.next_id++);
        }
    return st;
}

void step(SimState& state, long long step_index, double dt, const Coefficients& coeffs,
          const FeedbackPolicy& policy, const Vec& frozen_features, const ReplicateRng& rng,
          StepCounters& counters) {
    const int d = state.dim;
    const int dn = coeffs.noise_dim;
    if (d > kMaxDim || dn > kMaxDim || coeffs.action_dim > kMaxDim)
        throw config_error("sim: dimension exceeds the supported bound");

    const bool need_motion = !(coeffs.b_is_zero && coeffs.sigma_is_zero);
    const bool move_b = !coeffs.b_is_zero;
    const bool move_sigma = !coeffs.sigma_is_zero;
    const bool const_gamma = coeffs.gamma_const.has_value();
    const double* const_a =
        policy.const_action.has_value() ? policy.const_action->data() : nullptr;
    const double nd = static_cast<double>(state.level);
    const double sqdt = std::sqrt(dt);
    const double* feat = frozen_features.data();
    const double t = state.t;

    double q_const = 0.0;
    if (const_gamma) q_const = -std::expm1(-nd * *coeffs.gamma_const * dt);
    double gamma_cache = std::numeric_limits<double>::quiet_NaN();
    double q_cache = 0.0;

    const long long count = state.units();
    std::vector<double> nx;
    std::vector<uint64_t> nids;
    nx.reserve(state.x.size() + static_cast<size_t>(d) * 4);
    nids.reserve(state.ids.size() + 4);

    double a_buf[kMaxDim], bv[kMaxDim], sv[kMaxDim * kMaxDim], xp[kMaxDim];

    for (long long i = 0; i < count; ++i) {
        const double* xi = state.x.data() + static_cast<size_t>(i) * d;
        const uint64_t id = state.ids[static_cast<size_t>(i)];
        UnitStepRng draw(rng, id, static_cast<uint64_t>(step_index));

        const double* a = const_a;
        if (!a) {
            policy.action(t, xi, feat, a_buf);
            a = a_buf;
        }

        // branching probability from the pre-move location and frozen features
        double q;
        if (const_gamma) {
            q = q_const;
        } else {
            double g = coeffs.gamma(xi, feat, a);
            if (g == gamma_cache) {
                q = q_cache;
            } else {
                q = -std::expm1(-nd * g * dt);
                gamma_cache = g;
                q_cache = q;
            }
        }

        // Euler-Maruyama move
        if (need_motion) {
            for (int k = 0; k < d; ++k) xp[k] = xi[k];
            if (move_b) {
                coeffs.b(xi, feat, a, bv);
                for (int k = 0; k < d; ++k) xp[k] += bv[k] * dt;
            }
            if (move_sigma) {
                coeffs.sigma(xi, feat, a, sv);
                for (int j = 0; j < dn; ++j) {
                    double z = draw.normal(j) * sqdt;
                    for (int k = 0; k < d; ++k) xp[k] += sv[k * dn + j] * z;
                }
            }
        } else {
            for (int k = 0; k < d; ++k) xp[k] = xi[k];
        }

        const double u = draw.uniform(SLOT_BRANCH);
        if (u < 0.5 * q) {
            ++counters.deaths;  // unit removed
            continue;
        }
        nx.insert(nx.end(), xp, xp + d);
        nids.push_back(id);
        if (u < q) {
            ++counters.births;  // offspring at the parent's post-move location
            nx.insert(nx.end(), xp, xp + d);
            nids.push_back(state.next_id++);
        }
    }
    state.x = std::move(nx);
    state.ids = std::move(nids);
    state.t += dt;
}

// ---- recording ---------------------------------------------------------------

namespace {

struct Recorder {
    const RecordSpec* spec;
    const Coefficients* coeffs;
    const FeedbackPolicy* policy;
    long long level;
    std::vector<std::string> columns;

    Recorder(const RecordSpec& rs, const Coefficients& co, const FeedbackPolicy& po, long long lvl)
        : spec(&rs), coeffs(&co), policy(&po), level(lvl) {
        if (rs.mass) columns.push_back("mass");
        for (const auto& phi : rs.pairings) columns.push_back("pair:" + phi.name);
        if (rs.family)
            for (int k = 0; k < rs.family->size(); ++k) columns.push_back("fam" + std::to_string(k));
        if (rs.diagnostic) {
            columns.push_back("diag_value");
            columns.push_back("diag_comp");
            columns.push_back("diag_qv");
        }
    }

    void row(const SimState& st, const Vec& feat, std::vector<Vec>& values) const {
        size_t c = 0;
        const double inv_n = 1.0 / static_cast<double>(level);
        const long long count = st.units();
        if (spec->mass) values[c++].push_back(st.mass());
        for (const auto& phi : spec->pairings) {
            KahanSum s;
            for (long long i = 0; i < count; ++i)
                s.add(phi.value(st.x.data() + static_cast<size_t>(i) * st.dim));
            values[c++].push_back(s.value() * inv_n);
        }
        if (spec->family)
            for (const auto& phi : spec->family->members) {
                KahanSum s;
                for (long long i = 0; i < count; ++i)
                    s.add(phi.value(st.x.data() + static_cast<size_t>(i) * st.dim));
                values[c++].push_back(s.value() * inv_n);
            }
        if (spec->diagnostic) {
            const auto& dg = *spec->diagnostic;
            const double nd = static_cast<double>(level);
            KahanSum ypair;
            for (long long i = 0; i < count; ++i)
                ypair.add(dg.phi.value(st.x.data() + static_cast<size_t>(i) * st.dim));
            const double y = ypair.value() * inv_n;
            double g1, g2;
            dg.F.gradient(&y, &g1);
            dg.F.hessian(&y, &g2);
            double a_buf[kMaxDim];
            const double* const_a =
                policy->const_action.has_value() ? policy->const_action->data() : nullptr;
            KahanSum comp, qv;
            for (long long i = 0; i < count; ++i) {
                const double* xi = st.x.data() + static_cast<size_t>(i) * st.dim;
                const double* a = const_a;
                if (!a) {
                    policy->action(st.t, xi, feat.data(), a_buf);
                    a = a_buf;
                }
                const double gam = coeffs->gamma(xi, feat.data(), a);
                const double phix = dg.phi.value(xi);
                const double ym = y - phix / nd, yp = y + phix / nd;
                const double jump =
                    gam * nd * nd * (0.5 * dg.F.value(&ym) + 0.5 * dg.F.value(&yp) - dg.F.value(&y));
                const double drift = g1 * generator_L(*coeffs, dg.phi, xi, feat.data(), a) +
                                     (0.5 / nd) * g2 * grad_sigma_sq(*coeffs, dg.phi, xi, feat.data(), a) +
                                     jump;
                comp.add(drift);
                qv.add((1.0 / nd) * grad_sigma_sq(*coeffs, dg.phi, xi, feat.data(), a) +
                       gam * phix * phix);
            }
            values[c++].push_back(dg.F.value(&y));
            values[c++].push_back(comp.value() * inv_n);
            values[c++].push_back(g1 * g1 * qv.value() * inv_n);
        }
    }
};

}  // namespace

TrajectoryRecord simulate_one(const SimConfig& cfg, const Coefficients& coeffs,
                              const FeedbackPolicy& policy, const AtomicMeasure& lambda0,
                              const RecordSpec& record, uint64_t replicate) {
    if (lambda0.level != cfg.level)
        throw config_error("sim: initial measure level does not match the configured level");
    const double guard = static_cast<double>(cfg.level) * coeffs.bound_gamma * cfg.dt;
    if (guard > cfg.thinning_guard + 1e-12)
        throw config_error("sim: level * gamma bound * dt = " + format_double(guard) +
                           " exceeds the thinning guard " + format_double(cfg.thinning_guard));
    const long long nsteps = cfg.steps();

    SimState st = SimState::from_measure(lambda0, cfg.t0);
    const long long cap_units = static_cast<long long>(
        std::ceil(cfg.mass_cap_factor * static_cast<double>(std::max<long long>(st.units(), 1))));
    ReplicateRng rng(cfg.seed, replicate);
    Recorder rec(record, coeffs, policy, cfg.level);

    TrajectoryRecord out;
    out.replicate = replicate;
    out.columns = rec.columns;
    out.values.resize(rec.columns.size());

    const bool has_features = !coeffs.feature_functions.empty();
    Vec feat;
    const bool want_cost = record.cost != nullptr && !record.cost->psi_is_zero;
    KahanSum cost_integral;
    double a_buf[kMaxDim];
    const double* const_a = policy.const_action.has_value() ? policy.const_action->data() : nullptr;

    StepCounters counters;
    for (long long j = 0; j <= nsteps; ++j) {
        if (has_features) {
            AtomicMeasure mu = st.to_measure();
            feat = features(mu, coeffs);
        }
        if (record.per_step || j == 0 || j == nsteps) {
            out.times.push_back(st.t);
            rec.row(st, feat, out.values);
        }
        if (std::isnan(out.extinct_at) && st.units() == 0) out.extinct_at = st.t;
        if (j == nsteps) break;

        if (want_cost) {
            // left-endpoint rule on the pre-step state
            KahanSum s;
            for (long long i = 0; i < st.units(); ++i) {
                const double* xi = st.x.data() + static_cast<size_t>(i) * st.dim;
                const double* a = const_a;
                if (!a) {
                    policy.action(st.t, xi, feat.data(), a_buf);
                    a = a_buf;
                }
                s.add(record.cost->psi(xi, feat.data(), a));
            }
            cost_integral.add(s.value() / static_cast<double>(cfg.level) * cfg.dt);
        }

        step(st, j, cfg.dt, coeffs, policy, feat, rng, counters);

        if (st.units() > cap_units) {
            out.censored = true;
            break;
        }
    }
    out.births = counters.births;
    out.deaths = counters.deaths;
    out.running_cost_integral = cost_integral.value();
    if (record.keep_final_measure) out.final_measure = st.to_measure();
    return out;
}

std::vector<TrajectoryRecord> simulate_batch(const SimConfig& cfg, const Coefficients& coeffs,
                                             const FeedbackPolicy& policy,
                                             const AtomicMeasure& lambda0,
                                             const RecordSpec& record) {
    return map_replicates<TrajectoryRecord>(
        cfg.replicates, cfg.workers,
        [&](long long r) { return simulate_one(cfg, coeffs, policy, lambda0, record,
                                               static_cast<uint64_t>(r)); });
}

// ---- diagnostics ---------------------------------------------------------------

MartingaleDiagnostic martingale_diagnostic(const std::vector<TrajectoryRecord>& records) {
    MartingaleDiagnostic d;
    std::vector<double> m_term, qv_emp, qv_form;
    for (const auto& rec : records) {
        if (rec.censored) continue;
        int cv = rec.column_index("diag_value");
        int cc = rec.column_index("diag_comp");
        int cq = rec.column_index("diag_qv");
        if (cv < 0 || cc < 0 || cq < 0)
            throw config_error("martingale_diagnostic: records lack diagnostic columns");
        if (rec.times.size() < 2)
            throw config_error("martingale_diagnostic: records need per-step rows");
        const Vec& y = rec.values[static_cast<size_t>(cv)];
        const Vec& comp = rec.values[static_cast<size_t>(cc)];
        const Vec& qv = rec.values[static_cast<size_t>(cq)];
        KahanSum emp, form;
        double m = 0.0;
        for (size_t j = 0; j + 1 < rec.times.size(); ++j) {
            const double dt = rec.times[j + 1] - rec.times[j];
            const double dm = y[j + 1] - y[j] - comp[j] * dt;
            m += dm;
            emp.add(dm * dm);
            form.add(qv[j] * dt);
        }
        m_term.push_back(m);
        qv_emp.push_back(emp.value());
        qv_form.push_back(form.value());
    }
    const long long n = static_cast<long long>(m_term.size());
    d.replicates = n;
    if (n < 2) return d;
    auto mean_of = [n](const std::vector<double>& v) {
        KahanSum s;
        for (double x : v) s.add(x);
        return s.value() / static_cast<double>(n);
    };
    const double mm = mean_of(m_term);
    const double me = mean_of(qv_emp);
    const double mf = mean_of(qv_form);
    KahanSum vm, ve, vf, cef;
    for (long long i = 0; i < n; ++i) {
        vm.add((m_term[i] - mm) * (m_term[i] - mm));
        ve.add((qv_emp[i] - me) * (qv_emp[i] - me));
        vf.add((qv_form[i] - mf) * (qv_form[i] - mf));
        cef.add((qv_emp[i] - me) * (qv_form[i] - mf));
    }
    const double nn = static_cast<double>(n);
    d.mean_m = mm;
    d.se_m = std::sqrt(vm.value() / (nn - 1.0) / nn);
    d.z = d.se_m > 0.0 ? mm / d.se_m : 0.0;
    d.qv_empirical = me;
    d.qv_formula = mf;
    d.qv_ratio = mf != 0.0 ? me / mf : 0.0;
    // delta method for the ratio of means
    const double var_e = ve.value() / (nn - 1.0);
    const double var_f = vf.value() / (nn - 1.0);
    const double cov = cef.value() / (nn - 1.0);
    if (mf != 0.0) {
        double v = var_e / (mf * mf) + me * me * var_f / (mf * mf * mf * mf) -
                   2.0 * me * cov / (mf * mf * mf);
        d.qv_ratio_se = std::sqrt(std::max(0.0, v) / nn);
    }
    return d;
}

}  // namespace branchlab
