#include "branchlab/mc.hpp"

#include <algorithm>
#include <cmath>

namespace branchlab {

Estimate summarize(const std::vector<double>& xs, long long censored) {
    Estimate e;
    e.censored = censored;
    e.replicates = static_cast<long long>(xs.size());
    if (xs.empty()) return e;
    KahanSum s;
    for (double x : xs) s.add(x);
    e.mean = s.value() / static_cast<double>(xs.size());
    if (xs.size() > 1) {
        KahanSum sq;
        for (double x : xs) sq.add((x - e.mean) * (x - e.mean));
        double var = sq.value() / static_cast<double>(xs.size() - 1);
        e.std_error = std::sqrt(std::max(var, 0.0) / static_cast<double>(xs.size()));
    }
    return e;
}

VarianceEstimate summarize_variance(const std::vector<double>& xs) {
    VarianceEstimate v;
    v.replicates = static_cast<long long>(xs.size());
    if (xs.size() < 2) return v;
    const double m = static_cast<double>(xs.size());
    KahanSum s;
    for (double x : xs) s.add(x);
    const double mean = s.value() / m;
    KahanSum s2, s4;
    for (double x : xs) {
        const double d = x - mean;
        s2.add(d * d);
        s4.add(d * d * d * d);
    }
    v.variance = s2.value() / (m - 1.0);
    const double mu4 = s4.value() / m;
    v.std_error = std::sqrt(std::max(mu4 - v.variance * v.variance, 0.0) / m);
    return v;
}

Estimate estimate_scalar(const SimConfig& cfg, const Coefficients& coeffs,
                         const FeedbackPolicy& policy, const AtomicMeasure& lambda0,
                         const RecordSpec& record,
                         const std::function<double(const TrajectoryRecord&)>& reduce) {
    auto records = simulate_batch(cfg, coeffs, policy, lambda0, record);
    std::vector<double> xs;
    xs.reserve(records.size());
    long long censored = 0;
    for (const auto& rec : records) {
        if (rec.censored) {
            ++censored;
            continue;
        }
        xs.push_back(reduce(rec));
    }
    return summarize(xs, censored);
}

Estimate evaluate_cost(const SimConfig& cfg, const Coefficients& coeffs, const CostSpec& cost,
                       const FeedbackPolicy& policy, const AtomicMeasure& lambda0) {
    RecordSpec rec;
    rec.per_step = false;
    rec.mass = false;
    rec.cost = &cost;
    rec.keep_final_measure = true;
    return estimate_scalar(cfg, coeffs, policy, lambda0, rec, [&](const TrajectoryRecord& r) {
        return r.running_cost_integral + cost.terminal(r.final_measure);
    });
}

VerifyReport verify_optimality(const ValueSurface& surface, const SimConfig& cfg,
                               const Coefficients& coeffs, const CostSpec& cost,
                               const AtomicMeasure& lambda0,
                               const std::vector<std::pair<std::string, FeedbackPolicy>>& alts,
                               double kappa) {
    VerifyReport rep;
    rep.value = value_of_measure(surface, cfg.t0, lambda0);
    const double bias = kappa / static_cast<double>(cfg.level);
    FeedbackPolicy candidate = extract_policy(surface);
    rep.j_candidate = evaluate_cost(cfg, coeffs, cost, candidate, lambda0);
    rep.tolerance = rep.j_candidate.half_width() + bias;
    rep.candidate_ok = std::abs(rep.j_candidate.mean - rep.value) <= rep.tolerance;
    rep.pass = rep.candidate_ok;
    for (const auto& [name, policy] : alts) {
        PolicyValue pv;
        pv.name = name;
        pv.j = evaluate_cost(cfg, coeffs, cost, policy, lambda0);
        pv.gap_from_value = pv.j.mean - rep.value;
        // the surface value is the infimum, so no policy may land below it by
        // more than monte carlo noise plus the frozen scheme bias
        pv.consistent = pv.j.mean >= rep.value - pv.j.half_width() - bias;
        rep.pass = rep.pass && pv.consistent;
        rep.alternatives.push_back(std::move(pv));
    }
    return rep;
}

DppReport dpp_check(const ValueSurface& surface, const SimConfig& cfg, const Coefficients& coeffs,
                    const CostSpec& cost, const AtomicMeasure& lambda0, double tau, double kappa) {
    if (!(tau > cfg.t0) || tau > surface.grid.T + 1e-12)
        throw config_error("dpp_check: tau must lie in (t0, T]");
    SimConfig part = cfg;
    part.horizon = tau - cfg.t0;

    DppReport rep;
    rep.tau = tau;
    rep.value_start = value_of_measure(surface, cfg.t0, lambda0);

    RecordSpec rec;
    rec.per_step = false;
    rec.mass = false;
    rec.cost = cost.psi_is_zero ? nullptr : &cost;
    rec.keep_final_measure = true;

    FeedbackPolicy candidate = extract_policy(surface);
    auto records = simulate_batch(part, coeffs, candidate, lambda0, rec);
    std::vector<double> xs;
    xs.reserve(records.size());
    long long censored = 0;
    const GridSpec& g = surface.grid;
    for (const auto& r : records) {
        bool off_grid = r.censored;
        for (int i = 0; i < r.final_measure.atom_count() && !off_grid; ++i) {
            const double x = r.final_measure.atom(i)[0];
            off_grid = x < g.x_min || x > g.x_max;
        }
        if (off_grid) {
            ++censored;
            continue;
        }
        xs.push_back(r.running_cost_integral + value_of_measure(surface, tau, r.final_measure));
    }
    rep.continuation = summarize(xs, censored);
    rep.tolerance = rep.continuation.half_width() + kappa / static_cast<double>(cfg.level);
    rep.pass = std::abs(rep.continuation.mean - rep.value_start) <= rep.tolerance;
    return rep;
}

MomentBoundReport moment_bound_check(const SimConfig& cfg, const Coefficients& coeffs,
                                     const FeedbackPolicy& policy, const SeparatingFamily& family,
                                     const std::vector<double>& masses, double threshold) {
    if (masses.empty()) throw config_error("moment_bound_check: empty mass ladder");
    MomentBoundReport rep;
    rep.threshold = threshold;
    rep.all_finite = true;

    std::vector<double> weights(static_cast<size_t>(family.size()));
    for (int k = 0; k < family.size(); ++k)
        weights[static_cast<size_t>(k)] = std::ldexp(1.0, -k) / family.q[static_cast<size_t>(k)];

    RecordSpec rec;
    rec.per_step = true;
    rec.mass = false;
    rec.family = &family;
    rec.keep_final_measure = false;

    for (double m0 : masses) {
        MeasureSpec spec;
        spec.kind = MeasureSpec::Kind::atoms;
        spec.dim = coeffs.dim;
        spec.atom_coords.assign(static_cast<size_t>(coeffs.dim), 0.0);
        spec.atom_weights = {m0};
        AtomicMeasure lambda0 = discretize(spec, cfg.level);

        MomentLadderRow row;
        row.mass0 = m0;
        row.initial_distance = distance_to_zero(lambda0, family);
        if (row.initial_distance <= 0.0)
            throw config_error("moment_bound_check: start measure at zero distance");

        auto records = simulate_batch(cfg, coeffs, policy, lambda0, rec);
        std::vector<double> sups;
        sups.reserve(records.size());
        long long censored = 0;
        for (const auto& r : records) {
            if (r.censored) {
                ++censored;
                rep.all_finite = false;
                continue;
            }
            double sup = 0.0;
            for (size_t row_i = 0; row_i < r.times.size(); ++row_i) {
                double d = 0.0;
                for (int k = 0; k < family.size(); ++k)
                    d += weights[static_cast<size_t>(k)] *
                         std::abs(r.values[static_cast<size_t>(k)][row_i]);
                sup = std::max(sup, d);
            }
            sups.push_back(sup);
        }
        row.sup_distance = summarize(sups, censored);
        row.ratio = row.sup_distance.mean / row.initial_distance;
        if (!std::isfinite(row.ratio)) rep.all_finite = false;
        rep.rows.push_back(std::move(row));
    }

    double lo = rep.rows.front().ratio, hi = lo;
    for (const auto& row : rep.rows) {
        lo = std::min(lo, row.ratio);
        hi = std::max(hi, row.ratio);
    }
    rep.spread = lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
    rep.pass = rep.all_finite && std::isfinite(rep.spread) && rep.spread <= threshold;
    return rep;
}

ScalingReport convergence_study(const SimConfig& base, const Coefficients& coeffs,
                                const FeedbackPolicy& policy, const MeasureSpec& initial,
                                const TestFunction& phi, const std::vector<long long>& levels) {
    if (levels.size() < 3) throw config_error("convergence_study: need at least 3 levels");
    ScalingReport rep;
    RecordSpec rec;
    rec.per_step = false;
    rec.mass = false;
    rec.keep_final_measure = true;

    for (long long level : levels) {
        SimConfig cfg = base;
        cfg.level = level;
        AtomicMeasure lambda0 = discretize(initial, level);
        auto records = simulate_batch(cfg, coeffs, policy, lambda0, rec);
        std::vector<double> xs;
        xs.reserve(records.size());
        for (const auto& r : records)
            if (!r.censored) xs.push_back(pair(phi, r.final_measure));
        ScalingRow row;
        row.level = level;
        row.var = summarize_variance(xs);
        rep.rows.push_back(row);
    }

    // ordinary least squares of variance on 1/level; the slope error is
    // propagated from the per-level delta-method errors, not from the fit
    const size_t m = rep.rows.size();
    double su = 0.0, sy = 0.0;
    std::vector<double> u(m), y(m);
    for (size_t i = 0; i < m; ++i) {
        u[i] = 1.0 / static_cast<double>(rep.rows[i].level);
        y[i] = rep.rows[i].var.variance;
        su += u[i];
        sy += y[i];
    }
    const double ubar = su / static_cast<double>(m), ybar = sy / static_cast<double>(m);
    double sxx = 0.0, sxy = 0.0, stot = 0.0;
    for (size_t i = 0; i < m; ++i) {
        sxx += (u[i] - ubar) * (u[i] - ubar);
        sxy += (u[i] - ubar) * (y[i] - ybar);
        stot += (y[i] - ybar) * (y[i] - ybar);
    }
    rep.slope = sxy / sxx;
    rep.v_inf = ybar - rep.slope * ubar;
    double sres = 0.0, se2 = 0.0;
    for (size_t i = 0; i < m; ++i) {
        const double fit = rep.v_inf + rep.slope * u[i];
        sres += (y[i] - fit) * (y[i] - fit);
        const double k = (u[i] - ubar) / sxx;
        se2 += k * k * rep.rows[i].var.std_error * rep.rows[i].var.std_error;
    }
    rep.slope_se = std::sqrt(se2);
    rep.r_squared = stot > 0.0 ? 1.0 - sres / stot : 1.0;
    return rep;
}

}  // namespace branchlab
