#include "branchlab/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "branchlab/rng.hpp"

namespace branchlab {

Vec features(const AtomicMeasure& mu, const Coefficients& coeffs) {
    Vec f(coeffs.feature_functions.size());
    for (size_t j = 0; j < f.size(); ++j) f[j] = pair(coeffs.feature_functions[j], mu);
    return f;
}

FeedbackPolicy constant_policy(const Vec& a, const std::string& name) {
    FeedbackPolicy p;
    p.name = name;
    p.action_dim = static_cast<int>(a.size());
    p.const_action = a;
    p.action = [a](double, const double*, const double*, double* out) {
        std::copy(a.begin(), a.end(), out);
    };
    return p;
}

CostSpec zero_running_exp_terminal(const TestFunction& h, double theta) {
    CostSpec c;
    c.psi = [](const double*, const double*, const double*) { return 0.0; };
    c.psi_is_zero = true;
    c.terminal = exp_pairing(h, theta);
    c.growth_constant = 1.0;  // exp(-theta <h,mu>) is bounded by 1 for h >= 0
    return c;
}

Coefficients make_coefficients_const(int dim, int noise_dim, int action_dim,
                                     const Vec& b_val, double sigma_scalar, double gamma_val) {
    if (static_cast<int>(b_val.size()) != dim) throw config_error("coefficients: bad drift size");
    Coefficients c;
    c.dim = dim;
    c.noise_dim = noise_dim;
    c.action_dim = action_dim;
    c.b = [b_val, dim](const double*, const double*, const double*, double* out) {
        for (int i = 0; i < dim; ++i) out[i] = b_val[i];
    };
    c.sigma = [sigma_scalar, dim, noise_dim](const double*, const double*, const double*, double* out) {
        for (int i = 0; i < dim * noise_dim; ++i) out[i] = 0.0;
        for (int i = 0; i < std::min(dim, noise_dim); ++i) out[i * noise_dim + i] = sigma_scalar;
    };
    c.gamma = [gamma_val](const double*, const double*, const double*) { return gamma_val; };
    double bmax = 0.0;
    for (double v : b_val) bmax = std::max(bmax, std::abs(v));
    c.bound_b = bmax;
    c.bound_sigma = std::abs(sigma_scalar);
    c.bound_gamma = std::abs(gamma_val);
    c.b_is_zero = bmax == 0.0;
    c.sigma_is_zero = sigma_scalar == 0.0;
    c.gamma_const = gamma_val;
    c.lipschitz = 0.0;
    return c;
}

// ---- one-line builtin specs --------------------------------------------------

namespace {

struct ParsedTerm {
    std::string kind;
    std::vector<double> params;
    std::vector<std::pair<double, double>> table;
    int feature_index = -1;
};

ParsedTerm parse_term(const std::string& spec) {
    std::istringstream is(spec);
    ParsedTerm t;
    if (!(is >> t.kind)) throw config_error("coefficient spec is empty");
    if (t.kind == "table") {
        std::string rest;
        if (!(is >> rest)) throw config_error("table coefficient needs x:v pairs");
        std::stringstream ps(rest);
        std::string cell;
        while (std::getline(ps, cell, ',')) {
            auto colon = cell.find(':');
            if (colon == std::string::npos) throw config_error("table entry must be x:v");
            t.table.emplace_back(std::strtod(cell.substr(0, colon).c_str(), nullptr),
                                 std::strtod(cell.substr(colon + 1).c_str(), nullptr));
        }
        if (t.table.size() < 2) throw config_error("table coefficient needs >= 2 points");
        std::sort(t.table.begin(), t.table.end());
    } else {
        double v;
        while (is >> v) t.params.push_back(v);
    }
    static const char* known[] = {"constant", "affine", "action", "action_scale", "table", "feature"};
    bool ok = false;
    for (const char* k : known) ok = ok || t.kind == k;
    if (!ok) throw config_error("unknown coefficient kind '" + t.kind + "'");
    if (t.kind == "constant" && t.params.size() != 1)
        throw config_error("constant coefficient needs one parameter");
    if (t.kind == "affine" && t.params.size() != 2)
        throw config_error("affine coefficient needs two parameters (c0 c1)");
    if (t.kind == "action_scale" && t.params.size() != 1)
        throw config_error("action_scale coefficient needs one parameter");
    if (t.kind == "feature") {
        if (t.params.size() != 3) throw config_error("feature coefficient needs (index c0 c1)");
        t.feature_index = static_cast<int>(t.params[0]);
    }
    return t;
}

double eval_table(const std::vector<std::pair<double, double>>& tb, double x) {
    if (x <= tb.front().first) return tb.front().second;
    if (x >= tb.back().first) return tb.back().second;
    for (size_t i = 0; i + 1 < tb.size(); ++i) {
        if (x <= tb[i + 1].first) {
            double t = (x - tb[i].first) / (tb[i + 1].first - tb[i].first);
            return tb[i].second + t * (tb[i + 1].second - tb[i].second);
        }
    }
    return tb.back().second;
}

// scalar evaluation for one parsed term (first component conventions: affine
// and table read x[0], action reads a[0])
double eval_term(const ParsedTerm& t, const double* x, const double* feat, const double* a) {
    if (t.kind == "constant") return t.params[0];
    if (t.kind == "affine") return t.params[0] + t.params[1] * x[0];
    if (t.kind == "action") return a[0];
    if (t.kind == "action_scale") return t.params[0] * a[0];
    if (t.kind == "table") return eval_table(t.table, x[0]);
    if (t.kind == "feature") return t.params[1] + t.params[2] * feat[t.feature_index];
    throw config_error("unknown coefficient kind");
}

// conservative sup of |term| over box x controls (exact for these builtins)
double bound_term(const ParsedTerm& t, double box, const ControlSet* controls,
                  const std::vector<TestFunction>& features) {
    if (t.kind == "constant") return std::abs(t.params[0]);
    if (t.kind == "affine")
        return std::max(std::abs(t.params[0] + t.params[1] * box),
                        std::abs(t.params[0] - t.params[1] * box));
    if (t.kind == "action" || t.kind == "action_scale") {
        double scale = t.kind == "action" ? 1.0 : std::abs(t.params[0]);
        double amax = 0.0;
        if (controls)
            for (const auto& p : controls->points)
                for (double v : p) amax = std::max(amax, std::abs(v));
        else
            throw config_error("action coefficient needs a control set for its bound");
        return scale * amax;
    }
    if (t.kind == "table") {
        double m = 0.0;
        for (auto& [x, v] : t.table) {
            (void)x;
            m = std::max(m, std::abs(v));
        }
        return m;
    }
    if (t.kind == "feature") {
        // features are pairings of bounded functions; without a mass bound the
        // declared bound must come from config, use the sup over a unit-mass
        // pairing as the audited default
        double fmax = t.feature_index < static_cast<int>(features.size())
                          ? features[t.feature_index].sup_norm
                          : 1.0;
        return std::abs(t.params[1]) + std::abs(t.params[2]) * fmax;
    }
    throw config_error("unknown coefficient kind");
}

}  // namespace

Coefficients make_coefficients(int dim, int noise_dim, int action_dim,
                               const std::string& b_spec, const std::string& sigma_spec,
                               const std::string& gamma_spec,
                               std::vector<TestFunction> feature_functions,
                               const ControlSet* controls) {
    ParsedTerm bt = parse_term(b_spec);
    ParsedTerm st = parse_term(sigma_spec);
    ParsedTerm gt = parse_term(gamma_spec);
    for (const ParsedTerm* t : {&bt, &st, &gt})
        if (t->kind == "feature" &&
            (t->feature_index < 0 || t->feature_index >= static_cast<int>(feature_functions.size())))
            throw config_error("feature coefficient index out of range");

    Coefficients c;
    c.dim = dim;
    c.noise_dim = noise_dim;
    c.action_dim = action_dim;
    c.feature_functions = std::move(feature_functions);
    c.b = [bt, dim](const double* x, const double* feat, const double* a, double* out) {
        double v = eval_term(bt, x, feat, a);
        for (int i = 0; i < dim; ++i) out[i] = v;
    };
    c.sigma = [st, dim, noise_dim](const double* x, const double* feat, const double* a, double* out) {
        double v = eval_term(st, x, feat, a);
        for (int i = 0; i < dim * noise_dim; ++i) out[i] = 0.0;
        for (int i = 0; i < std::min(dim, noise_dim); ++i) out[i * noise_dim + i] = v;
    };
    c.gamma = [gt](const double* x, const double* feat, const double* a) {
        return eval_term(gt, x, feat, a);
    };
    const double audit_box = 16.0;  // builtins are affine/bounded, box only matters for affine
    c.bound_b = bound_term(bt, audit_box, controls, c.feature_functions);
    c.bound_sigma = bound_term(st, audit_box, controls, c.feature_functions);
    c.bound_gamma = bound_term(gt, audit_box, controls, c.feature_functions);
    c.b_is_zero = bt.kind == "constant" && bt.params[0] == 0.0;
    c.sigma_is_zero = st.kind == "constant" && st.params[0] == 0.0;
    if (gt.kind == "constant") c.gamma_const = gt.params[0];
    // exact Lipschitz constants for the builtin terms (slope in x; action and
    // feature input changes are audited, not differentiated)
    auto lip = [](const ParsedTerm& t) {
        if (t.kind == "affine") return std::abs(t.params[1]);
        if (t.kind == "table") {
            double m = 0.0;
            for (size_t i = 0; i + 1 < t.table.size(); ++i)
                m = std::max(m, std::abs((t.table[i + 1].second - t.table[i].second) /
                                         (t.table[i + 1].first - t.table[i].first)));
            return m;
        }
        return 0.0;
    };
    c.lipschitz = std::max({lip(bt), lip(st), lip(gt)});
    return c;
}

// ---- audits ------------------------------------------------------------------

AuditReport audit_coefficients(const Coefficients& coeffs, const ControlSet& controls,
                               double box, int samples, uint64_t seed) {
    AuditReport rep;
    const int d = coeffs.dim;
    ReplicateRng rng(seed, 0);
    Vec feat(coeffs.feature_functions.size(), 0.0);
    Vec x(d), x2(d), bv(d), bv2(d);
    Vec sv(static_cast<size_t>(d) * coeffs.noise_dim), sv2(sv.size());
    for (int s = 0; s < samples; ++s) {
        UnitStepRng draw(rng, static_cast<uint64_t>(s), 0);
        for (int i = 0; i < d; ++i) {
            x[i] = box * (2.0 * draw.uniform(10 + i) - 1.0);
            x2[i] = box * (2.0 * draw.uniform(20 + i) - 1.0);
        }
        const Vec& a = controls.points[s % std::max(1, controls.size())];
        coeffs.b(x.data(), feat.data(), a.data(), bv.data());
        coeffs.b(x2.data(), feat.data(), a.data(), bv2.data());
        coeffs.sigma(x.data(), feat.data(), a.data(), sv.data());
        coeffs.sigma(x2.data(), feat.data(), a.data(), sv2.data());
        double g = coeffs.gamma(x.data(), feat.data(), a.data());
        double g2 = coeffs.gamma(x2.data(), feat.data(), a.data());
        double bn = 0.0, sn = 0.0, dbn = 0.0, dsn = 0.0, dxn = 0.0;
        for (int i = 0; i < d; ++i) {
            bn = std::max(bn, std::abs(bv[i]));
            dbn = std::max(dbn, std::abs(bv[i] - bv2[i]));
            dxn += (x[i] - x2[i]) * (x[i] - x2[i]);
        }
        for (size_t i = 0; i < sv.size(); ++i) {
            sn = std::max(sn, std::abs(sv[i]));
            dsn = std::max(dsn, std::abs(sv[i] - sv2[i]));
        }
        dxn = std::sqrt(dxn);
        rep.max_abs = std::max({rep.max_abs, bn, sn, std::abs(g)});
        if (bn > coeffs.bound_b + 1e-12 || sn > coeffs.bound_sigma + 1e-12 ||
            std::abs(g) > coeffs.bound_gamma + 1e-12)
            rep.within_bounds = false;
        if (dxn > 1e-9) {
            double ratio = std::max({dbn, dsn, std::abs(g - g2)}) / dxn;
            rep.max_lipschitz_ratio = std::max(rep.max_lipschitz_ratio, ratio);
        }
    }
    return rep;
}

bool audit_cost_growth(const CostSpec& cost, const SeparatingFamily& fam,
                       const ControlSet& controls, double box, int samples, uint64_t seed) {
    ReplicateRng rng(seed, 1);
    const double C = cost.growth_constant;
    for (int s = 0; s < samples; ++s) {
        UnitStepRng draw(rng, static_cast<uint64_t>(s), 0);
        // random atomic measure: level 1..8, up to 6 atoms in [-box, box]
        long long level = 1 + static_cast<long long>(draw.uniform(1) * 8.0);
        int atoms = 1 + static_cast<int>(draw.uniform(2) * 6.0);
        std::vector<double> coords;
        std::vector<long long> mult;
        for (int i = 0; i < atoms; ++i) {
            coords.push_back(box * (2.0 * draw.uniform(3 + 2 * i) - 1.0));
            mult.push_back(1 + static_cast<long long>(draw.uniform(4 + 2 * i) * 3.0));
        }
        AtomicMeasure mu(1, level, coords, mult);
        double dist = distance_to_zero(mu, fam);
        double term = std::abs(cost.terminal(mu));
        if (term > C * (1.0 + dist * dist) + 1e-9) return false;
        Vec feat(0);
        double x = box * (2.0 * draw.uniform(0) - 1.0);
        const Vec& a = controls.points[s % std::max(1, controls.size())];
        double psi = std::abs(cost.psi(&x, feat.data(), a.data()));
        if (psi > C * (1.0 + dist) + 1e-9) return false;
    }
    return true;
}

}  // namespace branchlab
