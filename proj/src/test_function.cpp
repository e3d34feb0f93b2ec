#include "branchlab/test_function.hpp"

#include <cmath>
#include <sstream>

namespace branchlab {

double pair(const TestFunction& phi, const AtomicMeasure& mu) {
    if (phi.dim != mu.dim) throw config_error("pair: dimension mismatch");
    KahanSum s;
    for (int i = 0; i < mu.atom_count(); ++i)
        s.add(static_cast<double>(mu.mult[i]) * phi.value(mu.atom(i)));
    return s.value() / static_cast<double>(mu.level);
}

// ---- builtin test functions ------------------------------------------------

TestFunction tf_constant(int dim, double c) {
    TestFunction f;
    std::ostringstream name;
    name << "constant(" << format_double(c) << ")";
    f.name = name.str();
    f.dim = dim;
    f.value = [c](const double*) { return c; };
    f.gradient = [dim](const double*, double* g) {
        for (int j = 0; j < dim; ++j) g[j] = 0.0;
    };
    f.hessian = [dim](const double*, double* h) {
        for (int j = 0; j < dim * dim; ++j) h[j] = 0.0;
    };
    f.sup_norm = std::abs(c);
    return f;
}

TestFunction tf_gaussian(int dim, const Vec& center, double scale, double height) {
    if (static_cast<int>(center.size()) != dim) throw config_error("tf_gaussian: bad center");
    if (scale <= 0.0) throw config_error("tf_gaussian: scale must be positive");
    TestFunction f;
    std::ostringstream name;
    name << "gaussian(c=";
    for (int j = 0; j < dim; ++j) name << (j ? "," : "") << format_double(center[j]);
    name << ";s=" << format_double(scale) << ";h=" << format_double(height) << ")";
    f.name = name.str();
    f.dim = dim;
    const double inv_s2 = 1.0 / (scale * scale);
    f.value = [center, inv_s2, height, dim](const double* x) {
        double r2 = 0.0;
        for (int j = 0; j < dim; ++j) r2 += (x[j] - center[j]) * (x[j] - center[j]);
        return height * std::exp(-r2 * inv_s2);
    };
    f.gradient = [center, inv_s2, height, dim](const double* x, double* g) {
        double r2 = 0.0;
        for (int j = 0; j < dim; ++j) r2 += (x[j] - center[j]) * (x[j] - center[j]);
        double v = height * std::exp(-r2 * inv_s2);
        for (int j = 0; j < dim; ++j) g[j] = -2.0 * inv_s2 * (x[j] - center[j]) * v;
    };
    f.hessian = [center, inv_s2, height, dim](const double* x, double* h) {
        double r2 = 0.0;
        for (int j = 0; j < dim; ++j) r2 += (x[j] - center[j]) * (x[j] - center[j]);
        double v = height * std::exp(-r2 * inv_s2);
        for (int i = 0; i < dim; ++i)
            for (int j = 0; j < dim; ++j) {
                double t = 4.0 * inv_s2 * inv_s2 * (x[i] - center[i]) * (x[j] - center[j]) * v;
                if (i == j) t -= 2.0 * inv_s2 * v;
                h[i * dim + j] = t;
            }
    };
    f.sup_norm = std::abs(height);
    return f;
}

TestFunction tf_coordinate(int dim, int axis, double box) {
    // identity on [-box, box]; outside, the slope tapers 1 -> 0 over one
    // box width through the C^2 profile 1 - 3u^2 + 2u^3 (u = dist/box), so
    // the function saturates at +-1.5*box with bounded derivatives
    TestFunction f;
    std::ostringstream name;
    name << "coordinate(axis=" << axis << ";box=" << format_double(box) << ")";
    f.name = name.str();
    f.dim = dim;
    auto val1 = [box](double t) {
        double a = std::abs(t), sign = t < 0.0 ? -1.0 : 1.0;
        if (a <= box) return t;
        double u = std::min((a - box) / box, 1.0);
        return sign * (box + box * (u - u * u * u + 0.5 * u * u * u * u));
    };
    auto d1 = [box](double t) {
        double a = std::abs(t);
        if (a <= box) return 1.0;
        double u = (a - box) / box;
        if (u >= 1.0) return 0.0;
        return 1.0 - 3.0 * u * u + 2.0 * u * u * u;
    };
    auto c1 = [box](double t) {
        double a = std::abs(t), sign = t < 0.0 ? -1.0 : 1.0;
        if (a <= box) return 0.0;
        double u = (a - box) / box;
        if (u >= 1.0) return 0.0;
        return sign * (-6.0 * u + 6.0 * u * u) / box;
    };
    f.value = [axis, val1](const double* x) { return val1(x[axis]); };
    f.gradient = [axis, d1, dim](const double* x, double* g) {
        for (int j = 0; j < dim; ++j) g[j] = 0.0;
        g[axis] = d1(x[axis]);
    };
    f.hessian = [axis, c1, dim](const double* x, double* h) {
        for (int j = 0; j < dim * dim; ++j) h[j] = 0.0;
        h[axis * dim + axis] = c1(x[axis]);
    };
    f.sup_norm = 1.5 * box;
    return f;
}

TestFunction tf_square(int dim, int axis, double box) {
    // x^2 on [-box, box]; outside, the second derivative tapers linearly
    // 2 -> 0 over one box width (C^2 overall), after which the value grows
    // affinely with slope 3*box; first and second derivatives stay bounded
    TestFunction f;
    std::ostringstream name;
    name << "square(axis=" << axis << ";box=" << format_double(box) << ")";
    f.name = name.str();
    f.dim = dim;
    auto val1 = [box](double t) {
        double a = std::abs(t);
        if (a <= box) return t * t;
        double s = std::min(a - box, box);
        double v = box * box + 2.0 * box * s + s * s - s * s * s / (3.0 * box);
        if (a > 2.0 * box) v += (a - 2.0 * box) * 3.0 * box;
        return v;
    };
    auto d1 = [box](double t) {
        double a = std::abs(t), sign = t < 0.0 ? -1.0 : 1.0;
        if (a <= box) return 2.0 * t;
        double s = std::min(a - box, box);
        return sign * (2.0 * box + 2.0 * s - s * s / box);
    };
    auto c1 = [box](double t) {
        double a = std::abs(t);
        if (a <= box) return 2.0;
        double s = a - box;
        if (s >= box) return 0.0;
        return 2.0 - 2.0 * s / box;
    };
    f.value = [axis, val1](const double* x) { return val1(x[axis]); };
    f.gradient = [axis, d1, dim](const double* x, double* g) {
        for (int j = 0; j < dim; ++j) g[j] = 0.0;
        g[axis] = d1(x[axis]);
    };
    f.hessian = [axis, c1, dim](const double* x, double* h) {
        for (int j = 0; j < dim * dim; ++j) h[j] = 0.0;
        h[axis * dim + axis] = c1(x[axis]);
    };
    f.sup_norm = (11.0 / 3.0) * box * box;  // value where the taper ends
    return f;
}

// ---- grid norms and family -------------------------------------------------

namespace {

// iterate an axis-aligned grid over [lo,hi]^dim; dim is small (<= 3 in use)
template <typename F>
void for_grid(int dim, double lo, double hi, int points, F&& body) {
    std::vector<int> idx(dim, 0);
    std::vector<double> x(dim, 0.0);
    const double step = (hi - lo) / static_cast<double>(points - 1);
    while (true) {
        for (int j = 0; j < dim; ++j) x[j] = lo + step * idx[j];
        body(x.data());
        int j = 0;
        for (; j < dim; ++j) {
            if (++idx[j] < points) break;
            idx[j] = 0;
        }
        if (j == dim) break;
    }
}

}  // namespace

double grid_sup_grad(const TestFunction& phi, double box_min, double box_max, int points) {
    double best = 0.0;
    std::vector<double> g(phi.dim);
    for_grid(phi.dim, box_min, box_max, points, [&](const double* x) {
        phi.gradient(x, g.data());
        double n2 = dot(g.data(), g.data(), phi.dim);
        if (n2 > best) best = n2;
    });
    return std::sqrt(best);
}

double grid_sup_hess(const TestFunction& phi, double box_min, double box_max, int points) {
    double best = 0.0;
    std::vector<double> h(static_cast<size_t>(phi.dim) * phi.dim);
    for_grid(phi.dim, box_min, box_max, points, [&](const double* x) {
        phi.hessian(x, h.data());
        double n2 = dot(h.data(), h.data(), phi.dim * phi.dim);  // Frobenius
        if (n2 > best) best = n2;
    });
    return std::sqrt(best);
}

SeparatingFamily make_family(std::vector<TestFunction> members, double box_min,
                             double box_max, int box_points) {
    if (members.empty()) throw config_error("family: needs at least one member");
    if (box_points < 3) throw config_error("family: box_points too small");
    SeparatingFamily fam;
    fam.members = std::move(members);
    fam.box_min = box_min;
    fam.box_max = box_max;
    fam.box_points = box_points;
    for (const auto& m : fam.members) {
        double qd = grid_sup_grad(m, box_min, box_max, box_points);
        double qh = grid_sup_hess(m, box_min, box_max, box_points);
        fam.q.push_back(std::max({1.0, qd, qh}));
    }
    return fam;
}

SeparatingFamily default_family(int dim, const std::vector<double>& centers,
                                const std::vector<double>& scales, double box_min,
                                double box_max, int box_points) {
    if (centers.size() != scales.size()) throw config_error("family: centers/scales mismatch");
    std::vector<TestFunction> members;
    members.push_back(tf_constant(dim, 1.0));
    for (size_t k = 0; k < centers.size(); ++k) {
        Vec c(static_cast<size_t>(dim), 0.0);
        c[0] = centers[k];  // centers placed along the first axis
        members.push_back(tf_gaussian(dim, c, scales[k]));
    }
    return make_family(std::move(members), box_min, box_max, box_points);
}

SeparatingFamily default_family(int dim) {
    // truncation 8: constant + 7 gaussians, centers on a small symmetric grid
    // plus a narrow and a wide bump at the origin
    return default_family(dim, {0.0, -1.0, 1.0, -2.0, 2.0, 0.0, 0.0},
                          {1.0, 1.0, 1.0, 1.0, 1.0, 0.5, 2.0});
}

std::string SeparatingFamily::fingerprint() const {
    std::ostringstream ss;
    ss << box_min << "|" << box_max << "|" << box_points;
    for (int k = 0; k < size(); ++k) ss << "|" << members[k].name << "@" << format_double(q[k]);
    return hex64(fnv1a64(ss.str()));
}

double distance(const AtomicMeasure& mu, const AtomicMeasure& nu, const SeparatingFamily& fam) {
    double d = 0.0, w = 1.0;
    for (int k = 0; k < fam.size(); ++k, w *= 0.5)
        d += w / fam.q[k] * std::abs(pair(fam.members[k], mu) - pair(fam.members[k], nu));
    return d;
}

double distance_to_zero(const AtomicMeasure& mu, const SeparatingFamily& fam) {
    double d = 0.0, w = 1.0;
    for (int k = 0; k < fam.size(); ++k, w *= 0.5)
        d += w / fam.q[k] * std::abs(pair(fam.members[k], mu));
    return d;
}

}  // namespace branchlab
