#include "branchlab/calculus.hpp"

#include <cmath>
#include <sstream>

namespace branchlab {

ScalarOuter outer_identity() {
    ScalarOuter f;
    f.name = "identity";
    f.arity = 1;
    f.value = [](const double* y) { return y[0]; };
    f.gradient = [](const double*, double* g) { g[0] = 1.0; };
    f.hessian = [](const double*, double* h) { h[0] = 0.0; };
    return f;
}

ScalarOuter outer_square() {
    ScalarOuter f;
    f.name = "square";
    f.arity = 1;
    f.value = [](const double* y) { return y[0] * y[0]; };
    f.gradient = [](const double* y, double* g) { g[0] = 2.0 * y[0]; };
    f.hessian = [](const double*, double* h) { h[0] = 2.0; };
    return f;
}

ScalarOuter outer_exp_neg(double theta) {
    ScalarOuter f;
    std::ostringstream name;
    name << "exp_neg(" << format_double(theta) << ")";
    f.name = name.str();
    f.arity = 1;
    f.value = [theta](const double* y) { return std::exp(-theta * y[0]); };
    f.gradient = [theta](const double* y, double* g) { g[0] = -theta * std::exp(-theta * y[0]); };
    f.hessian = [theta](const double* y, double* h) { h[0] = theta * theta * std::exp(-theta * y[0]); };
    return f;
}

ScalarOuter outer_poly_exp(double c, Vec a, Mat Q, double alpha, Vec beta) {
    const int p = static_cast<int>(a.size());
    if (Q.rows != p || Q.cols != p || static_cast<int>(beta.size()) != p)
        throw config_error("outer_poly_exp: inconsistent arity");
    ScalarOuter f;
    f.name = "poly_exp";
    f.arity = p;
    f.value = [c, a, Q, alpha, beta, p](const double* y) {
        double v = c + dot(a.data(), y, p);
        for (int i = 0; i < p; ++i)
            for (int j = 0; j < p; ++j) v += 0.5 * Q(i, j) * y[i] * y[j];
        return v + alpha * std::exp(-dot(beta.data(), y, p));
    };
    f.gradient = [a, Q, alpha, beta, p](const double* y, double* g) {
        double e = alpha * std::exp(-dot(beta.data(), y, p));
        for (int i = 0; i < p; ++i) {
            g[i] = a[i] - beta[i] * e;
            for (int j = 0; j < p; ++j) g[i] += 0.5 * (Q(i, j) + Q(j, i)) * y[j];
        }
    };
    f.hessian = [Q, alpha, beta, p](const double* y, double* h) {
        double e = alpha * std::exp(-dot(beta.data(), y, p));
        for (int i = 0; i < p; ++i)
            for (int j = 0; j < p; ++j)
                h[i * p + j] = 0.5 * (Q(i, j) + Q(j, i)) + beta[i] * beta[j] * e;
    };
    return f;
}

Vec CylindricalFunction::pairings(const AtomicMeasure& mu) const {
    Vec y(inner.size());
    for (size_t j = 0; j < inner.size(); ++j) y[j] = pair(inner[j], mu);
    return y;
}

double CylindricalFunction::operator()(const AtomicMeasure& mu) const {
    Vec y = pairings(mu);
    return outer.value(y.data());
}

CylindricalFunction exp_pairing(const TestFunction& h, double theta) {
    CylindricalFunction u;
    u.outer = outer_exp_neg(theta);
    u.inner = {h};
    return u;
}

double flat_derivative(const CylindricalFunction& u, const AtomicMeasure& lambda, const double* x) {
    Vec y = u.pairings(lambda);
    Vec g(u.arity());
    u.outer.gradient(y.data(), g.data());
    double v = 0.0;
    for (int j = 0; j < u.arity(); ++j) v += g[j] * u.inner[j].value(x);
    return v;
}

double second_flat_derivative(const CylindricalFunction& u, const AtomicMeasure& lambda,
                              const double* x, const double* y_pt) {
    const int p = u.arity();
    Vec y = u.pairings(lambda);
    Vec h(static_cast<size_t>(p) * p);
    u.outer.hessian(y.data(), h.data());
    double v = 0.0;
    for (int j = 0; j < p; ++j)
        for (int k = 0; k < p; ++k)
            v += h[static_cast<size_t>(j) * p + k] * u.inner[j].value(x) * u.inner[k].value(y_pt);
    return v;
}

void intrinsic_derivative(const CylindricalFunction& u, const AtomicMeasure& lambda,
                          const double* x, double* out) {
    const int p = u.arity();
    const int d = lambda.dim;
    Vec y = u.pairings(lambda);
    Vec g(p), grad_f(d);
    u.outer.gradient(y.data(), g.data());
    for (int i = 0; i < d; ++i) out[i] = 0.0;
    for (int j = 0; j < p; ++j) {
        u.inner[j].gradient(x, grad_f.data());
        for (int i = 0; i < d; ++i) out[i] += g[j] * grad_f[i];
    }
}

void intrinsic_derivative_jacobian(const CylindricalFunction& u, const AtomicMeasure& lambda,
                                   const double* x, double* out) {
    // x-derivative of D_lambda u; the pairing arguments of grad F do not move
    // with x, so only the inner Hessians contribute
    const int p = u.arity();
    const int d = lambda.dim;
    Vec y = u.pairings(lambda);
    Vec g(p), hess_f(static_cast<size_t>(d) * d);
    u.outer.gradient(y.data(), g.data());
    for (int i = 0; i < d * d; ++i) out[i] = 0.0;
    for (int j = 0; j < p; ++j) {
        u.inner[j].hessian(x, hess_f.data());
        for (int i = 0; i < d * d; ++i) out[i] += g[j] * hess_f[i];
    }
}

}  // namespace branchlab
