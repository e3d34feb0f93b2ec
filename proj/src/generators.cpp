#include "branchlab/generators.hpp"

#include <cmath>

namespace branchlab {

double generator_L(const Coefficients& coeffs, const TestFunction& phi, const double* x,
                   const double* feat, const double* a) {
    const int d = coeffs.dim;
    const int dn = coeffs.noise_dim;
    Vec bv(d), g(d), s(static_cast<size_t>(d) * dn), h(static_cast<size_t>(d) * d);
    coeffs.b(x, feat, a, bv.data());
    coeffs.sigma(x, feat, a, s.data());
    phi.gradient(x, g.data());
    phi.hessian(x, h.data());
    double v = dot(bv.data(), g.data(), d);
    // 0.5 Tr(sigma sigma^T D^2 phi) = 0.5 sum_{i,j,k} s_ik s_jk h_ij
    double tr = 0.0;
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
            double ss = 0.0;
            for (int k = 0; k < dn; ++k) ss += s[static_cast<size_t>(i) * dn + k] * s[static_cast<size_t>(j) * dn + k];
            tr += ss * h[static_cast<size_t>(i) * d + j];
        }
    return v + 0.5 * tr;
}

double grad_sigma_sq(const Coefficients& coeffs, const TestFunction& phi, const double* x,
                     const double* feat, const double* a) {
    const int d = coeffs.dim;
    const int dn = coeffs.noise_dim;
    Vec g(d), s(static_cast<size_t>(d) * dn);
    phi.gradient(x, g.data());
    coeffs.sigma(x, feat, a, s.data());
    double out = 0.0;
    for (int k = 0; k < dn; ++k) {
        double c = 0.0;
        for (int i = 0; i < d; ++i) c += g[i] * s[static_cast<size_t>(i) * dn + k];
        out += c * c;
    }
    return out;
}

double apply_L_n(const ScalarOuter& F, const TestFunction& phi, const Coefficients& coeffs,
                 const AtomicMeasure& lambda, const double* x, const double* a, long long n) {
    if (F.arity != 1) throw config_error("apply_L_n: outer map must be scalar");
    Vec feat = features(lambda, coeffs);
    const double y = pair(phi, lambda);
    double g1, g2;
    F.gradient(&y, &g1);
    F.hessian(&y, &g2);
    const double gam = coeffs.gamma(x, feat.data(), a);
    const double phix = phi.value(x);
    const double nn = static_cast<double>(n);
    const double ym = y - phix / nn, yp = y + phix / nn;
    const double jump = gam * nn * nn * (0.5 * F.value(&ym) + 0.5 * F.value(&yp) - F.value(&y));
    return g1 * generator_L(coeffs, phi, x, feat.data(), a) +
           (0.5 / nn) * g2 * grad_sigma_sq(coeffs, phi, x, feat.data(), a) + jump;
}

double apply_L_limit(const ScalarOuter& F, const TestFunction& phi, const Coefficients& coeffs,
                     const AtomicMeasure& lambda, const double* x, const double* a) {
    if (F.arity != 1) throw config_error("apply_L_limit: outer map must be scalar");
    Vec feat = features(lambda, coeffs);
    const double y = pair(phi, lambda);
    double g1, g2;
    F.gradient(&y, &g1);
    F.hessian(&y, &g2);
    const double gam = coeffs.gamma(x, feat.data(), a);
    const double phix = phi.value(x);
    return g1 * generator_L(coeffs, phi, x, feat.data(), a) + 0.5 * g2 * gam * phix * phix;
}

double apply_bold_L(const CylindricalFunction& u, const Coefficients& coeffs,
                    const AtomicMeasure& lambda, const double* x, const double* a) {
    const int d = coeffs.dim;
    const int dn = coeffs.noise_dim;
    Vec feat = features(lambda, coeffs);
    Vec bv(d), Du(d), s(static_cast<size_t>(d) * dn), J(static_cast<size_t>(d) * d);
    coeffs.b(x, feat.data(), a, bv.data());
    coeffs.sigma(x, feat.data(), a, s.data());
    intrinsic_derivative(u, lambda, x, Du.data());
    intrinsic_derivative_jacobian(u, lambda, x, J.data());
    double v = dot(bv.data(), Du.data(), d);
    double tr = 0.0;
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
            double ss = 0.0;
            for (int k = 0; k < dn; ++k) ss += s[static_cast<size_t>(i) * dn + k] * s[static_cast<size_t>(j) * dn + k];
            tr += ss * J[static_cast<size_t>(i) * d + j];
        }
    const double gam = coeffs.gamma(x, feat.data(), a);
    return v + 0.5 * tr + 0.5 * gam * second_flat_derivative(u, lambda, x, x);
}

}  // namespace branchlab
