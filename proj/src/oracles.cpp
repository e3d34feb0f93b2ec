#include "branchlab/oracles.hpp"

#include <cmath>

namespace branchlab::oracles {

double riccati_w(double theta, double gamma, double tau) {
    if (theta < 0.0 || tau < 0.0) throw domain_error("riccati_w: theta and tau must be >= 0");
    return theta / (1.0 + 0.5 * gamma * theta * tau);
}

double feller_laplace(double theta, double gamma, double T, double mass0) {
    return std::exp(-mass0 * riccati_w(theta, gamma, T));
}

double feller_extinction_prob(double gamma, double T, double mass0) {
    if (gamma <= 0.0 || T <= 0.0) return mass0 > 0.0 ? 0.0 : 1.0;
    return std::exp(-2.0 * mass0 / (gamma * T));
}

double heat_gaussian(double height, double center, double scale, double sigma, double tau,
                     double x) {
    // exp(-(x-c)^2/s^2) has variance parameter v0 = s^2/2; the flow adds
    // sigma^2 tau and rescales the amplitude by sqrt(v0 / (v0 + sigma^2 tau))
    const double v0 = 0.5 * scale * scale;
    const double v = v0 + sigma * sigma * tau;
    const double d = x - center;
    return height * std::sqrt(v0 / v) * std::exp(-0.5 * d * d / v);
}

double heat_convolution(const TestFunction& h, double sigma, double tau, double x) {
    if (h.dim != 1) throw domain_error("heat_convolution: dim 1 only");
    const double sd = sigma * std::sqrt(tau);
    if (sd == 0.0) return h.value(&x);
    // simpson over z in [-10, 10] standard deviations; integrand decays like
    // exp(-50) at the ends so truncation is far below round-off
    const int m = 4000;  // subintervals, even
    const double z0 = -10.0, z1 = 10.0;
    const double dz = (z1 - z0) / m;
    KahanSum s;
    for (int i = 0; i <= m; ++i) {
        const double z = z0 + i * dz;
        const double y = x + sd * z;
        const double wgt = (i == 0 || i == m) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
        s.add(wgt * h.value(&y) * std::exp(-0.5 * z * z));
    }
    return s.value() * dz / 3.0 / std::sqrt(2.0 * std::acos(-1.0));
}

double scheme_laplace(int level, double gamma, double dt, int steps, double theta,
                      long long units0) {
    if (level < 1 || steps < 0) throw domain_error("scheme_laplace: bad arguments");
    const double q = -std::expm1(-static_cast<double>(level) * gamma * dt);
    // s_k = E[s^{descendants of one unit after k steps}] at s = exp(-theta/level)
    double s = std::exp(-theta / static_cast<double>(level));
    for (int k = 0; k < steps; ++k) s = (1.0 - q) * s + q * (0.5 + 0.5 * s * s);
    return std::pow(s, static_cast<double>(units0));
}

double scheme_mass_variance(int level, double gamma, double dt, double T, double mass0) {
    // one unit, one step: offspring in {0,1,2} with mean 1 and variance q, so
    // after k steps the count variance is k q; units are independent and each
    // carries mass 1/level
    const double q = -std::expm1(-static_cast<double>(level) * gamma * dt);
    const double k = T / dt;
    return mass0 * k * q / static_cast<double>(level);
}

double qv_ratio_quadratic(int level, double gamma, double T, double mass0) {
    // moments of the continuous-time mass m_t (jumps +-1/level at total rate
    // level^2 gamma m): E m = m0, E m^2 = m0^2 + gamma m0 t,
    // E m^3 = m0^3 + 3 gamma m0^2 t + 3/2 gamma^2 m0 t^2.
    // realized bracket rate: gamma (4 m^3 + m / level^2); reported
    // compensator rate: 4 gamma m^3. integrate both over [0, T].
    const double m0 = mass0;
    const double int_m = m0 * T;
    const double int_m3 =
        m0 * m0 * m0 * T + 1.5 * gamma * m0 * m0 * T * T + 0.5 * gamma * gamma * m0 * T * T * T;
    const double num = gamma * (4.0 * int_m3 + int_m / (static_cast<double>(level) * level));
    const double den = 4.0 * gamma * int_m3;
    return num / den;
}

}  // namespace branchlab::oracles
