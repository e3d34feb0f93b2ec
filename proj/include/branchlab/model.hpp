#pragma once
// Model data: controlled coefficients (drift, diffusion, branching rate), the
// finite control set, feedback policies, and cost specifications. Coefficients
// may depend on the measure only through a fixed list of feature pairings,
// computed once per step from the pre-step measure.

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "branchlab/calculus.hpp"
#include "branchlab/measure.hpp"
#include "branchlab/test_function.hpp"
#include "branchlab/util.hpp"

namespace branchlab {

struct ControlSet {
    int action_dim = 1;
    std::vector<Vec> points;  // finite, enumerated exhaustively by the solver

    int size() const { return static_cast<int>(points.size()); }
};

struct Coefficients {
    int dim = 1;        // state dimension d
    int noise_dim = 1;  // driving-noise dimension d'
    int action_dim = 1;

    std::vector<TestFunction> feature_functions;  // measure enters only through these

    // signatures: (x, features, action) -> value
    std::function<void(const double*, const double*, const double*, double*)> b;      // dim
    std::function<void(const double*, const double*, const double*, double*)> sigma;  // dim*noise_dim
    std::function<double(const double*, const double*, const double*)> gamma;

    // declared bounds; the simulator derives the thinning guard from
    // bound_gamma and the PDE solver derives its CFL bound from bound_b and
    // bound_sigma, so these must genuinely dominate the coefficient ranges
    double bound_b = 0.0;
    double bound_sigma = 0.0;
    double bound_gamma = 1.0;
    double lipschitz = 0.0;  // declared joint Lipschitz constant (audited in tests)

    // fast-path hints filled by the builders; purely an optimization, the
    // generic closures above remain authoritative
    bool b_is_zero = false;
    bool sigma_is_zero = false;
    std::optional<double> gamma_const;
};

// feature vector (pairings of the feature functions against mu)
Vec features(const AtomicMeasure& mu, const Coefficients& coeffs);

struct FeedbackPolicy {
    std::string name;
    int action_dim = 1;
    // (t, x, features) -> action
    std::function<void(double, const double*, const double*, double*)> action;
    std::optional<Vec> const_action;  // fast path when the policy is constant
};

FeedbackPolicy constant_policy(const Vec& a, const std::string& name = "constant");

struct CostSpec {
    // running cost psi(x, features, action), integrated against mu_s ds
    std::function<double(const double*, const double*, const double*)> psi;
    bool psi_is_zero = true;
    CylindricalFunction terminal;  // Psi(mu_T), cylindrical composition of pairings
    double growth_constant = 1.0;  // declared C in the linear/quadratic growth bounds
};

CostSpec zero_running_exp_terminal(const TestFunction& h, double theta = 1.0);

// ---- coefficient builders ---------------------------------------------------

// constant vector / matrix / scalar coefficients
Coefficients make_coefficients_const(int dim, int noise_dim, int action_dim,
                                     const Vec& b_val, double sigma_scalar, double gamma_val);
// named-builtin construction from a one-line spec, e.g. "constant 0",
// "affine 0.5 -1", "action", "action_scale 2", "table 0:1,1:2",
// "feature 0 1 0.5"; shared by the config layer and tests
struct CoefficientTerm {
    std::string spec;
};
Coefficients make_coefficients(int dim, int noise_dim, int action_dim,
                               const std::string& b_spec, const std::string& sigma_spec,
                               const std::string& gamma_spec,
                               std::vector<TestFunction> feature_functions = {},
                               const ControlSet* controls = nullptr);

// empirical audits used by property tests: sample random inputs and check the
// declared bounds / Lipschitz constant dominate the observed values
struct AuditReport {
    double max_abs = 0.0;
    double max_lipschitz_ratio = 0.0;
    bool within_bounds = true;
};
AuditReport audit_coefficients(const Coefficients& coeffs, const ControlSet& controls,
                               double box, int samples, uint64_t seed);
// growth audit for costs: |psi| <= C(1 + d(lambda,0)), |Psi| <= C(1 + d^2)
bool audit_cost_growth(const CostSpec& cost, const SeparatingFamily& fam,
                       const ControlSet& controls, double box, int samples, uint64_t seed);

}  // namespace branchlab
