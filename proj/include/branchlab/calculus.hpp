#pragma once
// Cylindrical functions u(lambda) = F(<f_1,lambda>, ..., <f_p,lambda>) and
// their calculus on the measure space:
//   flat derivative        du/dlambda(lambda, x)      = grad F . f(x)
//   second flat derivative d2u/dlambda2(lambda, x, y) = f(y)^T hess F f(x)
//   intrinsic derivative   D_lambda u(lambda, x)      = sum_j d_jF * Df_j(x)
// All derivatives are exact compositions of the declared inner/outer
// derivatives; finite differences only appear in test oracles.

#include <functional>
#include <string>
#include <vector>

#include "branchlab/measure.hpp"
#include "branchlab/test_function.hpp"
#include "branchlab/util.hpp"

namespace branchlab {

// C^2 outer map F: R^arity -> R with explicit derivatives
struct ScalarOuter {
    std::string name;
    int arity = 1;
    std::function<double(const double*)> value;
    std::function<void(const double*, double*)> gradient;  // arity entries
    std::function<void(const double*, double*)> hessian;   // arity*arity, row-major
};

// builtin outers
ScalarOuter outer_identity();                       // F(y) = y
ScalarOuter outer_square();                         // F(y) = y^2
ScalarOuter outer_exp_neg(double theta = 1.0);      // F(y) = exp(-theta*y)
// F(y) = c + a.y + 0.5*y^T Q y + alpha*exp(-beta.y); covers all the above and
// is the generator for randomized calculus tests
ScalarOuter outer_poly_exp(double c, Vec a, Mat Q, double alpha, Vec beta);

struct CylindricalFunction {
    ScalarOuter outer;
    std::vector<TestFunction> inner;

    int arity() const { return static_cast<int>(inner.size()); }
    Vec pairings(const AtomicMeasure& mu) const;
    double operator()(const AtomicMeasure& mu) const;
};

// u(lambda) = exp(-<h, lambda>), the terminal cost of the exponential family
CylindricalFunction exp_pairing(const TestFunction& h, double theta = 1.0);

double flat_derivative(const CylindricalFunction& u, const AtomicMeasure& lambda, const double* x);
double second_flat_derivative(const CylindricalFunction& u, const AtomicMeasure& lambda,
                              const double* x, const double* y);
// writes dim entries
void intrinsic_derivative(const CylindricalFunction& u, const AtomicMeasure& lambda,
                          const double* x, double* out);
// spatial Jacobian of the intrinsic derivative, dim*dim row-major
void intrinsic_derivative_jacobian(const CylindricalFunction& u, const AtomicMeasure& lambda,
                                   const double* x, double* out);

}  // namespace branchlab
