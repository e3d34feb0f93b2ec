#pragma once
// The generator hierarchy:
//   generator_L    single-particle diffusion generator applied to phi
//   apply_L_n      level-n system generator on F(<phi, lambda>): diffusion
//                  part, 1/(2n) Ito correction, and the exact width-phi/n
//                  birth/death difference term
//   apply_L_limit  its n -> infinity limit F'L phi + (1/2) F'' gamma phi^2
//   apply_bold_L   the generalized generator written through intrinsic and
//                  second flat derivatives of a cylindrical u; must agree with
//                  apply_L_limit to rounding on cylindrical inputs
// All evaluations are at a fixed action a and frozen features of lambda.

#include "branchlab/calculus.hpp"
#include "branchlab/measure.hpp"
#include "branchlab/model.hpp"
#include "branchlab/test_function.hpp"

namespace branchlab {

// b(x,.,a) . Dphi(x) + 0.5 Tr(sigma sigma^T D^2 phi)(x)
double generator_L(const Coefficients& coeffs, const TestFunction& phi, const double* x,
                   const double* feat, const double* a);

// |Dphi(x)^T sigma(x,.,a)|^2, the Ito-correction kernel
double grad_sigma_sq(const Coefficients& coeffs, const TestFunction& phi, const double* x,
                     const double* feat, const double* a);

double apply_L_n(const ScalarOuter& F, const TestFunction& phi, const Coefficients& coeffs,
                 const AtomicMeasure& lambda, const double* x, const double* a, long long n);

double apply_L_limit(const ScalarOuter& F, const TestFunction& phi, const Coefficients& coeffs,
                     const AtomicMeasure& lambda, const double* x, const double* a);

double apply_bold_L(const CylindricalFunction& u, const Coefficients& coeffs,
                    const AtomicMeasure& lambda, const double* x, const double* a);

}  // namespace branchlab
