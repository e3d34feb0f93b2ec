#pragma once
// Monte Carlo estimators and the statistical checks built on them: policy
// cost evaluation, value-function verification, dynamic-programming
// consistency, moment-bound ratios across initial masses, and the
// finite-level variance scaling study.

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "branchlab/hjb.hpp"
#include "branchlab/sim.hpp"

namespace branchlab {

struct Estimate {
    double mean = 0.0;
    double std_error = 0.0;
    long long replicates = 0;  // used (non-censored)
    long long censored = 0;

    double half_width(double z = 3.0) const { return z * std_error; }
};

Estimate summarize(const std::vector<double>& xs, long long censored = 0);

// sample variance with a delta-method standard error sqrt((m4 - v^2)/m)
struct VarianceEstimate {
    double variance = 0.0;
    double std_error = 0.0;
    long long replicates = 0;
};

VarianceEstimate summarize_variance(const std::vector<double>& xs);

// simulate and reduce each non-censored replicate to one scalar
Estimate estimate_scalar(const SimConfig& cfg, const Coefficients& coeffs,
                         const FeedbackPolicy& policy, const AtomicMeasure& lambda0,
                         const RecordSpec& record,
                         const std::function<double(const TrajectoryRecord&)>& reduce);

// E[ int psi(x, feat, a) dmu dr + Psi(mu_T) ] under the given feedback policy
Estimate evaluate_cost(const SimConfig& cfg, const Coefficients& coeffs, const CostSpec& cost,
                       const FeedbackPolicy& policy, const AtomicMeasure& lambda0);

// ---- verification of the pde value against simulated policies ---------------

struct PolicyValue {
    std::string name;
    Estimate j;
    double gap_from_value = 0.0;  // j.mean - value
    bool consistent = false;      // j.mean >= value - 3 SE - kappa/level
};

struct VerifyReport {
    double value = 0.0;  // exp(-<w(t0,.), lambda>) read off the solved surface
    Estimate j_candidate;
    double tolerance = 0.0;  // 3 SE + kappa/level
    bool candidate_ok = false;
    std::vector<PolicyValue> alternatives;
    bool pass = false;
};

// candidate policy is extracted from the surface; alternatives are (name,
// policy) pairs that must not beat the value beyond noise + scheme bias
VerifyReport verify_optimality(const ValueSurface& surface, const SimConfig& cfg,
                               const Coefficients& coeffs, const CostSpec& cost,
                               const AtomicMeasure& lambda0,
                               const std::vector<std::pair<std::string, FeedbackPolicy>>& alts,
                               double kappa);

// ---- dynamic programming consistency at a deterministic intermediate time ---

struct DppReport {
    double value_start = 0.0;  // v(t0, lambda)
    Estimate continuation;     // E[ running cost on [t0,tau] + v(tau, mu_tau) ]
    double tau = 0.0;
    double tolerance = 0.0;  // 3 SE + kappa/level
    bool pass = false;
};

DppReport dpp_check(const ValueSurface& surface, const SimConfig& cfg,
                    const Coefficients& coeffs, const CostSpec& cost,
                    const AtomicMeasure& lambda0, double tau, double kappa);

// ---- moment bound: E[sup_r d(mu_r, 0)] across a ladder of initial masses ----

struct MomentLadderRow {
    double mass0 = 0.0;
    double initial_distance = 0.0;
    Estimate sup_distance;
    double ratio = 0.0;  // sup_distance.mean / initial_distance
};

struct MomentBoundReport {
    std::vector<MomentLadderRow> rows;
    double spread = 0.0;  // max ratio / min ratio
    double threshold = 0.0;
    bool all_finite = false;
    bool pass = false;
};

MomentBoundReport moment_bound_check(const SimConfig& cfg, const Coefficients& coeffs,
                                     const FeedbackPolicy& policy, const SeparatingFamily& family,
                                     const std::vector<double>& masses, double threshold);

// ---- variance scaling in the level: Var_n(<phi, mu_T>) = v_inf + c/n --------

struct ScalingRow {
    long long level = 0;
    VarianceEstimate var;
};

struct ScalingReport {
    std::vector<ScalingRow> rows;
    double v_inf = 0.0;
    double slope = 0.0;     // fitted c
    double slope_se = 0.0;  // propagated from the per-level variance errors
    double r_squared = 0.0;
};

ScalingReport convergence_study(const SimConfig& base, const Coefficients& coeffs,
                                const FeedbackPolicy& policy, const MeasureSpec& initial,
                                const TestFunction& phi, const std::vector<long long>& levels);

}  // namespace branchlab
