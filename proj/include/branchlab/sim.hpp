#pragma once
// Discrete-time scheme for the level-n interacting particle system.
//
// One step, per unit of mass 1/n (multiplicities expanded):
//   1. read the action from the feedback policy at the pre-move location,
//      with the feature vector frozen at the pre-step measure,
//   2. Euler-Maruyama move x += b dt + sigma sqrt(dt) xi,
//   3. with probability 1 - exp(-n gamma dt) a branching event fires: the
//      unit dies or splits into two (probability 1/2 each); offspring appear
//      at the parent's post-move location.
// At most one event per unit per step; configs must keep n*gamma*dt <= guard
// (0.1) so the thinning stays faithful. Randomness is counter-based (rng.hpp),
// so trajectories are a pure function of (seed, replicate) and never depend on
// thread scheduling.

#include <atomic>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "branchlab/calculus.hpp"
#include "branchlab/measure.hpp"
#include "branchlab/model.hpp"
#include "branchlab/rng.hpp"
#include "branchlab/test_function.hpp"
#include "branchlab/util.hpp"

namespace branchlab {

struct SimConfig {
    long long level = 1;
    double t0 = 0.0;
    double horizon = 1.0;  // simulate on [t0, t0 + horizon]
    double dt = 1e-3;
    uint64_t seed = 20260815;
    long long replicates = 10000;
    double mass_cap_factor = 1000.0;  // censor when units exceed factor * initial units
    double thinning_guard = 0.1;      // upper bound on level * bound_gamma * dt
    int workers = 1;

    long long steps() const;  // horizon/dt, validated to be integral
};

// per-step recording of F(<phi,mu>), the generator compensator integrand
// int L_n F_phi(mu, x) mu(dx), and the quadratic-variation integrand
// (F')^2 int [ (1/n)|Dphi sigma|^2 + gamma phi^2 ] dmu
struct DiagnosticSpec {
    ScalarOuter F;
    TestFunction phi;
};

struct RecordSpec {
    bool per_step = false;  // otherwise only the initial and terminal rows
    bool mass = true;
    std::vector<TestFunction> pairings;
    const SeparatingFamily* family = nullptr;  // record all family pairings
    std::optional<DiagnosticSpec> diagnostic;
    const CostSpec* cost = nullptr;  // accumulate the running-cost integral
    bool keep_final_measure = true;
};

struct TrajectoryRecord {
    uint64_t replicate = 0;
    std::vector<double> times;
    std::vector<std::string> columns;
    std::vector<Vec> values;  // values[c][row]
    AtomicMeasure final_measure;
    double extinct_at = std::numeric_limits<double>::quiet_NaN();
    bool censored = false;
    long long births = 0, deaths = 0;
    double running_cost_integral = 0.0;

    int column_index(const std::string& name) const;
};

// flat unit representation used inside one replicate
struct SimState {
    int dim = 1;
    long long level = 1;
    double t = 0.0;
    std::vector<double> x;      // units * dim
    std::vector<uint64_t> ids;  // deterministic unit labels feeding the rng
    uint64_t next_id = 0;

    long long units() const { return static_cast<long long>(ids.size()); }
    double mass() const { return static_cast<double>(units()) / static_cast<double>(level); }
    AtomicMeasure to_measure() const;
    static SimState from_measure(const AtomicMeasure& mu, double t);
};

struct StepCounters {
    long long births = 0, deaths = 0;
};

// advance one step; frozen_features must be the feature vector of the
// pre-step measure (empty when the coefficients are measure-free)
void step(SimState& state, long long step_index, double dt, const Coefficients& coeffs,
          const FeedbackPolicy& policy, const Vec& frozen_features, const ReplicateRng& rng,
          StepCounters& counters);

// full replicate; validates the thinning guard and level consistency
TrajectoryRecord simulate_one(const SimConfig& cfg, const Coefficients& coeffs,
                              const FeedbackPolicy& policy, const AtomicMeasure& lambda0,
                              const RecordSpec& record, uint64_t replicate);

std::vector<TrajectoryRecord> simulate_batch(const SimConfig& cfg, const Coefficients& coeffs,
                                             const FeedbackPolicy& policy,
                                             const AtomicMeasure& lambda0,
                                             const RecordSpec& record);

// run fn(replicate) for replicate = 0..count-1 across workers; results land in
// a vector indexed by replicate so reductions are order-independent
template <typename R, typename F>
std::vector<R> map_replicates(long long count, int workers, F&& fn) {
    std::vector<R> out(static_cast<size_t>(count));
    if (workers <= 1) {
        for (long long r = 0; r < count; ++r) out[static_cast<size_t>(r)] = fn(r);
        return out;
    }
    std::vector<std::thread> pool;
    std::atomic<long long> next{0};
    for (int w = 0; w < workers; ++w)
        pool.emplace_back([&]() {
            for (;;) {
                long long r = next.fetch_add(1);
                if (r >= count) return;
                out[static_cast<size_t>(r)] = fn(r);
            }
        });
    for (auto& th : pool) th.join();
    return out;
}

// martingale diagnostics computed from per-step diagnostic records:
//   z statistic for E[M_T] = 0 where M is the compensated functional, and the
//   ratio of empirical quadratic variation to the model formula
struct MartingaleDiagnostic {
    double mean_m = 0.0, se_m = 0.0, z = 0.0;
    double qv_empirical = 0.0, qv_formula = 0.0, qv_ratio = 0.0, qv_ratio_se = 0.0;
    long long replicates = 0;
};

MartingaleDiagnostic martingale_diagnostic(const std::vector<TrajectoryRecord>& records);

}  // namespace branchlab
