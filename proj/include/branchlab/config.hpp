#pragma once
// INI-style experiment configuration. Full-line comments start with '#' or
// ';'. Every section/key pair is checked against a fixed schema so typos fail
// loudly. `--set section.key=value` overrides are applied after parsing, and
// the resolved (defaults-merged) text plus its hash are kept for provenance.

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "branchlab/hjb.hpp"
#include "branchlab/model.hpp"
#include "branchlab/sim.hpp"

namespace branchlab {

struct ConfigMap {
    std::map<std::string, std::map<std::string, std::string>> sections;

    bool has(const std::string& sec, const std::string& key) const;
    std::string get(const std::string& sec, const std::string& key,
                    const std::string& fallback) const;
    void set_default(const std::string& sec, const std::string& key, const std::string& value);
};

ConfigMap parse_ini_text(const std::string& text);
ConfigMap parse_ini_file(const std::string& path);

// each entry has the form "section.key=value"
void apply_overrides(ConfigMap& cfg, const std::vector<std::string>& sets);

// throws config_error on unknown sections or keys
void validate_schema(const ConfigMap& cfg);

// one-line function specs shared by config keys and tests:
//   "constant <c>" | "gaussian <height> <center...> <scale>" |
//   "coordinate <axis> <box>" | "square <axis> <box>"
TestFunction parse_test_function(const std::string& spec, int dim);

// a fully-assembled experiment: everything the commands operate on
struct Experiment {
    int dim = 1;
    SeparatingFamily family;
    ControlSet controls;
    Coefficients coeffs;
    CostSpec cost;
    TestFunction terminal_h;  // data entering both the cost and the pde
    MeasureSpec initial;
    SimConfig sim;
    GridSpec grid;

    double kappa = 0.25;
    double tau = 0.5;
    std::vector<long long> scaling_levels;
    std::vector<double> moment_masses;
    double spread_threshold = 3.0;
    TestFunction scaling_phi;

    std::string policy_kind = "hjb";  // "hjb" | "constant"
    Vec policy_action;
    std::vector<std::pair<std::string, Vec>> alternatives;

    std::string resolved;     // canonical echo of the effective configuration
    std::string config_hash;  // fnv1a of the echo

    AtomicMeasure initial_measure() const { return discretize(initial, sim.level); }
    FeedbackPolicy run_policy(const ValueSurface* surface) const;
};

Experiment build_experiment(ConfigMap cfg);
Experiment load_experiment(const std::string& path, const std::vector<std::string>& overrides);

}  // namespace branchlab
