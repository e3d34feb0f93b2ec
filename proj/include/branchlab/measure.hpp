#pragma once
// Atomic measures with rational masses: every atom carries an integer
// multiplicity and the whole measure a level n, so atom masses are
// multiplicity/n. This is the state space of the rescaled particle systems.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "branchlab/util.hpp"

namespace branchlab {

struct AtomicMeasure {
    int dim = 1;
    long long level = 1;            // n >= 1
    std::vector<double> coords;     // atom locations, row-major with stride dim
    std::vector<long long> mult;    // strictly positive multiplicities

    static AtomicMeasure zero(int dim, long long level);
    // canonicalizes: atoms sorted lexicographically by coordinates, atoms at
    // bitwise-identical locations merged, zero multiplicities dropped
    AtomicMeasure(int dim, long long level, std::vector<double> coords, std::vector<long long> mult);
    AtomicMeasure() = default;

    int atom_count() const { return static_cast<int>(mult.size()); }
    long long total_units() const;
    double total_mass() const;      // sum of multiplicities / level
    bool is_zero() const { return mult.empty(); }
    const double* atom(int i) const { return coords.data() + static_cast<size_t>(i) * dim; }

    void canonicalize();
};

// initial-condition description that can be discretized at any level
struct MeasureSpec {
    enum class Kind { atoms, uniform, table } kind = Kind::atoms;
    int dim = 1;
    // kind == atoms: explicit atom list with real weights
    std::vector<double> atom_coords;  // stride dim
    std::vector<double> atom_weights;
    // kind == uniform (1-d): uniform density on [lo, hi] with given total mass
    double lo = 0.0, hi = 1.0, mass = 1.0;
    // kind == table (1-d): piecewise-linear density sampled on a grid
    std::vector<double> table_x, table_density;

    double total_mass() const;
};

// projects a real-mass description onto level n: total mass floor(n*mass)/n,
// atom lists via largest-remainder rounding of the weights, densities via
// inverse-CDF placement of the units
AtomicMeasure discretize(const MeasureSpec& spec, long long level);

// CSV round-trip; columns: level, x0..x{d-1}, multiplicity
void write_measure_csv(std::ostream& os, const AtomicMeasure& mu);
AtomicMeasure read_measure_csv(std::istream& is);

}  // namespace branchlab
