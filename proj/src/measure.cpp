#include "branchlab/measure.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

namespace branchlab {

AtomicMeasure AtomicMeasure::zero(int dim, long long level) {
    AtomicMeasure m;
    m.dim = dim;
    m.level = level;
    return m;
}

AtomicMeasure::AtomicMeasure(int dim_, long long level_, std::vector<double> coords_,
                             std::vector<long long> mult_)
    : dim(dim_), level(level_), coords(std::move(coords_)), mult(std::move(mult_)) {
    if (dim < 1) throw config_error("measure: dim must be >= 1");
    if (level < 1) throw config_error("measure: level must be >= 1");
    if (coords.size() != mult.size() * static_cast<size_t>(dim))
        throw config_error("measure: coords/multiplicity size mismatch");
    for (double c : coords)
        if (!std::isfinite(c)) throw config_error("measure: non-finite coordinate");
    for (long long m : mult)
        if (m < 0) throw config_error("measure: negative multiplicity");
    canonicalize();
}

long long AtomicMeasure::total_units() const {
    long long u = 0;
    for (long long m : mult) u += m;
    return u;
}

double AtomicMeasure::total_mass() const {
    return static_cast<double>(total_units()) / static_cast<double>(level);
}

void AtomicMeasure::canonicalize() {
    const int d = dim;
    const int n = atom_count();
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int i, int j) {
        return std::lexicographical_compare(coords.begin() + static_cast<size_t>(i) * d,
                                            coords.begin() + static_cast<size_t>(i) * d + d,
                                            coords.begin() + static_cast<size_t>(j) * d,
                                            coords.begin() + static_cast<size_t>(j) * d + d);
    });
    std::vector<double> new_coords;
    std::vector<long long> new_mult;
    new_coords.reserve(coords.size());
    new_mult.reserve(mult.size());
    for (int k = 0; k < n; ++k) {
        int i = order[k];
        if (mult[i] == 0) continue;
        const double* x = coords.data() + static_cast<size_t>(i) * d;
        if (!new_mult.empty() &&
            std::equal(x, x + d, new_coords.end() - d)) {
            new_mult.back() += mult[i];  // identical locations merge
        } else {
            new_coords.insert(new_coords.end(), x, x + d);
            new_mult.push_back(mult[i]);
        }
    }
    coords = std::move(new_coords);
    mult = std::move(new_mult);
}

// ---- discretization --------------------------------------------------------

double MeasureSpec::total_mass() const {
    switch (kind) {
        case Kind::atoms: {
            double s = 0.0;
            for (double w : atom_weights) s += w;
            return s;
        }
        case Kind::uniform:
            return mass;
        case Kind::table: {
            // trapezoid mass of the sampled density
            double s = 0.0;
            for (size_t i = 0; i + 1 < table_x.size(); ++i)
                s += 0.5 * (table_density[i] + table_density[i + 1]) * (table_x[i + 1] - table_x[i]);
            return s;
        }
    }
    return 0.0;
}

namespace {

// largest-remainder rounding of weights to integers summing to target_units
std::vector<long long> apportion(const std::vector<double>& w, long long level,
                                 long long target_units) {
    const size_t n = w.size();
    std::vector<long long> units(n, 0);
    std::vector<std::pair<double, size_t>> rem(n);
    long long assigned = 0;
    for (size_t i = 0; i < n; ++i) {
        double exact = w[i] * static_cast<double>(level);
        units[i] = static_cast<long long>(std::floor(exact));
        assigned += units[i];
        rem[i] = {exact - std::floor(exact), i};
    }
    std::sort(rem.begin(), rem.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;  // deterministic tie-break
    });
    long long leftover = target_units - assigned;
    for (size_t k = 0; leftover > 0 && k < n; ++k, --leftover) units[rem[k].second] += 1;
    return units;
}

// inverse CDF of a piecewise-linear density; places one unit at each of the
// quantiles (j + 1/2) / k
std::vector<double> quantile_points(const std::vector<double>& xs, const std::vector<double>& dens,
                                    long long k) {
    std::vector<double> cdf(xs.size(), 0.0);
    for (size_t i = 0; i + 1 < xs.size(); ++i)
        cdf[i + 1] = cdf[i] + 0.5 * (dens[i] + dens[i + 1]) * (xs[i + 1] - xs[i]);
    const double total = cdf.back();
    std::vector<double> pts;
    pts.reserve(static_cast<size_t>(k));
    size_t seg = 0;
    for (long long j = 0; j < k; ++j) {
        double target = total * (static_cast<double>(j) + 0.5) / static_cast<double>(k);
        while (seg + 2 < cdf.size() && cdf[seg + 1] < target) ++seg;
        double span = cdf[seg + 1] - cdf[seg];
        double frac = span > 0.0 ? (target - cdf[seg]) / span : 0.5;
        pts.push_back(xs[seg] + frac * (xs[seg + 1] - xs[seg]));
    }
    return pts;
}

}  // namespace

AtomicMeasure discretize(const MeasureSpec& spec, long long level) {
    if (level < 1) throw config_error("discretize: level must be >= 1");
    const double mass = spec.total_mass();
    if (mass < 0.0) throw config_error("discretize: negative total mass");
    const long long target_units =
        static_cast<long long>(std::floor(mass * static_cast<double>(level) + 1e-12));
    switch (spec.kind) {
        case MeasureSpec::Kind::atoms: {
            auto units = apportion(spec.atom_weights, level, target_units);
            std::vector<double> coords;
            std::vector<long long> mult;
            for (size_t i = 0; i < units.size(); ++i) {
                if (units[i] == 0) continue;
                coords.insert(coords.end(), spec.atom_coords.begin() + i * spec.dim,
                              spec.atom_coords.begin() + (i + 1) * spec.dim);
                mult.push_back(units[i]);
            }
            return AtomicMeasure(spec.dim, level, std::move(coords), std::move(mult));
        }
        case MeasureSpec::Kind::uniform: {
            if (spec.dim != 1) throw config_error("discretize: uniform density is 1-d");
            std::vector<double> coords;
            for (long long j = 0; j < target_units; ++j)
                coords.push_back(spec.lo + (spec.hi - spec.lo) *
                                               (static_cast<double>(j) + 0.5) /
                                               static_cast<double>(target_units));
            return AtomicMeasure(1, level, std::move(coords),
                                 std::vector<long long>(static_cast<size_t>(target_units), 1));
        }
        case MeasureSpec::Kind::table: {
            if (spec.dim != 1) throw config_error("discretize: table density is 1-d");
            if (spec.table_x.size() < 2 || spec.table_x.size() != spec.table_density.size())
                throw config_error("discretize: bad density table");
            auto pts = quantile_points(spec.table_x, spec.table_density, target_units);
            return AtomicMeasure(1, level, std::move(pts),
                                 std::vector<long long>(static_cast<size_t>(target_units), 1));
        }
    }
    throw config_error("discretize: unknown spec kind");
}

// ---- CSV -------------------------------------------------------------------

void write_measure_csv(std::ostream& os, const AtomicMeasure& mu) {
    os << "level";
    for (int j = 0; j < mu.dim; ++j) os << ",x" << j;
    os << ",multiplicity\n";
    for (int i = 0; i < mu.atom_count(); ++i) {
        os << mu.level;
        for (int j = 0; j < mu.dim; ++j) os << "," << format_double(mu.atom(i)[j]);
        os << "," << mu.mult[i] << "\n";
    }
}

AtomicMeasure read_measure_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line)) throw config_error("measure csv: empty input");
    int dim = 0;
    {
        std::stringstream hs(line);
        std::string col;
        std::vector<std::string> cols;
        while (std::getline(hs, col, ',')) cols.push_back(col);
        if (cols.size() < 3 || cols.front() != "level" || cols.back() != "multiplicity")
            throw config_error("measure csv: bad header");
        dim = static_cast<int>(cols.size()) - 2;
    }
    long long level = 1;
    std::vector<double> coords;
    std::vector<long long> mult;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::stringstream ls(line);
        std::string cell;
        std::getline(ls, cell, ',');
        level = std::stoll(cell);
        for (int j = 0; j < dim; ++j) {
            std::getline(ls, cell, ',');
            coords.push_back(std::strtod(cell.c_str(), nullptr));
        }
        std::getline(ls, cell, ',');
        mult.push_back(std::stoll(cell));
    }
    return AtomicMeasure(dim, level, std::move(coords), std::move(mult));
}

}  // namespace branchlab
