#include "branchlab/config.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

namespace branchlab {

namespace {

std::string trim(const std::string& s) {
    size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

std::vector<std::string> split_ws(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream in(s);
    std::string tok;
    while (in >> tok) out.push_back(tok);
    return out;
}

std::vector<std::string> split_char(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == sep) {
            out.push_back(trim(cur));
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    out.push_back(trim(cur));
    return out;
}

double to_double(const std::string& tok, const std::string& where) {
    try {
        size_t pos = 0;
        double v = std::stod(tok, &pos);
        if (pos != tok.size()) throw std::invalid_argument(tok);
        return v;
    } catch (const std::exception&) {
        throw config_error(where + ": expected a number, got '" + tok + "'");
    }
}

long long to_ll(const std::string& tok, const std::string& where) {
    try {
        size_t pos = 0;
        long long v = std::stoll(tok, &pos);
        if (pos != tok.size()) throw std::invalid_argument(tok);
        return v;
    } catch (const std::exception&) {
        throw config_error(where + ": expected an integer, got '" + tok + "'");
    }
}

Vec to_vec(const std::string& s, const std::string& where) {
    Vec out;
    for (const auto& tok : split_ws(s)) out.push_back(to_double(tok, where));
    return out;
}

// section -> allowed keys
const std::map<std::string, std::vector<std::string>>& schema() {
    static const std::map<std::string, std::vector<std::string>> s = {
        {"space", {"dim", "noise_dim"}},
        {"family", {"kind", "members", "box", "box_points"}},
        {"coefficients", {"b", "sigma", "gamma", "features"}},
        {"controls", {"points"}},
        {"cost", {"h", "theta", "psi", "growth"}},
        {"initial", {"kind", "coords", "weights", "lo", "hi", "mass", "table_x", "table_density"}},
        {"sim",
         {"level", "t0", "horizon", "dt", "replicates", "seed", "workers", "mass_cap_factor",
          "thinning_guard"}},
        {"grid", {"x_min", "x_max", "nx", "nt", "boundary"}},
        {"mc", {"kappa", "tau", "levels", "masses", "spread_threshold", "phi"}},
        {"run", {"policy", "alternatives"}},
    };
    return s;
}

}  // namespace

bool ConfigMap::has(const std::string& sec, const std::string& key) const {
    auto it = sections.find(sec);
    return it != sections.end() && it->second.count(key) > 0;
}

std::string ConfigMap::get(const std::string& sec, const std::string& key,
                           const std::string& fallback) const {
    auto it = sections.find(sec);
    if (it == sections.end()) return fallback;
    auto kt = it->second.find(key);
    return kt == it->second.end() ? fallback : kt->second;
}

void ConfigMap::set_default(const std::string& sec, const std::string& key,
                            const std::string& value) {
    auto& m = sections[sec];
    m.emplace(key, value);
}

ConfigMap parse_ini_text(const std::string& text) {
    ConfigMap cfg;
    std::istringstream in(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string t = trim(line);
        if (t.empty() || t[0] == '#' || t[0] == ';') continue;
        if (t.front() == '[') {
            if (t.back() != ']') throw config_error("config line " + std::to_string(lineno) +
                                                    ": malformed section header");
            section = trim(t.substr(1, t.size() - 2));
            if (section.empty())
                throw config_error("config line " + std::to_string(lineno) + ": empty section");
            cfg.sections[section];
            continue;
        }
        auto eq = t.find('=');
        if (eq == std::string::npos || section.empty())
            throw config_error("config line " + std::to_string(lineno) +
                               ": expected 'key = value' inside a section");
        std::string key = trim(t.substr(0, eq));
        std::string value = trim(t.substr(eq + 1));
        if (key.empty()) throw config_error("config line " + std::to_string(lineno) + ": empty key");
        cfg.sections[section][key] = value;
    }
    return cfg;
}

ConfigMap parse_ini_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot open config file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_ini_text(buf.str());
}

void apply_overrides(ConfigMap& cfg, const std::vector<std::string>& sets) {
    for (const auto& s : sets) {
        auto eq = s.find('=');
        auto dot = s.find('.');
        if (eq == std::string::npos || dot == std::string::npos || dot > eq)
            throw config_error("override '" + s + "': expected section.key=value");
        std::string sec = trim(s.substr(0, dot));
        std::string key = trim(s.substr(dot + 1, eq - dot - 1));
        std::string value = trim(s.substr(eq + 1));
        if (sec.empty() || key.empty())
            throw config_error("override '" + s + "': empty section or key");
        cfg.sections[sec][key] = value;
    }
}

void validate_schema(const ConfigMap& cfg) {
    for (const auto& [sec, keys] : cfg.sections) {
        auto it = schema().find(sec);
        if (it == schema().end()) throw config_error("unknown config section [" + sec + "]");
        for (const auto& [key, value] : keys) {
            (void)value;
            if (std::find(it->second.begin(), it->second.end(), key) == it->second.end())
                throw config_error("unknown key '" + key + "' in section [" + sec + "]");
        }
    }
}

TestFunction parse_test_function(const std::string& spec, int dim) {
    auto toks = split_ws(spec);
    if (toks.empty()) throw config_error("empty function spec");
    const std::string& kind = toks[0];
    const std::string where = "function spec '" + spec + "'";
    if (kind == "constant") {
        if (toks.size() != 2) throw config_error(where + ": constant takes one value");
        return tf_constant(dim, to_double(toks[1], where));
    }
    if (kind == "gaussian") {
        if (static_cast<int>(toks.size()) != dim + 3)
            throw config_error(where + ": gaussian takes height, center (dim values), scale");
        double height = to_double(toks[1], where);
        Vec center(static_cast<size_t>(dim));
        for (int j = 0; j < dim; ++j) center[static_cast<size_t>(j)] = to_double(toks[2 + j], where);
        double scale = to_double(toks.back(), where);
        return tf_gaussian(dim, center, scale, height);
    }
    if (kind == "coordinate") {
        if (toks.size() != 3) throw config_error(where + ": coordinate takes axis and box");
        return tf_coordinate(dim, static_cast<int>(to_ll(toks[1], where)), to_double(toks[2], where));
    }
    if (kind == "square") {
        if (toks.size() != 3) throw config_error(where + ": square takes axis and box");
        return tf_square(dim, static_cast<int>(to_ll(toks[1], where)), to_double(toks[2], where));
    }
    throw config_error(where + ": unknown function kind '" + kind + "'");
}

namespace {

std::vector<TestFunction> parse_function_list(const std::string& value, int dim) {
    std::vector<TestFunction> out;
    for (const auto& part : split_char(value, ';'))
        if (!part.empty()) out.push_back(parse_test_function(part, dim));
    return out;
}

}  // namespace

FeedbackPolicy Experiment::run_policy(const ValueSurface* surface) const {
    if (policy_kind == "constant") return constant_policy(policy_action);
    if (policy_kind == "hjb") {
        if (!surface) throw config_error("run.policy = hjb needs a solved surface");
        return extract_policy(*surface);
    }
    throw config_error("unknown run.policy '" + policy_kind + "'");
}

Experiment build_experiment(ConfigMap cfg) {
    validate_schema(cfg);

    // effective defaults, materialized so the resolved echo is complete
    cfg.set_default("space", "dim", "1");
    cfg.set_default("space", "noise_dim", "1");
    cfg.set_default("family", "kind", "default");
    cfg.set_default("coefficients", "b", "constant 0");
    cfg.set_default("coefficients", "sigma", "constant 0");
    cfg.set_default("coefficients", "gamma", "constant 1");
    cfg.set_default("controls", "points", "0");
    cfg.set_default("cost", "h", "constant 1");
    cfg.set_default("cost", "theta", "1");
    cfg.set_default("cost", "psi", "zero");
    cfg.set_default("cost", "growth", "1");
    cfg.set_default("initial", "kind", "atoms");
    cfg.set_default("initial", "coords", "0");
    cfg.set_default("initial", "weights", "1");
    cfg.set_default("sim", "level", "50");
    cfg.set_default("sim", "t0", "0");
    cfg.set_default("sim", "horizon", "1");
    cfg.set_default("sim", "dt", "1e-3");
    cfg.set_default("sim", "replicates", "10000");
    cfg.set_default("sim", "seed", "20260815");
    cfg.set_default("sim", "workers", "1");
    cfg.set_default("sim", "mass_cap_factor", "1000");
    cfg.set_default("sim", "thinning_guard", "0.1");
    cfg.set_default("grid", "x_min", "-1");
    cfg.set_default("grid", "x_max", "1");
    cfg.set_default("grid", "nx", "21");
    cfg.set_default("grid", "nt", "2000");
    cfg.set_default("grid", "boundary", "reflecting");
    cfg.set_default("mc", "kappa", "0.25");
    cfg.set_default("mc", "tau", "0.5");
    cfg.set_default("mc", "levels", "1 4 16 64");
    cfg.set_default("mc", "masses", "0.5 1 2 4");
    cfg.set_default("mc", "spread_threshold", "3");
    cfg.set_default("mc", "phi", "gaussian 1 0 1");
    cfg.set_default("run", "policy", "hjb");

    Experiment ex;
    ex.dim = static_cast<int>(to_ll(cfg.get("space", "dim", "1"), "space.dim"));
    int noise_dim = static_cast<int>(to_ll(cfg.get("space", "noise_dim", "1"), "space.noise_dim"));
    if (ex.dim < 1 || ex.dim > 8) throw config_error("space.dim must be in 1..8");
    if (noise_dim < 1 || noise_dim > 8) throw config_error("space.noise_dim must be in 1..8");

    // family
    if (cfg.get("family", "kind", "default") == "default") {
        ex.family = default_family(ex.dim);
    } else if (cfg.get("family", "kind", "") == "custom") {
        auto members = parse_function_list(cfg.get("family", "members", ""), ex.dim);
        Vec box = to_vec(cfg.get("family", "box", "-5 5"), "family.box");
        if (box.size() != 2) throw config_error("family.box takes two numbers");
        int pts = static_cast<int>(to_ll(cfg.get("family", "box_points", "2001"),
                                         "family.box_points"));
        ex.family = make_family(std::move(members), box[0], box[1], pts);
    } else {
        throw config_error("family.kind must be default or custom");
    }

    // controls: ';'-separated action tuples
    {
        auto parts = split_char(cfg.get("controls", "points", "0"), ';');
        for (const auto& p : parts) {
            if (p.empty()) continue;
            ex.controls.points.push_back(to_vec(p, "controls.points"));
        }
        if (ex.controls.points.empty()) throw config_error("controls.points is empty");
        ex.controls.action_dim = static_cast<int>(ex.controls.points.front().size());
        for (const auto& a : ex.controls.points)
            if (static_cast<int>(a.size()) != ex.controls.action_dim)
                throw config_error("controls.points tuples must share one action dimension");
    }

    auto features = parse_function_list(cfg.get("coefficients", "features", ""), ex.dim);
    ex.coeffs = make_coefficients(ex.dim, noise_dim, ex.controls.action_dim,
                                  cfg.get("coefficients", "b", "constant 0"),
                                  cfg.get("coefficients", "sigma", "constant 0"),
                                  cfg.get("coefficients", "gamma", "constant 1"),
                                  std::move(features), &ex.controls);

    // cost: exponential terminal functional, optional constant running cost
    ex.terminal_h = parse_test_function(cfg.get("cost", "h", "constant 1"), ex.dim);
    double theta = to_double(cfg.get("cost", "theta", "1"), "cost.theta");
    ex.cost = zero_running_exp_terminal(ex.terminal_h, theta);
    ex.cost.growth_constant = to_double(cfg.get("cost", "growth", "1"), "cost.growth");
    {
        std::string psi = cfg.get("cost", "psi", "zero");
        auto toks = split_ws(psi);
        if (toks.size() == 1 && toks[0] == "zero") {
            // keep the zero default
        } else if (toks.size() == 2 && toks[0] == "constant") {
            double c = to_double(toks[1], "cost.psi");
            ex.cost.psi = [c](const double*, const double*, const double*) { return c; };
            ex.cost.psi_is_zero = c == 0.0;
        } else {
            throw config_error("cost.psi must be 'zero' or 'constant <c>'");
        }
    }

    // initial condition
    {
        std::string kind = cfg.get("initial", "kind", "atoms");
        ex.initial.dim = ex.dim;
        if (kind == "atoms") {
            ex.initial.kind = MeasureSpec::Kind::atoms;
            ex.initial.atom_coords = to_vec(cfg.get("initial", "coords", "0"), "initial.coords");
            ex.initial.atom_weights = to_vec(cfg.get("initial", "weights", "1"), "initial.weights");
            if (ex.initial.atom_coords.size() !=
                ex.initial.atom_weights.size() * static_cast<size_t>(ex.dim))
                throw config_error("initial.coords length must be dim * len(weights)");
        } else if (kind == "uniform") {
            ex.initial.kind = MeasureSpec::Kind::uniform;
            ex.initial.lo = to_double(cfg.get("initial", "lo", "0"), "initial.lo");
            ex.initial.hi = to_double(cfg.get("initial", "hi", "1"), "initial.hi");
            ex.initial.mass = to_double(cfg.get("initial", "mass", "1"), "initial.mass");
        } else if (kind == "table") {
            ex.initial.kind = MeasureSpec::Kind::table;
            ex.initial.table_x = to_vec(cfg.get("initial", "table_x", ""), "initial.table_x");
            ex.initial.table_density =
                to_vec(cfg.get("initial", "table_density", ""), "initial.table_density");
            ex.initial.mass = to_double(cfg.get("initial", "mass", "1"), "initial.mass");
        } else {
            throw config_error("initial.kind must be atoms, uniform, or table");
        }
    }

    // simulation
    ex.sim.level = to_ll(cfg.get("sim", "level", "50"), "sim.level");
    ex.sim.t0 = to_double(cfg.get("sim", "t0", "0"), "sim.t0");
    ex.sim.horizon = to_double(cfg.get("sim", "horizon", "1"), "sim.horizon");
    ex.sim.dt = to_double(cfg.get("sim", "dt", "1e-3"), "sim.dt");
    ex.sim.replicates = to_ll(cfg.get("sim", "replicates", "10000"), "sim.replicates");
    ex.sim.seed = static_cast<uint64_t>(to_ll(cfg.get("sim", "seed", "20260815"), "sim.seed"));
    ex.sim.workers = static_cast<int>(to_ll(cfg.get("sim", "workers", "1"), "sim.workers"));
    ex.sim.mass_cap_factor =
        to_double(cfg.get("sim", "mass_cap_factor", "1000"), "sim.mass_cap_factor");
    ex.sim.thinning_guard =
        to_double(cfg.get("sim", "thinning_guard", "0.1"), "sim.thinning_guard");
    if (ex.sim.level < 1) throw config_error("sim.level must be >= 1");
    if (ex.sim.replicates < 1) throw config_error("sim.replicates must be >= 1");
    if (ex.sim.workers < 1) throw config_error("sim.workers must be >= 1");

    // pde grid shares the control horizon
    ex.grid.x_min = to_double(cfg.get("grid", "x_min", "-1"), "grid.x_min");
    ex.grid.x_max = to_double(cfg.get("grid", "x_max", "1"), "grid.x_max");
    ex.grid.nx = static_cast<int>(to_ll(cfg.get("grid", "nx", "21"), "grid.nx"));
    ex.grid.nt = static_cast<int>(to_ll(cfg.get("grid", "nt", "2000"), "grid.nt"));
    ex.grid.t0 = ex.sim.t0;
    ex.grid.T = ex.sim.t0 + ex.sim.horizon;
    {
        std::string bc = cfg.get("grid", "boundary", "reflecting");
        if (bc == "reflecting")
            ex.grid.boundary = GridSpec::Boundary::reflecting;
        else if (bc == "clamped")
            ex.grid.boundary = GridSpec::Boundary::clamped;
        else
            throw config_error("grid.boundary must be reflecting or clamped");
    }

    // statistics block
    ex.kappa = to_double(cfg.get("mc", "kappa", "0.25"), "mc.kappa");
    ex.tau = to_double(cfg.get("mc", "tau", "0.5"), "mc.tau");
    for (const auto& tok : split_ws(cfg.get("mc", "levels", "1 4 16 64")))
        ex.scaling_levels.push_back(to_ll(tok, "mc.levels"));
    ex.moment_masses = to_vec(cfg.get("mc", "masses", "0.5 1 2 4"), "mc.masses");
    ex.spread_threshold =
        to_double(cfg.get("mc", "spread_threshold", "3"), "mc.spread_threshold");
    ex.scaling_phi = parse_test_function(cfg.get("mc", "phi", "gaussian 1 0 1"), ex.dim);

    // run block
    {
        auto toks = split_ws(cfg.get("run", "policy", "hjb"));
        if (toks.empty()) throw config_error("run.policy is empty");
        ex.policy_kind = toks[0];
        if (ex.policy_kind == "constant") {
            for (size_t i = 1; i < toks.size(); ++i)
                ex.policy_action.push_back(to_double(toks[i], "run.policy"));
            if (static_cast<int>(ex.policy_action.size()) != ex.controls.action_dim)
                throw config_error("run.policy constant action has wrong dimension");
        } else if (ex.policy_kind != "hjb") {
            throw config_error("run.policy must be hjb or 'constant <a...>'");
        }
        for (const auto& part : split_char(cfg.get("run", "alternatives", ""), ';')) {
            if (part.empty()) continue;
            auto at = split_ws(part);
            if (at.size() < 2 || at[0] != "constant")
                throw config_error("run.alternatives entries look like 'constant <a...>'");
            Vec a;
            for (size_t i = 1; i < at.size(); ++i) a.push_back(to_double(at[i], "run.alternatives"));
            if (static_cast<int>(a.size()) != ex.controls.action_dim)
                throw config_error("run.alternatives action has wrong dimension");
            ex.alternatives.emplace_back(part, std::move(a));
        }
    }

    // canonical echo + hash (std::map keeps both levels sorted)
    std::ostringstream echo;
    for (const auto& [sec, keys] : cfg.sections)
        for (const auto& [key, value] : keys) echo << sec << '.' << key << " = " << value << '\n';
    ex.resolved = echo.str();
    ex.config_hash = hex64(fnv1a64(ex.resolved));
    return ex;
}

Experiment load_experiment(const std::string& path, const std::vector<std::string>& overrides) {
    ConfigMap cfg = parse_ini_file(path);
    apply_overrides(cfg, overrides);
    return build_experiment(std::move(cfg));
}

}  // namespace branchlab
