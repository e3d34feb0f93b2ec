#include "branchlab/io.hpp"

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <ostream>

namespace branchlab {

void write_trajectories_csv(std::ostream& os, const std::vector<TrajectoryRecord>& records) {
    os << "replicate,time";
    if (!records.empty())
        for (const auto& c : records.front().columns) os << ',' << c;
    os << '\n';
    for (const auto& rec : records) {
        for (size_t row = 0; row < rec.times.size(); ++row) {
            os << rec.replicate << ',' << format_double(rec.times[row]);
            for (const auto& col : rec.values) os << ',' << format_double(col[row]);
            os << '\n';
        }
    }
}

void write_surface_slice_csv(std::ostream& os, const ValueSurface& surface, double t) {
    const int j = surface.nearest_time_node(t);
    os << "x,w,policy\n";
    for (int i = 0; i < surface.grid.nx; ++i)
        os << format_double(surface.grid.x(i)) << ',' << format_double(surface.at(j, i)) << ','
           << surface.policy_at(j, i) << '\n';
}

void write_text_file(const std::string& path, const std::string& content) {
    std::filesystem::path p(path);
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw config_error("cannot write '" + path + "'");
    out << content;
}

void write_json_file(const std::string& path, const nlohmann::json& j) {
    write_text_file(path, j.dump(2) + "\n");
}

nlohmann::json to_json(const Estimate& e) {
    return {{"mean", e.mean},
            {"std_error", e.std_error},
            {"replicates", e.replicates},
            {"censored", e.censored}};
}

nlohmann::json to_json(const VarianceEstimate& v) {
    return {{"variance", v.variance}, {"std_error", v.std_error}, {"replicates", v.replicates}};
}

nlohmann::json to_json(const VerifyReport& rep) {
    nlohmann::json alts = nlohmann::json::array();
    for (const auto& a : rep.alternatives)
        alts.push_back({{"name", a.name},
                        {"j", to_json(a.j)},
                        {"gap_from_value", a.gap_from_value},
                        {"consistent", a.consistent}});
    return {{"value", rep.value},
            {"j_candidate", to_json(rep.j_candidate)},
            {"tolerance", rep.tolerance},
            {"candidate_ok", rep.candidate_ok},
            {"alternatives", alts},
            {"pass", rep.pass}};
}

nlohmann::json to_json(const DppReport& rep) {
    return {{"value_start", rep.value_start}, {"continuation", to_json(rep.continuation)},
            {"tau", rep.tau},                 {"tolerance", rep.tolerance},
            {"pass", rep.pass}};
}

nlohmann::json to_json(const MomentBoundReport& rep) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& r : rep.rows)
        rows.push_back({{"mass0", r.mass0},
                        {"initial_distance", r.initial_distance},
                        {"sup_distance", to_json(r.sup_distance)},
                        {"ratio", r.ratio}});
    return {{"rows", rows},
            {"spread", rep.spread},
            {"threshold", rep.threshold},
            {"all_finite", rep.all_finite},
            {"pass", rep.pass}};
}

nlohmann::json to_json(const ScalingReport& rep) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& r : rep.rows) rows.push_back({{"level", r.level}, {"var", to_json(r.var)}});
    return {{"rows", rows},
            {"v_inf", rep.v_inf},
            {"slope", rep.slope},
            {"slope_se", rep.slope_se},
            {"r_squared", rep.r_squared}};
}

nlohmann::json to_json(const MartingaleDiagnostic& d) {
    return {{"mean_m", d.mean_m},
            {"se_m", d.se_m},
            {"z", d.z},
            {"qv_empirical", d.qv_empirical},
            {"qv_formula", d.qv_formula},
            {"qv_ratio", d.qv_ratio},
            {"qv_ratio_se", d.qv_ratio_se},
            {"replicates", d.replicates}};
}

nlohmann::json run_meta(const std::string& config_hash) {
    const auto now = std::chrono::system_clock::now();
    const std::time_t tt = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::tm tm{};
    gmtime_r(&tt, &tm);
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return {{"timestamp", buf}, {"config_hash", config_hash}};
}

}  // namespace branchlab
