#pragma once
// CSV and JSON output. CSV bodies are pure data with round-trip float
// formatting, so identical runs produce byte-identical files; wall-clock
// metadata lives only in JSON summaries.

#include <iosfwd>
#include <string>

#include <json.hpp>

#include "branchlab/hjb.hpp"
#include "branchlab/mc.hpp"
#include "branchlab/sim.hpp"

namespace branchlab {

void write_trajectories_csv(std::ostream& os, const std::vector<TrajectoryRecord>& records);

// one row per grid node at the time layer nearest t: x, w, policy index
void write_surface_slice_csv(std::ostream& os, const ValueSurface& surface, double t);

void write_text_file(const std::string& path, const std::string& content);
void write_json_file(const std::string& path, const nlohmann::json& j);

nlohmann::json to_json(const Estimate& e);
nlohmann::json to_json(const VarianceEstimate& v);
nlohmann::json to_json(const VerifyReport& rep);
nlohmann::json to_json(const DppReport& rep);
nlohmann::json to_json(const MomentBoundReport& rep);
nlohmann::json to_json(const ScalingReport& rep);
nlohmann::json to_json(const MartingaleDiagnostic& d);

// run metadata: ISO-8601 wall clock plus the configuration hash
nlohmann::json run_meta(const std::string& config_hash);

}  // namespace branchlab
