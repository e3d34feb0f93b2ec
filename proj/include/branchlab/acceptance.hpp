#pragma once
// The acceptance suite: twelve numbered statistical/numerical criteria with
// pinned parameters and tolerances, each reported as one PASS/FAIL line. A
// criterion that throws is reported as FAIL with the error message; nothing
// is retried or resampled.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace branchlab {

struct CriterionResult {
    int index = 0;
    std::string name;
    bool pass = false;
    std::string detail;
    double seconds = 0.0;
};

struct AcceptanceOptions {
    std::string out_dir = "acceptance_out";
    uint64_t seed = 20260815;
    int workers = 1;
    std::ostream* log = nullptr;  // one line per criterion as it completes
};

std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& opts);
bool all_pass(const std::vector<CriterionResult>& results);

// small deterministic demonstration run: writes CSV artifacts plus a summary
// json into out_dir and returns the CSV file names (the reproducibility
// criterion byte-compares them across two runs)
std::vector<std::string> run_selftest(const std::string& out_dir, uint64_t seed);

}  // namespace branchlab
