#include <cstdlib>
#include <iostream>
#include <string>

#include "branchlab/acceptance.hpp"

int main(int argc, char** argv) {
    branchlab::AcceptanceOptions opts;
    opts.log = &std::cout;
    for (int i = 1; i < argc; ++i) {
        std::string a = argv[i];
        auto next = [&](const char* what) -> std::string {
            if (i + 1 >= argc) {
                std::cerr << "missing value for " << what << "\n";
                std::exit(2);
            }
            return argv[++i];
        };
        if (a == "--out") {
            opts.out_dir = next("--out");
        } else if (a == "--seed") {
            opts.seed = std::stoull(next("--seed"));
        } else if (a == "--workers") {
            opts.workers = std::stoi(next("--workers"));
        } else {
            std::cerr << "usage: acceptance_tests [--out DIR] [--seed N] [--workers N]\n";
            return 2;
        }
    }
    auto results = branchlab::run_acceptance(opts);
    const bool ok = branchlab::all_pass(results);
    std::cout << (ok ? "ALL CRITERIA PASS" : "SOME CRITERIA FAIL") << "\n";
    return ok ? 0 : 1;
}
