#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

int run(const std::string& args) {
    std::string cmd = std::string(BRANCHLAB_CLI_PATH) + " " + args + " > cli_log.txt 2>&1";
    int status = std::system(cmd.c_str());
    REQUIRE(status != -1);
    return WEXITSTATUS(status);
}

std::string cfg(const std::string& name) {
    return std::string(BRANCHLAB_CONFIG_DIR) + "/" + name;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("selftest output is byte-identical across runs") {
    fs::remove_all("cli_self_a");
    fs::remove_all("cli_self_b");
    REQUIRE(run("selftest -o cli_self_a --seed 7") == 0);
    REQUIRE(run("selftest -o cli_self_b --seed 7") == 0);
    for (const char* name : {"trajectories.csv", "hjb_slice.csv", "measure.csv"}) {
        CAPTURE(name);
        CHECK(slurp(fs::path("cli_self_a") / name) == slurp(fs::path("cli_self_b") / name));
    }
    CHECK(fs::exists("cli_self_a/summary.json"));
}

TEST_CASE("simulate writes trajectories and metadata") {
    fs::remove_all("cli_sim");
    REQUIRE(run("simulate -c " + cfg("feller_laplace.ini") +
                " -o cli_sim --set sim.replicates=3 --set sim.level=5 --set sim.dt=0.01") == 0);
    std::string csv = slurp("cli_sim/trajectories.csv");
    CHECK(csv.rfind("replicate,time,", 0) == 0);
    CHECK(csv.find("mass") != std::string::npos);
    CHECK(fs::exists("cli_sim/simulate.json"));
    CHECK(fs::exists("cli_sim/resolved.ini"));
    std::string meta = slurp("cli_sim/simulate.json");
    CHECK(meta.find("config_hash") != std::string::npos);
}

TEST_CASE("unknown config keys are rejected with exit code 2") {
    CHECK(run("simulate -c " + cfg("feller_laplace.ini") + " -o cli_bad --set sim.bogus=1") == 2);
    CHECK(run("simulate -c does_not_exist.ini -o cli_bad") == 2);
}

TEST_CASE("solve, evaluate, verify, and dpp round-trip on the riccati model") {
    fs::remove_all("cli_hjb");
    std::string base = " -c " + cfg("riccati_dpp.ini") + " -o cli_hjb --set sim.replicates=400";
    REQUIRE(run("solve-hjb" + base) == 0);
    CHECK(fs::exists("cli_hjb/surface_t0.csv"));
    CHECK(fs::exists("cli_hjb/solve_hjb.json"));
    REQUIRE(run("evaluate" + base) == 0);
    CHECK(fs::exists("cli_hjb/evaluate.json"));
    CHECK(run("verify" + base) == 0);
    CHECK(fs::exists("cli_hjb/verify.json"));
    CHECK(run("dpp" + base) == 0);
    CHECK(fs::exists("cli_hjb/dpp.json"));
}

TEST_CASE("scaling study runs on a small ladder") {
    fs::remove_all("cli_scaling");
    REQUIRE(run("scaling -c " + cfg("scaling.ini") +
                " -o cli_scaling --set sim.replicates=300 --set 'mc.levels=1 2 4'") == 0);
    std::string json = slurp("cli_scaling/scaling.json");
    CHECK(json.find("slope") != std::string::npos);
    CHECK(json.find("r_squared") != std::string::npos);
}
