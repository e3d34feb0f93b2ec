// command-line front end: every subcommand loads an INI experiment config,
// applies --set overrides, echoes the resolved configuration hash, runs, and
// writes CSV/JSON artifacts into --out. exit codes: 0 ok/pass, 1 a check
// failed, 2 configuration or usage error.

#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "branchlab/acceptance.hpp"
#include "branchlab/config.hpp"
#include "branchlab/io.hpp"
#include "branchlab/mc.hpp"
#include "branchlab/oracles.hpp"

namespace {

using namespace branchlab;

struct CommonOpts {
    std::string config_path;
    std::string out_dir = "out";
    std::vector<std::string> sets;
    long long seed = -1;  // <0: keep config value
    int workers = 0;      // 0: keep config value
};

void add_common(CLI::App* cmd, CommonOpts& o, bool config_required = true) {
    cmd->add_option("-c,--config", o.config_path, "experiment config (INI)")
        ->required(config_required);
    cmd->add_option("-o,--out", o.out_dir, "output directory");
    cmd->add_option("-s,--set", o.sets, "override, e.g. --set sim.level=20")->take_all();
    cmd->add_option("--seed", o.seed, "override sim.seed");
    cmd->add_option("--workers", o.workers, "override sim.workers");
}

Experiment load(const CommonOpts& o) {
    std::vector<std::string> sets = o.sets;
    if (o.seed >= 0) sets.push_back("sim.seed=" + std::to_string(o.seed));
    if (o.workers > 0) sets.push_back("sim.workers=" + std::to_string(o.workers));
    Experiment ex = load_experiment(o.config_path, sets);
    write_text_file(o.out_dir + "/resolved.ini", ex.resolved);
    std::cout << "config " << ex.config_hash << "\n";
    return ex;
}

ValueSurface solve_surface(const Experiment& ex) {
    return solve_w(ex.grid, ex.coeffs, ex.controls, ex.terminal_h);
}

FeedbackPolicy make_policy(const Experiment& ex, ValueSurface& surface, bool& solved) {
    if (ex.policy_kind == "hjb" && !solved) {
        surface = solve_surface(ex);
        solved = true;
    }
    return ex.run_policy(solved ? &surface : nullptr);
}

int cmd_simulate(const CommonOpts& o) {
    Experiment ex = load(o);
    ValueSurface surface;
    bool solved = false;
    FeedbackPolicy policy = make_policy(ex, surface, solved);
    RecordSpec rec;
    rec.per_step = true;
    rec.family = &ex.family;
    auto records = simulate_batch(ex.sim, ex.coeffs, policy, ex.initial_measure(), rec);
    {
        std::ofstream os(o.out_dir + "/trajectories.csv", std::ios::binary);
        write_trajectories_csv(os, records);
    }
    std::vector<double> masses;
    long long censored = 0;
    for (const auto& r : records) {
        if (r.censored)
            ++censored;
        else
            masses.push_back(r.final_measure.total_mass());
    }
    Estimate e = summarize(masses, censored);
    write_json_file(o.out_dir + "/simulate.json",
                    {{"meta", run_meta(ex.config_hash)}, {"terminal_mass", to_json(e)}});
    std::cout << "terminal mass " << format_double(e.mean) << " +- " << format_double(e.std_error)
              << " (" << e.replicates << " replicates, " << e.censored << " censored)\n";
    return 0;
}

int cmd_solve_hjb(const CommonOpts& o) {
    Experiment ex = load(o);
    ValueSurface surface = solve_surface(ex);
    const double res = residual_max(surface, ex.coeffs, ex.controls);
    {
        std::ofstream os(o.out_dir + "/surface_t0.csv", std::ios::binary);
        write_surface_slice_csv(os, surface, ex.grid.t0);
    }
    const double v0 = value_of_measure(surface, ex.grid.t0, ex.initial_measure());
    write_json_file(o.out_dir + "/solve_hjb.json", {{"meta", run_meta(ex.config_hash)},
                                                    {"cfl", surface.cfl},
                                                    {"residual_max", res},
                                                    {"value_at_initial", v0}});
    std::cout << "solved " << ex.grid.nx << "x" << ex.grid.nt << " residual "
              << format_double(res) << " value " << format_double(v0) << "\n";
    return 0;
}

int cmd_evaluate(const CommonOpts& o) {
    Experiment ex = load(o);
    ValueSurface surface;
    bool solved = false;
    FeedbackPolicy policy = make_policy(ex, surface, solved);
    Estimate e = evaluate_cost(ex.sim, ex.coeffs, ex.cost, policy, ex.initial_measure());
    write_json_file(o.out_dir + "/evaluate.json",
                    {{"meta", run_meta(ex.config_hash)}, {"cost", to_json(e)}});
    std::cout << "J = " << format_double(e.mean) << " +- " << format_double(e.std_error) << "\n";
    return 0;
}

int cmd_verify(const CommonOpts& o) {
    Experiment ex = load(o);
    ValueSurface surface = solve_surface(ex);
    std::vector<std::pair<std::string, FeedbackPolicy>> alts;
    for (const auto& [name, action] : ex.alternatives)
        alts.emplace_back(name, constant_policy(action, name));
    VerifyReport rep =
        verify_optimality(surface, ex.sim, ex.coeffs, ex.cost, ex.initial_measure(), alts, ex.kappa);
    write_json_file(o.out_dir + "/verify.json",
                    {{"meta", run_meta(ex.config_hash)}, {"report", to_json(rep)}});
    std::cout << "value " << format_double(rep.value) << " J(candidate) "
              << format_double(rep.j_candidate.mean) << " tol " << format_double(rep.tolerance)
              << (rep.pass ? " PASS" : " FAIL") << "\n";
    return rep.pass ? 0 : 1;
}

int cmd_dpp(const CommonOpts& o) {
    Experiment ex = load(o);
    ValueSurface surface = solve_surface(ex);
    DppReport rep =
        dpp_check(surface, ex.sim, ex.coeffs, ex.cost, ex.initial_measure(), ex.tau, ex.kappa);
    write_json_file(o.out_dir + "/dpp.json",
                    {{"meta", run_meta(ex.config_hash)}, {"report", to_json(rep)}});
    std::cout << "v(t0) " << format_double(rep.value_start) << " continuation "
              << format_double(rep.continuation.mean) << " tol " << format_double(rep.tolerance)
              << (rep.pass ? " PASS" : " FAIL") << "\n";
    return rep.pass ? 0 : 1;
}

int cmd_scaling(const CommonOpts& o) {
    Experiment ex = load(o);
    ValueSurface surface;
    bool solved = false;
    FeedbackPolicy policy = make_policy(ex, surface, solved);
    ScalingReport rep = convergence_study(ex.sim, ex.coeffs, policy, ex.initial, ex.scaling_phi,
                                          ex.scaling_levels);
    write_json_file(o.out_dir + "/scaling.json",
                    {{"meta", run_meta(ex.config_hash)}, {"report", to_json(rep)}});
    std::cout << "var(n) = " << format_double(rep.v_inf) << " + " << format_double(rep.slope)
              << "/n (se " << format_double(rep.slope_se) << ", R2 "
              << format_double(rep.r_squared) << ")\n";
    return 0;
}

int cmd_selftest(const std::string& out_dir, long long seed) {
    auto files = run_selftest(out_dir, seed < 0 ? 20260815ull : static_cast<uint64_t>(seed));
    for (const auto& f : files) std::cout << out_dir << "/" << f << "\n";
    std::cout << "selftest wrote " << files.size() << " csv files\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"branching-diffusion control laboratory"};
    app.require_subcommand(1);

    CommonOpts sim_o, hjb_o, eval_o, verify_o, dpp_o, scaling_o;
    add_common(app.add_subcommand("simulate", "run replicated particle simulations"), sim_o);
    add_common(app.add_subcommand("solve-hjb", "solve the control pde on the grid"), hjb_o);
    add_common(app.add_subcommand("evaluate", "monte carlo cost of the configured policy"),
               eval_o);
    add_common(app.add_subcommand("verify", "check the pde value against simulated policies"),
               verify_o);
    add_common(app.add_subcommand("dpp", "dynamic-programming consistency at mc.tau"), dpp_o);
    add_common(app.add_subcommand("scaling", "variance scaling across levels"), scaling_o);

    std::string selftest_out = "selftest_out";
    long long selftest_seed = -1;
    auto* st = app.add_subcommand("selftest", "deterministic demonstration run");
    st->add_option("-o,--out", selftest_out, "output directory");
    st->add_option("--seed", selftest_seed, "seed");

    try {
        app.parse(argc, argv);
        if (app.got_subcommand("simulate")) return cmd_simulate(sim_o);
        if (app.got_subcommand("solve-hjb")) return cmd_solve_hjb(hjb_o);
        if (app.got_subcommand("evaluate")) return cmd_evaluate(eval_o);
        if (app.got_subcommand("verify")) return cmd_verify(verify_o);
        if (app.got_subcommand("dpp")) return cmd_dpp(dpp_o);
        if (app.got_subcommand("scaling")) return cmd_scaling(scaling_o);
        if (app.got_subcommand("selftest")) return cmd_selftest(selftest_out, selftest_seed);
        return 2;
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const config_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
