#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "persuasion/instances.hpp"
#include "persuasion/io.hpp"
#include "persuasion/laminar.hpp"
#include "persuasion/verify.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitInfeasible = 2;
constexpr int kExitAssertion = 3;

std::string out_dir(const std::string& flag) {
    if (!flag.empty()) return flag;
    if (const char* env = std::getenv("PERSUASION_OUT_DIR")) return env;
    return ".";
}

std::string join(const std::string& dir, const std::string& name) {
    std::filesystem::create_directories(dir);
    return (std::filesystem::path(dir) / name).string();
}

void print_example_table(const persuasion::ExampleReport& rep) {
    std::printf("%s\n", rep.name.c_str());
    for (const persuasion::CheckLine& c : rep.checks) {
        std::printf("  [%s] %-32s value=%-14.8g target=%-12.6g tol=%-8.2g %s\n", c.pass ? "PASS" : "FAIL",
                    c.name.c_str(), c.value, c.target, c.tol, c.note.c_str());
    }
}

}  // namespace

int main(int argc, char** argv) {
    using namespace persuasion;

    CLI::App app{"Designer-optimal menus of signals for persuading a privately informed receiver"};
    app.require_subcommand(1);

    std::string problem_path, out_flag, solution_path, demo_name, mechanism_path;
    double tol = -1.0;
    bool use_public = false, no_ic = false;
    long mc_samples = 0;
    std::uint64_t seed = 1;
    int bins = 2000;
    int demo_n = 3;

    auto add_common = [&](CLI::App* cmd, bool needs_problem) {
        if (needs_problem) cmd->add_option("problem", problem_path, "problem JSON file")->required();
        cmd->add_option("--out", out_flag, "output directory (default $PERSUASION_OUT_DIR or .)");
        cmd->add_option("--tol", tol, "cut-violation stopping tolerance");
        cmd->add_flag("--public", use_public, "solve the public-signal variant");
        cmd->add_flag("--no-ic", no_ic, "drop incentive-compatibility constraints (relaxation)");
        cmd->add_option("--seed", seed, "random seed for Monte Carlo replay");
    };

    CLI::App* solve_cmd = app.add_subcommand("solve", "solve the menu program and write solution JSON");
    add_common(solve_cmd, true);
    CLI::App* partition_cmd = app.add_subcommand("partition", "solve and write the laminar mechanism (CSV + JSON)");
    add_common(partition_cmd, true);
    CLI::App* verify_cmd = app.add_subcommand("verify", "solve, construct, audit and report");
    add_common(verify_cmd, true);
    verify_cmd->add_option("--mc", mc_samples, "Monte Carlo replay sample count");
    verify_cmd->add_option("--mechanism", mechanism_path, "audit this mechanism JSON instead of a fresh construction");
    CLI::App* oracle_cmd = app.add_subcommand("oracle", "discretized brute-force objective and gap");
    add_common(oracle_cmd, true);
    oracle_cmd->add_option("--bins", bins, "number of equal-probability cells");
    oracle_cmd->add_option("--solution", solution_path, "solution JSON to compare against (default: fresh solve)");
    CLI::App* demo_cmd = app.add_subcommand("demo", "reproduce a built-in example and print its acceptance table");
    demo_cmd->add_option("name", demo_name, "buyer | public_private")->required();
    demo_cmd->add_option("--n", demo_n, "number of types for public_private");
    demo_cmd->add_option("--out", out_flag, "output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        const std::string dir = out_dir(out_flag);

        if (demo_cmd->parsed()) {
            const ExampleReport rep = reproduce_example(demo_name, demo_n);
            print_example_table(rep);
            write_file(join(dir, "demo.json"), dump_canonical(example_to_json(rep)));
            return rep.pass() ? kExitOk : kExitAssertion;
        }

        LoadedProblem loaded = load_problem(problem_path);
        if (loaded.weights_renormalized) {
            std::fprintf(stderr, "warning: type weights did not sum to 1; renormalized\n");
        }
        if (tol > 0.0) loaded.config.cut_tol = tol;
        loaded.config.include_ic = !no_ic;

        if (oracle_cmd->parsed()) {
            const OracleResult oracle = oracle_discrete(loaded.problem, bins, loaded.config);
            nlohmann::json j = oracle_to_json(oracle);
            double reference;
            if (!solution_path.empty()) {
                std::ifstream in(solution_path);
                if (!in) throw std::invalid_argument("cannot open solution file: " + solution_path);
                nlohmann::json js;
                in >> js;
                reference = js.at("objective").get<double>();
            } else {
                reference = (use_public ? solve_public(loaded.problem, loaded.config)
                                        : solve_opt(loaded.problem, loaded.config))
                                .objective;
            }
            j["reference_objective"] = reference;
            j["gap"] = reference - oracle.objective;
            write_file(join(dir, "oracle.json"), dump_canonical(j));
            std::printf("oracle objective (bins=%d): %.12g, reference %.12g, gap %.3g\n", bins, oracle.objective,
                        reference, reference - oracle.objective);
            return kExitOk;
        }

        const MenuSolution sol =
            use_public ? solve_public(loaded.problem, loaded.config) : solve_opt(loaded.problem, loaded.config);
        const bool ic_applicable = !sol.is_public;
        ICReport ic;
        if (ic_applicable) ic = ic_report(loaded.problem, sol);

        if (solve_cmd->parsed()) {
            write_file(join(dir, "solution.json"),
                       dump_canonical(solution_to_json(sol, ic_applicable ? &ic : nullptr)));
            std::printf("objective: %.12g (rounds %d, max residual %.3g)\n", sol.objective, sol.diag.rounds,
                        sol.diag.max_violation);
            return kExitOk;
        }

        Mechanism mech;
        if (verify_cmd->parsed() && !mechanism_path.empty()) {
            std::ifstream in(mechanism_path);
            if (!in) throw std::invalid_argument("cannot open mechanism file: " + mechanism_path);
            nlohmann::json jm;
            in >> jm;
            mech = mechanism_from_json(jm);
        } else {
            mech = construct_mechanism(sol);
        }
        if (partition_cmd->parsed()) {
            write_file(join(dir, "solution.json"),
                       dump_canonical(solution_to_json(sol, ic_applicable ? &ic : nullptr)));
            write_file(join(dir, "mechanism.json"), dump_canonical(mechanism_to_json(mech, sol)));
            write_file(join(dir, "mechanism.csv"), mechanism_to_csv(mech, sol));
            std::printf("objective: %.12g; mechanism written to %s\n", sol.objective, dir.c_str());
            return kExitOk;
        }

        // verify
        const AuditReport audit = audit_mechanism(loaded.problem, mech, sol);
        nlohmann::json report;
        report["solution"] = solution_to_json(sol, ic_applicable ? &ic : nullptr);
        report["audit"] = audit_to_json(audit);
        bool ok = audit.pass();
        if (ic_applicable) {
            ok = ok && ic.ic_ok();
        }
        if (mc_samples > 0) {
            const MonteCarloReport mc = monte_carlo_audit(loaded.problem, mech, sol, mc_samples, seed);
            report["monte_carlo"] = monte_carlo_to_json(mc);
            ok = ok && mc.pass;
        }
        report["pass"] = ok;
        write_file(join(dir, "report.json"), dump_canonical(report));
        std::printf("verify: %s (max p dev %.3g, max z dev %.3g)\n", ok ? "PASS" : "FAIL", audit.max_p_dev,
                    audit.max_z_dev);
        return ok ? kExitOk : kExitAssertion;
    } catch (const persuasion::InfeasibleError& e) {
        std::fprintf(stderr, "infeasible: %s\n", e.what());
        return kExitInfeasible;
    } catch (const persuasion::ConvergenceError& e) {
        std::fprintf(stderr, "no convergence: %s (incumbent objective %.12g)\n", e.what(), e.incumbent.objective);
        return kExitAssertion;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitUsage;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitAssertion;
    }
}
