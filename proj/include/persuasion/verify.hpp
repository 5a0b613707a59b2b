#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "persuasion/laminar.hpp"
#include "persuasion/model.hpp"
#include "persuasion/reduced_form.hpp"

namespace persuasion {

/// Full report-and-deviate matrix: report_value[t][r] is the expected payoff
/// of type t reporting r and best-responding per recommendation.
struct ICReport {
    std::vector<std::vector<double>> report_value;  // U
    std::vector<double> truthful;                   // d: diagonal
    std::vector<double> best_deviation;             // e: max off-diagonal
    std::vector<std::vector<bool>> binding;         // |d - U| <= tol
    std::vector<double> participation_slack;        // empty when no bounds
    double tol = 1e-7;

    bool ic_ok() const;
    /// max_r |U[t][r] - d_t|: zero means full indifference across reports.
    double indifference_spread(int t) const;
};

ICReport ic_report(const Problem& problem, const MenuSolution& sol, double tol = 1e-7);

struct AuditRow {
    int entry = -1, cell = -1;
    std::string message;
    double p_solver = 0.0, z_solver = 0.0;
    double p_quad = 0.0, z_quad = 0.0;
};

/// Quadrature audit of a mechanism against the solution it realizes.
struct AuditReport {
    std::vector<AuditRow> rows;
    double max_p_dev = 0.0, max_z_dev = 0.0;
    double payoff_solver = 0.0, payoff_quad = 0.0;
    LaminarReport laminar;
    double tol = 1e-8;

    bool pass() const;
};

AuditReport audit_mechanism(const Problem& problem, const Mechanism& mech, const MenuSolution& sol, double tol = 1e-8);

struct MonteCarloMessage {
    int entry = -1, cell = -1;
    std::string message;
    long hits = 0;
    double freq = 0.0, mean = 0.0;
    double p_expected = 0.0, mean_expected = 0.0;
    double se_freq = 0.0, se_mean = 0.0;
    bool flagged = false;
};

/// Seeded replay: states drawn through the quantile, routed through the
/// partition, empirical frequencies and means screened at four standard
/// errors.  Identical seeds reproduce the report bit for bit.
struct MonteCarloReport {
    std::uint64_t seed = 0;
    long samples = 0;
    std::vector<MonteCarloMessage> messages;
    double payoff_empirical = 0.0;
    bool pass = true;
};

MonteCarloReport monte_carlo_audit(const Problem& problem, const Mechanism& mech, const MenuSolution& sol,
                                   long samples, std::uint64_t seed);

struct OracleAtom {
    int action = -1;
    std::string label;
    double p = 0.0, mean = 0.0;
};

struct OracleResult {
    int bins = 0;
    double objective = 0.0;
    std::vector<std::vector<OracleAtom>> tables;  // per type
    int rounds = 0;
};

/// Brute-force cross-check: the exact optimum of the instance discretized
/// into equal-probability cells, solved as an LP with the discrete
/// majorization boundary.  Monotone under nested refinements and converging
/// to the continuous optimum from below.
OracleResult oracle_discrete(const Problem& problem, int bins, const SolverConfig& config = {});

struct CheckLine {
    std::string name;
    bool pass = false;
    double value = 0.0, target = 0.0, tol = 0.0;
    std::string note;
};

struct ExampleReport {
    std::string name;
    std::vector<CheckLine> checks;
    double objective = 0.0;
    double public_objective = 0.0;
    double oracle_objective = 0.0;

    bool pass() const {
        for (const CheckLine& c : checks) {
            if (!c.pass) return false;
        }
        return true;
    }
};

/// Rebuilds a named instance from hard-coded parameters, runs the pipeline
/// (solve, construct, audit, ic, oracle as applicable) and evaluates its
/// acceptance assertions.  Names: "buyer", "public_private" (with n).
ExampleReport reproduce_example(const std::string& name, int n = 3);

}  // namespace persuasion
