#pragma once

#include <string>

#include <json.hpp>

#include "persuasion/laminar.hpp"
#include "persuasion/model.hpp"
#include "persuasion/reduced_form.hpp"
#include "persuasion/verify.hpp"

namespace persuasion {

/// Versioned problem-file schema: distribution, types with weights, action
/// labels, u1/u2/v1/v2 matrices ([type][action]; v1 optional, default 0),
/// optional participation bounds, optional solver overrides.
struct LoadedProblem {
    Problem problem;
    SolverConfig config;
    bool weights_renormalized = false;
};

StateDistribution distribution_from_json(const nlohmann::json& j);
nlohmann::json distribution_to_json(const StateDistribution& d);

LoadedProblem problem_from_json(const nlohmann::json& j);
LoadedProblem load_problem(const std::string& path);

nlohmann::json solution_to_json(const MenuSolution& sol, const ICReport* ic = nullptr);
nlohmann::json mechanism_to_json(const Mechanism& mech, const MenuSolution& sol);
Mechanism mechanism_from_json(const nlohmann::json& j);
std::string mechanism_to_csv(const Mechanism& mech, const MenuSolution& sol);
nlohmann::json audit_to_json(const AuditReport& audit);
nlohmann::json ic_to_json(const ICReport& ic);
nlohmann::json monte_carlo_to_json(const MonteCarloReport& mc);
nlohmann::json oracle_to_json(const OracleResult& oracle);
nlohmann::json example_to_json(const ExampleReport& rep);

/// Canonical serialization: keys in sorted order, doubles printed with 17
/// significant digits, two-space indentation.  Identical inputs give
/// byte-identical output.
std::string dump_canonical(const nlohmann::json& j);

void write_file(const std::string& path, const std::string& content);

}  // namespace persuasion
