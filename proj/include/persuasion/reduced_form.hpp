#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "persuasion/dist.hpp"
#include "persuasion/model.hpp"

namespace persuasion {

struct SolverConfig {
    int initial_grid = 32;    // initial tangents at q = j/M, j = 0..M
    double cut_tol = 1e-9;    // cut-violation stopping tolerance
    int max_rounds = 80;      // cutting-plane rounds
    double lp_tol = 1e-9;     // simplex feasibility/optimality tolerance
    double eps_bind = -1.0;   // binding-detection tolerance; <0 picks 1e-7*(1+|mean|)
    bool vertex_refinement = true;
    bool include_ic = true;   // false solves the no-IC relaxation

    double binding_eps(const StateDistribution& d) const {
        return eps_bind > 0.0 ? eps_bind : 1e-7 * (1.0 + std::abs(d.mean()));
    }
};

struct SolveDiagnostics {
    int rounds = 0;
    int majorization_cuts = 0;
    int ic_cuts = 0;
    long lp_pivots = 0;
    double max_violation = 0.0;  // exact post-convergence feasibility sweep
    double ic_violation = 0.0;
    bool converged = false;
};

struct TypeSolution {
    std::vector<double> p, z;  // one entry per cell of the menu entry's profile
};

/// Solution of the reduced-form convex program.  A "menu entry" is a real
/// type for private solves and the single merged representative for public
/// solves.  The solution is self-contained: it carries the distribution and
/// the step profiles it was solved against.
struct MenuSolution {
    StateDistribution dist = StateDistribution::uniform(0.0, 1.0);
    std::vector<StepProfile> profiles;
    std::vector<double> weights;
    std::vector<std::string> entry_labels;
    std::vector<TypeSolution> entries;
    // y[theta][reported][a']: deviation-payoff linearizers, tight at optimum.
    std::vector<std::vector<std::vector<double>>> y;
    double objective = 0.0;
    bool is_public = false;
    bool ic_included = true;
    SolveDiagnostics diag;

    int num_entries() const { return static_cast<int>(entries.size()); }

    /// Expected payoff of entry `theta` reporting truthfully and obeying.
    double truthful_value(int theta) const;
    /// Expected payoff of `theta` reporting `reported` and best-responding.
    double deviation_value(int theta, int reported) const;
    /// Designer payoff recomputed from (p, z).
    double designer_payoff() const;
};

struct InfeasibleError : std::runtime_error {
    int type_index;
    InfeasibleError(const std::string& msg, int type) : std::runtime_error(msg), type_index(type) {}
};

struct ConvergenceError : std::runtime_error {
    MenuSolution incumbent;
    ConvergenceError(const std::string& msg, MenuSolution best) : std::runtime_error(msg), incumbent(std::move(best)) {}
};

/// Solves the private-menu program: designer payoff subject to majorization,
/// box, incentive-compatibility and optional participation constraints.
/// Concave majorization boundaries are outer-approximated by supporting
/// hyperplanes and tightened until the exact violation is below cut_tol.
MenuSolution solve_opt(const Problem& problem, const SolverConfig& config = {});

/// Public-signal variant: one merged representative type with the
/// weight-aggregated reward on each merged cell and no IC constraints.
MenuSolution solve_public(const Problem& problem, const SolverConfig& config = {});

/// The merged representative profile used by solve_public.
StepProfile merged_public_profile(const Problem& problem, const std::vector<StepProfile>& profiles);

struct PosteriorAtom {
    int cell = -1;
    int action = -1;
    std::string label;
    double p = 0.0;
    double mean = 0.0;
};

/// Atoms of one entry's induced posterior-mean distribution: drops masses
/// below eps (default: the solution's binding epsilon), merges atoms with
/// equal means, clamps means into their cells.
std::vector<PosteriorAtom> posterior_atoms(const MenuSolution& sol, int entry, double eps = -1.0);

struct BlockAtom {
    int cell = -1;
    double p = 0.0, z = 0.0, mu = 0.0;
};

/// A maximal run of atoms between binding majorization constraints, with
/// its quantile endpoints.
struct Block {
    double q_lo = 0.0, q_hi = 0.0;
    std::vector<BlockAtom> atoms;
};

/// Splits an entry's atoms into blocks at the binding majorization indices.
/// Throws if the solution violates majorization by more than eps_bind.
std::vector<Block> binding_groups(const MenuSolution& sol, int entry, double eps_bind);

}  // namespace persuasion
