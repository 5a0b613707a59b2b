#pragma once

#include <optional>
#include <string>
#include <vector>

#include "persuasion/dist.hpp"

namespace persuasion {

struct TypeSpec {
    std::string label;
    double weight = 0.0;
};

/// A persuasion problem instance: receiver types with weights, a finite
/// action set, quasi-linear utilities u(a,w,t) = u1*w + u2 for the receiver
/// and v(a,w,t) = v1*w + v2 for the designer, and optional per-type
/// participation floors on the truthful expected utility.
struct Problem {
    StateDistribution distribution = StateDistribution::uniform(0.0, 1.0);
    std::vector<TypeSpec> types;
    std::vector<std::string> actions;
    // Indexed [type][action].
    std::vector<std::vector<double>> u1, u2, v1, v2;
    std::vector<std::optional<double>> participation;  // empty or one entry per type

    int num_types() const { return static_cast<int>(types.size()); }
    int num_actions() const { return static_cast<int>(actions.size()); }

    /// Shape checks; weights must be positive.  Weights off from summing to
    /// one by more than 1e-9 are renormalized and flagged.
    /// Returns true when weights had to be renormalized.
    bool validate_and_normalize();
};

/// One cell of a type's step structure: the action that is optimal when the
/// posterior mean lies in [b_lo, b_hi], with utility h + slope*(m - b_hi) on
/// the cell and designer reward v1*m + v2.
struct ActionCell {
    int action = -1;  // index into Problem::actions
    std::string label;
    double slope = 0.0;  // c_{a,theta} = u1
    double b_lo = 0.0, b_hi = 0.0;
    double h = 0.0;  // u2 + u1 * b_hi
    double v1 = 0.0, v2 = 0.0;

    double utility(double m) const { return h + slope * (m - b_hi); }
    double reward(double m) const { return v1 * m + v2; }
};

/// Per-type upper envelope of the action utilities: ordered active cells
/// covering the support, plus the actions collapsed out of the envelope
/// (never optimal on a set of positive measure; kept with b_lo == b_hi at
/// the top of the support).
struct StepProfile {
    int type = -1;  // -1 for the merged representative used by public solves
    double lo = 0.0, hi = 0.0;
    std::vector<ActionCell> cells;
    std::vector<int> collapsed_actions;
    // For interior cutoff k (between cells k and k+1): true if the right
    // cell owns the boundary (weakly higher designer reward there).
    std::vector<bool> right_owner;

    int num_cells() const { return static_cast<int>(cells.size()); }

    /// max_a u1*m + u2; continuous and convex piecewise-affine.
    double indirect_utility(double m) const;

    /// Cell whose closed interval contains m, with cutoff ties resolved by
    /// the boundary-ownership flags (designer-favoring).
    int best_cell(double m) const;
    int best_action(double m) const { return cells[static_cast<size_t>(best_cell(m))].action; }

    /// Designer reward of the owning action at posterior mean m.
    double indirect_reward(double m) const {
        const ActionCell& c = cells[static_cast<size_t>(best_cell(m))];
        return c.reward(m);
    }
};

/// Builds the step profile of one type: dedups actions with identical
/// receiver utilities (keeping the designer-preferred one), takes the upper
/// envelope of the remaining affine utilities over the support, collapses
/// never-optimal actions, and assigns boundary ownership designer-favoring.
StepProfile derive_step_profile(const Problem& problem, int type_index);

}  // namespace persuasion
