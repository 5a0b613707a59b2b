#pragma once

#include <string>
#include <vector>

#include "persuasion/reduced_form.hpp"

namespace persuasion {

/// Laminar interval family realizing one block: hulls[k] is the convex hull
/// of the set where the block's k-th atom (ascending means) is revealed,
/// elements[k] the partition element itself (hull minus later-order hulls).
struct LaminarFamily {
    double q_lo = 0.0, q_hi = 0.0;
    std::vector<Interval> hulls;
    std::vector<std::vector<Interval>> elements;
};

/// Realizes a block's atoms (p_k > 0, strictly increasing means, block sums
/// matching the quantile window, strict interior majorization) as a laminar
/// partition of [quantile(q0), quantile(q1)].  Peels the largest-mean atom by
/// solving the single-variable window equation, excises its quantile band,
/// and recurses.  Interior equalities within eps_split split the block
/// instead of failing.
LaminarFamily construct_block(const StateDistribution& dist, double q0, double q1, std::vector<BlockAtom> atoms,
                              double eps_split = 1e-9);

struct MechanismElement {
    int cell = -1;
    std::string message;
    double p = 0.0, z = 0.0;
    std::vector<Interval> parts;
    Interval hull;
    int block = -1;
    int atom_rank = 0;  // peel depth; larger rank = inner, owns shared endpoints
};

struct MechanismEntry {
    std::vector<MechanismElement> elements;  // ascending means
    std::vector<Block> blocks;               // provenance from the solution
};

/// Per-entry laminar partitional signal realizing a MenuSolution.
struct Mechanism {
    StateDistribution dist = StateDistribution::uniform(0.0, 1.0);
    std::vector<MechanismEntry> entries;
    bool is_public = false;

    /// Element index whose partition element contains t; shared endpoints
    /// go to the inner (later-peeled) interval.
    int route(int entry, double t) const;
};

/// Builds the per-entry mechanism: binding groups, equal-mean merging,
/// then construct_block per block.  Expects a converged, refined solution.
Mechanism construct_mechanism(const MenuSolution& sol);

struct LaminarCheck {
    std::string name;
    bool pass = true;
    std::string detail;
};

struct LaminarReport {
    std::vector<LaminarCheck> checks;
    int max_block_size = 0;
    int max_element_intervals = 0;

    bool pass() const {
        for (const LaminarCheck& c : checks) {
            if (!c.pass) return false;
        }
        return true;
    }
};

/// Audits the laminar structure: pairwise hull nesting, partition
/// disjointness and coverage, per-block message counts against the n+2
/// bound, and per-element interval counts.
LaminarReport validate_laminar(const Mechanism& mech, int num_types = -1);

}  // namespace persuasion
