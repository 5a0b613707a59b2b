#include "persuasion/instances.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace persuasion {

Problem buyer_problem() {
    Problem pb;
    pb.distribution = StateDistribution::uniform(0.0, 1.0);
    pb.types = {{"low", 1.0 / 3.0}, {"medium", 1.0 / 3.0}, {"high", 1.0 / 3.0}};
    pb.actions = {"0", "1", "2", "3"};
    const double price = 10.0 / 3.0;
    const std::vector<double> tastes{0.3, 0.45, 0.6};
    for (double taste : tastes) {
        std::vector<double> u1row, u2row, v1row, v2row;
        for (int q = 0; q <= 3; ++q) {
            double slope = 0.0, value = 0.0;
            for (int unit = 1; unit <= q; ++unit) {
                const double marginal = std::max(5 - unit, 0);
                slope += marginal;
                value += taste * marginal - price;
            }
            u1row.push_back(slope);
            u2row.push_back(value);
            v1row.push_back(0.0);
            v2row.push_back(static_cast<double>(q));
        }
        pb.u1.push_back(u1row);
        pb.u2.push_back(u2row);
        pb.v1.push_back(v1row);
        pb.v2.push_back(v2row);
    }
    pb.validate_and_normalize();
    return pb;
}

Problem threshold_problem() {
    Problem pb;
    pb.distribution = StateDistribution::uniform(0.0, 1.0);
    pb.types = {{"t", 1.0}};
    pb.actions = {"pass", "act"};
    pb.u1 = {{0.0, 1.0}};
    pb.u2 = {{0.0, -0.75}};
    pb.v1 = {{0.0, 0.0}};
    pb.v2 = {{0.0, 1.0}};
    pb.validate_and_normalize();
    return pb;
}

namespace {

// Knot grids of the public-vs-private instance.
std::vector<double> pp_knots(int n) {
    std::vector<double> t;
    for (int side = 0; side < 2; ++side) {
        const double center = side == 0 ? 0.25 : 0.75;
        for (int k = -2 * n; k <= 2 * n; ++k) {
            const double sgn = k > 0 ? 1.0 : (k < 0 ? -1.0 : 0.0);
            t.push_back(center + 0.125 * sgn * std::sqrt(std::abs(k) / (2.0 * n)));
        }
    }
    return t;
}

int pp_knot_index(int n, bool right, int k) { return (right ? 4 * n + 1 : 0) + k + 2 * n; }

// The four reward-1 chords of type t (1-based): the chords whose endpoint
// carries that type's menu atom.
std::vector<int> pp_reward_chords(int n, int t) {
    return {
        pp_knot_index(n, false, 2 * t) - 1,       // upper endpoint bL_{2t}
        pp_knot_index(n, false, -2 * t),          // lower endpoint bL_{-2t}
        pp_knot_index(n, true, 2 * n + 2 - 2 * t) - 1,
        pp_knot_index(n, true, 2 * t - 2 * n - 2),
    };
}

}  // namespace

Problem public_private_problem(int n) {
    if (n < 2) throw std::invalid_argument("public_private_problem: need n >= 2");
    Problem pb;
    pb.distribution = StateDistribution::uniform(0.0, 1.0);
    for (int t = 1; t <= n; ++t) pb.types.push_back({"t" + std::to_string(t), 1.0 / n});

    const std::vector<double> knots = pp_knots(n);
    const int chords = static_cast<int>(knots.size()) - 1;
    std::vector<double> u1row, u2row;
    for (int i = 0; i < chords; ++i) {
        pb.actions.push_back("s" + std::to_string(i));
        // chord of m^2 between consecutive knots: (a+b) m - a b
        u1row.push_back(knots[static_cast<size_t>(i)] + knots[static_cast<size_t>(i) + 1]);
        u2row.push_back(-knots[static_cast<size_t>(i)] * knots[static_cast<size_t>(i) + 1]);
    }
    for (int t = 1; t <= n; ++t) {
        pb.u1.push_back(u1row);
        pb.u2.push_back(u2row);
        pb.v1.push_back(std::vector<double>(static_cast<size_t>(chords), 0.0));
        std::vector<double> v2row(static_cast<size_t>(chords), 0.0);
        for (int chord : pp_reward_chords(n, t)) v2row[static_cast<size_t>(chord)] = 1.0;
        pb.v2.push_back(v2row);
    }
    pb.validate_and_normalize();
    return pb;
}

MenuSolution public_private_explicit_menu(const Problem& pb, int n) {
    MenuSolution sol;
    sol.dist = pb.distribution;
    for (int t = 0; t < pb.num_types(); ++t) {
        sol.profiles.push_back(derive_step_profile(pb, t));
        sol.weights.push_back(pb.types[static_cast<size_t>(t)].weight);
        sol.entry_labels.push_back(pb.types[static_cast<size_t>(t)].label);
    }
    sol.is_public = false;
    sol.ic_included = true;

    const std::vector<double> knots = pp_knots(n);
    sol.entries.assign(static_cast<size_t>(n), {});
    for (int t = 1; t <= n; ++t) {
        const StepProfile& pr = sol.profiles[static_cast<size_t>(t - 1)];
        TypeSolution& ts = sol.entries[static_cast<size_t>(t - 1)];
        ts.p.assign(static_cast<size_t>(pr.num_cells()), 0.0);
        ts.z.assign(static_cast<size_t>(pr.num_cells()), 0.0);
        const std::vector<int> actions = pp_reward_chords(n, t);
        const std::vector<int> knot_ids = {
            pp_knot_index(n, false, 2 * t),
            pp_knot_index(n, false, -2 * t),
            pp_knot_index(n, true, 2 * n + 2 - 2 * t),
            pp_knot_index(n, true, 2 * t - 2 * n - 2),
        };
        for (size_t i = 0; i < actions.size(); ++i) {
            int cell = -1;
            for (int a = 0; a < pr.num_cells(); ++a) {
                if (pr.cells[static_cast<size_t>(a)].action == actions[i]) cell = a;
            }
            if (cell < 0) throw std::logic_error("public_private_explicit_menu: reward chord fell off the envelope");
            const double mean = knots[static_cast<size_t>(knot_ids[i])];
            ts.p[static_cast<size_t>(cell)] += 0.25;
            ts.z[static_cast<size_t>(cell)] += 0.25 * mean;
        }
    }
    rebuild_y(sol);
    sol.objective = sol.designer_payoff();
    return sol;
}

void rebuild_y(MenuSolution& sol) {
    const int n = sol.num_entries();
    sol.y.assign(static_cast<size_t>(n), {});
    for (int th = 0; th < n; ++th) {
        sol.y[static_cast<size_t>(th)].assign(static_cast<size_t>(n), {});
        for (int rep = 0; rep < n; ++rep) {
            const TypeSolution& ts = sol.entries[static_cast<size_t>(rep)];
            const StepProfile& pth = sol.profiles[static_cast<size_t>(th)];
            std::vector<double>& yy = sol.y[static_cast<size_t>(th)][static_cast<size_t>(rep)];
            yy.resize(ts.p.size());
            for (size_t ap = 0; ap < ts.p.size(); ++ap) {
                double best = -std::numeric_limits<double>::infinity();
                for (const ActionCell& c : pth.cells) {
                    best = std::max(best, c.h * ts.p[ap] + c.slope * (ts.z[ap] - c.b_hi * ts.p[ap]));
                }
                yy[ap] = best;
            }
        }
    }
}

}  // namespace persuasion
