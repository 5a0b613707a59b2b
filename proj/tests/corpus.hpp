#pragma once

// Random instance and random signal generators shared by the property
// suites and the acceptance runner.

#include <algorithm>
#include <random>
#include <vector>

#include "persuasion/model.hpp"
#include "persuasion/reduced_form.hpp"

namespace corpus {

inline double unif(std::mt19937_64& rng, double lo, double hi) {
    return lo + (hi - lo) * (static_cast<double>(rng() >> 11) * (1.0 / 9007199254740992.0));
}

inline persuasion::StateDistribution random_distribution(std::mt19937_64& rng) {
    if (rng() % 2 == 0) return persuasion::StateDistribution::uniform(0.0, 1.0);
    const int segs = 2 + static_cast<int>(rng() % 4);
    std::vector<std::pair<double, double>> knots;
    double t = 0.0, q = 0.0;
    knots.emplace_back(0.0, 0.0);
    for (int i = 0; i < segs; ++i) {
        t += 0.1 + unif(rng, 0.0, 1.0);
        q += 0.05 + unif(rng, 0.0, 1.0);
        knots.emplace_back(t, q);
    }
    for (auto& [kt, kq] : knots) {
        kt /= knots.back().first;
        kq /= knots.back().second;
    }
    return persuasion::StateDistribution::piecewise_linear_cdf(knots);
}

/// Random problem with every action active for every type: slopes strictly
/// increasing and intercepts chained through interior indifference cutoffs.
inline persuasion::Problem random_problem(std::mt19937_64& rng, bool nonnegative_rewards) {
    persuasion::Problem pb;
    pb.distribution = random_distribution(rng);
    const double lo = pb.distribution.support_lo();
    const double hi = pb.distribution.support_hi();
    const int n = 2 + static_cast<int>(rng() % 3);  // 2..4 types
    const int k = 2 + static_cast<int>(rng() % 4);  // 2..5 actions
    for (int t = 0; t < n; ++t) pb.types.push_back({"t" + std::to_string(t), unif(rng, 0.2, 1.0)});
    for (int a = 0; a < k; ++a) pb.actions.push_back("a" + std::to_string(a));
    for (int t = 0; t < n; ++t) {
        std::vector<double> slopes(static_cast<size_t>(k));
        double s = unif(rng, -2.0, 0.0);
        for (int a = 0; a < k; ++a) {
            slopes[static_cast<size_t>(a)] = s;
            s += unif(rng, 0.15, 1.2);
        }
        std::vector<double> cuts;
        for (int i = 0; i < k - 1; ++i) cuts.push_back(unif(rng, lo + 0.03 * (hi - lo), hi - 0.03 * (hi - lo)));
        std::sort(cuts.begin(), cuts.end());
        for (size_t i = 0; i + 1 < cuts.size(); ++i) {
            cuts[i + 1] = std::max(cuts[i + 1], cuts[i] + 0.02 * (hi - lo));
        }
        std::vector<double> inter(static_cast<size_t>(k), 0.0);
        inter[0] = unif(rng, -0.5, 0.5);
        for (int a = 0; a + 1 < k; ++a) {
            // indifference at the cutoff: u1_a b + u2_a = u1_{a+1} b + u2_{a+1}
            inter[static_cast<size_t>(a) + 1] =
                inter[static_cast<size_t>(a)] +
                (slopes[static_cast<size_t>(a)] - slopes[static_cast<size_t>(a) + 1]) * cuts[static_cast<size_t>(a)];
        }
        pb.u1.push_back(slopes);
        pb.u2.push_back(inter);
        std::vector<double> v1row(static_cast<size_t>(k), 0.0), v2row(static_cast<size_t>(k), 0.0);
        for (int a = 0; a < k; ++a) {
            v2row[static_cast<size_t>(a)] = nonnegative_rewards ? unif(rng, 0.0, 2.0) : unif(rng, -1.0, 2.0);
            if (!nonnegative_rewards && rng() % 3 == 0) v1row[static_cast<size_t>(a)] = unif(rng, -0.5, 0.5);
        }
        pb.v1.push_back(v1row);
        pb.v2.push_back(v2row);
    }
    pb.validate_and_normalize();
    return pb;
}

/// A feasible hand-built menu entry: slice the quantile axis, deal the
/// slices to random messages, and read the induced (p, z) off the exact
/// interval statistics.  Profiles carry synthetic cells separating the
/// message means so the construction path can run on them.
inline persuasion::MenuSolution random_signal_solution(const persuasion::StateDistribution& dist,
                                                       std::mt19937_64& rng) {
    using namespace persuasion;
    const int messages = 2 + static_cast<int>(rng() % 4);
    const int slices = 12 + static_cast<int>(rng() % 28);
    std::vector<double> qcuts{0.0, 1.0};
    for (int i = 0; i < slices - 1; ++i) qcuts.push_back(unif(rng, 0.01, 0.99));
    std::sort(qcuts.begin(), qcuts.end());

    struct Msg {
        double p = 0.0, z = 0.0;
    };
    std::vector<Msg> raw(static_cast<size_t>(messages));
    for (size_t i = 0; i + 1 < qcuts.size(); ++i) {
        if (qcuts[i + 1] - qcuts[i] < 1e-9) continue;
        const size_t m = rng() % static_cast<size_t>(messages);
        const auto [p, z] = dist.interval_stats({Interval{dist.quantile(qcuts[i]), dist.quantile(qcuts[i + 1])}});
        raw[m].p += p;
        raw[m].z += z;
    }
    std::vector<Msg> kept;
    for (const Msg& m : raw) {
        if (m.p > 1e-9) kept.push_back(m);
    }
    std::sort(kept.begin(), kept.end(), [](const Msg& a, const Msg& b) { return a.z / a.p < b.z / b.p; });
    std::vector<Msg> merged;
    for (const Msg& m : kept) {
        if (!merged.empty() && m.z / m.p - merged.back().z / merged.back().p < 1e-6) {
            merged.back().p += m.p;
            merged.back().z += m.z;
        } else {
            merged.push_back(m);
        }
    }

    MenuSolution sol;
    sol.dist = dist;
    sol.weights = {1.0};
    sol.entry_labels = {"sig"};
    sol.is_public = false;
    sol.ic_included = false;
    StepProfile prof;
    prof.type = 0;
    prof.lo = dist.support_lo();
    prof.hi = dist.support_hi();
    TypeSolution ts;
    for (size_t i = 0; i < merged.size(); ++i) {
        ActionCell cell;
        cell.action = static_cast<int>(i);
        cell.label = "m" + std::to_string(i);
        cell.slope = static_cast<double>(i);
        const double mu_prev = i > 0 ? merged[i - 1].z / merged[i - 1].p : 0.0;
        const double mu = merged[i].z / merged[i].p;
        const double mu_next = i + 1 < merged.size() ? merged[i + 1].z / merged[i + 1].p : 0.0;
        cell.b_lo = i == 0 ? prof.lo : 0.5 * (mu_prev + mu);
        cell.b_hi = i + 1 < merged.size() ? 0.5 * (mu + mu_next) : prof.hi;
        cell.v1 = 0.0;
        cell.v2 = unif(rng, 0.0, 1.0);
        prof.cells.push_back(cell);
        ts.p.push_back(merged[i].p);
        ts.z.push_back(merged[i].z);
    }
    prof.right_owner.assign(prof.cells.size() - 1, true);
    sol.profiles = {prof};
    sol.entries = {ts};
    sol.objective = sol.designer_payoff();
    return sol;
}

}  // namespace corpus
