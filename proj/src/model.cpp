#include "persuasion/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace persuasion {

bool Problem::validate_and_normalize() {
    const size_t n = types.size();
    const size_t k = actions.size();
    if (n == 0) throw std::invalid_argument("problem: no types");
    if (k == 0) throw std::invalid_argument("problem: no actions");
    auto check = [&](const std::vector<std::vector<double>>& m, const char* name) {
        if (m.size() != n) throw std::invalid_argument(std::string("problem: ") + name + " row count != |types|");
        for (const auto& row : m) {
            if (row.size() != k) throw std::invalid_argument(std::string("problem: ") + name + " column count != |actions|");
            for (double x : row) {
                if (!std::isfinite(x)) throw std::invalid_argument(std::string("problem: non-finite entry in ") + name);
            }
        }
    };
    check(u1, "u1");
    check(u2, "u2");
    check(v1, "v1");
    check(v2, "v2");
    if (!participation.empty() && participation.size() != n) {
        throw std::invalid_argument("problem: participation size != |types|");
    }
    double sum = 0.0;
    for (const TypeSpec& t : types) {
        if (!(t.weight > 0.0)) throw std::invalid_argument("problem: type weights must be strictly positive");
        sum += t.weight;
    }
    const bool renormalized = std::abs(sum - 1.0) > 1e-9;
    for (TypeSpec& t : types) t.weight /= sum;
    return renormalized;
}

namespace {

struct Line {
    double c = 0.0;  // slope (u1)
    double d = 0.0;  // intercept (u2)
    double v1 = 0.0, v2 = 0.0;
    int action = -1;
};

double intersect(const Line& a, const Line& b) {
    // b has the strictly larger slope
    return (a.d - b.d) / (b.c - a.c);
}

}  // namespace

StepProfile derive_step_profile(const Problem& pb, int type_index) {
    if (type_index < 0 || type_index >= pb.num_types()) {
        throw std::invalid_argument("derive_step_profile: type index out of range");
    }
    const size_t t = static_cast<size_t>(type_index);
    const double lo = pb.distribution.support_lo();
    const double hi = pb.distribution.support_hi();
    const double span = hi - lo;
    const int k = pb.num_actions();

    std::vector<Line> lines;
    lines.reserve(static_cast<size_t>(k));
    double cscale = 0.0, dscale = 0.0;
    for (int a = 0; a < k; ++a) {
        Line ln{pb.u1[t][static_cast<size_t>(a)], pb.u2[t][static_cast<size_t>(a)],
                pb.v1[t][static_cast<size_t>(a)], pb.v2[t][static_cast<size_t>(a)], a};
        cscale = std::max(cscale, std::abs(ln.c));
        dscale = std::max(dscale, std::abs(ln.d));
        lines.push_back(ln);
    }
    const double ctol = 1e-12 * (1.0 + cscale);
    const double dtol = 1e-12 * (1.0 + dscale + cscale * std::abs(span));

    StepProfile prof;
    prof.type = type_index;
    prof.lo = lo;
    prof.hi = hi;

    // Drop duplicates of identical receiver utility, keeping the action the
    // designer prefers at the (shared) cell; ties go to the higher index.
    const double mid = 0.5 * (lo + hi);
    std::vector<bool> dropped(static_cast<size_t>(k), false);
    for (size_t i = 0; i < lines.size(); ++i) {
        for (size_t j = i + 1; j < lines.size(); ++j) {
            if (dropped[static_cast<size_t>(lines[i].action)] || dropped[static_cast<size_t>(lines[j].action)]) continue;
            if (std::abs(lines[i].c - lines[j].c) <= ctol && std::abs(lines[i].d - lines[j].d) <= dtol) {
                const double ri = lines[i].v1 * mid + lines[i].v2;
                const double rj = lines[j].v1 * mid + lines[j].v2;
                dropped[static_cast<size_t>(ri > rj ? lines[j].action : lines[i].action)] = true;
            }
        }
    }

    std::vector<Line> cand;
    for (const Line& ln : lines) {
        if (dropped[static_cast<size_t>(ln.action)]) {
            prof.collapsed_actions.push_back(ln.action);
        } else {
            cand.push_back(ln);
        }
    }
    std::sort(cand.begin(), cand.end(), [](const Line& a, const Line& b) {
        if (a.c != b.c) return a.c < b.c;
        return a.d < b.d;
    });

    // Equal slopes: only the highest intercept can appear on the envelope.
    std::vector<Line> merged;
    for (const Line& ln : cand) {
        if (!merged.empty() && std::abs(merged.back().c - ln.c) <= ctol) {
            prof.collapsed_actions.push_back(merged.back().action);  // ln.d >= back().d
            merged.back() = ln;
        } else {
            merged.push_back(ln);
        }
    }

    // Upper envelope scan over slopes ascending; start[i] is where kept[i]
    // takes over from kept[i-1].
    std::vector<Line> kept;
    std::vector<double> start;
    const double neg_inf = -std::numeric_limits<double>::infinity();
    for (const Line& ln : merged) {
        double x = neg_inf;
        while (!kept.empty()) {
            x = intersect(kept.back(), ln);
            if (x <= start.back()) {
                prof.collapsed_actions.push_back(kept.back().action);
                kept.pop_back();
                start.pop_back();
                x = neg_inf;
            } else {
                break;
            }
        }
        if (!kept.empty()) x = intersect(kept.back(), ln);
        kept.push_back(ln);
        start.push_back(x);
    }

    // Clip to the support; a cell of width <= wtol is treated as never
    // optimal (degenerate triple intersections collapse).
    const double wtol = 1e-12 * (1.0 + std::abs(span));
    for (size_t i = 0; i < kept.size(); ++i) {
        const double cell_lo = std::max(lo, start[i]);
        const double cell_hi = std::min(hi, i + 1 < kept.size() ? start[i + 1] : std::numeric_limits<double>::infinity());
        if (cell_hi - cell_lo <= wtol) {
            prof.collapsed_actions.push_back(kept[i].action);
            continue;
        }
        ActionCell cell;
        cell.action = kept[i].action;
        cell.label = pb.actions[static_cast<size_t>(kept[i].action)];
        cell.slope = kept[i].c;
        cell.b_lo = cell_lo;
        cell.b_hi = cell_hi;
        cell.v1 = kept[i].v1;
        cell.v2 = kept[i].v2;
        prof.cells.push_back(cell);
    }
    if (prof.cells.empty()) throw std::logic_error("derive_step_profile: empty envelope");

    // Make the cutoff grid contiguous and anchored at the support endpoints,
    // then set intercept anchors h = u2 + u1 * b_hi.
    prof.cells.front().b_lo = lo;
    prof.cells.back().b_hi = hi;
    for (size_t i = 0; i + 1 < prof.cells.size(); ++i) {
        prof.cells[i + 1].b_lo = prof.cells[i].b_hi;
    }
    for (ActionCell& cell : prof.cells) {
        const size_t a = static_cast<size_t>(cell.action);
        cell.h = pb.u2[t][a] + pb.u1[t][a] * cell.b_hi;
    }

    prof.right_owner.resize(prof.cells.size() > 0 ? prof.cells.size() - 1 : 0, true);
    for (size_t i = 0; i + 1 < prof.cells.size(); ++i) {
        const double b = prof.cells[i].b_hi;
        prof.right_owner[i] = prof.cells[i + 1].reward(b) >= prof.cells[i].reward(b);
    }

    std::sort(prof.collapsed_actions.begin(), prof.collapsed_actions.end());
    return prof;
}

double StepProfile::indirect_utility(double m) const {
    const double slack = 1e-9 * (1.0 + std::abs(hi - lo));
    if (m < lo - slack || m > hi + slack) {
        throw std::invalid_argument("indirect_utility: posterior mean outside support");
    }
    const double mc = std::clamp(m, lo, hi);
    size_t i = 0;
    while (i + 1 < cells.size() && mc > cells[i].b_hi) ++i;
    return cells[i].utility(mc);
}

int StepProfile::best_cell(double m) const {
    const double slack = 1e-9 * (1.0 + std::abs(hi - lo));
    if (m < lo - slack || m > hi + slack) {
        throw std::invalid_argument("best_cell: posterior mean outside support");
    }
    const double mc = std::clamp(m, lo, hi);
    const double btol = 1e-12 * (1.0 + std::abs(mc));
    size_t i = 0;
    while (i + 1 < cells.size() && mc > cells[i].b_hi + btol) ++i;
    // At an interior cutoff the ownership flag decides.
    if (i + 1 < cells.size() && std::abs(mc - cells[i].b_hi) <= btol) {
        return right_owner[i] ? static_cast<int>(i) + 1 : static_cast<int>(i);
    }
    return static_cast<int>(i);
}

}  // namespace persuasion
