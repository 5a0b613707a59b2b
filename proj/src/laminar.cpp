#include "persuasion/laminar.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace persuasion {

namespace {

using Seg = std::pair<double, double>;  // quantile-space segment

double segs_mass(const std::vector<Seg>& segs) {
    double m = 0.0;
    for (const Seg& s : segs) m += s.second - s.first;
    return m;
}

// Active parts covered by the mass window [s, s+w].
std::vector<Seg> window_parts(const std::vector<Seg>& segs, double s, double w) {
    std::vector<Seg> parts;
    double skip = s, take = w;
    for (const Seg& seg : segs) {
        double lo = seg.first;
        double len = seg.second - seg.first;
        if (skip >= len) {
            skip -= len;
            continue;
        }
        lo += skip;
        len -= skip;
        skip = 0.0;
        const double use = std::min(len, take);
        if (use > 0.0) parts.emplace_back(lo, lo + use);
        take -= use;
        if (take <= 0.0) break;
    }
    return parts;
}

std::vector<Seg> remove_parts(const std::vector<Seg>& segs, const std::vector<Seg>& parts) {
    std::vector<Seg> out;
    for (const Seg& seg : segs) {
        double cur = seg.first;
        for (const Seg& part : parts) {
            const double lo = std::max(part.first, seg.first);
            const double hi = std::min(part.second, seg.second);
            if (hi <= lo) continue;  // part does not meet this segment
            if (lo - cur > 1e-15) out.emplace_back(cur, lo);
            cur = std::max(cur, hi);
        }
        if (seg.second - cur > 1e-15) out.emplace_back(cur, seg.second);
    }
    return out;
}

LaminarFamily construct_block_strict(const StateDistribution& dist, double q0, double q1,
                                     const std::vector<BlockAtom>& atoms) {
    const size_t k = atoms.size();
    LaminarFamily fam;
    fam.q_lo = q0;
    fam.q_hi = q1;
    fam.hulls.resize(k);
    fam.elements.resize(k);

    auto band_integral = [&](double a, double b) {
        return dist.lower_quantile_integral(b) - dist.lower_quantile_integral(a);
    };

    std::vector<Seg> active{{q0, q1}};
    for (size_t j = k; j-- > 1;) {
        const BlockAtom& atom = atoms[j];
        const double w = atom.p;
        const double total = segs_mass(active);
        const double smax = std::max(0.0, total - w);
        auto g = [&](double s) {
            double val = 0.0;
            for (const Seg& part : window_parts(active, s, w)) val += band_integral(part.first, part.second);
            return val;
        };
        double lo = 0.0, hi = smax;
        const double glo = g(lo), ghi = g(hi);
        const double br_tol = 1e-9 * (1.0 + std::abs(atom.z));
        double s = 0.0;
        if (atom.z <= glo + br_tol) {
            if (atom.z < glo - br_tol) {
                throw std::runtime_error("construct_block: window equation below bracket at atom " + std::to_string(j) +
                                         " (majorization precondition violated)");
            }
            s = lo;
        } else if (atom.z >= ghi - br_tol) {
            if (atom.z > ghi + br_tol) {
                throw std::runtime_error("construct_block: window equation above bracket at atom " + std::to_string(j) +
                                         " (majorization precondition violated)");
            }
            s = hi;
        } else {
            // g is continuous and strictly increasing in the offset.
            for (int it = 0; it < 80 && hi - lo > 1e-13; ++it) {
                const double mid = 0.5 * (lo + hi);
                (g(mid) < atom.z ? lo : hi) = mid;
            }
            s = 0.5 * (lo + hi);
        }
        const std::vector<Seg> parts = window_parts(active, s, w);
        fam.hulls[j] = Interval{dist.quantile(parts.front().first), dist.quantile(parts.back().second)};
        for (const Seg& part : parts) {
            fam.elements[j].push_back(Interval{dist.quantile(part.first), dist.quantile(part.second)});
        }
        active = remove_parts(active, parts);
    }
    fam.hulls[0] = Interval{dist.quantile(q0), dist.quantile(q1)};
    for (const Seg& part : active) {
        fam.elements[0].push_back(Interval{dist.quantile(part.first), dist.quantile(part.second)});
    }
    if (fam.elements[0].empty()) {
        throw std::runtime_error("construct_block: first atom left with empty element");
    }
    return fam;
}

}  // namespace

LaminarFamily construct_block(const StateDistribution& dist, double q0, double q1, std::vector<BlockAtom> atoms,
                              double eps_split) {
    if (atoms.empty()) throw std::invalid_argument("construct_block: no atoms");
    if (!(q0 >= 0.0 && q1 <= 1.0 && q0 < q1)) throw std::invalid_argument("construct_block: bad quantile window");
    double sum_p = 0.0, sum_z = 0.0;
    for (size_t i = 0; i < atoms.size(); ++i) {
        if (!(atoms[i].p > 0.0)) throw std::invalid_argument("construct_block: atom with nonpositive mass");
        if (i > 0 && !(atoms[i].z / atoms[i].p > atoms[i - 1].z / atoms[i - 1].p)) {
            throw std::invalid_argument("construct_block: atom means must be strictly increasing");
        }
        sum_p += atoms[i].p;
        sum_z += atoms[i].z;
    }
    const double span_int = dist.lower_quantile_integral(q1) - dist.lower_quantile_integral(q0);
    const double tol_mass = 1e-7 * (1.0 + std::abs(q1 - q0));
    const double tol_int = 1e-7 * (1.0 + std::abs(span_int));
    if (std::abs(sum_p - (q1 - q0)) > tol_mass) {
        throw std::invalid_argument("construct_block: block masses do not sum to the quantile window");
    }
    if (std::abs(sum_z - span_int) > tol_int) {
        throw std::invalid_argument("construct_block: block means do not integrate the quantile window");
    }
    // Absorb the residual mass/mean defect into the largest atom so the
    // window equations are exactly consistent.
    {
        size_t arg = 0;
        for (size_t i = 1; i < atoms.size(); ++i) {
            if (atoms[i].p > atoms[arg].p) arg = i;
        }
        atoms[arg].p += (q1 - q0) - sum_p;
        atoms[arg].z += span_int - sum_z;
        atoms[arg].mu = atoms[arg].z / atoms[arg].p;
    }

    // Interior equality splits the block at the equality index.
    double sufp = 0.0, sufz = 0.0;
    for (size_t j = atoms.size(); j-- > 1;) {
        sufp += atoms[j].p;
        sufz += atoms[j].z;
        const double slack = (dist.lower_quantile_integral(q1) - dist.lower_quantile_integral(q1 - sufp)) - sufz;
        if (slack < -tol_int) {
            throw std::invalid_argument("construct_block: interior majorization violated at atom " + std::to_string(j));
        }
        if (slack <= eps_split) {
            const double qmid = q1 - sufp;
            std::vector<BlockAtom> lower(atoms.begin(), atoms.begin() + static_cast<long>(j));
            std::vector<BlockAtom> upper(atoms.begin() + static_cast<long>(j), atoms.end());
            LaminarFamily a = construct_block(dist, q0, qmid, std::move(lower), eps_split);
            LaminarFamily b = construct_block(dist, qmid, q1, std::move(upper), eps_split);
            a.q_hi = q1;
            a.hulls.insert(a.hulls.end(), b.hulls.begin(), b.hulls.end());
            a.elements.insert(a.elements.end(), b.elements.begin(), b.elements.end());
            return a;
        }
    }
    return construct_block_strict(dist, q0, q1, atoms);
}

Mechanism construct_mechanism(const MenuSolution& sol) {
    SolverConfig defaults;
    const double eps_bind = defaults.binding_eps(sol.dist);

    Mechanism mech;
    mech.dist = sol.dist;
    mech.is_public = sol.is_public;
    mech.entries.resize(static_cast<size_t>(sol.num_entries()));

    for (int e = 0; e < sol.num_entries(); ++e) {
        const StepProfile& pr = sol.profiles[static_cast<size_t>(e)];
        MechanismEntry& entry = mech.entries[static_cast<size_t>(e)];
        entry.blocks = binding_groups(sol, e, eps_bind);

        for (size_t bi = 0; bi < entry.blocks.size(); ++bi) {
            Block& blk = entry.blocks[bi];
            // Atoms with equal means are merged before construction; the
            // merged atom keeps the designer-preferred cell.
            std::vector<BlockAtom> merged;
            for (const BlockAtom& at : blk.atoms) {
                if (!merged.empty() && std::abs(merged.back().mu - at.mu) <= 1e-9) {
                    BlockAtom& prev = merged.back();
                    const double p = prev.p + at.p;
                    const double z = prev.z + at.z;
                    const double mu = z / p;
                    const ActionCell& ca = pr.cells[static_cast<size_t>(prev.cell)];
                    const ActionCell& cb = pr.cells[static_cast<size_t>(at.cell)];
                    prev.cell = cb.reward(mu) >= ca.reward(mu) ? at.cell : prev.cell;
                    prev.p = p;
                    prev.z = z;
                    prev.mu = mu;
                } else {
                    merged.push_back(at);
                }
            }
            blk.atoms = merged;

            const LaminarFamily fam = construct_block(sol.dist, blk.q_lo, blk.q_hi, blk.atoms);
            for (size_t ai = 0; ai < blk.atoms.size(); ++ai) {
                MechanismElement el;
                el.cell = blk.atoms[ai].cell;
                el.message = pr.cells[static_cast<size_t>(el.cell)].label;
                el.p = blk.atoms[ai].p;
                el.z = blk.atoms[ai].z;
                el.parts = fam.elements[ai];
                el.hull = fam.hulls[ai];
                el.block = static_cast<int>(bi);
                el.atom_rank = static_cast<int>(ai);
                entry.elements.push_back(std::move(el));
            }
        }
    }
    return mech;
}

int Mechanism::route(int entry, double t) const {
    const MechanismEntry& en = entries[static_cast<size_t>(entry)];
    int best = -1;
    int best_rank = -1;
    for (size_t i = 0; i < en.elements.size(); ++i) {
        const MechanismElement& el = en.elements[i];
        for (const Interval& iv : el.parts) {
            if (t >= iv.lo && t <= iv.hi) {
                // Shared endpoints belong to the inner (later-peeled) interval.
                const int rank = el.block * 1000 + el.atom_rank;
                if (rank > best_rank) {
                    best_rank = rank;
                    best = static_cast<int>(i);
                }
                break;
            }
        }
    }
    if (best < 0) throw std::runtime_error("route: state not covered by the partition");
    return best;
}

LaminarReport validate_laminar(const Mechanism& mech, int num_types) {
    if (num_types < 0) num_types = static_cast<int>(mech.entries.size());
    const double span = mech.dist.support_hi() - mech.dist.support_lo();
    const double tol = 1e-9 * (1.0 + std::abs(span));

    LaminarReport rep;
    LaminarCheck laminar{"laminar-hulls", true, ""};
    LaminarCheck disjoint{"partition-disjoint", true, ""};
    LaminarCheck coverage{"partition-coverage", true, ""};
    LaminarCheck block_bound{"block-message-bound", true, ""};
    LaminarCheck interval_bound{"element-interval-bound", true, ""};

    for (size_t e = 0; e < mech.entries.size(); ++e) {
        const MechanismEntry& en = mech.entries[e];
        for (size_t i = 0; i < en.elements.size(); ++i) {
            for (size_t j = i + 1; j < en.elements.size(); ++j) {
                const Interval& a = en.elements[i].hull;
                const Interval& b = en.elements[j].hull;
                const double ov_lo = std::max(a.lo, b.lo);
                const double ov_hi = std::min(a.hi, b.hi);
                if (ov_hi - ov_lo <= tol) continue;  // disjoint
                const bool a_in_b = a.lo >= b.lo - tol && a.hi <= b.hi + tol;
                const bool b_in_a = b.lo >= a.lo - tol && b.hi <= a.hi + tol;
                if (!a_in_b && !b_in_a) {
                    laminar.pass = false;
                    laminar.detail = "entry " + std::to_string(e) + ": hulls of elements " + std::to_string(i) + "," +
                                     std::to_string(j) + " overlap without nesting";
                }
            }
        }

        std::vector<Interval> parts;
        for (const MechanismElement& el : en.elements) {
            parts.insert(parts.end(), el.parts.begin(), el.parts.end());
            rep.max_element_intervals = std::max(rep.max_element_intervals, static_cast<int>(el.parts.size()));
            const int bsz = static_cast<int>(en.blocks[static_cast<size_t>(el.block)].atoms.size());
            if (static_cast<int>(el.parts.size()) > bsz) {
                interval_bound.pass = false;
                interval_bound.detail = "entry " + std::to_string(e) + ": element exceeds its block size";
            }
        }
        std::sort(parts.begin(), parts.end(), [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
        double cursor = mech.dist.support_lo();
        for (const Interval& iv : parts) {
            if (iv.lo < cursor - tol) {
                disjoint.pass = false;
                disjoint.detail = "entry " + std::to_string(e) + ": overlapping partition elements";
            }
            if (iv.lo > cursor + tol) {
                coverage.pass = false;
                coverage.detail = "entry " + std::to_string(e) + ": gap in the partition";
            }
            cursor = std::max(cursor, iv.hi);
        }
        if (std::abs(cursor - mech.dist.support_hi()) > tol) {
            coverage.pass = false;
            coverage.detail = "entry " + std::to_string(e) + ": partition does not reach the support end";
        }

        for (const Block& blk : en.blocks) {
            rep.max_block_size = std::max(rep.max_block_size, static_cast<int>(blk.atoms.size()));
            if (static_cast<int>(blk.atoms.size()) > num_types + 2) {
                block_bound.pass = false;
                block_bound.detail = "entry " + std::to_string(e) + ": block with " + std::to_string(blk.atoms.size()) +
                                     " messages exceeds n+2=" + std::to_string(num_types + 2);
            }
        }
    }

    rep.checks = {laminar, disjoint, coverage, block_bound, interval_bound};
    return rep;
}

}  // namespace persuasion
