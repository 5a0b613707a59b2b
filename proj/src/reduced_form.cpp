#include "persuasion/reduced_form.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "persuasion/simplex.hpp"

namespace persuasion {

namespace {

// max_a h_a p + c_a (z - b_a p) over the cells of `prof`; the best response
// of that type to one recommendation atom.  argmax_cell receives the winner.
double best_response_term(const StepProfile& prof, double p, double z, int* argmax_cell = nullptr) {
    double best = -std::numeric_limits<double>::infinity();
    int arg = 0;
    for (int a = 0; a < prof.num_cells(); ++a) {
        const ActionCell& c = prof.cells[static_cast<size_t>(a)];
        const double val = c.h * p + c.slope * (z - c.b_hi * p);
        if (val > best) {
            best = val;
            arg = a;
        }
    }
    if (argmax_cell) *argmax_cell = arg;
    return best;
}

struct LpLayout {
    std::vector<int> pbase, zbase;
    double zoff = 0.0;  // columns store z - zoff*p >= 0
    int ncols = 0;
};

LpLayout make_layout(const std::vector<StepProfile>& profiles, double support_lo) {
    LpLayout lay;
    lay.zoff = std::min(0.0, support_lo);
    int col = 0;
    for (const StepProfile& pr : profiles) {
        lay.pbase.push_back(col);
        col += pr.num_cells();
    }
    for (const StepProfile& pr : profiles) {
        lay.zbase.push_back(col);
        col += pr.num_cells();
    }
    lay.ncols = col;
    return lay;
}

struct CutRow {
    std::vector<double> coef;
    double rhs;

    // Rows enter the LP normalized, so their effective feasibility
    // tolerance is lp_tol times this scale; the generator must measure
    // violations in the same units.
    double scale() const {
        double m = std::abs(rhs);
        for (double v : coef) m = std::max(m, std::abs(v));
        return std::max(1.0, m);
    }
};

// Supporting hyperplane of  sum z <= Phi(sum p)  at q0 for entry e, suffix
// starting at cell `ell`:  Phi'(q) = quantile(1-q).
CutRow majorization_tangent(const StateDistribution& dist, const LpLayout& lay, const std::vector<StepProfile>& profiles,
                            int e, int ell, double q0) {
    const double slope = dist.quantile(1.0 - q0);
    const double phi = dist.tail_quantile_integral(q0);
    CutRow row;
    row.coef.assign(static_cast<size_t>(lay.ncols), 0.0);
    const int k = profiles[static_cast<size_t>(e)].num_cells();
    for (int a = ell; a < k; ++a) {
        row.coef[static_cast<size_t>(lay.zbase[static_cast<size_t>(e)] + a)] = 1.0;
        row.coef[static_cast<size_t>(lay.pbase[static_cast<size_t>(e)] + a)] = lay.zoff - slope;
    }
    row.rhs = phi - slope * q0;
    return row;
}

// Truthful-value coefficients of entry e: sum_a h p + c (z - b p).
void add_truthful_coeffs(const LpLayout& lay, const std::vector<StepProfile>& profiles, int e, double sign,
                         std::vector<double>& coef) {
    const StepProfile& pr = profiles[static_cast<size_t>(e)];
    for (int a = 0; a < pr.num_cells(); ++a) {
        const ActionCell& c = pr.cells[static_cast<size_t>(a)];
        coef[static_cast<size_t>(lay.pbase[static_cast<size_t>(e)] + a)] += sign * (c.h - c.slope * c.b_hi + c.slope * lay.zoff);
        coef[static_cast<size_t>(lay.zbase[static_cast<size_t>(e)] + a)] += sign * c.slope;
    }
}

// Deviation cut: type `th` reports `rep` and responds with the fixed
// per-recommendation selection;  lhs(selection) - truthful(th) <= 0.
CutRow ic_selection_cut(const LpLayout& lay, const std::vector<StepProfile>& profiles, int th, int rep,
                        const std::vector<int>& selection) {
    const StepProfile& pth = profiles[static_cast<size_t>(th)];
    const StepProfile& prep = profiles[static_cast<size_t>(rep)];
    CutRow row;
    row.coef.assign(static_cast<size_t>(lay.ncols), 0.0);
    for (int ap = 0; ap < prep.num_cells(); ++ap) {
        const ActionCell& c = pth.cells[static_cast<size_t>(selection[static_cast<size_t>(ap)])];
        row.coef[static_cast<size_t>(lay.pbase[static_cast<size_t>(rep)] + ap)] += c.h - c.slope * c.b_hi + c.slope * lay.zoff;
        row.coef[static_cast<size_t>(lay.zbase[static_cast<size_t>(rep)] + ap)] += c.slope;
    }
    add_truthful_coeffs(lay, profiles, th, -1.0, row.coef);
    row.rhs = 0.0;
    return row;
}

struct Instance {
    StateDistribution dist = StateDistribution::uniform(0.0, 1.0);
    std::vector<StepProfile> profiles;
    std::vector<double> weights;
    std::vector<std::string> labels;
    std::vector<std::optional<double>> participation;  // per entry (empty: none)
    bool include_ic = true;
    bool is_public = false;
};

void extract(const DenseSimplex& lp, const LpLayout& lay, const Instance& inst, MenuSolution& sol) {
    const std::vector<double>& x = lp.solution();
    sol.entries.assign(inst.profiles.size(), {});
    for (size_t e = 0; e < inst.profiles.size(); ++e) {
        const int k = inst.profiles[e].num_cells();
        TypeSolution& ts = sol.entries[e];
        ts.p.assign(static_cast<size_t>(k), 0.0);
        ts.z.assign(static_cast<size_t>(k), 0.0);
        for (int a = 0; a < k; ++a) {
            const double p = x[static_cast<size_t>(lay.pbase[e] + a)];
            const double zt = x[static_cast<size_t>(lay.zbase[e] + a)];
            ts.p[static_cast<size_t>(a)] = p;
            ts.z[static_cast<size_t>(a)] = zt + lay.zoff * p;
        }
    }
}

// Exact majorization violation of one entry over all of [0,1]: the residual
// is convex in q between the atom suffix points, so the suffix points are
// the candidates; a fine grid is swept as well as a guard.
double exact_sweep(const StateDistribution& dist, const TypeSolution& ts) {
    const size_t k = ts.p.size();
    std::vector<double> sufp(k + 1, 0.0), sufz(k + 1, 0.0);
    for (size_t i = k; i-- > 0;) {
        sufp[i] = sufp[i + 1] + ts.p[i];
        sufz[i] = sufz[i + 1] + ts.z[i];
    }
    auto top_mass_integral = [&](double q) {
        // integral of the top-q mass of the induced atom distribution
        size_t i = k;
        while (i > 0 && sufp[i - 1] <= q) --i;
        if (i == k) return 0.0;
        const double rest = q - sufp[i];
        double val = sufz[i];
        if (i > 0 && ts.p[i - 1] > 0.0 && rest > 0.0) {
            val += rest * (ts.z[i - 1] / ts.p[i - 1]);
        }
        return val;
    };
    double worst = 0.0;
    auto probe = [&](double q) {
        q = std::clamp(q, 0.0, 1.0);
        worst = std::max(worst, top_mass_integral(q) - dist.tail_quantile_integral(q));
    };
    for (size_t i = 0; i <= k; ++i) probe(sufp[i]);
    for (int j = 0; j <= 1000; ++j) probe(j / 1000.0);
    return worst;
}

void reconstruct_y(MenuSolution& sol) {
    const int n = sol.num_entries();
    sol.y.assign(static_cast<size_t>(n), {});
    for (int th = 0; th < n; ++th) {
        sol.y[static_cast<size_t>(th)].assign(static_cast<size_t>(n), {});
        for (int rep = 0; rep < n; ++rep) {
            const TypeSolution& ts = sol.entries[static_cast<size_t>(rep)];
            std::vector<double>& yy = sol.y[static_cast<size_t>(th)][static_cast<size_t>(rep)];
            yy.resize(ts.p.size());
            for (size_t ap = 0; ap < ts.p.size(); ++ap) {
                yy[ap] = best_response_term(sol.profiles[static_cast<size_t>(th)], ts.p[ap], ts.z[ap]);
            }
        }
    }
}

double recompute_objective(const MenuSolution& sol) {
    double total = 0.0;
    for (int e = 0; e < sol.num_entries(); ++e) {
        const StepProfile& pr = sol.profiles[static_cast<size_t>(e)];
        const TypeSolution& ts = sol.entries[static_cast<size_t>(e)];
        double val = 0.0;
        for (int a = 0; a < pr.num_cells(); ++a) {
            const ActionCell& c = pr.cells[static_cast<size_t>(a)];
            val += c.v2 * ts.p[static_cast<size_t>(a)] + c.v1 * ts.z[static_cast<size_t>(a)];
        }
        total += sol.weights[static_cast<size_t>(e)] * val;
    }
    return total;
}

void refine_vertices(MenuSolution& sol, const SolverConfig& cfg);

// Diagnoses an infeasible participation system: maximizes the common slack t
// with truthful(e) >= bound_e + t and reports the worst type.
[[noreturn]] void diagnose_participation(const Instance& inst, const SolverConfig& cfg, const LpLayout& lay,
                                         const std::vector<CutRow>& static_rows_le,
                                         const std::vector<std::pair<std::vector<double>, double>>& eq_rows) {
    DenseSimplex lp(lay.ncols + 1, cfg.lp_tol);
    std::vector<double> obj(static_cast<size_t>(lay.ncols + 1), 0.0);
    obj[static_cast<size_t>(lay.ncols)] = 1.0;
    lp.set_objective(obj);
    for (const auto& [coef, rhs] : eq_rows) lp.add_row(coef, DenseSimplex::Sense::EQ, rhs);
    for (const CutRow& r : static_rows_le) lp.add_row(r.coef, DenseSimplex::Sense::LE, r.rhs);
    for (size_t e = 0; e < inst.profiles.size(); ++e) {
        const int k = inst.profiles[e].num_cells();
        for (int ell = 1; ell < k; ++ell) {
            for (int j = 0; j <= 64; ++j) {
                const CutRow r = majorization_tangent(inst.dist, lay, inst.profiles, static_cast<int>(e), ell, j / 64.0);
                lp.add_row(r.coef, DenseSimplex::Sense::LE, r.rhs);
            }
        }
    }
    for (size_t e = 0; e < inst.profiles.size(); ++e) {
        if (!inst.participation[e].has_value()) continue;
        std::vector<double> coef(static_cast<size_t>(lay.ncols + 1), 0.0);
        add_truthful_coeffs(lay, inst.profiles, static_cast<int>(e), 1.0, coef);
        coef[static_cast<size_t>(lay.ncols)] = -1.0;  // truthful - t >= bound
        lp.add_row(coef, DenseSimplex::Sense::GE, *inst.participation[e]);
    }
    int worst = -1;
    double worst_slack = std::numeric_limits<double>::infinity();
    if (lp.solve() == DenseSimplex::Status::Optimal) {
        // Slack per participating type at the max-slack solution.
        MenuSolution tmp;
        tmp.profiles = inst.profiles;
        extract(lp, lay, inst, tmp);
        for (size_t e = 0; e < inst.profiles.size(); ++e) {
            if (!inst.participation[e].has_value()) continue;
            const double s = tmp.truthful_value(static_cast<int>(e)) - *inst.participation[e];
            if (s < worst_slack) {
                worst_slack = s;
                worst = static_cast<int>(e);
            }
        }
    }
    throw InfeasibleError("participation bound unattainable for type index " + std::to_string(worst) +
                              " (max achievable slack " + std::to_string(worst_slack) + ")",
                          worst);
}

MenuSolution solve_instance(Instance inst, const SolverConfig& cfg) {
    const int n = static_cast<int>(inst.profiles.size());
    if (inst.participation.empty()) inst.participation.assign(static_cast<size_t>(n), std::nullopt);
    const LpLayout lay = make_layout(inst.profiles, inst.dist.support_lo());

    MenuSolution sol;
    sol.dist = inst.dist;
    sol.profiles = inst.profiles;
    sol.weights = inst.weights;
    sol.entry_labels = inst.labels;
    sol.is_public = inst.is_public;
    sol.ic_included = inst.include_ic;

    DenseSimplex lp(lay.ncols, cfg.lp_tol);
    std::vector<double> obj(static_cast<size_t>(lay.ncols), 0.0);
    for (int e = 0; e < n; ++e) {
        const StepProfile& pr = inst.profiles[static_cast<size_t>(e)];
        for (int a = 0; a < pr.num_cells(); ++a) {
            const ActionCell& c = pr.cells[static_cast<size_t>(a)];
            obj[static_cast<size_t>(lay.pbase[static_cast<size_t>(e)] + a)] =
                inst.weights[static_cast<size_t>(e)] * (c.v2 + c.v1 * lay.zoff);
            obj[static_cast<size_t>(lay.zbase[static_cast<size_t>(e)] + a)] =
                inst.weights[static_cast<size_t>(e)] * c.v1;
        }
    }
    lp.set_objective(obj);

    std::vector<std::pair<std::vector<double>, double>> eq_rows;
    std::vector<CutRow> static_le;  // retained for the infeasibility diagnosis

    const double mean = inst.dist.mean();
    for (int e = 0; e < n; ++e) {
        const StepProfile& pr = inst.profiles[static_cast<size_t>(e)];
        std::vector<double> prow(static_cast<size_t>(lay.ncols), 0.0);
        std::vector<double> zrow(static_cast<size_t>(lay.ncols), 0.0);
        for (int a = 0; a < pr.num_cells(); ++a) {
            prow[static_cast<size_t>(lay.pbase[static_cast<size_t>(e)] + a)] = 1.0;
            zrow[static_cast<size_t>(lay.zbase[static_cast<size_t>(e)] + a)] = 1.0;
        }
        eq_rows.emplace_back(prow, 1.0);
        eq_rows.emplace_back(zrow, mean - lay.zoff);
        for (int a = 0; a < pr.num_cells(); ++a) {
            const ActionCell& c = pr.cells[static_cast<size_t>(a)];
            CutRow hi, lo;
            hi.coef.assign(static_cast<size_t>(lay.ncols), 0.0);
            lo.coef.assign(static_cast<size_t>(lay.ncols), 0.0);
            hi.coef[static_cast<size_t>(lay.zbase[static_cast<size_t>(e)] + a)] = 1.0;
            hi.coef[static_cast<size_t>(lay.pbase[static_cast<size_t>(e)] + a)] = -(c.b_hi - lay.zoff);
            hi.rhs = 0.0;
            lo.coef[static_cast<size_t>(lay.zbase[static_cast<size_t>(e)] + a)] = -1.0;
            lo.coef[static_cast<size_t>(lay.pbase[static_cast<size_t>(e)] + a)] = (c.b_lo - lay.zoff);
            lo.rhs = 0.0;
            static_le.push_back(std::move(hi));
            static_le.push_back(std::move(lo));
        }
    }

    for (const auto& [coef, rhs] : eq_rows) lp.add_row(coef, DenseSimplex::Sense::EQ, rhs);
    for (const CutRow& r : static_le) lp.add_row(r.coef, DenseSimplex::Sense::LE, r.rhs);
    for (int e = 0; e < n; ++e) {
        if (!inst.participation[static_cast<size_t>(e)].has_value()) continue;
        std::vector<double> coef(static_cast<size_t>(lay.ncols), 0.0);
        add_truthful_coeffs(lay, inst.profiles, e, 1.0, coef);
        lp.add_row(coef, DenseSimplex::Sense::GE, *inst.participation[static_cast<size_t>(e)]);
    }

    // Initial tangent fans: the grid shrinks when the instance is large so
    // that the warm LP stays small; the loop restores precision with cuts.
    int families = 0;
    for (int e = 0; e < n; ++e) families += std::max(0, inst.profiles[static_cast<size_t>(e)].num_cells() - 1);
    int grid = std::max(2, cfg.initial_grid);
    if (families > 0) grid = std::max(2, std::min(grid, 2000 / families));
    for (int e = 0; e < n; ++e) {
        const int k = inst.profiles[static_cast<size_t>(e)].num_cells();
        for (int ell = 1; ell < k; ++ell) {
            for (int j = 0; j <= grid; ++j) {
                const CutRow r = majorization_tangent(inst.dist, lay, inst.profiles, e, ell, static_cast<double>(j) / grid);
                lp.add_row(r.coef, DenseSimplex::Sense::LE, r.rhs);
                ++sol.diag.majorization_cuts;
            }
        }
    }

    // Seed IC cuts with the selection that best-responds at cell midpoints.
    if (inst.include_ic) {
        for (int th = 0; th < n; ++th) {
            for (int rep = 0; rep < n; ++rep) {
                if (th == rep) continue;
                const StepProfile& prep = inst.profiles[static_cast<size_t>(rep)];
                std::vector<int> selection(static_cast<size_t>(prep.num_cells()), 0);
                for (int ap = 0; ap < prep.num_cells(); ++ap) {
                    const ActionCell& c = prep.cells[static_cast<size_t>(ap)];
                    selection[static_cast<size_t>(ap)] =
                        inst.profiles[static_cast<size_t>(th)].best_cell(0.5 * (c.b_lo + c.b_hi));
                }
                const CutRow r = ic_selection_cut(lay, inst.profiles, th, rep, selection);
                lp.add_row(r.coef, DenseSimplex::Sense::LE, r.rhs);
                ++sol.diag.ic_cuts;
            }
        }
    }

    DenseSimplex::Status st = lp.solve();
    if (st == DenseSimplex::Status::Infeasible) {
        bool has_participation = false;
        for (const auto& pc : inst.participation) has_participation |= pc.has_value();
        if (has_participation) diagnose_participation(inst, cfg, lay, static_le, eq_rows);
        throw std::runtime_error("solve: base program unexpectedly infeasible");
    }
    if (st != DenseSimplex::Status::Optimal) {
        throw std::runtime_error("solve: LP backend failed on the base program");
    }

    int stall_rounds = 0;
    bool refresh_done = false;  // one end-of-loop factorization is enough
    for (int round = 0; round < cfg.max_rounds; ++round) {
        sol.diag.rounds = round + 1;
        extract(lp, lay, inst, sol);
        int added = 0;
        double round_viol = 0.0;

        for (int e = 0; e < n; ++e) {
            const TypeSolution& ts = sol.entries[static_cast<size_t>(e)];
            const int k = static_cast<int>(ts.p.size());
            double sufp = 0.0, sufz = 0.0;
            for (int ell = k - 1; ell >= 1; --ell) {
                sufp += ts.p[static_cast<size_t>(ell)];
                sufz += ts.z[static_cast<size_t>(ell)];
                const double q = std::clamp(sufp, 0.0, 1.0);
                const double viol = sufz - inst.dist.tail_quantile_integral(q);
                if (viol > cfg.cut_tol) {
                    const CutRow r = majorization_tangent(inst.dist, lay, inst.profiles, e, ell, q);
                    if (viol > cfg.cut_tol * r.scale()) {
                        round_viol = std::max(round_viol, viol / r.scale());
                        lp.add_row(r.coef, DenseSimplex::Sense::LE, r.rhs);
                        ++sol.diag.majorization_cuts;
                        ++added;
                    }
                }
            }
        }

        if (inst.include_ic) {
            for (int th = 0; th < n; ++th) {
                const double truthful = sol.truthful_value(th);
                for (int rep = 0; rep < n; ++rep) {
                    const TypeSolution& ts = sol.entries[static_cast<size_t>(rep)];
                    std::vector<int> selection(ts.p.size(), 0);
                    double dev = 0.0;
                    for (size_t ap = 0; ap < ts.p.size(); ++ap) {
                        int arg = 0;
                        dev += best_response_term(sol.profiles[static_cast<size_t>(th)], ts.p[ap], ts.z[ap], &arg);
                        selection[ap] = arg;
                    }
                    if (dev - truthful > cfg.cut_tol) {
                        const CutRow r = ic_selection_cut(lay, inst.profiles, th, rep, selection);
                        if (dev - truthful > cfg.cut_tol * r.scale()) {
                            round_viol = std::max(round_viol, (dev - truthful) / r.scale());
                            lp.add_row(r.coef, DenseSimplex::Sense::LE, r.rhs);
                            ++sol.diag.ic_cuts;
                            ++added;
                        }
                    }
                }
            }
        }

        bool accept = false;
        if (added == 0) {
            accept = true;
        } else if (round_viol <= 10.0 * cfg.cut_tol && stall_rounds >= 5) {
            // Cut rows are scaled before entering the LP, so their effective
            // feasibility tolerance is a small multiple of lp_tol; once the
            // exact violations sit inside the certified band and stop
            // moving, regenerating near-identical cuts cannot tighten
            // anything.
            accept = true;
        }
        if (added > 0) {
            stall_rounds = round_viol <= 10.0 * cfg.cut_tol ? stall_rounds + 1 : 0;
        }
        if (accept) {
            // The warm tableau accumulates row-operation error across long
            // re-optimization runs; refactorize from the pristine rows once
            // and re-check before trusting the incumbent.
            if (refresh_done || lp.pivots_since_fresh() < 400) {
                sol.diag.converged = true;
                break;
            }
            st = lp.solve();
            refresh_done = true;
        } else {
            st = lp.reoptimize();
        }
        if (st == DenseSimplex::Status::Infeasible) {
            bool has_participation = false;
            for (const auto& pc : inst.participation) has_participation |= pc.has_value();
            if (has_participation) diagnose_participation(inst, cfg, lay, static_le, eq_rows);
            throw std::runtime_error("solve: cut loop drove the program infeasible");
        }
        if (st != DenseSimplex::Status::Optimal) {
            throw std::runtime_error("solve: LP backend failed during the cut loop");
        }
    }

    sol.diag.lp_pivots = lp.pivots();
    extract(lp, lay, inst, sol);
    sol.objective = recompute_objective(sol);

    if (!sol.diag.converged) {
        reconstruct_y(sol);
        throw ConvergenceError("solve: cutting planes did not converge within max rounds", sol);
    }

    if (cfg.vertex_refinement) refine_vertices(sol, cfg);

    double worst = 0.0;
    for (int e = 0; e < n; ++e) worst = std::max(worst, exact_sweep(inst.dist, sol.entries[static_cast<size_t>(e)]));
    sol.diag.max_violation = worst;
    if (worst > 10.0 * cfg.cut_tol) {
        reconstruct_y(sol);
        throw ConvergenceError("solve: exact feasibility sweep exceeds tolerance after refinement", sol);
    }
    if (inst.include_ic) {
        double icv = 0.0;
        for (int th = 0; th < n; ++th) {
            for (int rep = 0; rep < n; ++rep) {
                icv = std::max(icv, sol.deviation_value(th, rep) - sol.truthful_value(th));
            }
        }
        sol.diag.ic_violation = icv;
    }
    reconstruct_y(sol);
    sol.objective = recompute_objective(sol);
    return sol;
}

}  // namespace

double MenuSolution::truthful_value(int theta) const {
    const StepProfile& pr = profiles[static_cast<size_t>(theta)];
    const TypeSolution& ts = entries[static_cast<size_t>(theta)];
    double val = 0.0;
    for (int a = 0; a < pr.num_cells(); ++a) {
        const ActionCell& c = pr.cells[static_cast<size_t>(a)];
        val += c.h * ts.p[static_cast<size_t>(a)] + c.slope * (ts.z[static_cast<size_t>(a)] - c.b_hi * ts.p[static_cast<size_t>(a)]);
    }
    return val;
}

double MenuSolution::deviation_value(int theta, int reported) const {
    const TypeSolution& ts = entries[static_cast<size_t>(reported)];
    double val = 0.0;
    for (size_t ap = 0; ap < ts.p.size(); ++ap) {
        val += best_response_term(profiles[static_cast<size_t>(theta)], ts.p[ap], ts.z[ap]);
    }
    return val;
}

double MenuSolution::designer_payoff() const { return recompute_objective(*this); }

std::vector<Block> binding_groups(const MenuSolution& sol, int entry, double eps_bind) {
    const TypeSolution& ts = sol.entries[static_cast<size_t>(entry)];
    const size_t k = ts.p.size();
    std::vector<double> sufp(k + 1, 0.0), sufz(k + 1, 0.0);
    for (size_t i = k; i-- > 0;) {
        sufp[i] = sufp[i + 1] + ts.p[i];
        sufz[i] = sufz[i + 1] + ts.z[i];
    }

    // The activity floor sits far below eps_bind: tiny atoms stay visible so
    // that no real mass is silently discarded before refinement.
    std::vector<int> active;
    for (size_t i = 0; i < k; ++i) {
        if (ts.p[i] > 1e-11) active.push_back(static_cast<int>(i));
    }
    if (active.empty()) throw std::runtime_error("binding_groups: no active atoms");

    // Residual of the majorization constraint whose suffix starts at atom j.
    auto residual = [&](int cell) {
        const double q = std::clamp(sufp[static_cast<size_t>(cell)], 0.0, 1.0);
        return sol.dist.tail_quantile_integral(q) - sufz[static_cast<size_t>(cell)];
    };
    for (int cell : active) {
        if (residual(cell) < -eps_bind) {
            throw std::runtime_error("binding_groups: majorization violated beyond eps_bind at cell " + std::to_string(cell));
        }
    }

    std::vector<Block> blocks;
    Block current;
    current.q_lo = 0.0;
    for (size_t idx = 0; idx < active.size(); ++idx) {
        const int cell = active[idx];
        if (idx > 0 && residual(cell) <= eps_bind) {
            current.q_hi = std::clamp(1.0 - sufp[static_cast<size_t>(cell)], 0.0, 1.0);
            blocks.push_back(current);
            current = Block{};
            current.q_lo = blocks.back().q_hi;
        }
        BlockAtom atom;
        atom.cell = cell;
        atom.p = ts.p[static_cast<size_t>(cell)];
        atom.z = ts.z[static_cast<size_t>(cell)];
        const ActionCell& c = sol.profiles[static_cast<size_t>(entry)].cells[static_cast<size_t>(cell)];
        atom.mu = std::clamp(atom.z / atom.p, c.b_lo, c.b_hi);
        current.atoms.push_back(atom);
    }
    current.q_hi = 1.0;
    blocks.push_back(current);
    return blocks;
}

std::vector<PosteriorAtom> posterior_atoms(const MenuSolution& sol, int entry, double eps) {
    if (eps < 0.0) eps = 1e-7 * (1.0 + std::abs(sol.dist.mean()));
    const StepProfile& pr = sol.profiles[static_cast<size_t>(entry)];
    const TypeSolution& ts = sol.entries[static_cast<size_t>(entry)];
    std::vector<PosteriorAtom> atoms;
    for (int a = 0; a < pr.num_cells(); ++a) {
        const double p = ts.p[static_cast<size_t>(a)];
        if (p <= eps) continue;
        const ActionCell& c = pr.cells[static_cast<size_t>(a)];
        PosteriorAtom at;
        at.cell = a;
        at.action = c.action;
        at.label = c.label;
        at.p = p;
        at.mean = std::clamp(ts.z[static_cast<size_t>(a)] / p, c.b_lo, c.b_hi);
        atoms.push_back(at);
    }
    // Merge equal means (adjacent cells sharing a cutoff); the merged atom
    // keeps the designer-preferred cell.
    std::vector<PosteriorAtom> merged;
    for (const PosteriorAtom& at : atoms) {
        if (!merged.empty() && std::abs(merged.back().mean - at.mean) <= 1e-9) {
            PosteriorAtom& prev = merged.back();
            const double p = prev.p + at.p;
            const double mean = (prev.p * prev.mean + at.p * at.mean) / p;
            const ActionCell& ca = pr.cells[static_cast<size_t>(prev.cell)];
            const ActionCell& cb = pr.cells[static_cast<size_t>(at.cell)];
            const PosteriorAtom& keep = cb.reward(mean) >= ca.reward(mean) ? at : prev;
            prev.cell = keep.cell;
            prev.action = keep.action;
            prev.label = keep.label;
            prev.p = p;
            prev.mean = mean;
        } else {
            merged.push_back(at);
        }
    }
    return merged;
}

namespace {

// Support-reduction pass: per block, re-solve the small LP that fixes the
// block totals and the surviving atom means, maximizes the block reward, and
// keeps every deviation budget; its vertices carry at most n+2 atoms.  A
// blend toward the vertex stops where an interior majorization constraint
// becomes binding, which splits the block on the next pass.
void refine_vertices(MenuSolution& sol, const SolverConfig& cfg) {
    const int n = sol.num_entries();
    const double eps = cfg.binding_eps(sol.dist);
    // Budget rows get just enough slack to keep the incumbent feasible
    // against cut-loop residuals; anything larger lets repeated passes
    // erode incentive compatibility.
    const double relax = 2.0 * cfg.cut_tol;

    for (int e = 0; e < n; ++e) {
        TypeSolution& ts = sol.entries[static_cast<size_t>(e)];
        const StepProfile& pr = sol.profiles[static_cast<size_t>(e)];
        const int max_passes = 4 * pr.num_cells() + 8;
        for (int pass = 0; pass < max_passes; ++pass) {
            std::vector<Block> blocks = binding_groups(sol, e, eps);
            bool changed = false;
            bool oversized = false;

            std::vector<char> in_block(ts.p.size(), 0);
            for (const Block& b : blocks) {
                for (const BlockAtom& at : b.atoms) in_block[static_cast<size_t>(at.cell)] = 1;
            }

            for (const Block& b : blocks) {
                const double beta = b.q_hi - b.q_lo;
                const double gamma = sol.dist.lower_quantile_integral(b.q_hi) - sol.dist.lower_quantile_integral(b.q_lo);
                const size_t m = b.atoms.size();
                if (static_cast<int>(m) > n + 2) oversized = true;

                // Exact block sums without moving the atom means; idempotent.
                auto snap_block = [&] {
                    double sp = 0.0;
                    for (const BlockAtom& at : b.atoms) sp += ts.p[static_cast<size_t>(at.cell)];
                    if (sp <= 0.0) return;
                    const double scale = beta / sp;
                    double sz = 0.0;
                    for (const BlockAtom& at : b.atoms) {
                        ts.p[static_cast<size_t>(at.cell)] *= scale;
                        ts.z[static_cast<size_t>(at.cell)] *= scale;
                        sz += ts.z[static_cast<size_t>(at.cell)];
                    }
                    const double defect = gamma - sz;
                    for (const BlockAtom& at : b.atoms) {
                        ts.z[static_cast<size_t>(at.cell)] += defect * ts.p[static_cast<size_t>(at.cell)] / beta;
                    }
                };

                if (m == 1) {
                    const int cell = b.atoms.front().cell;
                    ts.p[static_cast<size_t>(cell)] = beta;
                    ts.z[static_cast<size_t>(cell)] = gamma;
                    continue;
                }

                double incumbent = 0.0;
                for (const BlockAtom& at : b.atoms) {
                    const ActionCell& c = pr.cells[static_cast<size_t>(at.cell)];
                    incumbent += (c.v2 + c.v1 * at.mu) * at.p;
                }

                DenseSimplex aux(static_cast<int>(m), cfg.lp_tol);
                std::vector<double> obj(m, 0.0);
                for (size_t i = 0; i < m; ++i) {
                    const ActionCell& c = pr.cells[static_cast<size_t>(b.atoms[i].cell)];
                    obj[i] = c.v2 + c.v1 * b.atoms[i].mu;
                }
                aux.set_objective(obj);
                std::vector<double> ones(m, 1.0), mus(m);
                for (size_t i = 0; i < m; ++i) mus[i] = b.atoms[i].mu;
                aux.add_row(ones, DenseSimplex::Sense::EQ, beta);
                aux.add_row(mus, DenseSimplex::Sense::EQ, gamma);

                if (sol.ic_included && n > 1) {
                    for (int th = 0; th < n; ++th) {
                        std::vector<double> coef(m, 0.0);
                        double block_part = 0.0;
                        for (size_t i = 0; i < m; ++i) {
                            coef[i] = sol.profiles[static_cast<size_t>(th)].indirect_utility(b.atoms[i].mu);
                            block_part += coef[i] * b.atoms[i].p;
                        }
                        if (th == e) {
                            // own truthful value must not fall
                            aux.add_row(coef, DenseSimplex::Sense::GE, block_part - relax * (1.0 + std::abs(block_part)));
                        } else {
                            const double budget = sol.truthful_value(th) - (sol.deviation_value(th, e) - block_part);
                            aux.add_row(coef, DenseSimplex::Sense::LE, budget + relax * (1.0 + std::abs(budget)));
                        }
                    }
                }

                if (aux.solve() != DenseSimplex::Status::Optimal) {
                    snap_block();
                    continue;
                }
                const std::vector<double>& q = aux.solution();

                // Accept only material progress (fewer atoms or a real reward
                // gain); otherwise the pass would keep eating the relax
                // margins and erode incentive compatibility.
                int support_new = 0;
                for (size_t i = 0; i < m; ++i) support_new += q[i] > 1e-11 ? 1 : 0;
                const bool material = support_new < static_cast<int>(m) ||
                                      aux.objective() > incumbent + 1e-7 * (1.0 + std::abs(incumbent));
                if (!material) {
                    snap_block();
                    continue;
                }

                // Largest blend keeping the interior of every block feasible
                // against the exact majorization boundary.
                auto feasible = [&](double alpha) {
                    std::vector<double> p2 = ts.p, z2 = ts.z;
                    for (size_t i = 0; i < m; ++i) {
                        const size_t cell = static_cast<size_t>(b.atoms[i].cell);
                        p2[cell] = (1.0 - alpha) * ts.p[cell] + alpha * q[i];
                        z2[cell] = b.atoms[i].mu * p2[cell];
                    }
                    double sufp = 0.0, sufz = 0.0;
                    double slack = std::numeric_limits<double>::infinity();
                    for (size_t i = p2.size(); i-- > 0;) {
                        sufp += p2[i];
                        sufz += z2[i];
                        const double qq = std::clamp(sufp, 0.0, 1.0);
                        slack = std::min(slack, sol.dist.tail_quantile_integral(qq) - sufz);
                    }
                    return slack >= -1e-12;
                };

                double alpha = 1.0;
                if (!feasible(1.0)) {
                    double lo2 = 0.0, hi2 = 1.0;
                    for (int it = 0; it < 60; ++it) {
                        const double mid = 0.5 * (lo2 + hi2);
                        (feasible(mid) ? lo2 : hi2) = mid;
                    }
                    alpha = lo2;
                }
                for (size_t i = 0; i < m; ++i) {
                    const size_t cell = static_cast<size_t>(b.atoms[i].cell);
                    const double np = (1.0 - alpha) * ts.p[cell] + alpha * q[i];
                    if (std::abs(np - ts.p[cell]) > 1e-13) changed = true;
                    ts.p[cell] = np;
                    ts.z[cell] = b.atoms[i].mu * np;
                }
            }

            // Mass below the active threshold outside every block is solver
            // noise; zero it so the blocks tile [0,1] exactly.
            for (size_t i = 0; i < ts.p.size(); ++i) {
                if (!in_block[i] && ts.p[i] != 0.0) {
                    ts.p[i] = 0.0;
                    ts.z[i] = 0.0;
                }
            }

            (void)oversized;
            if (!changed) break;
        }
    }
    sol.objective = recompute_objective(sol);
}

}  // namespace

MenuSolution solve_opt(const Problem& problem, const SolverConfig& config) {
    Instance inst;
    inst.dist = problem.distribution;
    for (int t = 0; t < problem.num_types(); ++t) {
        inst.profiles.push_back(derive_step_profile(problem, t));
        inst.weights.push_back(problem.types[static_cast<size_t>(t)].weight);
        inst.labels.push_back(problem.types[static_cast<size_t>(t)].label);
    }
    inst.participation = problem.participation;
    inst.include_ic = config.include_ic;
    inst.is_public = false;
    return solve_instance(std::move(inst), config);
}

StepProfile merged_public_profile(const Problem& problem, const std::vector<StepProfile>& profiles) {
    const double lo = problem.distribution.support_lo();
    const double hi = problem.distribution.support_hi();
    std::vector<double> grid{lo, hi};
    for (const StepProfile& pr : profiles) {
        for (size_t i = 0; i + 1 < pr.cells.size(); ++i) grid.push_back(pr.cells[i].b_hi);
    }
    std::sort(grid.begin(), grid.end());
    const double tol = 1e-12 * (1.0 + std::abs(hi - lo));
    std::vector<double> cuts;
    for (double g : grid) {
        if (cuts.empty() || g - cuts.back() > tol) cuts.push_back(g);
    }
    cuts.back() = hi;

    StepProfile rep;
    rep.type = -1;
    rep.lo = lo;
    rep.hi = hi;
    for (size_t i = 0; i + 1 < cuts.size(); ++i) {
        ActionCell cell;
        cell.action = static_cast<int>(i);
        cell.label = "cell" + std::to_string(i);
        cell.b_lo = cuts[i];
        cell.b_hi = cuts[i + 1];
        const double mid = 0.5 * (cell.b_lo + cell.b_hi);
        for (size_t t = 0; t < profiles.size(); ++t) {
            const ActionCell& best = profiles[t].cells[static_cast<size_t>(profiles[t].best_cell(mid))];
            const double w = problem.types[t].weight;
            cell.v1 += w * best.v1;
            cell.v2 += w * best.v2;
        }
        rep.cells.push_back(cell);
    }
    rep.right_owner.assign(rep.cells.size() - 1, true);
    for (size_t i = 0; i + 1 < rep.cells.size(); ++i) {
        const double b = rep.cells[i].b_hi;
        rep.right_owner[i] = rep.cells[i + 1].reward(b) >= rep.cells[i].reward(b);
    }
    return rep;
}

MenuSolution solve_public(const Problem& problem, const SolverConfig& config) {
    std::vector<StepProfile> profiles;
    for (int t = 0; t < problem.num_types(); ++t) profiles.push_back(derive_step_profile(problem, t));

    Instance inst;
    inst.dist = problem.distribution;
    inst.profiles.push_back(merged_public_profile(problem, profiles));
    inst.weights.push_back(1.0);
    inst.labels.push_back("public");
    inst.include_ic = false;
    inst.is_public = true;
    SolverConfig cfg = config;
    cfg.include_ic = false;
    return solve_instance(std::move(inst), cfg);
}

}  // namespace persuasion
