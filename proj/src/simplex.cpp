#include "persuasion/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>
#include <cstdio>

namespace persuasion {

namespace {
constexpr long kIterCap = 400000;
}

DenseSimplex::DenseSimplex(int num_vars, double tol) : nvars_(num_vars), tol_(tol), c_(static_cast<size_t>(num_vars), 0.0) {
    if (num_vars <= 0) throw std::invalid_argument("simplex: need at least one variable");
}

void DenseSimplex::set_objective(std::vector<double> c) {
    c.resize(static_cast<size_t>(nvars_), 0.0);
    c_ = std::move(c);
    factorized_ = false;
}

void DenseSimplex::add_row(std::vector<double> coef, Sense sense, double rhs) {
    coef.resize(static_cast<size_t>(nvars_), 0.0);
    double scale = std::abs(rhs);
    for (double v : coef) scale = std::max(scale, std::abs(v));
    if (scale > 0.0) {
        for (double& v : coef) v /= scale;
        rhs /= scale;
    }
    rows_.push_back(Row{std::move(coef), sense, rhs});
}

void DenseSimplex::pivot(int r, int j) {
    std::vector<double>& prow = tab_[static_cast<size_t>(r)];
    const double piv = prow[static_cast<size_t>(j)];
    const double inv = 1.0 / piv;
    for (double& v : prow) v *= inv;
    rhs_[static_cast<size_t>(r)] *= inv;
    prow[static_cast<size_t>(j)] = 1.0;

    const int m = static_cast<int>(tab_.size());
    const size_t w = prow.size();
    for (int i = 0; i < m; ++i) {
        if (i == r) continue;
        std::vector<double>& row = tab_[static_cast<size_t>(i)];
        const double a = row[static_cast<size_t>(j)];
        if (a == 0.0) continue;
        for (size_t k = 0; k < w; ++k) row[k] -= a * prow[k];
        row[static_cast<size_t>(j)] = 0.0;
        rhs_[static_cast<size_t>(i)] -= a * rhs_[static_cast<size_t>(r)];
    }
    const double dj = dj_[static_cast<size_t>(j)];
    if (dj != 0.0) {
        for (size_t k = 0; k < w && k < dj_.size(); ++k) dj_[k] -= dj * prow[k];
        dj_[static_cast<size_t>(j)] = 0.0;
    }
    basis_[static_cast<size_t>(r)] = j;
    ++pivots_;
}

// Exact reduced costs from the current tableau; the incrementally updated
// row drifts over long pivot runs, so terminal claims re-price with this.
void DenseSimplex::recompute_costs(std::vector<double>& d, bool phase_one) const {
    const int m = static_cast<int>(tab_.size());
    const int w = tab_.empty() ? nvars_ : static_cast<int>(tab_.front().size());
    d.assign(static_cast<size_t>(w), 0.0);
    if (phase_one) {
        for (int i = 0; i < m; ++i) {
            if (!artcol_[static_cast<size_t>(basis_[static_cast<size_t>(i)])]) continue;
            const std::vector<double>& row = tab_[static_cast<size_t>(i)];
            for (int j = 0; j < w; ++j) {
                if (!artcol_[static_cast<size_t>(j)]) d[static_cast<size_t>(j)] += row[static_cast<size_t>(j)];
            }
        }
    } else {
        for (int j = 0; j < nvars_ && j < w; ++j) d[static_cast<size_t>(j)] = c_[static_cast<size_t>(j)];
        for (int i = 0; i < m; ++i) {
            const int b = basis_[static_cast<size_t>(i)];
            const double cb = (b < nvars_) ? c_[static_cast<size_t>(b)] : 0.0;
            if (cb == 0.0) continue;
            const std::vector<double>& row = tab_[static_cast<size_t>(i)];
            for (int j = 0; j < w; ++j) d[static_cast<size_t>(j)] -= cb * row[static_cast<size_t>(j)];
        }
    }
    for (int i = 0; i < m; ++i) d[static_cast<size_t>(basis_[static_cast<size_t>(i)])] = 0.0;
}

DenseSimplex::Status DenseSimplex::primal_iterate(std::vector<double>& cost_row, bool phase_one) {
    const int m = static_cast<int>(tab_.size());
    const int w = static_cast<int>(cost_row.size());
    long iters = 0;
    int repriced = 0;
    const long bland_after = 2L * (m + w) + 2000;
    std::swap(cost_row, dj_);  // pivot() maintains dj_
    for (;;) {
        if (++iters > kIterCap) {
            std::swap(cost_row, dj_);
            return Status::IterLimit;
        }
#ifdef SIMPLEX_TRACE
        if (iters % 50000 == 0) {
            std::fprintf(stderr, "[simplex] %s iters=%ld m=%d repriced=%d\n", phase_one ? "p1" : "p2", iters, m, repriced);
        }
#endif
        // Dantzig pricing first; once the iteration count says we are
        // grinding on a degenerate vertex, alternate Bland with seeded
        // randomized pricing, which breaks the cycles Bland's tolerance
        // variant can fall into.
        const int mode = iters <= bland_after ? 0 : (((iters - bland_after) / 1000) % 2 == 0 ? 1 : 2);
        int enter = -1;
        if (mode == 2) {
            int eligible = 0;
            for (int j = 0; j < w; ++j) {
                if (artcol_[static_cast<size_t>(j)]) continue;
                if (dj_[static_cast<size_t>(j)] > tol_) {
                    ++eligible;
                    if (rng_() % static_cast<unsigned>(eligible) == 0) enter = j;
                }
            }
        } else {
            double best = tol_;
            for (int j = 0; j < w; ++j) {
                if (artcol_[static_cast<size_t>(j)]) continue;  // artificials never (re-)enter
                const double d = dj_[static_cast<size_t>(j)];
                if (d > best) {
                    enter = j;
                    if (mode == 1) break;
                    best = d;
                }
            }
        }
        if (enter < 0 && repriced < 40) {
            // verify the terminal claim against exact reduced costs
            recompute_costs(dj_, phase_one);
            ++repriced;
            double best = tol_;
            for (int j = 0; j < w; ++j) {
                if (artcol_[static_cast<size_t>(j)]) continue;
                if (dj_[static_cast<size_t>(j)] > best) {
                    enter = j;
                    best = dj_[static_cast<size_t>(j)];
                }
            }
        }
        if (enter < 0) {
            std::swap(cost_row, dj_);
            return Status::Optimal;
        }
        // Two-pass ratio test: find the tightest ratio, then among rows
        // within a feasibility tolerance of it take the largest pivot
        // element.  Tiny pivots amplify tableau error explosively and are
        // the main driver of degenerate grinding.
        double theta = std::numeric_limits<double>::infinity();
        for (int i = 0; i < m; ++i) {
            const double a = tab_[static_cast<size_t>(i)][static_cast<size_t>(enter)];
            if (a <= tol_) continue;
            theta = std::min(theta, (rhs_[static_cast<size_t>(i)] + tol_) / a);
        }
        if (theta == std::numeric_limits<double>::infinity()) {
            std::swap(cost_row, dj_);
            return Status::Unbounded;
        }
        int leave = -1;
        double best_piv = 0.0;
        for (int i = 0; i < m; ++i) {
            const double a = tab_[static_cast<size_t>(i)][static_cast<size_t>(enter)];
            if (a <= tol_) continue;
            if (rhs_[static_cast<size_t>(i)] / a <= theta && a > best_piv) {
                best_piv = a;
                leave = i;
            }
        }
        if (leave < 0) {
            std::swap(cost_row, dj_);
            return Status::Unbounded;
        }
        pivot(leave, enter);
    }
}

DenseSimplex::Status DenseSimplex::dual_iterate() {
    const int m = static_cast<int>(tab_.size());
    const int w = tab_.empty() ? 0 : static_cast<int>(tab_.front().size());
    recompute_costs(dj_, false);  // entering ratios need trustworthy reduced costs
    long iters = 0;
    for (;;) {
        if (++iters > kIterCap) return Status::IterLimit;
        int r = -1;
        double worst = -tol_;
        for (int i = 0; i < m; ++i) {
            if (rhs_[static_cast<size_t>(i)] < worst) {
                worst = rhs_[static_cast<size_t>(i)];
                r = i;
            }
        }
        if (r < 0) return Status::Optimal;
        int enter = -1;
        double best_ratio = std::numeric_limits<double>::infinity();
        const std::vector<double>& row = tab_[static_cast<size_t>(r)];
        for (int j = 0; j < w; ++j) {
            if (artcol_[static_cast<size_t>(j)]) continue;
            const double a = row[static_cast<size_t>(j)];
            if (a >= -tol_) continue;
            const double ratio = std::min(dj_[static_cast<size_t>(j)], 0.0) / a;
            if (ratio < best_ratio - 1e-12 || (ratio < best_ratio + 1e-12 && (enter < 0 || j < enter))) {
                best_ratio = ratio;
                enter = j;
            }
        }
        if (enter < 0) return Status::Infeasible;
        pivot(r, enter);
    }
}

void DenseSimplex::append_tableau_row(const Row& row, int slack_col) {
    for (std::vector<double>& trow : tab_) trow.resize(static_cast<size_t>(slack_col) + 1, 0.0);
    dj_.resize(static_cast<size_t>(slack_col) + 1, 0.0);
    artcol_.resize(static_cast<size_t>(slack_col) + 1, 0);

    std::vector<double> vec(static_cast<size_t>(slack_col) + 1, 0.0);
    for (int j = 0; j < nvars_; ++j) vec[static_cast<size_t>(j)] = row.coef[static_cast<size_t>(j)];
    vec[static_cast<size_t>(slack_col)] = 1.0;
    double r = row.rhs;

    const int m = static_cast<int>(tab_.size());
    for (int i = 0; i < m; ++i) {
        const double a = vec[static_cast<size_t>(basis_[static_cast<size_t>(i)])];
        if (a == 0.0) continue;
        const std::vector<double>& trow = tab_[static_cast<size_t>(i)];
        for (size_t k = 0; k < trow.size(); ++k) vec[k] -= a * trow[k];
        vec[static_cast<size_t>(basis_[static_cast<size_t>(i)])] = 0.0;
        r -= a * rhs_[static_cast<size_t>(i)];
    }
    tab_.push_back(std::move(vec));
    rhs_.push_back(r);
    basis_.push_back(slack_col);
    row_slack_.push_back(slack_col);
}

DenseSimplex::Status DenseSimplex::solve() { return solve_fresh(); }

DenseSimplex::Status DenseSimplex::solve_fresh() {
    factorized_ = false;
    const int m = static_cast<int>(rows_.size());
    ncols_ = nvars_ + m;

    // Canonical form: every inequality becomes LE with its own slack (rhs of
    // any sign); equalities are sign-normalized and get one artificial each.
    // Negative slack starts are repaired by a single shared artificial
    // column, which keeps phase 1 small no matter how many cut rows exist.
    std::vector<Row> canon = rows_;
    int neq = 0;
    for (Row& row : canon) {
        if (row.sense == Sense::GE) {
            for (double& v : row.coef) v = -v;
            row.rhs = -row.rhs;
            row.sense = Sense::LE;
        } else if (row.sense == Sense::EQ && row.rhs < 0.0) {
            for (double& v : row.coef) v = -v;
            row.rhs = -row.rhs;
        }
        if (row.sense == Sense::EQ) ++neq;
    }
    bool need_shared = false;
    for (const Row& row : canon) {
        if (row.sense == Sense::LE && row.rhs < 0.0) need_shared = true;
    }
    const int shared_col = need_shared ? ncols_ : -1;
    const int nart = neq + (need_shared ? 1 : 0);
    const int wcols = ncols_ + nart;

    tab_.assign(static_cast<size_t>(m), std::vector<double>(static_cast<size_t>(wcols), 0.0));
    rhs_.assign(static_cast<size_t>(m), 0.0);
    basis_.assign(static_cast<size_t>(m), -1);
    row_slack_.assign(static_cast<size_t>(m), -1);
    artcol_.assign(static_cast<size_t>(wcols), 0);
    for (int j = ncols_; j < wcols; ++j) artcol_[static_cast<size_t>(j)] = 1;
    std::vector<char> art_row(static_cast<size_t>(m), 0);

    int art = ncols_ + (need_shared ? 1 : 0);
    for (int i = 0; i < m; ++i) {
        const Row& row = canon[static_cast<size_t>(i)];
        std::vector<double>& trow = tab_[static_cast<size_t>(i)];
        for (int j = 0; j < nvars_; ++j) trow[static_cast<size_t>(j)] = row.coef[static_cast<size_t>(j)];
        rhs_[static_cast<size_t>(i)] = row.rhs;
        const int slack = nvars_ + i;
        row_slack_[static_cast<size_t>(i)] = slack;
        if (row.sense == Sense::LE) {
            trow[static_cast<size_t>(slack)] = 1.0;
            basis_[static_cast<size_t>(i)] = slack;
            if (row.rhs < 0.0) trow[static_cast<size_t>(shared_col)] = -1.0;
        } else {
            trow[static_cast<size_t>(art)] = 1.0;
            basis_[static_cast<size_t>(i)] = art;
            art_row[static_cast<size_t>(i)] = 1;
            ++art;
        }
    }

    dj_.assign(static_cast<size_t>(wcols), 0.0);

    if (need_shared) {
        // One pivot on the most negative row makes every slack feasible.
        int r = -1;
        double worst = 0.0;
        for (int i = 0; i < m; ++i) {
            if (rhs_[static_cast<size_t>(i)] < worst) {
                worst = rhs_[static_cast<size_t>(i)];
                r = i;
            }
        }
        pivot(r, shared_col);
    }

    if (nart > 0) {
        // Phase 1: maximize minus the artificial mass.
        std::vector<double> d1;
        recompute_costs(d1, true);
        const Status st = primal_iterate(d1, true);
        if (st != Status::Optimal) return st;
        double infeas = 0.0;
        for (int i = 0; i < m; ++i) {
            if (artcol_[static_cast<size_t>(basis_[static_cast<size_t>(i)])]) infeas += rhs_[static_cast<size_t>(i)];
        }
#ifdef SIMPLEX_TRACE
        if (infeas > 1e-9) std::fprintf(stderr, "[simplex] phase-1 residual %.6e (m=%d)\n", infeas, m);
#endif
        if (infeas > 1e-7) return Status::Infeasible;
        // Pivot leftover artificials out where possible; all-zero rows are
        // redundant and stay inert at zero.
        for (int i = 0; i < m; ++i) {
            if (!artcol_[static_cast<size_t>(basis_[static_cast<size_t>(i)])]) continue;
            int j = -1;
            for (int k = 0; k < ncols_; ++k) {
                if (std::abs(tab_[static_cast<size_t>(i)][static_cast<size_t>(k)]) > 1e-8) {
                    j = k;
                    break;
                }
            }
            if (j >= 0) {
                pivot(i, j);
            } else {
                rhs_[static_cast<size_t>(i)] = 0.0;
            }
        }
    }

    std::vector<double> d;
    recompute_costs(d, false);
    const Status st = primal_iterate(d, false);
    if (st != Status::Optimal) return st;
    dj_ = std::move(d);
    pending_from_ = m;
    factorized_ = true;
    pivots_at_fresh_ = pivots_;
    extract_solution();
    return Status::Optimal;
}

DenseSimplex::Status DenseSimplex::reoptimize() {
    if (!factorized_) return solve_fresh();
    const int m = static_cast<int>(rows_.size());
    if (pending_from_ == m) return Status::Optimal;
    for (int i = pending_from_; i < m; ++i) {
        Row row = rows_[static_cast<size_t>(i)];
        if (row.sense == Sense::EQ) return solve_fresh();
        if (row.sense == Sense::GE) {
            for (double& v : row.coef) v = -v;
            row.rhs = -row.rhs;
        }
        const int slack_col = tab_.empty() ? nvars_ : static_cast<int>(tab_.front().size());
        append_tableau_row(row, slack_col);
    }
    pending_from_ = m;
    Status st = dual_iterate();
    if (st == Status::IterLimit) return solve_fresh();
    if (st != Status::Optimal) {
        factorized_ = false;
        return st;
    }
    // Cleanup pass: restore primal optimality if noise crept in.
    std::vector<double> d = dj_;
    st = primal_iterate(d, false);
    if (st != Status::Optimal) return solve_fresh();
    dj_ = std::move(d);
    extract_solution();
    return Status::Optimal;
}

void DenseSimplex::extract_solution() {
    x_.assign(static_cast<size_t>(nvars_), 0.0);
    const int m = static_cast<int>(tab_.size());
    for (int i = 0; i < m; ++i) {
        const int b = basis_[static_cast<size_t>(i)];
        if (b < nvars_) x_[static_cast<size_t>(b)] = std::max(0.0, rhs_[static_cast<size_t>(i)]);
    }
    objective_ = 0.0;
    for (int j = 0; j < nvars_; ++j) objective_ += c_[static_cast<size_t>(j)] * x_[static_cast<size_t>(j)];
}

}  // namespace persuasion
