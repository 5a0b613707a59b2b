#pragma once

#include <cstdint>
#include <vector>

namespace persuasion {

/// Dense two-phase primal simplex over nonnegative variables:
///
///   maximize c.x   subject to  a_i.x {<=,=,>=} b_i,  x >= 0.
///
/// Rows added after a solve are absorbed with dual-simplex pivots, which is
/// what the cutting-plane loops lean on.  Dantzig pricing with a Bland
/// fallback when the objective stalls.
class DenseSimplex {
public:
    enum class Sense { LE, EQ, GE };
    enum class Status { Optimal, Infeasible, Unbounded, IterLimit };

    DenseSimplex(int num_vars, double tol = 1e-9);

    void set_objective(std::vector<double> c);
    /// coef may be shorter than num_vars (padded with zeros).
    void add_row(std::vector<double> coef, Sense sense, double rhs);

    int num_rows() const { return static_cast<int>(rows_.size()); }
    int num_vars() const { return nvars_; }

    /// Full two-phase solve from scratch.
    Status solve();

    /// Incremental re-optimization after add_row calls that followed a
    /// successful solve; falls back to a full solve when dual pivoting
    /// stalls.  Only valid for LE/GE rows (cuts).
    Status reoptimize();

    double objective() const { return objective_; }
    const std::vector<double>& solution() const { return x_; }
    long pivots() const { return pivots_; }
    /// Pivots taken since the last full factorization; a proxy for
    /// accumulated tableau drift on the warm path.
    long pivots_since_fresh() const { return pivots_ - pivots_at_fresh_; }

private:
    struct Row {
        std::vector<double> coef;
        Sense sense;
        double rhs;
    };

    Status solve_fresh();
    Status primal_iterate(std::vector<double>& cost_row, bool phase_one);
    Status dual_iterate();
    void recompute_costs(std::vector<double>& d, bool phase_one) const;
    void pivot(int r, int j);
    void append_tableau_row(const Row& row, int slack_col);
    void extract_solution();

    int nvars_;
    double tol_;
    std::vector<double> c_;
    std::vector<Row> rows_;

    // Tableau state (valid after a solve).
    bool factorized_ = false;
    int ncols_ = 0;                           // structural + slack columns
    std::vector<std::vector<double>> tab_;    // tab_[i][j], row-major
    std::vector<double> rhs_;
    std::vector<int> basis_;
    std::vector<double> dj_;                  // reduced costs of the phase-2 objective
    std::vector<char> artcol_;                // marks phase-1 artificial columns
    std::vector<int> row_slack_;              // slack column of each tableau row (-1 for EQ)
    int pending_from_ = 0;                    // first row not yet in the tableau

    double objective_ = 0.0;
    std::vector<double> x_;
    long pivots_ = 0;
    long pivots_at_fresh_ = 0;
    std::uint64_t rng_state_ = 0x9e3779b97f4a7c15ull;
    std::uint64_t rng_() {
        rng_state_ ^= rng_state_ << 13;
        rng_state_ ^= rng_state_ >> 7;
        rng_state_ ^= rng_state_ << 17;
        return rng_state_;
    }
};

}  // namespace persuasion
