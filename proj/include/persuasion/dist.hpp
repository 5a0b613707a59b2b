#pragma once

#include <string>
#include <utility>
#include <vector>

namespace persuasion {

/// Closed state interval [lo, hi].
struct Interval {
    double lo = 0.0;
    double hi = 0.0;
};

/// Atomless distribution of the state, represented by a continuous
/// piecewise-linear CDF. Uniform distributions are stored as the two-knot
/// special case. Immutable after construction; safe to share across threads.
///
/// All integral queries (quantile integrals, conditional means, interval
/// statistics) are evaluated in closed form so that no quadrature error
/// enters the solver or the partition constructor.
class StateDistribution {
public:
    enum class Kind { Uniform, PiecewiseLinearCdf };

    static StateDistribution uniform(double lo, double hi);

    /// Knots are (state, cumulative probability) pairs with strictly
    /// increasing states and nondecreasing cumulative values spanning [0,1].
    /// Flat stretches (zero density) are allowed; the quantile of a flat
    /// level is the left endpoint of the stretch (generalized inverse).
    static StateDistribution piecewise_linear_cdf(std::vector<std::pair<double, double>> knots);

    Kind kind() const { return kind_; }
    double support_lo() const { return t_.front(); }
    double support_hi() const { return t_.back(); }
    double mean() const { return mean_; }

    /// F(t), clamped to {0,1} outside the support.
    double cdf(double t) const;

    /// Generalized inverse: inf { t : F(t) >= q }.  Requires 0 <= q <= 1.
    double quantile(double q) const;

    /// Integral of the quantile function over [0, q].
    double lower_quantile_integral(double q) const;

    /// Phi(q) = integral of F^{-1}(x) over [1-q, 1].  Phi(0)=0, Phi(1)=mean,
    /// concave and nondecreasing with Phi'(q) = quantile(1-q).
    double tail_quantile_integral(double q) const;

    /// (1/(q1-q0)) * integral of F^{-1} over [q0, q1].  Requires q0 < q1.
    double conditional_mean(double q0, double q1) const;

    /// For pairwise-disjoint intervals inside the support returns
    /// (sum of F(hi)-F(lo),  sum of \int t dF(t)).
    std::pair<double, double> interval_stats(const std::vector<Interval>& intervals) const;

    const std::vector<double>& knot_states() const { return t_; }
    const std::vector<double>& knot_cums() const { return q_; }

private:
    StateDistribution() = default;
    void finalize();

    Kind kind_ = Kind::Uniform;
    std::vector<double> t_;   // knot states, strictly increasing
    std::vector<double> q_;   // knot cumulative probabilities, 0 .. 1
    std::vector<double> iq_;  // iq_[i] = \int_0^{q_[i]} F^{-1}(x) dx
    double mean_ = 0.0;
};

}  // namespace persuasion
