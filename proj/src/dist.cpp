#include "persuasion/dist.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace persuasion {

namespace {
constexpr double kProbTol = 1e-12;  // absolute tolerance for probability comparisons
}

StateDistribution StateDistribution::uniform(double lo, double hi) {
    if (!(lo < hi) || !std::isfinite(lo) || !std::isfinite(hi)) {
        throw std::invalid_argument("uniform: need finite lo < hi");
    }
    StateDistribution d;
    d.kind_ = Kind::Uniform;
    d.t_ = {lo, hi};
    d.q_ = {0.0, 1.0};
    d.finalize();
    return d;
}

StateDistribution StateDistribution::piecewise_linear_cdf(std::vector<std::pair<double, double>> knots) {
    if (knots.size() < 2) {
        throw std::invalid_argument("piecewise_linear_cdf: need at least two knots");
    }
    StateDistribution d;
    d.kind_ = Kind::PiecewiseLinearCdf;
    d.t_.reserve(knots.size());
    d.q_.reserve(knots.size());
    for (const auto& [t, q] : knots) {
        if (!std::isfinite(t) || !std::isfinite(q)) {
            throw std::invalid_argument("piecewise_linear_cdf: non-finite knot");
        }
        if (!d.t_.empty()) {
            if (!(t > d.t_.back())) {
                throw std::invalid_argument("piecewise_linear_cdf: knot states must be strictly increasing");
            }
            if (q < d.q_.back() - kProbTol) {
                throw std::invalid_argument("piecewise_linear_cdf: cumulative values must be nondecreasing");
            }
        }
        d.t_.push_back(t);
        d.q_.push_back(std::max(q, d.q_.empty() ? q : d.q_.back()));
    }
    if (std::abs(d.q_.front()) > kProbTol || std::abs(d.q_.back() - 1.0) > kProbTol) {
        throw std::invalid_argument("piecewise_linear_cdf: cumulative values must span [0,1]");
    }
    d.q_.front() = 0.0;
    d.q_.back() = 1.0;
    d.finalize();
    return d;
}

void StateDistribution::finalize() {
    const size_t m = t_.size();
    iq_.assign(m, 0.0);
    for (size_t i = 0; i + 1 < m; ++i) {
        const double dq = q_[i + 1] - q_[i];
        // Rising CDF segment <=> linear quantile piece from t_[i] to t_[i+1]
        // over [q_[i], q_[i+1]]; flat segments have no quantile-space width.
        iq_[i + 1] = iq_[i] + dq * 0.5 * (t_[i] + t_[i + 1]);
    }
    mean_ = iq_.back();
}

double StateDistribution::cdf(double t) const {
    if (t <= t_.front()) return 0.0;
    if (t >= t_.back()) return 1.0;
    const auto it = std::upper_bound(t_.begin(), t_.end(), t);
    const size_t i = static_cast<size_t>(it - t_.begin()) - 1;
    const double w = (t - t_[i]) / (t_[i + 1] - t_[i]);
    return q_[i] + w * (q_[i + 1] - q_[i]);
}

double StateDistribution::quantile(double q) const {
    if (!(q >= 0.0) || !(q <= 1.0)) {
        throw std::invalid_argument("quantile: q outside [0,1]");
    }
    // First knot with cumulative >= q; ties resolve to the left endpoint of a
    // flat stretch, matching the generalized inverse.
    const auto it = std::lower_bound(q_.begin(), q_.end(), q);
    const size_t j = static_cast<size_t>(it - q_.begin());
    if (j == 0 || q_[j] == q) return t_[j];
    const double dq = q_[j] - q_[j - 1];
    const double w = (q - q_[j - 1]) / dq;
    return t_[j - 1] + w * (t_[j] - t_[j - 1]);
}

double StateDistribution::lower_quantile_integral(double q) const {
    if (!(q >= 0.0) || !(q <= 1.0)) {
        throw std::invalid_argument("lower_quantile_integral: q outside [0,1]");
    }
    const auto it = std::lower_bound(q_.begin(), q_.end(), q);
    size_t j = static_cast<size_t>(it - q_.begin());
    if (j == 0 || q_[j] == q) return iq_[j];
    // Partial rising segment [q_{j-1}, q].
    const double dq = q_[j] - q_[j - 1];
    const double w = (q - q_[j - 1]) / dq;
    const double t_at = t_[j - 1] + w * (t_[j] - t_[j - 1]);
    return iq_[j - 1] + (q - q_[j - 1]) * 0.5 * (t_[j - 1] + t_at);
}

double StateDistribution::tail_quantile_integral(double q) const {
    if (!(q >= 0.0) || !(q <= 1.0)) {
        throw std::invalid_argument("tail_quantile_integral: q outside [0,1]");
    }
    return mean_ - lower_quantile_integral(1.0 - q);
}

double StateDistribution::conditional_mean(double q0, double q1) const {
    if (!(q0 >= 0.0) || !(q1 <= 1.0) || !(q0 < q1)) {
        throw std::invalid_argument("conditional_mean: need 0 <= q0 < q1 <= 1");
    }
    return (lower_quantile_integral(q1) - lower_quantile_integral(q0)) / (q1 - q0);
}

std::pair<double, double> StateDistribution::interval_stats(const std::vector<Interval>& intervals) const {
    std::vector<Interval> sorted = intervals;
    std::sort(sorted.begin(), sorted.end(), [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
    const double span = t_.back() - t_.front();
    const double tol = kProbTol * (1.0 + span);
    double prev_hi = t_.front() - 1.0;
    for (const Interval& iv : sorted) {
        if (!(iv.lo <= iv.hi)) throw std::invalid_argument("interval_stats: interval with lo > hi");
        if (iv.lo < t_.front() - tol || iv.hi > t_.back() + tol) {
            throw std::invalid_argument("interval_stats: interval outside support");
        }
        if (iv.lo < prev_hi - tol) {
            throw std::invalid_argument("interval_stats: overlapping intervals");
        }
        prev_hi = std::max(prev_hi, iv.hi);
    }

    double prob = 0.0;
    double weighted = 0.0;
    for (const Interval& iv : sorted) {
        const double a = std::clamp(iv.lo, t_.front(), t_.back());
        const double b = std::clamp(iv.hi, t_.front(), t_.back());
        if (!(a < b)) continue;
        prob += cdf(b) - cdf(a);
        // \int_a^b t dF(t) with piecewise-constant density per CDF segment.
        const auto first = std::upper_bound(t_.begin(), t_.end(), a) - t_.begin() - 1;
        for (size_t i = static_cast<size_t>(std::max<long>(first, 0)); i + 1 < t_.size(); ++i) {
            if (t_[i] >= b) break;
            const double l = std::max(a, t_[i]);
            const double r = std::min(b, t_[i + 1]);
            if (!(l < r)) continue;
            const double dens = (q_[i + 1] - q_[i]) / (t_[i + 1] - t_[i]);
            weighted += dens * 0.5 * (r * r - l * l);
        }
    }
    return {prob, weighted};
}

}  // namespace persuasion
