#include <doctest.h>

#include <random>
#include <vector>

#include "persuasion/simplex.hpp"

using persuasion::DenseSimplex;
using Sense = persuasion::DenseSimplex::Sense;
using Status = persuasion::DenseSimplex::Status;

TEST_CASE("small maximization with mixed senses") {
    // max 3x + 2y s.t. x + y <= 4, x + 3y <= 6, x >= 1, x,y >= 0
    DenseSimplex lp(2);
    lp.set_objective({3.0, 2.0});
    lp.add_row({1.0, 1.0}, Sense::LE, 4.0);
    lp.add_row({1.0, 3.0}, Sense::LE, 6.0);
    lp.add_row({1.0, 0.0}, Sense::GE, 1.0);
    REQUIRE(lp.solve() == Status::Optimal);
    CHECK(lp.objective() == doctest::Approx(12.0));  // x=4, y=0
    CHECK(lp.solution()[0] == doctest::Approx(4.0));
}

TEST_CASE("equality rows and degenerate vertices") {
    // max x1 + x2 + x3 s.t. x1 + x2 + x3 = 1, x1 - x2 = 0
    DenseSimplex lp(3);
    lp.set_objective({1.0, 1.0, 1.0});
    lp.add_row({1.0, 1.0, 1.0}, Sense::EQ, 1.0);
    lp.add_row({1.0, -1.0, 0.0}, Sense::EQ, 0.0);
    REQUIRE(lp.solve() == Status::Optimal);
    CHECK(lp.objective() == doctest::Approx(1.0));
}

TEST_CASE("infeasible and unbounded detection") {
    DenseSimplex bad(1);
    bad.set_objective({1.0});
    bad.add_row({1.0}, Sense::LE, 1.0);
    bad.add_row({1.0}, Sense::GE, 2.0);
    CHECK(bad.solve() == Status::Infeasible);

    DenseSimplex unb(2);
    unb.set_objective({1.0, 0.0});
    unb.add_row({0.0, 1.0}, Sense::LE, 1.0);
    CHECK(unb.solve() == Status::Unbounded);
}

TEST_CASE("warm reoptimize after adding cut rows matches a fresh solve") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    for (int rep = 0; rep < 40; ++rep) {
        const int n = 3 + static_cast<int>(rng() % 5);
        const int m = 2 + static_cast<int>(rng() % 5);
        DenseSimplex warm(n);
        std::vector<double> c(static_cast<size_t>(n));
        for (double& v : c) v = unif(rng);
        warm.set_objective(c);
        std::vector<std::vector<double>> rows;
        std::vector<double> rhs;
        // bounded region: sum x_i <= n plus random rows
        rows.push_back(std::vector<double>(static_cast<size_t>(n), 1.0));
        rhs.push_back(static_cast<double>(n));
        for (int i = 0; i < m; ++i) {
            std::vector<double> row(static_cast<size_t>(n));
            for (double& v : row) v = unif(rng);
            rows.push_back(row);
            rhs.push_back(1.0 + std::abs(unif(rng)));
        }
        for (size_t i = 0; i < rows.size(); ++i) warm.add_row(rows[i], Sense::LE, rhs[i]);
        REQUIRE(warm.solve() == Status::Optimal);

        // add a batch of random cuts and reoptimize
        std::vector<std::vector<double>> extra;
        std::vector<double> extra_rhs;
        for (int i = 0; i < 3; ++i) {
            std::vector<double> row(static_cast<size_t>(n));
            for (double& v : row) v = unif(rng);
            extra.push_back(row);
            extra_rhs.push_back(0.5 + std::abs(unif(rng)));
            warm.add_row(row, Sense::LE, extra_rhs.back());
        }
        const Status st = warm.reoptimize();
        REQUIRE(st == Status::Optimal);

        DenseSimplex fresh(n);
        fresh.set_objective(c);
        for (size_t i = 0; i < rows.size(); ++i) fresh.add_row(rows[i], Sense::LE, rhs[i]);
        for (size_t i = 0; i < extra.size(); ++i) fresh.add_row(extra[i], Sense::LE, extra_rhs[i]);
        REQUIRE(fresh.solve() == Status::Optimal);
        CHECK(warm.objective() == doctest::Approx(fresh.objective()).epsilon(1e-8));
    }
}

TEST_CASE("reoptimize can turn the problem infeasible") {
    DenseSimplex lp(2);
    lp.set_objective({1.0, 1.0});
    lp.add_row({1.0, 1.0}, Sense::LE, 2.0);
    REQUIRE(lp.solve() == Status::Optimal);
    lp.add_row({1.0, 1.0}, Sense::GE, 3.0);
    CHECK(lp.reoptimize() == Status::Infeasible);
}
