#include <doctest.h>

#include <cmath>
#include <random>

#include "corpus.hpp"
#include "persuasion/instances.hpp"
#include "persuasion/laminar.hpp"
#include "persuasion/verify.hpp"

using namespace persuasion;

TEST_CASE("two-atom block carves the inner interval by the window equation") {
    const auto d = StateDistribution::uniform(0.0, 1.0);
    std::vector<BlockAtom> atoms{{0, 0.5, 0.15, 0.3}, {1, 0.5, 0.35, 0.7}};
    const LaminarFamily fam = construct_block(d, 0.0, 1.0, atoms);
    REQUIRE(fam.hulls.size() == 2);
    CHECK(std::abs(fam.hulls[1].lo - 0.45) <= 1e-10);
    CHECK(std::abs(fam.hulls[1].hi - 0.95) <= 1e-10);
    CHECK(fam.hulls[0].lo == doctest::Approx(0.0));
    CHECK(fam.hulls[0].hi == doctest::Approx(1.0));
    REQUIRE(fam.elements[0].size() == 2);  // [0, 0.45] and [0.95, 1]
    CHECK(fam.elements[0][0].hi == doctest::Approx(0.45).epsilon(1e-10));
    CHECK(fam.elements[0][1].lo == doctest::Approx(0.95).epsilon(1e-10));
    // realized statistics
    const auto [p1, z1] = d.interval_stats(fam.elements[0]);
    const auto [p2, z2] = d.interval_stats(fam.elements[1]);
    CHECK(p1 == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(z1 / p1 == doctest::Approx(0.3).epsilon(1e-10));
    CHECK(p2 == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(z2 / p2 == doctest::Approx(0.7).epsilon(1e-10));
}

TEST_CASE("single atom block is the whole window") {
    const auto d = StateDistribution::uniform(0.0, 1.0);
    const double q0 = 0.2, q1 = 0.7;
    const double z = d.lower_quantile_integral(q1) - d.lower_quantile_integral(q0);
    std::vector<BlockAtom> atoms{{0, q1 - q0, z, z / (q1 - q0)}};
    const LaminarFamily fam = construct_block(d, q0, q1, atoms);
    REQUIRE(fam.hulls.size() == 1);
    CHECK(fam.hulls[0].lo == doctest::Approx(0.2));
    CHECK(fam.hulls[0].hi == doctest::Approx(0.7));
    REQUIRE(fam.elements[0].size() == 1);
}

TEST_CASE("four-type gap instance: the carved interval is symmetric around the atom") {
    // left block of the explicit menu for n = 3, type 1: atoms at bL_{-2}, bL_{2}
    const int n = 3;
    const auto d = StateDistribution::uniform(0.0, 1.0);
    const double bl2 = 0.25 + 0.125 * std::sqrt(2.0 / (2.0 * n));
    const double blm2 = 0.25 - 0.125 * std::sqrt(2.0 / (2.0 * n));
    std::vector<BlockAtom> atoms{{0, 0.25, 0.25 * blm2, blm2}, {1, 0.25, 0.25 * bl2, bl2}};
    const LaminarFamily fam = construct_block(d, 0.0, 0.5, atoms);
    CHECK(fam.hulls[1].lo == doctest::Approx(bl2 - 0.125).epsilon(1e-10));
    CHECK(fam.hulls[1].hi == doctest::Approx(bl2 + 0.125).epsilon(1e-10));
}

TEST_CASE("threshold mechanism: messages split at the median state") {
    const Problem pb = threshold_problem();
    const MenuSolution sol = solve_opt(pb);
    const Mechanism mech = construct_mechanism(sol);
    REQUIRE(mech.entries.size() == 1);
    REQUIRE(mech.entries[0].elements.size() == 2);
    const MechanismElement& pass = mech.entries[0].elements[0];
    const MechanismElement& act = mech.entries[0].elements[1];
    CHECK(pass.message == "pass");
    REQUIRE(pass.parts.size() == 1);
    CHECK(pass.parts[0].lo == doctest::Approx(0.0));
    CHECK(pass.parts[0].hi == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(act.message == "act");
    REQUIRE(act.parts.size() == 1);
    CHECK(act.parts[0].lo == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(act.parts[0].hi == doctest::Approx(1.0));
    // routing: shared endpoint belongs to the inner/later element
    CHECK(mech.route(0, 0.25) == 0);
    CHECK(mech.route(0, 0.75) == 1);
}

TEST_CASE("full disclosure of cell means reproduces the cells") {
    const Problem pb = threshold_problem();
    MenuSolution sol;
    sol.dist = pb.distribution;
    sol.profiles = {derive_step_profile(pb, 0)};
    sol.weights = {1.0};
    sol.entry_labels = {"t"};
    sol.ic_included = false;
    sol.entries = {TypeSolution{{0.75, 0.25}, {0.28125, 0.21875}}};
    sol.objective = sol.designer_payoff();
    const Mechanism mech = construct_mechanism(sol);
    REQUIRE(mech.entries[0].elements.size() == 2);
    CHECK(mech.entries[0].elements[0].parts[0].lo == doctest::Approx(0.0));
    CHECK(mech.entries[0].elements[0].parts[0].hi == doctest::Approx(0.75).epsilon(1e-10));
    CHECK(mech.entries[0].elements[1].parts[0].lo == doctest::Approx(0.75).epsilon(1e-10));
    const AuditReport audit = audit_mechanism(pb, mech, sol);
    CHECK(audit.max_p_dev <= 1e-12);
    CHECK(audit.max_z_dev <= 1e-12);
}

TEST_CASE("hand-built overlapping hulls fail the laminar check") {
    Mechanism mech;
    mech.dist = StateDistribution::uniform(0.0, 1.0);
    MechanismEntry entry;
    MechanismElement a, b;
    a.cell = 0;
    a.message = "a";
    a.p = 0.6;
    a.z = 0.18;
    a.parts = {Interval{0.0, 0.6}};
    a.hull = Interval{0.0, 0.6};
    a.block = 0;
    a.atom_rank = 0;
    b.cell = 1;
    b.message = "b";
    b.p = 0.4;
    b.z = 0.32;
    b.parts = {Interval{0.4, 1.0}};
    b.hull = Interval{0.4, 1.0};
    b.block = 0;
    b.atom_rank = 1;
    entry.elements = {a, b};
    Block blk;
    blk.q_lo = 0.0;
    blk.q_hi = 1.0;
    blk.atoms = {BlockAtom{0, 0.6, 0.18, 0.3}, BlockAtom{1, 0.4, 0.32, 0.8}};
    entry.blocks = {blk};
    mech.entries = {entry};
    const LaminarReport rep = validate_laminar(mech, 1);
    CHECK(!rep.pass());
    bool laminar_failed = false;
    for (const auto& c : rep.checks) {
        if (c.name == "laminar-hulls" && !c.pass) laminar_failed = true;
    }
    CHECK(laminar_failed);
}

TEST_CASE("interior equality splits the block instead of failing") {
    // threshold-like tight solution: equality at the act-suffix
    const auto d = StateDistribution::uniform(0.0, 1.0);
    std::vector<BlockAtom> atoms{{0, 0.5, 0.125, 0.25}, {1, 0.5, 0.375, 0.75}};
    const LaminarFamily fam = construct_block(d, 0.0, 1.0, atoms);
    REQUIRE(fam.elements.size() == 2);
    CHECK(fam.elements[0][0].lo == doctest::Approx(0.0));
    CHECK(fam.elements[0][0].hi == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(fam.elements[1][0].lo == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("bad block inputs are rejected") {
    const auto d = StateDistribution::uniform(0.0, 1.0);
    // means not increasing
    CHECK_THROWS_AS((void)construct_block(d, 0.0, 1.0, {BlockAtom{0, 0.5, 0.35, 0.7}, BlockAtom{1, 0.5, 0.15, 0.3}}),
                    std::invalid_argument);
    // masses do not fill the window
    CHECK_THROWS_AS((void)construct_block(d, 0.0, 1.0, {BlockAtom{0, 0.4, 0.15, 0.375}}), std::invalid_argument);
    // majorization violated inside (top atom wants more mean than the window has)
    CHECK_THROWS_AS((void)construct_block(d, 0.0, 1.0, {BlockAtom{0, 0.5, 0.1, 0.2}, BlockAtom{1, 0.5, 0.4, 0.8}}),
                    std::invalid_argument);
}

TEST_CASE("random signal corpus: realization fidelity, laminar nesting and depth") {
    std::mt19937_64 rng(2024);
    for (int rep = 0; rep < 60; ++rep) {
        const StateDistribution dist = corpus::random_distribution(rng);
        const MenuSolution sol = corpus::random_signal_solution(dist, rng);
        const Mechanism mech = construct_mechanism(sol);
        REQUIRE(mech.entries.size() == 1);

        // fidelity
        double max_dev = 0.0;
        for (const MechanismElement& el : mech.entries[0].elements) {
            const auto [p, z] = dist.interval_stats(el.parts);
            max_dev = std::max({max_dev, std::abs(p - el.p), std::abs(z - el.z)});
        }
        CHECK(max_dev <= 1e-8);

        const LaminarReport lrep = validate_laminar(mech, 1);
        for (const auto& c : lrep.checks) {
            INFO(c.name, ": ", c.detail);
            if (c.name != "block-message-bound") CHECK(c.pass);  // no refinement ran on hand-built signals
        }

        // nesting order: within a block, a nested hull belongs to a later atom
        for (const MechanismEntry& en : mech.entries) {
            for (size_t i = 0; i < en.elements.size(); ++i) {
                for (size_t j = 0; j < en.elements.size(); ++j) {
                    if (i == j || en.elements[i].block != en.elements[j].block) continue;
                    const Interval& a = en.elements[i].hull;
                    const Interval& b = en.elements[j].hull;
                    const bool a_inside_b = a.lo > b.lo - 1e-12 && a.hi < b.hi + 1e-12 &&
                                            (a.lo > b.lo + 1e-12 || a.hi < b.hi - 1e-12);
                    if (a_inside_b) CHECK(en.elements[i].atom_rank > en.elements[j].atom_rank);
                }
            }
            // depth: element interval counts never exceed the block size
            for (const MechanismElement& el : en.elements) {
                CHECK(static_cast<int>(el.parts.size()) <=
                      static_cast<int>(en.blocks[static_cast<size_t>(el.block)].atoms.size()));
            }
        }
    }
}

TEST_CASE("flat-gap prior: pooling across a zero-density stretch still realizes exactly") {
    Problem pb = threshold_problem();
    pb.distribution = StateDistribution::piecewise_linear_cdf({{0.0, 0.0}, {0.4, 0.5}, {0.6, 0.5}, {1.0, 1.0}});
    pb.validate_and_normalize();
    const MenuSolution sol = solve_opt(pb);
    CHECK(sol.diag.converged);
    const Mechanism mech = construct_mechanism(sol);
    const AuditReport audit = audit_mechanism(pb, mech, sol);
    CHECK(audit.max_p_dev <= 1e-9);
    CHECK(audit.max_z_dev <= 1e-9);
    CHECK(audit.laminar.pass());
    const OracleResult oracle = oracle_discrete(pb, 1000);
    CHECK(oracle.objective <= sol.objective + 1e-6);
    CHECK(sol.objective - oracle.objective <= 5e-3);
}

TEST_CASE("negative support runs through construction and audit") {
    Problem pb;
    pb.distribution = StateDistribution::uniform(-1.0, 1.0);
    pb.types = {{"t", 1.0}};
    pb.actions = {"pass", "act"};
    pb.u1 = {{0.0, 1.0}};
    pb.u2 = {{0.0, -0.5}};
    pb.v1 = {{0.0, 0.0}};
    pb.v2 = {{0.0, 1.0}};
    pb.validate_and_normalize();
    const MenuSolution sol = solve_opt(pb);
    const Mechanism mech = construct_mechanism(sol);
    const AuditReport audit = audit_mechanism(pb, mech, sol);
    CHECK(audit.max_p_dev <= 1e-9);
    CHECK(audit.max_z_dev <= 1e-9);
    CHECK(audit.laminar.pass());
    // pooled element is [0, 1] with mean exactly the cutoff 0.5
    const MechanismElement& act = mech.entries[0].elements.back();
    CHECK(act.message == "act");
    CHECK(act.parts[0].lo == doctest::Approx(0.0).epsilon(1e-8));
    CHECK(act.z / act.p == doctest::Approx(0.5).epsilon(1e-9));
}
