// Acceptance suite: one line per criterion, nonzero exit on any failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include "corpus.hpp"
#include "persuasion/instances.hpp"
#include "persuasion/laminar.hpp"
#include "persuasion/verify.hpp"

using namespace persuasion;

namespace {

int failures = 0;

std::string num(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", x);
    return buf;
}

void report(int id, const std::string& name, bool pass, const std::string& detail) {
    std::printf("[%s] criterion %d: %s%s%s\n", pass ? "PASS" : "FAIL", id, name.c_str(),
                detail.empty() ? "" : " -- ", detail.c_str());
    if (!pass) ++failures;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void criterion_1_buyer() {
    const auto t0 = std::chrono::steady_clock::now();
    try {
        const ExampleReport rep = reproduce_example("buyer");
        const double secs = seconds_since(t0);
        std::string detail = "objective " + num(rep.objective) + ", oracle " + num(rep.oracle_objective) + ", " + num(secs) + "s";
        bool pass = rep.pass() && secs < 30.0;
        for (const CheckLine& c : rep.checks) {
            if (!c.pass) detail += "; failed " + c.name;
        }
        report(1, "buyer menu reproduction", pass, detail);
    } catch (const std::exception& e) {
        report(1, "buyer menu reproduction", false, e.what());
    }
}

void criterion_2_public_private() {
    bool pass = true;
    std::string detail;
    for (int n : {2, 3, 5}) {
        const auto t0 = std::chrono::steady_clock::now();
        try {
            const ExampleReport rep = reproduce_example("public_private", n);
            const double secs = seconds_since(t0);
            const bool ok = rep.pass() && secs < 10.0;
            pass = pass && ok;
            detail += "n=" + std::to_string(n) + (ok ? " ok(" : " FAIL(") + num(secs) + "s) ";
            if (!rep.pass()) {
                for (const CheckLine& c : rep.checks) {
                    if (!c.pass) detail += c.name + " ";
                }
            }
        } catch (const std::exception& e) {
            pass = false;
            detail += std::string("n=") + std::to_string(n) + " threw: " + e.what();
        }
    }
    report(2, "public-vs-private gap instance", pass, detail);
}

struct CorpusOutcome {
    bool fidelity = true;
    bool sandwich = true;
    bool one_over_n = true;
    double max_dev = 0.0;
    double worst_sandwich = 0.0;
    double worst_ratio_margin = 0.0;
    int max_block_excess = 0;
    std::string note;
};

CorpusOutcome run_corpus() {
    CorpusOutcome out;
    std::mt19937_64 rng(987654321u);
    const SolverConfig cfg;
    for (int i = 0; i < 200; ++i) {
        const bool nonneg = i < 100;
        const Problem pb = corpus::random_problem(rng, nonneg);
        const int n = pb.num_types();
        try {
            const MenuSolution priv = solve_opt(pb, cfg);
            SolverConfig relaxed = cfg;
            relaxed.include_ic = false;
            const MenuSolution noic = solve_opt(pb, relaxed);
            const MenuSolution pub = solve_public(pb, cfg);

            out.worst_sandwich = std::max({out.worst_sandwich, priv.objective - noic.objective,
                                           pub.objective - priv.objective});
            if (noic.objective < priv.objective - 1e-7 || priv.objective < pub.objective - 1e-7) {
                out.sandwich = false;
                out.note += "sandwich@" + std::to_string(i) + " ";
            }
            if (nonneg) {
                const double margin = pub.objective - priv.objective / n;
                out.worst_ratio_margin = std::min(out.worst_ratio_margin, margin);
                if (margin < -1e-6) {
                    out.one_over_n = false;
                    out.note += "1/n@" + std::to_string(i) + " ";
                }
            }

            const Mechanism mech = construct_mechanism(priv);
            const AuditReport audit = audit_mechanism(pb, mech, priv);
            out.max_dev = std::max({out.max_dev, audit.max_p_dev, audit.max_z_dev});
            if (audit.max_p_dev > 1e-8 || audit.max_z_dev > 1e-8 || !audit.laminar.pass()) {
                out.fidelity = false;
                out.note += "fidelity@" + std::to_string(i) + " ";
            }
            out.max_block_excess = std::max(out.max_block_excess, audit.laminar.max_block_size - (n + 2));
        } catch (const std::exception& e) {
            out.fidelity = false;
            out.sandwich = false;
            out.note += "threw@" + std::to_string(i) + "(" + e.what() + ") ";
        }
    }
    if (out.max_block_excess > 0) out.fidelity = false;
    return out;
}

void criterion_5_window_equation() {
    try {
        const auto d = StateDistribution::uniform(0.0, 1.0);
        std::vector<BlockAtom> atoms{{0, 0.5, 0.15, 0.3}, {1, 0.5, 0.35, 0.7}};
        const LaminarFamily fam = construct_block(d, 0.0, 1.0, atoms);
        const double err = std::max(std::abs(fam.hulls[1].lo - 0.45), std::abs(fam.hulls[1].hi - 0.95));
        report(5, "two-atom window equation J2 = [0.45, 0.95]", err <= 1e-10,
               "endpoint error " + num(err));
    } catch (const std::exception& e) {
        report(5, "two-atom window equation J2 = [0.45, 0.95]", false, e.what());
    }
}

void criterion_6_oracle_convergence() {
    try {
        const Problem pb = threshold_problem();
        bool pass = true;
        std::string detail;
        double prev = -1.0;
        for (int bins : {100, 500, 2000}) {
            const OracleResult oracle = oracle_discrete(pb, bins);
            const double err = std::abs(oracle.objective - 0.5);
            pass = pass && err <= 2.0 / bins && oracle.objective >= prev - 1e-9;
            prev = oracle.objective;
            detail += "bins=" + std::to_string(bins) + " obj=" + num(oracle.objective) + " err=" + num(std::abs(oracle.objective - 0.5)) + " ";
        }
        report(6, "oracle convergence on the threshold instance", pass, detail);
    } catch (const std::exception& e) {
        report(6, "oracle convergence on the threshold instance", false, e.what());
    }
}

}  // namespace

int main() {
    criterion_1_buyer();
    criterion_2_public_private();

    const auto t0 = std::chrono::steady_clock::now();
    const CorpusOutcome corpus_out = run_corpus();
    const double secs = seconds_since(t0);
    report(3, "realization fidelity on 200 random instances",
           corpus_out.fidelity && secs < 300.0,
           "max (p,z) deviation " + num(corpus_out.max_dev) + ", block excess " +
               std::to_string(corpus_out.max_block_excess) + ", " + num(secs) + "s " + corpus_out.note);
    report(4, "sandwich and 1/n properties on the corpus", corpus_out.sandwich && corpus_out.one_over_n,
           "worst sandwich slack " + num(corpus_out.worst_sandwich) + ", worst 1/n margin " +
               num(corpus_out.worst_ratio_margin) + " " + corpus_out.note);

    criterion_5_window_equation();
    criterion_6_oracle_convergence();

    if (failures == 0) {
        std::printf("acceptance: all criteria passed\n");
    } else {
        std::printf("acceptance: %d criterion(s) FAILED\n", failures);
    }
    return failures;
}
