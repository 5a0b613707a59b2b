#include "persuasion/io.hpp"

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace persuasion {

using nlohmann::json;

namespace {

[[noreturn]] void parse_fail(const std::string& field, const std::string& why) {
    throw std::invalid_argument("problem file: field '" + field + "' " + why);
}

const json& need(const json& j, const char* field) {
    if (!j.contains(field)) parse_fail(field, "is missing");
    return j.at(field);
}

double need_number(const json& j, const char* field) {
    const json& v = need(j, field);
    if (!v.is_number()) parse_fail(field, "must be a number");
    return v.get<double>();
}

std::vector<std::vector<double>> need_matrix(const json& j, const char* field, size_t rows, size_t cols) {
    const json& v = need(j, field);
    if (!v.is_array() || v.size() != rows) parse_fail(field, "must be a [types][actions] matrix");
    std::vector<std::vector<double>> out;
    for (const json& row : v) {
        if (!row.is_array() || row.size() != cols) parse_fail(field, "must be a [types][actions] matrix");
        out.emplace_back();
        for (const json& x : row) {
            if (!x.is_number()) parse_fail(field, "must contain numbers");
            out.back().push_back(x.get<double>());
        }
    }
    return out;
}

}  // namespace

StateDistribution distribution_from_json(const json& j) {
    const json& kind = need(j, "kind");
    if (kind == "uniform") {
        return StateDistribution::uniform(need_number(j, "lo"), need_number(j, "hi"));
    }
    if (kind == "pl_cdf") {
        const json& knots = need(j, "knots");
        if (!knots.is_array()) parse_fail("knots", "must be an array of [state, cum] pairs");
        std::vector<std::pair<double, double>> pts;
        for (const json& k : knots) {
            if (!k.is_array() || k.size() != 2 || !k[0].is_number() || !k[1].is_number()) {
                parse_fail("knots", "must be an array of [state, cum] pairs");
            }
            pts.emplace_back(k[0].get<double>(), k[1].get<double>());
        }
        return StateDistribution::piecewise_linear_cdf(std::move(pts));
    }
    parse_fail("kind", "must be 'uniform' or 'pl_cdf'");
}

json distribution_to_json(const StateDistribution& d) {
    json j;
    if (d.kind() == StateDistribution::Kind::Uniform) {
        j["kind"] = "uniform";
        j["lo"] = d.support_lo();
        j["hi"] = d.support_hi();
    } else {
        j["kind"] = "pl_cdf";
        json knots = json::array();
        for (size_t i = 0; i < d.knot_states().size(); ++i) {
            knots.push_back({d.knot_states()[i], d.knot_cums()[i]});
        }
        j["knots"] = knots;
    }
    return j;
}

LoadedProblem problem_from_json(const json& j) {
    LoadedProblem lp;
    Problem& pb = lp.problem;
    pb.distribution = distribution_from_json(need(j, "distribution"));

    const json& types = need(j, "types");
    if (!types.is_array() || types.empty()) parse_fail("types", "must be a non-empty array");
    for (const json& t : types) {
        TypeSpec spec;
        spec.label = need(t, "label").is_string() ? t.at("label").get<std::string>() : std::string();
        spec.weight = need_number(t, "weight");
        pb.types.push_back(spec);
    }

    const json& actions = need(j, "actions");
    if (!actions.is_array() || actions.empty()) parse_fail("actions", "must be a non-empty array");
    for (const json& a : actions) {
        if (!a.is_string()) parse_fail("actions", "must contain strings");
        pb.actions.push_back(a.get<std::string>());
    }

    const size_t n = pb.types.size(), k = pb.actions.size();
    pb.u1 = need_matrix(j, "u1", n, k);
    pb.u2 = need_matrix(j, "u2", n, k);
    pb.v2 = need_matrix(j, "v2", n, k);
    if (j.contains("v1")) {
        pb.v1 = need_matrix(j, "v1", n, k);
    } else {
        pb.v1.assign(n, std::vector<double>(k, 0.0));
    }
    if (j.contains("participation")) {
        const json& part = j.at("participation");
        if (!part.is_array() || part.size() != n) parse_fail("participation", "must list one bound (or null) per type");
        for (const json& b : part) {
            if (b.is_null()) {
                pb.participation.push_back(std::nullopt);
            } else if (b.is_number()) {
                pb.participation.push_back(b.get<double>());
            } else {
                parse_fail("participation", "entries must be numbers or null");
            }
        }
    }
    if (j.contains("solver")) {
        const json& s = j.at("solver");
        if (s.contains("initial_grid")) lp.config.initial_grid = s.at("initial_grid").get<int>();
        if (s.contains("cut_tol")) lp.config.cut_tol = s.at("cut_tol").get<double>();
        if (s.contains("max_rounds")) lp.config.max_rounds = s.at("max_rounds").get<int>();
        if (s.contains("lp_tol")) lp.config.lp_tol = s.at("lp_tol").get<double>();
        if (s.contains("eps_bind")) lp.config.eps_bind = s.at("eps_bind").get<double>();
        if (s.contains("vertex_refinement")) lp.config.vertex_refinement = s.at("vertex_refinement").get<bool>();
    }
    lp.weights_renormalized = pb.validate_and_normalize();
    return lp;
}

LoadedProblem load_problem(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open problem file: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw std::invalid_argument("problem file: JSON parse error at byte " + std::to_string(e.byte) + ": " + e.what());
    }
    return problem_from_json(j);
}

json solution_to_json(const MenuSolution& sol, const ICReport* ic) {
    json j;
    j["objective"] = sol.objective;
    j["public"] = sol.is_public;
    j["ic_included"] = sol.ic_included;
    json entries = json::array();
    SolverConfig defaults;
    const double eps = defaults.binding_eps(sol.dist);
    for (int e = 0; e < sol.num_entries(); ++e) {
        json je;
        je["label"] = sol.entry_labels.empty() ? std::to_string(e) : sol.entry_labels[static_cast<size_t>(e)];
        je["weight"] = sol.weights[static_cast<size_t>(e)];
        json atoms = json::array();
        for (const PosteriorAtom& at : posterior_atoms(sol, e)) {
            json ja;
            ja["action"] = at.label;
            ja["p"] = at.p;
            ja["mean"] = at.mean;
            atoms.push_back(ja);
        }
        je["atoms"] = atoms;
        json blocks = json::array();
        for (const Block& b : binding_groups(sol, e, eps)) {
            json jb;
            jb["q_lo"] = b.q_lo;
            jb["q_hi"] = b.q_hi;
            json cells = json::array();
            for (const BlockAtom& at : b.atoms) cells.push_back(at.cell);
            jb["cells"] = cells;
            blocks.push_back(jb);
        }
        je["binding_groups"] = blocks;
        entries.push_back(je);
    }
    j["entries"] = entries;
    if (ic) j["ic"] = ic_to_json(*ic);
    json diag;
    diag["rounds"] = sol.diag.rounds;
    diag["majorization_cuts"] = sol.diag.majorization_cuts;
    diag["ic_cuts"] = sol.diag.ic_cuts;
    diag["lp_pivots"] = sol.diag.lp_pivots;
    diag["max_violation"] = sol.diag.max_violation;
    diag["ic_violation"] = sol.diag.ic_violation;
    diag["converged"] = sol.diag.converged;
    j["diagnostics"] = diag;
    return j;
}

json mechanism_to_json(const Mechanism& mech, const MenuSolution& sol) {
    json j;
    j["public"] = mech.is_public;
    j["distribution"] = distribution_to_json(mech.dist);
    json entries = json::array();
    for (size_t e = 0; e < mech.entries.size(); ++e) {
        json je;
        je["label"] = sol.entry_labels.empty() ? std::to_string(e) : sol.entry_labels[e];
        json els = json::array();
        for (const MechanismElement& el : mech.entries[e].elements) {
            json jl;
            jl["message"] = el.message;
            jl["cell"] = el.cell;
            jl["p"] = el.p;
            jl["mean"] = el.z / el.p;
            json parts = json::array();
            for (const Interval& iv : el.parts) parts.push_back({iv.lo, iv.hi});
            jl["intervals"] = parts;
            jl["block"] = el.block;
            jl["atom_rank"] = el.atom_rank;
            els.push_back(jl);
        }
        je["elements"] = els;
        json blocks = json::array();
        for (const Block& b : mech.entries[e].blocks) {
            json jb;
            jb["q_lo"] = b.q_lo;
            jb["q_hi"] = b.q_hi;
            json atoms = json::array();
            for (const BlockAtom& at : b.atoms) {
                atoms.push_back({{"cell", at.cell}, {"p", at.p}, {"z", at.z}});
            }
            jb["atoms"] = atoms;
            blocks.push_back(jb);
        }
        je["blocks"] = blocks;
        entries.push_back(je);
    }
    j["entries"] = entries;
    return j;
}

Mechanism mechanism_from_json(const json& j) {
    Mechanism mech;
    mech.dist = distribution_from_json(need(j, "distribution"));
    mech.is_public = j.value("public", false);
    for (const json& je : need(j, "entries")) {
        MechanismEntry entry;
        for (const json& jl : need(je, "elements")) {
            MechanismElement el;
            el.message = need(jl, "message").get<std::string>();
            el.cell = need(jl, "cell").get<int>();
            el.p = need_number(jl, "p");
            el.z = el.p * need_number(jl, "mean");
            el.block = need(jl, "block").get<int>();
            el.atom_rank = jl.value("atom_rank", 0);
            for (const json& iv : need(jl, "intervals")) {
                if (!iv.is_array() || iv.size() != 2) parse_fail("intervals", "must hold [lo, hi] pairs");
                el.parts.push_back(Interval{iv[0].get<double>(), iv[1].get<double>()});
            }
            if (!el.parts.empty()) {
                el.hull = Interval{el.parts.front().lo, el.parts.back().hi};
            }
            entry.elements.push_back(std::move(el));
        }
        for (const json& jb : need(je, "blocks")) {
            Block b;
            b.q_lo = need_number(jb, "q_lo");
            b.q_hi = need_number(jb, "q_hi");
            for (const json& ja : need(jb, "atoms")) {
                BlockAtom at;
                at.cell = need(ja, "cell").get<int>();
                at.p = need_number(ja, "p");
                at.z = need_number(ja, "z");
                at.mu = at.p > 0.0 ? at.z / at.p : 0.0;
                b.atoms.push_back(at);
            }
            entry.blocks.push_back(std::move(b));
        }
        mech.entries.push_back(std::move(entry));
    }
    return mech;
}

namespace {
std::string fmt17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}
}  // namespace

std::string mechanism_to_csv(const Mechanism& mech, const MenuSolution& sol) {
    std::ostringstream out;
    out << "type,message,interval_lo,interval_hi\n";
    for (size_t e = 0; e < mech.entries.size(); ++e) {
        const std::string label = sol.entry_labels.empty() ? std::to_string(e) : sol.entry_labels[e];
        for (const MechanismElement& el : mech.entries[e].elements) {
            for (const Interval& iv : el.parts) {
                out << label << ',' << el.message << ',' << fmt17(iv.lo) << ',' << fmt17(iv.hi) << '\n';
            }
        }
    }
    return out.str();
}

json audit_to_json(const AuditReport& audit) {
    json j;
    j["max_p_dev"] = audit.max_p_dev;
    j["max_z_dev"] = audit.max_z_dev;
    j["payoff_solver"] = audit.payoff_solver;
    j["payoff_quad"] = audit.payoff_quad;
    j["tol"] = audit.tol;
    j["pass"] = audit.pass();
    json rows = json::array();
    for (const AuditRow& r : audit.rows) {
        json jr;
        jr["entry"] = r.entry;
        jr["message"] = r.message;
        jr["p_solver"] = r.p_solver;
        jr["z_solver"] = r.z_solver;
        jr["p_quad"] = r.p_quad;
        jr["z_quad"] = r.z_quad;
        rows.push_back(jr);
    }
    j["rows"] = rows;
    json lam;
    lam["pass"] = audit.laminar.pass();
    lam["max_block_size"] = audit.laminar.max_block_size;
    lam["max_element_intervals"] = audit.laminar.max_element_intervals;
    json checks = json::array();
    for (const LaminarCheck& c : audit.laminar.checks) {
        json jc;
        jc["name"] = c.name;
        jc["pass"] = c.pass;
        if (!c.detail.empty()) jc["detail"] = c.detail;
        checks.push_back(jc);
    }
    lam["checks"] = checks;
    j["laminar"] = lam;
    return j;
}

json ic_to_json(const ICReport& ic) {
    json j;
    j["matrix"] = ic.report_value;
    j["truthful"] = ic.truthful;
    j["best_deviation"] = ic.best_deviation;
    j["binding"] = ic.binding;
    j["tol"] = ic.tol;
    j["ok"] = ic.ic_ok();
    if (!ic.participation_slack.empty()) {
        json slack = json::array();
        for (double s : ic.participation_slack) {
            if (std::isnan(s)) {
                slack.push_back(nullptr);
            } else {
                slack.push_back(s);
            }
        }
        j["participation_slack"] = slack;
    }
    return j;
}

json monte_carlo_to_json(const MonteCarloReport& mc) {
    json j;
    j["seed"] = mc.seed;
    j["samples"] = mc.samples;
    j["payoff_empirical"] = mc.payoff_empirical;
    j["pass"] = mc.pass;
    json msgs = json::array();
    for (const MonteCarloMessage& m : mc.messages) {
        json jm;
        jm["entry"] = m.entry;
        jm["message"] = m.message;
        jm["hits"] = m.hits;
        jm["freq"] = m.freq;
        jm["mean"] = m.mean;
        jm["p_expected"] = m.p_expected;
        jm["mean_expected"] = m.mean_expected;
        jm["se_freq"] = m.se_freq;
        jm["se_mean"] = m.se_mean;
        jm["flagged"] = m.flagged;
        msgs.push_back(jm);
    }
    j["messages"] = msgs;
    return j;
}

json oracle_to_json(const OracleResult& oracle) {
    json j;
    j["bins"] = oracle.bins;
    j["objective"] = oracle.objective;
    j["rounds"] = oracle.rounds;
    json tables = json::array();
    for (const auto& table : oracle.tables) {
        json jt = json::array();
        for (const OracleAtom& at : table) {
            json ja;
            ja["action"] = at.label;
            ja["p"] = at.p;
            ja["mean"] = at.mean;
            jt.push_back(ja);
        }
        tables.push_back(jt);
    }
    j["tables"] = tables;
    return j;
}

json example_to_json(const ExampleReport& rep) {
    json j;
    j["name"] = rep.name;
    j["pass"] = rep.pass();
    json checks = json::array();
    for (const CheckLine& c : rep.checks) {
        json jc;
        jc["name"] = c.name;
        jc["pass"] = c.pass;
        jc["value"] = c.value;
        jc["target"] = c.target;
        jc["tol"] = c.tol;
        if (!c.note.empty()) jc["note"] = c.note;
        checks.push_back(jc);
    }
    j["checks"] = checks;
    return j;
}

namespace {

void dump_rec(const json& j, std::string& out, int depth) {
    const std::string pad(static_cast<size_t>(depth) * 2, ' ');
    const std::string pad1(static_cast<size_t>(depth + 1) * 2, ' ');
    switch (j.type()) {
        case json::value_t::object: {
            if (j.empty()) {
                out += "{}";
                return;
            }
            out += "{\n";
            bool first = true;
            for (auto it = j.begin(); it != j.end(); ++it) {  // std::map order: sorted keys
                if (!first) out += ",\n";
                first = false;
                out += pad1 + json(it.key()).dump() + ": ";
                dump_rec(it.value(), out, depth + 1);
            }
            out += "\n" + pad + "}";
            return;
        }
        case json::value_t::array: {
            if (j.empty()) {
                out += "[]";
                return;
            }
            out += "[\n";
            bool first = true;
            for (const json& v : j) {
                if (!first) out += ",\n";
                first = false;
                out += pad1;
                dump_rec(v, out, depth + 1);
            }
            out += "\n" + pad + "]";
            return;
        }
        case json::value_t::number_float:
            out += fmt17(j.get<double>());
            return;
        default:
            out += j.dump();
            return;
    }
}

}  // namespace

std::string dump_canonical(const json& j) {
    std::string out;
    dump_rec(j, out, 0);
    out += "\n";
    return out;
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write file: " + path);
    out << content;
}

}  // namespace persuasion
