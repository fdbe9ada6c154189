// Copyright 2026 The jtele Authors.

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at

//     http://www.apache.org/licenses/LICENSE-2.0

// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// jtele: inclusion descriptions in, JSON certificates out.
//
// Exit codes: 0 when every check passes, 1 when a check fails, 2 on bad input.

#include <fstream>
#include <iostream>
#include <iterator>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "jtele/jtele.hpp"

namespace {

using json = nlohmann::json;
using namespace jtele;

/// Malformed or inconsistent input; maps to exit code 2.
struct InputError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Globals {
    double tol = 1e-9;
    std::uint64_t seed = 42;
    int indent = 2;
    Tolerance tolerance() const { return Tolerance{tol, tol}; }
};

struct Outcome {
    json derived = json::object();
    Report report;
    std::vector<std::string> warnings;
};

// JSON plumbing ------------------------------------------------------------

json number(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

json matrix_json(const CMatrix &m) {
    json rows = json::array();
    for (long i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (long j = 0; j < m.cols(); ++j)
            row.push_back({m(i, j).real(), m(i, j).imag()});
        rows.push_back(row);
    }
    return rows;
}

CMatrix matrix_from_json(const json &j, long n, const std::string &where) {
    if (!j.is_array() || long(j.size()) != n)
        throw InputError(where + ": expected " + std::to_string(n) + " rows");
    CMatrix m(n, n);
    for (long r = 0; r < n; ++r) {
        const auto &row = j[r];
        if (!row.is_array() || long(row.size()) != n)
            throw InputError(where + ": row " + std::to_string(r) + " must have " +
                             std::to_string(n) + " entries");
        for (long c = 0; c < n; ++c) {
            const auto &e = row[c];
            if (e.is_number())
                m(r, c) = e.get<double>();
            else if (e.is_array() && e.size() == 2 && e[0].is_number() && e[1].is_number())
                m(r, c) = cplx(e[0].get<double>(), e[1].get<double>());
            else
                throw InputError(where + ": entry (" + std::to_string(r) + ", " +
                                 std::to_string(c) + ") is not [re, im]");
        }
    }
    return m;
}

std::vector<CMatrix> matrices_from_json(const json &j, long n, const std::string &where) {
    if (!j.is_array())
        throw InputError(where + ": expected a list of matrices");
    std::vector<CMatrix> out;
    for (std::size_t k = 0; k < j.size(); ++k)
        out.push_back(matrix_from_json(j[k], n, where + "[" + std::to_string(k) + "]"));
    return out;
}

std::string slurp(const std::string &path) {
    if (path == "-")
        return {std::istreambuf_iterator<char>(std::cin), {}};
    std::ifstream in(path);
    if (!in)
        throw InputError("cannot open " + path);
    return {std::istreambuf_iterator<char>(in), {}};
}

json load_json(const std::string &path) {
    const std::string text = slurp(path);
    try {
        return json::parse(text);
    } catch (const json::parse_error &e) {
        const std::size_t upto = std::min<std::size_t>(e.byte, text.size());
        long line = 1 + long(std::count(text.begin(), text.begin() + long(upto), '\n'));
        throw InputError(path + ": line " + std::to_string(line) + ": " + e.what());
    }
}

json blocks_json(const std::vector<Block> &bs) {
    json out = json::array();
    for (const auto &b : bs)
        out.push_back({b.n, b.m});
    return out;
}

std::vector<Block> blocks_from_json(const json &j, const std::string &where) {
    if (!j.is_array() || j.empty())
        throw InputError(where + ": expected a non-empty list of [dim, multiplicity]");
    std::vector<Block> out;
    for (const auto &b : j) {
        if (!b.is_array() || b.size() != 2 || !b[0].is_number_integer() ||
            !b[1].is_number_integer() || b[0].get<long>() < 1 || b[1].get<long>() < 1)
            throw InputError(where + ": each block is [dim, multiplicity] with positive integers");
        out.push_back({b[0].get<long>(), b[1].get<long>()});
    }
    return out;
}

long block_total(const std::vector<Block> &bs) {
    long s = 0;
    for (const auto &b : bs)
        s += b.n * b.m;
    return s;
}

std::vector<Block> sorted(std::vector<Block> bs) {
    std::sort(bs.begin(), bs.end(),
              [](const Block &a, const Block &b) { return a.n != b.n ? a.n < b.n : a.m < b.m; });
    return bs;
}

/// InclusionSpec: ambient_dim, N_blocks, embedding, trace, and optionally M
/// as {"blocks": ...} or {"generators": ...}; M defaults to M_{ambient_dim}.
Inclusion inclusion_from_spec(const json &spec) {
    if (!spec.is_object())
        throw InputError("inclusion spec must be a JSON object");
    if (!spec.contains("ambient_dim") || !spec["ambient_dim"].is_number_integer() ||
        spec["ambient_dim"].get<long>() < 1)
        throw InputError("ambient_dim must be a positive integer");
    const long n = spec["ambient_dim"].get<long>();
    if (!spec.contains("N_blocks"))
        throw InputError("N_blocks is required");
    const auto n_blocks = blocks_from_json(spec["N_blocks"], "N_blocks");

    FinDimAlgebra m_alg;
    if (spec.contains("M")) {
        const auto &m = spec["M"];
        if (m.contains("blocks")) {
            auto mb = blocks_from_json(m["blocks"], "M.blocks");
            if (block_total(mb) != n)
                throw InputError("M.blocks do not fill ambient_dim");
            m_alg = block_diagonal(mb);
        } else if (m.contains("generators")) {
            m_alg = from_generators(matrices_from_json(m["generators"], n, "M.generators"), n);
        } else {
            throw InputError("M must have blocks or generators");
        }
    } else {
        m_alg = full_matrix_algebra(n);
    }

    FinDimAlgebra n_alg;
    const json emb = spec.value("embedding", json("block_diagonal"));
    if (emb.is_string() && emb.get<std::string>() == "block_diagonal") {
        if (block_total(n_blocks) != n)
            throw InputError("N_blocks do not fill ambient_dim");
        n_alg = block_diagonal(n_blocks);
    } else if (emb.is_object() && emb.contains("explicit")) {
        n_alg = from_generators(matrices_from_json(emb["explicit"], n, "embedding.explicit"), n);
        if (sorted(n_alg.blocks) != sorted(n_blocks))
            throw InputError("explicit generators do not produce the declared N_blocks");
    } else {
        throw InputError("embedding must be \"block_diagonal\" or {\"explicit\": [...]}");
    }

    auto nref = share(std::move(n_alg));
    auto mref = share(std::move(m_alg));
    const json tr = spec.value("trace", json("markov"));
    if (tr.is_string() && tr.get<std::string>() == "markov")
        return make_inclusion(nref, mref);
    if (tr.is_array()) {
        std::vector<double> w;
        for (const auto &x : tr) {
            if (!x.is_number())
                throw InputError("trace weights must be numbers");
            w.push_back(x.get<double>());
        }
        if (long(w.size()) != mref->num_blocks())
            throw InputError("trace needs one weight per block of M");
        return make_inclusion(nref, mref, TraceFunctional::on(*mref, w));
    }
    throw InputError("trace must be \"markov\" or a list of weights");
}

// Shared pieces ------------------------------------------------------------

PPBasis basis_for(const Inclusion &inc, const std::string &family,
                  const std::string &matrices_path, const Tolerance &tol) {
    const long n = inc.big->ambient_dim;
    PPBasis b;
    if (!matrices_path.empty()) {
        b.elements = matrices_from_json(load_json(matrices_path), n, matrices_path);
    } else {
        std::string f = family;
        if (f == "auto")
            f = inc.small->dim() == 1 ? "weyl" : "homogeneous";
        if (f == "weyl") {
            b.elements = weyl_basis(n).elements;
        } else if (f == "shifts") {
            b.elements = diagonal_shift_basis(n).elements;
        } else if (f == "characters") {
            b.elements = character_basis(n).elements;
        } else if (f == "homogeneous") {
            auto h = homogeneity_test(inc, tol);
            if (!h.witness)
                throw InputError("N is not homogeneous, no witness basis");
            b.elements = h.witness->elements;
        } else {
            throw InputError("unknown basis family " + family);
        }
    }
    b.inc = inc;
    return b;
}

json flag(const std::optional<bool> &f) { return f ? json(*f) : json(nullptr); }

void add_scheme_flags(Outcome &o, const TeleportationScheme &s) {
    o.derived["outcomes"] = s.outcomes();
    o.derived["tight"] = flag(s.flags.tight);
    o.derived["unbiased"] = flag(s.flags.unbiased);
    o.derived["faithful"] = flag(s.flags.faithful);
    o.derived["minimal"] = flag(s.flags.minimal);
    o.derived["unbiased_value"] = number(s.flags.unbiased_value);
    o.derived["min_outcome_weight"] = number(s.flags.min_outcome_weight);
    if (s.flags.witness_outcome >= 0) {
        o.derived["witness_outcome"] = s.flags.witness_outcome;
        o.derived["witness_probability"] = number(s.flags.witness_probability);
    }
}

void verify_and_classify(Outcome &o, TeleportationScheme &s, const Globals &g) {
    o.report.append(verify_scheme(s, g.tolerance()));
    o.report.append(classify(s, g.tolerance(), g.seed), "classify.");
    add_scheme_flags(o, s);
}

// Commands -----------------------------------------------------------------

Outcome cmd_inclusion_info(const Inclusion &inc, const Globals &g) {
    Outcome o;
    const double b = g.tol * std::sqrt(double(inc.big->ambient_dim));
    double contain = 0.0;
    for (const auto &x : inc.small->basis)
        contain = std::max(contain, inc.big->distance(x));
    o.report.add("N_in_M", contain, b);
    o.report.add("trace_normalised", std::abs(inc.tau.unit_value() - 1.0), g.tol);
    o.derived["ambient_dim"] = inc.big->ambient_dim;
    o.derived["N_blocks"] = blocks_json(inc.small->blocks);
    o.derived["M_blocks"] = blocks_json(inc.big->blocks);
    json lam = json::array();
    for (long i = 0; i < inc.lambda.rows(); ++i) {
        json row = json::array();
        for (long j = 0; j < inc.lambda.cols(); ++j)
            row.push_back(inc.lambda(i, j));
        lam.push_back(row);
    }
    o.derived["lambda"] = lam;
    o.derived["trace_weights"] = inc.tau.weights;
    o.derived["connected"] = inc.connected();
    if (inc.connected()) {
        o.derived["index"] = inc.index();
        o.derived["markov_trace"] = markov_trace(*inc.small, *inc.big).weights;
        o.derived["markov"] = inc.markov(g.tolerance());
    } else {
        o.derived["index"] = nullptr;
        o.warnings.push_back("inclusion is not connected; no index or Markov trace");
    }
    return o;
}

Outcome cmd_basis(const Inclusion &inc, const std::string &family,
                  const std::string &matrices, bool cardinality, const Globals &g) {
    Outcome o;
    auto b = basis_for(inc, family, matrices, g.tolerance());
    o.report.append(verify_basis(b, g.tolerance()));
    if (cardinality)
        o.report.append(cardinality_test(b), "cardinality.");
    o.derived["family"] = matrices.empty() ? family : "matrices";
    o.derived["size"] = b.size();
    o.derived["orthonormal"] = b.orthonormal;
    o.derived["unitary"] = b.unitary;
    o.derived["in_normaliser"] = b.in_normaliser;
    o.derived["verified"] = b.verified;
    if (inc.connected())
        o.derived["index"] = inc.index();
    return o;
}

struct TeleportArgs {
    std::string scheme = "standard";
    std::string family = "auto";
    std::string params;
    bool extract = false;
};

Outcome cmd_teleport(const Inclusion &inc, const TeleportArgs &a, const Globals &g) {
    Outcome o;
    const auto tol = g.tolerance();
    o.derived["scheme"] = a.scheme;
    if (a.scheme == "direct-sum") {
        auto s = build_direct_sum(*inc.big, tol);
        verify_and_classify(o, s, g);
        return o;
    }
    auto b = basis_for(inc, a.family, "", tol);
    verify_basis(b, tol);
    o.derived["index"] = inc.index();
    if (a.scheme == "standard") {
        auto s = build_standard(inc.big->ambient_dim, b, tol);
        verify_and_classify(o, s, g);
    } else if (a.scheme == "unbiased") {
        Tower t = build_tower(inc, tol);
        o.report.append(locc_unitaries(t, b, tol, g.seed).report, "locc.");
        auto s = build_unbiased(t, b, tol, g.seed);
        const double bnd = tol.abs + tol.rel * std::sqrt(double(s.ctx->dim));
        o.report.add("teleportation_identity", teleportation_residual(s), bnd);
        double wdev = 0.0;
        const CMatrix target = identity(s.ctx->dim) / inc.index();
        for (const auto &w : outcome_weights(s))
            wdev = std::max(wdev, (w - target).norm());
        o.report.add("outcome_weights_are_inverse_index", wdev, bnd);
        o.derived["bimodule_defect"] = number(bimodule_defect(s));
        o.derived["outcomes"] = s.outcomes();
        try {
            o.report.append(verify_scheme(s, tol), "verify.");
        } catch (const SchemeError &e) {
            o.report.add_flag("verify.structural", false);
            o.warnings.push_back(e.what());
        }
    } else if (a.scheme == "werner") {
        const long n = inc.big->ambient_dim;
        CMatrix u = identity(n), z = identity(n);
        if (!a.params.empty()) {
            const json p = load_json(a.params);
            if (p.contains("u"))
                u = matrix_from_json(p["u"], n, "params.u");
            if (p.contains("z"))
                z = matrix_from_json(p["z"], n, "params.z");
        }
        auto s = build_werner_scheme(inc, b, u, z, tol);
        verify_and_classify(o, s, g);
        if (a.extract) {
            auto w = werner_extract(s, tol, g.seed);
            o.report.append(w.report, "extract.");
            o.derived["extracted_z"] = matrix_json(w.z);
        }
    } else {
        throw InputError("unknown scheme " + a.scheme);
    }
    return o;
}

void add_certificate(Outcome &o, const Certificate &c, const std::string &prefix) {
    o.report.append(c.report, prefix);
    o.derived["graph"] = c.graph;
    o.derived["lower_bound"] = c.bound;
    o.derived["colours"] = c.colours;
    o.derived["index"] = c.index;
}

Outcome cmd_graph(const Inclusion &inc, const std::string &mode, const std::string &family,
                  const Globals &g) {
    Outcome o;
    const auto tol = g.tolerance();
    o.derived["mode"] = mode;
    if (mode == "colour-factor") {
        auto graphs = graph_from_inclusion(inc);
        auto col = colouring_factor_case(inc, tol);
        o.report.append(verify_colouring(graphs.second, col, tol), "colouring.");
        add_certificate(o, lower_bound_certificate(graphs.second, col, tol), "certificate.");
        o.derived["L_dim"] = col.L->ambient_dim;
    } else if (mode == "colour-basis") {
        auto b = basis_for(inc, family, "", tol);
        verify_basis(b, tol);
        Tower t = basic_construction(inc, tol);
        auto gr = graph_from_tower(t, b);
        auto col = colouring_from_basis(t, b);
        o.report.append(verify_colouring(gr, col, tol), "colouring.");
        add_certificate(o, lower_bound_certificate(gr, col, tol), "certificate.");
        o.derived["L_dim"] = col.L->ambient_dim;
    } else if (mode == "bounds") {
        auto r = chromatic_bounds(inc, tol);
        for (const auto &rep : r.colouring_reports)
            o.report.append(rep, "colouring.");
        for (const auto &c : r.certificates)
            o.report.append(c.report, "certificate.");
        o.derived["graph"] = r.graph.empty() ? json(nullptr) : json(r.graph);
        o.derived["lower"] = r.lower;
        o.derived["upper"] = r.upper ? json(*r.upper) : json(nullptr);
        o.derived["tight"] = r.tight();
        o.warnings = r.warnings;
    } else {
        throw InputError("unknown graph mode " + mode);
    }
    return o;
}

json report_json(const Report &r) {
    json out = json::array();
    for (const auto &c : r.checks)
        out.push_back({{"name", c.name}, {"residual", number(c.residual)}, {"pass", c.pass}});
    return out;
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"Jones-tower teleportation and quantum graph certificates", "jtele"};
    app.require_subcommand(1);
    app.fallthrough();
    Globals g;
    app.add_option("--tol", g.tol, "absolute and relative tolerance")->capture_default_str();
    app.add_option("--seed", g.seed, "seed for randomised checks")->capture_default_str();
    app.add_option("--json-indent", g.indent, "JSON indent width")->capture_default_str();

    std::string input;
    auto *info = app.add_subcommand("inclusion-info", "blocks, inclusion matrix, trace, index");
    info->add_option("spec", input, "inclusion spec (JSON, - for stdin)")->required();

    std::string family = "auto", matrices;
    bool cardinality = false;
    auto *basis = app.add_subcommand("basis", "build and verify a Pimsner-Popa basis");
    basis->add_option("spec", input)->required();
    basis->add_option("--family", family, "auto, weyl, shifts, characters, homogeneous");
    basis->add_option("--matrices", matrices, "JSON list of basis matrices");
    basis->add_flag("--verify", cardinality, "also run the orthonormality cardinality test");

    TeleportArgs targs;
    auto *tele = app.add_subcommand("teleport", "build, verify and classify a scheme");
    tele->add_option("spec", input)->required();
    tele->add_option("--scheme", targs.scheme)
        ->check(CLI::IsMember({"standard", "direct-sum", "unbiased", "werner"}));
    tele->add_option("--family", targs.family, "basis family");
    tele->add_option("--params", targs.params, "JSON with optional u and z for werner");
    tele->add_flag("--extract", targs.extract, "werner: extract (basis, u, z) and rebuild");

    std::string mode = "bounds";
    auto *graph = app.add_subcommand("graph", "colourings and chromatic bounds");
    graph->add_option("spec", input)->required();
    graph->add_option("--mode", mode)
        ->check(CLI::IsMember({"colour-factor", "colour-basis", "bounds"}));
    graph->add_option("--family", family, "basis family for colour-basis");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp &e) {
        return app.exit(e);
    } catch (const CLI::ParseError &e) {
        app.exit(e);
        return 2;
    }

    json command = {{"input", input}};
    Outcome out;
    const std::string name = app.get_subcommands().front()->get_name();
    command["name"] = name;
    try {
        const Inclusion inc = inclusion_from_spec(load_json(input));
        if (name == "inclusion-info") {
            out = cmd_inclusion_info(inc, g);
        } else if (name == "basis") {
            command["family"] = family;
            if (!matrices.empty())
                command["matrices"] = matrices;
            command["verify"] = cardinality;
            out = cmd_basis(inc, family, matrices, cardinality, g);
        } else if (name == "teleport") {
            command["scheme"] = targs.scheme;
            command["family"] = targs.family;
            command["extract"] = targs.extract;
            if (!targs.params.empty())
                command["params"] = targs.params;
            out = cmd_teleport(inc, targs, g);
        } else {
            command["mode"] = mode;
            command["family"] = family;
            out = cmd_graph(inc, mode, family, g);
        }
    } catch (const InputError &e) {
        std::cerr << "jtele: input error: " << e.what() << "\n";
        return 2;
    } catch (const SchemeError &e) {
        out.report.add_flag("construction", false);
        out.warnings.push_back(e.what());
    } catch (const HypothesisError &e) {
        out.report.add_flag("construction", false);
        out.warnings.push_back(e.what());
    } catch (const ExtractionError &e) {
        out.report.add_flag("construction", false);
        out.warnings.push_back(e.what());
    } catch (const ColouringError &e) {
        out.report.add_flag("construction", false);
        out.warnings.push_back(e.what());
    } catch (const CertificateError &e) {
        out.report.add_flag("construction", false);
        out.warnings.push_back(e.what());
    } catch (const Error &e) {
        std::cerr << "jtele: input error: " << e.what() << "\n";
        return 2;
    }

    json cert = {{"command", command},
                 {"version", kVersion},
                 {"seed", g.seed},
                 {"tolerance", g.tol},
                 {"checks", report_json(out.report)},
                 {"derived", out.derived},
                 {"warnings", out.warnings},
                 {"pass", out.report.ok()}};
    std::cout << cert.dump(g.indent) << "\n";
    long failed = std::count_if(out.report.checks.begin(), out.report.checks.end(),
                                [](const Check &c) { return !c.pass; });
    std::cerr << "jtele " << name << ": " << out.report.checks.size() << " checks, " << failed
              << " failed\n";
    for (const auto &w : out.warnings)
        std::cerr << "jtele: warning: " << w << "\n";
    return out.report.ok() ? 0 : 1;
}
