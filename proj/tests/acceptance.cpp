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

// Acceptance run: one PASS/FAIL line per criterion.
//
// Usage: acceptance <jtele binary> <specs directory>
//
// Exits 0 when every criterion passes or fails only in the documented way
// listed in kKnownFailures, 1 otherwise.

#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>

#include "cli_suite.hpp"
#include "jtele/jtele.hpp"
#include "test_util.hpp"

using namespace jtele;
using namespace jtele::testing;

namespace {

struct Verdict {
    bool pass = false;
    bool known = false; ///< failure matches a documented obstruction
    std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2e", x);
    return buf;
}

/// Largest residual among checks; a failed flag counts as infinite.
double worst(const Report &r) {
    double w = 0.0;
    for (const auto &c : r.checks)
        w = std::max(w, c.pass ? c.residual : std::numeric_limits<double>::infinity());
    return w;
}

PPBasis verified(PPBasis b) {
    verify_basis(b);
    return b;
}

Inclusion scalars_in(long n) {
    return make_inclusion(share(scalars(n)), share(full_matrix_algebra(n)));
}

Verdict tower_identities() {
    auto t0 = Clock::now();
    std::vector<std::pair<std::string, Inclusion>> cases = {
        {"C<M2", scalars_in(2)},
        {"C<M3", scalars_in(3)},
        {"l2<M2", diagonal_inclusion(2)},
        {"l3<M3", diagonal_inclusion(3)},
        {"M2+M2<M4", homogeneous_inclusion(2, 2)},
        {"C<C+M2", make_inclusion(share(scalars(3)), share(block_diagonal({{1, 1}, {2, 1}})))},
    };
    double w = 0.0;
    bool ok = true;
    std::string bad;
    for (const auto &[name, inc] : cases) {
        Tower t = build_tower(inc);
        Report r = verify_tower(t);
        r.append(verify_epr(t), "epr.");
        const double lam = lambda_norm_sq(inclusion_matrix(*t.m_rep, *t.m1));
        const bool integral = std::abs(lam - std::round(lam)) < 1e-9 &&
                              std::lround(lam) == std::lround(t.index_value) &&
                              std::abs(t.index_value - std::round(t.index_value)) < 1e-9;
        const double rw = worst(r);
        w = std::max(w, rw);
        if (!r.ok() || rw >= 1e-9 || !integral) {
            ok = false;
            bad += " " + name;
        }
    }
    const double secs = seconds_since(t0);
    ok = ok && secs < 10.0;
    return {ok, false,
            "6 inclusions, max residual " + fmt(w) + ", " + fmt(secs) + " s" +
                (bad.empty() ? "" : ", failing:" + bad)};
}

Verdict basis_suite() {
    std::vector<std::pair<std::string, PPBasis>> cases;
    for (long n = 2; n <= 4; ++n) {
        cases.push_back({"weyl" + std::to_string(n), weyl_basis(n)});
        cases.push_back({"shifts" + std::to_string(n), diagonal_shift_basis(n)});
        cases.push_back({"characters" + std::to_string(n), character_basis(n)});
    }
    for (auto [k, l] : {std::pair{2L, 1L}, {2L, 2L}, {3L, 1L}})
        cases.push_back({"homogeneous" + std::to_string(k) + std::to_string(l),
                         homogeneous_basis(k, l)});
    double w = 0.0;
    bool ok = true;
    std::string bad;
    for (auto &[name, b] : cases) {
        Report r = verify_basis(b);
        r.append(cardinality_test(b), "cardinality.");
        const double rw = worst(r);
        w = std::max(w, rw);
        if (!r.ok() || rw >= 1e-9) {
            ok = false;
            bad += " " + name;
        }
    }
    return {ok, false,
            std::to_string(cases.size()) + " bases, max residual " + fmt(w) +
                (bad.empty() ? "" : ", failing:" + bad)};
}

Verdict standard_scheme() {
    bool ok = true;
    std::ostringstream d;
    for (long n : {2L, 3L}) {
        auto s = build_standard(n, verified(weyl_basis(n)));
        Report v = verify_scheme(s);
        classify(s);
        const double res = v.find("teleportation_identity")->residual;
        const bool flags = s.flags.tight.value_or(false) && s.flags.unbiased.value_or(false) &&
                           s.flags.faithful.value_or(false) && s.flags.minimal.value_or(false);
        const bool value = std::abs(s.flags.unbiased_value - 1.0 / double(n * n)) < 1e-12;
        ok = ok && v.ok() && res < 1e-10 && flags && value;
        d << "n=" << n << " residual " << fmt(res) << " value " << s.flags.unbiased_value
          << (flags ? " all flags" : " flags missing") << "; ";
    }
    return {ok, false, d.str()};
}

Verdict direct_sum_scheme() {
    auto m = block_diagonal({{1, 1}, {2, 1}});
    auto s = build_direct_sum(m);
    Report v = verify_scheme(s);
    classify(s);
    const bool tight = s.outcomes() == m.dim() && s.flags.tight.value_or(false);
    const bool biased = !s.flags.unbiased.value_or(true);
    const double wp = std::abs(s.flags.witness_probability);
    const bool ok = v.ok() && tight && biased && wp < 1e-12;
    return {ok, false,
            std::to_string(s.outcomes()) + " outcomes (dim M = " + std::to_string(m.dim()) +
                "), unbiased " + (biased ? "false" : "true") + ", witness probability " +
                fmt(wp)};
}

Verdict unbiased_scheme() {
    std::vector<std::pair<std::string, PPBasis>> cases = {
        {"l2<M2", verified(diagonal_shift_basis(2))},
        {"l3<M3", verified(diagonal_shift_basis(3))},
        {"M2+M2<M4", verified(homogeneous_basis(2, 2))},
    };
    bool ok = true, rest_ok = true, bimodule_only = true;
    double locc = 0.0, ident = 0.0, weights = 0.0;
    std::string failures;
    for (auto &[name, b] : cases) {
        Tower t = build_tower(b.inc);
        auto lu = locc_unitaries(t, b);
        locc = std::max(locc, worst(lu.report));
        auto s = build_unbiased(t, b);
        ident = std::max(ident, teleportation_residual(s));
        const CMatrix target = identity(s.ctx->dim) / b.inc.index();
        for (const auto &w : outcome_weights(s))
            weights = std::max(weights, (w - target).norm());
        rest_ok = rest_ok && lu.report.ok();
        try {
            Report v = verify_scheme(s);
            ok = ok && v.ok();
        } catch (const SchemeError &e) {
            ok = false;
            failures += " " + name;
            bimodule_only = bimodule_only &&
                            std::string(e.what()).find("T_i is an A-bimodule map") !=
                                std::string::npos;
        }
    }
    rest_ok = rest_ok && locc < 1e-9 && ident < 1e-9 && weights < 1e-9;
    ok = ok && rest_ok;
    std::string d = "LOCC max residual " + fmt(locc) + ", identity residual " + fmt(ident) +
                    ", E(omega F_i) - 1/[M:N] " + fmt(weights);
    if (!failures.empty())
        d += "; verify_scheme rejects T_i = Ad(v_i) as not A-bimodular for" + failures +
             " (M_1 is not a factor, so Ad(v_i) moves Z(M_1) inside B)";
    return {ok, !ok && rest_ok && bimodule_only, d};
}

Verdict werner_round_trip() {
    auto t0 = Clock::now();
    struct Case {
        std::string name;
        PPBasis b;
        CMatrix u, z;
    };
    std::vector<Case> cases = {
        {"C<M2 Pauli u=1", verified(weyl_basis(2)), identity(2), identity(2)},
        {"C<M2 Pauli u=X", verified(weyl_basis(2)), pauli_x(), identity(2)},
        {"l2<M2 shifts u=X z=diag(1/2,3/2)", verified(diagonal_shift_basis(2)), pauli_x(),
         diag({0.5, 1.5})},
    };
    double ident = 0.0, trip = 0.0;
    bool ok = true;
    for (auto &c : cases) {
        auto s = build_werner_scheme(c.b.inc, c.b, c.u, c.z);
        Report v = verify_scheme(s);
        ident = std::max(ident, v.find("teleportation_identity")->residual);
        auto w = werner_extract(s);
        auto again = build_werner_scheme(c.b.inc, w.basis, w.u, w.z);
        double d = (again.omega - s.omega).norm();
        for (std::size_t i = 0; i < s.F.size(); ++i)
            d = std::max(d, (again.F[i] - s.F[i]).norm());
        // corrections compared as maps on the basis of B
        for (std::size_t i = 0; i < s.T.size(); ++i)
            for (const auto &x : s.ctx->B->basis)
                d = std::max(d, (again.T[i](x) - s.T[i](x)).norm());
        trip = std::max(trip, d);
        ok = ok && v.ok() && w.report.ok() && again.F.size() == s.F.size();
    }
    const double secs = seconds_since(t0);
    ok = ok && ident < 1e-9 && trip < 1e-8 && secs < 30.0;
    return {ok, false,
            "3 cases, identity residual " + fmt(ident) + ", round trip " + fmt(trip) + ", " +
                fmt(secs) + " s"};
}

Verdict lemma_oracles() {
    // scalar decomposition of the two-map family on l^inf_2
    auto a = share(diagonal_algebra(2));
    auto t1 = Superoperator::from_function(a, a, [](const CMatrix &x) {
        CMatrix y = CMatrix::Zero(2, 2);
        y(0, 0) = x(0, 0) / 2.0;
        return y;
    });
    auto t2 = Superoperator::from_function(a, a, [](const CMatrix &x) {
        CMatrix y = x;
        y(0, 0) = x(0, 0) / 2.0;
        return y;
    });
    RMatrix mu = scalar_decompose_cp_family({t1, t2});
    const double mu_err = std::max({std::abs(mu(0, 0) - 0.5), std::abs(mu(0, 1)),
                                    std::abs(mu(1, 0) - 0.5), std::abs(mu(1, 1) - 1.0)});

    // the same positive x_1 decomposed through two bases of M_2 over l^inf_2
    auto shifts = verified(diagonal_shift_basis(2));
    auto chars = verified(character_basis(2));
    Tower t = basic_construction(shifts.inc);
    Rng rng(21);
    auto rel1 = intersect(commutant(*t.n_rep), *t.m1);
    CMatrix y = random_element(*t.m1, rng);
    CMatrix x1 = rel1.project(y.adjoint() * y);
    x1 = (x1 + x1.adjoint()) / 2.0;
    x1 += (1.0 + std::abs(hermitian_eigendecomposition(x1).first(0))) * identity(t.gns.dim());
    auto c = choi_decomposition(t, x1, shifts, &chars);
    const double indep = c.report.find("basis_independence")->residual;

    // Markov restriction against n_j / m_j = n / dim N', computed here from the blocks
    std::vector<Inclusion> cases = {scalars_in(3), diagonal_inclusion(2), diagonal_inclusion(3),
                                    homogeneous_inclusion(2, 2),
                                    make_inclusion(share(block_diagonal({{1, 1}, {2, 1}})),
                                                   share(full_matrix_algebra(3)))};
    long agree = 0;
    for (const auto &inc : cases) {
        long dim_np = 0;
        for (const auto &b : inc.small->blocks)
            dim_np += b.m * b.m;
        bool expect = true;
        for (const auto &b : inc.small->blocks)
            expect = expect && b.n * dim_np == inc.big->ambient_dim * b.m;
        auto mr = markov_restriction_check(inc);
        if (mr.holds == expect && (!mr.holds || mr.consequence.ok()))
            ++agree;
    }
    const bool ok = mu_err < 1e-12 && c.report.ok() && indep < 1e-9 && agree == 5;
    return {ok, false,
            "mu error " + fmt(mu_err) + ", Choi basis independence " + fmt(indep) +
                ", Markov restriction " + std::to_string(agree) + "/5"};
}

Verdict chromatic_numbers() {
    auto tensor = make_inclusion(
        share(from_generators({kron(identity(2), pauli_x()), kron(identity(2), pauli_z())}, 4)),
        share(full_matrix_algebra(4)));
    struct Case {
        std::string name;
        Inclusion inc;
        long expect;
    };
    std::vector<Case> cases = {{"1(x)M2<M4", tensor, 4},       {"C<M2", scalars_in(2), 4},
                               {"C<M3", scalars_in(3), 9},     {"l2<M2", diagonal_inclusion(2), 2},
                               {"l3<M3", diagonal_inclusion(3), 3}};
    bool ok = true;
    double col = 0.0, sum = 0.0;
    std::ostringstream d;
    for (const auto &c : cases) {
        auto r = chromatic_bounds(c.inc);
        bool this_ok = r.tight() && r.lower == c.expect && !r.certificates.empty();
        for (const auto &rep : r.colouring_reports) {
            col = std::max(col, rep.find("colouring_condition")->residual);
            this_ok = this_ok && rep.ok();
        }
        for (const auto &cert : r.certificates) {
            sum = std::max(sum, cert.report.find("R_sum_is_index")->residual);
            this_ok = this_ok && cert.report.ok();
        }
        ok = ok && this_ok;
        d << c.name << " (" << r.lower << "," << (r.upper ? std::to_string(*r.upper) : "-")
          << ") ";
    }
    ok = ok && col < 1e-9 && sum < 1e-9;
    d << "colouring residual " << fmt(col) << ", sum R_a - [M:N] " << fmt(sum);
    return {ok, false, d.str()};
}

Verdict determinism(const std::string &cli, const std::string &specs) {
    long same = 0, total = 0;
    for (const auto &c : cli_suite()) {
        auto args = c.args;
        args.insert(args.begin(), {"--seed", "42"});
        auto a = run_cli(cli, args, specs);
        auto b = run_cli(cli, args, specs);
        ++total;
        if (a.exit_code == c.exit_code && !a.out.empty() && a.out == b.out)
            ++same;
    }
    return {same == total && total > 0, false,
            std::to_string(same) + "/" + std::to_string(total) +
                " invocations byte-identical with documented exit codes"};
}

} // namespace

int main(int argc, char **argv) {
    if (argc != 3) {
        std::cerr << "usage: acceptance <jtele binary> <specs directory>\n";
        return 2;
    }
    const std::string cli = argv[1], specs = argv[2];
    std::vector<std::function<Verdict()>> criteria = {
        tower_identities,  basis_suite,   standard_scheme,
        direct_sum_scheme, unbiased_scheme, werner_round_trip,
        lemma_oracles,     chromatic_numbers,
        [&] { return determinism(cli, specs); },
    };
    long passed = 0;
    bool unexpected = false;
    for (std::size_t k = 0; k < criteria.size(); ++k) {
        Verdict v;
        try {
            v = criteria[k]();
        } catch (const std::exception &e) {
            v = {false, false, std::string("exception: ") + e.what()};
        }
        passed += v.pass ? 1 : 0;
        unexpected = unexpected || (!v.pass && !v.known);
        std::cout << "criterion " << (k + 1) << ": " << (v.pass ? "PASS" : "FAIL") << "  "
                  << v.detail << (v.known ? " [documented obstruction]" : "") << "\n";
    }
    std::cout << passed << "/" << criteria.size() << " criteria pass"
              << (unexpected ? ", with unexpected failures" : "") << "\n";
    return unexpected ? 1 : 0;
}
