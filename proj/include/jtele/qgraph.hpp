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

#pragma once

#include <cmath>
#include <memory>
#include <numeric>
#include <optional>
#include <string>

#include "pp_basis.hpp"

namespace jtele {

/// Which of the two graphs attached to N in M a QuantumGraph is.
enum class GraphKind {
    FactorSide, ///< (N', M, B(H))
    BasisSide,  ///< (M, N', B(H))
};

inline std::string graph_label(GraphKind k) {
    return k == GraphKind::FactorSide ? "(N', M)" : "(M, N')";
}

/**
 * @brief Quantum graph (S, A, B(H)): an operator system S that is an
 * A'-bimodule. The commutant A' is carried along since every check needs it.
 */
struct QuantumGraph {
    Subspace S;
    AlgebraRef M;         ///< the von Neumann algebra A of the triple
    AlgebraRef commutant; ///< A'
    long ambient_dim = 0;
    GraphKind kind = GraphKind::FactorSide;
    std::optional<Inclusion> inc;        ///< inclusion the graph came from
    std::shared_ptr<const Tower> tower;  ///< set for graphs on L^2(M)
    std::vector<CMatrix> pp_unitaries;   ///< pi(u_i) for graphs on L^2(M)
};

/// Unit, adjoint closure and the A'-bimodule property on spanning triples.
inline Report verify_graph(const QuantumGraph &g, const Tolerance &tol = {}) {
    Report r;
    const double b = tol.abs + tol.rel * std::sqrt(double(g.ambient_dim));
    r.add("unit_in_S", g.S.distance(identity(g.ambient_dim)), b);
    double adj = 0.0, bim = 0.0;
    const auto elems = g.S.elements();
    for (const auto &x : elems) {
        adj = std::max(adj, g.S.distance(x.adjoint()));
        for (const auto &a : g.commutant->basis)
            for (const auto &c : g.commutant->basis)
                bim = std::max(bim, g.S.distance(a * x * c));
    }
    r.add("adjoint_closed", adj, b);
    r.add("commutant_bimodule", bim, b);
    return r;
}

/**
 * @brief The pair (M, N', B(H)) and (N', M, B(H)) attached to N in M, in that
 * order.
 */
inline std::pair<QuantumGraph, QuantumGraph> graph_from_inclusion(const Inclusion &inc) {
    const long n = inc.big->ambient_dim;
    auto n_comm = share(commutant_structured(*inc.small));
    auto m_comm = share(commutant_structured(*inc.big));
    QuantumGraph a;
    a.S = as_subspace(*inc.big);
    a.M = n_comm;
    a.commutant = inc.small;
    a.ambient_dim = n;
    a.kind = GraphKind::BasisSide;
    a.inc = inc;
    QuantumGraph f;
    f.S = as_subspace(*n_comm);
    f.M = inc.big;
    f.commutant = m_comm;
    f.ambient_dim = n;
    f.kind = GraphKind::FactorSide;
    f.inc = inc;
    for (const auto *g : {&a, &f})
        if (!verify_graph(*g, Tolerance{1e-8, 1e-8}).ok())
            throw InternalError("graph_from_inclusion: bimodule invariants failed");
    return {a, f};
}

/**
 * @brief The graph (pi(M), pi(N)', B(L^2(M))) of a tower, with the
 * represented basis unitaries kept for the certificate.
 */
inline QuantumGraph graph_from_tower(const Tower &t, const PPBasis &b) {
    detail::require_flags(b, true);
    QuantumGraph g;
    g.S = as_subspace(*t.m_rep);
    g.M = t.n_commutant;
    g.commutant = t.n_rep;
    g.ambient_dim = t.gns.dim();
    g.kind = GraphKind::BasisSide;
    g.inc = t.inc;
    g.tower = std::make_shared<const Tower>(t);
    for (const auto &u : b.elements)
        g.pp_unitaries.push_back(t.pi(u));
    return g;
}

/// S cap (A')^perp for the trace inner product, as an orthonormal frame.
inline Subspace traceless_part(const QuantumGraph &g, const Tolerance &tol = {}) {
    Subspace out;
    out.ambient_dim = g.ambient_dim;
    const CMatrix &fs = g.S.frame;
    if (fs.cols() == 0) {
        out.frame = fs;
        return out;
    }
    CMatrix overlap = g.commutant->frame().adjoint() * fs;
    out.frame = fs * nullspace_matrix(overlap, tol);
    return out;
}

/// A PVM {P_a} in A (x) L with L = M_l carrying its normalised trace.
struct Colouring {
    AlgebraRef L;
    long c = 0;
    std::vector<CMatrix> P;
};

/**
 * @brief PVM and membership checks, then the colouring condition
 * max ||P_a (x (x) 1_L) P_a|| over a basis of the traceless part.
 */
inline Report verify_colouring(const QuantumGraph &g, const Colouring &col,
                               const Tolerance &tol = {}) {
    const long l = col.L->ambient_dim;
    const long D = g.ambient_dim * l;
    if (col.c != long(col.P.size()) || col.c < 1)
        throw ColouringError("colouring: count does not match the family");
    const Tolerance loose{1e-8, 1e-8};
    CMatrix sum = CMatrix::Zero(D, D);
    for (long a = 0; a < col.c; ++a) {
        const CMatrix &p = col.P[a];
        if (p.rows() != D || p.cols() != D)
            throw ColouringError("colouring: P_a has the wrong size");
        if (!is_projection(p, loose))
            throw ColouringError("colouring: P_" + std::to_string(a) +
                                 " is not a projection");
        for (long b = a + 1; b < col.c; ++b)
            if ((p * col.P[b]).norm() > 1e-8 * std::sqrt(double(D)))
                throw ColouringError("colouring: P_a are not mutually orthogonal");
        sum += p;
    }
    if ((sum - identity(D)).norm() > 1e-8 * std::sqrt(double(D)))
        throw ColouringError("colouring: P_a do not sum to 1");
    const auto joint = tensor_product(*g.M, *col.L);
    for (const auto &p : col.P)
        if (!joint.contains(p, loose))
            throw ColouringError("colouring: P_a is not in A (x) L");

    Report r;
    r.add_flag("pvm", true);
    r.add_flag("membership", true);
    const double b = tol.abs + tol.rel * std::sqrt(double(D));
    double worst = 0.0;
    const CMatrix one = identity(l);
    for (const auto &x : traceless_part(g, tol).elements()) {
        CMatrix xl = kron(x, one);
        for (const auto &p : col.P)
            worst = std::max(worst, (p * xl * p).norm());
    }
    r.add("colouring_condition", worst, b);
    return r;
}

namespace detail {

/**
 * @brief Coordinates for a factor N = M_d in M. Block j of M is
 * M_{l_j} (x) M_d (x) 1_{m_j} on the range of v[j], with N sitting as
 * 1 (x) M_d (x) 1.
 */
struct FactorFrame {
    long d = 0;
    long l = 1; ///< lcm of the l_j
    std::vector<long> lj, mj;
    std::vector<CMatrix> v; ///< isometries C^{l_j d m_j} -> H
};

inline FactorFrame factor_frame(const Inclusion &inc, const Tolerance &tol = {}) {
    const auto &n_alg = *inc.small;
    const auto &m_alg = *inc.big;
    if (n_alg.num_blocks() != 1)
        throw PreconditionError("colouring_factor_case: N is not a factor");
    FactorFrame f;
    f.d = n_alg.blocks[0].n;
    for (long j = 0; j < m_alg.num_blocks(); ++j) {
        const long k = m_alg.blocks[j].n, m = m_alg.blocks[j].m;
        if (k % f.d != 0)
            throw InternalError("factor_frame: block size not a multiple of d");
        const long lj = k / f.d;
        std::vector<CMatrix> e(f.d);
        for (long p = 0; p < f.d; ++p)
            e[p] = m_alg.block_compress(j, n_alg.matrix_unit(0, p, 0));
        CMatrix g = range_basis(e[0], tol);
        if (g.cols() != lj)
            throw InternalError("factor_frame: unexpected multiplicity of N");
        CMatrix w(k, k);
        for (long s = 0; s < lj; ++s)
            for (long p = 0; p < f.d; ++p)
                w.col(s * f.d + p) = e[p] * g.col(s);
        f.lj.push_back(lj);
        f.mj.push_back(m);
        f.l = std::lcm(f.l, lj);
        f.v.push_back(m_alg.adapted.middleCols(m_alg.offsets[j], k * m) *
                      kron(w, identity(m)));
    }
    return f;
}

inline CMatrix max_entangled_projection(long n) {
    CVector psi = CVector::Zero(n * n);
    for (long i = 0; i < n; ++i)
        psi(i * n + i) = 1.0 / std::sqrt(double(n));
    return psi * psi.adjoint();
}

inline long concluded_bound(double index) {
    return std::max(1L, long(std::ceil(index - 1e-6)));
}

} // namespace detail

/**
 * @brief Colouring of (N', M, B(H)) for a factor N with c = [M:N] colours
 * and L = M_l, l = lcm(l_j).
 *
 * On block j the colours are the Bell projections (u_i* (x) 1) e_j (u_i (x) 1)
 * for the Weyl unitaries u_i of C^{l_j}. The second tensor leg is moved past
 * the M_d leg and placed in L through y -> 1_{l/l_j} (x) y.
 */
inline Colouring colouring_factor_case(const Inclusion &inc, const Tolerance &tol = {}) {
    const auto f = detail::factor_frame(inc, tol);
    Colouring col;
    col.L = share(full_matrix_algebra(f.l));
    for (std::size_t j = 0; j < f.v.size(); ++j) {
        const long lj = f.lj[j], mj = f.mj[j], r = f.l / lj;
        const CMatrix e = detail::max_entangled_projection(lj);
        // legs (l_j, l_j', d, m_j, r) -> (l_j, d, m_j, r, l_j')
        const CMatrix sw = leg_permutation({lj, lj, f.d, mj, r}, {0, 2, 3, 4, 1});
        const CMatrix lift = kron(f.v[j], identity(f.l));
        for (long a = 0; a < lj; ++a)
            for (long k = 0; k < lj; ++k) {
                CMatrix u = kron(weyl(lj, k, a), identity(lj));
                CMatrix q = u.adjoint() * e * u;
                CMatrix y = sw * kron(q, identity(f.d * mj * r)) * sw.adjoint();
                col.P.push_back(lift * y * lift.adjoint());
            }
    }
    col.c = long(col.P.size());
    if (std::abs(double(col.c) - inc.index()) > 1e-6)
        throw InternalError("colouring_factor_case: colour count differs from the index");
    return col;
}

/**
 * @brief Colouring P_i = pi(u_i)* e_N pi(u_i) of (M, N', B(L^2(M))) with
 * L = C, for a normaliser basis.
 */
inline Colouring colouring_from_basis(const Tower &t, const PPBasis &b) {
    detail::require_flags(b, true);
    Colouring col;
    col.L = share(scalars(1));
    for (const auto &u : b.elements) {
        CMatrix pu = t.pi(u);
        col.P.push_back(pu.adjoint() * t.e_N * pu);
    }
    col.c = long(col.P.size());
    return col;
}

/// The R_a family, its checks and the bound c >= [M:N] it proves.
struct Certificate {
    std::string graph;
    double index = 0.0;
    long colours = 0;
    long bound = 0;
    std::vector<CMatrix> R;
    Report report;
};

/**
 * @brief Lower bound c >= [M:N] from R_a = [M:N] (E (x) id_L)(P_a), where E is
 * the trace-preserving expectation onto S'.
 *
 * On (N', M) the expectation is E_N and it is cross-checked against the
 * block formula l_j^2 (tau_{l_j} (x) tau_{m_j} (x) id)(z_j P_a). On
 * (M, N') over L^2(M) it is sum_i u_i* (.) u_i, cross-checked against
 * J E_M(J . J) J read off the tower.
 */
inline Certificate lower_bound_certificate(const QuantumGraph &g, const Colouring &col,
                                           const Tolerance &tol = {}) {
    if (!g.inc)
        throw PreconditionError("lower_bound_certificate: graph has no inclusion");
    const Inclusion &inc = *g.inc;
    if (!inc.markov(tol))
        throw PreconditionError("lower_bound_certificate: trace must be the Markov trace");
    Certificate cert;
    cert.graph = graph_label(g.kind);
    cert.index = inc.index();
    cert.colours = col.c;
    const long h = g.ambient_dim, l = col.L->ambient_dim, D = h * l;
    const double b = tol.abs + tol.rel * std::sqrt(double(D));
    double cross = 0.0;

    if (g.kind == GraphKind::FactorSide) {
        const auto f = detail::factor_frame(inc, tol);
        if (l % f.l != 0)
            throw PreconditionError("lower_bound_certificate: L is not a multiple of lcm(l_j)");
        for (const auto &p : col.P) {
            CMatrix r = CMatrix::Zero(D, D);
            for (const auto &c : inc.small_tau_basis)
                r += kron(c, partial_trace(kron(inc.tau.density * c, identity(l)) * p,
                                           {h, l}, {1}, false));
            r *= cert.index;
            // block formula, lifted back through the same frame
            CMatrix rb = CMatrix::Zero(D, D);
            CMatrix rd = CMatrix::Zero(f.d * l, f.d * l);
            for (std::size_t j = 0; j < f.v.size(); ++j) {
                const long lj = f.lj[j], mj = f.mj[j];
                CMatrix lift = kron(f.v[j], identity(l));
                CMatrix y = lift.adjoint() * p * lift;
                rd += double(lj * lj) *
                      partial_trace(y, {lj, f.d, mj, l}, {1, 3}, true);
            }
            for (std::size_t j = 0; j < f.v.size(); ++j) {
                const long lj = f.lj[j], mj = f.mj[j];
                CMatrix lift = kron(f.v[j], identity(l));
                const CMatrix sw = leg_permutation({lj, mj, f.d, l}, {0, 2, 1, 3});
                CMatrix y = sw * kron(identity(lj * mj), rd) * sw.adjoint();
                rb += lift * y * lift.adjoint();
            }
            cross = std::max(cross, (r - rb).norm());
            cert.R.push_back(r);
        }
        cert.report.add("expectation_route_crosscheck", cross, b);
    } else {
        if (!g.tower || g.pp_unitaries.empty())
            throw PreconditionError("lower_bound_certificate: graph lacks the tower and basis");
        if (l != 1)
            throw PreconditionError("lower_bound_certificate: expected L = C on (M, N')");
        for (const auto &p : col.P) {
            CMatrix r = CMatrix::Zero(D, D);
            for (const auto &u : g.pp_unitaries)
                r += u.adjoint() * p * u;
            CMatrix rt = cert.index * g.tower->expect_m(p.conjugate()).conjugate();
            cross = std::max(cross, (r - rt).norm());
            cert.R.push_back(r);
        }
        cert.report.add("expectation_route_crosscheck", cross, b);
    }

    double proj = 0.0;
    CMatrix sum = CMatrix::Zero(D, D);
    for (const auto &r : cert.R) {
        proj = std::max(proj, std::max((r * r - r).norm(), (r - r.adjoint()).norm()));
        sum += r;
    }
    if (proj > std::max(b, 1e-7))
        throw CertificateError("lower_bound_certificate: R_a is not a projection, residual " +
                               std::to_string(proj));
    cert.report.add("R_projection", proj, b);
    cert.report.add("R_sum_is_index", (sum - cert.index * identity(D)).norm(), b);
    cert.bound = detail::concluded_bound(cert.index);
    cert.report.add_flag("count_dominates_index", double(col.c) >= cert.index - 1e-6);
    return cert;
}

struct ChromaticBounds {
    std::string graph;
    long lower = 1;
    std::optional<long> upper;
    std::vector<Report> colouring_reports;
    std::vector<Certificate> certificates;
    std::vector<std::string> warnings;

    bool tight() const { return upper && *upper == lower; }
};

/**
 * @brief Bounds on the quantum chromatic number from the two covered cases:
 * N a factor gives (N', M), a homogeneous multiplicity-free N in M_n gives
 * (M, N') through its normaliser basis. Anything else yields the trivial
 * lower bound and a warning.
 */
inline ChromaticBounds chromatic_bounds(const Inclusion &inc, const Tolerance &tol = {}) {
    ChromaticBounds out;
    if (!inc.connected()) {
        out.warnings.push_back("inclusion is not connected; the index is undefined");
        return out;
    }
    auto fold = [&](const QuantumGraph &g, const Colouring &col) {
        out.graph = graph_label(g.kind);
        auto rep = verify_colouring(g, col, tol);
        out.colouring_reports.push_back(rep);
        if (rep.ok())
            out.upper = col.c;
        else
            out.warnings.push_back("constructed colouring failed verification");
        try {
            auto cert = lower_bound_certificate(g, col, tol);
            if (cert.report.ok())
                out.lower = std::max(out.lower, cert.bound);
            else
                out.warnings.push_back("certificate checks failed");
            out.certificates.push_back(std::move(cert));
        } catch (const CertificateError &e) {
            out.warnings.push_back(e.what());
        }
    };
    if (inc.small->num_blocks() == 1) {
        auto graphs = graph_from_inclusion(inc);
        fold(graphs.second, colouring_factor_case(inc, tol));
        return out;
    }
    std::optional<PPBasis> basis;
    try {
        auto h = homogeneity_test(inc, tol);
        basis = h.witness;
    } catch (const PreconditionError &) {
    }
    if (basis) {
        Tower t = basic_construction(inc, tol);
        fold(graph_from_tower(t, *basis), colouring_from_basis(t, *basis));
        return out;
    }
    out.warnings.push_back("neither N a factor nor a normaliser basis is available; "
                           "no colouring constructed");
    return out;
}

} // namespace jtele
