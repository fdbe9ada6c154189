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

#include "inclusion.hpp"
#include "report.hpp"

namespace jtele {

/**
 * @brief L^2(M, tau) in the coordinates of a tau-orthonormal self-adjoint
 * basis {b_k} of M.
 *
 * Lambda(x)_k = tau(b_k x), pi(x)_{kl} = tau(b_k x b_l) and
 * pi_r(x)_{kl} = tau(b_k b_l x). With a self-adjoint basis the modular
 * conjugation J is entrywise complex conjugation, so J A J = conj(A).
 */
struct GnsSpace {
    long ambient_dim = 0;
    TraceFunctional tau;
    std::vector<CMatrix> basis;
    CMatrix lhs; ///< row k is vec((D b_k)^T)^T, so tau(b_k y) = lhs.row(k) vec(y)

    long dim() const { return static_cast<long>(basis.size()); }

    CVector lambda(const CMatrix &x) const { return lhs * vec(x); }

    CMatrix element(const CVector &v) const {
        CMatrix out = CMatrix::Zero(ambient_dim, ambient_dim);
        for (long k = 0; k < dim(); ++k)
            out += v(k) * basis[k];
        return out;
    }

    CMatrix pi_left(const CMatrix &x) const {
        CMatrix y(ambient_dim * ambient_dim, dim());
        for (long l = 0; l < dim(); ++l)
            y.col(l) = vec(CMatrix(x * basis[l]));
        return lhs * y;
    }

    CMatrix pi_right(const CMatrix &x) const {
        CMatrix y(ambient_dim * ambient_dim, dim());
        for (long l = 0; l < dim(); ++l)
            y.col(l) = vec(CMatrix(basis[l] * x));
        return lhs * y;
    }

    CVector unit_vector() const { return lambda(identity(ambient_dim)); }

    /// Modular conjugation applied to an operator: J A J.
    static CMatrix J(const CMatrix &a) { return a.conjugate(); }
};

inline GnsSpace build_gns(const FinDimAlgebra &m, const TraceFunctional &tau,
                          const Tolerance &tol = {}) {
    if (!tau.faithful())
        throw TraceError("build_gns: trace is not faithful");
    GnsSpace g;
    g.ambient_dim = m.ambient_dim;
    g.tau = tau;
    g.basis = tau_orthonormal_basis(m, tau, tol);
    if (g.dim() != m.dim())
        throw TraceError("build_gns: trace degenerate on the algebra");
    const long n = m.ambient_dim;
    g.lhs.resize(g.dim(), n * n);
    for (long k = 0; k < g.dim(); ++k) {
        CMatrix a = (tau.density * g.basis[k]).transpose();
        g.lhs.row(k) = vec(a).transpose();
    }
    return g;
}

/// Projection onto the span of a family of vectors.
inline CMatrix span_projection(const std::vector<CVector> &vs,
                               const Tolerance &tol = {}) {
    if (vs.empty())
        return CMatrix(0, 0);
    CMatrix cols(vs[0].size(), long(vs.size()));
    for (std::size_t k = 0; k < vs.size(); ++k)
        cols.col(long(k)) = vs[k];
    // orthonormal basis of the column space via SVD
    Eigen::BDCSVD<CMatrix> svd(cols, Eigen::ComputeThinU);
    const auto &s = svd.singularValues();
    long r = 0;
    for (long i = 0; i < s.size(); ++i)
        if (s(i) > tol.abs + 1e-9 * s(0))
            ++r;
    CMatrix q = svd.matrixU().leftCols(r);
    return q * q.adjoint();
}

/**
 * @brief Jones tower N in M in M_1 in M_2 for a Markov inclusion.
 *
 * Level one lives on L^2(M, tau) and level two on L^2(M_1, tau_1), whose
 * dimension is dim M_1. The algebra M_2 is kept implicit: membership is
 * tested through M_2 = J_1 M' J_1, and its trace through its central data.
 */
struct Tower {
    Inclusion inc;
    double index_value = 0.0;
    GnsSpace gns;
    AlgebraRef m_rep; ///< pi(M)
    AlgebraRef n_rep; ///< pi(N)
    CMatrix e_N;
    AlgebraRef n_commutant; ///< N' in B(L^2(M))
    AlgebraRef m1;          ///< J N' J
    TraceFunctional tr1;
    TraceFunctional tau1;
    double tr1_residual = 0.0;
    double tr1_crosscheck = 0.0;
    AlgebraRef relative; ///< N' cap M, in the ambient of M
    std::vector<CMatrix> m_rep_tau1_basis;

    bool two_levels = false;
    GnsSpace gns1;
    CMatrix e_M;
    TraceFunctional tau2;
    IntMatrix lambda_m1_m2;
    std::vector<CMatrix> pi1_m; ///< pi_1 of the basis of pi(M)
    CMatrix e_N1;               ///< pi_1(e_N)

    CMatrix pi(const CMatrix &x) const { return gns.pi_left(x); }
    CMatrix pi_r(const CMatrix &x) const { return gns.pi_right(x); }

    /// gamma_0(x) = J pi(x)* J.
    CMatrix gamma0(const CMatrix &x) const { return pi(x).adjoint().conjugate(); }

    /// Element of M represented by y in pi(M).
    CMatrix from_rep(const CMatrix &y) const {
        return gns.element(y * gns.unit_vector());
    }

    /// tau_1-preserving conditional expectation M_1 -> M (output in pi(M)).
    CMatrix expect_m(const CMatrix &y) const {
        CMatrix out = CMatrix::Zero(y.rows(), y.cols());
        for (const auto &c : m_rep_tau1_basis)
            out += tau1(c * y) * c;
        return out;
    }

    /// Level-two representation of y in M_1.
    CMatrix pi1(const CMatrix &y) const {
        require_two_levels();
        return gns1.pi_left(y);
    }

    CMatrix gamma1(const CMatrix &y) const {
        return pi1(y).adjoint().conjugate();
    }

    /// Canonical shift Gamma = gamma_1 o gamma_0 on N' cap M.
    CMatrix shift(const CMatrix &x) const { return gamma1(gamma0(x)); }

    /// Largest commutator of J_1 y J_1 with pi_1(M); zero iff y is in M_2.
    double m2_defect(const CMatrix &y) const {
        require_two_levels();
        CMatrix jy = y.conjugate();
        double worst = 0.0;
        for (const auto &p : pi1_m) {
            worst = std::max(worst, (jy * p - p * jy).norm());
        }
        return worst;
    }

    void require_two_levels() const {
        if (!two_levels)
            throw PreconditionError("tower has only one level");
    }
};

/// Projection onto Lambda(N) in L^2(M).
inline CMatrix jones_projection(const GnsSpace &gns, const FinDimAlgebra &n,
                                const Tolerance &tol = {}) {
    std::vector<CVector> vs;
    for (const auto &c : n.basis)
        vs.push_back(gns.lambda(c));
    return span_projection(vs, tol);
}

inline Tower basic_construction(const Inclusion &inc, const Tolerance &tol = {}) {
    Tower t;
    t.inc = inc;
    t.index_value = inc.index();
    t.gns = build_gns(*inc.big, inc.tau, tol);
    const long d = t.gns.dim();

    std::vector<CMatrix> pm, pn;
    for (const auto &b : inc.big->basis)
        pm.push_back(t.pi(b));
    for (const auto &b : inc.small->basis)
        pn.push_back(t.pi(b));
    t.m_rep = share(from_generators(pm, d, tol));
    t.n_rep = share(from_generators(pn, d, tol));
    t.e_N = jones_projection(t.gns, *inc.small, tol);
    t.n_commutant = share(commutant_structured(*t.n_rep));
    t.m1 = share(conjugate(*t.n_commutant, tol));

    // tr_1 from tr_1(b_k e_N b_l) = tau(b_k b_l) = delta_kl
    const auto &m1 = *t.m1;
    const long nb = m1.num_blocks();
    std::vector<CMatrix> p(d);
    for (long k = 0; k < d; ++k)
        p[k] = t.pi(t.gns.basis[k]);
    RMatrix G(2 * d * d, nb);
    RVector rhs = RVector::Zero(2 * d * d);
    for (long k = 0; k < d; ++k) {
        CMatrix left = p[k] * t.e_N;
        for (long l = 0; l < d; ++l) {
            CMatrix prod = left * p[l];
            long row = 2 * (k * d + l);
            for (long j = 0; j < nb; ++j) {
                cplx v = trace_product(m1.min_central_projections[j], prod) /
                         double(m1.blocks[j].m);
                G(row, j) = v.real();
                G(row + 1, j) = v.imag();
            }
            rhs(row) = (k == l) ? 1.0 : 0.0;
        }
    }
    RVector w = G.colPivHouseholderQr().solve(rhs);
    t.tr1_residual = (G * w - rhs).cwiseAbs().maxCoeff();
    if (!tol.accepts(t.tr1_residual, 1.0))
        throw MarkovError("tr_1 has no consistent extension");
    std::vector<double> wv(w.data(), w.data() + w.size());
    t.tr1 = TraceFunctional::on(m1, wv);
    const double total = t.tr1.unit_value();
    for (auto &x : wv)
        x /= total;
    t.tau1 = TraceFunctional::on(m1, wv);
    if (!t.tau1.faithful())
        throw MarkovError("tr_1 is not faithful");
    double markov = 0.0;
    for (long k = 0; k < d; ++k)
        markov = std::max(markov, std::abs(t.tau1(p[k]) - inc.tau(t.gns.basis[k])));
    if (!tol.accepts(markov, 1.0))
        throw MarkovError("tau_1 does not restrict to tau on M");
    auto mt = markov_trace(*t.m_rep, m1);
    for (long j = 0; j < nb; ++j)
        t.tr1_crosscheck = std::max(t.tr1_crosscheck,
                                    std::abs(mt.weights[j] - t.tau1.weights[j]));

    t.m_rep_tau1_basis = hs_gram_schmidt(t.m_rep->basis, t.tau1.inner(), tol);
    t.relative = share(intersect(commutant(*inc.small, tol), *inc.big, tol));
    return t;
}

inline Tower iterate(Tower t, const Tolerance &tol = {}) {
    t.gns1 = build_gns(*t.m1, t.tau1, tol);
    t.two_levels = true;

    std::vector<CVector> vs;
    for (const auto &b : t.m_rep->basis)
        vs.push_back(t.gns1.lambda(b));
    t.e_M = span_projection(vs, tol);
    for (const auto &b : t.m_rep->basis)
        t.pi1_m.push_back(t.pi1(b));
    t.e_N1 = t.pi1(t.e_N);

    // M_2 = J_1 pi_1(M)' J_1: central projections J_1 pi_1(z_k) J_1, block
    // size = multiplicity of M's block in L^2(M_1), multiplicity = n_k.
    const auto &m = *t.m_rep;
    std::vector<CMatrix> z2;
    std::vector<Block> blocks2;
    for (long k = 0; k < m.num_blocks(); ++k) {
        CMatrix zk = t.pi1(m.min_central_projections[k]).conjugate();
        double rank = zk.trace().real();
        long size = std::lround(rank / double(m.blocks[k].n));
        z2.push_back(zk);
        blocks2.push_back({size, m.blocks[k].n});
    }
    const auto &m1 = *t.m1;
    t.lambda_m1_m2.resize(long(z2.size()), m1.num_blocks());
    for (long j = 0; j < m1.num_blocks(); ++j) {
        CMatrix pj = t.pi1(m1.matrix_unit(j, 0, 0));
        for (std::size_t k = 0; k < z2.size(); ++k) {
            double r = trace_product(z2[k], pj).real() / double(blocks2[k].m);
            long ri = std::lround(r);
            if (std::abs(r - double(ri)) > 1e-6)
                throw StructureError("level-two inclusion matrix not integral");
            t.lambda_m1_m2(long(k), j) = ri;
        }
    }
    t.tau2 = TraceFunctional::make(markov_weights(t.lambda_m1_m2, blocks2), z2,
                                   blocks2);
    return t;
}

inline Tower build_tower(const Inclusion &inc, const Tolerance &tol = {}) {
    return iterate(basic_construction(inc, tol), tol);
}

/// M_2 as J_1 M' J_1 (structured commutant); for small towers only.
inline FinDimAlgebra m2_by_commutant(const Tower &t, const Tolerance &tol = {}) {
    t.require_two_levels();
    auto rep = from_generators(t.pi1_m, t.gns1.dim(), tol);
    return conjugate(commutant_structured(rep), tol);
}

/// M_2 as the algebra generated by M_1 and e_M.
inline FinDimAlgebra m2_by_closure(const Tower &t, const Tolerance &tol = {}) {
    t.require_two_levels();
    std::vector<CMatrix> gens{t.e_M};
    for (const auto &b : t.m1->basis)
        gens.push_back(t.pi1(b));
    return from_generators(gens, t.gns1.dim(), tol);
}

namespace detail {

inline double bound(const Tolerance &tol, double scale) {
    return tol.abs + tol.rel * scale;
}

} // namespace detail

/// The standard identities of the tower as residual checks.
inline Report verify_tower(const Tower &t, const Tolerance &tol = {},
                           std::uint64_t seed = 42) {
    Report r;
    Rng rng(seed);
    const auto &inc = t.inc;
    const long d = t.gns.dim();
    const double b = detail::bound(tol, std::sqrt(double(d)));

    double f1 = 0.0;
    for (const auto &x : inc.big->basis)
        f1 = std::max(f1, (t.e_N * t.pi(x) * t.e_N - t.pi(inc.expect(x)) * t.e_N).norm());
    r.add("jones_compression", f1, b);

    double f2 = 0.0;
    for (int trial = 0; trial < 10; ++trial) {
        CMatrix a = random_element(*inc.small, rng), c = random_element(*inc.small, rng);
        CMatrix x = random_element(*inc.big, rng);
        double s = std::max(1.0, a.norm() * c.norm() * x.norm());
        f2 = std::max(f2, (inc.expect(a * x * c) - a * inc.expect(x) * c).norm() / s);
    }
    r.add("expectation_bimodule", f2, b);

    double f3 = 0.0;
    for (const auto &c : inc.small->basis) {
        CMatrix pc = t.pi(c);
        f3 = std::max(f3, (pc * t.e_N - t.e_N * pc).norm());
    }
    r.add("jones_in_commutant", f3, b);
    r.add("jones_commutes_with_J", (t.e_N.conjugate() - t.e_N).norm(), b);

    std::vector<CMatrix> span;
    std::vector<CMatrix> p;
    for (const auto &x : t.gns.basis)
        p.push_back(t.pi(x));
    for (const auto &x : p)
        for (const auto &y : p)
            span.push_back(x * t.e_N * y);
    for (const auto &x : p)
        span.push_back(x);
    auto sp = Subspace::span_of(span, d, tol);
    r.add("m1_equals_JNprimeJ",
          span_distance(sp.frame, t.m1->frame()), b);
    r.add("tr1_defining_relation", t.tr1_residual, b);
    r.add("tr1_block_weight_crosscheck", t.tr1_crosscheck, b);

    double mk = 0.0;
    for (std::size_t k = 0; k < p.size(); ++k)
        mk = std::max(mk, std::abs(t.tau1(p[k]) - inc.tau(t.gns.basis[k])));
    r.add("markov_restriction", mk, b);
    r.add("markov_expectation",
          (t.expect_m(t.e_N) - identity(d) / t.index_value).norm(), b);

    double lm = lambda_norm_sq(inclusion_matrix(*t.m_rep, *t.m1));
    long li = std::lround(lm), ni = std::lround(t.index_value);
    r.add_flag("index_m1_over_m_equals_index",
               li == ni && std::abs(lm - double(li)) < 1e-9 &&
                   std::abs(t.index_value - double(ni)) < 1e-9,
               std::abs(lm - t.index_value));

    double g0 = 0.0;
    for (const auto &x : t.relative->basis) {
        CMatrix g = t.gamma0(x);
        g0 = std::max(g0, t.m1->distance(g));
        for (const auto &y : p)
            g0 = std::max(g0, (g * y - y * g).norm());
    }
    r.add("gamma0_lands_in_relative_commutant", g0, b);

    if (t.two_levels) {
        const long d1 = t.gns1.dim();
        const double b1 = detail::bound(tol, std::sqrt(double(d1)));
        const CMatrix &en = t.e_N1;
        r.add("tl_eN_eM_eN", (en * t.e_M * en - en / t.index_value).norm(), b1);
        r.add("tl_eM_eN_eM", (t.e_M * en * t.e_M - t.e_M / t.index_value).norm(), b1);
        r.add("e_M_in_M2", t.m2_defect(t.e_M), b1);
        double lm2 = lambda_norm_sq(t.lambda_m1_m2);
        r.add("index_m2_over_m1_equals_index", std::abs(lm2 - t.index_value), b1);

        double tau2 = 0.0;
        for (const auto &y : t.m1->basis)
            tau2 = std::max(tau2, std::abs(t.tau2(t.pi1(y)) - t.tau1(y)));
        for (int trial = 0; trial < 5; ++trial) {
            CMatrix x = random_element(*t.m1, rng), y = random_element(*t.m1, rng);
            cplx lhs = t.tau2(t.pi1(x) * t.e_M * t.pi1(y));
            cplx rhs = t.tau1(x * y) / t.index_value;
            tau2 = std::max(tau2, std::abs(lhs - rhs) / std::max(1.0, x.norm() * y.norm()));
        }
        r.add("tau2_markov_extension", tau2, b1);

        double mult = 0.0, adj = 0.0, comm = 0.0, inm2 = 0.0;
        const auto &rel = t.relative->basis;
        for (const auto &x : rel) {
            CMatrix gx = t.shift(x);
            adj = std::max(adj, (t.shift(CMatrix(x.adjoint())) - gx.adjoint()).norm());
            for (const auto &y : rel)
                mult = std::max(mult, (t.shift(CMatrix(x * y)) - gx * t.shift(y)).norm());
            // M_1 is generated by M and e_N
            for (const auto &py : t.pi1_m)
                comm = std::max(comm, (gx * py - py * gx).norm());
            comm = std::max(comm, (gx * en - en * gx).norm());
            inm2 = std::max(inm2, t.m2_defect(gx));
        }
        r.add("shift_multiplicative", mult, b1);
        r.add("shift_adjoint", adj, b1);
        r.add("shift_unital",
              (t.shift(identity(inc.big->ambient_dim)) - identity(d1)).norm(), b1);
        r.add("shift_commutes_with_M1", comm, b1);
        r.add("shift_lands_in_M2", inm2, b1);
        std::vector<CMatrix> images;
        for (const auto &x : rel)
            images.push_back(t.shift(x));
        long rank = Subspace::span_of(images, d1, tol).dim();
        r.add_flag("shift_injective", rank == long(rel.size()));
    }
    return r;
}

/// Unit vector in L^2(N) drawn from a seeded generator.
inline CVector random_unit_in_jones_range(const Tower &t, Rng &rng) {
    CVector v(t.gns.dim());
    for (long k = 0; k < v.size(); ++k)
        v(k) = rng.complex_normal();
    CVector w = t.e_N * v;
    return w / w.norm();
}

/// Correlation identities between the two legs of the tower.
inline Report verify_epr(const Tower &t, const Tolerance &tol = {},
                         std::uint64_t seed = 42) {
    t.require_two_levels();
    Report r;
    Rng rng(seed);
    const double b = detail::bound(tol, std::sqrt(double(t.gns.dim())));
    const double b1 = detail::bound(tol, std::sqrt(double(t.gns1.dim())));
    double right = 0.0, g0 = 0.0, second = 0.0, corr = 0.0;
    CVector psi = random_unit_in_jones_range(t, rng);
    const CMatrix &en1 = t.e_N1;
    for (const auto &x : t.relative->basis) {
        CMatrix px = t.pi(x), prx = t.pi_r(x), gx = t.gamma0(x);
        right = std::max(right, (px * t.e_N - prx * t.e_N).norm());
        g0 = std::max(g0, (prx * t.e_N - gx * t.e_N).norm());
        second = std::max(second, (en1 * t.pi1(px) * t.e_M - en1 * t.shift(x) * t.e_M).norm());
        corr = std::max(corr, ((px - gx) * psi).norm());
    }
    r.add("right_action_on_jones_range", right, b);
    r.add("gamma0_on_jones_range", g0, b);
    r.add("second_level_correlation", second, b1);
    r.add("perfect_correlation", corr, b);
    return r;
}

/// Three independent normaliser tests; they must agree.
inline bool normaliser_check(const Inclusion &inc, const GnsSpace &gns,
                             const CMatrix &e_N, const CMatrix &u,
                             const Tolerance &tol = {}) {
    if (!is_unitary(u, tol) || !inc.big->contains(u, tol))
        throw PreconditionError("normaliser_check: u must be a unitary in M");
    const Tolerance loose{1e-8, 1e-8};
    bool span_ok = true;
    for (const auto &c : inc.small->basis)
        span_ok = span_ok && inc.small->contains(u.adjoint() * c * u, loose);
    bool exp_ok = true;
    for (const auto &x : inc.big->basis) {
        CMatrix lhs = u.adjoint() * inc.expect(x) * u;
        CMatrix rhs = inc.expect(u.adjoint() * x * u);
        exp_ok = exp_ok && loose.accepts((lhs - rhs).norm(), 1.0);
    }
    CMatrix pu = gns.pi_left(u), pru = gns.pi_right(u);
    CMatrix lhs = pu * e_N * pu.adjoint();
    CMatrix rhs = pru * e_N * pru.adjoint();
    bool jones_ok = loose.accepts((lhs - rhs).norm(), 1.0);
    if (span_ok != exp_ok || exp_ok != jones_ok)
        throw InternalError("normaliser_check: the three tests disagree");
    return span_ok;
}

inline bool normaliser_check(const Tower &t, const CMatrix &u,
                             const Tolerance &tol = {}) {
    return normaliser_check(t.inc, t.gns, t.e_N, u, tol);
}

inline bool normaliser_check(const Inclusion &inc, const CMatrix &u,
                             const Tolerance &tol = {}) {
    auto gns = build_gns(*inc.big, inc.tau, tol);
    return normaliser_check(inc, gns, jones_projection(gns, *inc.small, tol), u,
                            tol);
}

/// The vector state of u* psi restricted to N' cap M is tracial, and the
/// shifted correlation gamma_0(u x u*) u* psi = x u* psi holds.
inline Report verify_tracial_entangled_state(const Tower &t, const CMatrix &u,
                                             const CVector &psi,
                                             const Tolerance &tol = {},
                                             std::uint64_t seed = 42) {
    if (!normaliser_check(t, u, tol))
        throw NormaliserError("u does not normalise N");
    Report r;
    Rng rng(seed);
    const double b = detail::bound(tol, std::sqrt(double(t.gns.dim())));
    CVector phi = t.pi(u.adjoint()) * psi;
    auto state = [&](const CMatrix &x) { return phi.dot(t.pi(x) * phi); };
    double tracial = 0.0;
    for (int trial = 0; trial < 10; ++trial) {
        CMatrix x = random_element(*t.relative, rng), y = random_element(*t.relative, rng);
        double s = std::max(1.0, x.norm() * y.norm());
        tracial = std::max(tracial, std::abs(state(x * y) - state(y * x)) / s);
    }
    double corr = 0.0;
    for (const auto &x : t.relative->basis)
        corr = std::max(corr, (t.gamma0(u * x * u.adjoint()) * phi - t.pi(x) * phi).norm());
    r.add("tracial_state", tracial, b);
    r.add("shifted_correlation", corr, b);
    return r;
}

} // namespace jtele
