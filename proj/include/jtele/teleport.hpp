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

#include <functional>
#include <optional>

#include "pp_basis.hpp"

namespace jtele {

using MatrixMap = std::function<CMatrix(const CMatrix &)>;

/**
 * @brief Commuting subalgebras A, B of a concrete ambient algebra, with
 * A_0, A_1 in A and the anti-isomorphisms gamma_0: A_0 -> A_1 and
 * gamma_1: A_1 -> B.
 */
struct TeleportContext {
    long dim = 0; ///< Hilbert space dimension of the ambient
    TraceFunctional tau;
    AlgebraRef A, B, A0, A1;
    MatrixMap gamma0, gamma1;
    /// Zero exactly on the ambient algebra.
    std::function<double(const CMatrix &)> ambient_defect;
    std::vector<CMatrix> a0_basis; ///< tau-orthonormal, self-adjoint

    /// A_0 v A_1 and A_1 v B when the builder knows them; classify falls
    /// back to generator closure otherwise.
    AlgebraRef a0_a1, a1_b;

    /// Set for the tripartite M_n (x) M_n (x) N' picture.
    std::optional<Inclusion> werner_inclusion;

    CMatrix Gamma(const CMatrix &a) const { return gamma1(gamma0(a)); }

    /// tau-preserving conditional expectation onto A_0.
    CMatrix expect_a0(const CMatrix &x) const {
        CMatrix out = CMatrix::Zero(dim, dim);
        for (const auto &c : a0_basis)
            out += tau(c * x) * c;
        return out;
    }
};

using ContextRef = std::shared_ptr<const TeleportContext>;

inline ContextRef finish_context(TeleportContext ctx, const Tolerance &tol = {}) {
    ctx.a0_basis = tau_orthonormal_basis(*ctx.A0, ctx.tau, tol);
    return std::make_shared<const TeleportContext>(std::move(ctx));
}

/// Kraus form T(x) = sum_k K_k x K_k*.
struct KrausMap {
    std::vector<CMatrix> ops;

    CMatrix operator()(const CMatrix &x) const {
        CMatrix out = CMatrix::Zero(x.rows(), x.cols());
        for (const auto &k : ops)
            out += k * x * k.adjoint();
        return out;
    }
};

struct SchemeFlags {
    std::optional<bool> tight, unbiased, faithful, minimal;
    double unbiased_value = 0.0;
    double min_outcome_weight = 0.0; ///< smallest eigenvalue over i of E_{A_0}(omega F_i)
    /// Density in A_0 with the smallest outcome probability, and that outcome.
    long witness_outcome = -1;
    CMatrix witness_density;
    double witness_probability = 0.0;
};

/**
 * @brief (omega, {F_i}, {T_i}) on a TeleportContext. T_i are stored as Kraus
 * maps with operators in A', hence UCP A-bimodule maps whenever unital.
 */
struct TeleportationScheme {
    ContextRef ctx;
    CMatrix omega;
    std::vector<CMatrix> F;
    std::vector<KrausMap> T;
    SchemeFlags flags;

    long outcomes() const { return static_cast<long>(F.size()); }
};

namespace detail {

inline double max_commutator(const CMatrix &x, const std::vector<CMatrix> &mats) {
    double worst = 0.0;
    for (const auto &m : mats)
        worst = std::max(worst, (x * m - m * x).norm());
    return worst;
}

inline void structural(bool ok, const std::string &clause) {
    if (!ok)
        throw SchemeError("structural clause failed: " + clause);
}

} // namespace detail

/// max over a tau-orthonormal basis of A_0 of ||sum_i E_{A_0}(F_i T_i(Gamma(a)) omega) - a||.
inline double teleportation_residual(const TeleportationScheme &s) {
    const auto &c = *s.ctx;
    double worst = 0.0;
    for (const auto &a : c.a0_basis) {
        CMatrix g = c.Gamma(a);
        CMatrix acc = CMatrix::Zero(c.dim, c.dim);
        for (std::size_t i = 0; i < s.F.size(); ++i)
            acc += s.F[i] * s.T[i](g) * s.omega;
        worst = std::max(worst, (c.expect_a0(acc) - a).norm());
    }
    return worst;
}

/// Teleportation identity residual plus structural checks.
inline Report verify_scheme(const TeleportationScheme &s, const Tolerance &tol = {}) {
    if (!s.ctx)
        throw PreconditionError("verify_scheme: scheme has no context");
    const auto &c = *s.ctx;
    const Tolerance loose{1e-8, 1e-8};
    const long D = c.dim;
    if (s.F.size() != s.T.size() || s.F.empty())
        throw SchemeError("outcome count mismatch between F and T");

    for (std::size_t i = 0; i < s.F.size(); ++i) {
        const auto &f = s.F[i];
        detail::structural(f.rows() == D && f.cols() == D, "F_i has the ambient shape");
        detail::structural(is_psd(f, loose), "F_i is positive");
        detail::structural(c.A->contains(f, loose), "F_i lies in A");
        CMatrix unit = CMatrix::Zero(D, D);
        for (const auto &k : s.T[i].ops) {
            detail::structural(detail::max_commutator(k, c.A->basis) < 1e-8,
                               "T_i is an A-bimodule map");
            unit += k * k.adjoint();
        }
        detail::structural(loose.accepts((unit - identity(D)).norm(), 1.0),
                           "T_i is unital");
        for (const auto &b : c.B->basis)
            detail::structural(c.B->contains(s.T[i](b), loose), "T_i(B) lies in B");
    }
    detail::structural(is_psd(s.omega, loose), "omega is positive");
    detail::structural(std::abs(c.tau(s.omega) - 1.0) < 1e-8, "tau(omega) = 1");
    detail::structural(detail::max_commutator(s.omega, c.A0->basis) < 1e-8,
                       "omega commutes with A_0");
    detail::structural(c.ambient_defect(s.omega) < 1e-8, "omega lies in the ambient");

    Report r;
    const double bound = tol.abs + tol.rel * std::sqrt(double(D));
    CMatrix sum = CMatrix::Zero(D, D);
    for (const auto &f : s.F)
        sum += f;
    r.add("povm_sum", (sum - identity(D)).norm(), bound);
    r.add("teleportation_identity", teleportation_residual(s), bound);
    // finite I with F_i in A and T_i as above gives a one-way LOCC map
    r.add_flag("one_way_locc_implied", true);
    return r;
}

/// Tightness, unbiasedness, faithfulness and minimality.
inline Report classify(TeleportationScheme &s, const Tolerance &tol = {},
                       std::uint64_t seed = 42) {
    const auto &c = *s.ctx;
    const long D = c.dim;
    const long d = s.outcomes();
    const double bound = tol.abs + tol.rel * std::sqrt(double(D));
    Report r;
    auto &fl = s.flags;
    fl.tight = (d == c.A0->dim());

    std::vector<CMatrix> g(d);
    double unbiased = 0.0;
    fl.min_outcome_weight = std::numeric_limits<double>::infinity();
    double lowest = std::numeric_limits<double>::infinity();
    for (long i = 0; i < d; ++i) {
        g[i] = c.expect_a0(s.omega * s.F[i]);
        unbiased = std::max(unbiased, (g[i] - identity(D) / double(d)).norm());
        CMatrix h = (g[i] + g[i].adjoint()) / 2.0;
        auto [w, v] = hermitian_eigendecomposition(h);
        fl.min_outcome_weight = std::min(fl.min_outcome_weight, w(0));
        if (w(0) < lowest) {
            lowest = w(0);
            // spectral projection of the lowest eigenvalue lies in A_0
            CMatrix p = CMatrix::Zero(D, D);
            for (long k = 0; k < w.size(); ++k)
                if (std::abs(w(k) - w(0)) < 1e-8)
                    p += v.col(k) * v.col(k).adjoint();
            fl.witness_outcome = i;
            fl.witness_density = p / c.tau(p).real();
            fl.witness_probability = c.tau(s.F[i] * fl.witness_density * s.omega).real();
        }
    }
    fl.unbiased = unbiased <= bound;
    fl.unbiased_value = fl.unbiased.value() ? 1.0 / double(d) : 0.0;
    fl.faithful = fl.min_outcome_weight > tol.abs;

    // tau(F_i rho omega) = tau(rho g_i) on random densities of A_0
    Rng rng(seed);
    double cross = 0.0;
    for (int k = 0; k < 100; ++k) {
        CMatrix x = random_element(*c.A0, rng);
        CMatrix rho = x * x.adjoint();
        rho /= c.tau(rho).real();
        for (long i = 0; i < d; ++i)
            cross = std::max(cross, std::abs(c.tau(s.F[i] * rho * s.omega) - c.tau(rho * g[i])));
    }
    r.add("outcome_weight_crosscheck", cross, bound);

    auto join = [&](const AlgebraRef &known, const AlgebraRef &x, const AlgebraRef &y) {
        if (known)
            return known;
        std::vector<CMatrix> gens(x->basis);
        gens.insert(gens.end(), y->basis.begin(), y->basis.end());
        return share(from_generators(gens, D, tol));
    };
    auto a1b = join(c.a1_b, c.A1, c.B);
    auto a0a1 = join(c.a0_a1, c.A0, c.A1);
    double mini = a1b->distance(s.omega);
    for (const auto &f : s.F)
        mini = std::max(mini, a0a1->distance(f));
    fl.minimal = mini <= 1e-8;
    r.add("unbiased_residual", unbiased, std::numeric_limits<double>::infinity());
    r.add("minimality_residual", mini, std::numeric_limits<double>::infinity());
    return r;
}

// Tripartite picture ---------------------------------------------------------

/// x -> x^t on C^n (x) C^n: rowvec(x) = vec(x^t).
inline CVector rowvec(const CMatrix &x) { return vec(CMatrix(x.transpose())); }

/// Jones projection of N in M_n on C^n (x) C^n (L^2(M_n, tau_n) picture).
inline CMatrix tensor_jones_projection(const FinDimAlgebra &n_alg,
                                       const Tolerance &tol = {}) {
    std::vector<CVector> vs;
    for (const auto &c : n_alg.basis)
        vs.push_back(rowvec(c));
    return span_projection(vs, tol);
}

inline std::vector<long> three_legs(long n) { return {n, n, n}; }

/**
 * @brief Context M_n (x) M_n (x) N' with A = M_n (x) M_n (x) 1,
 * B = 1 (x) 1 (x) N', A_0 = N' (x) 1 (x) 1, A_1 = 1 (x) N' (x) 1.
 * gamma_0 and gamma_1 are transposition, so N' must be transpose-invariant.
 */
inline ContextRef tripartite_context(const Inclusion &inc, const Tolerance &tol = {}) {
    const long n = inc.big->ambient_dim;
    if (inc.big->num_blocks() != 1 || inc.big->blocks[0].n != n)
        throw PreconditionError("tripartite_context: M must be M_n");
    auto np = share(commutant(*inc.small, tol));
    for (const auto &b : np->basis)
        if (!np->contains(b.transpose(), Tolerance{1e-8, 1e-8}))
            throw PreconditionError("tripartite_context: N' must be transpose-invariant");
    const CMatrix one = identity(n);
    TeleportContext c;
    c.dim = n * n * n;
    c.tau = TraceFunctional::make({1.0 / double(c.dim)}, {identity(c.dim)}, {{c.dim, 1}});
    auto cn = scalars(n);
    c.A = share(tensor_product({*inc.big, *inc.big, cn}));
    c.B = share(tensor_product({cn, cn, *np}));
    c.A0 = share(tensor_product({*np, cn, cn}));
    c.A1 = share(tensor_product({cn, *np, cn}));
    c.a0_a1 = share(tensor_product({*np, *np, cn}));
    c.a1_b = share(tensor_product({cn, *np, *np}));
    c.gamma0 = [n, one](const CMatrix &a) {
        CMatrix x = partial_trace(a, three_legs(n), {2, 3}, true);
        return kron({one, CMatrix(x.transpose()), one});
    };
    c.gamma1 = [n, one](const CMatrix &a) {
        CMatrix x = partial_trace(a, three_legs(n), {1, 3}, true);
        return kron({one, one, CMatrix(x.transpose())});
    };
    std::vector<CMatrix> nb;
    for (const auto &b : inc.small->basis)
        nb.push_back(kron({one, one, b}));
    c.ambient_defect = [nb](const CMatrix &x) { return detail::max_commutator(x, nb); };
    c.werner_inclusion = inc;
    return finish_context(std::move(c), tol);
}

/**
 * @brief Standard protocol on M_n (x) M_n (x) M_n: omega = n^2 (1 (x) P_psi),
 * F_i = (u_i* (x) 1) P_psi (u_i (x) 1), T_i = Ad(1 (x) 1 (x) u_i).
 */
inline TeleportationScheme build_standard(long n, const PPBasis &b,
                                          const Tolerance &tol = {}) {
    detail::require_flags(b, false);
    if (b.inc.small->dim() != 1 || b.inc.big->ambient_dim != n || b.size() != n * n)
        throw PreconditionError("build_standard: need a basis of M_n over C with n^2 elements");
    TeleportationScheme s;
    s.ctx = tripartite_context(b.inc, tol);
    const CMatrix one = identity(n);
    CVector psi = CVector::Zero(n * n);
    for (long i = 0; i < n; ++i)
        psi(i * n + i) = 1.0 / std::sqrt(double(n));
    CMatrix p = psi * psi.adjoint();
    s.omega = double(n * n) * kron(one, p);
    for (const auto &u : b.elements) {
        CMatrix ui = kron(u, one);
        s.F.push_back(kron(CMatrix(ui.adjoint() * p * ui), one));
        s.T.push_back(KrausMap{{kron({one, one, u})}});
    }
    return s;
}

struct MarkovRestriction {
    bool holds = false;
    std::vector<double> ratios; ///< n_j / m_j per block of N
    double target = 0.0;        ///< n / dim N'
    Report consequence;         ///< partial traces of e_N, when holds
};

/// tau_n restricted to N' is the Markov trace for C in N' iff n_j/m_j = n/dim N'.
inline MarkovRestriction markov_restriction_check(const Inclusion &inc,
                                                  const Tolerance &tol = {}) {
    const long n = inc.big->ambient_dim;
    if (inc.big->num_blocks() != 1 || inc.big->blocks[0].n != n)
        throw PreconditionError("markov_restriction_check: M must be M_n");
    MarkovRestriction out;
    long dim_np = 0;
    for (const auto &blk : inc.small->blocks)
        dim_np += blk.m * blk.m;
    out.target = double(n) / double(dim_np);
    out.holds = true;
    for (const auto &blk : inc.small->blocks) {
        double r = double(blk.n) / double(blk.m);
        out.ratios.push_back(r);
        out.holds = out.holds && std::abs(r - out.target) < 1e-12;
    }
    if (out.holds) {
        CMatrix e = tensor_jones_projection(*inc.small, tol);
        CMatrix target = identity(n) / inc.index();
        const double bound = tol.abs + tol.rel * double(n);
        out.consequence.add("right_partial_trace",
                            (partial_trace(e, {n, n}, {2}, true) - target).norm(), bound);
        out.consequence.add("left_partial_trace",
                            (partial_trace(e, {n, n}, {1}, true) - target).norm(), bound);
    }
    return out;
}

/**
 * @brief omega = [M_n:N] (1 (x) z^{1/2} u) e_N (1 (x) u* z^{1/2}) on legs 2, 3,
 * F_i = (u_i* u (x) 1) e_N (u* u_i (x) 1) on legs 1, 2, T_i = Ad(u_i) on N'.
 */
inline TeleportationScheme build_werner_scheme(const Inclusion &inc, const PPBasis &b,
                                               const CMatrix &u, const CMatrix &z,
                                               const Tolerance &tol = {}) {
    auto mr = markov_restriction_check(inc, tol);
    if (!mr.holds)
        throw HypothesisError("tau restricted to N' is not the Markov trace for C in N'");
    detail::require_flags(b, true);
    const Tolerance loose{1e-8, 1e-8};
    if (span_distance(*b.inc.small, *inc.small) > 1e-8)
        throw PreconditionError("build_werner_scheme: basis is over a different N");
    if (!normaliser_check(inc, u, tol))
        throw PreconditionError("build_werner_scheme: u does not normalise N");
    const long n = inc.big->ambient_dim;
    if (!inc.small->contains(z, loose) ||
        detail::max_commutator(z, inc.small->basis) > 1e-8 || !is_hermitian(z, loose))
        throw PreconditionError("build_werner_scheme: z must be a self-adjoint central element of N");
    auto [ev, evec] = hermitian_eigendecomposition(z);
    if (ev(0) <= tol.abs)
        throw PreconditionError("build_werner_scheme: z must be positive invertible");
    if (std::abs(z.trace().real() / double(n) - 1.0) > 1e-9)
        throw PreconditionError("build_werner_scheme: tau(z) must be 1");

    TeleportationScheme s;
    s.ctx = tripartite_context(inc, tol);
    const CMatrix one = identity(n);
    CMatrix e = tensor_jones_projection(*inc.small, tol);
    CMatrix zu = kron(one, CMatrix(matrix_sqrt(z, tol) * u));
    s.omega = inc.index() * kron(one, CMatrix(zu * e * zu.adjoint()));
    for (const auto &ui : b.elements) {
        CMatrix a = kron(CMatrix(u.adjoint() * ui), one);
        s.F.push_back(kron(CMatrix(a.adjoint() * e * a), one));
        s.T.push_back(KrausMap{{kron({one, one, ui})}});
    }
    return s;
}

struct WernerTriple {
    PPBasis basis;
    CMatrix u;
    CMatrix z;
    Report report;
};

namespace detail {

/// Unitary in the span of `frame` (columns are vec'd n x n matrices),
/// from a seeded generic element and its polar part.
inline std::optional<CMatrix> generic_unitary(const CMatrix &frame, long n, Rng &rng) {
    if (frame.cols() == 0)
        return std::nullopt;
    CVector c(frame.cols());
    for (long k = 0; k < c.size(); ++k)
        c(k) = rng.complex_normal();
    CMatrix y = unvec(frame * c, n, n);
    return polar_unitary(y);
}

inline CMatrix leg_matrix(const CMatrix &x, long n, const std::set<int> &legs) {
    return partial_trace(x, three_legs(n), legs, true);
}

} // namespace detail

/**
 * @brief Recovers (basis, u, z) from a tight, minimal, faithful scheme in the
 * tripartite picture. The triple is fixed only up to gauge; the contract is
 * that rebuilding reproduces omega, F_i and T_i.
 */
inline WernerTriple werner_extract(TeleportationScheme s, const Tolerance &tol = {},
                                   std::uint64_t seed = 42) {
    if (!s.ctx || !s.ctx->werner_inclusion)
        throw PreconditionError("werner_extract: scheme is not in the tripartite picture");
    const Inclusion &inc = *s.ctx->werner_inclusion;
    if (!markov_restriction_check(inc, tol).holds)
        throw HypothesisError("werner_extract: Markov restriction fails");
    if (!verify_scheme(s, tol).ok())
        throw ExtractionError("werner_extract: input is not a teleportation scheme");
    classify(s, tol, seed);
    if (!s.flags.tight.value() || !s.flags.minimal.value() || !s.flags.faithful.value())
        throw PreconditionError("werner_extract: scheme must be tight, minimal and faithful");

    const long n = inc.big->ambient_dim;
    const CMatrix one = identity(n);
    const Tolerance loose{1e-8, 1e-8};
    Rng rng(seed);
    WernerTriple out;
    const double bound = 1e-8;

    // z = (tau (x) id)(omega) on the third leg
    out.z = detail::leg_matrix(s.omega, n, {1, 2});
    out.z = (out.z + out.z.adjoint()) / 2.0;

    // (1 (x) z^{-1/2}) omega_23 (1 (x) z^{-1/2}) / [M:N] projects onto rowvec(N u^t)
    CMatrix omega23 = partial_trace(s.omega, three_legs(n), {1}, true);
    auto [zv, zu] = hermitian_eigendecomposition(out.z);
    if (zv(0) <= tol.abs)
        throw ExtractionError("werner_extract: z is not invertible");
    CMatrix zinv = zu * zv.cwiseInverse().cwiseSqrt().asDiagonal() * zu.adjoint();
    CMatrix proj = kron(one, zinv) * omega23 * kron(one, zinv) / inc.index();
    if (!is_projection(proj, loose))
        throw ExtractionError("werner_extract: omega is not of the expected form");
    CMatrix range = range_basis(proj, tol);
    // columns rowvec(Y) -> vec(Y) for the generic-element step
    CMatrix frame(n * n, range.cols());
    for (long k = 0; k < range.cols(); ++k)
        frame.col(k) = vec(CMatrix(unvec(range.col(k), n, n).transpose()));
    auto ut = detail::generic_unitary(frame, n, rng);
    if (!ut)
        throw ExtractionError("werner_extract: empty resource range");
    out.u = ut->transpose();

    // u_i: unitary intertwiners X a = T_i(a) X over a in N'
    auto np = commutant(*inc.small, tol);
    out.basis.inc = inc;
    double range_check = 0.0;
    for (long i = 0; i < s.outcomes(); ++i) {
        CMatrix K(np.dim() * n * n, n * n);
        for (long k = 0; k < np.dim(); ++k) {
            const CMatrix &a = np.basis[k];
            CMatrix ta = detail::leg_matrix(s.T[i](kron({one, one, a})), n, {1, 2});
            K.middleRows(k * n * n, n * n) = kron(a.transpose(), one) - kron(one, ta);
        }
        CMatrix ker = nullspace_matrix(K, tol);
        auto x = detail::generic_unitary(ker, n, rng);
        if (!x)
            throw ExtractionError("werner_extract: no intertwiner for T_" + std::to_string(i));
        double inter = 0.0;
        for (const auto &a : np.basis) {
            CMatrix ta = detail::leg_matrix(s.T[i](kron({one, one, a})), n, {1, 2});
            inter = std::max(inter, (*x * a - ta * *x).norm());
        }
        if (inter > bound)
            throw ExtractionError("werner_extract: no unitary intertwiner for T_" +
                                  std::to_string(i));
        out.basis.elements.push_back(*x);

        // second route: F_i's range is rowvec(u_i* u N)
        CMatrix f12 = partial_trace(s.F[i], three_legs(n), {3}, false) / double(n);
        std::vector<CVector> vs;
        CMatrix a = x->adjoint() * out.u;
        for (const auto &c : inc.small->basis)
            vs.push_back(rowvec(CMatrix(a * c)));
        range_check = std::max(range_check, (span_projection(vs, tol) - f12).norm());
    }
    out.report.add("alice_range_crosscheck", range_check, bound);

    auto vr = verify_basis(out.basis, tol);
    if (!vr.ok() || !out.basis.orthonormal || !out.basis.in_normaliser)
        throw ExtractionError("werner_extract: extracted family is not an orthonormal "
                              "normaliser basis");

    auto rebuilt = build_werner_scheme(inc, out.basis, out.u, out.z, tol);
    double dw = (rebuilt.omega - s.omega).norm(), df = 0.0, dt = 0.0;
    for (long i = 0; i < s.outcomes(); ++i) {
        df = std::max(df, (rebuilt.F[i] - s.F[i]).norm());
        for (const auto &b : s.ctx->B->basis)
            dt = std::max(dt, (rebuilt.T[i](b) - s.T[i](b)).norm());
    }
    out.report.add("round_trip_omega", dw, bound);
    out.report.add("round_trip_F", df, bound);
    out.report.add("round_trip_T", dt, bound);
    if (!out.report.ok())
        throw ExtractionError("werner_extract: round trip failed");
    return out;
}

// Tower picture --------------------------------------------------------------

namespace detail {

/// Element of M_1 represented by b in pi_1(M_1).
inline CMatrix from_rep1(const Tower &t, const CMatrix &b) {
    return t.gns1.element(b * t.gns1.unit_vector());
}

inline AlgebraRef rep1(const Tower &t, const std::vector<CMatrix> &mats,
                       const Tolerance &tol) {
    std::vector<CMatrix> out;
    for (const auto &m : mats)
        out.push_back(t.pi1(m));
    return share(from_generators(out, t.gns1.dim(), tol));
}

} // namespace detail

/**
 * @brief Context on L^2(M_1, tau_1) with A = M_1, B = M_1' cap M_2 = Gamma(N' cap M),
 * A_0 = N' cap M and A_1 = gamma_0(N' cap M).
 */
inline ContextRef tower_context(const Tower &t, const Tolerance &tol = {}) {
    t.require_two_levels();
    TeleportContext c;
    c.dim = t.gns1.dim();
    c.tau = t.tau2;
    std::vector<CMatrix> rel = t.relative->basis, g0, sh;
    std::vector<CMatrix> rel_rep;
    for (const auto &x : rel) {
        rel_rep.push_back(t.pi(x));
        g0.push_back(t.gamma0(x));
        sh.push_back(t.shift(x));
    }
    c.A = detail::rep1(t, t.m1->basis, tol);
    c.A0 = detail::rep1(t, rel_rep, tol);
    c.A1 = detail::rep1(t, g0, tol);
    c.B = share(from_generators(sh, c.dim, tol));
    auto tp = std::make_shared<const Tower>(t);
    c.gamma0 = [tp](const CMatrix &a) {
        CMatrix x = tp->from_rep(detail::from_rep1(*tp, a));
        return tp->pi1(tp->gamma0(x));
    };
    c.gamma1 = [tp](const CMatrix &a) {
        return tp->gamma1(detail::from_rep1(*tp, a));
    };
    c.ambient_defect = [tp](const CMatrix &x) { return tp->m2_defect(x); };
    return finish_context(std::move(c), tol);
}

/**
 * @brief Direct sum of standard protocols for C in M: F_{j,z} from the Weyl
 * basis of each block, T_{j,z} = Ad(Gamma(W_j(z))), omega = (dim M) e_M.
 */
inline TeleportationScheme build_direct_sum(const FinDimAlgebra &m,
                                            const Tolerance &tol = {}) {
    auto mref = share(m);
    auto inc = make_inclusion(share(scalars(m.ambient_dim)), mref);
    auto t = build_tower(inc, tol);
    TeleportationScheme s;
    s.ctx = tower_context(t, tol);
    s.omega = double(m.dim()) * t.e_M;
    const long n = m.ambient_dim;
    for (long j = 0; j < m.num_blocks(); ++j) {
        const long nj = m.blocks[j].n;
        // P_j: projection onto Lambda(z_j)
        CVector v = t.gns.lambda(m.min_central_projections[j]);
        CMatrix pj = v * v.adjoint() / v.squaredNorm();
        CMatrix rest = identity(n) - m.min_central_projections[j];
        for (long l = 0; l < nj; ++l)
            for (long k = 0; k < nj; ++k) {
                CMatrix w = m.block_embed(j, weyl(nj, k, l)) + rest;
                CMatrix pw = t.pi(w);
                s.F.push_back(t.pi1(CMatrix(pw.adjoint() * pj * pw)));
                s.T.push_back(KrausMap{{t.shift(w)}});
            }
    }
    return s;
}

struct LoccUnitaries {
    std::vector<CMatrix> v; ///< in L^2(M_1) coordinates
    Report report;
};

/// v_i = [M:N] sum_j u_j* e_N u_i e_M e_N u_j.
inline LoccUnitaries locc_unitaries(const Tower &t, const PPBasis &b,
                                    const Tolerance &tol = {}, std::uint64_t seed = 42) {
    t.require_two_levels();
    detail::require_flags(b, true);
    const long d = b.size();
    const long D = t.gns1.dim();
    const double idx = t.index_value;
    std::vector<CMatrix> left(d), right(d);
    for (long j = 0; j < d; ++j) {
        CMatrix pu = t.pi(b.elements[j]);
        left[j] = pu.adjoint();
        right[j] = t.pi1(CMatrix(t.e_N * pu));
    }
    // phi([x_ij]) = [M:N] sum u_i* e_N x_ij e_M e_N u_j
    auto phi = [&](const std::vector<std::vector<CMatrix>> &x) {
        CMatrix out = CMatrix::Zero(D, D);
        for (long i = 0; i < d; ++i)
            for (long j = 0; j < d; ++j)
                out += t.pi1(CMatrix(left[i] * t.e_N * t.pi(x[i][j]))) * t.e_M * right[j];
        return CMatrix(idx * out);
    };
    const long n = t.inc.big->ambient_dim;
    LoccUnitaries out;
    const double bound = tol.abs + tol.rel * std::sqrt(double(D));
    double unit = 0.0, conj = 0.0, inm2 = 0.0;
    for (long i = 0; i < d; ++i) {
        std::vector<std::vector<CMatrix>> diag(d, std::vector<CMatrix>(d, CMatrix::Zero(n, n)));
        for (long j = 0; j < d; ++j)
            diag[j][j] = b.elements[i];
        CMatrix v = phi(diag);
        unit = std::max(unit, (v * v.adjoint() - identity(D)).norm());
        unit = std::max(unit, (v.adjoint() * v - identity(D)).norm());
        inm2 = std::max(inm2, t.m2_defect(v));
        const CMatrix &u = b.elements[i];
        for (const auto &x : t.relative->basis)
            conj = std::max(conj, (v * t.shift(x) * v.adjoint() -
                                   t.shift(CMatrix(u * x * u.adjoint()))).norm());
        out.v.push_back(v);
    }
    out.report.add("unitary", unit, bound);
    out.report.add("in_M2", inm2, bound);
    out.report.add("conjugation_identity", conj, bound);

    // phi is a unital *-homomorphism on M_d(M)
    Rng rng(seed);
    auto random_block = [&]() {
        std::vector<std::vector<CMatrix>> x(d, std::vector<CMatrix>(d));
        for (auto &row : x)
            for (auto &e : row)
                e = random_element(*t.inc.big, rng);
        return x;
    };
    std::vector<std::vector<CMatrix>> one(d, std::vector<CMatrix>(d, CMatrix::Zero(n, n)));
    for (long j = 0; j < d; ++j)
        one[j][j] = identity(n);
    out.report.add("phi_unital", (phi(one) - identity(D)).norm(), bound);
    double mult = 0.0, star = 0.0;
    for (int trial = 0; trial < 3; ++trial) {
        auto x = random_block(), y = random_block();
        std::vector<std::vector<CMatrix>> xy(d, std::vector<CMatrix>(d)), xs(d, std::vector<CMatrix>(d));
        for (long i = 0; i < d; ++i)
            for (long j = 0; j < d; ++j) {
                xy[i][j] = CMatrix::Zero(n, n);
                for (long k = 0; k < d; ++k)
                    xy[i][j] += x[i][k] * y[k][j];
                xs[i][j] = x[j][i].adjoint();
            }
        CMatrix px = phi(x);
        double s = std::max(1.0, px.norm() * phi(y).norm());
        mult = std::max(mult, (phi(xy) - px * phi(y)).norm() / s);
        star = std::max(star, (phi(xs) - px.adjoint()).norm() / std::max(1.0, px.norm()));
    }
    out.report.add("phi_multiplicative", mult, bound);
    out.report.add("phi_adjoint", star, bound);
    return out;
}

/**
 * @brief omega = [M:N] e_M, F_i = u_i* e_N u_i, T_i = Ad(v_i) on M_2.
 *
 * Ad(v_i) is M_1-bimodular only when v_i commutes with M_1. If M_1 is not a
 * factor, Z(M_1) sits inside M_1' cap M_2 and Ad(v_i) moves it, so no
 * M_1-bimodule extension exists and verify_scheme rejects the scheme.
 */
inline TeleportationScheme build_unbiased(const Tower &t, const PPBasis &b,
                                          const Tolerance &tol = {}, std::uint64_t seed = 42) {
    auto lu = locc_unitaries(t, b, tol, seed);
    TeleportationScheme s;
    s.ctx = tower_context(t, tol);
    s.omega = t.index_value * t.e_M;
    for (long i = 0; i < b.size(); ++i) {
        CMatrix pu = t.pi(b.elements[i]);
        s.F.push_back(t.pi1(CMatrix(pu.adjoint() * t.e_N * pu)));
        s.T.push_back(KrausMap{{lu.v[i]}});
    }
    return s;
}

/// Largest ||[v_i, a]|| over a in M_1: zero iff Ad(v_i) is M_1-bimodular.
inline double bimodule_defect(const TeleportationScheme &s) {
    double worst = 0.0;
    for (const auto &t : s.T)
        for (const auto &k : t.ops)
            worst = std::max(worst, detail::max_commutator(k, s.ctx->A->basis));
    return worst;
}

/// E_{A_0}(omega F_i) for each outcome.
inline std::vector<CMatrix> outcome_weights(const TeleportationScheme &s) {
    std::vector<CMatrix> out;
    for (const auto &f : s.F)
        out.push_back(s.ctx->expect_a0(s.omega * f));
    return out;
}

} // namespace jtele
