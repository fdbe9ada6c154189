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

#include "tower.hpp"

namespace jtele {

/**
 * @brief A family {lambda_i} in M with sum_i lambda_i* e_N lambda_i = 1.
 *
 * Flags are filled in by verify_basis.
 */
struct PPBasis {
    Inclusion inc;
    std::vector<CMatrix> elements;
    bool orthonormal = false;
    bool unitary = false;
    bool in_normaliser = false;
    bool verified = false;

    long size() const { return static_cast<long>(elements.size()); }
};

/// Translation U|k> = |k+1> on C^n.
inline CMatrix translation(long n) {
    CMatrix u = CMatrix::Zero(n, n);
    for (long k = 0; k < n; ++k)
        u((k + 1) % n, k) = 1.0;
    return u;
}

/// Multiplication V|k> = exp(2 pi i k / n)|k> on C^n.
inline CMatrix multiplication(long n) {
    CMatrix v = CMatrix::Zero(n, n);
    for (long k = 0; k < n; ++k)
        v(k, k) = std::polar(1.0, 2.0 * kPi * double(k) / double(n));
    return v;
}

/// W(k, l) = V^l U^k.
inline CMatrix weyl(long n, long k, long l) {
    CMatrix u = translation(n), v = multiplication(n);
    CMatrix out = identity(n);
    for (long i = 0; i < l; ++i)
        out = out * v;
    for (long i = 0; i < k; ++i)
        out = out * u;
    return out;
}

/// {V^l U^k} over C, ordered lexicographically in (l, k).
inline PPBasis weyl_basis(long n) {
    if (n < 1)
        throw PreconditionError("weyl_basis: n must be positive");
    PPBasis b;
    b.inc = make_inclusion(share(scalars(n)), share(full_matrix_algebra(n)));
    for (long l = 0; l < n; ++l)
        for (long k = 0; k < n; ++k)
            b.elements.push_back(weyl(n, k, l));
    return b;
}

inline Inclusion diagonal_inclusion(long n) {
    return make_inclusion(share(diagonal_algebra(n)), share(full_matrix_algebra(n)));
}

/// {U^k} over the diagonal algebra.
inline PPBasis diagonal_shift_basis(long n) {
    if (n < 1)
        throw PreconditionError("diagonal_shift_basis: n must be positive");
    PPBasis b;
    b.inc = diagonal_inclusion(n);
    CMatrix u = translation(n), p = identity(n);
    for (long k = 0; k < n; ++k) {
        b.elements.push_back(p);
        p = u * p;
    }
    return b;
}

/// {n^{-1/2} |chi><chi|} with chi(j) = exp(2 pi i j k / n) unnormalised.
inline PPBasis character_basis(long n) {
    if (n < 1)
        throw PreconditionError("character_basis: n must be positive");
    PPBasis b;
    b.inc = diagonal_inclusion(n);
    for (long k = 0; k < n; ++k) {
        CVector chi(n);
        for (long j = 0; j < n; ++j)
            chi(j) = std::polar(1.0, 2.0 * kPi * double(j * k) / double(n));
        b.elements.push_back(chi * chi.adjoint() / std::sqrt(double(n)));
    }
    return b;
}

/// k blocks of M_l laid out along the diagonal of M_{kl}.
inline Inclusion homogeneous_inclusion(long k, long l) {
    return make_inclusion(share(block_diagonal(std::vector<Block>(k, Block{l, 1}))),
                          share(full_matrix_algebra(k * l)));
}

/// Block-cyclic shifts S^j (x) 1_l.
inline PPBasis homogeneous_basis(long k, long l) {
    if (k < 1 || l < 1)
        throw PreconditionError("homogeneous_basis: k and l must be positive");
    PPBasis b;
    b.inc = homogeneous_inclusion(k, l);
    CMatrix s = kron(translation(k), identity(l)), p = identity(k * l);
    for (long j = 0; j < k; ++j) {
        b.elements.push_back(p);
        p = s * p;
    }
    return b;
}

/// Completeness, index sum and the orthonormal/unitary/normaliser flags.
inline Report verify_basis(PPBasis &b, const Tolerance &tol = {}) {
    const auto &inc = b.inc;
    const long n = inc.big->ambient_dim;
    auto gns = build_gns(*inc.big, inc.tau, tol);
    CMatrix e = jones_projection(gns, *inc.small, tol);
    const long d = gns.dim();
    const double bound = tol.abs + tol.rel * std::sqrt(double(d));
    Report r;

    for (const auto &l : b.elements)
        if (!inc.big->contains(l, Tolerance{1e-8, 1e-8}))
            throw PreconditionError("verify_basis: element outside M");

    CMatrix sum = CMatrix::Zero(d, d);
    for (const auto &l : b.elements) {
        CMatrix pl = gns.pi_left(l);
        sum += pl.adjoint() * e * pl;
    }
    r.add("completeness", (sum - identity(d)).norm(), bound);

    double expansion = 0.0;
    for (const auto &x : inc.big->basis) {
        CMatrix y = CMatrix::Zero(n, n);
        for (const auto &l : b.elements)
            y += inc.expect(x * l.adjoint()) * l;
        expansion = std::max(expansion, (y - x).norm());
    }
    r.add("expansion", expansion, bound);

    CMatrix lsum = CMatrix::Zero(n, n);
    for (const auto &l : b.elements)
        lsum += l.adjoint() * l;
    r.add("index_sum", (lsum - inc.index() * identity(n)).norm(), bound);

    double ortho = 0.0;
    for (long i = 0; i < b.size(); ++i)
        for (long j = 0; j < b.size(); ++j) {
            CMatrix target = (i == j) ? identity(n) : CMatrix::Zero(n, n);
            CMatrix g = inc.expect(b.elements[i] * b.elements[j].adjoint());
            ortho = std::max(ortho, (g - target).norm());
        }
    b.orthonormal = ortho <= bound;
    b.unitary = std::all_of(b.elements.begin(), b.elements.end(),
                            [&](const CMatrix &u) { return is_unitary(u, tol); });
    b.in_normaliser = b.unitary &&
                      std::all_of(b.elements.begin(), b.elements.end(),
                                  [&](const CMatrix &u) {
                                      return normaliser_check(inc, gns, e, u, tol);
                                  });
    b.verified = r.ok();
    return r;
}

/// Orthonormal exactly when d dim N = dim M, for a Markov inclusion.
inline Report cardinality_test(const PPBasis &b) {
    if (!b.verified)
        throw PreconditionError("cardinality_test: basis not verified");
    bool counts = b.size() * b.inc.small->dim() == b.inc.big->dim();
    if (counts != b.orthonormal)
        throw InternalError("cardinality_test: orthonormality and cardinality "
                            "disagree");
    Report r;
    r.add_flag("orthonormal_iff_cardinality", true);
    return r;
}

struct ChoiDecomposition {
    std::vector<CMatrix> a; ///< elements of M
    Report report;
};

/// Matrix of x -> sum_i a_i* x a_i on a basis of the relative commutant.
inline CMatrix choi_action(const std::vector<CMatrix> &a, const FinDimAlgebra &rel) {
    CMatrix out(rel.dim(), rel.dim());
    for (long k = 0; k < rel.dim(); ++k) {
        CMatrix y = CMatrix::Zero(rel.ambient_dim, rel.ambient_dim);
        for (const auto &ai : a)
            y += ai.adjoint() * rel.basis[k] * ai;
        out.col(k) = rel.coords(y);
    }
    return out;
}

/**
 * @brief a_i* = [M:N] E_M(sqrt(x_1) lambda_i* e_N), so that
 * x_1 = sum_i a_i* e_N a_i.
 */
inline std::vector<CMatrix> choi_elements(const Tower &t, const CMatrix &x1,
                                          const PPBasis &b,
                                          const Tolerance &tol = {}) {
    CMatrix root = matrix_sqrt(x1, tol);
    std::vector<CMatrix> a;
    for (const auto &l : b.elements) {
        CMatrix rep = t.index_value *
                      t.expect_m(root * t.pi(l).adjoint() * t.e_N);
        a.push_back(t.from_rep(rep).adjoint());
    }
    return a;
}

inline ChoiDecomposition choi_decomposition(const Tower &t, const CMatrix &x1,
                                            const PPBasis &b,
                                            const PPBasis *second = nullptr,
                                            const Tolerance &tol = {}) {
    const Tolerance loose{1e-8, 1e-8};
    if (!is_psd(x1, tol))
        throw PreconditionError("choi_decomposition: x_1 is not positive");
    if (!t.m1->contains(x1, loose))
        throw PreconditionError("choi_decomposition: x_1 is not in M_1");
    for (const auto &c : t.n_rep->basis)
        if ((c * x1 - x1 * c).norm() > 1e-8)
            throw PreconditionError("choi_decomposition: x_1 is not in N'");
    const double bound = tol.abs + tol.rel * std::sqrt(double(t.gns.dim()));
    const auto &rel = *t.relative;

    ChoiDecomposition out;
    out.a = choi_elements(t, x1, b, tol);
    CMatrix sum = CMatrix::Zero(x1.rows(), x1.cols());
    for (const auto &ai : out.a) {
        CMatrix p = t.pi(ai);
        sum += p.adjoint() * t.e_N * p;
    }
    out.report.add("reconstruction", (sum - x1).norm(), bound);

    // the map lands in N' cap M and equals [M:N] E_M(x_1 gamma_0(x))
    double lands = 0.0, formula = 0.0;
    for (const auto &x : rel.basis) {
        CMatrix y = CMatrix::Zero(x.rows(), x.cols());
        for (const auto &ai : out.a)
            y += ai.adjoint() * x * ai;
        lands = std::max(lands, rel.distance(y));
        CMatrix alt = t.index_value * t.expect_m(x1 * t.gamma0(x));
        formula = std::max(formula, (t.pi(y) - alt).norm());
    }
    out.report.add("map_preserves_relative_commutant", lands, bound);
    out.report.add("map_formula", formula, bound);

    if (b.in_normaliser) {
        double both = 0.0;
        for (const auto &x : rel.basis)
            for (const auto &ai : out.a)
                both = std::max(both, rel.distance(ai * x * ai.adjoint()));
        out.report.add("two_sided_invariance", both, bound);
    }
    if (second) {
        auto other = choi_elements(t, x1, *second, tol);
        double diff = (choi_action(out.a, rel) - choi_action(other, rel)).norm();
        out.report.add("basis_independence", diff, bound);
    }
    return out;
}

namespace detail {

inline void require_flags(const PPBasis &b, bool need_normaliser) {
    if (!b.verified || !b.orthonormal || !b.unitary ||
        (need_normaliser && !b.in_normaliser))
        throw PreconditionError("basis must be a verified unitary orthonormal "
                                "Pimsner-Popa basis" +
                                std::string(need_normaliser ? " in the normaliser" : ""));
}

} // namespace detail

struct HomogeneityResult {
    bool homogeneous = false;
    std::optional<PPBasis> witness;
    std::vector<long> block_sizes; ///< n_j of N
    double target = 0.0;           ///< n / d that every n_j must equal
};

/**
 * @brief Decides homogeneity of a multiplicity-free N in M_n. A homogeneous N
 * comes with a normaliser basis transported through the adapted unitary.
 */
inline HomogeneityResult homogeneity_test(const Inclusion &inc,
                                          const Tolerance &tol = {}) {
    const auto &n_alg = *inc.small;
    const long n = inc.big->ambient_dim;
    if (inc.big->num_blocks() != 1 || inc.big->blocks[0].n != n)
        throw PreconditionError("homogeneity_test: M must be M_n");
    for (const auto &blk : n_alg.blocks)
        if (blk.m != 1)
            throw PreconditionError("homogeneity_test: N is not multiplicity-free");
    HomogeneityResult res;
    const long k = n_alg.num_blocks();
    for (const auto &blk : n_alg.blocks)
        res.block_sizes.push_back(blk.n);
    res.target = double(n) / double(k);
    res.homogeneous = std::all_of(res.block_sizes.begin(), res.block_sizes.end(),
                                  [&](long s) { return s == res.block_sizes[0]; });
    if (!res.homogeneous)
        return res;
    const long l = res.block_sizes[0];
    PPBasis b;
    b.inc = inc;
    CMatrix w = n_alg.adapted;
    CMatrix s = kron(translation(k), identity(l)), p = identity(n);
    for (long j = 0; j < k; ++j) {
        b.elements.push_back(w * p * w.adjoint());
        p = s * p;
    }
    auto r = verify_basis(b, tol);
    if (!r.ok() || !b.in_normaliser)
        throw InternalError("homogeneity_test: witness basis failed verification");
    res.witness = std::move(b);
    return res;
}

} // namespace jtele
