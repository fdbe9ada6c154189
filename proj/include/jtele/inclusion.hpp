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

#include <optional>

#include "superoperator.hpp"

namespace jtele {

using IntMatrix = Eigen::Matrix<long, Eigen::Dynamic, Eigen::Dynamic>;

/// Lambda_{kj}: multiplicity of the j-th summand of n inside the k-th
/// summand of m, from ranks of z_k p_j with p_j a minimal projection.
inline IntMatrix inclusion_matrix(const FinDimAlgebra &n,
                                  const FinDimAlgebra &m) {
    IntMatrix lam(m.num_blocks(), n.num_blocks());
    for (long j = 0; j < n.num_blocks(); ++j) {
        CMatrix p = n.matrix_unit(j, 0, 0);
        for (long k = 0; k < m.num_blocks(); ++k) {
            double r = trace_product(m.min_central_projections[k], p).real() /
                       double(m.blocks[k].m);
            long ri = std::lround(r);
            if (std::abs(r - double(ri)) > 1e-6 || ri < 0)
                throw StructureError("inclusion matrix entry is not integral");
            lam(k, j) = ri;
        }
    }
    return lam;
}

inline bool centers_connected(const FinDimAlgebra &n, const FinDimAlgebra &m) {
    return intersect(center(n), center(m)).dim() == 1;
}

/// Markov weights (trace of a minimal projection per big block) from the
/// Perron-Frobenius vector of Lambda^T Lambda, normalised so tau(1) = 1.
inline std::vector<double> markov_weights(const IntMatrix &lam,
                                          const std::vector<Block> &big) {
    RMatrix l = lam.cast<double>();
    auto [beta, s] = pf_eigenvector(l.transpose() * l);
    RVector t = l * s / beta;
    double unit = 0.0;
    for (long k = 0; k < t.size(); ++k)
        unit += t(k) * double(big[k].n);
    t /= unit;
    return std::vector<double>(t.data(), t.data() + t.size());
}

/// Markov trace on m for the inclusion n in m.
inline TraceFunctional markov_trace(const FinDimAlgebra &n,
                                    const FinDimAlgebra &m) {
    if (!centers_connected(n, m))
        throw ConnectednessError("markov_trace: Z(N) and Z(M) share more than "
                                 "the scalars");
    return TraceFunctional::on(m, markov_weights(inclusion_matrix(n, m),
                                                 m.blocks));
}

/// ||Lambda||^2.
inline double lambda_norm_sq(const IntMatrix &lam) {
    RMatrix l = lam.cast<double>();
    return pf_eigenvector(l.transpose() * l).first;
}

/**
 * @brief Unital inclusion N in M with a faithful trace on M.
 */
struct Inclusion {
    AlgebraRef small;
    AlgebraRef big;
    TraceFunctional tau;
    std::vector<CMatrix> small_tau_basis; ///< tau-orthonormal, self-adjoint
    IntMatrix lambda;

    /// tau-preserving conditional expectation onto N.
    CMatrix expect(const CMatrix &x) const {
        CMatrix out = CMatrix::Zero(x.rows(), x.cols());
        for (const auto &c : small_tau_basis)
            out += tau(c * x) * c;
        return out;
    }

    bool connected() const { return centers_connected(*small, *big); }

    /// ||Lambda||^2, the index for connected inclusions.
    double index() const {
        if (!connected())
            throw ConnectednessError("index: inclusion is not connected");
        return lambda_norm_sq(lambda);
    }

    /// True when the installed trace coincides with the Markov trace.
    bool markov(const Tolerance &tol = {}) const {
        if (!connected())
            return false;
        auto mt = markov_trace(*small, *big);
        double d = 0.0;
        for (std::size_t k = 0; k < tau.weights.size(); ++k)
            d = std::max(d, std::abs(tau.weights[k] - mt.weights[k]));
        return tol.accepts(d, 1.0);
    }
};

/// Builds an inclusion; the trace defaults to the Markov trace.
inline Inclusion make_inclusion(AlgebraRef n, AlgebraRef m,
                                std::optional<TraceFunctional> tau = {},
                                const Tolerance &tol = {}) {
    if (n->ambient_dim != m->ambient_dim)
        throw DimensionError("make_inclusion: ambient dimensions differ");
    for (const auto &b : n->basis)
        if (!m->contains(b, Tolerance{1e-8, 1e-8}))
            throw PreconditionError("make_inclusion: N is not contained in M");
    if ((n->unit - m->unit).norm() > 1e-8)
        throw PreconditionError("make_inclusion: units differ");
    Inclusion inc;
    inc.small = n;
    inc.big = m;
    inc.tau = tau ? *tau : markov_trace(*n, *m);
    if (inc.tau.weights.size() != std::size_t(m->num_blocks()))
        throw DimensionError("make_inclusion: one trace weight per M block");
    if (!inc.tau.faithful())
        throw TraceError("make_inclusion: trace weights must be positive");
    if (std::abs(inc.tau.unit_value() - 1.0) > 1e-9)
        throw TraceError("make_inclusion: trace is not normalised");
    inc.small_tau_basis = tau_orthonormal_basis(*n, inc.tau, tol);
    inc.lambda = inclusion_matrix(*n, *m);
    return inc;
}

inline Superoperator conditional_expectation(const Inclusion &inc) {
    return Superoperator::from_function(
        inc.big, inc.small, [&](const CMatrix &x) { return inc.expect(x); });
}

inline IntMatrix inclusion_matrix(const Inclusion &inc) { return inc.lambda; }
inline double index(const Inclusion &inc) { return inc.index(); }
inline bool is_connected(const Inclusion &inc) { return inc.connected(); }

// Common algebras -----------------------------------------------------------

inline FinDimAlgebra full_matrix_algebra(long n) {
    std::vector<CMatrix> gens;
    CMatrix shift = CMatrix::Zero(n, n), phase = CMatrix::Zero(n, n);
    for (long k = 0; k < n; ++k) {
        shift((k + 1) % n, k) = 1.0;
        phase(k, k) = std::polar(1.0, 2.0 * kPi * double(k) / double(n));
    }
    return from_generators({shift, phase}, n);
}

inline FinDimAlgebra scalars(long n) { return from_generators({}, n); }

/// Block-diagonal sum of M_{n_j} (x) 1_{m_j} (Kronecker order), laid out
/// along the diagonal in the given order.
inline FinDimAlgebra block_diagonal(const std::vector<Block> &blocks) {
    long total = 0;
    for (const auto &b : blocks)
        total += b.n * b.m;
    std::vector<CMatrix> gens;
    long off = 0;
    for (const auto &b : blocks) {
        for (long a = 0; a < b.n; ++a)
            for (long c = 0; c < b.n; ++c) {
                CMatrix e = CMatrix::Zero(b.n, b.n);
                e(a, c) = 1.0;
                CMatrix g = CMatrix::Zero(total, total);
                g.block(off, off, b.n * b.m, b.n * b.m) =
                    kron(e, identity(b.m));
                gens.push_back(g);
            }
        off += b.n * b.m;
    }
    return from_generators(gens, total);
}

inline FinDimAlgebra diagonal_algebra(long n) {
    return block_diagonal(std::vector<Block>(n, Block{1, 1}));
}

} // namespace jtele
