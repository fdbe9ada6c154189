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
#include <memory>

#include "algebra.hpp"

namespace jtele {

using AlgebraRef = std::shared_ptr<const FinDimAlgebra>;

inline AlgebraRef share(FinDimAlgebra a) {
    return std::make_shared<const FinDimAlgebra>(std::move(a));
}

/**
 * @brief Linear map between two algebras, stored as its action on the
 * HS coordinates of the domain basis.
 */
class Superoperator {
  public:
    AlgebraRef domain;
    AlgebraRef codomain;
    CMatrix action; ///< codomain.dim() x domain.dim()

    static Superoperator
    from_function(AlgebraRef dom, AlgebraRef cod,
                  const std::function<CMatrix(const CMatrix &)> &f) {
        Superoperator s;
        s.action.resize(cod->dim(), dom->dim());
        for (long l = 0; l < dom->dim(); ++l)
            s.action.col(l) = cod->coords(f(dom->basis[l]));
        s.domain = std::move(dom);
        s.codomain = std::move(cod);
        return s;
    }

    static Superoperator identity_on(AlgebraRef a) {
        Superoperator s;
        s.action = CMatrix::Identity(a->dim(), a->dim());
        s.domain = a;
        s.codomain = a;
        return s;
    }

    CMatrix apply(const CMatrix &x) const {
        return codomain->from_coords(action * domain->coords(x));
    }

    /// Choi matrix of the map precomposed with the HS projection onto the
    /// domain, which is CP; positivity of this matrix is CP-ness.
    CMatrix choi() const {
        const long n = domain->ambient_dim, k = codomain->ambient_dim;
        CMatrix c = CMatrix::Zero(n * k, n * k);
        for (long a = 0; a < n; ++a)
            for (long b = 0; b < n; ++b) {
                CMatrix e = CMatrix::Zero(n, n);
                e(a, b) = 1.0;
                c.block(a * k, b * k, k, k) = apply(domain->project(e));
            }
        return c;
    }

    bool is_cp(const Tolerance &tol = {}) const { return is_psd(choi(), tol); }

    bool is_unital(const Tolerance &tol = {}) const {
        CMatrix one = apply(domain->unit);
        return tol.accepts((one - codomain->unit).norm(),
                           codomain->unit.norm());
    }

    bool is_ucp(const Tolerance &tol = {}) const {
        return is_unital(tol) && is_cp(tol);
    }
};

/**
 * @brief Scalars mu_i^j with T_i = mu_i^j id on the j-th block, for a CP
 * family summing to the identity.
 *
 * Rows index maps, columns index blocks of the (common) domain.
 */
inline RMatrix scalar_decompose_cp_family(const std::vector<Superoperator> &ts,
                                          const Tolerance &tol = {}) {
    if (ts.empty())
        throw PreconditionError("scalar_decompose_cp_family: empty family");
    const AlgebraRef a = ts.front().domain;
    CMatrix sum = CMatrix::Zero(a->dim(), a->dim());
    for (const auto &t : ts) {
        if (t.domain->dim() != a->dim() || t.codomain->dim() != a->dim() ||
            span_distance(*t.domain, *a) > 1e-8 ||
            span_distance(*t.codomain, *a) > 1e-8)
            throw PreconditionError(
                "scalar_decompose_cp_family: maps must act on one algebra");
        sum += t.action;
    }
    CMatrix id = CMatrix::Identity(a->dim(), a->dim());
    if (!tol.accepts((sum - id).norm(), id.norm()))
        throw PreconditionError(
            "scalar_decompose_cp_family: family does not sum to the identity");
    for (const auto &t : ts)
        if (!t.is_cp(tol))
            throw PreconditionError(
                "scalar_decompose_cp_family: map is not completely positive");

    const long nb = a->num_blocks();
    RMatrix mu(long(ts.size()), nb);
    for (long j = 0; j < nb; ++j) {
        const CMatrix &z = a->min_central_projections[j];
        std::vector<CMatrix> zb;
        for (const auto &b : a->basis)
            zb.push_back(z * b);
        auto block_basis = hs_gram_schmidt(zb, tol);
        for (std::size_t i = 0; i < ts.size(); ++i) {
            CMatrix tz = ts[i].apply(z);
            double m = trace_product(z, tz).real() / z.trace().real();
            double worst = 0.0;
            for (const auto &y : block_basis)
                worst = std::max(worst, (ts[i].apply(y) - m * y).norm() /
                                            std::sqrt(double(a->ambient_dim)));
            if (!tol.accepts(worst, 1.0))
                throw NotScalarError("map " + std::to_string(i) +
                                     " is not scalar on block " +
                                     std::to_string(j));
            mu(long(i), j) = m;
        }
    }
    return mu;
}

} // namespace jtele
