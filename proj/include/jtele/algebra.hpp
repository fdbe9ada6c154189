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

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "linalg.hpp"

namespace jtele {

struct Block {
    long n = 0; ///< matrix size of the simple summand
    long m = 0; ///< multiplicity in the ambient space
    bool operator==(const Block &o) const { return n == o.n && m == o.m; }
};

/// Fixed seed for the generic elements used in structure discovery.
inline constexpr std::uint64_t kStructureSeed = 0x6a7465ULL;

/**
 * @brief A unital *-subalgebra of M_n, with its block decomposition.
 *
 * The basis is orthonormal for the normalised Hilbert-Schmidt form
 * Tr(y* x)/n and consists of self-adjoint matrices. `adapted` is a unitary
 * whose columns are ordered by (block, matrix index, multiplicity index), so
 * that adapted* A adapted = direct sum of M_{n_j} (x) 1_{m_j}.
 */
class FinDimAlgebra {
  public:
    long ambient_dim = 0;
    std::vector<CMatrix> basis;
    std::vector<Block> blocks;
    std::vector<CMatrix> min_central_projections;
    CMatrix unit;
    CMatrix adapted;
    std::vector<long> offsets; ///< first adapted column of each block

    long dim() const { return static_cast<long>(basis.size()); }
    long num_blocks() const { return static_cast<long>(blocks.size()); }

    /// Columns vec(b_k)/sqrt(n): orthonormal in the plain inner product.
    const CMatrix &frame() const { return frame_; }

    CVector coords(const CMatrix &x) const {
        check_shape(x);
        return frame_.adjoint() * vec(x) / std::sqrt(double(ambient_dim));
    }

    CMatrix from_coords(const CVector &c) const {
        return unvec(frame_ * c * std::sqrt(double(ambient_dim)), ambient_dim,
                     ambient_dim);
    }

    /// Hilbert-Schmidt orthogonal projection onto the span.
    CMatrix project(const CMatrix &x) const { return from_coords(coords(x)); }

    /// Normalised HS distance from x to the span.
    double distance(const CMatrix &x) const {
        return (x - project(x)).norm() / std::sqrt(double(ambient_dim));
    }

    bool contains(const CMatrix &x, const Tolerance &tol = {}) const {
        return tol.accepts(distance(x),
                           x.norm() / std::sqrt(double(ambient_dim)));
    }

    /// Matrix unit e^j_{ab} in the ambient coordinates.
    CMatrix matrix_unit(long j, long a, long b) const {
        const long m = blocks[j].m;
        CMatrix out = CMatrix::Zero(ambient_dim, ambient_dim);
        for (long s = 0; s < m; ++s)
            out += adapted.col(offsets[j] + a * m + s) *
                   adapted.col(offsets[j] + b * m + s).adjoint();
        return out;
    }

    /// Place an n_j x n_j matrix into block j.
    CMatrix block_embed(long j, const CMatrix &x) const {
        const long nj = blocks[j].n, m = blocks[j].m;
        if (x.rows() != nj || x.cols() != nj)
            throw DimensionError("block_embed: wrong block size");
        CMatrix cols = adapted.middleCols(offsets[j], nj * m);
        return cols * kron(x, identity(m)) * cols.adjoint();
    }

    /// Component of x in block j as an n_j x n_j matrix.
    CMatrix block_compress(long j, const CMatrix &x) const {
        const long nj = blocks[j].n, m = blocks[j].m;
        CMatrix cols = adapted.middleCols(offsets[j], nj * m);
        CMatrix y = cols.adjoint() * x * cols;
        CMatrix out = CMatrix::Zero(nj, nj);
        for (long a = 0; a < nj; ++a)
            for (long b = 0; b < nj; ++b)
                for (long s = 0; s < m; ++s)
                    out(a, b) += y(a * m + s, b * m + s);
        return out / double(m);
    }

    void finalize_frame() {
        frame_.resize(ambient_dim * ambient_dim, dim());
        for (long k = 0; k < dim(); ++k)
            frame_.col(k) = vec(basis[k]) / std::sqrt(double(ambient_dim));
    }

  private:
    void check_shape(const CMatrix &x) const {
        if (x.rows() != ambient_dim || x.cols() != ambient_dim)
            throw DimensionError("algebra element has wrong ambient size");
    }
    CMatrix frame_;
};

namespace detail {

/// Incrementally grown orthonormal Hermitian basis (normalised HS form).
class HermitianSpan {
  public:
    explicit HermitianSpan(long n) : n_(n) {}

    /// Adds the Hermitian and anti-Hermitian parts of x; returns how many
    /// new directions appeared.
    int add(const CMatrix &x, const Tolerance &tol) {
        int added = 0;
        CMatrix h = (x + x.adjoint()) / 2.0;
        CMatrix k = (x - x.adjoint()) / cplx(0.0, 2.0);
        for (const CMatrix *y : {&h, &k})
            added += add_hermitian(*y, tol);
        return added;
    }

    const std::vector<CMatrix> &basis() const { return basis_; }

  private:
    int add_hermitian(const CMatrix &h, const Tolerance &tol) {
        const double sn = std::sqrt(double(n_));
        CVector v = vec(h) / sn;
        double scale = v.norm();
        if (scale <= tol.abs)
            return 0;
        for (int pass = 0; pass < 2; ++pass)
            for (const auto &q : cols_)
                v -= q * q.dot(v).real();
        double nrm = v.norm();
        if (nrm <= tol.abs + 1e-8 * scale)
            return 0;
        v /= nrm;
        cols_.push_back(v);
        CMatrix b = unvec(v * sn, n_, n_);
        basis_.push_back((b + b.adjoint()) / 2.0);
        return 1;
    }

    long n_;
    std::vector<CVector> cols_;
    std::vector<CMatrix> basis_;
};

/// Eigenvalue clusters (ascending) of a Hermitian matrix.
inline std::vector<std::vector<long>> clusters(const RVector &w) {
    std::vector<std::vector<long>> out;
    double spread = w.size() ? std::max(1.0, w.cwiseAbs().maxCoeff()) : 1.0;
    for (long i = 0; i < w.size(); ++i) {
        if (out.empty() || w(i) - w(out.back().back()) > 1e-6 * spread)
            out.push_back({});
        out.back().push_back(i);
    }
    return out;
}

inline bool lex_greater(const CMatrix &a, const CMatrix &b) {
    for (long i = 0; i < a.rows(); ++i)
        for (long j = 0; j < a.cols(); ++j) {
            double x = a(i, j).real(), y = b(i, j).real();
            if (std::abs(x - y) > 1e-8)
                return x > y;
        }
    for (long i = 0; i < a.rows(); ++i)
        for (long j = 0; j < a.cols(); ++j) {
            double x = a(i, j).imag(), y = b(i, j).imag();
            if (std::abs(x - y) > 1e-8)
                return x > y;
        }
    return false;
}

/// Columns E_{a1} g_s spanning the range of z, for a block of size n with
/// multiplicity m. Returns nullopt for a degenerate draw.
inline std::optional<CMatrix> adapted_columns(const FinDimAlgebra &alg,
                                              const CMatrix &z, long n, long m,
                                              const CMatrix &h_full,
                                              const CMatrix &x_full) {
    const long N = alg.ambient_dim;
    CMatrix q = range_basis(z);
    if (q.cols() != n * m)
        return std::nullopt;
    CMatrix h = q.adjoint() * (z * h_full * z) * q;
    auto [w, v] = hermitian_eigendecomposition(h);
    auto cl = clusters(w);
    if (long(cl.size()) != n)
        return std::nullopt;
    std::vector<CMatrix> proj;
    for (const auto &c : cl) {
        if (long(c.size()) != m)
            return std::nullopt;
        CMatrix vc(q.cols(), m);
        for (long s = 0; s < m; ++s)
            vc.col(s) = v.col(c[s]);
        CMatrix qv = q * vc;
        proj.push_back(qv * qv.adjoint());
    }
    CMatrix g = range_basis(proj[0]);
    if (g.cols() != m)
        return std::nullopt;
    CMatrix x = z * x_full * z;
    CMatrix out(N, n * m);
    for (long a = 0; a < n; ++a) {
        CMatrix e = proj[a] * x * proj[0];
        double c = std::sqrt(std::max(0.0, e.squaredNorm() / double(m)));
        if (c < 1e-6)
            return std::nullopt;
        e /= c;
        out.middleCols(a * m, m) = e * g;
    }
    return out;
}

} // namespace detail

/// Discovers center, minimal central projections, blocks and an adapted
/// unitary for the span of an orthonormal Hermitian basis.
inline FinDimAlgebra discover_structure(std::vector<CMatrix> basis, long n,
                                        const Tolerance &tol = {}) {
    FinDimAlgebra alg;
    alg.ambient_dim = n;
    alg.basis = std::move(basis);
    alg.unit = identity(n);
    alg.finalize_frame();
    const long d = alg.dim();

    // center: coefficients c with sum_k c_k [b_k, b_l] = 0 for all l
    CMatrix K(d * n * n, d);
    for (long k = 0; k < d; ++k)
        for (long l = 0; l < d; ++l) {
            CMatrix c = alg.basis[k] * alg.basis[l] - alg.basis[l] * alg.basis[k];
            K.block(l * n * n, k, n * n, 1) = vec(c);
        }
    CMatrix ker = nullspace_matrix(K, tol);
    detail::HermitianSpan zspan(n);
    for (long i = 0; i < ker.cols(); ++i)
        zspan.add(alg.from_coords(ker.col(i)), tol);
    const auto &center = zspan.basis();
    if (center.empty())
        throw InternalError("discover_structure: empty center");

    Rng rng(kStructureSeed);
    std::vector<CMatrix> zs;
    for (int attempt = 0; attempt < 8 && zs.empty(); ++attempt) {
        CMatrix h = CMatrix::Zero(n, n);
        for (const auto &c : center)
            h += (0.5 + rng.uniform()) * c;
        auto [w, v] = hermitian_eigendecomposition(h);
        auto cl = detail::clusters(w);
        if (cl.size() != center.size())
            continue;
        for (const auto &c : cl) {
            CMatrix vc(n, long(c.size()));
            for (std::size_t s = 0; s < c.size(); ++s)
                vc.col(long(s)) = v.col(c[s]);
            CMatrix z = vc * vc.adjoint();
            zs.push_back((z + z.adjoint()) / 2.0);
        }
    }
    if (zs.empty())
        throw InternalError("discover_structure: degenerate central element");

    struct Entry {
        Block b;
        CMatrix z;
    };
    std::vector<Entry> entries;
    for (const auto &z : zs) {
        double dimz = 0.0;
        for (const auto &b : alg.basis)
            dimz += trace_product(b, z * b).real() / double(n);
        long nj = std::lround(std::sqrt(std::max(0.0, dimz)));
        double rank = z.trace().real();
        if (nj < 1 || std::abs(double(nj * nj) - dimz) > 1e-6)
            throw InternalError("discover_structure: block dimension not square");
        long mj = std::lround(rank / double(nj));
        if (std::abs(rank - double(nj * mj)) > 1e-6)
            throw InternalError("discover_structure: multiplicity not integral");
        entries.push_back({{nj, mj}, z});
    }
    std::stable_sort(entries.begin(), entries.end(),
                     [](const Entry &a, const Entry &b) {
                         if (a.b.n != b.b.n)
                             return a.b.n < b.b.n;
                         return detail::lex_greater(a.z, b.z);
                     });
    long total = 0;
    for (const auto &e : entries) {
        alg.blocks.push_back(e.b);
        alg.min_central_projections.push_back(e.z);
        alg.offsets.push_back(total);
        total += e.b.n * e.b.m;
    }
    if (total != n)
        throw InternalError("discover_structure: algebra is not unital");

    // adapted unitary, deterministic first try then seeded draws
    CMatrix diag = CMatrix::Zero(n, n);
    for (long i = 0; i < n; ++i)
        diag(i, i) = double(i + 1);
    CMatrix h0 = alg.project(diag);
    CMatrix x0 = alg.project(CMatrix::Ones(n, n));
    alg.adapted = CMatrix::Zero(n, n);
    for (long j = 0; j < alg.num_blocks(); ++j) {
        const auto &z = alg.min_central_projections[j];
        auto cols = detail::adapted_columns(alg, z, alg.blocks[j].n,
                                            alg.blocks[j].m, h0, x0);
        for (int attempt = 0; attempt < 8 && !cols; ++attempt) {
            CMatrix h = CMatrix::Zero(n, n), x = CMatrix::Zero(n, n);
            for (const auto &b : alg.basis) {
                h += rng.normal() * b;
                x += rng.complex_normal() * b;
            }
            cols = detail::adapted_columns(alg, z, alg.blocks[j].n,
                                           alg.blocks[j].m, h, x);
        }
        if (!cols)
            throw InternalError("discover_structure: no matrix units found");
        alg.adapted.middleCols(alg.offsets[j], cols->cols()) = *cols;
    }
    if (!is_unitary(alg.adapted, Tolerance{1e-7, 1e-7}))
        throw InternalError("discover_structure: adapted basis not unitary");
    return alg;
}

/// Smallest unital *-subalgebra of M_n containing `mats`.
inline FinDimAlgebra from_generators(const std::vector<CMatrix> &mats, long n,
                                     const Tolerance &tol = {}) {
    for (const auto &m : mats)
        if (m.rows() != n || m.cols() != n)
            throw DimensionError("from_generators: generator has wrong size");
    detail::HermitianSpan span(n);
    span.add(identity(n), tol);
    std::vector<CMatrix> gens;
    for (const auto &m : mats) {
        CMatrix h = (m + m.adjoint()) / 2.0;
        CMatrix k = (m - m.adjoint()) / cplx(0.0, 2.0);
        for (const CMatrix &y : {h, k})
            if (y.norm() > tol.abs)
                gens.push_back(y);
        span.add(m, tol);
    }
    std::size_t done = 0;
    while (done < span.basis().size()) {
        CMatrix b = span.basis()[done++];
        for (const auto &g : gens)
            span.add(g * b, tol);
        if (long(span.basis().size()) > n * n)
            throw InternalError("from_generators: closure did not stabilise");
    }
    return discover_structure(span.basis(), n, tol);
}

/// a (x) b on C^{n_a} (x) C^{n_b}, with structure read off the factors
/// rather than rediscovered.
inline FinDimAlgebra tensor_product(const FinDimAlgebra &a, const FinDimAlgebra &b) {
    FinDimAlgebra out;
    const long n = a.ambient_dim * b.ambient_dim;
    out.ambient_dim = n;
    out.unit = identity(n);
    for (const auto &x : a.basis)
        for (const auto &y : b.basis)
            out.basis.push_back(kron(x, y));
    out.finalize_frame();

    struct Entry {
        Block blk;
        CMatrix z, cols;
    };
    std::vector<Entry> entries;
    for (long i = 0; i < a.num_blocks(); ++i)
        for (long j = 0; j < b.num_blocks(); ++j) {
            const Block &p = a.blocks[i], &q = b.blocks[j];
            Entry e{{p.n * q.n, p.m * q.m}, kron(a.min_central_projections[i],
                                                 b.min_central_projections[j]),
                    CMatrix(n, p.n * q.n * p.m * q.m)};
            // column (alpha, beta; s, t) -> ((alpha n_q + beta) m_p m_q + s m_q + t)
            for (long al = 0; al < p.n; ++al)
                for (long be = 0; be < q.n; ++be)
                    for (long s = 0; s < p.m; ++s)
                        for (long t = 0; t < q.m; ++t)
                            e.cols.col((al * q.n + be) * p.m * q.m + s * q.m + t) =
                                kron(CMatrix(a.adapted.col(a.offsets[i] + al * p.m + s)),
                                     CMatrix(b.adapted.col(b.offsets[j] + be * q.m + t)));
            entries.push_back(std::move(e));
        }
    std::stable_sort(entries.begin(), entries.end(), [](const Entry &x, const Entry &y) {
        if (x.blk.n != y.blk.n)
            return x.blk.n < y.blk.n;
        return detail::lex_greater(x.z, y.z);
    });
    out.adapted = CMatrix::Zero(n, n);
    long total = 0;
    for (const auto &e : entries) {
        out.blocks.push_back(e.blk);
        out.min_central_projections.push_back(e.z);
        out.offsets.push_back(total);
        out.adapted.middleCols(total, e.cols.cols()) = e.cols;
        total += e.cols.cols();
    }
    return out;
}

inline FinDimAlgebra tensor_product(std::initializer_list<FinDimAlgebra> factors) {
    auto it = factors.begin();
    FinDimAlgebra out = *it;
    for (++it; it != factors.end(); ++it)
        out = tensor_product(out, *it);
    return out;
}

/// Subspace of M_n spanned by `mats`, orthonormalised; no closure.
struct Subspace {
    long ambient_dim = 0;
    CMatrix frame; ///< orthonormal columns in vec coordinates

    long dim() const { return frame.cols(); }

    static Subspace span_of(const std::vector<CMatrix> &mats, long n,
                            const Tolerance &tol = {}) {
        std::vector<CVector> cols;
        for (const auto &m : mats) {
            CVector v = vec(m);
            double scale = v.norm();
            for (int pass = 0; pass < 2; ++pass)
                for (const auto &q : cols)
                    v -= q * q.dot(v);
            double nrm = v.norm();
            if (nrm > tol.abs * std::sqrt(double(n)) + 1e-8 * scale)
                cols.push_back(v / nrm);
        }
        Subspace s;
        s.ambient_dim = n;
        s.frame.resize(n * n, long(cols.size()));
        for (std::size_t k = 0; k < cols.size(); ++k)
            s.frame.col(long(k)) = cols[k];
        return s;
    }

    /// Normalised HS distance from x to the subspace.
    double distance(const CMatrix &x) const {
        CVector v = vec(x);
        if (dim() > 0)
            v -= frame * (frame.adjoint() * v);
        return v.norm() / std::sqrt(double(ambient_dim));
    }

    CMatrix project(const CMatrix &x) const {
        return unvec(frame * (frame.adjoint() * vec(x)), ambient_dim,
                     ambient_dim);
    }

    std::vector<CMatrix> elements() const {
        std::vector<CMatrix> out;
        for (long k = 0; k < dim(); ++k)
            out.push_back(unvec(frame.col(k), ambient_dim, ambient_dim));
        return out;
    }
};

inline Subspace as_subspace(const FinDimAlgebra &a) {
    Subspace s;
    s.ambient_dim = a.ambient_dim;
    s.frame = a.frame();
    return s;
}

/// Largest principal angle residual between two spans: the Frobenius
/// distance of their orthogonal projectors.
inline double span_distance(const CMatrix &fa, const CMatrix &fb) {
    // ||Pa - Pb||^2 = ||(1 - Pb) Fa||^2 + ||(1 - Pa) Fb||^2, without forming
    // the projectors
    double a = (fa - fb * (fb.adjoint() * fa)).squaredNorm();
    double b = (fb - fa * (fa.adjoint() * fb)).squaredNorm();
    return std::sqrt(a + b);
}

inline double span_distance(const FinDimAlgebra &a, const FinDimAlgebra &b) {
    return span_distance(a.frame(), b.frame());
}

/// {x in M_n : x b = b x for every basis element b}, by nullspace of the
/// stacked commutator map.
inline FinDimAlgebra commutant(const FinDimAlgebra &a,
                               const Tolerance &tol = {}) {
    const long n = a.ambient_dim;
    CMatrix id = identity(n);
    CMatrix K(a.dim() * n * n, n * n);
    for (long l = 0; l < a.dim(); ++l) {
        const CMatrix &b = a.basis[l];
        K.middleRows(l * n * n, n * n) = kron(b.transpose(), id) - kron(id, b);
    }
    CMatrix ker = nullspace_matrix(K, tol);
    std::vector<CMatrix> mats;
    for (long i = 0; i < ker.cols(); ++i)
        mats.push_back(unvec(ker.col(i), n, n));
    return from_generators(mats, n, tol);
}

/// Commutant read off the adapted unitary: sum of 1_{n_j} (x) M_{m_j}.
/// Scales to ambient sizes where the stacked nullspace is impractical.
inline FinDimAlgebra commutant_structured(const FinDimAlgebra &a) {
    const long n = a.ambient_dim;
    FinDimAlgebra c;
    c.ambient_dim = n;
    c.unit = identity(n);
    c.adapted = CMatrix::Zero(n, n);
    struct Entry {
        Block b;
        CMatrix z;
        long j;
    };
    std::vector<Entry> entries;
    for (long j = 0; j < a.num_blocks(); ++j)
        entries.push_back({{a.blocks[j].m, a.blocks[j].n},
                           a.min_central_projections[j], j});
    std::stable_sort(entries.begin(), entries.end(),
                     [](const Entry &x, const Entry &y) {
                         if (x.b.n != y.b.n)
                             return x.b.n < y.b.n;
                         return detail::lex_greater(x.z, y.z);
                     });
    long off = 0;
    const double sn = std::sqrt(double(n));
    for (const auto &e : entries) {
        const long nj = a.blocks[e.j].n, mj = a.blocks[e.j].m;
        CMatrix cols = a.adapted.middleCols(a.offsets[e.j], nj * mj);
        // reorder (a, s) -> (s, a)
        for (long s = 0; s < mj; ++s)
            for (long k = 0; k < nj; ++k)
                c.adapted.col(off + s * nj + k) = cols.col(k * mj + s);
        c.blocks.push_back(e.b);
        c.min_central_projections.push_back(e.z);
        c.offsets.push_back(off);
        // Hermitian matrix units 1 (x) (e_st + e_ts), i (e_st - e_ts), e_ss
        auto unit_st = [&](long s, long t) {
            CMatrix eu = CMatrix::Zero(mj, mj);
            eu(s, t) = 1.0;
            return CMatrix(cols * kron(identity(nj), eu) * cols.adjoint());
        };
        for (long s = 0; s < mj; ++s)
            for (long t = s; t < mj; ++t) {
                CMatrix est = unit_st(s, t);
                if (s == t) {
                    CMatrix b = est;
                    c.basis.push_back(b * (sn / std::sqrt(double(nj))));
                } else {
                    CMatrix h = est + est.adjoint();
                    CMatrix k = (est - est.adjoint()) * cplx(0.0, 1.0);
                    double nrm = std::sqrt(2.0 * double(nj)) / sn;
                    c.basis.push_back(h / nrm);
                    c.basis.push_back(k / nrm);
                }
            }
        off += nj * mj;
    }
    c.finalize_frame();
    return c;
}

/// Subspace intersection of two algebras in the same ambient.
inline FinDimAlgebra intersect(const FinDimAlgebra &a, const FinDimAlgebra &b,
                               const Tolerance &tol = {}) {
    if (a.ambient_dim != b.ambient_dim)
        throw DimensionError("intersect: ambient dimensions differ");
    const CMatrix &qa = a.frame();
    const CMatrix &qb = b.frame();
    CMatrix K = qa - qb * (qb.adjoint() * qa);
    CMatrix ker = nullspace_matrix(K, tol);
    std::vector<CMatrix> mats;
    for (long i = 0; i < ker.cols(); ++i)
        mats.push_back(unvec(qa * ker.col(i), a.ambient_dim, a.ambient_dim));
    return from_generators(mats, a.ambient_dim, tol);
}

inline FinDimAlgebra center(const FinDimAlgebra &a, const Tolerance &tol = {}) {
    std::vector<CMatrix> zs(a.min_central_projections);
    return from_generators(zs, a.ambient_dim, tol);
}

/// Entrywise conjugate algebra J A J.
inline FinDimAlgebra conjugate(const FinDimAlgebra &a,
                               const Tolerance &tol = {}) {
    std::vector<CMatrix> mats;
    for (const auto &b : a.basis)
        mats.push_back(b.conjugate());
    return discover_structure(hs_gram_schmidt(mats, tol), a.ambient_dim, tol);
}

/**
 * @brief Faithful trace tau(x) = sum_j t_j Tr(z_j x) / m_j.
 *
 * Only the central data of the algebra is kept, so a trace can be installed
 * on an algebra whose basis is never materialised.
 */
struct TraceFunctional {
    std::vector<double> weights;
    std::vector<CMatrix> z;
    std::vector<Block> blocks;
    CMatrix density; ///< D with tau(x) = Tr(D x)

    static TraceFunctional make(std::vector<double> weights,
                                std::vector<CMatrix> z,
                                std::vector<Block> blocks) {
        if (weights.size() != z.size() || z.size() != blocks.size() ||
            z.empty())
            throw DimensionError("TraceFunctional: block data sizes differ");
        TraceFunctional t;
        t.weights = std::move(weights);
        t.z = std::move(z);
        t.blocks = std::move(blocks);
        const long n = t.z[0].rows();
        t.density = CMatrix::Zero(n, n);
        for (std::size_t j = 0; j < t.z.size(); ++j)
            t.density += (t.weights[j] / double(t.blocks[j].m)) * t.z[j];
        return t;
    }

    static TraceFunctional on(const FinDimAlgebra &a,
                              std::vector<double> weights) {
        return make(std::move(weights), a.min_central_projections, a.blocks);
    }

    /// Normalised ambient trace Tr(x)/n restricted to a.
    static TraceFunctional ambient(const FinDimAlgebra &a) {
        std::vector<double> w;
        for (const auto &b : a.blocks)
            w.push_back(double(b.m) / double(a.ambient_dim));
        return on(a, w);
    }

    cplx operator()(const CMatrix &x) const {
        return trace_product(density, x);
    }

    /// <x, y> = tau(y* x)
    InnerProduct inner() const {
        CMatrix d = density;
        return [d](const CMatrix &x, const CMatrix &y) {
            return trace_product(d * y.adjoint(), x);
        };
    }

    double unit_value() const {
        double s = 0.0;
        for (std::size_t j = 0; j < weights.size(); ++j)
            s += weights[j] * double(blocks[j].n);
        return s;
    }

    bool faithful() const {
        return std::all_of(weights.begin(), weights.end(),
                           [](double w) { return w > 0.0; });
    }
};

/// Self-adjoint basis orthonormal for tau(y* x).
inline std::vector<CMatrix> tau_orthonormal_basis(const FinDimAlgebra &a,
                                                  const TraceFunctional &tau,
                                                  const Tolerance &tol = {}) {
    auto out = hs_gram_schmidt(a.basis, tau.inner(), tol);
    for (auto &b : out)
        b = (b + b.adjoint()) / 2.0;
    return out;
}

/// Element of a spanned by a random complex combination of its basis.
inline CMatrix random_element(const FinDimAlgebra &a, Rng &rng) {
    CMatrix x = CMatrix::Zero(a.ambient_dim, a.ambient_dim);
    for (const auto &b : a.basis)
        x += rng.complex_normal() * b;
    return x;
}

} // namespace jtele
