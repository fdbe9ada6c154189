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

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <numeric>
#include <random>
#include <set>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/KroneckerProduct>

#include "errors.hpp"

namespace jtele {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;

/// @brief Absolute and relative thresholds on Frobenius norms.
struct Tolerance {
    double abs = 1e-9;
    double rel = 1e-9;

    /// True when a residual is negligible next to a quantity of size `scale`.
    bool accepts(double residual, double scale = 0.0) const {
        return residual <= abs + rel * scale;
    }
};

inline constexpr double kPi = 3.14159265358979323846;

inline CMatrix identity(long n) { return CMatrix::Identity(n, n); }

inline CMatrix dagger(const CMatrix &a) { return a.adjoint(); }

/// Row-major Kronecker product: index (i, j) maps to i * dim(b) + j.
inline CMatrix kron(const CMatrix &a, const CMatrix &b) {
    return Eigen::kroneckerProduct(a, b).eval();
}

inline CMatrix kron(std::initializer_list<CMatrix> factors) {
    CMatrix out = CMatrix::Identity(1, 1);
    for (const auto &f : factors)
        out = kron(out, f);
    return out;
}

inline double frobenius_distance(const CMatrix &a, const CMatrix &b) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw DimensionError("frobenius_distance: shape mismatch");
    return (a - b).norm();
}

/// Unnormalised trace of x * y without forming the product.
inline cplx trace_product(const CMatrix &x, const CMatrix &y) {
    return (x.transpose().array() * y.array()).sum();
}

/// Partial trace over the 1-based `legs` of a square matrix on the
/// tensor product of spaces with dimensions `dims`.
inline CMatrix partial_trace(const CMatrix &x, const std::vector<long> &dims,
                             const std::set<int> &legs, bool normalise) {
    long total = 1;
    for (long d : dims) {
        if (d <= 0)
            throw DimensionError("partial_trace: non-positive leg dimension");
        total *= d;
    }
    if (x.rows() != x.cols() || x.rows() != total)
        throw DimensionError("partial_trace: dims do not match matrix size");
    const int k = static_cast<int>(dims.size());
    for (int l : legs)
        if (l < 1 || l > k)
            throw DimensionError("partial_trace: leg index out of range");

    std::vector<int> kept;
    long kept_dim = 1, traced_dim = 1;
    for (int i = 0; i < k; ++i) {
        if (legs.count(i + 1)) {
            traced_dim *= dims[i];
        } else {
            kept.push_back(i);
            kept_dim *= dims[i];
        }
    }
    // strides of each leg in the row-major flat index
    std::vector<long> stride(k, 1);
    for (int i = k - 2; i >= 0; --i)
        stride[i] = stride[i + 1] * dims[i + 1];

    auto split = [&](long flat, std::vector<long> &digits) {
        for (int i = 0; i < k; ++i) {
            digits[i] = flat / stride[i];
            flat %= stride[i];
        }
    };

    CMatrix out = CMatrix::Zero(kept_dim, kept_dim);
    std::vector<long> di(k), dj(k);
    for (long i = 0; i < total; ++i) {
        split(i, di);
        for (long j = 0; j < total; ++j) {
            split(j, dj);
            bool diag = true;
            for (int l : legs)
                if (di[l - 1] != dj[l - 1]) {
                    diag = false;
                    break;
                }
            if (!diag)
                continue;
            long r = 0, c = 0;
            for (int l : kept) {
                r = r * dims[l] + di[l];
                c = c * dims[l] + dj[l];
            }
            out(r, c) += x(i, j);
        }
    }
    if (normalise)
        out /= static_cast<double>(traced_dim);
    return out;
}

/// Sesquilinear form <x, y>; the Gram-Schmidt routine expects tau(y* x).
using InnerProduct = std::function<cplx(const CMatrix &, const CMatrix &)>;

/// <x, y> = Tr(y* x) / n, the normalised Hilbert-Schmidt form.
inline InnerProduct normalised_hs() {
    return [](const CMatrix &x, const CMatrix &y) {
        return trace_product(y.adjoint(), x) / static_cast<double>(x.rows());
    };
}

/// Orthonormalise `vs` for `ip`. Vectors whose residual norm falls below
/// tol.abs are dropped. Two passes of modified Gram-Schmidt.
inline std::vector<CMatrix> hs_gram_schmidt(const std::vector<CMatrix> &vs,
                                            const InnerProduct &ip,
                                            const Tolerance &tol = {}) {
    std::vector<CMatrix> out;
    for (const auto &v0 : vs) {
        CMatrix v = v0;
        double scale = std::sqrt(std::max(0.0, ip(v, v).real()));
        for (int pass = 0; pass < 2; ++pass)
            for (const auto &q : out)
                v -= ip(v, q) * q;
        double nrm = std::sqrt(std::max(0.0, ip(v, v).real()));
        if (nrm <= tol.abs + tol.rel * scale || nrm < 1e-7 * scale)
            continue;
        out.push_back(v / nrm);
    }
    return out;
}

inline std::vector<CMatrix> hs_gram_schmidt(const std::vector<CMatrix> &vs,
                                            const Tolerance &tol = {}) {
    return hs_gram_schmidt(vs, normalised_hs(), tol);
}

/// Orthonormal basis of the kernel, as columns of the returned matrix.
inline CMatrix nullspace_matrix(const CMatrix &a, const Tolerance &tol = {}) {
    const long n = a.cols();
    if (n == 0)
        return CMatrix(0, 0);
    if (a.rows() == 0)
        return CMatrix::Identity(n, n);
    Eigen::BDCSVD<CMatrix> svd(a, Eigen::ComputeFullV);
    const auto &s = svd.singularValues();
    double smax = s.size() ? s(0) : 0.0;
    double thr = tol.abs + tol.rel * smax;
    long rank = 0;
    for (long i = 0; i < s.size(); ++i)
        if (s(i) > thr)
            ++rank;
    return svd.matrixV().rightCols(n - rank);
}

inline std::vector<CVector> nullspace(const CMatrix &a,
                                      const Tolerance &tol = {}) {
    CMatrix k = nullspace_matrix(a, tol);
    std::vector<CVector> out;
    for (long i = 0; i < k.cols(); ++i)
        out.push_back(k.col(i));
    return out;
}

/// Numerical rank via singular values.
inline long matrix_rank(const CMatrix &a, const Tolerance &tol = {}) {
    if (a.size() == 0)
        return 0;
    Eigen::BDCSVD<CMatrix> svd(a);
    const auto &s = svd.singularValues();
    double thr = tol.abs + tol.rel * s(0);
    long r = 0;
    for (long i = 0; i < s.size(); ++i)
        if (s(i) > thr)
            ++r;
    return r;
}

/// Perron-Frobenius data of an entrywise nonnegative irreducible matrix.
inline std::pair<double, RVector> pf_eigenvector(const RMatrix &a) {
    const long n = a.rows();
    if (n == 0 || a.cols() != n)
        throw DimensionError("pf_eigenvector: matrix must be square, nonempty");
    if ((a.array() < 0).any())
        throw PreconditionError("pf_eigenvector: negative entry");
    // strong connectivity of the support graph
    auto reach = [&](bool transpose) {
        std::vector<char> seen(n, 0);
        std::vector<long> stack{0};
        seen[0] = 1;
        while (!stack.empty()) {
            long i = stack.back();
            stack.pop_back();
            for (long j = 0; j < n; ++j) {
                double w = transpose ? a(j, i) : a(i, j);
                if (w > 0 && !seen[j]) {
                    seen[j] = 1;
                    stack.push_back(j);
                }
            }
        }
        return std::all_of(seen.begin(), seen.end(), [](char c) { return c; });
    };
    if (n > 1 && !(reach(false) && reach(true)))
        throw ConnectednessError("pf_eigenvector: matrix is reducible");
    if (n == 1)
        return {a(0, 0), RVector::Ones(1)};

    Eigen::EigenSolver<RMatrix> es(a);
    long best = 0;
    for (long i = 1; i < n; ++i)
        if (es.eigenvalues()(i).real() > es.eigenvalues()(best).real())
            best = i;
    RVector v = es.eigenvectors().col(best).real().cwiseAbs();
    v /= v.sum();
    return {es.eigenvalues()(best).real(), v};
}

/// Eigenvalues ascending with orthonormal eigenvectors as columns.
inline std::pair<RVector, CMatrix>
hermitian_eigendecomposition(const CMatrix &h) {
    CMatrix sym = (h + h.adjoint()) / 2.0;
    Eigen::SelfAdjointEigenSolver<CMatrix> es(sym);
    return {es.eigenvalues(), es.eigenvectors()};
}

inline CMatrix matrix_sqrt(const CMatrix &p, const Tolerance &tol = {}) {
    auto [w, v] = hermitian_eigendecomposition(p);
    double scale = std::max(1.0, w.cwiseAbs().maxCoeff());
    for (long i = 0; i < w.size(); ++i) {
        if (w(i) < -(tol.abs + tol.rel * scale))
            throw PreconditionError("matrix_sqrt: input is not PSD");
        w(i) = std::sqrt(std::max(0.0, w(i)));
    }
    return v * w.cast<cplx>().asDiagonal() * v.adjoint();
}

/// Unitary factor of the polar decomposition a = u |a|.
inline CMatrix polar_unitary(const CMatrix &a) {
    if (a.rows() != a.cols())
        throw DimensionError("polar_unitary: matrix must be square");
    Eigen::JacobiSVD<CMatrix> svd(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
    return svd.matrixU() * svd.matrixV().adjoint();
}

inline bool is_hermitian(const CMatrix &a, const Tolerance &tol = {}) {
    return a.rows() == a.cols() &&
           tol.accepts((a - a.adjoint()).norm(), a.norm());
}

inline bool is_projection(const CMatrix &p, const Tolerance &tol = {}) {
    return is_hermitian(p, tol) && tol.accepts((p * p - p).norm(), p.norm());
}

inline bool is_unitary(const CMatrix &u, const Tolerance &tol = {}) {
    if (u.rows() != u.cols())
        return false;
    CMatrix id = identity(u.rows());
    return tol.accepts((u.adjoint() * u - id).norm(), id.norm()) &&
           tol.accepts((u * u.adjoint() - id).norm(), id.norm());
}

inline bool is_psd(const CMatrix &p, const Tolerance &tol = {}) {
    if (!is_hermitian(p, tol))
        return false;
    auto w = hermitian_eigendecomposition(p).first;
    return w.size() == 0 || w.minCoeff() >= -(tol.abs + tol.rel * p.norm());
}

/// Seeded source for the random generators below.
class Rng {
  public:
    explicit Rng(std::uint64_t seed = 42) : gen_(seed) {}

    double normal() { return normal_(gen_); }
    double uniform() { return uniform_(gen_); }
    cplx complex_normal() {
        double re = normal();
        double im = normal();
        return {re, im};
    }

    CMatrix ginibre(long rows, long cols) {
        CMatrix g(rows, cols);
        for (long i = 0; i < rows; ++i)
            for (long j = 0; j < cols; ++j)
                g(i, j) = complex_normal();
        return g;
    }

    std::mt19937_64 &engine() { return gen_; }

  private:
    std::mt19937_64 gen_;
    std::normal_distribution<double> normal_{0.0, 1.0};
    std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

inline CMatrix random_hermitian(long n, Rng &rng) {
    CMatrix g = rng.ginibre(n, n);
    return (g + g.adjoint()) / 2.0;
}

/// Random density matrix with unit unnormalised trace.
inline CMatrix random_density(long n, Rng &rng) {
    CMatrix g = rng.ginibre(n, n);
    CMatrix p = g * g.adjoint();
    return p / p.trace().real();
}

inline CMatrix random_unitary(long n, Rng &rng) {
    return polar_unitary(rng.ginibre(n, n));
}

/// Permutation unitary sending v_0 (x) ... (x) v_{k-1} to
/// v_{perm[0]} (x) ... (x) v_{perm[k-1]}.
inline CMatrix leg_permutation(const std::vector<long> &dims, const std::vector<int> &perm) {
    const int k = static_cast<int>(dims.size());
    if (static_cast<int>(perm.size()) != k)
        throw DimensionError("leg_permutation: perm has wrong length");
    std::vector<bool> seen(k, false);
    for (int p : perm) {
        if (p < 0 || p >= k || seen[p])
            throw DimensionError("leg_permutation: not a permutation");
        seen[p] = true;
    }
    long total = 1;
    for (long d : dims)
        total *= d;
    std::vector<long> out_dims(k);
    for (int t = 0; t < k; ++t)
        out_dims[t] = dims[perm[t]];
    CMatrix u = CMatrix::Zero(total, total);
    std::vector<long> idx(k, 0);
    for (long src = 0; src < total; ++src) {
        long rest = src;
        for (int t = k - 1; t >= 0; --t) {
            idx[t] = rest % dims[t];
            rest /= dims[t];
        }
        long dst = 0;
        for (int t = 0; t < k; ++t)
            dst = dst * out_dims[t] + idx[perm[t]];
        u(dst, src) = 1.0;
    }
    return u;
}

/// Column-major vectorisation, the layout Eigen stores.
inline CVector vec(const CMatrix &x) {
    return Eigen::Map<const CVector>(x.data(), x.size());
}

inline CMatrix unvec(const CVector &v, long rows, long cols) {
    return Eigen::Map<const CMatrix>(v.data(), rows, cols);
}

/// Orthonormal basis (columns) of the range of a projection, taken by
/// Gram-Schmidt on its columns in order so diagonal projections give
/// standard basis vectors.
inline CMatrix range_basis(const CMatrix &p, const Tolerance &tol = {}) {
    std::vector<CVector> cols;
    for (long j = 0; j < p.cols(); ++j) {
        CVector v = p.col(j);
        double scale = v.norm();
        for (int pass = 0; pass < 2; ++pass)
            for (const auto &q : cols)
                v -= q.dot(v) * q;
        double nrm = v.norm();
        if (nrm > std::max(tol.abs, 1e-7 * std::max(scale, 1.0)))
            cols.push_back(v / nrm);
    }
    CMatrix out(p.rows(), static_cast<long>(cols.size()));
    for (std::size_t j = 0; j < cols.size(); ++j)
        out.col(static_cast<long>(j)) = cols[j];
    return out;
}

} // namespace jtele
