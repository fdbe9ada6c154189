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

#include <catch_amalgamated.hpp>

#include "jtele/linalg.hpp"
#include "test_util.hpp"

using namespace jtele;
using namespace jtele::testing;

TEST_CASE("kron follows the row-major convention", "[linalg]") {
    CHECK(near(kron(identity(2), identity(3)), identity(6)));
    CMatrix p = CMatrix::Zero(2, 2);
    p(0, 0) = 1.0;
    CMatrix expected = CMatrix::Zero(4, 4);
    expected(0, 0) = expected(1, 1) = 1.0;
    CHECK(near(kron(p, identity(2)), expected));

    CVector ket00 = CVector::Zero(4), ket11 = CVector::Zero(4);
    ket00(0) = 1.0;
    ket11(3) = 1.0;
    CHECK((kron(pauli_x(), pauli_x()) * ket00 - ket11).norm() < 1e-15);

    // index (i, j) -> i * dim_b + j
    CMatrix a = CMatrix::Zero(2, 2), b = CMatrix::Zero(3, 3);
    a(1, 0) = 1.0;
    b(2, 1) = 1.0;
    CMatrix k = kron(a, b);
    CHECK(k(1 * 3 + 2, 0 * 3 + 1) == cplx(1.0));
    CHECK(k.cwiseAbs().sum() == 1.0);
}

TEST_CASE("kron is associative and obeys the mixed-product law", "[linalg][property]") {
    Rng rng(7);
    for (int trial = 0; trial < 10; ++trial) {
        CMatrix a = rng.ginibre(2, 2), b = rng.ginibre(3, 3), c = rng.ginibre(2, 2);
        CMatrix d = rng.ginibre(3, 3);
        CHECK((kron(kron(a, b), c) - kron(a, kron(b, c))).norm() < 1e-9);
        CHECK((kron(a, b) * kron(c, d) - kron(a * c, b * d)).norm() < 1e-9);
    }
}

TEST_CASE("partial_trace on hand-expanded inputs", "[linalg]") {
    CMatrix psi = bell_projector(2);
    CHECK(near(partial_trace(psi, {2, 2}, {2}, false), identity(2) / 2.0));
    CHECK(near(partial_trace(identity(4), {2, 2}, {1}, true), identity(2)));
    CHECK_THROWS_AS(partial_trace(identity(4), {2, 3}, {1}, true), DimensionError);
    CHECK_THROWS_AS(partial_trace(identity(4), {2, 2}, {3}, true), DimensionError);
}

TEST_CASE("partial_trace factorises on product inputs", "[linalg][property]") {
    Rng rng(11);
    for (int trial = 0; trial < 10; ++trial) {
        CMatrix a = rng.ginibre(2, 2), b = rng.ginibre(3, 3), c = rng.ginibre(2, 2);
        CMatrix x = kron({a, b, c});
        CHECK(near(partial_trace(x, {2, 3, 2}, {2}, true),
                   kron(a, c) * (b.trace() / 3.0)));
        CHECK(near(partial_trace(x, {2, 3, 2}, {1, 3}, false),
                   b * (a.trace() * c.trace())));
        CHECK(near(partial_trace(x, {2, 3, 2}, {}, false), x));
        CMatrix full = partial_trace(x, {2, 3, 2}, {1, 2, 3}, false);
        CHECK(std::abs(full(0, 0) - x.trace()) < 1e-9);
    }
}

TEST_CASE("hs_gram_schmidt", "[linalg]") {
    auto out = hs_gram_schmidt({identity(2), pauli_x()});
    REQUIRE(out.size() == 2);
    CHECK(near(out[0], identity(2)));
    CHECK(near(out[1], pauli_x()));

    out = hs_gram_schmidt({identity(2), CMatrix(identity(2) + pauli_x())});
    REQUIRE(out.size() == 2);
    CHECK(near(out[1], pauli_x()));

    out = hs_gram_schmidt({identity(2), CMatrix(2.0 * identity(2))});
    CHECK(out.size() == 1);
}

TEST_CASE("hs_gram_schmidt output is orthonormal with the same span", "[linalg][property]") {
    Rng rng(3);
    std::vector<CMatrix> vs;
    for (int i = 0; i < 6; ++i)
        vs.push_back(rng.ginibre(3, 3));
    vs.push_back(vs[0] + 2.0 * vs[1]);
    auto ip = normalised_hs();
    auto out = hs_gram_schmidt(vs, ip);
    REQUIRE(out.size() == 6);
    for (std::size_t i = 0; i < out.size(); ++i)
        for (std::size_t j = 0; j < out.size(); ++j)
            CHECK(std::abs(ip(out[i], out[j]) - (i == j ? 1.0 : 0.0)) < 1e-9);
    auto frame = [](const std::vector<CMatrix> &ms) {
        CMatrix f(ms[0].size(), long(ms.size()));
        for (std::size_t k = 0; k < ms.size(); ++k)
            f.col(long(k)) = vec(ms[k]);
        return f;
    };
    CMatrix fo = frame(out);
    CMatrix fi = frame(vs);
    // every input lies in the output span
    CMatrix resid = fi - fo * (fo.adjoint() * fi) / 3.0;
    CHECK(resid.norm() < 1e-9);
}

TEST_CASE("nullspace", "[linalg]") {
    CHECK(nullspace(identity(2)).empty());
    CHECK(nullspace(CMatrix::Zero(2, 2)).size() == 2);
    CMatrix p = CMatrix::Zero(2, 2);
    p(0, 0) = 1.0;
    auto ns = nullspace(p);
    REQUIRE(ns.size() == 1);
    CHECK(std::abs(std::abs(ns[0](1)) - 1.0) < 1e-12);
    CHECK(std::abs(ns[0](0)) < 1e-12);
    // wide input
    CMatrix w = CMatrix::Zero(1, 3);
    w(0, 0) = 1.0;
    CHECK(nullspace(w).size() == 2);
}

TEST_CASE("pf_eigenvector", "[linalg]") {
    RMatrix a(1, 1);
    a << 3.0;
    auto [l1, v1] = pf_eigenvector(a);
    CHECK(l1 == 3.0);
    CHECK(v1(0) == 1.0);

    RMatrix lam(1, 2);
    lam << 1, 1;
    auto [l2, v2] = pf_eigenvector(lam.transpose() * lam);
    CHECK(std::abs(l2 - 2.0) < 1e-12);
    CHECK(std::abs(v2(0) - 0.5) < 1e-12);

    RMatrix red = RMatrix::Identity(2, 2);
    CHECK_THROWS_AS(pf_eigenvector(red), ConnectednessError);
}

TEST_CASE("pf_eigenvector residual on random irreducible input", "[linalg][property]") {
    Rng rng(5);
    for (int trial = 0; trial < 10; ++trial) {
        RMatrix a(4, 4);
        for (long i = 0; i < 4; ++i)
            for (long j = 0; j < 4; ++j)
                a(i, j) = rng.uniform() + 0.01;
        auto [l, v] = pf_eigenvector(a);
        CHECK((a * v - l * v).norm() < 1e-9);
        CHECK((v.array() > 0).all());
        CHECK(std::abs(v.sum() - 1.0) < 1e-12);
    }
}

TEST_CASE("plumbing predicates and decompositions", "[linalg][property]") {
    Rng rng(9);
    for (int trial = 0; trial < 10; ++trial) {
        CMatrix g = rng.ginibre(4, 4);
        CMatrix p = g * g.adjoint();
        CMatrix s = matrix_sqrt(p);
        CHECK((s * s - p).norm() < 1e-9 * std::max(1.0, p.norm()));
        CHECK(is_psd(p));
        CMatrix u = polar_unitary(g);
        CHECK(is_unitary(u));
        CHECK(is_hermitian(random_hermitian(3, rng)));
        CMatrix rho = random_density(3, rng);
        CHECK(is_psd(rho));
        CHECK(std::abs(rho.trace() - 1.0) < 1e-12);
    }
    CHECK(is_projection(bell_projector(3)));
    CHECK_FALSE(is_projection(2.0 * identity(2)));
    CHECK_FALSE(is_psd(-identity(2)));
    CHECK_THROWS_AS(matrix_sqrt(-identity(2)), PreconditionError);
    CHECK(frobenius_distance(identity(2), identity(2)) == 0.0);
}

TEST_CASE("seeded generators are deterministic", "[linalg][property]") {
    Rng a(42), b(42);
    CHECK(random_hermitian(3, a) == random_hermitian(3, b));
    CHECK(random_density(3, a) == random_density(3, b));
}

TEST_CASE("leg_permutation moves tensor legs", "[linalg][property]") {
    Rng rng(7);
    const CMatrix a = rng.ginibre(2, 2), b = rng.ginibre(3, 3), c = rng.ginibre(2, 2);
    const CMatrix s = leg_permutation({2, 3, 2}, {2, 0, 1});
    CHECK(is_unitary(s, Tolerance{}));
    CHECK(frobenius_distance(s * kron({a, b, c}) * dagger(s), kron({c, a, b})) < 1e-12);
    CHECK(frobenius_distance(leg_permutation({3, 4}, {0, 1}), identity(12)) < 1e-15);
    CHECK_THROWS_AS(leg_permutation({2, 2}, {0, 0}), DimensionError);
}
