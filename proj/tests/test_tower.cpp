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

#include <catch2/catch_amalgamated.hpp>

#include "jtele/tower.hpp"
#include "test_util.hpp"

using namespace jtele;
using namespace jtele::testing;

namespace {

Inclusion scalars_in_full(long n) {
    return make_inclusion(share(scalars(n)), share(full_matrix_algebra(n)));
}

Inclusion diagonal_in_full(long n) {
    return make_inclusion(share(diagonal_algebra(n)), share(full_matrix_algebra(n)));
}

Inclusion two_blocks_in_m4() {
    return make_inclusion(share(block_diagonal({{2, 1}, {2, 1}})),
                          share(full_matrix_algebra(4)));
}

Inclusion scalars_in_c_plus_m2() {
    return make_inclusion(share(scalars(3)), share(block_diagonal({{1, 1}, {2, 1}})));
}

// Isometry L^2(M_n, Tr/n) -> C^n (x) C^n, x -> n^{-1/2} sum x_ij |ij>.
CMatrix tensor_picture(const std::vector<CMatrix> &basis, long n) {
    CMatrix v(n * n, long(basis.size()));
    for (std::size_t k = 0; k < basis.size(); ++k)
        v.col(long(k)) = vec(CMatrix(basis[k].transpose())) / std::sqrt(double(n));
    return v;
}

void require_report(const Report &r) {
    for (const auto &c : r.checks) {
        INFO(c.name << " residual " << c.residual);
        CHECK(c.pass);
    }
}

} // namespace

TEST_CASE("gns inner product matches the trace", "[tower][gns]") {
    auto inc = scalars_in_c_plus_m2();
    auto g = build_gns(*inc.big, inc.tau);
    REQUIRE(g.dim() == 5);
    Rng rng(42);
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
        CMatrix x = random_element(*inc.big, rng), y = random_element(*inc.big, rng);
        cplx lhs = g.lambda(y).dot(g.lambda(x));
        cplx rhs = inc.tau(y.adjoint() * x);
        worst = std::max(worst, std::abs(lhs - rhs));
    }
    CHECK(worst < 1e-9);
}

TEST_CASE("gns unit vector is maximally entangled", "[tower][gns]") {
    for (long n : {2, 3}) {
        auto inc = scalars_in_full(n);
        auto g = build_gns(*inc.big, inc.tau);
        CMatrix v = tensor_picture(g.basis, n);
        REQUIRE(is_unitary(v));
        CHECK((v * g.unit_vector() - max_entangled(n)).norm() < 1e-12);
    }
}

TEST_CASE("gns representations", "[tower][gns]") {
    auto inc = two_blocks_in_m4();
    auto g = build_gns(*inc.big, inc.tau);
    Rng rng(7);
    for (int i = 0; i < 5; ++i) {
        CMatrix x = random_element(*inc.big, rng), y = random_element(*inc.big, rng);
        CHECK((g.pi_left(x) * g.unit_vector() - g.lambda(x)).norm() < 1e-9);
        CHECK((g.pi_right(x) * g.unit_vector() - g.lambda(x)).norm() < 1e-9);
        CHECK(near(g.pi_left(x * y), g.pi_left(x) * g.pi_left(y)));
        CHECK(near(g.pi_right(x * y), g.pi_right(y) * g.pi_right(x)));
        CHECK(near(g.pi_left(x.adjoint()), g.pi_left(x).adjoint()));
        CHECK(near(g.pi_right(x), GnsSpace::J(g.pi_left(x).adjoint())));
    }
    CHECK(near(g.pi_left(identity(4)), identity(16)));

    std::vector<CMatrix> left, right;
    for (const auto &b : inc.big->basis) {
        left.push_back(g.pi_left(b));
        right.push_back(g.pi_right(b));
    }
    auto lalg = from_generators(left, 16);
    auto ralg = from_generators(right, 16);
    CHECK(span_distance(commutant(lalg), ralg) < 1e-8);
}

TEST_CASE("gns rejects a degenerate trace", "[tower][gns]") {
    auto m = block_diagonal({{1, 1}, {1, 1}});
    auto tau = TraceFunctional::on(m, {1.0, 0.0});
    CHECK_THROWS_AS(build_gns(m, tau), TraceError);
}

TEST_CASE("jones projection examples", "[tower][jones]") {
    for (long n : {2, 3}) {
        auto inc = scalars_in_full(n);
        auto g = build_gns(*inc.big, inc.tau);
        CMatrix e = jones_projection(g, *inc.small);
        CMatrix v = tensor_picture(g.basis, n);
        CHECK(near(v * e * v.adjoint(), bell_projector(n), 1e-12));
    }
    {
        auto m = full_matrix_algebra(3);
        auto g = build_gns(m, TraceFunctional::ambient(m));
        CHECK(near(jones_projection(g, m), identity(9)));
    }
    auto inc = diagonal_in_full(2);
    auto g = build_gns(*inc.big, inc.tau);
    CMatrix e = jones_projection(g, *inc.small);
    CHECK(is_projection(e));
    CHECK(std::abs(e.trace() - cplx(2.0)) < 1e-12);
    Rng rng(3);
    CMatrix x = random_element(*inc.big, rng);
    CMatrix d = x.diagonal().asDiagonal();
    CHECK((e * g.lambda(x) - g.lambda(d)).norm() < 1e-12);
    CHECK(near(inc.expect(x), d));
}

TEST_CASE("basic construction dimensions", "[tower][basic]") {
    for (long n : {2, 3}) {
        auto t = basic_construction(scalars_in_full(n));
        CHECK(t.m1->dim() == n * n * n * n);
        REQUIRE(t.m1->num_blocks() == 1);
        CHECK(t.m1->blocks[0].n == n * n);
        CHECK(t.tr1.unit_value() == Catch::Approx(double(n * n)));
    }
    auto t = basic_construction(diagonal_in_full(2));
    CHECK(t.m1->dim() == 8);
    CHECK(t.index_value == Catch::Approx(2.0));
    CHECK(lambda_norm_sq(inclusion_matrix(*t.m_rep, *t.m1)) == Catch::Approx(2.0));
    for (const auto &b : t.gns.basis)
        CHECK(std::abs(t.tau1(t.pi(b)) - t.inc.tau(b)) < 1e-12);
    CHECK(t.tr1_residual < 1e-12);
    CHECK(t.tr1_crosscheck < 1e-12);
}

TEST_CASE("basic construction rejects a non-Markov trace", "[tower][basic]") {
    auto m = share(block_diagonal({{1, 1}, {2, 1}}));
    auto tau = TraceFunctional::on(*m, {0.5, 0.25});
    auto inc = make_inclusion(share(scalars(3)), m, tau);
    CHECK_FALSE(inc.markov());
    CHECK_THROWS_AS(basic_construction(inc), MarkovError);
}

TEST_CASE("second jones projection in the tensor picture", "[tower][iterate]") {
    for (long n : {2, 3}) {
        auto t = build_tower(scalars_in_full(n));
        CMatrix v = tensor_picture(t.gns.basis, n);
        // L^2(M_1) -> (C^n)^{(x)4}, legs (i, k, j, l) from |ik><jl|
        const long d = n * n;
        CMatrix v1(d * d, t.gns1.dim());
        for (long k = 0; k < t.gns1.dim(); ++k) {
            CMatrix c = v * t.gns1.basis[k] * v.adjoint();
            v1.col(k) = vec(CMatrix(c.transpose())) / double(n);
        }
        REQUIRE(is_unitary(v1, Tolerance{1e-9, 1e-9}));
        // span of |i k j k> summed over k, for each (i, j)
        CMatrix expected = CMatrix::Zero(d * d, d * d);
        for (long i = 0; i < n; ++i)
            for (long j = 0; j < n; ++j) {
                CVector w = CVector::Zero(d * d);
                for (long k = 0; k < n; ++k)
                    w(((i * n + k) * n + j) * n + k) = 1.0 / std::sqrt(double(n));
                expected += w * w.adjoint();
            }
        CHECK(near(v1 * t.e_M * v1.adjoint(), expected, 1e-10));
        CHECK(std::abs(t.tau2(t.e_M) - 1.0 / double(n * n)) < 1e-12);
    }
}

TEST_CASE("canonical shift", "[tower][iterate]") {
    auto t = build_tower(diagonal_in_full(3));
    CHECK(near(t.shift(identity(3)), identity(t.gns1.dim())));
    Rng rng(11);
    for (int i = 0; i < 5; ++i) {
        CMatrix x = random_element(*t.relative, rng), y = random_element(*t.relative, rng);
        CHECK(near(t.shift(x * y), t.shift(x) * t.shift(y)));
        CHECK(near(t.shift(x.adjoint()), t.shift(x).adjoint()));
    }
}

TEST_CASE("gamma maps are anti-multiplicative", "[tower][iterate]") {
    auto t = build_tower(two_blocks_in_m4());
    Rng rng(5);
    for (int i = 0; i < 5; ++i) {
        CMatrix x = random_element(*t.inc.big, rng), y = random_element(*t.inc.big, rng);
        CHECK(near(t.gamma0(x * y), t.gamma0(y) * t.gamma0(x), 1e-8));
        CHECK(near(t.gamma0(x.adjoint()), t.gamma0(x).adjoint(), 1e-8));
        CMatrix a = random_element(*t.m1, rng), b = random_element(*t.m1, rng);
        CHECK(near(t.gamma1(a * b), t.gamma1(b) * t.gamma1(a), 1e-8));
    }
}

TEST_CASE("tower identities", "[tower][verify]") {
    std::vector<std::pair<std::string, Inclusion>> cases{
        {"C in M2", scalars_in_full(2)},
        {"C in M3", scalars_in_full(3)},
        {"l2 in M2", diagonal_in_full(2)},
        {"l3 in M3", diagonal_in_full(3)},
        {"M2+M2 in M4", two_blocks_in_m4()},
        {"C in C+M2", scalars_in_c_plus_m2()},
    };
    for (const auto &[name, inc] : cases) {
        INFO(name);
        auto t = build_tower(inc);
        require_report(verify_tower(t));
        require_report(verify_epr(t));
    }
}

TEST_CASE("M2 two ways", "[tower][m2]") {
    for (auto inc : {scalars_in_full(2), diagonal_in_full(2)}) {
        auto t = build_tower(inc);
        auto a = m2_by_commutant(t);
        auto b = m2_by_closure(t);
        CHECK(a.dim() == b.dim());
        CHECK(span_distance(a, b) < 1e-8);
        CHECK(a.contains(t.e_M));
        long dim = 0;
        for (const auto &blk : t.tau2.blocks)
            dim += blk.n * blk.n;
        CHECK(a.dim() == dim);
    }
}

TEST_CASE("epr correlation for the flip", "[tower][epr]") {
    auto t = build_tower(scalars_in_full(2));
    CMatrix x = pauli_x();
    CHECK((t.pi(x) * t.e_N - t.gamma0(x) * t.e_N).norm() < 1e-12);
    CHECK((t.pi_r(x) * t.e_N - t.gamma0(x) * t.e_N).norm() < 1e-12);
    CMatrix v = tensor_picture(t.gns.basis, 2);
    CVector psi = max_entangled(2);
    CHECK((kron(x, identity(2)) * psi - kron(identity(2), x.transpose()) * psi).norm() < 1e-12);
    CHECK(near(v * t.pi(x) * v.adjoint(), kron(x, identity(2)), 1e-12));
    CHECK(near(v * t.gamma0(x) * v.adjoint(), kron(identity(2), x.transpose()), 1e-12));

    auto s = build_tower(diagonal_in_full(2));
    CMatrix z = pauli_z();
    CHECK((s.pi(z) * s.e_N - s.gamma0(z) * s.e_N).norm() < 1e-9);
    CMatrix en = s.e_N1;
    CHECK((en * s.pi1(s.pi(z)) * s.e_M - en * s.shift(z) * s.e_M).norm() < 1e-9);
}

TEST_CASE("unit makes the correlation identities exact", "[tower][epr]") {
    auto t = build_tower(diagonal_in_full(2));
    CMatrix one = identity(2);
    CHECK((t.pi(one) * t.e_N - t.gamma0(one) * t.e_N).norm() == Catch::Approx(0.0).margin(1e-14));
}

TEST_CASE("normaliser check", "[tower][normaliser]") {
    auto t = basic_construction(diagonal_in_full(2));
    CHECK(normaliser_check(t, identity(2)));
    CHECK(normaliser_check(t, shift(2)));
    CHECK(normaliser_check(t, pauli_z()));
    CMatrix h(2, 2);
    h << 1, 1, 1, -1;
    h /= std::sqrt(2.0);
    CHECK_FALSE(normaliser_check(t, h));
    CHECK_THROWS_AS(normaliser_check(t, 2.0 * identity(2)), PreconditionError);
}

TEST_CASE("tracial entangled states", "[tower][normaliser]") {
    Rng rng(9);
    {
        auto t = build_tower(scalars_in_full(2));
        CVector psi = random_unit_in_jones_range(t, rng);
        require_report(verify_tracial_entangled_state(t, identity(2), psi));
        require_report(verify_tracial_entangled_state(t, pauli_x(), psi));
    }
    auto t = build_tower(diagonal_in_full(2));
    CVector psi = random_unit_in_jones_range(t, rng);
    require_report(verify_tracial_entangled_state(t, shift(2), psi));
    CMatrix h(2, 2);
    h << 1, 1, 1, -1;
    h /= std::sqrt(2.0);
    CHECK_THROWS_AS(verify_tracial_entangled_state(t, h, psi), NormaliserError);
}
