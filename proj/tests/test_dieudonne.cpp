#include <catch_amalgamated.hpp>

#include "support.hpp"

using namespace dvlab;
using namespace dvtest;

namespace {

const std::vector<std::pair<int, int>> kCoprime = {{1, 0}, {0, 1}, {1, 1}, {1, 2}, {2, 1}, {1, 3},
                                                   {3, 1}, {1, 4}, {2, 3}, {3, 2}, {4, 1}, {1, 5},
                                                   {5, 1}};

Vec basis_vector(const Ring& R, std::size_t h, std::size_t i)
{
    Vec v(h, R.zero());
    v[i] = R.one();
    return v;
}

} // namespace

TEST_CASE("G_{1,1} over Z/8")
{
    const Ring R = make_ring({2, 1, 3});
    const DModule G = make_gmn(1, 1, R);
    Mat expect = zeros(R, 2, 2);
    expect(0, 1) = R.from_int(2);
    expect(1, 0) = R.one();
    CHECK(G.F() == expect);
    CHECK(G.V() == expect);
    CHECK(dvlab::apply(G.F_op(), basis_vector(R, 2, 0)) == basis_vector(R, 2, 1));
    CHECK(dvlab::apply(G.V_op(), basis_vector(R, 2, 0)) == basis_vector(R, 2, 1));
    CHECK(op_power(G.V_op(), 2).matrix == scalar_matrix(R, 2, R.from_int(2)));
    CHECK(linearize(G.V_op()) == expect);
}

TEST_CASE("make_gmn rejects bad parameters")
{
    const Ring R = make_ring({2, 1, 3});
    CHECK_THROWS_AS(make_gmn(2, 2, R), Error);
    CHECK_THROWS_AS(make_gmn(0, 0, R), Error);
    CHECK_THROWS_AS(make_gmn(-1, 2, R), Error);
}

TEST_CASE("G_{m,n}: F^m e_1 = V^n e_1 and V^h = p^m")
{
    for (const auto p : {2u, 3u}) {
        const Ring R = make_ring({p, 1, 8});
        for (auto [m, n] : kCoprime) {
            const DModule G = make_gmn(m, n, R);
            const std::size_t h = G.rank();
            const Vec e1 = basis_vector(R, h, 0);
            CHECK(dvlab::apply(op_power(G.F_op(), m), e1) == dvlab::apply(op_power(G.V_op(), n), e1));
            CHECK(op_power(G.V_op(), static_cast<int>(h)).matrix ==
                  scalar_matrix(R, h, R.from_int(R.p_pow(m))));
        }
    }
}

TEST_CASE("degenerate G_{1,0} and G_{0,1}")
{
    const Ring R = make_ring({3, 1, 4});
    const DModule mu = make_gmn(1, 0, R);
    CHECK(mu.F() == identity(R, 1));
    CHECK(mu.V() == scalar_matrix(R, 1, R.from_int(3)));
    const DModule et = make_gmn(0, 1, R);
    CHECK(et.V() == identity(R, 1));
    CHECK(et.F() == scalar_matrix(R, 1, R.from_int(3)));
}

TEST_CASE("constructors enforce FV = VF = p")
{
    const Ring R = make_ring({2, 1, 4});
    CHECK_THROWS_AS(DModule(R, identity(R, 2), identity(R, 2)), Error);
    std::mt19937_64 rng(31);
    for (int trial = 0; trial < 20; ++trial) {
        const Ring S = make_ring({3, 2, 4});
        const DModule A = direct_sum(make_gmn(1, 1, S), make_gmn(2, 1, S));
        const DModule B = change_basis(A, random_invertible(S, A.rank(), rng));
        CHECK(compose(B.F_op(), B.V_op()).matrix == scalar_matrix(S, 5, S.from_int(3)));
        CHECK(compose(B.V_op(), B.F_op()).matrix == scalar_matrix(S, 5, S.from_int(3)));
    }
}

TEST_CASE("direct sum and ring mismatch")
{
    const Ring R = make_ring({2, 1, 4});
    const DModule S = direct_sum(make_gmn(1, 1, R), make_gmn(1, 2, R));
    CHECK(S.rank() == 5);
    CHECK(direct_sum(S, zero_module(R)) == S);
    CHECK_THROWS_AS(direct_sum(S, make_gmn(1, 1, make_ring({3, 1, 4}))), Error);
}

TEST_CASE("base change")
{
    const Ring R = make_ring({2, 1, 4});
    const DModule G = make_gmn(1, 2, R);
    CHECK(base_change(G, 1) == G);
    CHECK(base_change(base_change(G, 2), 4) == base_change(G, 4));
    CHECK_THROWS_AS(base_change(base_change(G, 2), 3), Error);
}

TEST_CASE("alpha_p embeddings")
{
    const Ring R = make_ring({2, 1, 4});
    const auto a11 = alpha_p_embeddings(make_gmn(1, 1, R));
    REQUIRE(a11.size() == 1);
    const Ring k = R.with_precision(1);
    CHECK(a11[0] == basis_vector(k, 2, 1));
    CHECK(alpha_p_embeddings(direct_sum(make_gmn(1, 1, R), make_gmn(1, 2, R))).size() == 2);
    CHECK(alpha_p_embeddings(make_gmn(0, 1, R)).empty());
    for (const auto p : {2u, 3u})
        for (const int a : {1, 2}) {
            const Ring S = make_ring({p, a, 3});
            for (auto [m, n] : kCoprime)
                if (m >= 1 && n >= 1)
                    CHECK(alpha_p_embeddings(make_gmn(m, n, S)).size() == 1);
        }
}

TEST_CASE("quotient by alpha_p on G_{1,1}")
{
    const Ring R = make_ring({2, 1, 5});
    const DModule G = make_gmn(1, 1, R);
    const auto x = alpha_p_embeddings(G).front();
    const IsogenyData q = quotient_by_alpha_p(G, x);
    CHECK(q.log_degree == 1);
    CHECK(q.target.ring().N() == 4);
    const IsoResult iso = is_isomorphic(G, q.target);
    CHECK(iso.yes());
    Mat g = zeros(R, 2, 1);
    g(1, 0) = R.one();
    const IsogenyData viaLattice = isogeny_from_lattice(G, g, 1);
    CHECK(viaLattice.target == q.target);
    CHECK(viaLattice.lattice_map == q.lattice_map);
    CHECK_THROWS_AS(quotient_by_alpha_p(G, Vec{R.one(), R.zero()}), Error);
}

TEST_CASE("isogeny_from_lattice trivial cases")
{
    const Ring R = make_ring({3, 1, 5});
    const DModule A = direct_sum(make_gmn(1, 1, R), make_gmn(1, 2, R));
    const IsogenyData id = isogeny_from_lattice(A, zeros(R, 5, 0), 0);
    CHECK(id.log_degree == 0);
    CHECK(id.target == A);
    const IsogenyData p_inv = isogeny_from_lattice(A, identity(R, 5), 1);
    CHECK(p_inv.log_degree == 5);
    CHECK(isogeny_from_lattice(A, identity(R, 5), 2).log_degree == 10);
    // p^{-2}·pM = p^{-1}M after normalization
    const IsogenyData scaled = isogeny_from_lattice(A, scalar_matrix(R, 5, R.from_int(3)), 2);
    CHECK(scaled.log_degree == 5);
    CHECK(scaled.target == with_precision(A, 4));
    CHECK_THROWS_AS(isogeny_from_lattice(A, identity(R, 5), 5), Error);
    Mat bad = zeros(R, 5, 1);
    bad(0, 0) = R.one(); // e_1 of G_{1,1} is not killed by F mod p
    CHECK_THROWS_AS(isogeny_from_lattice(A, bad, 1), Error);
}

TEST_CASE("log degrees add under composition")
{
    std::mt19937_64 rng(32);
    for (int trial = 0; trial < 20; ++trial) {
        const Ring R = make_ring({static_cast<std::uint64_t>(trial % 2 ? 3 : 2), 1 + trial % 2, 7});
        const DModule A = change_basis(direct_sum(make_gmn(1, 1, R), make_gmn(2, 1, R)),
                                       random_invertible(R, 5, rng));
        const auto xs = alpha_p_embeddings(A);
        REQUIRE_FALSE(xs.empty());
        const IsogenyData f = quotient_by_alpha_p(A, xs[rng() % xs.size()]);
        const auto ys = alpha_p_embeddings(f.target);
        REQUIRE_FALSE(ys.empty());
        const IsogenyData g = quotient_by_alpha_p(f.target, ys[rng() % ys.size()]);
        const IsogenyData gf = compose_isogenies(f, g);
        CHECK(gf.log_degree == f.log_degree + g.log_degree);
        CHECK(lattice_index(R, gf.lattice_map, gf.denominator_exp) == gf.log_degree);
        CHECK(is_isomorphic(gf.target, g.target).yes());
    }
}

TEST_CASE("dual reflects slopes and is an involution")
{
    const Ring R = make_ring({2, 1, 6});
    for (auto [m, n] : kCoprime) {
        if (m + n > 5)
            continue;
        const DModule G = make_gmn(m, n, R);
        const DModule D = dual(G);
        CHECK(is_isomorphic(D, make_gmn(n, m, R)).yes());
        CHECK(is_isomorphic(dual(D), G).yes());
    }
}

TEST_CASE("is_isomorphic answers")
{
    const Ring R = make_ring({2, 1, 5});
    const IsoResult r = is_isomorphic(make_gmn(2, 1, R), make_gmn(1, 2, R));
    CHECK(r.no());
    CHECK(r.reason == "newton_polygon");
    const DModule A = direct_sum(make_gmn(1, 1, R), make_gmn(0, 1, R));
    const IsoResult self = is_isomorphic(A, A);
    REQUIRE(self.yes());
    const Mat& X = *self.witness;
    CHECK(mat_mul(R, X, A.F()) == mat_mul(R, A.F(), mat_frobenius(R, X, 1)));
    CHECK(is_isomorphic(A, make_gmn(1, 1, R)).no());
    std::mt19937_64 rng(33);
    const Ring S = make_ring({3, 2, 4});
    const DModule Bs = base_change(make_gmn(1, 2, make_ring({3, 1, 4})), 2);
    const Mat C = random_invertible(S, 3, rng);
    const IsoResult conj = is_isomorphic(Bs, change_basis(Bs, C));
    REQUIRE(conj.yes());
    const DModule T = change_basis(Bs, C);
    const Mat& W = *conj.witness;
    CHECK(mat_mul(S, W, Bs.F()) == mat_mul(S, T.F(), mat_frobenius(S, W, 1)));
    CHECK(mat_mul(S, W, Bs.V()) == mat_mul(S, T.V(), mat_frobenius(S, W, -1)));
}
