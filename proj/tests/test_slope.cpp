#include <catch_amalgamated.hpp>

#include "support.hpp"

using namespace dvlab;
using namespace dvtest;

namespace {

DModule sum_of(std::initializer_list<std::pair<int, int>> blocks, const Ring& R)
{
    DModule S = zero_module(R);
    for (auto [m, n] : blocks)
        S = direct_sum(S, make_gmn(m, n, R));
    return S;
}

// Y in the coordinates of change_basis(A, C), pulled back to A's coordinates.
Mat pull_back(const Ring& R, const Mat& C, const Mat& Y)
{
    return detail::canonical_saturated_basis(R, mat_mul(R, mat_reduce(R, C), mat_reduce(R, Y)));
}

} // namespace

TEST_CASE("slope data")
{
    CHECK_NOTHROW((SlopeData{3, {3, 1, 0}}.validate()));
    CHECK_THROWS_AS((SlopeData{2, {3}}.validate()), Error);
    CHECK_THROWS_AS((SlopeData{3, {1, 1}}.validate()), Error);
    CHECK_THROWS_AS((SlopeData{3, {}}.validate()), Error);
    const Ring R = make_ring({2, 1, 8});
    CHECK(slope_data_for(newton_polygon(sum_of({{1, 1}, {1, 2}}, R))) == SlopeData{6, {3, 2}});
    CHECK(slope_data_for(newton_polygon(make_gmn(2, 3, R))) == SlopeData{5, {2}});
    CHECK(SlopeData{5, {2}}.scaled(3) == SlopeData{15, {6}});
}

TEST_CASE("Φ-étale split")
{
    const Ring R = make_ring({2, 1, 6});
    const DModule A = sum_of({{0, 1}, {1, 1}}, R);
    const EtaleSplit sp = phi_etale_split(A, 0, 1);
    CHECK(sp.nil.rank() == 2);
    CHECK(sp.etale.rank() == 1);
    CHECK(is_isomorphic(sp.etale, make_gmn(0, 1, R)).yes());
    CHECK(is_isomorphic(sp.nil, make_gmn(1, 1, R)).yes());

    const EtaleSplit all = phi_etale_split(make_gmn(1, 1, R), 1, 2);
    CHECK(all.etale.rank() == 2);
    CHECK(all.nil.rank() == 0);
    try {
        phi_etale_split(make_gmn(1, 1, R), 1, 1);
        FAIL("expected NotIntegral");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::NotIntegral);
    }
}

TEST_CASE("Φ-saturation of an isoclinic module makes Φ bijective")
{
    std::mt19937_64 rng(51);
    const Ring R = make_ring({3, 1, 8});
    const DModule G = make_gmn(1, 2, R);
    for (int trial = 0; trial < 5; ++trial) {
        const DModule B = change_basis(G, random_invertible(R, 3, rng));
        const auto xs = alpha_p_embeddings(B);
        const DModule A = quotient_by_alpha_p(B, xs.front()).target;
        const auto [P, e] = phi_saturation(A, 1, 3);
        const IsogenyData T = isogeny_from_lattice(A, P, e);
        const SemiLinOp phi = phi_operator(T.target, 1, 3);
        CHECK(is_invertible(phi.ring, phi.matrix));
    }
}

TEST_CASE("slope filtration of G_{1,1} + G_{1,2}")
{
    const Ring R = make_ring({2, 1, 12});
    const DModule A = sum_of({{1, 1}, {1, 2}}, R);
    const Filtration f = slope_filtration(A);
    REQUIRE(f.steps.size() == 2);
    CHECK(f.slopes == std::vector<Rational>{Rational(1, 2), Rational(1, 3)});
    const Ring& Rf = f.module.ring();
    Mat expect = zeros(Rf, 5, 2);
    expect(0, 0) = Rf.one();
    expect(1, 1) = Rf.one();
    CHECK(f.steps[0] == expect);
    CHECK(f.steps[1] == identity(Rf, 5));
    REQUIRE(f.graded.size() == 2);
    CHECK(is_isoclinic(f.graded[0]) == Rational(1, 2));
    CHECK(is_isoclinic(f.graded[1]) == Rational(1, 3));

    std::mt19937_64 rng(52);
    for (int trial = 0; trial < 5; ++trial) {
        const Mat C = random_invertible(R, 5, rng);
        const Filtration g = slope_filtration(change_basis(A, C));
        const Ring& Rg = g.module.ring();
        REQUIRE(g.steps.size() == 2);
        CHECK(g.slopes == f.slopes);
        CHECK(pull_back(Rg, C, g.steps[0]) == mat_reduce(Rg, expect));
    }
}

TEST_CASE("slope filtration corner cases")
{
    const Ring R = make_ring({3, 1, 10});
    const Filtration iso = slope_filtration(make_gmn(2, 3, R));
    CHECK(iso.steps.size() == 1);
    CHECK(iso.slopes == std::vector<Rational>{Rational(2, 5)});
    const Filtration three = slope_filtration(sum_of({{0, 1}, {1, 0}, {1, 1}}, R));
    CHECK(three.slopes == std::vector<Rational>{Rational(1), Rational(1, 2), Rational(0)});
    REQUIRE(three.graded.size() == 3);
    CHECK(three.graded[0].rank() == 1);
    CHECK(three.graded[1].rank() == 2);
    CHECK(three.graded[2].rank() == 1);
}

TEST_CASE("complete slope divisibility of G_{m,n}")
{
    for (const auto p : {2u, 3u}) {
        const Ring R = make_ring({p, 1, 16});
        for (auto [m, n] : std::vector<std::pair<int, int>>{{1, 0}, {0, 1}, {1, 1}, {1, 2}, {2, 1}, {1, 3}, {3, 1}, {2, 3}, {3, 2}, {1, 4}, {4, 1}}) {
            const DModule G = make_gmn(m, n, R);
            const SlopeData sd{m + n, {m}};
            CHECK(is_completely_slope_divisible(G, sd).csd);
            CHECK(is_completely_slope_divisible(G, sd.scaled(2)).csd);
        }
    }
    const Ring R = make_ring({2, 1, 6});
    const CsdResult bad = is_completely_slope_divisible(make_gmn(1, 1, R), SlopeData{1, {1}});
    CHECK_FALSE(bad.csd);
    CHECK(bad.level == 1);
}

TEST_CASE("csd certificate agrees with the slope filtration")
{
    const Ring R = make_ring({2, 1, 14});
    std::mt19937_64 rng(53);
    const DModule A = change_basis(sum_of({{1, 1}, {1, 2}}, R), random_invertible(R, 5, rng));
    const CsdResult c = is_completely_slope_divisible(A, SlopeData{6, {3, 2}});
    REQUIRE(c.csd);
    const Filtration f = slope_filtration(A);
    const Ring Rm = c.filtration->module.ring().N() < f.module.ring().N() ? c.filtration->module.ring()
                                                                          : f.module.ring();
    CHECK(mat_reduce(Rm, c.filtration->steps[0]) == mat_reduce(Rm, f.steps[0]));
    CHECK_FALSE(is_completely_slope_divisible(A, SlopeData{6, {3}}).csd);
}

TEST_CASE("isoclinic splitting")
{
    const Ring R = make_ring({2, 1, 14});
    std::mt19937_64 rng(54);
    for (const auto& blocks : std::vector<std::vector<std::pair<int, int>>>{{{1, 1}, {1, 2}}, {{0, 1}, {1, 1}, {1, 0}}, {{1, 2}}}) {
        DModule S = zero_module(R);
        for (auto [m, n] : blocks)
            S = direct_sum(S, make_gmn(m, n, R));
        const DModule A = change_basis(S, random_invertible(R, S.rank(), rng));
        const IsoclinicSplit sp = split_isoclinic(A);
        REQUIRE(sp.parts.size() == blocks.size());
        DModule sum = zero_module(sp.parts.front().ring());
        for (std::size_t i = 0; i < sp.parts.size(); ++i) {
            CHECK(is_isoclinic(sp.parts[i]) == sp.slopes[i]);
            sum = direct_sum(sum, sp.parts[i]);
        }
        CHECK(newton_polygon(sum) == newton_polygon(A));
        const Ring& Rs = sum.ring();
        CHECK(change_basis(with_precision(A, Rs.N()), sp.witness) == sum);
        for (std::size_t i = 1; i < sp.slopes.size(); ++i)
            CHECK(sp.slopes[i] < sp.slopes[i - 1]);
    }
    CHECK_THROWS_AS(split_isoclinic(make_gmn(1, 1, R), SlopeData{2, {2}}), Error);
}

TEST_CASE("csd saturation")
{
    const Ring R = make_ring({2, 1, 14});
    const DModule A = sum_of({{1, 1}, {1, 2}}, R);
    CHECK(csd_saturate(A).log_degree == 0);
    std::mt19937_64 rng(55);
    for (int trial = 0; trial < 6; ++trial) {
        // a non-split module: quotient of a conjugate by a random α_p
        const DModule B = change_basis(A, random_invertible(R, 5, rng));
        const auto xs = alpha_p_embeddings(B);
        const DModule X = quotient_by_alpha_p(B, xs[rng() % xs.size()]).target;
        const IsogenyData s = csd_saturate(X);
        CHECK(s.log_degree <= 4);
        CHECK(is_completely_slope_divisible(s.target, slope_data_for(newton_polygon(X))).csd);
        CHECK(lattice_index(X.ring(), s.lattice_map, s.denominator_exp) == s.log_degree);
        CHECK(csd_saturate(base_change(X, 2)).log_degree == s.log_degree);
    }
}

TEST_CASE("descent to a finite field")
{
    std::mt19937_64 rng(56);
    for (const auto p : {2u, 3u}) {
        const Ring R4 = make_ring({p, 4, 6});
        const DModule G = base_change(make_gmn(1, 1, make_ring({p, 1, 6})), 4);
        for (int trial = 0; trial < 3; ++trial) {
            const DModule A = change_basis(G, random_invertible(R4, 2, rng));
            const Descent d = descend_finite_field(A, SlopeData{2, {1}});
            CHECK(d.model.ring().a() == 2);
            CHECK(d.model.rank() == 2);
            CHECK(change_basis(d.ambient, d.witness) == base_change(d.model, 4));
            CHECK(is_completely_slope_divisible(base_change(d.model, 4), SlopeData{2, {1}}).csd);
        }
    }
    const Ring R = make_ring({3, 1, 6});
    const DModule G = make_gmn(1, 2, R);
    const Descent d = descend_finite_field(G, SlopeData{3, {1}});
    CHECK(d.model == with_precision(G, 5));
    CHECK_THROWS_AS(descend_finite_field(sum_of({{1, 1}, {1, 2}}, R), SlopeData{6, {3, 2}}), Error);
}

TEST_CASE("descent that needs a field extension")
{
    // G_{1,1} over F_2 with Φ = p^{-1}V^2: the fixed vectors live over F_4
    const Ring R = make_ring({2, 1, 6});
    const DModule G = make_gmn(1, 1, R);
    std::mt19937_64 rng(57);
    const DModule A = change_basis(G, random_invertible(R, 2, rng));
    const Descent d = descend_finite_field(A, SlopeData{2, {1}});
    CHECK(d.model.rank() == 2);
    CHECK(change_basis(d.ambient, d.witness) == base_change(d.model, d.ambient.ring().a()));
}

TEST_CASE("enumeration of csd isogenies")
{
    for (const auto p : {2u, 3u}) {
        const Ring R1 = make_ring({p, 1, 6});
        const DModule G = base_change(make_gmn(1, 1, R1), 2);
        const SlopeData sd{2, {1}};
        const EnumerationResult zero = enumerate_csd_isogenies(G, 0, sd);
        REQUIRE(zero.isogenies.size() == 1);
        CHECK(zero.isogenies[0].log_degree == 0);

        const EnumerationResult one = enumerate_csd_isogenies(G, 1, sd);
        CHECK(one.phi_stable == static_cast<long>(p * p + 1));
        CHECK(one.isogenies.size() == 1); // the unique α_p
        for (const auto& iso : one.isogenies)
            CHECK(iso.log_degree == 1);

        std::mt19937_64 rng(58 + p);
        const DModule B = change_basis(G, random_invertible(G.ring(), 2, rng));
        for (int d = 1; d <= 2; ++d) {
            const auto x = enumerate_csd_isogenies(G, d, sd);
            const auto y = enumerate_csd_isogenies(B, d, sd, 3);
            CHECK(x.isogenies.size() == y.isogenies.size());
            CHECK(x.phi_stable == y.phi_stable);
        }
    }
    const Ring R = make_ring({2, 1, 6});
    CHECK_THROWS_AS(enumerate_csd_isogenies(sum_of({{1, 1}, {1, 2}}, R), 1, SlopeData{6, {3}}), Error);
    CHECK_THROWS_AS(enumerate_csd_isogenies(make_gmn(1, 1, R), 2, SlopeData{2, {1}}, 1, 1), Error);
}

TEST_CASE("parallel enumeration is deterministic")
{
    const Ring R = make_ring({2, 1, 8});
    const DModule G = make_gmn(1, 2, R);
    const auto serial = enumerate_csd_isogenies(G, 2, SlopeData{3, {1}});
    const auto par = enumerate_csd_isogenies(G, 2, SlopeData{3, {1}}, 4);
    REQUIRE(serial.isogenies.size() == par.isogenies.size());
    for (std::size_t i = 0; i < serial.isogenies.size(); ++i)
        CHECK(serial.isogenies[i].lattice_map == par.isogenies[i].lattice_map);
}
