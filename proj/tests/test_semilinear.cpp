#include <catch_amalgamated.hpp>

#include "support.hpp"

using namespace dvlab;
using namespace dvtest;

namespace {

Mat int_mat(const Ring& R, std::initializer_list<std::initializer_list<long>> rows)
{
    std::vector<std::vector<long>> v;
    for (auto r : rows)
        v.emplace_back(r);
    Mat M = zeros(R, v.size(), v.front().size());
    for (std::size_t i = 0; i < v.size(); ++i)
        for (std::size_t j = 0; j < v[i].size(); ++j)
            M(i, j) = R.from_int(v[i][j]);
    return M;
}

Mat diag_from(const Ring& R, const Mat& A, const SmithForm& sf)
{
    return mat_mul(R, sf.left, mat_mul(R, A, sf.right));
}

bool is_claimed_diagonal(const Ring& R, const Mat& D, const std::vector<int>& diag)
{
    for (std::size_t i = 0; i < D.rows; ++i)
        for (std::size_t j = 0; j < D.cols; ++j) {
            if (i != j || i >= diag.size() || diag[i] == kInfinite) {
                if (!R.is_zero(D(i, j)))
                    return false;
            } else if (!(D(i, j) == R.from_int(R.p_pow(diag[i])))) {
                return false;
            }
        }
    return true;
}

} // namespace

TEST_CASE("Smith normal form examples over Z/8")
{
    const Ring R = make_ring({2, 1, 3});
    CHECK(smith_normal_form(R, int_mat(R, {{2, 0}, {0, 4}})).diag == std::vector<int>{1, 2});
    CHECK(smith_normal_form(R, int_mat(R, {{0, 1}, {2, 0}})).diag == std::vector<int>{0, 1});
    CHECK(smith_normal_form(R, identity(R, 3)).diag == std::vector<int>{0, 0, 0});
    CHECK(smith_normal_form(R, zeros(R, 2, 2)).diag == std::vector<int>{kInfinite, kInfinite});
}

TEST_CASE("Smith normal form certificate on random matrices")
{
    std::mt19937_64 rng(11);
    for (const RingParams params : {RingParams{2, 1, 4}, RingParams{3, 2, 3}, RingParams{2, 3, 3}}) {
        const Ring R = make_ring(params);
        for (int trial = 0; trial < 60; ++trial) {
            const std::size_t r = 1 + rng() % 4, c = 1 + rng() % 4;
            Mat A = random_mat(R, r, c, rng);
            // force non-trivial divisors
            for (std::size_t i = 0; i < r; ++i)
                if (rng() % 2)
                    for (std::size_t j = 0; j < c; ++j)
                        A(i, j) = R.mul_p_pow(A(i, j), 1 + static_cast<int>(rng() % 2));
            const auto sf = smith_normal_form(R, A);
            CHECK(is_claimed_diagonal(R, diag_from(R, A, sf), sf.diag));
            CHECK(std::is_sorted(sf.diag.begin(), sf.diag.end()));
            CHECK(is_invertible(R, sf.left));
            CHECK(is_invertible(R, sf.right));
            CHECK(is_identity(R, mat_mul(R, sf.left, sf.left_inv)));
        }
    }
}

TEST_CASE("solve and kernel agree with direct multiplication")
{
    std::mt19937_64 rng(12);
    const Ring R = make_ring({3, 2, 3});
    for (int trial = 0; trial < 40; ++trial) {
        const Mat A = random_mat(R, 3, 3, rng);
        const Mat X = random_mat(R, 3, 2, rng);
        const Mat B = mat_mul(R, A, X);
        const auto sol = solve(R, A, B);
        REQUIRE(sol);
        CHECK(mat_mul(R, A, sol->x) == B);
        Mat S = A;
        for (std::size_t i = 0; i < 3; ++i)
            S(i, 2) = R.add(S(i, 0), R.mul_p_pow(S(i, 1), 1));
        for (const auto& g : kernel(R, S)) {
            const Vec img = mat_vec(R, S, g.v);
            for (const auto& x : img)
                CHECK(R.is_zero(x));
        }
    }
}

TEST_CASE("compose is associative and linearize is multiplicative")
{
    std::mt19937_64 rng(13);
    for (const RingParams params : {RingParams{2, 2, 3}, RingParams{3, 3, 2}, RingParams{2, 4, 2}}) {
        const Ring R = make_ring(params);
        for (int trial = 0; trial < 20; ++trial) {
            const SemiLinOp f{R, random_mat(R, 2, 2, rng), static_cast<long>(rng() % 5) - 2};
            const SemiLinOp g{R, random_mat(R, 2, 2, rng), static_cast<long>(rng() % 5) - 2};
            const SemiLinOp k{R, random_mat(R, 2, 2, rng), static_cast<long>(rng() % 5) - 2};
            CHECK(compose(compose(f, g), k) == compose(f, compose(g, k)));
            const Ring Z = prime_ring(R);
            CHECK(linearize(compose(f, g)) == mat_mul(Z, linearize(f), linearize(g)));
            Vec v{random_elem(R, rng), random_elem(R, rng)};
            CHECK(dvlab::apply(compose(f, g), v) == dvlab::apply(f, dvlab::apply(g, v)));
            CHECK(linearize_vector(R, Z, dvlab::apply(f, v)) == mat_vec(Z, linearize(f), linearize_vector(R, Z, v)));
        }
    }
}

TEST_CASE("semilinearity of apply")
{
    std::mt19937_64 rng(14);
    const Ring R = make_ring({2, 3, 3});
    const SemiLinOp f{R, random_mat(R, 3, 3, rng), 1};
    const Elem c = random_elem(R, rng);
    Vec v{random_elem(R, rng), random_elem(R, rng), random_elem(R, rng)};
    Vec cv = v;
    for (auto& x : cv)
        x = R.mul(c, x);
    Vec expected = dvlab::apply(f, v);
    for (auto& x : expected)
        x = R.mul(R.frobenius(c, 1), x);
    CHECK(dvlab::apply(f, cv) == expected);
    const SemiLinOp zero{R, zeros(R, 3, 3), 1};
    for (const auto& x : dvlab::apply(zero, v))
        CHECK(R.is_zero(x));
}

TEST_CASE("linearize of p times identity")
{
    const Ring R = make_ring({3, 2, 3});
    const SemiLinOp op{R, scalar_matrix(R, 2, R.from_int(3)), 0};
    const Ring Z = prime_ring(R);
    CHECK(linearize(op) == scalar_matrix(Z, 4, Z.from_int(3)));
}

namespace {

void check_fitting(const SemiLinOp& op)
{
    const Ring& R = op.ring;
    const auto fd = fitting_decomposition(op);
    REQUIRE(fd.bij.rank() + fd.nil.rank() == op.rank());
    const Mat B = hcat(fd.bij.basis(), fd.nil.basis());
    CHECK(is_invertible(R, B)); // the two lattices meet in p^N M only
    auto stable = [&](const Lattice& L) {
        if (L.rank() == 0)
            return true;
        const Mat img = from_columns(R, op.rank(), [&] {
            std::vector<Vec> cols;
            for (const auto& g : L.generators)
                cols.push_back(dvlab::apply(op, g.v));
            return cols;
        }());
        return solve(R, L.basis(), img).has_value();
    };
    CHECK(stable(fd.bij));
    CHECK(stable(fd.nil));
    const SemiLinOp power = op_power(op, fd.exponent);
    for (const auto& g : fd.nil.generators)
        for (const auto& x : dvlab::apply(power, g.v))
            CHECK(R.is_zero(x));
}

} // namespace

TEST_CASE("Fitting decomposition examples")
{
    const Ring R = make_ring({2, 1, 4});
    const SemiLinOp upper{R, [&] {
                              Mat M = zeros(R, 3, 3);
                              M(0, 1) = R.one();
                              M(1, 2) = R.from_int(3);
                              M(0, 2) = R.from_int(5);
                              return M;
                          }(),
                          0};
    auto fd = fitting_decomposition(upper);
    CHECK(fd.bij.rank() == 0);
    CHECK(fd.nil.rank() == 3);
    fd = fitting_decomposition(identity_op(R, 3));
    CHECK(fd.bij.rank() == 3);
    CHECK(fd.nil.rank() == 0);
    check_fitting(upper);
}

TEST_CASE("Fitting decomposition properties on random operators")
{
    std::mt19937_64 rng(15);
    for (const RingParams params : {RingParams{2, 1, 4}, RingParams{3, 2, 3}, RingParams{2, 2, 4}}) {
        const Ring R = make_ring(params);
        for (int trial = 0; trial < 25; ++trial) {
            const std::size_t h = 2 + rng() % 3;
            // a conjugate of a block with a unit part and a p-divisible part
            Mat D = zeros(R, h, h);
            const std::size_t k = rng() % (h + 1);
            for (std::size_t i = 0; i < h; ++i)
                for (std::size_t j = 0; j < h; ++j) {
                    const bool same_block = (i < k) == (j < k);
                    if (!same_block)
                        continue;
                    D(i, j) = i < k ? random_elem(R, rng) : R.mul_p_pow(random_elem(R, rng), 1);
                }
            for (std::size_t i = 0; i < k; ++i)
                D(i, i) = R.add(D(i, i), R.one());
            const Mat C = random_invertible(R, h, rng);
            const long t = static_cast<long>(rng() % 3) - 1;
            const SemiLinOp op{R, mat_mul(R, C, mat_mul(R, D, mat_frobenius(R, inverse(R, C), t))), t};
            check_fitting(op);
        }
    }
}

TEST_CASE("fixed points of the identity and of a random twisted conjugate")
{
    const Ring R = make_ring({3, 1, 2});
    const auto fl = fixed_points(identity_op(R, 1));
    REQUIRE(fl.rank() == 1);
    CHECK(fl.basis[0].order == 2);

    std::mt19937_64 rng(16);
    const Ring big = make_ring({2, 4, 4});
    for (int trial = 0; trial < 5; ++trial) {
        // Φ = C σ^{-2}(C)^{-1} is conjugate to the identity with twist -2
        const Mat C = random_invertible(big, 2, rng);
        const SemiLinOp phi{big, mat_mul(big, C, inverse(big, mat_frobenius(big, C, -2))), -2};
        const auto fx = fixed_points(phi);
        CHECK(fx.subring.a() == 2);
        REQUIRE(fx.rank() == 2);
        std::vector<Vec> cols;
        for (const auto& g : fx.basis) {
            CHECK(dvlab::apply(phi, g.v) == g.v);
            cols.push_back(g.v);
        }
        CHECK(is_invertible(big, from_columns(big, 2, cols)));
        // closed under the subring: ζ·v stays fixed
        Vec zv = fx.basis[0].v;
        for (auto& x : zv)
            x = big.mul(x, fx.subring_generator);
        CHECK(dvlab::apply(phi, zv) == zv);
        Vec sum = fx.basis[0].v;
        for (std::size_t i = 0; i < sum.size(); ++i)
            sum[i] = big.add(sum[i], fx.basis[1].v[i]);
        CHECK(dvlab::apply(phi, sum) == sum);
    }
}
