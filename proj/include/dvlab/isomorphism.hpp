#pragma once

#include <optional>
#include <random>
#include <string>

#include "newton.hpp"

namespace dvlab {

struct IsoResult {
    enum class Kind { Yes, No, Inconclusive };
    Kind kind = Kind::Inconclusive;
    std::optional<Mat> witness; // X : M_A → M_B with X F_A = F_B σ(X), X V_A = V_B σ^{-1}(X)
    std::string reason;

    bool yes() const { return kind == Kind::Yes; }
    bool no() const { return kind == Kind::No; }
};

struct IsoSearchLimits {
    int max_field_degree = 4;
    std::size_t max_rank = 5;
    long max_candidates = 1'000'000;
};

namespace detail {

inline std::vector<int> snf_profile(const Ring& R, const Mat& M) { return smith_normal_form(R, M).diag; }

// Z/p^N-matrix of X ↦ (X F_A − F_B σ(X), X V_A − V_B σ^{-1}(X)) in the coordinates of X's entries.
inline Mat intertwiner_system(const DModule& A, const DModule& B)
{
    const Ring& R = A.ring();
    const Ring Z = prime_ring(R);
    const std::size_t h = A.rank(), a = static_cast<std::size_t>(R.a());
    const std::size_t unknowns = h * h * a;
    Mat S = zeros(Z, 2 * unknowns, unknowns);
    Elem xi = R.one();
    std::vector<Elem> powers;
    for (std::size_t k = 0; k < a; ++k) {
        powers.push_back(xi);
        xi = R.mul(xi, R.generator());
    }
    for (std::size_t i = 0; i < h; ++i)
        for (std::size_t j = 0; j < h; ++j)
            for (std::size_t k = 0; k < a; ++k) {
                Mat X = zeros(R, h, h);
                X(i, j) = powers[k];
                const Mat eqF = mat_sub(R, mat_mul(R, X, A.F()), mat_mul(R, B.F(), mat_frobenius(R, X, 1)));
                const Mat eqV = mat_sub(R, mat_mul(R, X, A.V()), mat_mul(R, B.V(), mat_frobenius(R, X, -1)));
                const std::size_t col = (i * h + j) * a + k;
                for (std::size_t e = 0; e < h * h; ++e)
                    for (std::size_t l = 0; l < a; ++l) {
                        S(e * a + l, col) = Z.from_int(eqF.data[e].c[l]);
                        S(unknowns + e * a + l, col) = Z.from_int(eqV.data[e].c[l]);
                    }
            }
    return S;
}

inline Mat unknowns_to_matrix(const Ring& R, std::size_t h, const Vec& z)
{
    const std::size_t a = static_cast<std::size_t>(R.a());
    Mat X = zeros(R, h, h);
    for (std::size_t e = 0; e < h * h; ++e) {
        std::vector<Int> c(a);
        for (std::size_t l = 0; l < a; ++l)
            c[l] = z[e * a + l].c[0];
        X.data[e] = R.from_coeffs(std::move(c));
    }
    return X;
}

} // namespace detail

inline IsoResult is_isomorphic(const DModule& A0, const DModule& B0, const IsoSearchLimits& limits = {})
{
    const Ring R = detail::common_ring(A0.ring(), B0.ring());
    const DModule A = with_precision(A0, R.N());
    const DModule B = with_precision(B0, R.N());
    auto no = [](std::string why) { return IsoResult{IsoResult::Kind::No, std::nullopt, std::move(why)}; };
    if (A.rank() != B.rank())
        return no("rank");
    const std::size_t h = A.rank();
    if (h == 0)
        return {IsoResult::Kind::Yes, zeros(R, 0, 0), ""};
    try {
        if (!(newton_polygon(A) == newton_polygon(B)))
            return no("newton_polygon");
    } catch (const Error& e) {
        if (e.code() != ErrorCode::InsufficientPrecision)
            throw;
    }
    if (detail::snf_profile(R, A.F()) != detail::snf_profile(R, B.F()))
        return no("F_elementary_divisors");
    if (detail::snf_profile(R, A.V()) != detail::snf_profile(R, B.V()))
        return no("V_elementary_divisors");
    // F − V is only basis-independent when σ is trivial
    if (R.a() == 1 && detail::snf_profile(R, mat_sub(R, A.F(), A.V())) !=
                          detail::snf_profile(R, mat_sub(R, B.F(), B.V())))
        return no("F_minus_V_elementary_divisors");

    if (R.a() > limits.max_field_degree || h > limits.max_rank)
        return {IsoResult::Kind::Inconclusive, std::nullopt, "outside search budget"};

    const Ring Z = prime_ring(R);
    const Ring k = R.with_precision(1);
    const Ring kz = Z.with_precision(1);
    std::vector<Vec> lifts; // free kernel generators with F_p-independent reductions
    {
        std::vector<Vec> reduced_basis;
        std::vector<std::size_t> pivots;
        for (const auto& g : kernel(Z, detail::intertwiner_system(A, B))) {
            if (g.order != R.N())
                continue;
            Vec r(g.v.size());
            for (std::size_t i = 0; i < r.size(); ++i)
                r[i] = kz.reduce(g.v[i]);
            for (std::size_t b = 0; b < reduced_basis.size(); ++b) {
                const Elem c = r[pivots[b]];
                if (!kz.is_zero(c))
                    for (std::size_t i = 0; i < r.size(); ++i)
                        r[i] = kz.sub(r[i], kz.mul(c, reduced_basis[b][i]));
            }
            std::size_t piv = 0;
            while (piv < r.size() && kz.is_zero(r[piv]))
                ++piv;
            if (piv == r.size())
                continue;
            const Elem inv = kz.inv(r[piv]);
            for (auto& x : r)
                x = kz.mul(x, inv);
            reduced_basis.push_back(std::move(r));
            pivots.push_back(piv);
            lifts.push_back(g.v);
        }
    }
    if (lifts.empty())
        return no("no_intertwiner_mod_p");

    std::vector<Mat> gens;
    std::vector<Mat> gens_mod_p;
    for (const auto& z : lifts) {
        gens.push_back(detail::unknowns_to_matrix(R, h, z));
        gens_mod_p.push_back(mat_reduce(k, gens.back()));
    }
    const std::uint64_t p = R.p();
    const std::size_t n = gens.size();
    auto try_coeffs = [&](const std::vector<std::uint64_t>& c) -> std::optional<Mat> {
        Mat Xk = zeros(k, h, h);
        for (std::size_t i = 0; i < n; ++i)
            if (c[i])
                Xk = mat_add(k, Xk, mat_scale(k, gens_mod_p[i], k.from_int(c[i])));
        if (!is_invertible(k, Xk))
            return std::nullopt;
        Mat X = zeros(R, h, h);
        for (std::size_t i = 0; i < n; ++i)
            if (c[i])
                X = mat_add(R, X, mat_scale(R, gens[i], R.from_int(c[i])));
        return X;
    };

    double space = 1;
    for (std::size_t i = 0; i < n && space <= 1e18; ++i)
        space *= static_cast<double>(p);
    std::vector<std::uint64_t> c(n, 0);
    if (space <= static_cast<double>(limits.max_candidates)) {
        // odometer over F_p^n, skipping zero
        for (;;) {
            std::size_t i = 0;
            while (i < n && ++c[i] == p)
                c[i++] = 0;
            if (i == n)
                break;
            if (auto X = try_coeffs(c))
                return {IsoResult::Kind::Yes, std::move(*X), ""};
        }
        return no("no_invertible_intertwiner");
    }
    std::mt19937_64 rng(0x5eed);
    for (long trial = 0; trial < limits.max_candidates; ++trial) {
        for (auto& x : c)
            x = rng() % p;
        if (auto X = try_coeffs(c))
            return {IsoResult::Kind::Yes, std::move(*X), ""};
    }
    return {IsoResult::Kind::Inconclusive, std::nullopt, "candidate budget exhausted"};
}

} // namespace dvlab
