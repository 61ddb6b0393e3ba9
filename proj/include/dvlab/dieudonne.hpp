#pragma once

// Covariant Dieudonné modules over finite fields, their constructions and lattice isogenies.

#include <algorithm>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "semilinear.hpp"

namespace dvlab {

/// Free W_N(F_{p^a})-module of rank h with σ-linear F and σ^{-1}-linear V, FV = VF = p.
class DModule {
public:
    DModule() = default;

    DModule(Ring ring, Mat F, Mat V) : ring_(std::move(ring)), F_(std::move(F)), V_(std::move(V))
    {
        const std::size_t h = F_.rows;
        if (F_.cols != h || V_.rows != h || V_.cols != h)
            fail(ErrorCode::DimensionMismatch, "F and V must be square of equal size");
        F_ = mat_reduce(ring_, F_);
        V_ = mat_reduce(ring_, V_);
        const Mat p_id = scalar_matrix(ring_, h, ring_.from_int(ring_.p_int()));
        if (!(compose(F_op(), V_op()).matrix == p_id) || !(compose(V_op(), F_op()).matrix == p_id))
            fail(ErrorCode::InvalidParams, "FV = VF = p fails");
    }

    const Ring& ring() const { return ring_; }
    std::size_t rank() const { return F_.rows; }
    const Mat& F() const { return F_; }
    const Mat& V() const { return V_; }
    SemiLinOp F_op() const { return {ring_, F_, 1}; }
    SemiLinOp V_op() const { return {ring_, V_, -1}; }

    friend bool operator==(const DModule& x, const DModule& y)
    {
        return x.ring_ == y.ring_ && x.F_ == y.F_ && x.V_ == y.V_;
    }

private:
    Ring ring_;
    Mat F_;
    Mat V_;
};

/// G_{m,n}: F e_i = e_{i+1} for i <= m, F e_i = p e_{i+1} for i > m (cyclically); V = p F^{-1}.
inline DModule make_gmn(int m, int n, const Ring& R)
{
    if (m < 0 || n < 0 || (m == 0 && n == 0) || std::gcd(m, n) != 1)
        fail(ErrorCode::InvalidParams, "G_{m,n} needs coprime m, n >= 0, not both zero");
    const std::size_t h = static_cast<std::size_t>(m + n);
    const Elem p = R.from_int(R.p_int());
    Mat F = zeros(R, h, h), V = zeros(R, h, h);
    for (std::size_t i = 0; i < h; ++i) {
        const std::size_t next = (i + 1) % h;
        const bool unit_edge = static_cast<int>(i) < m; // 0-based i is 1-based i+1 <= m
        F(next, i) = unit_edge ? R.one() : p;
        V(i, next) = unit_edge ? p : R.one();
    }
    return DModule(R, std::move(F), std::move(V));
}

inline DModule zero_module(const Ring& R) { return DModule(R, zeros(R, 0, 0), zeros(R, 0, 0)); }

inline DModule with_precision(const DModule& A, int N)
{
    const Ring R = A.ring().with_precision(N);
    return DModule(R, A.F(), A.V());
}

namespace detail {

inline Ring common_ring(const Ring& x, const Ring& y)
{
    if (!x.same_field(y))
        fail(ErrorCode::RingMismatch, "modules live over different rings");
    return x.N() <= y.N() ? x : y;
}

} // namespace detail

/// Block-diagonal sum; the result carries the smaller of the two precisions.
inline DModule direct_sum(const DModule& A, const DModule& B)
{
    const Ring R = detail::common_ring(A.ring(), B.ring());
    return DModule(R, block_diag(R, mat_reduce(R, A.F()), mat_reduce(R, B.F())),
                   block_diag(R, mat_reduce(R, A.V()), mat_reduce(R, B.V())));
}

/// Dual module with pairing <Fx, y> = σ<x, Vy>: F* = σ(V)^T, V* = σ^{-1}(F)^T.
inline DModule dual(const DModule& A)
{
    const Ring& R = A.ring();
    return DModule(R, transpose(mat_frobenius(R, A.V(), 1)), transpose(mat_frobenius(R, A.F(), -1)));
}

inline DModule base_change(const DModule& A, int a_new)
{
    const Ring& R = A.ring();
    if (a_new < 1 || a_new % R.a() != 0)
        fail(ErrorCode::NotAnExtension, "base_change needs a | a_new");
    if (a_new == R.a())
        return A;
    const Ring big = Ring::make({R.p(), a_new, R.N()});
    const Embedding emb(R, big);
    return DModule(big, emb.map(A.F()), emb.map(A.V()));
}

/// The same module written in the basis given by the columns of C (C invertible):
/// F' = C^{-1} F σ(C), V' = C^{-1} V σ^{-1}(C).
inline DModule change_basis(const DModule& A, const Mat& C)
{
    const Ring& R = A.ring();
    const Mat Ci = inverse(R, C);
    return DModule(R, mat_mul(R, Ci, mat_mul(R, A.F(), mat_frobenius(R, C, 1))),
                   mat_mul(R, Ci, mat_mul(R, A.V(), mat_frobenius(R, C, -1))));
}

/// Row-reduced echelon basis of the span of `vectors` over the residue field R (N = 1).
inline std::vector<Vec> echelon_basis(const Ring& k, std::vector<Vec> vectors)
{
    std::vector<Vec> basis;
    std::vector<std::size_t> pivots;
    for (auto v : vectors) {
        for (std::size_t b = 0; b < basis.size(); ++b) {
            const Elem c = v[pivots[b]];
            if (k.is_zero(c))
                continue;
            for (std::size_t i = 0; i < v.size(); ++i)
                v[i] = k.sub(v[i], k.mul(c, basis[b][i]));
        }
        std::size_t piv = 0;
        while (piv < v.size() && k.is_zero(v[piv]))
            ++piv;
        if (piv == v.size())
            continue;
        const Elem inv = k.inv(v[piv]);
        for (auto& x : v)
            x = k.mul(x, inv);
        for (std::size_t b = 0; b < basis.size(); ++b) {
            const Elem c = basis[b][piv];
            if (k.is_zero(c))
                continue;
            for (std::size_t i = 0; i < v.size(); ++i)
                basis[b][i] = k.sub(basis[b][i], k.mul(c, v[i]));
        }
        basis.push_back(std::move(v));
        pivots.push_back(piv);
    }
    std::vector<std::size_t> order(basis.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return pivots[x] < pivots[y]; });
    std::vector<Vec> sorted;
    for (auto i : order)
        sorted.push_back(basis[i]);
    return sorted;
}

/// Basis over F_{p^a} of ker(F) ∩ ker(V) on M/pM, one vector per embedding α_p ↪ X(1).
inline std::vector<Vec> alpha_p_embeddings(const DModule& A)
{
    const Ring k = A.ring().with_precision(1);
    const std::size_t h = A.rank();
    if (h == 0)
        return {};
    // ker of the semilinear map x ↦ M σ^t(x) is σ^{-t}(ker M)
    auto semilinear_kernel = [&](const Mat& M, long t) {
        std::vector<Vec> out;
        for (auto& g : kernel(k, mat_reduce(k, M))) {
            for (auto& x : g.v)
                x = k.frobenius(x, -t);
            out.push_back(g.v);
        }
        return out;
    };
    const auto kf = semilinear_kernel(A.F(), 1);
    const auto kv = semilinear_kernel(A.V(), -1);
    if (kf.empty() || kv.empty())
        return {};
    const Mat B1 = from_columns(k, h, kf);
    const Mat B2 = from_columns(k, h, kv);
    const Mat stacked = hcat(B1, mat_scale(k, B2, k.neg(k.one())));
    std::vector<Vec> inter;
    for (const auto& g : kernel(k, stacked)) {
        Vec c(g.v.begin(), g.v.begin() + static_cast<std::ptrdiff_t>(kf.size()));
        inter.push_back(mat_vec(k, B1, c));
    }
    return echelon_basis(k, std::move(inter));
}

/// Isogeny A → target whose module is the overlattice L = p^{-denominator_exp}·span(basis) ⊇ M.
/// The target's basis is the columns of p^{-denominator_exp}·lattice_map; log_degree = length_W(L/M).
struct IsogenyData {
    DModule source;
    DModule target;
    int log_degree = 0;
    int denominator_exp = 0;
    Mat lattice_map; // Hermite basis over the source ring
    std::vector<int> hnf_diag;
};

namespace detail {

// Matrix of the semilinear operator (matrix M, twist t) on the lattice spanned by H:
// H^{-1} M σ^t(H), at precision N - loss.
inline std::optional<Mat> transport(const Ring& R, const Mat& H, const Mat& M, long t)
{
    auto sol = solve(R, H, mat_mul(R, M, mat_frobenius(R, H, t)));
    if (!sol)
        return std::nullopt;
    return sol->x;
}

} // namespace detail

/// L = M + p^{-e}·span(generators). Stability under F and V is checked to precision N - e.
inline IsogenyData isogeny_from_lattice(const DModule& A, const Mat& generators, int e)
{
    const Ring& R = A.ring();
    const std::size_t h = A.rank();
    if (generators.rows != h)
        fail(ErrorCode::DimensionMismatch, "lattice generators must have h rows");
    if (e < 0)
        fail(ErrorCode::InvalidParams, "negative denominator exponent");
    if (R.N() - e < 1)
        fail(ErrorCode::PrecisionExhausted, "denominator p^" + std::to_string(e) + " exhausts precision");
    HermiteLattice H = hermite_form(R, generators, e);
    while (e > 0 && min_valuation(R, H.basis) >= 1) {
        H = hermite_form(R, mat_div_p_pow(R, H.basis, 1), e - 1);
        --e;
    }
    int len = 0;
    for (int k : H.diag)
        len += e - k;

    const auto Fl = detail::transport(R, H.basis, A.F(), 1);
    const auto Vl = detail::transport(R, H.basis, A.V(), -1);
    if (!Fl || !Vl)
        fail(ErrorCode::NotStable, (Fl ? std::string("V") : std::string("F")) + " does not preserve the lattice");
    const Ring target_ring = R.with_precision(R.N() - e);
    return IsogenyData{A, DModule(target_ring, *Fl, *Vl), len, e, H.basis, H.diag};
}

inline IsogenyData identity_isogeny(const DModule& A) { return isogeny_from_lattice(A, zeros(A.ring(), A.rank(), 0), 0); }

/// Quotient by the α_p spanned by x ∈ ker F ∩ ker V (mod p).
inline IsogenyData quotient_by_alpha_p(const DModule& A, const Vec& x)
{
    const Ring& R = A.ring();
    const Ring k = R.with_precision(1);
    if (x.size() != A.rank())
        fail(ErrorCode::DimensionMismatch, "alpha_p generator has wrong length");
    Vec xr(x.size());
    bool nonzero = false;
    for (std::size_t i = 0; i < x.size(); ++i) {
        xr[i] = k.reduce(x[i]);
        nonzero = nonzero || !k.is_zero(xr[i]);
    }
    const SemiLinOp Fk{k, mat_reduce(k, A.F()), 1};
    const SemiLinOp Vk{k, mat_reduce(k, A.V()), -1};
    auto all_zero = [&](const Vec& v) {
        return std::all_of(v.begin(), v.end(), [&](const Elem& e) { return k.is_zero(e); });
    };
    if (!nonzero || !all_zero(dvlab::apply(Fk, xr)) || !all_zero(dvlab::apply(Vk, xr)))
        fail(ErrorCode::NotAlphaP, "vector is not a nonzero element of ker F ∩ ker V mod p");
    Mat g = zeros(R, A.rank(), 1);
    for (std::size_t i = 0; i < x.size(); ++i)
        g(i, 0) = R.reduce(xr[i]);
    return isogeny_from_lattice(A, g, 1);
}

/// g ∘ f. The composite target is recomputed from f.source.
inline IsogenyData compose_isogenies(const IsogenyData& f, const IsogenyData& g)
{
    const Ring& R = f.source.ring();
    const Mat P = mat_mul(R, f.lattice_map, mat_reduce(R, g.lattice_map));
    return isogeny_from_lattice(f.source, P, f.denominator_exp + g.denominator_exp);
}

/// Length over W of L/M for the overlattice of an isogeny (== log_degree).
inline int lattice_index(const Ring& R, const Mat& basis, int e)
{
    const int dv = det_valuation(R, basis);
    if (dv == kInfinite)
        fail(ErrorCode::InsufficientPrecision, "lattice basis singular at working precision");
    return static_cast<int>(basis.rows) * e - dv;
}

} // namespace dvlab
