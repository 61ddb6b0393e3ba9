#pragma once

// Slope filtrations, complete slope divisibility, isoclinic splitting, descent and the
// finite enumeration of isogenies to completely slope divisible targets.

#include <cmath>
#include <cstdlib>
#include <exception>
#include <map>
#include <mutex>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "isomorphism.hpp"
#include "newton.hpp"

namespace dvlab {

/// s >= r_1 > r_2 > ... > r_m >= 0.
struct SlopeData {
    int s = 1;
    std::vector<int> r;

    void validate() const
    {
        if (s < 1 || r.empty())
            fail(ErrorCode::InvalidParams, "slope data needs s >= 1 and at least one r");
        if (r.front() > s || r.back() < 0)
            fail(ErrorCode::InvalidParams, "slope data must satisfy s >= r_1 and r_m >= 0");
        for (std::size_t i = 1; i < r.size(); ++i)
            if (r[i] >= r[i - 1])
                fail(ErrorCode::InvalidParams, "r must be strictly decreasing");
    }

    SlopeData scaled(int t) const
    {
        SlopeData out{s * t, r};
        for (auto& x : out.r)
            x *= t;
        return out;
    }

    friend bool operator==(const SlopeData&, const SlopeData&) = default;
};

/// s = lcm of slope denominators, r_i = λ_i s for the slopes in decreasing order.
inline SlopeData slope_data_for(const NewtonPolygon& poly)
{
    SlopeData sd;
    for (const auto& seg : poly.segments)
        sd.s = std::lcm(sd.s, static_cast<int>(seg.slope.den()));
    for (auto it = poly.segments.rbegin(); it != poly.segments.rend(); ++it)
        sd.r.push_back(static_cast<int>(it->slope.num() * (sd.s / it->slope.den())));
    return sd;
}

/// 0 = Y_0 ⊂ Y_1 ⊂ ... ⊂ Y_m = M; steps[i] is a canonical basis of Y_{i+1} in M's coordinates.
struct Filtration {
    DModule module;
    std::vector<Mat> steps;
    std::vector<Rational> slopes; // strictly decreasing
    std::vector<DModule> graded;  // graded[i] = Y_{i+1} / Y_i
};

namespace detail {

inline Ring min_ring(const Ring& x, const Ring& y) { return x.N() <= y.N() ? x : y; }

inline Mat mul_at(const Ring& R, const Mat& X, const Mat& Y) { return mat_mul(R, mat_reduce(R, X), mat_reduce(R, Y)); }

/// Column echelon form with unit pivots; rows are scanned top to bottom. Unique for a
/// saturated submodule.
inline Mat canonical_saturated_basis(const Ring& R, Mat Y)
{
    const std::size_t h = Y.rows, k = Y.cols;
    std::size_t col = 0;
    for (std::size_t row = 0; row < h && col < k; ++row) {
        std::size_t pick = k;
        for (std::size_t j = col; j < k; ++j)
            if (R.is_unit(Y(row, j))) {
                pick = j;
                break;
            }
        if (pick == k)
            continue;
        for (std::size_t i = 0; i < h; ++i)
            std::swap(Y(i, col), Y(i, pick));
        const Elem inv = R.inv(Y(row, col));
        for (std::size_t i = 0; i < h; ++i)
            Y(i, col) = R.mul(Y(i, col), inv);
        for (std::size_t j = 0; j < k; ++j) {
            if (j == col || R.is_zero(Y(row, j)))
                continue;
            const Elem q = Y(row, j);
            for (std::size_t i = 0; i < h; ++i)
                Y(i, j) = R.sub(Y(i, j), R.mul(q, Y(i, col)));
        }
        ++col;
    }
    if (col != k)
        fail(ErrorCode::Internal, "submodule is not saturated");
    return Y;
}

/// Basis of the saturation (Q-span ∩ M) of the column span of G, assumed of full column rank.
/// The saturation is determined only modulo p^{N - d}, d the largest elementary divisor of G.
inline std::pair<Ring, Mat> saturate(const Ring& R, const Mat& G)
{
    const auto sf = smith_normal_form(R, G);
    int dmax = 0;
    for (int d : sf.diag)
        dmax = std::max(dmax, d);
    if (dmax >= R.N())
        fail(ErrorCode::InsufficientPrecision, "submodule rank drops at working precision");
    const Ring Rs = R.with_precision(R.N() - dmax);
    std::vector<Vec> cols;
    for (std::size_t i = 0; i < sf.diag.size(); ++i)
        cols.push_back(column(sf.left_inv, i));
    return {Rs, mat_reduce(Rs, from_columns(R, G.rows, cols))};
}

/// [Y | Z] invertible, for Y saturated.
inline Mat complete_basis(const Ring& R, const Mat& Y)
{
    const auto sf = smith_normal_form(R, Y);
    std::vector<Vec> cols;
    for (std::size_t j = 0; j < Y.cols; ++j)
        cols.push_back(column(Y, j));
    for (std::size_t j = Y.cols; j < Y.rows; ++j)
        cols.push_back(column(sf.left_inv, j));
    return from_columns(R, Y.rows, cols);
}

/// Induced module on X / span(Y), for Y saturated and F, V-stable.
inline DModule quotient_module(const DModule& X, const Mat& Y)
{
    const Ring& R = X.ring();
    const std::size_t h = X.rank(), k = Y.cols;
    const DModule T = change_basis(X, complete_basis(R, Y));
    return DModule(R, submatrix(T.F(), k, k, h - k, h - k), submatrix(T.V(), k, k, h - k, h - k));
}

/// F and V restricted to the F, V-stable submodule spanned by the columns of Y.
inline DModule restrict_module(const DModule& A, const Mat& Y)
{
    const Ring& R = A.ring();
    const auto f = solve(R, Y, mat_mul(R, A.F(), mat_frobenius(R, Y, 1)));
    const auto v = solve(R, Y, mat_mul(R, A.V(), mat_frobenius(R, Y, -1)));
    if (!f || !v || f->loss != 0 || v->loss != 0)
        fail(ErrorCode::NotStable, "submodule is not F, V-stable");
    return DModule(R, f->x, v->x);
}

} // namespace detail

/// σ^{-s}-linear Φ = p^{-r} V^s, over the ring of precision N - r.
inline SemiLinOp phi_operator(const DModule& A, int r, int s)
{
    const Ring& R = A.ring();
    if (r < 0 || s < 1)
        fail(ErrorCode::InvalidParams, "Φ needs r >= 0 and s >= 1");
    if (r >= R.N())
        fail(ErrorCode::InsufficientPrecision, "p^" + std::to_string(r) + " exceeds working precision");
    const SemiLinOp Vs = op_power(A.V_op(), s);
    const int v = min_valuation(R, Vs.matrix);
    if (v < r)
        fail(ErrorCode::NotIntegral, "V^" + std::to_string(s) + " is not divisible by p^" + std::to_string(r));
    const Ring Rr = R.with_precision(R.N() - r);
    return {Rr, mat_reduce(Rr, mat_div_p_pow(R, Vs.matrix, r)), -s};
}

struct EtaleSplit {
    DModule nil;
    DModule etale;
    Mat basis; // [nil basis | étale basis] in A's coordinates
};

/// M = M^{Φ-nil} ⊕ M^{Φ} for Φ = p^{-r}V^s.
inline EtaleSplit phi_etale_split(const DModule& A, int r, int s)
{
    const SemiLinOp phi = phi_operator(A, r, s);
    const Ring& R = phi.ring;
    const auto fd = fitting_decomposition(phi);
    const std::size_t k = fd.nil.rank(), h = A.rank();
    const Mat C = hcat(fd.nil.basis(), fd.bij.basis());
    const DModule T = change_basis(with_precision(A, R.N()), C);
    for (std::size_t i = 0; i < h; ++i)
        for (std::size_t j = 0; j < h; ++j)
            if ((i < k) != (j < k) && (!R.is_zero(T.F()(i, j)) || !R.is_zero(T.V()(i, j))))
                fail(ErrorCode::Internal, "Φ-parts are not F, V-stable");
    auto block = [&](const Mat& M, std::size_t off, std::size_t n) { return submatrix(M, off, off, n, n); };
    return {DModule(R, block(T.F(), 0, k), block(T.V(), 0, k)),
            DModule(R, block(T.F(), k, h - k), block(T.V(), k, h - k)), C};
}

/// Smallest Φ-stable lattice containing M, as p^{-e}·span(P) with P in Hermite form.
inline std::pair<Mat, int> phi_saturation(const DModule& A, int r, int s)
{
    const Ring& R = A.ring();
    const std::size_t h = A.rank();
    const Mat Vs = op_power(A.V_op(), s).matrix;
    Mat P = identity(R, h);
    int e = 0;
    const long bound = static_cast<long>(h) * R.N() + 1;
    for (long iter = 0; iter <= bound; ++iter) {
        const Mat gens = hcat(mat_mul_p_pow(R, P, r), mat_mul(R, Vs, mat_frobenius(R, P, -s)));
        int e2 = e + r;
        HermiteLattice H = hermite_form(R, gens, e2);
        while (e2 > 0 && min_valuation(R, H.basis) >= 1) {
            H = hermite_form(R, mat_div_p_pow(R, H.basis, 1), e2 - 1);
            --e2;
        }
        if (e2 == e && H.basis == P)
            return {P, e};
        P = std::move(H.basis);
        e = e2;
    }
    fail(ErrorCode::NoStabilization, "Φ-orbit of M did not stabilize");
}


namespace detail {

inline Filtration assemble_filtration(std::vector<Mat> steps_top_down, std::vector<DModule> graded_top_down,
                                      const DModule& A, const Ring& R, std::vector<Rational> slopes)
{
    Filtration out{with_precision(A, R.N()), {}, std::move(slopes), {}};
    for (auto it = steps_top_down.rbegin(); it != steps_top_down.rend(); ++it)
        out.steps.push_back(canonical_saturated_basis(R, mat_reduce(R, *it)));
    out.steps.push_back(identity(R, A.rank()));
    for (auto it = graded_top_down.rbegin(); it != graded_top_down.rend(); ++it)
        out.graded.push_back(with_precision(*it, R.N()));
    return out;
}

inline std::vector<Rational> slopes_of(const SlopeData& sd)
{
    std::vector<Rational> out;
    for (int r : sd.r)
        out.emplace_back(r, sd.s);
    return out;
}

} // namespace detail

/// The slope filtration, built from the top: Y_{j-1} is the saturation in Y_j of the Φ_j-nil
/// part of the Φ_j-saturation of Y_j.
inline Filtration slope_filtration(const DModule& A)
{
    const NewtonPolygon poly = newton_polygon(A);
    const SlopeData sd = slope_data_for(poly);
    const std::size_t m = sd.r.size();
    if (A.rank() == 0)
        return {A, {}, {}, {}};

    std::vector<int> nil_rank(m, 0); // rank of Y_j for j = index + 1
    for (std::size_t j = 0; j < m; ++j)
        nil_rank[j] = (j ? nil_rank[j - 1] : 0) + poly.segments[m - 1 - j].mult;

    DModule cur = A;
    Mat basis = identity(A.ring(), A.rank());
    std::vector<Mat> steps;
    std::vector<DModule> graded;
    for (std::size_t j = m; j-- > 1;) {
        const auto [P, e] = phi_saturation(cur, sd.r[j], sd.s);
        const IsogenyData T = isogeny_from_lattice(cur, P, e);
        const SemiLinOp phi = phi_operator(T.target, sd.r[j], sd.s);
        const auto fd = fitting_decomposition(phi);
        if (static_cast<int>(fd.nil.rank()) != nil_rank[j - 1])
            fail(ErrorCode::Internal, "Φ-nil part has the wrong rank");
        const auto [Rs, Y] = detail::saturate(phi.ring, detail::mul_at(phi.ring, T.lattice_map, fd.nil.basis()));
        const DModule X = with_precision(cur, Rs.N());
        graded.push_back(detail::quotient_module(X, Y));
        basis = detail::mul_at(Rs, basis, Y);
        cur = detail::restrict_module(X, Y);
        steps.push_back(basis);
    }
    graded.push_back(cur);
    return detail::assemble_filtration(std::move(steps), std::move(graded), A, cur.ring(), detail::slopes_of(sd));
}

struct CsdResult {
    bool csd = false;
    std::optional<Filtration> filtration;
    std::string failure;
    int level = 0; // 1-based index i of the failing condition
};

/// Greedy from the top: Y_{i-1} must be the Φ_i-nil part of Y_i.
inline CsdResult is_completely_slope_divisible(const DModule& A, const SlopeData& sd)
{
    sd.validate();
    const std::size_t m = sd.r.size();
    auto failed = [](std::string why, std::size_t level) {
        return CsdResult{false, std::nullopt, std::move(why), static_cast<int>(level)};
    };
    DModule cur = A;
    Mat basis = identity(A.ring(), A.rank());
    std::vector<Mat> steps;
    std::vector<DModule> graded;
    for (std::size_t j = m; j-- > 0;) {
        const std::string tag = "Φ_" + std::to_string(j + 1);
        SemiLinOp phi;
        try {
            phi = phi_operator(cur, sd.r[j], sd.s);
        } catch (const Error& e) {
            if (e.code() != ErrorCode::NotIntegral)
                throw;
            return failed(tag + " is not integral on Y_" + std::to_string(j + 1), j + 1);
        }
        const auto fd = fitting_decomposition(phi);
        if (fd.bij.rank() == 0)
            return failed("Y_" + std::to_string(j + 1) + "/Y_" + std::to_string(j) + " is zero", j + 1);
        if (j == 0) {
            if (fd.nil.rank() != 0)
                return failed(tag + " is not bijective on Y_1", 1);
            graded.push_back(cur);
            break;
        }
        if (fd.nil.rank() == 0)
            return failed("Y_" + std::to_string(j) + " is zero", j);
        const Ring& Rs = phi.ring;
        const Mat Y = fd.nil.basis();
        const DModule X = with_precision(cur, Rs.N());
        graded.push_back(detail::quotient_module(X, Y));
        basis = detail::mul_at(Rs, basis, Y);
        cur = detail::restrict_module(X, Y);
        steps.push_back(basis);
    }
    CsdResult res;
    res.csd = true;
    res.filtration = detail::assemble_filtration(std::move(steps), std::move(graded), A, cur.ring(),
                                                 detail::slopes_of(sd));
    return res;
}

struct IsoclinicSplit {
    std::vector<DModule> parts; // decreasing slope
    std::vector<Rational> slopes;
    Mat witness; // change_basis(A, witness) == block_diag(parts)
};

inline IsoclinicSplit split_isoclinic(const DModule& A, std::optional<SlopeData> given = std::nullopt)
{
    const SlopeData sd = given ? *given : slope_data_for(newton_polygon(A));
    const CsdResult chk = is_completely_slope_divisible(A, sd);
    if (!chk.csd)
        fail(ErrorCode::NotCSD, chk.failure);
    const std::size_t h = A.rank();
    DModule cur = A;
    Mat basis = identity(A.ring(), h);
    std::vector<DModule> parts;
    std::vector<Mat> bases;
    for (std::size_t j = sd.r.size(); j-- > 1;) {
        const EtaleSplit sp = phi_etale_split(cur, sd.r[j], sd.s);
        const Ring& Rs = sp.nil.ring();
        const Mat C = detail::mul_at(Rs, basis, sp.basis);
        const std::size_t k = sp.nil.rank();
        parts.push_back(sp.etale);
        bases.push_back(submatrix(C, 0, k, h, C.cols - k));
        basis = submatrix(C, 0, 0, h, k);
        cur = sp.nil;
    }
    parts.push_back(cur);
    bases.push_back(basis);
    const Ring R = cur.ring();
    IsoclinicSplit out;
    out.slopes = detail::slopes_of(sd);
    out.witness = zeros(R, h, 0);
    for (std::size_t i = parts.size(); i-- > 0;) {
        out.parts.push_back(with_precision(parts[i], R.N()));
        out.witness = hcat(out.witness, mat_reduce(R, bases[i]));
    }
    return out;
}

namespace detail {

struct SaturatedLattice {
    Mat basis; // square; the lattice is p^{-e}·span(basis)
    int e = 0;
    Ring ring; // precision to which basis is known
};

inline SaturatedLattice csd_lattice(const DModule& X, const SlopeData& sd, std::size_t j)
{
    auto [P, e] = phi_saturation(X, sd.r[j], sd.s);
    if (j == 0)
        return {std::move(P), e, X.ring()};
    const IsogenyData T = isogeny_from_lattice(X, P, e);
    const EtaleSplit sp = phi_etale_split(T.target, sd.r[j], sd.s);
    const SaturatedLattice inner = csd_lattice(sp.nil, sd, j - 1);
    const Ring R = min_ring(inner.ring, sp.nil.ring());
    const std::size_t h = X.rank(), k = sp.nil.rank();
    const Mat Bn = mat_reduce(R, submatrix(sp.basis, 0, 0, h, k));
    const Mat Be = mat_reduce(R, submatrix(sp.basis, 0, k, h, h - k));
    const Mat cols = hcat(mul_at(R, Bn, inner.basis), mat_mul_p_pow(R, Be, inner.e));
    return {mul_at(R, P, cols), e + inner.e, R};
}

} // namespace detail

/// The smallest overlattice of M which is completely slope divisible for the canonical slope data.
inline IsogenyData csd_saturate(const DModule& A)
{
    const SlopeData sd = slope_data_for(newton_polygon(A));
    if (A.rank() == 0)
        return identity_isogeny(A);
    const detail::SaturatedLattice L = detail::csd_lattice(A, sd, sd.r.size() - 1);
    if (L.ring.N() < L.e)
        fail(ErrorCode::PrecisionExhausted, "saturation exponent " + std::to_string(L.e) +
                                                " exceeds precision " + std::to_string(L.ring.N()));
    IsogenyData iso = isogeny_from_lattice(A, mat_reduce(A.ring(), L.basis), L.e);
    const CsdResult chk = is_completely_slope_divisible(iso.target, sd);
    if (!chk.csd)
        fail(ErrorCode::Internal, "saturated target is not completely slope divisible: " + chk.failure);
    return iso;
}

struct Descent {
    DModule model;   // over W_N(F_{p^g})
    Mat witness;     // change_basis(ambient, witness) == base_change(model, ambient degree)
    DModule ambient; // A, or its base change when the descent field is not contained in F_{p^a}
};

namespace detail {

inline std::optional<Descent> try_descend(const DModule& X, int r, int s)
{
    const SemiLinOp phi = phi_operator(X, r, s);
    const Ring& R = phi.ring;
    const FixedLattice fl = fixed_points(phi);
    if (fl.rank() != X.rank())
        return std::nullopt;
    std::vector<Vec> cols;
    for (const auto& g : fl.basis) {
        if (g.order != R.N())
            return std::nullopt;
        cols.push_back(g.v);
    }
    const Mat B = from_columns(R, X.rank(), cols);
    if (!is_invertible(R, B))
        return std::nullopt;
    const DModule Xr = with_precision(X, R.N());
    const DModule T = change_basis(Xr, B);
    const Embedding emb(fl.subring, R);
    auto pull = [&](const Mat& M) {
        Mat out{M.rows, M.cols, std::vector<Elem>(M.data.size())};
        for (std::size_t i = 0; i < M.data.size(); ++i) {
            auto x = emb.preimage(M.data[i]);
            if (!x)
                fail(ErrorCode::DescentFailed, "operator entries do not lie in the fixed subring");
            out.data[i] = *x;
        }
        return out;
    };
    return Descent{DModule(fl.subring, pull(T.F()), pull(T.V())), B, Xr};
}

} // namespace detail

/// Model over W(F_{p^g}) spanned by Φ-fixed vectors, Φ = p^{-r}V^s.
inline Descent descend_finite_field(const DModule& A, const SlopeData& sd)
{
    sd.validate();
    if (sd.r.size() != 1)
        fail(ErrorCode::InvalidParams, "descent takes slope data with a single r");
    const CsdResult chk = is_completely_slope_divisible(A, sd);
    if (!chk.csd)
        fail(ErrorCode::NotCSD, chk.failure);
    if (auto d = detail::try_descend(A, sd.r[0], sd.s))
        return std::move(*d);
    const int a = A.ring().a();
    if (a % sd.s != 0)
        if (auto d = detail::try_descend(base_change(A, std::lcm(a, sd.s)), sd.r[0], sd.s))
            return std::move(*d);
    fail(ErrorCode::DescentFailed, "Φ-fixed vectors do not span the module");
}

inline long candidate_cap()
{
    if (const char* env = std::getenv("DVLAB_CANDIDATE_CAP")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v > 0)
            return v;
    }
    return 100'000;
}

namespace detail {

/// Number of raw Hermite shapes visited by for_each_hermite.
inline double hermite_shape_count(std::uint64_t p, int g, std::size_t h, int d, int len)
{
    double total = 0;
    std::vector<int> k(h, 0);
    auto rec = [&](auto&& self, std::size_t i, int left, double acc) -> void {
        if (i == h) {
            if (left == 0)
                total += acc;
            return;
        }
        for (int ki = 0; ki <= d; ++ki) {
            if (d - ki > left)
                continue;
            self(self, i + 1, left - (d - ki),
                 acc * std::pow(static_cast<double>(p), static_cast<double>(g) * ki * static_cast<double>(h - 1 - i)));
        }
    };
    rec(rec, 0, len, 1.0);
    return total;
}

/// Calls fn(H) for every lattice p^d M ⊆ S ⊆ M with length(M/S) = h·d - len, H its Hermite basis.
template <class Fn>
void for_each_hermite(const Ring& S, std::size_t h, int d, int len, Fn&& fn)
{
    const std::size_t g = static_cast<std::size_t>(S.a());
    std::vector<int> k(h, 0);
    auto emit = [&]() {
        // odometer over the coordinates of the entries above the diagonal
        std::vector<std::pair<std::size_t, std::size_t>> slots;
        for (std::size_t j = 0; j < h; ++j)
            for (std::size_t i = 0; i < j; ++i)
                if (k[i] > 0)
                    slots.emplace_back(i, j);
        const std::size_t n = slots.size() * g;
        std::vector<Int> digit(n, 0);
        for (;;) {
            Mat H = zeros(S, h, h);
            for (std::size_t j = 0; j < h; ++j)
                H(j, j) = S.from_int(S.p_pow(k[j]));
            for (std::size_t t = 0; t < slots.size(); ++t) {
                std::vector<Int> c(digit.begin() + static_cast<std::ptrdiff_t>(t * g),
                                   digit.begin() + static_cast<std::ptrdiff_t>((t + 1) * g));
                H(slots[t].first, slots[t].second) = S.from_coeffs(std::move(c));
            }
            if (hermite_form(S, H, d).basis == H)
                fn(H);
            std::size_t t = 0;
            while (t < n) {
                digit[t] += 1;
                if (digit[t] < S.p_pow(k[slots[t / g].first]))
                    break;
                digit[t] = 0;
                ++t;
            }
            if (t == n)
                return;
        }
    };
    auto rec = [&](auto&& self, std::size_t i, int left) -> void {
        if (i == h) {
            if (left == 0)
                emit();
            return;
        }
        for (int ki = 0; ki <= d; ++ki) {
            if (d - ki > left)
                continue;
            k[i] = ki;
            self(self, i + 1, left - (d - ki));
        }
    };
    rec(rec, 0, len);
}

inline std::string lattice_key(const Mat& H)
{
    std::ostringstream os;
    for (const auto& x : H.data) {
        for (const auto& c : x.c)
            os << c.get_str() << ',';
        os << ';';
    }
    return os.str();
}

} // namespace detail

struct EnumerationResult {
    std::vector<IsogenyData> isogenies; // F, V-stable targets, sorted by lattice
    long candidates = 0;                // Hermite shapes examined
    long phi_stable = 0;                // Φ-stable overlattices of the right length
};

/// Isogenies A → Z of log-degree log_d with Z completely slope divisible for sd (A isoclinic).
inline EnumerationResult enumerate_csd_isogenies(const DModule& A, int log_d, const SlopeData& sd,
                                                 unsigned threads = 1, long cap = candidate_cap())
{
    if (log_d < 0)
        fail(ErrorCode::InvalidParams, "negative log-degree");
    sd.validate();
    if (!is_isoclinic(A))
        fail(ErrorCode::NotIsoclinic, "enumeration requires an isoclinic module");
    if (sd.r.size() != 1)
        fail(ErrorCode::InvalidParams, "isoclinic enumeration takes a single r");
    const CsdResult chk = is_completely_slope_divisible(A, sd);
    if (!chk.csd)
        fail(ErrorCode::NotCSD, chk.failure);

    const Ring& R = A.ring();
    const std::size_t h = A.rank();
    const int d = log_d;
    const SemiLinOp phi = phi_operator(A, sd.r[0], sd.s);
    const Ring& Rr = phi.ring;
    if (Rr.N() < d)
        fail(ErrorCode::PrecisionExhausted, "log-degree exceeds the precision left after Φ");

    // Lattices between p^d M and M are decided modulo p^{d+1}; lattice columns are only
    // needed modulo p^{N-r} >= p^d, since M absorbs the rest.
    EnumerationResult out;
    std::vector<Mat> lattices;
    const auto descent = detail::try_descend(A, sd.r[0], sd.s);
    const Ring& S = descent ? descent->model.ring() : Rr;
    const Ring Sd = S.with_precision(d + 1);
    const double shapes = detail::hermite_shape_count(S.p(), S.a(), h, d, log_d);
    if (shapes > static_cast<double>(cap))
        fail(ErrorCode::BudgetExceeded, "more than " + std::to_string(cap) + " Hermite candidates");
    out.candidates = static_cast<long>(shapes);
    if (descent) {
        const Embedding emb(S, Rr);
        detail::for_each_hermite(Sd, h, d, log_d, [&](const Mat& H) {
            lattices.push_back(mat_reduce(R, mat_mul(Rr, descent->witness, emb.map(mat_reduce(S, H)))));
        });
    } else {
        const Mat phi_d = mat_reduce(Sd, phi.matrix);
        detail::for_each_hermite(Sd, h, d, log_d, [&](const Mat& H) {
            if (solve(Sd, H, mat_mul(Sd, phi_d, mat_frobenius(Sd, H, phi.twist))))
                lattices.push_back(mat_reduce(R, H));
        });
    }
    out.phi_stable = static_cast<long>(lattices.size());

    std::vector<std::optional<IsogenyData>> found(lattices.size());
    auto work = [&](std::size_t first, std::size_t stride) {
        for (std::size_t i = first; i < lattices.size(); i += stride) {
            try {
                found[i] = isogeny_from_lattice(A, lattices[i], d);
            } catch (const Error& e) {
                if (e.code() != ErrorCode::NotStable)
                    throw;
            }
        }
    };
    const std::size_t nt = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(lattices.size())));
    if (nt <= 1) {
        work(0, 1);
    } else {
        std::vector<std::thread> pool;
        std::vector<std::exception_ptr> errs(nt);
        for (std::size_t t = 0; t < nt; ++t)
            pool.emplace_back([&, t] {
                try {
                    work(t, nt);
                } catch (...) {
                    errs[t] = std::current_exception();
                }
            });
        for (auto& th : pool)
            th.join();
        for (auto& e : errs)
            if (e)
                std::rethrow_exception(e);
    }

    std::map<std::string, IsogenyData> sorted;
    for (auto& f : found)
        if (f)
            sorted.emplace(detail::lattice_key(f->lattice_map), std::move(*f));
    for (auto& [key, iso] : sorted)
        out.isogenies.push_back(std::move(iso));
    return out;
}

} // namespace dvlab
