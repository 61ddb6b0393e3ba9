#pragma once

// Dense matrices over W_N(F_{p^a}) and the linear algebra of a local principal ring:
// Smith form, solving, kernels, images and canonical Hermite forms of lattices.

#include <algorithm>
#include <optional>
#include <utility>
#include <vector>

#include "padic.hpp"

namespace dvlab {

struct Mat {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<Elem> data; // row-major

    Elem& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
    const Elem& operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }

    friend bool operator==(const Mat& x, const Mat& y)
    {
        return x.rows == y.rows && x.cols == y.cols && x.data == y.data;
    }
};

using Vec = std::vector<Elem>;

inline Mat zeros(const Ring& R, std::size_t r, std::size_t c)
{
    return Mat{r, c, std::vector<Elem>(r * c, R.zero())};
}

inline Mat identity(const Ring& R, std::size_t n)
{
    Mat m = zeros(R, n, n);
    for (std::size_t i = 0; i < n; ++i)
        m(i, i) = R.one();
    return m;
}

inline Mat scalar_matrix(const Ring& R, std::size_t n, const Elem& s)
{
    Mat m = zeros(R, n, n);
    for (std::size_t i = 0; i < n; ++i)
        m(i, i) = s;
    return m;
}

inline Mat mat_mul(const Ring& R, const Mat& A, const Mat& B)
{
    if (A.cols != B.rows)
        fail(ErrorCode::DimensionMismatch, "matrix product shape mismatch");
    Mat C = zeros(R, A.rows, B.cols);
    for (std::size_t i = 0; i < A.rows; ++i)
        for (std::size_t k = 0; k < A.cols; ++k) {
            const Elem& aik = A(i, k);
            if (R.is_zero(aik))
                continue;
            for (std::size_t j = 0; j < B.cols; ++j)
                C(i, j) = R.add(C(i, j), R.mul(aik, B(k, j)));
        }
    return C;
}

inline Vec mat_vec(const Ring& R, const Mat& A, const Vec& v)
{
    if (A.cols != v.size())
        fail(ErrorCode::DimensionMismatch, "matrix-vector shape mismatch");
    Vec out(A.rows, R.zero());
    for (std::size_t i = 0; i < A.rows; ++i)
        for (std::size_t j = 0; j < A.cols; ++j)
            out[i] = R.add(out[i], R.mul(A(i, j), v[j]));
    return out;
}

inline Mat mat_add(const Ring& R, const Mat& A, const Mat& B)
{
    if (A.rows != B.rows || A.cols != B.cols)
        fail(ErrorCode::DimensionMismatch, "matrix sum shape mismatch");
    Mat C = A;
    for (std::size_t i = 0; i < C.data.size(); ++i)
        C.data[i] = R.add(A.data[i], B.data[i]);
    return C;
}

inline Mat mat_sub(const Ring& R, const Mat& A, const Mat& B)
{
    if (A.rows != B.rows || A.cols != B.cols)
        fail(ErrorCode::DimensionMismatch, "matrix difference shape mismatch");
    Mat C = A;
    for (std::size_t i = 0; i < C.data.size(); ++i)
        C.data[i] = R.sub(A.data[i], B.data[i]);
    return C;
}

inline Mat mat_scale(const Ring& R, const Mat& A, const Elem& s)
{
    Mat C = A;
    for (auto& x : C.data)
        x = R.mul(x, s);
    return C;
}

inline Mat mat_mul_p_pow(const Ring& R, const Mat& A, int k)
{
    Mat C = A;
    for (auto& x : C.data)
        x = R.mul_p_pow(x, k);
    return C;
}

inline Mat mat_div_p_pow(const Ring& R, const Mat& A, int k)
{
    Mat C = A;
    for (auto& x : C.data)
        x = R.div_p_pow(x, k);
    return C;
}

/// Entrywise σ^t.
inline Mat mat_frobenius(const Ring& R, const Mat& A, long t)
{
    if (((t % R.a()) + R.a()) % R.a() == 0)
        return A;
    Mat C = A;
    for (auto& x : C.data)
        x = R.frobenius(x, t);
    return C;
}

inline Mat mat_reduce(const Ring& R, const Mat& A)
{
    Mat C = A;
    for (auto& x : C.data)
        x = R.reduce(x);
    return C;
}

inline Mat transpose(const Mat& A)
{
    Mat T{A.cols, A.rows, std::vector<Elem>(A.data.size())};
    for (std::size_t i = 0; i < A.rows; ++i)
        for (std::size_t j = 0; j < A.cols; ++j)
            T(j, i) = A(i, j);
    return T;
}

inline Mat block_diag(const Ring& R, const Mat& A, const Mat& B)
{
    Mat C = zeros(R, A.rows + B.rows, A.cols + B.cols);
    for (std::size_t i = 0; i < A.rows; ++i)
        for (std::size_t j = 0; j < A.cols; ++j)
            C(i, j) = A(i, j);
    for (std::size_t i = 0; i < B.rows; ++i)
        for (std::size_t j = 0; j < B.cols; ++j)
            C(A.rows + i, A.cols + j) = B(i, j);
    return C;
}

inline Mat hcat(const Mat& A, const Mat& B)
{
    if (A.rows != B.rows)
        fail(ErrorCode::DimensionMismatch, "hcat row mismatch");
    Mat C{A.rows, A.cols + B.cols, std::vector<Elem>(A.rows * (A.cols + B.cols))};
    for (std::size_t i = 0; i < A.rows; ++i) {
        for (std::size_t j = 0; j < A.cols; ++j)
            C(i, j) = A(i, j);
        for (std::size_t j = 0; j < B.cols; ++j)
            C(i, A.cols + j) = B(i, j);
    }
    return C;
}

inline Mat submatrix(const Mat& A, std::size_t r0, std::size_t c0, std::size_t nr, std::size_t nc)
{
    Mat C{nr, nc, std::vector<Elem>(nr * nc)};
    for (std::size_t i = 0; i < nr; ++i)
        for (std::size_t j = 0; j < nc; ++j)
            C(i, j) = A(r0 + i, c0 + j);
    return C;
}

inline Vec column(const Mat& A, std::size_t j)
{
    Vec v(A.rows);
    for (std::size_t i = 0; i < A.rows; ++i)
        v[i] = A(i, j);
    return v;
}

inline Mat from_columns(const Ring& R, std::size_t rows, const std::vector<Vec>& cols)
{
    Mat m = zeros(R, rows, cols.size());
    for (std::size_t j = 0; j < cols.size(); ++j)
        for (std::size_t i = 0; i < rows; ++i)
            m(i, j) = cols[j][i];
    return m;
}

inline int min_valuation(const Ring& R, const Mat& A)
{
    int v = kInfinite;
    for (const auto& x : A.data)
        v = std::min(v, R.valuation(x));
    return v;
}

inline bool is_zero(const Ring& R, const Mat& A)
{
    return std::all_of(A.data.begin(), A.data.end(), [&](const Elem& x) { return R.is_zero(x); });
}

/// left * A * right = D, D(i,i) = p^{diag[i]} (zero when diag[i] == kInfinite), diag nondecreasing.
struct SmithForm {
    std::vector<int> diag;
    Mat left;
    Mat left_inv;
    Mat right;
};

namespace detail {

inline void row_axpy(const Ring& R, Mat& M, std::size_t dst, std::size_t src, const Elem& q)
{
    for (std::size_t j = 0; j < M.cols; ++j)
        if (!R.is_zero(M(src, j)))
            M(dst, j) = R.sub(M(dst, j), R.mul(q, M(src, j)));
}

inline void col_axpy(const Ring& R, Mat& M, std::size_t dst, std::size_t src, const Elem& q)
{
    for (std::size_t i = 0; i < M.rows; ++i)
        if (!R.is_zero(M(i, src)))
            M(i, dst) = R.sub(M(i, dst), R.mul(q, M(i, src)));
}

inline void swap_rows(Mat& M, std::size_t a, std::size_t b)
{
    if (a == b)
        return;
    for (std::size_t j = 0; j < M.cols; ++j)
        std::swap(M(a, j), M(b, j));
}

inline void swap_cols(Mat& M, std::size_t a, std::size_t b)
{
    if (a == b)
        return;
    for (std::size_t i = 0; i < M.rows; ++i)
        std::swap(M(i, a), M(i, b));
}

} // namespace detail

/// Valuation pivoting; ties broken in row-major order.
inline SmithForm smith_normal_form(const Ring& R, const Mat& A)
{
    Mat B = A;
    SmithForm sf;
    sf.left = identity(R, A.rows);
    sf.left_inv = identity(R, A.rows);
    sf.right = identity(R, A.cols);
    const std::size_t n = std::min(A.rows, A.cols);
    for (std::size_t k = 0; k < n; ++k) {
        int best = kInfinite;
        std::size_t bi = k, bj = k;
        for (std::size_t i = k; i < B.rows && best > 0; ++i)
            for (std::size_t j = k; j < B.cols; ++j) {
                const int v = R.valuation(B(i, j));
                if (v < best) {
                    best = v;
                    bi = i;
                    bj = j;
                    if (v == 0)
                        break;
                }
            }
        if (best == kInfinite) {
            sf.diag.resize(n, kInfinite);
            break;
        }
        detail::swap_rows(B, k, bi);
        detail::swap_rows(sf.left, k, bi);
        detail::swap_cols(sf.left_inv, k, bi);
        detail::swap_cols(B, k, bj);
        detail::swap_cols(sf.right, k, bj);

        const Elem u = R.div_p_pow(B(k, k), best);
        const Elem uinv = R.inv(u);
        for (std::size_t j = 0; j < B.cols; ++j)
            B(k, j) = R.mul(B(k, j), uinv);
        for (std::size_t j = 0; j < sf.left.cols; ++j)
            sf.left(k, j) = R.mul(sf.left(k, j), uinv);
        for (std::size_t i = 0; i < sf.left_inv.rows; ++i)
            sf.left_inv(i, k) = R.mul(sf.left_inv(i, k), u);

        for (std::size_t i = k + 1; i < B.rows; ++i) {
            if (R.is_zero(B(i, k)))
                continue;
            const Elem q = R.div_p_pow(B(i, k), best);
            detail::row_axpy(R, B, i, k, q);
            detail::row_axpy(R, sf.left, i, k, q);
            // inverse update: column k of left_inv gains q * column i
            for (std::size_t r = 0; r < sf.left_inv.rows; ++r)
                sf.left_inv(r, k) = R.add(sf.left_inv(r, k), R.mul(q, sf.left_inv(r, i)));
        }
        for (std::size_t j = k + 1; j < B.cols; ++j) {
            if (R.is_zero(B(k, j)))
                continue;
            const Elem q = R.div_p_pow(B(k, j), best);
            detail::col_axpy(R, B, j, k, q);
            detail::col_axpy(R, sf.right, j, k, q);
        }
        sf.diag.push_back(best);
    }
    return sf;
}

/// Σ of elementary-divisor valuations; kInfinite when singular mod p^N.
inline int det_valuation(const Ring& R, const Mat& A)
{
    const auto sf = smith_normal_form(R, A);
    int s = 0;
    for (int d : sf.diag) {
        if (d == kInfinite)
            return kInfinite;
        s += d;
    }
    return s;
}

/// Some X with A X = B, or nullopt. X is determined modulo p^{N - loss}, loss the largest
/// elementary-divisor valuation of A.
struct SolveResult {
    Mat x;
    int loss = 0;
};

inline std::optional<SolveResult> solve(const Ring& R, const Mat& A, const Mat& B)
{
    if (A.rows != B.rows)
        fail(ErrorCode::DimensionMismatch, "solve: row mismatch");
    const auto sf = smith_normal_form(R, A);
    const Mat UB = mat_mul(R, sf.left, B);
    Mat Y = zeros(R, A.cols, B.cols);
    int loss = 0;
    for (std::size_t i = 0; i < A.rows; ++i) {
        const int d = i < sf.diag.size() ? sf.diag[i] : kInfinite;
        for (std::size_t j = 0; j < B.cols; ++j) {
            const Elem& b = UB(i, j);
            if (d == kInfinite) {
                if (!R.is_zero(b))
                    return std::nullopt;
                continue;
            }
            if (R.valuation(b) < d)
                return std::nullopt;
            Y(i, j) = R.div_p_pow(b, d);
        }
        if (d != kInfinite)
            loss = std::max(loss, d);
    }
    return SolveResult{mat_mul(R, sf.right, Y), loss};
}

inline Mat inverse(const Ring& R, const Mat& A)
{
    if (A.rows != A.cols)
        fail(ErrorCode::DimensionMismatch, "inverse of non-square matrix");
    auto res = solve(R, A, identity(R, A.rows));
    if (!res || res->loss != 0)
        fail(ErrorCode::NonUnit, "matrix is not invertible");
    return res->x;
}

inline bool is_invertible(const Ring& R, const Mat& A)
{
    if (A.rows != A.cols)
        return false;
    return det_valuation(R, A) == 0;
}

/// A generator of a cyclic summand together with its annihilator exponent
/// (p^order kills it; order == N means a free generator).
struct Generator {
    Vec v;
    int order;
};

inline std::vector<Generator> kernel(const Ring& R, const Mat& A)
{
    const auto sf = smith_normal_form(R, A);
    std::vector<Generator> gens;
    for (std::size_t i = 0; i < A.cols; ++i) {
        const int d = i < sf.diag.size() ? sf.diag[i] : kInfinite;
        if (d == 0)
            continue;
        Vec v = column(sf.right, i);
        if (d == kInfinite || d >= R.N()) {
            gens.push_back({std::move(v), R.N()});
        } else {
            for (auto& x : v)
                x = R.mul_p_pow(x, R.N() - d);
            gens.push_back({std::move(v), d});
        }
    }
    return gens;
}

/// Generators of the column span of A.
inline std::vector<Generator> image(const Ring& R, const Mat& A)
{
    const auto sf = smith_normal_form(R, A);
    std::vector<Generator> gens;
    for (std::size_t i = 0; i < sf.diag.size(); ++i) {
        const int d = sf.diag[i];
        if (d == kInfinite)
            break;
        Vec v = column(sf.left_inv, i);
        for (auto& x : v)
            x = R.mul_p_pow(x, d);
        gens.push_back({std::move(v), R.N() - d});
    }
    return gens;
}

/// Z/p^N-length of the column span of A.
inline long span_length(const Ring& R, const Mat& A)
{
    long len = 0;
    for (int d : smith_normal_form(R, A).diag)
        if (d != kInfinite && d < R.N())
            len += static_cast<long>(R.N() - d) * R.a();
    return len;
}

/// Canonical Hermite form of a lattice S with p^e M ⊆ S ⊆ M (M = W^h), e < N.
/// Upper triangular, diagonal exactly p^{k_i}, entries above row i reduced coordinatewise
/// into [0, p^{k_i}). Pivots are chosen from the bottom row upwards.
struct HermiteLattice {
    Mat basis;
    std::vector<int> diag;

    friend bool operator==(const HermiteLattice& x, const HermiteLattice& y)
    {
        return x.basis == y.basis && x.diag == y.diag;
    }
};

inline HermiteLattice hermite_form(const Ring& R, const Mat& generators, int e)
{
    const std::size_t h = generators.rows;
    if (e >= R.N())
        fail(ErrorCode::PrecisionExhausted, "lattice exponent reaches working precision");
    std::vector<Vec> cols;
    for (std::size_t j = 0; j < generators.cols; ++j)
        cols.push_back(column(generators, j));
    for (std::size_t i = 0; i < h; ++i) {
        Vec v(h, R.zero());
        v[i] = R.from_int(R.p_pow(e));
        cols.push_back(std::move(v));
    }
    std::vector<Vec> pivots(h);
    std::vector<int> diag(h, 0);
    for (std::size_t row = h; row-- > 0;) {
        int best = kInfinite;
        std::size_t bj = 0;
        for (std::size_t j = 0; j < cols.size(); ++j) {
            const int v = R.valuation(cols[j][row]);
            if (v < best) {
                best = v;
                bj = j;
            }
        }
        if (best == kInfinite)
            fail(ErrorCode::Internal, "hermite_form: lattice does not contain p^e M");
        Vec piv = cols[bj];
        cols.erase(cols.begin() + static_cast<std::ptrdiff_t>(bj));
        const Elem uinv = R.inv(R.div_p_pow(piv[row], best));
        for (auto& x : piv)
            x = R.mul(x, uinv);
        for (auto& c : cols) {
            if (R.is_zero(c[row]))
                continue;
            const Elem q = R.div_p_pow(c[row], best);
            for (std::size_t i = 0; i < h; ++i)
                c[i] = R.sub(c[i], R.mul(q, piv[i]));
        }
        pivots[row] = std::move(piv);
        diag[row] = best;
    }
    for (std::size_t j = 0; j < h; ++j) {
        for (std::size_t i = j; i-- > 0;) {
            const Int& m = R.p_pow(diag[i]);
            Elem q = R.zero();
            bool nonzero = false;
            for (std::size_t t = 0; t < q.c.size(); ++t) {
                mpz_fdiv_q(q.c[t].get_mpz_t(), pivots[j][i].c[t].get_mpz_t(), m.get_mpz_t());
                nonzero = nonzero || q.c[t] != 0;
            }
            if (!nonzero)
                continue;
            for (std::size_t r = 0; r <= i; ++r)
                pivots[j][r] = R.sub(pivots[j][r], R.mul(q, pivots[i][r]));
        }
    }
    return HermiteLattice{from_columns(R, h, pivots), diag};
}

/// Embedding W_N(F_{p^a}) -> W_N(F_{p^b}) for a | b, σ-equivariant.
class Embedding {
public:
    Embedding(const Ring& small, const Ring& big) : small_(small), big_(big)
    {
        if (small.p() != big.p() || big.a() % small.a() != 0)
            fail(ErrorCode::NotAnExtension, "degree " + std::to_string(small.a()) + " does not divide " +
                                                std::to_string(big.a()));
        if (small.N() != big.N())
            fail(ErrorCode::RingMismatch, "embedding requires equal precision");
        if (small.a() == 1) {
            root_ = big.from_int(small.generator().c[0]);
        } else {
            root_ = find_root(small.modulus(), big);
        }
        powers_.push_back(big.one());
        for (int i = 1; i < small.a(); ++i)
            powers_.push_back(big.mul(powers_.back(), root_));
    }

    const Ring& source() const { return small_; }
    const Ring& target() const { return big_; }
    /// Image of the generator of the smaller ring.
    const Elem& root() const { return root_; }

    Elem operator()(const Elem& x) const
    {
        Elem r = big_.zero();
        for (std::size_t i = 0; i < x.c.size(); ++i)
            r = big_.add(r, big_.mul_int(powers_[i], x.c[i]));
        return r;
    }

    Mat map(const Mat& A) const
    {
        Mat C{A.rows, A.cols, std::vector<Elem>(A.data.size())};
        for (std::size_t i = 0; i < A.data.size(); ++i)
            C.data[i] = (*this)(A.data[i]);
        return C;
    }

    /// Preimage of an element of the subring; nullopt if y is not in the image.
    std::optional<Elem> preimage(const Elem& y) const
    {
        const Ring Z = Ring::make({big_.p(), 1, big_.N()});
        const std::size_t a = static_cast<std::size_t>(big_.a());
        const std::size_t g = static_cast<std::size_t>(small_.a());
        Mat A = zeros(Z, a, g);
        Mat b = zeros(Z, a, 1);
        for (std::size_t i = 0; i < a; ++i) {
            for (std::size_t j = 0; j < g; ++j)
                A(i, j) = Z.from_int(powers_[j].c[i]);
            b(i, 0) = Z.from_int(y.c[i]);
        }
        auto sol = solve(Z, A, b);
        if (!sol)
            return std::nullopt;
        std::vector<Int> c(g);
        for (std::size_t j = 0; j < g; ++j)
            c[j] = sol->x(j, 0).c[0];
        return small_.from_coeffs(std::move(c));
    }

private:
    static Elem find_root(const std::vector<Int>& f, const Ring& big)
    {
        const Ring k = big.with_precision(1);
        const std::size_t n = static_cast<std::size_t>(big.a());
        const std::uint64_t p = big.p();
        std::vector<std::uint64_t> digits(n, 0);
        Elem root;
        bool found = false;
        for (std::uint64_t count = 0; count < 50'000'000; ++count) {
            std::vector<Int> c(n);
            for (std::size_t i = 0; i < n; ++i)
                c[i] = static_cast<unsigned long>(digits[i]);
            Elem x = k.from_coeffs(c);
            if (k.is_zero(k.eval_poly(f, x))) {
                root = x;
                found = true;
                break;
            }
            std::size_t i = 0;
            while (i < n && ++digits[i] == p)
                digits[i++] = 0;
            if (i == n)
                break;
        }
        if (!found)
            fail(ErrorCode::Internal, "no root of the subfield modulus found");
        std::vector<Int> deriv;
        for (std::size_t i = 1; i < f.size(); ++i)
            deriv.push_back(f[i] * static_cast<unsigned long>(i));
        Elem y = big.reduce(root);
        for (int it = 0; it < 2 * big.N() + 4; ++it) {
            const Elem fy = big.eval_poly(f, y);
            if (big.is_zero(fy))
                return y;
            y = big.sub(y, big.mul(fy, big.inv(big.eval_poly(deriv, y))));
        }
        fail(ErrorCode::Internal, "root lift did not converge");
    }

    Ring small_;
    Ring big_;
    Elem root_;
    std::vector<Elem> powers_;
};

} // namespace dvlab
