#pragma once

#include <vector>

#include "matrix.hpp"

namespace dvlab {

/// Coefficients c_0..c_n (low degree first, c_n = 1) of det(x·I - A), computed with
/// Berkowitz's division-free recurrence so it is valid over rings with zero divisors.
inline std::vector<Elem> charpoly_berkowitz(const Ring& R, const Mat& A)
{
    const std::size_t n = A.rows;
    if (A.cols != n)
        fail(ErrorCode::DimensionMismatch, "characteristic polynomial of non-square matrix");
    if (n == 0)
        return {R.one()};
    // descending coefficients of the leading principal minors' polynomials
    std::vector<Elem> poly{R.one(), R.neg(A(0, 0))};
    for (std::size_t r = 1; r < n; ++r) {
        // Toeplitz column: 1, -a_rr, -R C, -R A_r C, ..., -R A_r^{r-1} C
        std::vector<Elem> t{R.one(), R.neg(A(r, r))};
        Vec col(r);
        for (std::size_t i = 0; i < r; ++i)
            col[i] = A(i, r);
        for (std::size_t k = 0; k < r; ++k) {
            Elem dot = R.zero();
            for (std::size_t j = 0; j < r; ++j)
                dot = R.add(dot, R.mul(A(r, j), col[j]));
            t.push_back(R.neg(dot));
            Vec next(r, R.zero());
            for (std::size_t i = 0; i < r; ++i)
                for (std::size_t j = 0; j < r; ++j)
                    next[i] = R.add(next[i], R.mul(A(i, j), col[j]));
            col = std::move(next);
        }
        std::vector<Elem> out(r + 2, R.zero());
        for (std::size_t i = 0; i < r + 2; ++i)
            for (std::size_t j = 0; j <= std::min(i, r); ++j)
                out[i] = R.add(out[i], R.mul(t[i - j], poly[j]));
        poly = std::move(out);
    }
    return {poly.rbegin(), poly.rend()};
}

} // namespace dvlab
