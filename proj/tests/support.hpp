#pragma once

#include <random>

#include "dvlab/dvlab.hpp"

namespace dvtest {

using namespace dvlab;

inline Elem random_elem(const Ring& R, std::mt19937_64& rng)
{
    std::vector<Int> c(static_cast<std::size_t>(R.a()));
    const std::size_t words = mpz_sizeinbase(R.pN().get_mpz_t(), 2) / 64 + 2;
    for (auto& x : c) {
        x = 0;
        for (std::size_t w = 0; w < words; ++w) {
            x <<= 64;
            x += Int(std::to_string(rng()));
        }
        x %= R.pN();
    }
    return R.from_coeffs(std::move(c));
}

inline Elem random_unit(const Ring& R, std::mt19937_64& rng)
{
    for (;;) {
        Elem x = random_elem(R, rng);
        if (R.is_unit(x))
            return x;
    }
}

inline Mat random_mat(const Ring& R, std::size_t r, std::size_t c, std::mt19937_64& rng)
{
    Mat M = zeros(R, r, c);
    for (auto& x : M.data)
        x = random_elem(R, rng);
    return M;
}

inline Mat random_invertible(const Ring& R, std::size_t h, std::mt19937_64& rng)
{
    for (;;) {
        Mat M = random_mat(R, h, h, rng);
        if (is_invertible(R, M))
            return M;
    }
}

inline bool is_identity(const Ring& R, const Mat& M) { return M == identity(R, M.rows); }

} // namespace dvtest
