#pragma once

// Truncated Witt rings W_N(F_{p^a}), modelled as (Z/p^N)[x]/(f) with f a lift of the
// lexicographically smallest monic irreducible polynomial of degree a over F_p.

#include <gmpxx.h>

#include <cstdint>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "error.hpp"

namespace dvlab {

using Int = mpz_class;

/// Valuation of zero (meaning "at least N" at the working precision).
inline constexpr int kInfinite = std::numeric_limits<int>::max();

struct RingParams {
    std::uint64_t p = 2;
    int a = 1;
    int N = 1;
};

/// Coordinates in the power basis 1, x, ..., x^{a-1}; each lies in [0, p^N).
struct Elem {
    std::vector<Int> c;

    friend bool operator==(const Elem& x, const Elem& y) { return x.c == y.c; }
};

namespace detail {

inline bool is_prime_u64(std::uint64_t n)
{
    if (n < 2)
        return false;
    for (std::uint64_t d = 2; d * d <= n; ++d)
        if (n % d == 0)
            return false;
    return true;
}

// Dense polynomials over F_p, coefficients low degree first, no trailing zeros.
using FpPoly = std::vector<std::uint64_t>;

inline std::uint64_t mulmod(std::uint64_t x, std::uint64_t y, std::uint64_t p)
{
    return static_cast<std::uint64_t>((static_cast<unsigned __int128>(x) * y) % p);
}

inline std::uint64_t powmod(std::uint64_t b, std::uint64_t e, std::uint64_t p)
{
    std::uint64_t r = 1 % p;
    b %= p;
    while (e) {
        if (e & 1)
            r = mulmod(r, b, p);
        b = mulmod(b, b, p);
        e >>= 1;
    }
    return r;
}

inline void trim(FpPoly& f)
{
    while (!f.empty() && f.back() == 0)
        f.pop_back();
}

inline FpPoly polymod(FpPoly a, const FpPoly& f, std::uint64_t p)
{
    trim(a);
    const std::uint64_t lead_inv = powmod(f.back(), p - 2, p);
    while (a.size() >= f.size()) {
        const std::uint64_t c = mulmod(a.back(), lead_inv, p);
        const std::size_t shift = a.size() - f.size();
        for (std::size_t i = 0; i < f.size(); ++i)
            a[shift + i] = (a[shift + i] + p - mulmod(c, f[i], p)) % p;
        trim(a);
    }
    return a;
}

inline FpPoly polymulmod(const FpPoly& x, const FpPoly& y, const FpPoly& f, std::uint64_t p)
{
    if (x.empty() || y.empty())
        return {};
    FpPoly r(x.size() + y.size() - 1, 0);
    for (std::size_t i = 0; i < x.size(); ++i)
        for (std::size_t j = 0; j < y.size(); ++j)
            r[i + j] = (r[i + j] + mulmod(x[i], y[j], p)) % p;
    return polymod(std::move(r), f, p);
}

inline FpPoly polygcd(FpPoly a, FpPoly b, std::uint64_t p)
{
    trim(a);
    trim(b);
    while (!b.empty()) {
        FpPoly r = polymod(a, b, p);
        a = std::move(b);
        b = std::move(r);
    }
    return a;
}

// x^(p^k) mod f
inline FpPoly frobenius_power_of_x(const FpPoly& f, std::uint64_t p, int k)
{
    FpPoly x = polymod({0, 1}, f, p);
    for (int i = 0; i < k; ++i) {
        FpPoly base = x, acc = {1};
        std::uint64_t e = p;
        while (e) {
            if (e & 1)
                acc = polymulmod(acc, base, f, p);
            base = polymulmod(base, base, f, p);
            e >>= 1;
        }
        x = std::move(acc);
    }
    return x;
}

// Rabin's test.
inline bool is_irreducible(const FpPoly& f, std::uint64_t p)
{
    const int n = static_cast<int>(f.size()) - 1;
    if (n <= 0)
        return false;
    if (n == 1)
        return true;
    FpPoly xq = frobenius_power_of_x(f, p, n);
    if (xq != polymod({0, 1}, f, p))
        return false;
    for (int q = 2; q <= n; ++q) {
        if (n % q != 0 || !is_prime_u64(static_cast<std::uint64_t>(q)))
            continue;
        FpPoly h = frobenius_power_of_x(f, p, n / q);
        if (h.size() < 2)
            h.resize(2, 0);
        h[1] = (h[1] + p - 1) % p;
        trim(h);
        FpPoly g = polygcd(f, h, p);
        if (g.size() != 1)
            return false;
    }
    return true;
}

// Lexicographically smallest monic irreducible of degree a, the constant coefficient
// being the most significant digit of the enumeration.
inline std::vector<std::uint64_t> smallest_irreducible(std::uint64_t p, int a)
{
    std::vector<std::uint64_t> digits(static_cast<std::size_t>(a), 0);
    for (;;) {
        FpPoly f(digits.begin(), digits.end());
        f.push_back(1);
        if (is_irreducible(f, p))
            return f;
        int i = a - 1;
        while (i >= 0 && ++digits[static_cast<std::size_t>(i)] == p)
            digits[static_cast<std::size_t>(i--)] = 0;
        if (i < 0)
            fail(ErrorCode::Internal, "no irreducible polynomial found");
    }
}

inline int valuation_of_int(const Int& x, const Int& p)
{
    if (x == 0)
        return kInfinite;
    Int tmp;
    return static_cast<int>(mpz_remove(tmp.get_mpz_t(), x.get_mpz_t(), p.get_mpz_t()));
}

} // namespace detail

/// Handle to an immutable ring W_N(F_{p^a}); cheap to copy.
class Ring {
public:
    Ring() = default;

    static Ring make(const RingParams& params)
    {
        if (params.a < 1 || params.N < 1)
            fail(ErrorCode::InvalidParams, "need a >= 1 and N >= 1");
        if (params.p > (std::uint64_t{1} << 31))
            fail(ErrorCode::InvalidParams, "p must be at most 2^31");
        if (!detail::is_prime_u64(params.p))
            fail(ErrorCode::NotPrime, std::to_string(params.p) + " is not prime");
        const auto fp = detail::smallest_irreducible(params.p, params.a);
        std::vector<Int> modulus;
        for (auto c : fp)
            modulus.emplace_back(static_cast<unsigned long>(c));
        return Ring(params, std::move(modulus));
    }

    /// Same field and modulus polynomial, precision N.
    Ring with_precision(int N) const
    {
        if (N < 1)
            fail(ErrorCode::PrecisionExhausted, "precision dropped below 1");
        RingParams q = impl_->params;
        q.N = N;
        return Ring(q, impl_->modulus);
    }

    const RingParams& params() const { return impl_->params; }
    std::uint64_t p() const { return impl_->params.p; }
    int a() const { return impl_->params.a; }
    int N() const { return impl_->params.N; }
    const Int& p_int() const { return impl_->p; }
    const Int& pN() const { return impl_->ppow.back(); }
    const Int& p_pow(int k) const { return impl_->ppow.at(static_cast<std::size_t>(k)); }
    const std::vector<Int>& modulus() const { return impl_->modulus; }
    /// σ(x) for the polynomial generator x.
    const Elem& frobenius_image() const { return impl_->frob_image; }
    bool valid() const { return static_cast<bool>(impl_); }

    /// Same p, a and modulus; precision may differ.
    bool same_field(const Ring& o) const
    {
        return p() == o.p() && a() == o.a() && modulus() == o.modulus();
    }

    friend bool operator==(const Ring& x, const Ring& y)
    {
        return x.impl_ == y.impl_ || (x.same_field(y) && x.N() == y.N());
    }

    Elem zero() const { return Elem{std::vector<Int>(static_cast<std::size_t>(a()), Int(0))}; }
    Elem one() const { return from_int(Int(1)); }
    Elem from_int(const Int& v) const
    {
        Elem e = zero();
        e.c[0] = v;
        norm(e.c[0]);
        return e;
    }
    Elem from_coeffs(std::vector<Int> c) const
    {
        if (c.size() != static_cast<std::size_t>(a()))
            fail(ErrorCode::DimensionMismatch, "element needs a coordinates");
        Elem e{std::move(c)};
        for (auto& x : e.c)
            norm(x);
        return e;
    }
    /// The class of the polynomial variable.
    Elem generator() const
    {
        if (a() == 1) {
            Elem e = zero();
            e.c[0] = -impl_->modulus[0];
            norm(e.c[0]);
            return e;
        }
        Elem e = zero();
        e.c[1] = 1;
        return e;
    }
    /// Coordinates of x reduced into this ring (x may come from a ring of any precision).
    Elem reduce(const Elem& x) const
    {
        Elem e = x;
        for (auto& c : e.c)
            norm(c);
        return e;
    }

    bool is_zero(const Elem& x) const
    {
        for (const auto& c : x.c)
            if (c != 0)
                return false;
        return true;
    }
    bool is_one(const Elem& x) const { return x == one(); }

    Elem add(const Elem& x, const Elem& y) const
    {
        Elem r = x;
        for (std::size_t i = 0; i < r.c.size(); ++i) {
            r.c[i] += y.c[i];
            if (r.c[i] >= pN())
                r.c[i] -= pN();
        }
        return r;
    }
    Elem sub(const Elem& x, const Elem& y) const
    {
        Elem r = x;
        for (std::size_t i = 0; i < r.c.size(); ++i) {
            r.c[i] -= y.c[i];
            if (r.c[i] < 0)
                r.c[i] += pN();
        }
        return r;
    }
    Elem neg(const Elem& x) const { return sub(zero(), x); }

    Elem mul(const Elem& x, const Elem& y) const
    {
        const std::size_t n = static_cast<std::size_t>(a());
        if (n == 1) {
            Elem r{{x.c[0] * y.c[0]}};
            norm(r.c[0]);
            return r;
        }
        std::vector<Int> prod(2 * n - 1, Int(0));
        for (std::size_t i = 0; i < n; ++i) {
            if (x.c[i] == 0)
                continue;
            for (std::size_t j = 0; j < n; ++j)
                prod[i + j] += x.c[i] * y.c[j];
        }
        const auto& f = impl_->modulus;
        for (std::size_t k = 2 * n - 2; k >= n; --k) {
            if (prod[k] == 0)
                continue;
            norm(prod[k]);
            const Int c = prod[k];
            for (std::size_t i = 0; i < n; ++i)
                prod[k - n + i] -= c * f[i];
            prod[k] = 0;
        }
        prod.resize(n);
        for (auto& c : prod)
            norm(c);
        return Elem{std::move(prod)};
    }

    Elem mul_int(const Elem& x, const Int& k) const
    {
        Elem r = x;
        for (auto& c : r.c) {
            c *= k;
            norm(c);
        }
        return r;
    }

    Elem pow(Elem base, Int e) const
    {
        Elem r = one();
        while (e > 0) {
            if (mpz_odd_p(e.get_mpz_t()))
                r = mul(r, base);
            base = mul(base, base);
            e >>= 1;
        }
        return r;
    }

    int valuation(const Elem& x) const
    {
        int v = kInfinite;
        for (const auto& c : x.c)
            v = std::min(v, detail::valuation_of_int(c, impl_->p));
        return v;
    }
    bool is_unit(const Elem& x) const { return valuation(x) == 0; }

    Elem inv(const Elem& x) const
    {
        if (!is_unit(x))
            fail(ErrorCode::NonUnit, "element has positive valuation");
        // x^(q-2) inverts modulo p; Newton's iteration v <- v(2 - xv) lifts it.
        Int q;
        mpz_ui_pow_ui(q.get_mpz_t(), p(), static_cast<unsigned long>(a()));
        Elem v = pow(x, q - 2);
        const Elem two = from_int(Int(2));
        for (int it = 0; it < 2 * N() + 4; ++it) {
            const Elem xv = mul(x, v);
            if (is_one(xv))
                return v;
            v = mul(v, sub(two, xv));
        }
        fail(ErrorCode::Internal, "inverse iteration did not converge");
    }

    /// Exact division by p^k; requires valuation(x) >= k. The result is meaningful mod p^{N-k}.
    Elem div_p_pow(const Elem& x, int k) const
    {
        if (k == 0)
            return x;
        if (valuation(x) < k)
            fail(ErrorCode::NotIntegral, "division by p^" + std::to_string(k) + " not exact");
        Elem r = x;
        for (auto& c : r.c)
            mpz_divexact(c.get_mpz_t(), c.get_mpz_t(), p_pow(k).get_mpz_t());
        return r;
    }
    Elem mul_p_pow(const Elem& x, int k) const { return mul_int(x, p_pow(std::min(k, N()))); }

    /// σ^t(x); t may be negative.
    Elem frobenius(const Elem& x, long t) const
    {
        const long n = a();
        const long k = ((t % n) + n) % n;
        if (k == 0)
            return x;
        const auto& img = impl_->sigma_pow[static_cast<std::size_t>(k)];
        Elem r = zero();
        for (std::size_t i = 0; i < x.c.size(); ++i) {
            if (x.c[i] == 0)
                continue;
            for (std::size_t j = 0; j < r.c.size(); ++j)
                r.c[j] += x.c[i] * img[i].c[j];
        }
        for (auto& c : r.c)
            norm(c);
        return r;
    }

    /// Multiplicative (Teichmüller) representative of the residue class of x.
    Elem teichmuller(const Elem& x) const
    {
        Int q;
        mpz_ui_pow_ui(q.get_mpz_t(), p(), static_cast<unsigned long>(a()));
        Int e = 1;
        for (int i = 1; i < N(); ++i)
            e *= q;
        return pow(x, e);
    }

    /// Evaluates an integer polynomial (low degree first) at y.
    Elem eval_poly(const std::vector<Int>& f, const Elem& y) const
    {
        Elem r = zero();
        for (std::size_t i = f.size(); i-- > 0;)
            r = add(mul(r, y), from_int(f[i]));
        return r;
    }

private:
    struct Impl {
        RingParams params;
        Int p;
        std::vector<Int> ppow;
        std::vector<Int> modulus;
        Elem frob_image;
        std::vector<std::vector<Elem>> sigma_pow; // [k][i] = σ^k(x^i)
    };

    Ring(const RingParams& params, std::vector<Int> modulus)
    {
        auto impl = std::make_shared<Impl>();
        impl->params = params;
        impl->p = Int(static_cast<unsigned long>(params.p));
        impl->ppow.push_back(Int(1));
        for (int i = 0; i < params.N; ++i)
            impl->ppow.push_back(impl->ppow.back() * impl->p);
        impl->modulus = std::move(modulus);
        impl_ = impl;

        const std::size_t n = static_cast<std::size_t>(params.a);
        Elem y = generator();
        if (n > 1) {
            y = pow(generator(), impl->p);
            std::vector<Int> deriv;
            for (std::size_t i = 1; i < impl->modulus.size(); ++i)
                deriv.push_back(impl->modulus[i] * static_cast<unsigned long>(i));
            bool converged = false;
            for (int it = 0; it < 2 * params.N + 4; ++it) {
                const Elem fy = eval_poly(impl->modulus, y);
                if (is_zero(fy)) {
                    converged = true;
                    break;
                }
                y = sub(y, mul(fy, inv(eval_poly(deriv, y))));
            }
            if (!converged)
                fail(ErrorCode::Internal, "Frobenius lift did not converge");
        }
        impl->frob_image = y;

        std::vector<Elem> ypow{one()};
        for (std::size_t i = 1; i < n; ++i)
            ypow.push_back(mul(ypow.back(), y));
        impl->sigma_pow.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            Elem e = zero();
            e.c[i] = 1;
            impl->sigma_pow[0].push_back(e);
        }
        for (std::size_t k = 1; k < n; ++k) {
            for (std::size_t i = 0; i < n; ++i) {
                const Elem& prev = impl->sigma_pow[k - 1][i];
                Elem r = zero();
                for (std::size_t j = 0; j < n; ++j)
                    r = add(r, mul_int(ypow[j], prev.c[j]));
                impl->sigma_pow[k].push_back(r);
            }
        }
    }

    void norm(Int& x) const { mpz_fdiv_r(x.get_mpz_t(), x.get_mpz_t(), pN().get_mpz_t()); }

    std::shared_ptr<const Impl> impl_;
};

inline Ring make_ring(const RingParams& params) { return Ring::make(params); }

} // namespace dvlab
