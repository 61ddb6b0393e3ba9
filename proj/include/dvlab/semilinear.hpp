#pragma once

// σ^t-linear endomorphisms of free W_N(F_{p^a})-modules.

#include <numeric>
#include <vector>

#include "matrix.hpp"

namespace dvlab {

/// op(e_j) = Σ_i matrix(i, j) e_i and op(c v) = σ^twist(c) op(v).
struct SemiLinOp {
    Ring ring;
    Mat matrix;
    long twist = 0;

    std::size_t rank() const { return matrix.rows; }

    /// Twist reduced into [0, a).
    long reduced_twist() const
    {
        const long a = ring.a();
        return ((twist % a) + a) % a;
    }

    friend bool operator==(const SemiLinOp& x, const SemiLinOp& y)
    {
        return x.ring == y.ring && x.reduced_twist() == y.reduced_twist() && x.matrix == y.matrix;
    }
};

inline SemiLinOp identity_op(const Ring& R, std::size_t h) { return {R, identity(R, h), 0}; }

inline Vec apply(const SemiLinOp& op, const Vec& v)
{
    if (v.size() != op.rank())
        fail(ErrorCode::DimensionMismatch, "apply: vector length differs from rank");
    Vec tw(v.size());
    for (std::size_t i = 0; i < v.size(); ++i)
        tw[i] = op.ring.frobenius(v[i], op.twist);
    return mat_vec(op.ring, op.matrix, tw);
}

/// v ↦ f(g(v)).
inline SemiLinOp compose(const SemiLinOp& f, const SemiLinOp& g)
{
    if (f.rank() != g.rank() || !(f.ring == g.ring))
        fail(ErrorCode::DimensionMismatch, "compose: operators live on different modules");
    const Ring& R = f.ring;
    return {R, mat_mul(R, f.matrix, mat_frobenius(R, g.matrix, f.twist)), f.twist + g.twist};
}

inline SemiLinOp op_power(const SemiLinOp& op, int k)
{
    SemiLinOp result = identity_op(op.ring, op.rank());
    SemiLinOp base = op;
    while (k > 0) {
        if (k & 1)
            result = compose(result, base);
        k >>= 1;
        if (k)
            base = compose(base, base);
    }
    return result;
}

/// The integer ring Z/p^N underlying R.
inline Ring prime_ring(const Ring& R) { return Ring::make({R.p(), 1, R.N()}); }

/// Coordinates of v in the Z/p^N-basis {x^i e_j}, index j*a + i.
inline Vec linearize_vector(const Ring& R, const Ring& Z, const Vec& v)
{
    const std::size_t a = static_cast<std::size_t>(R.a());
    Vec out(v.size() * a);
    for (std::size_t j = 0; j < v.size(); ++j)
        for (std::size_t i = 0; i < a; ++i)
            out[j * a + i] = Z.from_int(v[j].c[i]);
    return out;
}

inline Vec delinearize_vector(const Ring& R, const Vec& z)
{
    const std::size_t a = static_cast<std::size_t>(R.a());
    Vec out(z.size() / a);
    for (std::size_t j = 0; j < out.size(); ++j) {
        std::vector<Int> c(a);
        for (std::size_t i = 0; i < a; ++i)
            c[i] = z[j * a + i].c[0];
        out[j] = R.from_coeffs(std::move(c));
    }
    return out;
}

/// Matrix of op as a Z/p^N-linear map of the rank h·a module, basis {x^i e_j}.
inline Mat linearize(const SemiLinOp& op)
{
    const Ring& R = op.ring;
    const Ring Z = prime_ring(R);
    const std::size_t a = static_cast<std::size_t>(R.a());
    const std::size_t h = op.rank();
    Mat L = zeros(Z, h * a, h * a);
    Elem xi = R.one();
    std::vector<Elem> twisted_basis;
    for (std::size_t i = 0; i < a; ++i) {
        twisted_basis.push_back(R.frobenius(xi, op.twist));
        xi = R.mul(xi, R.generator());
    }
    for (std::size_t j = 0; j < h; ++j)
        for (std::size_t i = 0; i < a; ++i)
            for (std::size_t k = 0; k < h; ++k) {
                const Elem img = R.mul(op.matrix(k, j), twisted_basis[i]);
                for (std::size_t l = 0; l < a; ++l)
                    L(k * a + l, j * a + i) = Z.from_int(img.c[l]);
            }
    return L;
}

/// A submodule of W^h given by generators; every generator of a free lattice has order N.
struct Lattice {
    Ring ring;
    std::size_t ambient_rank = 0;
    std::vector<Generator> generators;

    std::size_t rank() const { return generators.size(); }

    bool is_free() const
    {
        for (const auto& g : generators)
            if (g.order != ring.N())
                return false;
        return true;
    }

    Mat basis() const
    {
        std::vector<Vec> cols;
        for (const auto& g : generators)
            cols.push_back(g.v);
        return from_columns(ring, ambient_rank, cols);
    }
};

struct FittingDecomposition {
    Lattice bij;
    Lattice nil;
    int exponent = 0; // the T at which both chains are stable
};

/// M = op^T(M) ⊕ ker(op^T) for T large; images are compared by Z/p^N-length.
inline FittingDecomposition fitting_decomposition(const SemiLinOp& op)
{
    const Ring& R = op.ring;
    const std::size_t h = op.rank();
    const long t_max = static_cast<long>(h) * R.a() * R.N() + 1;
    SemiLinOp power = op;
    long T = 1;
    long len = span_length(R, power.matrix);
    for (;;) {
        if (T > t_max)
            fail(ErrorCode::NoStabilization, "image chain did not stabilize");
        SemiLinOp doubled = compose(power, power);
        const long len2 = span_length(R, doubled.matrix);
        if (len2 == len)
            break;
        power = std::move(doubled);
        len = len2;
        T *= 2;
    }
    FittingDecomposition fd;
    fd.exponent = static_cast<int>(std::min<long>(T, t_max));
    fd.bij = Lattice{R, h, image(R, power.matrix)};
    auto ker = kernel(R, power.matrix);
    for (auto& g : ker)
        for (auto& x : g.v)
            x = R.frobenius(x, -power.twist);
    fd.nil = Lattice{R, h, std::move(ker)};
    if (!fd.bij.is_free() || !fd.nil.is_free() || fd.bij.rank() + fd.nil.rank() != h)
        fail(ErrorCode::Internal, "Fitting parts are not complementary free summands");
    return fd;
}

/// Fixed vectors of op, structured over the subring W_N(F_{p^g}), g = gcd(a, twist).
struct FixedLattice {
    Ring subring;
    Elem subring_generator; // image of the subring's generator inside op.ring
    std::vector<Generator> basis;

    std::size_t rank() const { return basis.size(); }
};

namespace detail {

// Z-span of {ζ^i v : v ∈ vs, i < g}.
inline long subring_span_length(const Ring& R, const Ring& Z, const std::vector<Vec>& vs, const Elem& zeta,
                                int g)
{
    if (vs.empty())
        return 0;
    std::vector<Vec> cols;
    for (const auto& v : vs) {
        Vec w = v;
        for (int i = 0; i < g; ++i) {
            cols.push_back(linearize_vector(R, Z, w));
            for (auto& x : w)
                x = R.mul(x, zeta);
        }
    }
    return span_length(Z, from_columns(Z, cols.front().size(), cols));
}

} // namespace detail

inline FixedLattice fixed_points(const SemiLinOp& op)
{
    const Ring& R = op.ring;
    const Ring Z = prime_ring(R);
    const int g = std::gcd(R.a(), static_cast<int>(op.reduced_twist()));
    const Ring sub = Ring::make({R.p(), g, R.N()});
    const Embedding emb(sub, R);

    const Mat L = mat_sub(Z, linearize(op), identity(Z, op.rank() * static_cast<std::size_t>(R.a())));
    auto ker = kernel(Z, L);
    std::stable_sort(ker.begin(), ker.end(), [](const Generator& x, const Generator& y) { return x.order > y.order; });

    FixedLattice fl{sub, emb.root(), {}};
    std::vector<Vec> chosen;
    long len = 0;
    for (const auto& gen : ker) {
        Vec v = delinearize_vector(R, gen.v);
        chosen.push_back(v);
        const long len2 = detail::subring_span_length(R, Z, chosen, emb.root(), g);
        if (len2 == len + static_cast<long>(g) * gen.order) {
            len = len2;
            fl.basis.push_back({std::move(v), gen.order});
        } else {
            chosen.pop_back();
        }
    }
    return fl;
}

} // namespace dvlab
