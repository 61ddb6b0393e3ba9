#pragma once

// Fiberwise models of two families: a constant-polygon family over the affine line whose
// sub-group Z_1 degenerates at t = 0, and a group over a nodal curve glued from its fibers
// at 0 and ∞.

#include <array>
#include <string>
#include <utility>
#include <vector>

#include "slope.hpp"

namespace dvlab {

/// All elements of the residue field of R, in odometer order of their coordinates.
inline std::vector<Elem> residue_field_elements(const Ring& R)
{
    const Ring k = R.with_precision(1);
    const std::size_t a = static_cast<std::size_t>(R.a());
    std::vector<unsigned long> digit(a, 0);
    std::vector<Elem> out;
    for (;;) {
        std::vector<Int> c(a);
        for (std::size_t i = 0; i < a; ++i)
            c[i] = digit[i];
        out.push_back(k.from_coeffs(std::move(c)));
        std::size_t i = 0;
        while (i < a && ++digit[i] == R.p())
            digit[i++] = 0;
        if (i == a)
            return out;
    }
}

/// Z = Z_1 ⊕ Z_2 with α_p generators x_1 ∈ Z_1, x_2 ∈ Z_2; the fiber at t is Z / (id, t)(α_p).
struct ParamFamily {
    Ring ring;
    DModule product;
    std::size_t rank1 = 0; // rank of Z_1, the leading block
    Vec x1;
    Vec x2;

    /// ψ_t : Z → X_t, whose kernel is the α_p spanned by x_1 + [t]·x_2.
    IsogenyData fiber_isogeny(const Elem& t) const
    {
        const Ring& R = ring;
        const Elem lift = R.teichmuller(R.reduce(t));
        Mat g = zeros(R, product.rank(), 1);
        for (std::size_t i = 0; i < product.rank(); ++i)
            g(i, 0) = R.add(R.reduce(x1[i]), R.mul(lift, R.reduce(x2[i])));
        return isogeny_from_lattice(product, g, 1);
    }

    DModule fiber(const Elem& t) const { return fiber_isogeny(t).target; }

    /// length((M_t ∩ Q·M(Z_1)) / M(Z_1)).
    int xi_kernel_order(const Elem& t) const
    {
        const IsogenyData psi = fiber_isogeny(t);
        // the Hermite basis is upper triangular, so its first rank1 columns span the intersection
        int len = 0;
        for (std::size_t i = 0; i < rank1; ++i)
            len += psi.denominator_exp - psi.hnf_diag[i];
        return len;
    }
};

/// Fibers are produced at precision N; the cover Z is built at N + 1.
inline ParamFamily make_example41(std::uint64_t p, int a, int N)
{
    if (N < 3)
        fail(ErrorCode::InvalidParams, "the family needs N >= 3");
    const Ring R = Ring::make({p, a, N + 1});
    const DModule Z1 = make_gmn(1, 1, R);
    const DModule Z2 = make_gmn(1, 2, R);
    const auto n1 = alpha_p_embeddings(Z1);
    const auto n2 = alpha_p_embeddings(Z2);
    if (n1.size() != 1 || n2.size() != 1)
        fail(ErrorCode::Internal, "expected a unique α_p in each factor");
    ParamFamily fam{R, direct_sum(Z1, Z2), Z1.rank(), Vec(5, R.zero()), Vec(5, R.zero())};
    for (std::size_t i = 0; i < 2; ++i)
        fam.x1[i] = R.reduce(n1[0][i]);
    for (std::size_t i = 0; i < 3; ++i)
        fam.x2[2 + i] = R.reduce(n2[0][i]);
    return fam;
}

inline DModule example41_fiber(std::uint64_t p, const Elem& t, int N, int a = 1)
{
    return make_example41(p, a, N).fiber(t);
}

inline int xi_kernel_order(std::uint64_t p, const Elem& t, int N, int a = 1)
{
    return make_example41(p, a, N).xi_kernel_order(t);
}

/// Z = G_{2,1} ⊕ G_{1,2} on P^1 with ψ_0 killing the α_p of the second factor and ψ_∞ that of
/// the first; the fibers are identified by gluing: fiber0 → fiber_inf.
struct GluedGroup {
    DModule cover; // Z
    IsogenyData psi0;
    IsogenyData psi_inf;
    DModule fiber0;
    DModule fiber_inf;
    Ring gluing_ring; // precision to which gluing is known
    Mat gluing; // gluing F_0 = F_∞ σ(gluing), gluing V_0 = V_∞ σ^{-1}(gluing)
};

inline GluedGroup build_example42(std::uint64_t p, int N)
{
    if (N < 4)
        fail(ErrorCode::InvalidParams, "the glued group needs N >= 4");
    const Ring R = Ring::make({p, 1, N});
    const DModule Z1 = make_gmn(2, 1, R);
    const DModule Z2 = make_gmn(1, 2, R);
    const DModule Z = direct_sum(Z1, Z2);
    const Vec a1 = alpha_p_embeddings(Z1).at(0);
    const Vec a2 = alpha_p_embeddings(Z2).at(0);
    Mat g0 = zeros(R, 6, 1), ginf = zeros(R, 6, 1);
    for (std::size_t i = 0; i < 3; ++i) {
        ginf(i, 0) = R.reduce(a1[i]);
        g0(3 + i, 0) = R.reduce(a2[i]);
    }
    GluedGroup out{Z, isogeny_from_lattice(Z, g0, 1), isogeny_from_lattice(Z, ginf, 1), {}, {}, {}, {}};
    out.fiber0 = out.psi0.target;
    out.fiber_inf = out.psi_inf.target;

    // G_{2,1}: p^{-1}V maps M onto M + p^{-1}α_p; G_{1,2}: V maps M + p^{-1}α_p onto M.
    // With Δ = diag(V, pV) = p·(that map), gluing = H_∞^{-1} Δ H_0 / p.
    const Mat Delta = block_diag(R, Z1.V(), mat_mul_p_pow(R, Z2.V(), 1));
    const auto sol = solve(R, out.psi_inf.lattice_map, mat_mul(R, Delta, out.psi0.lattice_map));
    if (!sol)
        fail(ErrorCode::Internal, "gluing map does not land in the ∞ fiber");
    const Ring Rg = R.with_precision(N - 1 - std::max(sol->loss, 1));
    const Mat G = mat_reduce(Rg, mat_div_p_pow(R, sol->x, 1));
    const DModule X0 = with_precision(out.fiber0, Rg.N()), Xi = with_precision(out.fiber_inf, Rg.N());
    if (!is_invertible(Rg, G) || mat_mul(Rg, G, X0.F()) != mat_mul(Rg, Xi.F(), mat_frobenius(Rg, G, 1)) ||
        mat_mul(Rg, G, X0.V()) != mat_mul(Rg, Xi.V(), mat_frobenius(Rg, G, -1)))
        fail(ErrorCode::Internal, "gluing does not intertwine F and V");
    out.gluing_ring = Rg;
    out.gluing = G;
    return out;
}

struct DegreePair {
    int deg0 = 0;
    int deg_inf = 0;

    friend bool operator==(const DegreePair&, const DegreePair&) = default;
};

struct DegreeLevel {
    int log_d = 0;
    long candidates = 0;
    std::vector<DegreePair> beta1; // Z_1 → Y'
    std::vector<DegreePair> beta2; // Z_2 → Y''
};

struct GluingReport {
    std::vector<DegreeLevel> levels;
    int log_d_max = 0;
    bool uniform = true; // every β_1 has deg_inf = deg0 + 1 and every β_2 deg_inf = deg0 - 1
};

/// For every csd-target isogeny φ = φ' × φ'' of the middle fiber with log-degree ≤ log_d_max,
/// the log-degrees of β_i = φ ∘ ψ on Z_i computed through the 0-chart and through the ∞-chart.
inline GluingReport verify_no_csd_isogeny(const GluedGroup& g, int log_d_max, unsigned threads = 1,
                                          long cap = candidate_cap())
{
    if (log_d_max < 0)
        fail(ErrorCode::InvalidParams, "negative degree bound");
    const IsoclinicSplit sp = split_isoclinic(g.fiber0);
    if (sp.parts.size() != 2)
        fail(ErrorCode::Internal, "middle fiber does not have two isoclinic factors");
    const Ring R = detail::min_ring(sp.parts[0].ring(), g.gluing_ring);
    const Ring& Rz = g.cover.ring();
    const std::size_t h1 = sp.parts[0].rank(), h2 = sp.parts[1].rank(), h = h1 + h2;

    // images of M(Z_1), M(Z_2) in the coordinates of X' ⊕ X''
    Mat E1 = zeros(Rz, h, h1), E2 = zeros(Rz, h, h2);
    for (std::size_t i = 0; i < h1; ++i)
        E1(i, i) = Rz.from_int(Rz.p_int());
    for (std::size_t i = 0; i < h2; ++i)
        E2(h1 + i, i) = Rz.from_int(Rz.p_int());
    auto chart = [&](const IsogenyData& psi, const Mat& E) {
        const auto c = solve(Rz, psi.lattice_map, E); // fiber coordinates of p^{-1}·p·E
        if (!c)
            fail(ErrorCode::Internal, "cover does not map into the fiber");
        return mat_reduce(R, c->x);
    };
    const Mat W = mat_reduce(R, sp.witness);
    const Mat Gr = mat_reduce(R, g.gluing);
    auto in_parts = [&](const Mat& fiber0_coords) {
        const auto c = solve(R, W, fiber0_coords);
        if (!c)
            fail(ErrorCode::Internal, "splitting witness is singular");
        return c->x;
    };
    auto from_inf = [&](const Mat& inf_coords) {
        const auto c = solve(R, Gr, inf_coords);
        if (!c)
            fail(ErrorCode::Internal, "gluing is singular");
        return c->x;
    };
    const Mat z1_0 = submatrix(in_parts(chart(g.psi0, E1)), 0, 0, h1, h1);
    const Mat z1_inf = submatrix(in_parts(from_inf(chart(g.psi_inf, E1))), 0, 0, h1, h1);
    const Mat z2_0 = submatrix(in_parts(chart(g.psi0, E2)), h1, 0, h2, h2);
    const Mat z2_inf = submatrix(in_parts(from_inf(chart(g.psi_inf, E2))), h1, 0, h2, h2);
    const std::array<std::pair<Mat, Mat>, 2> images{{{z1_0, z1_inf}, {z2_0, z2_inf}}};

    // log-degree of Z_i → Y for Y = p^{-e}·span(H) ⊇ X_i: v(det) of p^e H^{-1} z
    auto degree = [&](const IsogenyData& phi, const Mat& z) {
        const Ring Rp = detail::min_ring(R, phi.source.ring());
        const auto c = solve(Rp, mat_reduce(Rp, phi.lattice_map), mat_mul_p_pow(Rp, mat_reduce(Rp, z), phi.denominator_exp));
        if (!c)
            fail(ErrorCode::Internal, "factor image is not contained in the target");
        const int v = det_valuation(Rp, c->x);
        if (v == kInfinite)
            fail(ErrorCode::InsufficientPrecision, "factor degree undetermined at working precision");
        return v;
    };

    std::array<std::vector<EnumerationResult>, 2> found;
    for (std::size_t f = 0; f < 2; ++f) {
        const SlopeData sd = slope_data_for(newton_polygon(sp.parts[f]));
        for (int d = 0; d <= log_d_max; ++d)
            found[f].push_back(enumerate_csd_isogenies(sp.parts[f], d, sd, threads, cap));
    }

    GluingReport rep;
    rep.log_d_max = log_d_max;
    for (int d = 0; d <= log_d_max; ++d) {
        DegreeLevel lvl;
        lvl.log_d = d;
        for (int d1 = 0; d1 <= d; ++d1) {
            const auto& first = found[0][static_cast<std::size_t>(d1)].isogenies;
            const auto& second = found[1][static_cast<std::size_t>(d - d1)].isogenies;
            for (const auto& phi1 : first)
                for (const auto& phi2 : second) {
                    ++lvl.candidates;
                    const DegreePair b1{degree(phi1, images[0].first), degree(phi1, images[0].second)};
                    const DegreePair b2{degree(phi2, images[1].first), degree(phi2, images[1].second)};
                    rep.uniform = rep.uniform && b1.deg_inf - b1.deg0 == 1 && b2.deg_inf - b2.deg0 == -1;
                    lvl.beta1.push_back(b1);
                    lvl.beta2.push_back(b2);
                }
        }
        rep.levels.push_back(std::move(lvl));
    }
    return rep;
}

} // namespace dvlab
