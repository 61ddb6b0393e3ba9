#pragma once

#include <algorithm>
#include <optional>
#include <utility>
#include <vector>

#include "charpoly.hpp"
#include "dieudonne.hpp"
#include "rational.hpp"

namespace dvlab {

struct NewtonSegment {
    Rational slope;
    int mult = 0;

    friend bool operator==(const NewtonSegment&, const NewtonSegment&) = default;
};

/// Slopes ascending, equal slopes merged.
struct NewtonPolygon {
    std::vector<NewtonSegment> segments;

    int height() const
    {
        int h = 0;
        for (const auto& s : segments)
            h += s.mult;
        return h;
    }

    /// Vertices (x, y) of the polygon starting at (0, 0), accumulating slope·mult.
    std::vector<std::pair<int, Rational>> breakpoints() const
    {
        std::vector<std::pair<int, Rational>> pts{{0, Rational(0)}};
        for (const auto& s : segments)
            pts.emplace_back(pts.back().first + s.mult, pts.back().second + s.slope * Rational(s.mult));
        return pts;
    }

    bool integral_breakpoints() const
    {
        for (const auto& [x, y] : breakpoints())
            if (y.den() != 1)
                return false;
        return true;
    }

    friend bool operator==(const NewtonPolygon&, const NewtonPolygon&) = default;
};

inline NewtonPolygon normalize(std::vector<NewtonSegment> segs)
{
    std::sort(segs.begin(), segs.end(), [](const auto& x, const auto& y) { return x.slope < y.slope; });
    NewtonPolygon out;
    for (const auto& s : segs) {
        if (s.mult == 0)
            continue;
        if (!out.segments.empty() && out.segments.back().slope == s.slope)
            out.segments.back().mult += s.mult;
        else
            out.segments.push_back(s);
    }
    return out;
}

inline NewtonPolygon merge(const NewtonPolygon& x, const NewtonPolygon& y)
{
    auto segs = x.segments;
    segs.insert(segs.end(), y.segments.begin(), y.segments.end());
    return normalize(std::move(segs));
}

/// Lower convex hull of (i, vals[i]); vals[i] == kInfinite marks a coefficient known only to
/// have valuation >= cap. The hull never rises above vals[0], so only an unknown vals[0]
/// is ambiguous.
inline NewtonPolygon polygon_from_valuations(const std::vector<int>& vals, int cap)
{
    const int n = static_cast<int>(vals.size()) - 1;
    if (n <= 0)
        return {};
    if (vals[0] == kInfinite)
        fail(ErrorCode::InsufficientPrecision,
             "constant coefficient has valuation >= " + std::to_string(cap));
    std::vector<int> hull{0};
    for (int i = 1; i <= n; ++i) {
        if (vals[static_cast<std::size_t>(i)] == kInfinite)
            continue;
        // pop while the last hull point lies on or above segment (prev, i)
        while (hull.size() >= 2) {
            const long x0 = hull[hull.size() - 2], x1 = hull.back();
            const long y0 = vals[static_cast<std::size_t>(x0)], y1 = vals[static_cast<std::size_t>(x1)];
            const long y2 = vals[static_cast<std::size_t>(i)];
            if ((y1 - y0) * (i - x0) >= (y2 - y0) * (x1 - x0))
                hull.pop_back();
            else
                break;
        }
        hull.push_back(i);
    }
    if (hull.back() != n)
        fail(ErrorCode::Internal, "leading coefficient is not a unit");
    std::vector<NewtonSegment> segs;
    for (std::size_t k = 0; k + 1 < hull.size(); ++k) {
        const long len = hull[k + 1] - hull[k];
        const long drop = vals[static_cast<std::size_t>(hull[k])] - vals[static_cast<std::size_t>(hull[k + 1])];
        segs.push_back({Rational(drop, len), static_cast<int>(len)});
    }
    return normalize(std::move(segs));
}

/// V-slopes of A: Newton polygon of the characteristic polynomial of V linearized over Z/p^N.
inline NewtonPolygon newton_polygon(const DModule& A)
{
    const Ring& R = A.ring();
    if (A.rank() == 0)
        return {};
    const Mat L = linearize(A.V_op());
    const Ring Z = prime_ring(R);
    std::vector<int> vals;
    for (const auto& c : charpoly_berkowitz(Z, L))
        vals.push_back(Z.valuation(c));
    NewtonPolygon poly = polygon_from_valuations(vals, R.N());
    for (auto& s : poly.segments) {
        if (s.mult % R.a() != 0)
            fail(ErrorCode::Internal, "slope multiplicity not divisible by the field degree");
        s.mult /= R.a();
    }
    return poly;
}

inline std::optional<Rational> is_isoclinic(const DModule& A)
{
    const auto poly = newton_polygon(A);
    if (poly.segments.size() != 1)
        return std::nullopt;
    return poly.segments.front().slope;
}

struct ConstancyResult {
    bool constant = true;
    std::optional<std::size_t> first_offender;
};

inline ConstancyResult is_constant_polygon(const std::vector<DModule>& fibers)
{
    if (fibers.empty())
        fail(ErrorCode::InvalidParams, "empty family");
    const auto ref = newton_polygon(fibers.front());
    for (std::size_t i = 1; i < fibers.size(); ++i)
        if (!(newton_polygon(fibers[i]) == ref))
            return {false, i};
    return {};
}

} // namespace dvlab
