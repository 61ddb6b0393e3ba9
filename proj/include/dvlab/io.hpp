#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "families.hpp"

namespace dvlab::io {

using nlohmann::json;

inline json to_json(const Ring& R)
{
    json mod = json::array();
    for (const auto& c : R.modulus())
        mod.push_back(c.get_str());
    return {{"p", R.p()}, {"a", R.a()}, {"N", R.N()}, {"modulus", mod}};
}

inline json to_json(const Elem& x)
{
    json out = json::array();
    for (const auto& c : x.c)
        out.push_back(c.get_str());
    return out;
}

/// Row-major list of rows.
inline json to_json(const Mat& M)
{
    json rows = json::array();
    for (std::size_t i = 0; i < M.rows; ++i) {
        json row = json::array();
        for (std::size_t j = 0; j < M.cols; ++j)
            row.push_back(to_json(M(i, j)));
        rows.push_back(std::move(row));
    }
    return rows;
}

/// List of column vectors.
inline json columns_json(const Mat& M)
{
    json cols = json::array();
    for (std::size_t j = 0; j < M.cols; ++j) {
        json col = json::array();
        for (std::size_t i = 0; i < M.rows; ++i)
            col.push_back(to_json(M(i, j)));
        cols.push_back(std::move(col));
    }
    return cols;
}

inline json to_json(const DModule& A)
{
    return {{"ring", to_json(A.ring())}, {"rank", A.rank()}, {"F", to_json(A.F())}, {"V", to_json(A.V())}};
}

inline json to_json(const NewtonPolygon& P)
{
    json out = json::array();
    for (const auto& s : P.segments)
        out.push_back({{"slope", s.slope.str()}, {"mult", s.mult}});
    return out;
}

inline json to_json(const SlopeData& sd) { return {{"s", sd.s}, {"r", sd.r}}; }

inline json to_json(const Filtration& f)
{
    json slopes = json::array(), steps = json::array();
    for (const auto& s : f.slopes)
        slopes.push_back(s.str());
    for (const auto& Y : f.steps)
        steps.push_back(columns_json(Y));
    return {{"slopes", slopes}, {"steps", steps}, {"precision", f.module.ring().N()}};
}

/// The target module's fields, so the document can be piped on as a module.
inline json to_json(const IsogenyData& iso)
{
    json out = to_json(iso.target);
    out["log_degree"] = iso.log_degree;
    out["denominator_exp"] = iso.denominator_exp;
    out["lattice_map"] = to_json(iso.lattice_map);
    out["source"] = to_json(iso.source);
    return out;
}

inline json to_json(const GluingReport& rep)
{
    auto pairs = [](const std::vector<DegreePair>& v) {
        json out = json::array();
        for (const auto& b : v)
            out.push_back(json::array({b.deg0, b.deg_inf}));
        return out;
    };
    json levels = json::array();
    for (const auto& l : rep.levels)
        levels.push_back({{"log_d", l.log_d},
                          {"candidates", l.candidates},
                          {"mismatches", pairs(l.beta1)},
                          {"mismatches_beta2", pairs(l.beta2)}});
    json conclusion = rep.uniform ? json{{"no_glued_csd_isogeny_up_to", rep.log_d_max}}
                                  : json{{"uniform_mismatch", false}};
    return {{"levels", levels}, {"conclusion", conclusion}};
}

// ---- parsing -----------------------------------------------------------------------------

[[noreturn]] inline void parse_error(const std::string& what) { fail(ErrorCode::ParseError, what); }

inline const json& field(const json& j, const char* key)
{
    if (!j.is_object() || !j.contains(key))
        parse_error(std::string("missing field '") + key + "'");
    return j.at(key);
}

inline Int parse_int(const json& j)
{
    try {
        if (j.is_string())
            return Int(j.get<std::string>());
        if (j.is_number_integer())
            return Int(std::to_string(j.get<long long>()));
    } catch (const std::invalid_argument&) {
    }
    parse_error("expected an integer or decimal string");
}

inline Ring ring_from_json(const json& j)
{
    long long p = 0, a = 0, N = 0;
    try {
        p = field(j, "p").get<long long>();
        a = field(j, "a").get<long long>();
        N = field(j, "N").get<long long>();
    } catch (const json::exception&) {
        parse_error("ring parameters must be integers");
    }
    if (p < 2 || a < 1 || N < 1)
        parse_error("ring parameters out of range");
    const Ring R = Ring::make({static_cast<std::uint64_t>(p), static_cast<int>(a), static_cast<int>(N)});
    if (j.contains("modulus")) {
        const json& m = j.at("modulus");
        if (!m.is_array() || m.size() != R.modulus().size())
            parse_error("modulus has the wrong length");
        for (std::size_t i = 0; i < m.size(); ++i)
            if (parse_int(m[i]) != R.modulus()[i])
                parse_error("modulus differs from the canonical choice");
    }
    return R;
}

inline Elem elem_from_json(const Ring& R, const json& j)
{
    if (j.is_number_integer() || j.is_string())
        return R.from_int(parse_int(j));
    if (!j.is_array() || j.size() > static_cast<std::size_t>(R.a()))
        parse_error("element must be an array of at most a coordinates");
    std::vector<Int> c(static_cast<std::size_t>(R.a()), 0);
    for (std::size_t i = 0; i < j.size(); ++i)
        c[i] = parse_int(j[i]);
    return R.from_coeffs(std::move(c));
}

inline Mat mat_from_json(const Ring& R, const json& j, std::size_t rows, std::size_t cols)
{
    if (!j.is_array() || j.size() != rows)
        parse_error("matrix has the wrong number of rows");
    Mat M = zeros(R, rows, cols);
    for (std::size_t i = 0; i < rows; ++i) {
        if (!j[i].is_array() || j[i].size() != cols)
            parse_error("matrix row has the wrong length");
        for (std::size_t k = 0; k < cols; ++k)
            M(i, k) = elem_from_json(R, j[i][k]);
    }
    return M;
}

/// Accepts a module document or any document carrying one at top level (e.g. an isogeny).
inline DModule module_from_json(const json& j)
{
    const Ring R = ring_from_json(field(j, "ring"));
    const json& F = field(j, "F");
    if (!F.is_array())
        parse_error("F must be a matrix");
    const std::size_t h = F.size();
    if (j.contains("rank") && j.at("rank") != h)
        parse_error("rank does not match the matrix size");
    return DModule(R, mat_from_json(R, F, h, h), mat_from_json(R, field(j, "V"), h, h));
}

inline SlopeData slope_data_from_json(const json& j)
{
    SlopeData sd;
    try {
        sd.s = field(j, "s").get<int>();
        sd.r = field(j, "r").get<std::vector<int>>();
    } catch (const json::exception&) {
        parse_error("slope data must be {\"s\": int, \"r\": [int, ...]}");
    }
    sd.validate();
    return sd;
}

inline json parse(const std::string& text)
{
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        parse_error(std::string("invalid JSON: ") + e.what());
    }
}

} // namespace dvlab::io
