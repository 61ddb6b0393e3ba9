#pragma once

#include <fstream>
#include <iostream>
#include <iterator>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "io.hpp"

namespace dvlab::cli {

using io::json;

struct Options {
    std::string input;
    std::uint64_t p = 2;
    int a = 1;
    int N = 0; // 0: keep the input's precision, or pick a default
    int m = 1;
    int n = 1;
    int s = 0;
    std::vector<int> r;
    int log_d = -1;
    unsigned parallel = 1;
    std::vector<std::string> t;
};

class UsageError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace detail {

inline std::string read_all(std::istream& in) { return {std::istreambuf_iterator<char>(in), {}}; }

inline json read_input(const Options& o, std::istream& in)
{
    if (o.input.empty())
        return io::parse(read_all(in));
    const auto first = o.input.find_first_not_of(" \t\r\n");
    if (first != std::string::npos && (o.input[first] == '{' || o.input[first] == '['))
        return io::parse(o.input);
    std::ifstream f(o.input);
    if (!f)
        throw UsageError("cannot open input '" + o.input + "'");
    return io::parse(read_all(f));
}

inline DModule input_module(const Options& o, std::istream& in)
{
    DModule A = io::module_from_json(read_input(o, in));
    if (o.N > 0) {
        if (o.N > A.ring().N())
            throw UsageError("--N cannot raise the precision of an input module");
        A = with_precision(A, o.N);
    }
    return A;
}

inline std::optional<SlopeData> slope_option(const Options& o)
{
    if (o.s == 0 && o.r.empty())
        return std::nullopt;
    if (o.s <= 0 || o.r.empty())
        throw UsageError("--s and --r must be given together");
    SlopeData sd{o.s, o.r};
    sd.validate();
    return sd;
}

inline SlopeData slope_or_canonical(const Options& o, const DModule& A)
{
    if (auto sd = slope_option(o))
        return *sd;
    return slope_data_for(newton_polygon(A));
}

inline json dispatch(const std::string& verb, const Options& o, std::istream& in)
{
    if (verb == "ring")
        return io::to_json(Ring::make({o.p, o.a, o.N > 0 ? o.N : 1}));
    if (verb == "gmn") {
        // default precision leaves room for the polygon and one level of Φ
        const int N = o.N > 0 ? o.N : o.m + o.n + 2;
        return io::to_json(make_gmn(o.m, o.n, Ring::make({o.p, o.a, N})));
    }
    if (verb == "newton")
        return {{"polygon", io::to_json(newton_polygon(input_module(o, in)))}};
    if (verb == "filtration")
        return io::to_json(slope_filtration(input_module(o, in)));
    if (verb == "csd-check") {
        const DModule A = input_module(o, in);
        const SlopeData sd = slope_or_canonical(o, A);
        const CsdResult res = is_completely_slope_divisible(A, sd);
        json out{{"csd", res.csd}, {"slope_data", io::to_json(sd)}};
        if (res.filtration)
            out["filtration"] = io::to_json(*res.filtration);
        else
            out["failure"] = {{"level", res.level}, {"reason", res.failure}};
        return out;
    }
    if (verb == "saturate")
        return io::to_json(csd_saturate(input_module(o, in)));
    if (verb == "split") {
        const DModule A = input_module(o, in);
        const IsoclinicSplit sp = split_isoclinic(A, slope_option(o));
        json parts = json::array(), slopes = json::array();
        for (const auto& x : sp.parts)
            parts.push_back(io::to_json(x));
        for (const auto& s : sp.slopes)
            slopes.push_back(s.str());
        return {{"parts", parts}, {"slopes", slopes}, {"witness", io::to_json(sp.witness)}};
    }
    if (verb == "descend") {
        const DModule A = input_module(o, in);
        const Descent d = descend_finite_field(A, slope_or_canonical(o, A));
        return {{"model", io::to_json(d.model)}, {"witness", io::to_json(d.witness)}, {"ambient", io::to_json(d.ambient)}};
    }
    if (verb == "enumerate") {
        if (o.log_d < 0)
            throw UsageError("enumerate needs --log-d");
        const DModule A = input_module(o, in);
        const EnumerationResult res = enumerate_csd_isogenies(A, o.log_d, slope_or_canonical(o, A), o.parallel);
        json isos = json::array();
        for (const auto& iso : res.isogenies)
            isos.push_back(io::to_json(iso));
        return {{"isogenies", isos},
                {"count", res.isogenies.size()},
                {"candidates", res.candidates},
                {"phi_stable", res.phi_stable}};
    }
    if (verb == "example41") {
        const ParamFamily fam = make_example41(o.p, o.a, o.N > 0 ? o.N : 5);
        if (!o.t.empty()) {
            json coords = json::array();
            for (const auto& c : o.t)
                coords.push_back(c);
            return io::to_json(fam.fiber(io::elem_from_json(fam.ring.with_precision(1), coords)));
        }
        json fibers = json::array();
        std::vector<DModule> mods;
        for (const auto& t : residue_field_elements(fam.ring)) {
            mods.push_back(fam.fiber(t));
            fibers.push_back({{"t", io::to_json(t)},
                              {"polygon", io::to_json(newton_polygon(mods.back()))},
                              {"xi_kernel_order", fam.xi_kernel_order(t)}});
        }
        return {{"fibers", fibers}, {"constant_polygon", is_constant_polygon(mods).constant}};
    }
    if (verb == "example42") {
        const GluedGroup g = build_example42(o.p, o.N > 0 ? o.N : 6);
        return {{"fiber0", io::to_json(g.fiber0)},
                {"fiber_inf", io::to_json(g.fiber_inf)},
                {"gluing", io::to_json(g.gluing)},
                {"gluing_precision", g.gluing_ring.N()}};
    }
    if (verb == "verify42") {
        const GluedGroup g = build_example42(o.p, o.N > 0 ? o.N : 6);
        return io::to_json(verify_no_csd_isogeny(g, o.log_d < 0 ? 2 : o.log_d, o.parallel));
    }
    throw UsageError("unknown verb '" + verb + "'");
}

} // namespace detail

/// Exit codes: 0 success, 1 mathematical failure (JSON error document on stdout), 2 usage.
inline int run(int argc, const char* const* argv, std::istream& in, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Dieudonné module slope computations"};
    app.require_subcommand(1, 1);
    Options o;

    auto add_ring = [&](CLI::App* c) {
        c->add_option("--p", o.p, "prime")->check(CLI::PositiveNumber);
        c->add_option("--a", o.a, "residue field degree")->check(CLI::PositiveNumber);
        c->add_option("--N", o.N, "precision")->check(CLI::PositiveNumber);
    };
    auto add_input = [&](CLI::App* c) {
        c->add_option("--input", o.input, "module JSON: a path or an inline document (default stdin)");
        c->add_option("--N", o.N, "reduce the input to this precision")->check(CLI::PositiveNumber);
    };
    auto add_slopes = [&](CLI::App* c) {
        c->add_option("--s", o.s, "common denominator s");
        c->add_option("--r", o.r, "numerators r_1 > ... > r_m")->delimiter(',');
    };

    add_ring(app.add_subcommand("ring", "ring parameters and modulus"));
    {
        auto* c = app.add_subcommand("gmn", "the module of G_{m,n}");
        add_ring(c);
        c->add_option("--m", o.m)->check(CLI::NonNegativeNumber);
        c->add_option("--n", o.n)->check(CLI::NonNegativeNumber);
    }
    add_input(app.add_subcommand("newton", "Newton polygon"));
    add_input(app.add_subcommand("filtration", "slope filtration"));
    for (const char* name : {"csd-check", "split", "descend"}) {
        auto* c = app.add_subcommand(name);
        add_input(c);
        add_slopes(c);
    }
    app.get_subcommand("csd-check")->description("complete slope divisibility");
    app.get_subcommand("split")->description("isoclinic splitting");
    app.get_subcommand("descend")->description("model over a finite field");
    add_input(app.add_subcommand("saturate", "isogeny to a completely slope divisible module"));
    {
        auto* c = app.add_subcommand("enumerate", "isogenies to completely slope divisible targets");
        add_input(c);
        add_slopes(c);
        c->add_option("--log-d", o.log_d, "log_p of the degree")->required()->check(CLI::NonNegativeNumber);
        c->add_option("--parallel", o.parallel, "worker threads")->check(CLI::PositiveNumber);
    }
    {
        auto* c = app.add_subcommand("example41", "fibers of the family over the affine line");
        add_ring(c);
        c->add_option("--t", o.t, "coordinates of t in the residue field")->delimiter(',');
    }
    {
        auto* c = app.add_subcommand("example42", "the glued group over the nodal curve");
        c->add_option("--p", o.p)->check(CLI::PositiveNumber);
        c->add_option("--N", o.N)->check(CLI::PositiveNumber);
    }
    {
        auto* c = app.add_subcommand("verify42", "degree mismatch through both charts");
        c->add_option("--p", o.p)->check(CLI::PositiveNumber);
        c->add_option("--N", o.N)->check(CLI::PositiveNumber);
        c->add_option("--log-d", o.log_d, "largest log-degree")->check(CLI::NonNegativeNumber);
        c->add_option("--parallel", o.parallel, "worker threads")->check(CLI::PositiveNumber);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 2;
    }
    const std::string verb = app.get_subcommands().front()->get_name();
    try {
        out << detail::dispatch(verb, o, in).dump() << '\n';
        return 0;
    } catch (const UsageError& e) {
        err << "dvlab " << verb << ": " << e.what() << '\n';
        return 2;
    } catch (const Error& e) {
        if (e.code() == ErrorCode::ParseError || e.code() == ErrorCode::InvalidParams ||
            e.code() == ErrorCode::NotPrime) {
            err << "dvlab " << verb << ": " << e.what() << '\n';
            return 2;
        }
        out << json{{"error", std::string(code_name(e.code()))}, {"detail", e.detail()}}.dump() << '\n';
        err << "dvlab " << verb << ": " << e.what() << '\n';
        return 1;
    }
}

} // namespace dvlab::cli
