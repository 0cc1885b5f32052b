#pragma once

// Config-driven experiment runner. A run takes a JSON description, validates
// it (unknown keys are rejected with their dotted path, missing fields pick
// up defaults), executes the named experiment, and returns the report plus
// the normalized config that actually ran. The normalized form is fully
// explicit, so its digest pins every knob.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "cradon/harness.hpp"
#include "cradon/io.hpp"
#include "cradon/transform.hpp"

namespace cradon::experiment {

using json = nlohmann::json;

// Invalid configuration or usage; the CLI maps this to exit code 64.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct RunResult {
    harness::ExperimentReport report;
    json config;                         // normalized, every field explicit
    std::vector<std::string> artifacts;  // files written by the run
};

inline const std::vector<std::string>& experiment_kinds() {
    static const std::vector<std::string> kinds = {
        "transform",       "invert",           "calibrate", "duality",
        "lemma1",          "dual-bound",       "support-forward",
        "support-converse", "real-bridge",     "geometry"};
    return kinds;
}

namespace detail {

[[noreturn]] inline void fail(const std::string& path, const std::string& what) {
    throw ConfigError(path.empty() ? what : path + ": " + what);
}

inline std::string sub(const std::string& base, const std::string& key) {
    return base.empty() ? key : base + "." + key;
}

inline std::string idx(const std::string& base, std::size_t i) {
    return base + "[" + std::to_string(i) + "]";
}

inline void expect_object(const json& j, const std::string& path) {
    if (!j.is_object()) fail(path, "expected an object");
}

inline void reject_unknown(const json& obj, const std::string& path,
                           std::initializer_list<std::string_view> allowed) {
    expect_object(obj, path);
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool known = false;
        for (std::string_view k : allowed)
            if (it.key() == k) {
                known = true;
                break;
            }
        if (!known) fail(sub(path, it.key()), "unknown key");
    }
}

inline const json& require(const json& obj, const std::string& path, const char* key) {
    if (!obj.contains(key)) fail(sub(path, key), "missing required field");
    return obj.at(key);
}

inline double get_num(const json& obj, const std::string& path, const char* key, double dflt) {
    if (!obj.contains(key)) return dflt;
    const json& v = obj.at(key);
    if (!v.is_number()) fail(sub(path, key), "expected a number");
    return v.get<double>();
}

inline double req_num(const json& obj, const std::string& path, const char* key) {
    const json& v = require(obj, path, key);
    if (!v.is_number()) fail(sub(path, key), "expected a number");
    return v.get<double>();
}

inline int get_int(const json& obj, const std::string& path, const char* key, int dflt) {
    if (!obj.contains(key)) return dflt;
    const json& v = obj.at(key);
    if (!v.is_number_integer()) fail(sub(path, key), "expected an integer");
    return v.get<int>();
}

inline bool get_bool(const json& obj, const std::string& path, const char* key, bool dflt) {
    if (!obj.contains(key)) return dflt;
    const json& v = obj.at(key);
    if (!v.is_boolean()) fail(sub(path, key), "expected a boolean");
    return v.get<bool>();
}

inline std::string get_str(const json& obj, const std::string& path, const char* key,
                           const std::string& dflt) {
    if (!obj.contains(key)) return dflt;
    const json& v = obj.at(key);
    if (!v.is_string()) fail(sub(path, key), "expected a string");
    return v.get<std::string>();
}

inline std::string req_str(const json& obj, const std::string& path, const char* key) {
    const json& v = require(obj, path, key);
    if (!v.is_string()) fail(sub(path, key), "expected a string");
    return v.get<std::string>();
}

// ---------------------------------------------------------------------------
// Value descriptors. norm_* validates raw input and returns the canonical
// form; parse_* assumes canonical input.

// [re1, im1, re2, im2]
inline json norm_point4(const json& j, const std::string& path) {
    if (!j.is_array() || j.size() != 4) fail(path, "expected [re1, im1, re2, im2]");
    json out = json::array();
    for (std::size_t i = 0; i < 4; ++i) {
        if (!j[i].is_number()) fail(idx(path, i), "expected a number");
        out.push_back(j[i].get<double>());
    }
    return out;
}

inline Point parse_point4(const json& j) {
    return Point{cplx(j[0].get<double>(), j[1].get<double>()),
                 cplx(j[2].get<double>(), j[3].get<double>())};
}

// [re, im], or a bare number meaning a real value
inline json norm_cplx(const json& j, const std::string& path) {
    if (j.is_number()) return json::array({j.get<double>(), 0.0});
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
        fail(path, "expected [re, im] or a number");
    return json::array({j[0].get<double>(), j[1].get<double>()});
}

inline cplx parse_cplx(const json& j) { return cplx(j[0].get<double>(), j[1].get<double>()); }

// [i, j], non-negative
inline json norm_multiindex(const json& j, const std::string& path) {
    if (!j.is_array() || j.size() != 2 || !j[0].is_number_integer() || !j[1].is_number_integer())
        fail(path, "expected [i, j] of integers");
    int a = j[0].get<int>(), b = j[1].get<int>();
    if (a < 0 || b < 0) fail(path, "orders must be >= 0");
    return json::array({a, b});
}

inline MultiIndex parse_multiindex(const json& j) {
    return MultiIndex{{j[0].get<int>(), j[1].get<int>()}};
}

inline json norm_profile(const json& j, const std::string& path) {
    expect_object(j, path);
    std::string kind = req_str(j, path, "kind");
    json out{{"kind", kind}};
    if (kind == "gauss") {
        reject_unknown(j, path, {"kind"});
    } else if (kind == "bump" || kind == "bump_peak1") {
        reject_unknown(j, path, {"kind", "tmax", "amp"});
        out["tmax"] = req_num(j, path, "tmax");
        out["amp"] = get_num(j, path, "amp", 1.0);
    } else if (kind == "annular") {
        reject_unknown(j, path, {"kind", "a", "b", "amp"});
        out["a"] = req_num(j, path, "a");
        out["b"] = req_num(j, path, "b");
        out["amp"] = get_num(j, path, "amp", 1.0);
    } else if (kind == "windowed_gauss") {
        reject_unknown(j, path, {"kind", "t0", "t1"});
        out["t0"] = req_num(j, path, "t0");
        out["t1"] = req_num(j, path, "t1");
    } else if (kind == "indicator") {
        reject_unknown(j, path, {"kind", "tmax"});
        out["tmax"] = req_num(j, path, "tmax");
    } else {
        fail(sub(path, "kind"),
             "unknown profile kind '" + kind +
                 "' (gauss, bump, bump_peak1, annular, windowed_gauss, indicator)");
    }
    return out;
}

inline fields::Profile parse_profile(const json& j) {
    std::string kind = j.at("kind");
    if (kind == "gauss") return fields::Profile::gauss();
    if (kind == "bump") return fields::Profile::bump(j.at("tmax"), j.at("amp"));
    if (kind == "bump_peak1") return fields::Profile::bump_peak1(j.at("tmax"), j.at("amp"));
    if (kind == "annular") return fields::Profile::annular(j.at("a"), j.at("b"), j.at("amp"));
    if (kind == "windowed_gauss")
        return fields::Profile::windowed_gauss(j.at("t0"), j.at("t1"));
    return fields::Profile::indicator(j.at("tmax"));
}

inline json norm_sfield(const json& j, const std::string& path) {
    reject_unknown(j, path, {"profile", "wfactor", "s_center", "v", "width"});
    json out;
    out["profile"] = norm_profile(require(j, path, "profile"), sub(path, "profile"));
    std::string wf = get_str(j, path, "wfactor", "one");
    if (wf != "one" && wf != "w1sq" && wf != "w2sq" && wf != "window")
        fail(sub(path, "wfactor"), "expected one of one, w1sq, w2sq, window");
    out["wfactor"] = wf;
    out["s_center"] = j.contains("s_center")
                          ? norm_cplx(j.at("s_center"), sub(path, "s_center"))
                          : json::array({0.0, 0.0});
    if (wf == "window") {
        out["v"] = norm_point4(require(j, path, "v"), sub(path, "v"));
        out["width"] = req_num(j, path, "width");
    } else if (j.contains("v") || j.contains("width")) {
        fail(path, "v/width apply only to the window wfactor");
    }
    return out;
}

inline fields::SField parse_sfield(const json& j) {
    fields::Profile pr = parse_profile(j.at("profile"));
    cplx s0 = parse_cplx(j.at("s_center"));
    std::string wf = j.at("wfactor");
    if (wf == "one") return fields::SField(pr, s0);
    if (wf == "w1sq") return fields::SField::with_wfactor(fields::SField::WKind::w1sq, pr, s0);
    if (wf == "w2sq") return fields::SField::with_wfactor(fields::SField::WKind::w2sq, pr, s0);
    return fields::SField::node_window(parse_point4(j.at("v")), j.at("width"), pr, s0);
}

inline json norm_testfunction(const json& j, const std::string& path) {
    expect_object(j, path);
    std::string kind = req_str(j, path, "kind");
    json out{{"kind", kind}};
    json center = j.contains("center") ? norm_point4(j.at("center"), sub(path, "center"))
                                       : json::array({0.0, 0.0, 0.0, 0.0});
    if (kind == "gaussian") {
        reject_unknown(j, path, {"kind", "center", "amp"});
        out["center"] = center;
        out["amp"] = j.contains("amp") ? norm_cplx(j.at("amp"), sub(path, "amp"))
                                       : json::array({1.0, 0.0});
    } else if (kind == "gausspoly") {
        reject_unknown(j, path, {"kind", "center", "terms"});
        out["center"] = center;
        const json& terms = require(j, path, "terms");
        if (!terms.is_array() || terms.empty())
            fail(sub(path, "terms"), "expected a non-empty array");
        json nt = json::array();
        for (std::size_t i = 0; i < terms.size(); ++i) {
            std::string tp = idx(sub(path, "terms"), i);
            reject_unknown(terms[i], tp, {"coef", "a1", "a2", "c1", "c2"});
            json t;
            t["coef"] = norm_cplx(require(terms[i], tp, "coef"), sub(tp, "coef"));
            t["a1"] = get_int(terms[i], tp, "a1", 0);
            t["a2"] = get_int(terms[i], tp, "a2", 0);
            t["c1"] = get_int(terms[i], tp, "c1", 0);
            t["c2"] = get_int(terms[i], tp, "c2", 0);
            nt.push_back(t);
        }
        out["terms"] = nt;
    } else if (kind == "bump") {
        reject_unknown(j, path, {"kind", "center", "rho", "amp"});
        out["center"] = center;
        out["rho"] = req_num(j, path, "rho");
        out["amp"] = j.contains("amp") ? norm_cplx(j.at("amp"), sub(path, "amp"))
                                       : json::array({1.0, 0.0});
    } else {
        fail(sub(path, "kind"), "unknown function kind '" + kind +
                                    "' (gaussian, gausspoly, bump)");
    }
    return out;
}

inline fields::TestFunction parse_testfunction(const json& j) {
    std::string kind = j.at("kind");
    Point c = parse_point4(j.at("center"));
    if (kind == "gaussian") return fields::TestFunction::gaussian(c, parse_cplx(j.at("amp")));
    if (kind == "bump")
        return fields::TestFunction::bump(c, j.at("rho"), parse_cplx(j.at("amp")));
    std::vector<fields::PolyTerm> terms;
    for (const json& t : j.at("terms"))
        terms.push_back({parse_cplx(t.at("coef")), t.at("a1"), t.at("a2"), t.at("c1"),
                         t.at("c2")});
    return fields::TestFunction::gausspoly(c, std::move(terms));
}

inline json norm_distribution(const json& j, const std::string& path) {
    reject_unknown(j, path, {"terms"});
    const json& terms = require(j, path, "terms");
    if (!terms.is_array() || terms.empty()) fail(sub(path, "terms"), "expected a non-empty array");
    json nt = json::array();
    for (std::size_t i = 0; i < terms.size(); ++i) {
        std::string tp = idx(sub(path, "terms"), i);
        reject_unknown(terms[i], tp, {"p", "q", "point", "density"});
        json t;
        t["p"] = terms[i].contains("p") ? norm_multiindex(terms[i].at("p"), sub(tp, "p"))
                                        : json::array({0, 0});
        t["q"] = terms[i].contains("q") ? norm_multiindex(terms[i].at("q"), sub(tp, "q"))
                                        : json::array({0, 0});
        bool has_point = terms[i].contains("point"), has_density = terms[i].contains("density");
        if (has_point == has_density) fail(tp, "each term carries exactly one of point, density");
        if (has_point) {
            const json& pm = terms[i].at("point");
            std::string pp = sub(tp, "point");
            reject_unknown(pm, pp, {"at", "weight"});
            json p;
            p["at"] = norm_point4(require(pm, pp, "at"), sub(pp, "at"));
            p["weight"] = pm.contains("weight") ? norm_cplx(pm.at("weight"), sub(pp, "weight"))
                                                : json::array({1.0, 0.0});
            t["point"] = p;
        } else {
            t["density"] = norm_testfunction(terms[i].at("density"), sub(tp, "density"));
        }
        nt.push_back(t);
    }
    return json{{"terms", nt}};
}

inline distributions::TestDistribution parse_distribution(const json& j) {
    std::vector<distributions::DistTerm> terms;
    for (const json& t : j.at("terms")) {
        MultiIndex p = parse_multiindex(t.at("p")), q = parse_multiindex(t.at("q"));
        if (t.contains("point")) {
            terms.push_back({p, q,
                             distributions::PointMass{parse_point4(t.at("point").at("at")),
                                                      parse_cplx(t.at("point").at("weight"))},
                             std::nullopt});
        } else {
            terms.push_back({p, q, std::nullopt, parse_testfunction(t.at("density"))});
        }
    }
    return distributions::TestDistribution(std::move(terms));
}

inline json norm_compactset(const json& j, const std::string& path) {
    expect_object(j, path);
    std::string kind = req_str(j, path, "kind");
    json out{{"kind", kind}};
    if (kind == "ball") {
        reject_unknown(j, path, {"kind", "center", "radius"});
        out["center"] = norm_point4(require(j, path, "center"), sub(path, "center"));
        out["radius"] = req_num(j, path, "radius");
    } else if (kind == "point") {
        reject_unknown(j, path, {"kind", "at"});
        out["at"] = norm_point4(require(j, path, "at"), sub(path, "at"));
    } else if (kind == "polydisc") {
        reject_unknown(j, path, {"kind", "center", "r1", "r2"});
        out["center"] = norm_point4(require(j, path, "center"), sub(path, "center"));
        out["r1"] = req_num(j, path, "r1");
        out["r2"] = req_num(j, path, "r2");
    } else if (kind == "annulus2d") {
        reject_unknown(j, path, {"kind", "rin", "rout"});
        out["rin"] = req_num(j, path, "rin");
        out["rout"] = req_num(j, path, "rout");
    } else if (kind == "union") {
        reject_unknown(j, path, {"kind", "parts"});
        const json& parts = require(j, path, "parts");
        if (!parts.is_array() || parts.empty())
            fail(sub(path, "parts"), "expected a non-empty array");
        json np = json::array();
        for (std::size_t i = 0; i < parts.size(); ++i)
            np.push_back(norm_compactset(parts[i], idx(sub(path, "parts"), i)));
        out["parts"] = np;
    } else if (kind == "dilation") {
        reject_unknown(j, path, {"kind", "base", "eps"});
        out["base"] = norm_compactset(require(j, path, "base"), sub(path, "base"));
        out["eps"] = req_num(j, path, "eps");
    } else {
        fail(sub(path, "kind"), "unknown set kind '" + kind +
                                    "' (ball, point, polydisc, annulus2d, union, dilation)");
    }
    return out;
}

inline geometry::CompactSet parse_compactset(const json& j) {
    std::string kind = j.at("kind");
    if (kind == "ball")
        return geometry::CompactSet::ball(parse_point4(j.at("center")), j.at("radius"));
    if (kind == "point") return geometry::CompactSet::point(parse_point4(j.at("at")));
    if (kind == "polydisc")
        return geometry::CompactSet::polydisc(parse_point4(j.at("center")), j.at("r1"),
                                              j.at("r2"));
    if (kind == "annulus2d") return geometry::CompactSet::annulus2d(j.at("rin"), j.at("rout"));
    if (kind == "union") {
        std::vector<geometry::CompactSet> parts;
        for (const json& p : j.at("parts")) parts.push_back(parse_compactset(p));
        return geometry::CompactSet::union_of(std::move(parts));
    }
    return geometry::CompactSet::dilation_of(parse_compactset(j.at("base")), j.at("eps"));
}

// ---------------------------------------------------------------------------
// Shared parameter blocks

inline json norm_quad(const json& j, const std::string& path, const transform::QuadParams& d,
                      bool allow_auto_cutoff) {
    reject_unknown(j, path, {"cutoff", "n_r", "n_phi"});
    json out;
    double cutoff = get_num(j, path, "cutoff", d.cutoff);
    int n_r = get_int(j, path, "n_r", d.n_r), n_phi = get_int(j, path, "n_phi", d.n_phi);
    if (allow_auto_cutoff ? cutoff < 0.0 : !(cutoff > 0.0))
        fail(sub(path, "cutoff"), allow_auto_cutoff ? "must be >= 0 (0 = derive from support)"
                                                    : "must be > 0");
    if (n_r < 2 || n_phi < 2) fail(path, "needs n_r, n_phi >= 2");
    out["cutoff"] = cutoff;
    out["n_r"] = n_r;
    out["n_phi"] = n_phi;
    return out;
}

inline transform::QuadParams parse_quad(const json& j) {
    return {j.at("cutoff"), j.at("n_r"), j.at("n_phi")};
}

inline json norm_sphere(const json& j, const std::string& path, int d_eta, int d_theta) {
    reject_unknown(j, path, {"n_eta", "n_theta"});
    int ne = get_int(j, path, "n_eta", d_eta), nt = get_int(j, path, "n_theta", d_theta);
    if (ne < 4 || nt < 4) fail(path, "sphere rule needs n_eta, n_theta >= 4");
    return json{{"n_eta", ne}, {"n_theta", nt}};
}

inline numerics::SphereGrid parse_sphere(const json& j) {
    return numerics::sphere_grid(j.at("n_eta"), j.at("n_theta"));
}

inline json norm_sgrid(const json& j, const std::string& path, double d_extent, int d_count) {
    reject_unknown(j, path, {"center", "extent", "count"});
    json out;
    out["center"] = j.contains("center") ? norm_cplx(j.at("center"), sub(path, "center"))
                                         : json::array({0.0, 0.0});
    double extent = get_num(j, path, "extent", d_extent);
    int count = get_int(j, path, "count", d_count);
    if (!(extent > 0.0)) fail(sub(path, "extent"), "must be > 0");
    if (count < 9 || count % 2 == 0) fail(sub(path, "count"), "must be odd and >= 9");
    out["extent"] = extent;
    out["count"] = count;
    return out;
}

inline numerics::SGrid parse_sgrid(const json& j) {
    return numerics::SGrid(parse_cplx(j.at("center")), j.at("extent"), j.at("count"));
}

inline json norm_sino(const json& j, const std::string& path, const harness::SinogramParams& d) {
    reject_unknown(j, path, {"m", "n_r", "n_phi", "cutoff"});
    json out;
    int m = get_int(j, path, "m", d.m);
    if (m < 1) fail(sub(path, "m"), "must be >= 1");
    out["m"] = m;
    out["n_r"] = get_int(j, path, "n_r", d.n_r);
    out["n_phi"] = get_int(j, path, "n_phi", d.n_phi);
    double cutoff = get_num(j, path, "cutoff", d.cutoff);
    if (cutoff < 0.0) fail(sub(path, "cutoff"), "must be >= 0 (0 = default truncation)");
    out["cutoff"] = cutoff;
    return out;
}

inline harness::SinogramParams parse_sino(const json& j) {
    return {j.at("m"), j.at("n_r"), j.at("n_phi"), j.at("cutoff")};
}

inline json params_of(const json& c) { return c.contains("params") ? c.at("params") : json::object(); }

// ---------------------------------------------------------------------------
// transform

inline json normalize_transform(const json& c) {
    reject_unknown(c, "", {"experiment", "phi", "sphere", "grid", "quad", "mode", "tol", "output"});
    json out{{"experiment", "transform"}};
    out["phi"] = norm_testfunction(c.contains("phi") ? c.at("phi") : json{{"kind", "gaussian"}},
                                   "phi");
    out["sphere"] = norm_sphere(c.contains("sphere") ? c.at("sphere") : json::object(), "sphere",
                                6, 6);
    out["grid"] = norm_sgrid(c.contains("grid") ? c.at("grid") : json::object(), "grid", 3.0, 25);
    out["quad"] = norm_quad(c.contains("quad") ? c.at("quad") : json::object(), "quad",
                            transform::QuadParams{}, false);
    std::string mode = get_str(c, "", "mode", "automatic");
    if (mode != "automatic" && mode != "numeric" && mode != "analytic")
        fail("mode", "expected one of automatic, numeric, analytic");
    out["mode"] = mode;
    double tol = get_num(c, "", "tol", 1e-8);
    if (!(tol > 0.0)) fail("tol", "must be > 0");
    out["tol"] = tol;
    if (c.contains("output")) {
        reject_unknown(c.at("output"), "output", {"sinogram"});
        std::string name = req_str(c.at("output"), "output", "sinogram");
        if (name.empty()) fail("output.sinogram", "expected a file name");
        out["output"] = json{{"sinogram", name}};
    }
    return out;
}

inline transform::SinogramMode parse_mode(const std::string& m) {
    if (m == "numeric") return transform::SinogramMode::numeric;
    if (m == "analytic") return transform::SinogramMode::analytic;
    return transform::SinogramMode::automatic;
}

inline std::string emit(const std::string& out_dir, const std::string& name,
                        std::vector<std::string>& artifacts) {
    std::filesystem::path p = out_dir.empty() ? std::filesystem::path(name)
                                              : std::filesystem::path(out_dir) / name;
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
    artifacts.push_back(p.string());
    return p.string();
}

inline harness::ExperimentReport execute_transform(const json& n, const std::string& out_dir,
                                                   std::vector<std::string>& artifacts) {
    harness::detail::Stopwatch sw;
    harness::ExperimentReport rep;
    rep.experiment = "transform";

    fields::TestFunction phi = parse_testfunction(n.at("phi"));
    numerics::SphereGrid sphere = parse_sphere(n.at("sphere"));
    numerics::SGrid grid = parse_sgrid(n.at("grid"));
    numerics::Sinogram S = transform::forward_sinogram(phi, sphere, grid, parse_quad(n.at("quad")),
                                                       parse_mode(n.at("mode")));
    rep.provenance = S.provenance;

    std::size_t bad = 0;
    for (const cplx& v : S.values)
        if (!is_finite(v)) ++bad;
    rep.checks.push_back({"samples_finite", double(bad), 0.0, 0.0, bad == 0});

    if (phi.has_analytic_radon()) {
        // compare against the closed form on the disk |s - center| <= extent
        double tol = n.at("tol");
        double worst = 0.0;
        for (std::size_t node = 0; node < sphere.size(); ++node)
            for (int r = 0; r < grid.count; ++r)
                for (int c = 0; c < grid.count; ++c) {
                    cplx s = grid.at(r, c);
                    if (std::abs(s - grid.center) > grid.extent + 1e-12) continue;
                    cplx want = phi.analytic_radon(sphere.nodes[node], s);
                    worst = std::max(worst, std::abs(S.at(node, r, c) - want));
                }
        rep.checks.push_back({"closed_form_max_err", worst, 0.0, tol, worst <= tol});
    }

    if (n.contains("output"))
        io::write_sinogram(emit(out_dir, n.at("output").at("sinogram"), artifacts), S);

    harness::detail::finalize(rep, sw);
    return rep;
}

// ---------------------------------------------------------------------------
// invert

inline json normalize_invert(const json& c) {
    reject_unknown(c, "", {"experiment", "phi", "sphere", "grid", "quad", "mode", "cn", "eval",
                           "refine_counts", "tol", "output"});
    json out{{"experiment", "invert"}};
    out["phi"] = norm_testfunction(c.contains("phi") ? c.at("phi") : json{{"kind", "gaussian"}},
                                   "phi");
    out["sphere"] = norm_sphere(c.contains("sphere") ? c.at("sphere") : json::object(), "sphere",
                                8, 8);
    out["grid"] =
        norm_sgrid(c.contains("grid") ? c.at("grid") : json::object(), "grid", 3.0, 129);
    out["quad"] = norm_quad(c.contains("quad") ? c.at("quad") : json::object(), "quad",
                            transform::QuadParams{}, false);
    std::string mode = get_str(c, "", "mode", "automatic");
    if (mode != "automatic" && mode != "numeric" && mode != "analytic")
        fail("mode", "expected one of automatic, numeric, analytic");
    out["mode"] = mode;
    if (c.contains("cn")) {
        const json& cn = c.at("cn");
        if (cn.is_string()) {
            std::string s = cn.get<std::string>();
            if (s != "analytic" && s != "calibrated")
                fail("cn", "expected analytic, calibrated, or a number");
            out["cn"] = s;
        } else if (cn.is_number()) {
            out["cn"] = cn.get<double>();
        } else {
            fail("cn", "expected analytic, calibrated, or a number");
        }
    } else {
        out["cn"] = "analytic";
    }
    {
        json e = c.contains("eval") ? c.at("eval") : json::object();
        reject_unknown(e, "eval", {"extent", "count"});
        double extent = get_num(e, "eval", "extent", 2.0);
        int count = get_int(e, "eval", "count", 9);
        if (!(extent > 0.0)) fail("eval.extent", "must be > 0");
        if (count < 3 || count % 2 == 0) fail("eval.count", "must be odd and >= 3");
        out["eval"] = json{{"extent", extent}, {"count", count}};
    }
    {
        json rc = json::array();
        if (c.contains("refine_counts")) {
            const json& r = c.at("refine_counts");
            if (!r.is_array()) fail("refine_counts", "expected an array of odd integers");
            for (std::size_t i = 0; i < r.size(); ++i) {
                if (!r[i].is_number_integer() || r[i].get<int>() < 9 || r[i].get<int>() % 2 == 0)
                    fail(idx("refine_counts", i), "must be odd and >= 9");
                rc.push_back(r[i].get<int>());
            }
        }
        out["refine_counts"] = rc;
    }
    double tol = get_num(c, "", "tol", 0.02);
    if (!(tol > 0.0)) fail("tol", "must be > 0");
    out["tol"] = tol;
    if (c.contains("output")) {
        reject_unknown(c.at("output"), "output", {"sinogram", "volume"});
        json o = json::object();
        if (c.at("output").contains("sinogram"))
            o["sinogram"] = req_str(c.at("output"), "output", "sinogram");
        if (c.at("output").contains("volume"))
            o["volume"] = req_str(c.at("output"), "output", "volume");
        if (o.empty()) fail("output", "expected sinogram and/or volume file names");
        out["output"] = o;
    }
    return out;
}

inline harness::ExperimentReport execute_invert(const json& n, const std::string& out_dir,
                                                std::vector<std::string>& artifacts) {
    harness::detail::Stopwatch sw;
    harness::ExperimentReport rep;
    rep.experiment = "invert";

    fields::TestFunction phi = parse_testfunction(n.at("phi"));
    numerics::SphereGrid sphere = parse_sphere(n.at("sphere"));
    numerics::SGrid grid = parse_sgrid(n.at("grid"));
    transform::QuadParams qp = parse_quad(n.at("quad"));
    transform::SinogramMode mode = parse_mode(n.at("mode"));

    double cn;
    if (n.at("cn").is_number()) {
        cn = n.at("cn").get<double>();
    } else if (n.at("cn") == "calibrated") {
        cn = transform::calibrate_cn().c_hat;
    } else {
        cn = transform::cn_analytic;
    }

    const double eval_extent = n.at("eval").at("extent");
    const int eval_count = n.at("eval").at("count");
    const double tol = n.at("tol");

    // sup-normalized worst error over the lattice points inside |z| <= extent;
    // evaluated pointwise so the box corners (|z| up to twice the extent)
    // never leave the sinogram's valid s-region
    auto recon_err = [&](int grid_count) {
        numerics::SGrid g(grid.center, grid.extent, grid_count);
        numerics::Sinogram S = transform::forward_sinogram(phi, sphere, g, qp, mode);
        numerics::Sinogram dss = numerics::s_derivative(S, 1, 1);
        transform::VolumeGrid lattice;
        lattice.extent = eval_extent;
        lattice.count = eval_count;
        double sup = 0.0, err = 0.0;
        for (int i = 0; i < eval_count; ++i)
            for (int j = 0; j < eval_count; ++j)
                for (int k = 0; k < eval_count; ++k)
                    for (int l = 0; l < eval_count; ++l) {
                        Point z = lattice.point_at(i, j, k, l);
                        if (norm(z) > eval_extent + 1e-12) continue;
                        cplx want = phi.eval(z);
                        sup = std::max(sup, std::abs(want));
                        err = std::max(err,
                                       std::abs(transform::invert_point(dss, z, cn) - want));
                    }
        return err / sup;
    };

    double rel = recon_err(grid.count);
    rep.provenance = "count=" + std::to_string(grid.count) +
                     ",extent=" + std::to_string(grid.extent) + ",cn=" + std::to_string(cn);
    rep.checks.push_back({"recon_rel_err", rel, 0.0, tol, rel <= tol});

    double prev = 0.0;
    bool have_prev = false;
    for (const json& rcj : n.at("refine_counts")) {
        int rc = rcj.get<int>();
        double e = recon_err(rc);
        if (!have_prev) {
            rep.checks.push_back({"refine_err_" + std::to_string(rc), e, 0.0, 0.0, true});
            have_prev = true;
        } else {
            rep.checks.push_back({"refine_decrease_" + std::to_string(rc), e, prev, 0.0,
                                  e <= prev * (1.0 + 1e-12)});
        }
        prev = e;
    }

    if (n.contains("output")) {
        const json& o = n.at("output");
        numerics::Sinogram S = transform::forward_sinogram(phi, sphere, grid, qp, mode);
        if (o.contains("sinogram"))
            io::write_sinogram(emit(out_dir, o.at("sinogram"), artifacts), S);
        // the full-box volume reaches |z| = 2 * extent at the corners, so the
        // s-grid must be sized for that; invert() says so if it is not
        if (o.contains("volume"))
            io::write_volume(emit(out_dir, o.at("volume"), artifacts),
                             transform::invert(S, eval_extent, eval_count, cn));
    }

    harness::detail::finalize(rep, sw);
    return rep;
}

// ---------------------------------------------------------------------------
// calibrate

inline json normalize_calibrate(const json& c) {
    reject_unknown(c, "", {"experiment", "n_eta", "n_theta", "quad", "fd_h", "radii", "tol"});
    transform::CalibParams d;
    json out{{"experiment", "calibrate"}};
    int ne = get_int(c, "", "n_eta", d.n_eta), nt = get_int(c, "", "n_theta", d.n_theta);
    if (ne < 4 || nt < 4) fail("", "sphere rule needs n_eta, n_theta >= 4");
    out["n_eta"] = ne;
    out["n_theta"] = nt;
    out["quad"] = norm_quad(c.contains("quad") ? c.at("quad") : json::object(), "quad", d.quad,
                            false);
    double fd_h = get_num(c, "", "fd_h", d.fd_h);
    if (!(fd_h > 0.0)) fail("fd_h", "must be > 0");
    out["fd_h"] = fd_h;
    json radii = json::array();
    if (c.contains("radii")) {
        const json& r = c.at("radii");
        if (!r.is_array() || r.empty()) fail("radii", "expected a non-empty array of numbers");
        for (std::size_t i = 0; i < r.size(); ++i) {
            if (!r[i].is_number() || r[i].get<double>() < 0.0)
                fail(idx("radii", i), "must be a number >= 0");
            radii.push_back(r[i].get<double>());
        }
    } else {
        for (double r : d.radii) radii.push_back(r);
    }
    out["radii"] = radii;
    double tol = get_num(c, "", "tol", 1e-3);
    if (!(tol > 0.0)) fail("tol", "must be > 0");
    out["tol"] = tol;
    return out;
}

inline harness::ExperimentReport execute_calibrate(const json& n, const std::string&,
                                                   std::vector<std::string>&) {
    harness::detail::Stopwatch sw;
    harness::ExperimentReport rep;
    rep.experiment = "calibrate";

    transform::CalibParams P;
    P.n_eta = n.at("n_eta");
    P.n_theta = n.at("n_theta");
    P.quad = parse_quad(n.at("quad"));
    P.fd_h = n.at("fd_h");
    P.radii = n.at("radii").get<std::vector<double>>();
    const double tol = n.at("tol");

    transform::Calibration cal = transform::calibrate_cn(P);
    rep.provenance = "eta=" + std::to_string(P.n_eta) + ",theta=" + std::to_string(P.n_theta) +
                     ",radii=" + std::to_string(P.radii.size());
    rep.checks.push_back(
        {"cn_estimate", cal.c_hat, cal.analytic, tol, cal.rel_dev <= tol});
    double spread = 0.0;
    for (auto [r, c] : cal.per_radius)
        spread = std::max(spread, std::abs(c - cal.c_hat) / cal.c_hat);
    rep.checks.push_back({"cn_radius_spread", spread, 0.0, tol, spread <= tol});

    harness::detail::finalize(rep, sw);
    return rep;
}

// ---------------------------------------------------------------------------
// duality

inline json normalize_duality(const json& c) {
    reject_unknown(c, "", {"experiment", "phi", "f", "params"});
    json out{{"experiment", "duality"}};
    out["phi"] = norm_testfunction(require(c, "", "phi"), "phi");
    out["f"] = norm_sfield(require(c, "", "f"), "f");
    harness::DualityParams d;
    const json& p = params_of(c);
    reject_unknown(p, "params",
                   {"lhs_eta", "lhs_theta", "lhs_n_r", "lhs_n_phi", "rhs_eta", "rhs_theta",
                    "rhs_n_r", "rhs_n_phi", "fwd", "tol", "floor", "f_w_independent"});
    json np;
    np["lhs_eta"] = get_int(p, "params", "lhs_eta", d.lhs_eta);
    np["lhs_theta"] = get_int(p, "params", "lhs_theta", d.lhs_theta);
    np["lhs_n_r"] = get_int(p, "params", "lhs_n_r", d.lhs_n_r);
    np["lhs_n_phi"] = get_int(p, "params", "lhs_n_phi", d.lhs_n_phi);
    np["rhs_eta"] = get_int(p, "params", "rhs_eta", d.rhs_eta);
    np["rhs_theta"] = get_int(p, "params", "rhs_theta", d.rhs_theta);
    np["rhs_n_r"] = get_int(p, "params", "rhs_n_r", d.rhs_n_r);
    np["rhs_n_phi"] = get_int(p, "params", "rhs_n_phi", d.rhs_n_phi);
    np["fwd"] = norm_quad(p.contains("fwd") ? p.at("fwd") : json::object(), "params.fwd", d.fwd,
                          true);
    np["tol"] = get_num(p, "params", "tol", d.tol);
    np["floor"] = get_num(p, "params", "floor", d.floor);
    np["f_w_independent"] = get_bool(p, "params", "f_w_independent", d.f_w_independent);
    out["params"] = np;
    return out;
}

inline harness::ExperimentReport execute_duality(const json& n, const std::string&,
                                                 std::vector<std::string>&) {
    const json& p = n.at("params");
    harness::DualityParams P;
    P.lhs_eta = p.at("lhs_eta");
    P.lhs_theta = p.at("lhs_theta");
    P.lhs_n_r = p.at("lhs_n_r");
    P.lhs_n_phi = p.at("lhs_n_phi");
    P.rhs_eta = p.at("rhs_eta");
    P.rhs_theta = p.at("rhs_theta");
    P.rhs_n_r = p.at("rhs_n_r");
    P.rhs_n_phi = p.at("rhs_n_phi");
    P.fwd = parse_quad(p.at("fwd"));
    P.tol = p.at("tol");
    P.floor = p.at("floor");
    P.f_w_independent = p.at("f_w_independent");
    return harness::check_duality(parse_testfunction(n.at("phi")), parse_sfield(n.at("f")), P);
}

// ---------------------------------------------------------------------------
// lemma1

inline json normalize_lemma1(const json& c) {
    reject_unknown(c, "", {"experiment", "phi", "psi", "params"});
    json out{{"experiment", "lemma1"}};
    out["phi"] = norm_testfunction(require(c, "", "phi"), "phi");
    out["psi"] = norm_sfield(require(c, "", "psi"), "psi");
    harness::Lemma1Params d;
    const json& p = params_of(c);
    reject_unknown(p, "params",
                   {"probes", "seed", "probe_radius", "conv_n_r", "conv_n_phi", "lhs_eta",
                    "lhs_theta", "rhs_eta", "rhs_theta", "s_n_r", "s_n_phi", "fwd", "tol",
                    "floor"});
    json np;
    int probes = get_int(p, "params", "probes", d.probes);
    if (probes < 1) fail("params.probes", "must be >= 1");
    np["probes"] = probes;
    if (p.contains("seed")) {
        const json& s = p.at("seed");
        if (!s.is_number_integer() || s.get<std::int64_t>() < 0)
            fail("params.seed", "expected a non-negative integer");
        np["seed"] = s.get<std::uint64_t>();
    } else {
        np["seed"] = d.seed;
    }
    np["probe_radius"] = get_num(p, "params", "probe_radius", d.probe_radius);
    np["conv_n_r"] = get_int(p, "params", "conv_n_r", d.conv_n_r);
    np["conv_n_phi"] = get_int(p, "params", "conv_n_phi", d.conv_n_phi);
    np["lhs_eta"] = get_int(p, "params", "lhs_eta", d.lhs_eta);
    np["lhs_theta"] = get_int(p, "params", "lhs_theta", d.lhs_theta);
    np["rhs_eta"] = get_int(p, "params", "rhs_eta", d.rhs_eta);
    np["rhs_theta"] = get_int(p, "params", "rhs_theta", d.rhs_theta);
    np["s_n_r"] = get_int(p, "params", "s_n_r", d.s_n_r);
    np["s_n_phi"] = get_int(p, "params", "s_n_phi", d.s_n_phi);
    np["fwd"] = norm_quad(p.contains("fwd") ? p.at("fwd") : json::object(), "params.fwd", d.fwd,
                          true);
    np["tol"] = get_num(p, "params", "tol", d.tol);
    np["floor"] = get_num(p, "params", "floor", d.floor);
    out["params"] = np;
    return out;
}

inline harness::ExperimentReport execute_lemma1(const json& n, const std::string&,
                                                std::vector<std::string>&) {
    const json& p = n.at("params");
    harness::Lemma1Params P;
    P.probes = p.at("probes");
    P.seed = p.at("seed").get<std::uint64_t>();
    P.probe_radius = p.at("probe_radius");
    P.conv_n_r = p.at("conv_n_r");
    P.conv_n_phi = p.at("conv_n_phi");
    P.lhs_eta = p.at("lhs_eta");
    P.lhs_theta = p.at("lhs_theta");
    P.rhs_eta = p.at("rhs_eta");
    P.rhs_theta = p.at("rhs_theta");
    P.s_n_r = p.at("s_n_r");
    P.s_n_phi = p.at("s_n_phi");
    P.fwd = parse_quad(p.at("fwd"));
    P.tol = p.at("tol");
    P.floor = p.at("floor");
    return harness::check_lemma1(parse_testfunction(n.at("phi")), parse_sfield(n.at("psi")), P);
}

// ---------------------------------------------------------------------------
// dual-bound

inline json normalize_dual_bound(const json& c) {
    reject_unknown(c, "", {"experiment", "h", "probes", "params"});
    json out{{"experiment", "dual-bound"}};
    out["h"] = norm_sfield(require(c, "", "h"), "h");
    const json& probes = require(c, "", "probes");
    if (!probes.is_array() || probes.empty())
        fail("probes", "expected a non-empty array of points");
    json np = json::array();
    for (std::size_t i = 0; i < probes.size(); ++i)
        np.push_back(norm_point4(probes[i], idx("probes", i)));
    out["probes"] = np;
    harness::DualBoundParams d;
    const json& p = params_of(c);
    reject_unknown(p, "params",
                   {"eta", "theta", "eta_half", "sup_n_r", "sup_n_phi", "tol_violation",
                    "tol_attain"});
    json pp;
    pp["eta"] = get_int(p, "params", "eta", d.eta);
    pp["theta"] = get_int(p, "params", "theta", d.theta);
    pp["eta_half"] = get_int(p, "params", "eta_half", d.eta_half);
    pp["sup_n_r"] = get_int(p, "params", "sup_n_r", d.sup_n_r);
    pp["sup_n_phi"] = get_int(p, "params", "sup_n_phi", d.sup_n_phi);
    pp["tol_violation"] = get_num(p, "params", "tol_violation", d.tol_violation);
    pp["tol_attain"] = get_num(p, "params", "tol_attain", d.tol_attain);
    out["params"] = pp;
    return out;
}

inline harness::ExperimentReport execute_dual_bound(const json& n, const std::string&,
                                                    std::vector<std::string>&) {
    const json& p = n.at("params");
    harness::DualBoundParams P;
    P.eta = p.at("eta");
    P.theta = p.at("theta");
    P.eta_half = p.at("eta_half");
    P.sup_n_r = p.at("sup_n_r");
    P.sup_n_phi = p.at("sup_n_phi");
    P.tol_violation = p.at("tol_violation");
    P.tol_attain = p.at("tol_attain");
    std::vector<Point> probes;
    for (const json& q : n.at("probes")) probes.push_back(parse_point4(q));
    return harness::check_dual_bound(parse_sfield(n.at("h")), probes, P);
}

// ---------------------------------------------------------------------------
// support-forward

inline json normalize_support_forward(const json& c) {
    reject_unknown(c, "", {"experiment", "distribution", "set", "margin", "params"});
    json out{{"experiment", "support-forward"}};
    out["distribution"] = norm_distribution(require(c, "", "distribution"), "distribution");
    out["set"] = norm_compactset(require(c, "", "set"), "set");
    double margin = req_num(c, "", "margin");
    if (!(margin > 0.0)) fail("margin", "must be > 0");
    out["margin"] = margin;
    harness::SupportForwardParams d;
    const json& p = params_of(c);
    reject_unknown(p, "params",
                   {"sino", "eta", "theta", "extent", "count", "n_radial", "n_window", "psi_rho",
                    "window_width", "tol", "pair_quad"});
    json pp;
    pp["sino"] = norm_sino(p.contains("sino") ? p.at("sino") : json::object(), "params.sino",
                           d.sino);
    pp["eta"] = get_int(p, "params", "eta", d.eta);
    pp["theta"] = get_int(p, "params", "theta", d.theta);
    double extent = get_num(p, "params", "extent", d.extent);
    if (extent < 0.0) fail("params.extent", "must be >= 0 (0 = derive from the set)");
    pp["extent"] = extent;
    pp["count"] = get_int(p, "params", "count", d.count);
    pp["n_radial"] = get_int(p, "params", "n_radial", d.n_radial);
    pp["n_window"] = get_int(p, "params", "n_window", d.n_window);
    pp["psi_rho"] = get_num(p, "params", "psi_rho", d.psi_rho);
    pp["window_width"] = get_num(p, "params", "window_width", d.window_width);
    pp["tol"] = get_num(p, "params", "tol", d.tol);
    {
        const json& q = p.contains("pair_quad") ? p.at("pair_quad") : json::object();
        reject_unknown(q, "params.pair_quad", {"radius", "n_r", "n_phi"});
        json qq;
        qq["radius"] = get_num(q, "params.pair_quad", "radius", d.pair_quad.radius);
        qq["n_r"] = get_int(q, "params.pair_quad", "n_r", d.pair_quad.n_r);
        qq["n_phi"] = get_int(q, "params.pair_quad", "n_phi", d.pair_quad.n_phi);
        pp["pair_quad"] = qq;
    }
    out["params"] = pp;
    return out;
}

inline harness::ExperimentReport execute_support_forward(const json& n, const std::string&,
                                                         std::vector<std::string>&) {
    const json& p = n.at("params");
    harness::SupportForwardParams P;
    P.sino = parse_sino(p.at("sino"));
    P.eta = p.at("eta");
    P.theta = p.at("theta");
    P.extent = p.at("extent");
    P.count = p.at("count");
    P.n_radial = p.at("n_radial");
    P.n_window = p.at("n_window");
    P.psi_rho = p.at("psi_rho");
    P.window_width = p.at("window_width");
    P.tol = p.at("tol");
    P.pair_quad = {p.at("pair_quad").at("radius"), p.at("pair_quad").at("n_r"),
                   p.at("pair_quad").at("n_phi")};
    return harness::support_forward(parse_distribution(n.at("distribution")),
                                    parse_compactset(n.at("set")), n.at("margin"), P);
}

// ---------------------------------------------------------------------------
// support-converse

inline json normalize_support_converse(const json& c) {
    reject_unknown(c, "", {"experiment", "distribution", "set", "witness", "params"});
    json out{{"experiment", "support-converse"}};
    out["distribution"] = norm_distribution(require(c, "", "distribution"), "distribution");
    out["set"] = norm_compactset(require(c, "", "set"), "set");
    out["witness"] = norm_point4(require(c, "", "witness"), "witness");
    harness::SupportConverseParams d;
    const json& p = params_of(c);
    reject_unknown(p, "params",
                   {"sino", "eta", "theta", "extent", "count", "chain_ms", "raster_res",
                    "n_family", "family_frac", "tol_chain", "tol_witness"});
    json pp;
    pp["sino"] = norm_sino(p.contains("sino") ? p.at("sino") : json::object(), "params.sino",
                           d.sino);
    pp["eta"] = get_int(p, "params", "eta", d.eta);
    pp["theta"] = get_int(p, "params", "theta", d.theta);
    double extent = get_num(p, "params", "extent", d.extent);
    if (extent < 0.0) fail("params.extent", "must be >= 0 (0 = derive from the inputs)");
    pp["extent"] = extent;
    pp["count"] = get_int(p, "params", "count", d.count);
    if (p.contains("chain_ms")) {
        const json& cm = p.at("chain_ms");
        if (!cm.is_array() || cm.size() != 2 || !cm[0].is_number_integer() ||
            !cm[1].is_number_integer() || cm[0].get<int>() < 1 || cm[1].get<int>() < 1)
            fail("params.chain_ms", "expected [m1, m2] of positive integers");
        pp["chain_ms"] = json::array({cm[0].get<int>(), cm[1].get<int>()});
    } else {
        pp["chain_ms"] = json::array({d.chain_ms[0], d.chain_ms[1]});
    }
    pp["raster_res"] = get_int(p, "params", "raster_res", d.raster_res);
    pp["n_family"] = get_int(p, "params", "n_family", d.n_family);
    pp["family_frac"] = get_num(p, "params", "family_frac", d.family_frac);
    pp["tol_chain"] = get_num(p, "params", "tol_chain", d.tol_chain);
    pp["tol_witness"] = get_num(p, "params", "tol_witness", d.tol_witness);
    out["params"] = pp;
    return out;
}

inline harness::ExperimentReport execute_support_converse(const json& n, const std::string&,
                                                          std::vector<std::string>&) {
    const json& p = n.at("params");
    harness::SupportConverseParams P;
    P.sino = parse_sino(p.at("sino"));
    P.eta = p.at("eta");
    P.theta = p.at("theta");
    P.extent = p.at("extent");
    P.count = p.at("count");
    P.chain_ms = {p.at("chain_ms")[0].get<int>(), p.at("chain_ms")[1].get<int>()};
    P.raster_res = p.at("raster_res");
    P.n_family = p.at("n_family");
    P.family_frac = p.at("family_frac");
    P.tol_chain = p.at("tol_chain");
    P.tol_witness = p.at("tol_witness");
    return harness::support_converse(parse_distribution(n.at("distribution")),
                                     parse_compactset(n.at("set")),
                                     parse_point4(n.at("witness")), P);
}

// ---------------------------------------------------------------------------
// real-bridge

inline json normalize_real_bridge(const json& c) {
    reject_unknown(c, "", {"experiment", "f", "params"});
    json out{{"experiment", "real-bridge"}};
    out["f"] = norm_testfunction(c.contains("f") ? c.at("f") : json{{"kind", "gaussian"}}, "f");
    harness::BridgeParams d;
    const json& p = params_of(c);
    reject_unknown(p, "params",
                   {"eta", "theta", "extent", "count", "fwd", "truncation", "n_probes",
                    "direct_n", "direct_half", "tol", "vanish_tol", "floor",
                    "gaussian_reference"});
    json pp;
    pp["eta"] = get_int(p, "params", "eta", d.eta);
    pp["theta"] = get_int(p, "params", "theta", d.theta);
    pp["extent"] = get_num(p, "params", "extent", d.extent);
    pp["count"] = get_int(p, "params", "count", d.count);
    pp["fwd"] = norm_quad(p.contains("fwd") ? p.at("fwd") : json::object(), "params.fwd", d.fwd,
                          true);
    pp["truncation"] = get_num(p, "params", "truncation", d.truncation);
    pp["n_probes"] = get_int(p, "params", "n_probes", d.n_probes);
    pp["direct_n"] = get_int(p, "params", "direct_n", d.direct_n);
    pp["direct_half"] = get_num(p, "params", "direct_half", d.direct_half);
    pp["tol"] = get_num(p, "params", "tol", d.tol);
    pp["vanish_tol"] = get_num(p, "params", "vanish_tol", d.vanish_tol);
    pp["floor"] = get_num(p, "params", "floor", d.floor);
    pp["gaussian_reference"] = get_bool(p, "params", "gaussian_reference", d.gaussian_reference);
    out["params"] = pp;
    return out;
}

inline harness::ExperimentReport execute_real_bridge(const json& n, const std::string&,
                                                     std::vector<std::string>&) {
    const json& p = n.at("params");
    harness::BridgeParams P;
    P.eta = p.at("eta");
    P.theta = p.at("theta");
    P.extent = p.at("extent");
    P.count = p.at("count");
    P.fwd = parse_quad(p.at("fwd"));
    P.truncation = p.at("truncation");
    P.n_probes = p.at("n_probes");
    P.direct_n = p.at("direct_n");
    P.direct_half = p.at("direct_half");
    P.tol = p.at("tol");
    P.vanish_tol = p.at("vanish_tol");
    P.floor = p.at("floor");
    P.gaussian_reference = p.at("gaussian_reference");
    return harness::check_real_radon_bridge(parse_testfunction(n.at("f")), P);
}

// ---------------------------------------------------------------------------
// geometry

inline json normalize_geometry(const json& c) {
    reject_unknown(c, "", {"experiment", "set", "direction", "resolution", "expect", "escape"});
    json out{{"experiment", "geometry"}};
    out["set"] = norm_compactset(require(c, "", "set"), "set");
    out["direction"] = c.contains("direction")
                           ? norm_point4(c.at("direction"), "direction")
                           : json::array({1.0, 0.0, 0.0, 0.0});
    if (std::abs(norm(parse_point4(out["direction"])) - 1.0) > 1e-9)
        fail("direction", "must be a unit vector");
    int res = get_int(c, "", "resolution", 96);
    if (res < 16) fail("resolution", "must be >= 16");
    out["resolution"] = res;
    const json& ex = require(c, "", "expect");
    reject_unknown(ex, "expect", {"complement_connected", "components", "true_components"});
    json nex = json::object();
    if (ex.contains("complement_connected")) {
        if (!ex.at("complement_connected").is_boolean())
            fail("expect.complement_connected", "expected a boolean");
        nex["complement_connected"] = ex.at("complement_connected").get<bool>();
    }
    if (ex.contains("components")) {
        int v = get_int(ex, "expect", "components", 0);
        if (v < 1) fail("expect.components", "must be >= 1");
        nex["components"] = v;
    }
    if (ex.contains("true_components")) {
        int v = get_int(ex, "expect", "true_components", 0);
        if (v < 1) fail("expect.true_components", "must be >= 1");
        nex["true_components"] = v;
    }
    if (nex.empty()) fail("expect", "needs at least one expectation");
    out["expect"] = nex;
    if (c.contains("escape")) {
        const json& esc = c.at("escape");
        reject_unknown(esc, "escape", {"s0", "R", "delta", "expect_found"});
        json ne;
        ne["s0"] = norm_cplx(require(esc, "escape", "s0"), "escape.s0");
        double R = req_num(esc, "escape", "R");
        if (!(R > 0.0)) fail("escape.R", "must be > 0");
        ne["R"] = R;
        double delta = get_num(esc, "escape", "delta", 0.0);
        if (delta < 0.0) fail("escape.delta", "must be >= 0");
        ne["delta"] = delta;
        const json& ef = require(esc, "escape", "expect_found");
        if (!ef.is_boolean()) fail("escape.expect_found", "expected a boolean");
        ne["expect_found"] = ef.get<bool>();
        out["escape"] = ne;
    }
    return out;
}

inline harness::ExperimentReport execute_geometry(const json& n, const std::string&,
                                                  std::vector<std::string>&) {
    harness::detail::Stopwatch sw;
    harness::ExperimentReport rep;
    rep.experiment = "geometry";

    geometry::CompactSet K = parse_compactset(n.at("set"));
    Point w = parse_point4(n.at("direction"));
    int res = n.at("resolution");
    geometry::ProjectionRegion P = geometry::project(K, w, res);
    rep.provenance = "resolution=" + std::to_string(res) +
                     ",half_width=" + std::to_string(P.half_width);

    const json& ex = n.at("expect");
    if (ex.contains("complement_connected")) {
        bool want = ex.at("complement_connected");
        bool got = geometry::complement_connected(P);
        rep.checks.push_back(
            {"complement_connected", got ? 1.0 : 0.0, want ? 1.0 : 0.0, 0.0, got == want});
    }
    if (ex.contains("components")) {
        int want = ex.at("components");
        int got = geometry::component_count(P, false);
        rep.checks.push_back(
            {"complement_components", double(got), double(want), 0.0, got == want});
    }
    if (ex.contains("true_components")) {
        int want = ex.at("true_components");
        int got = geometry::component_count(P, true);
        rep.checks.push_back({"set_components", double(got), double(want), 0.0, got == want});
    }
    if (n.contains("escape")) {
        const json& esc = n.at("escape");
        geometry::EscapeResult er =
            geometry::escape_path(P, parse_cplx(esc.at("s0")), esc.at("R"), esc.at("delta"));
        bool want = esc.at("expect_found");
        rep.checks.push_back(
            {"escape_found", er.found ? 1.0 : 0.0, want ? 1.0 : 0.0, 0.0, er.found == want});
        rep.checks.push_back({"escape_bottleneck", er.bottleneck, esc.at("delta"), 0.0, true});
    }

    harness::detail::finalize(rep, sw);
    return rep;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Entry points

inline json normalize(const json& raw) {
    if (!raw.is_object()) throw ConfigError("config: expected a JSON object");
    if (!raw.contains("experiment")) throw ConfigError("experiment: missing required field");
    if (!raw.at("experiment").is_string()) throw ConfigError("experiment: expected a string");
    std::string kind = raw.at("experiment");
    if (kind == "transform") return detail::normalize_transform(raw);
    if (kind == "invert") return detail::normalize_invert(raw);
    if (kind == "calibrate") return detail::normalize_calibrate(raw);
    if (kind == "duality") return detail::normalize_duality(raw);
    if (kind == "lemma1") return detail::normalize_lemma1(raw);
    if (kind == "dual-bound") return detail::normalize_dual_bound(raw);
    if (kind == "support-forward") return detail::normalize_support_forward(raw);
    if (kind == "support-converse") return detail::normalize_support_converse(raw);
    if (kind == "real-bridge") return detail::normalize_real_bridge(raw);
    if (kind == "geometry") return detail::normalize_geometry(raw);
    std::string kinds;
    for (const std::string& k : experiment_kinds()) kinds += (kinds.empty() ? "" : ", ") + k;
    throw ConfigError("experiment: unknown kind '" + kind + "' (" + kinds + ")");
}

inline RunResult run(const json& raw, const std::string& out_dir = "") {
    RunResult rr;
    rr.config = normalize(raw);
    const std::string kind = rr.config.at("experiment");
    try {
        if (kind == "transform")
            rr.report = detail::execute_transform(rr.config, out_dir, rr.artifacts);
        else if (kind == "invert")
            rr.report = detail::execute_invert(rr.config, out_dir, rr.artifacts);
        else if (kind == "calibrate")
            rr.report = detail::execute_calibrate(rr.config, out_dir, rr.artifacts);
        else if (kind == "duality")
            rr.report = detail::execute_duality(rr.config, out_dir, rr.artifacts);
        else if (kind == "lemma1")
            rr.report = detail::execute_lemma1(rr.config, out_dir, rr.artifacts);
        else if (kind == "dual-bound")
            rr.report = detail::execute_dual_bound(rr.config, out_dir, rr.artifacts);
        else if (kind == "support-forward")
            rr.report = detail::execute_support_forward(rr.config, out_dir, rr.artifacts);
        else if (kind == "support-converse")
            rr.report = detail::execute_support_converse(rr.config, out_dir, rr.artifacts);
        else if (kind == "real-bridge")
            rr.report = detail::execute_real_bridge(rr.config, out_dir, rr.artifacts);
        else
            rr.report = detail::execute_geometry(rr.config, out_dir, rr.artifacts);
    } catch (const std::invalid_argument& e) {
        // the library flags violated preconditions with invalid_argument, and
        // here every input came from the config
        throw ConfigError(e.what());
    }
    return rr;
}

// "a.b.c=value" with the value parsed as JSON when it parses, else as a string
inline void apply_override(json& cfg, const std::string& spec) {
    std::size_t eq = spec.find('=');
    if (eq == std::string::npos || eq == 0)
        throw ConfigError("override '" + spec + "': expected key=value");
    std::string keypath = spec.substr(0, eq), value = spec.substr(eq + 1);
    json v = json::parse(value, nullptr, false);
    if (v.is_discarded()) v = value;

    json* node = &cfg;
    std::size_t start = 0;
    while (true) {
        std::size_t dot = keypath.find('.', start);
        std::string key = keypath.substr(start, dot == std::string::npos ? dot : dot - start);
        if (key.empty()) throw ConfigError("override '" + spec + "': empty key segment");
        if (dot == std::string::npos) {
            (*node)[key] = v;
            return;
        }
        if (node->contains(key) && !node->at(key).is_object())
            throw ConfigError("override '" + spec + "': " + keypath.substr(0, dot) +
                              " is not an object");
        node = &(*node)[key];
        if (node->is_null()) *node = json::object();
        start = dot + 1;
    }
}

}  // namespace cradon::experiment
