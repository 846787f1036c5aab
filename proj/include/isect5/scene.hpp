#pragma once

// JSON scene files: four surfaces, a starting point and optional tolerances.

#include <array>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>

#include <json.hpp>

#include "isect5/curve.hpp"
#include "isect5/errors.hpp"
#include "isect5/expr.hpp"
#include "isect5/surface.hpp"
#include "isect5/tracer.hpp"

namespace isect5 {

struct Tolerances {
    double point_agreement = 1e-9;
    double regularity = kRegularityTolerance;
    double transversality = kTransversalityTolerance;
    double degeneracy = kDegeneracyTolerance;
    double corrector = 1e-12;
    int max_newton_iterations = 25;
    double min_step = 1e-8;

    AnalysisOptions analysis() const { return {regularity, transversality, degeneracy}; }
};

struct Scene {
    std::string name;
    SurfaceQuad surfaces;
    ParamSet start{};
    DomainBoxes domains{};
    Tolerances tolerances;
    /// Externally published curvature values to compare against (kappa1..kappa4), if any.
    std::map<std::string, double> reference;
};

namespace detail {
using nlohmann::json;

inline bool has_param(const expr::Ast& a) { return a && !a->constant; }

/// A parameter value given as a JSON number or a constant expression such as "pi/4".
inline double scalar_value(const json& v, const std::string& where) {
    if (v.is_number()) return v.get<double>();
    if (!v.is_string()) throw InputError(where + ": expected a number or an expression string");
    expr::Ast a;
    try {
        a = expr::parse(v.get<std::string>());
    } catch (const ParseError& e) {
        throw InputError(where + ": " + e.what());
    }
    if (has_param(a)) throw InputError(where + ": constant expression must not reference u1..u4");
    const std::array<double, 4> zero{};
    try {
        return expr::evaluate(a, zero);
    } catch (const DomainError& e) {
        throw InputError(where + ": " + e.what());
    }
}

inline const json& require(const json& obj, const char* key, const std::string& where) {
    if (!obj.is_object() || !obj.contains(key)) throw InputError(where + ": missing field '" + key + "'");
    return obj.at(key);
}

inline double finite_number(const json& v, const std::string& where) {
    if (!v.is_number()) throw InputError(where + ": expected a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) throw InputError(where + ": expected a finite number");
    return x;
}
} // namespace detail

inline Scene parse_scene(const nlohmann::json& doc) {
    using detail::require;
    if (!doc.is_object()) throw InputError("scene: top level must be a JSON object");
    Scene sc;
    if (doc.contains("name")) {
        if (!doc["name"].is_string()) throw InputError("scene: 'name' must be a string");
        sc.name = doc["name"].get<std::string>();
    }

    const auto& surfaces = require(doc, "surfaces", "scene");
    if (!surfaces.is_array() || surfaces.size() != 4)
        throw InputError("scene: expected 4 surfaces, got " +
                         (surfaces.is_array() ? std::to_string(surfaces.size()) : std::string("a non-array")));
    for (int i = 0; i < 4; ++i) {
        const auto& s = surfaces[i];
        std::string where = "surface " + std::to_string(i + 1);
        const auto& name = require(s, "name", where);
        if (!name.is_string()) throw InputError(where + ": 'name' must be a string");
        const std::string sname = name.get<std::string>();
        where = "surface '" + sname + "'";
        const auto& comps = require(s, "components", where);
        if (!comps.is_array() || comps.size() != 5) throw InputError(where + ": expected 5 components");
        std::array<std::string, 5> texts;
        std::array<expr::Ast, 5> asts;
        for (int c = 0; c < 5; ++c) {
            if (!comps[c].is_string()) throw InputError(where + " component " + std::to_string(c + 1) + ": expected a string");
            texts[c] = comps[c].get<std::string>();
            try {
                asts[c] = expr::parse(texts[c]);
            } catch (const ParseError& e) {
                throw InputError(where + " component " + std::to_string(c + 1) + " (\"" + texts[c] + "\"): " + e.what());
            }
        }
        sc.surfaces[i] = Hypersurface(sname, texts);
        if (s.contains("domain")) {
            const auto& d = s["domain"];
            if (!d.is_array() || d.size() != 4) throw InputError(where + ": domain must be 4 [lo, hi] pairs");
            ParamBox box;
            for (int k = 0; k < 4; ++k) {
                const std::string dw = where + " domain u" + std::to_string(k + 1);
                if (!d[k].is_array() || d[k].size() != 2) throw InputError(dw + ": expected [lo, hi]");
                box[k] = {detail::scalar_value(d[k][0], dw), detail::scalar_value(d[k][1], dw)};
                if (!(box[k][0] <= box[k][1])) throw InputError(dw + ": lo must not exceed hi");
            }
            sc.domains[i] = box;
        }
    }

    const auto& point = require(doc, "point", "scene");
    const auto& params = require(point, "params", "point");
    if (!params.is_array() || params.size() != 4) throw InputError("point: expected 4 parameter tuples");
    for (int i = 0; i < 4; ++i) {
        if (!params[i].is_array() || params[i].size() != 4)
            throw InputError("point: parameter tuple " + std::to_string(i + 1) + " must have 4 entries");
        for (int k = 0; k < 4; ++k)
            sc.start[i][k] = detail::scalar_value(
                params[i][k], "point tuple " + std::to_string(i + 1) + " entry " + std::to_string(k + 1));
    }
    if (!inside(sc.domains, sc.start)) throw InputError("point: starting parameters lie outside a surface domain");

    if (doc.contains("tolerances")) {
        const auto& t = doc["tolerances"];
        if (!t.is_object()) throw InputError("tolerances: expected an object");
        Tolerances& tol = sc.tolerances;
        for (const auto& [key, v] : t.items()) {
            const std::string where = "tolerances." + key;
            if (key == "point_agreement") tol.point_agreement = detail::finite_number(v, where);
            else if (key == "regularity") tol.regularity = detail::finite_number(v, where);
            else if (key == "transversality") tol.transversality = detail::finite_number(v, where);
            else if (key == "degeneracy") tol.degeneracy = detail::finite_number(v, where);
            else if (key == "corrector") tol.corrector = detail::finite_number(v, where);
            else if (key == "min_step") tol.min_step = detail::finite_number(v, where);
            else if (key == "max_newton_iterations") {
                if (!v.is_number_integer() || v.get<int>() < 1) throw InputError(where + ": expected a positive integer");
                tol.max_newton_iterations = v.get<int>();
            } else throw InputError("tolerances: unknown key '" + key + "'");
        }
    }

    if (doc.contains("reference")) {
        const auto& r = doc["reference"];
        if (!r.is_object()) throw InputError("reference: expected an object");
        for (const auto& [key, v] : r.items()) {
            if (key != "kappa1" && key != "kappa2" && key != "kappa3" && key != "kappa4")
                throw InputError("reference: unknown key '" + key + "'");
            sc.reference[key] = detail::finite_number(v, "reference." + key);
        }
    }
    return sc;
}

inline Scene parse_scene_text(const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw InputError(std::string("scene: malformed JSON: ") + e.what());
    }
    return parse_scene(doc);
}

inline Scene load_scene(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open scene file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_scene_text(ss.str());
}

} // namespace isect5
