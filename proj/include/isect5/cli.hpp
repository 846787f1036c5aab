#pragma once

// check / analyze / trace commands. Each returns its output and exit code instead of
// printing, so the executable in tools/ stays a thin argument parser.

#include <array>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "isect5/curve.hpp"
#include "isect5/darboux.hpp"
#include "isect5/errors.hpp"
#include "isect5/report.hpp"
#include "isect5/scene.hpp"
#include "isect5/tracer.hpp"

namespace isect5::cli {

enum ExitCode { kOk = 0, kInput = 1, kDegenerate = 2, kNumerical = 3 };

struct CommandResult {
    int exit_code = kOk;
    std::string out;
    std::string err;
};

inline int exit_code_for(const Error& e) {
    switch (e.error_class()) {
    case ErrorClass::Input: return kInput;
    case ErrorClass::Degeneracy: return kDegenerate;
    case ErrorClass::Numerical: return kNumerical;
    }
    return kNumerical;
}

inline std::string describe(const Error& e) {
    std::string s = e.kind();
    if (!e.stage().empty()) s += " (stage " + e.stage() + ")";
    return s + ": " + e.what();
}

// ---------------------------------------------------------------------------
// check

struct CheckReport {
    double agreement = 0.0;
    std::array<double, 4> regularity{};
    std::optional<double> transversality; // ||N1 x N2 x N3 x N4||, absent when a normal is undefined
    std::string failure;                  // first failing criterion, empty on success
    std::string failure_detail;

    bool passed() const { return failure.empty(); }
};

/// Throws DomainError when a surface cannot be evaluated at the start point.
inline CheckReport run_checks(const Scene& sc) {
    const Tolerances& tol = sc.tolerances;
    CheckReport r;
    const IntersectionPoint p = make_intersection_point(sc.surfaces, sc.start);
    r.agreement = p.agreement;

    std::array<Vec5, 4> normals;
    bool all_regular = true;
    std::string irregular;
    for (int i = 0; i < 4; ++i) {
        const SurfaceJet j = sc.surfaces[i].jet(sc.start[i], 1, -1.0);
        r.regularity[i] = regularity_margin(j);
        if (r.regularity[i] > tol.regularity) {
            normals[i] = normalized(quad_product(j.tangents()));
        } else {
            all_regular = false;
            if (irregular.empty()) irregular = sc.surfaces[i].name();
        }
    }
    if (all_regular) r.transversality = norm(quad_product(normals));

    if (!(r.agreement <= tol.point_agreement)) {
        r.failure = "PointMismatch";
        r.failure_detail = "surface points disagree by " + report::fmt6(r.agreement) + " (tolerance " +
                           report::fmt6(tol.point_agreement) + ")";
    } else if (!all_regular) {
        r.failure = "NotRegular";
        r.failure_detail = "surface '" + irregular + "' is not regular at its start parameters";
    } else if (!(*r.transversality >= tol.transversality)) {
        r.failure = "NonTransversal";
        r.failure_detail = "||N1 x N2 x N3 x N4|| = " + report::fmt6(*r.transversality) + " (tolerance " +
                           report::fmt6(tol.transversality) + ")";
    }
    return r;
}

inline std::string check_text(const Scene& sc, const CheckReport& r) {
    const Tolerances& tol = sc.tolerances;
    std::ostringstream os;
    auto row = [&](const std::string& label, const std::string& value, const std::string& bound, bool ok) {
        char buf[160];
        std::snprintf(buf, sizeof buf, "  %-24s %-14s %-12s %s\n", label.c_str(), value.c_str(), bound.c_str(),
                      ok ? "ok" : "FAIL");
        os << buf;
    };
    os << "check" << (sc.name.empty() ? "" : " " + sc.name) << "\n";
    row("point agreement", report::fmt6(r.agreement), "<= " + report::fmt6(tol.point_agreement),
        r.agreement <= tol.point_agreement);
    for (int i = 0; i < 4; ++i)
        row("regularity " + sc.surfaces[i].name(), report::fmt6(r.regularity[i]), "> " + report::fmt6(tol.regularity),
            r.regularity[i] > tol.regularity);
    if (r.transversality)
        row("transversality", report::fmt6(*r.transversality), ">= " + report::fmt6(tol.transversality),
            *r.transversality >= tol.transversality);
    else
        row("transversality", "undefined", ">= " + report::fmt6(tol.transversality), false);
    if (r.passed()) os << "PASS\n";
    else os << "FAIL " << r.failure << ": " << r.failure_detail << "\n";
    return os.str();
}

inline CommandResult cmd_check(const Scene& sc) {
    CommandResult res;
    try {
        const CheckReport r = run_checks(sc);
        res.out = check_text(sc, r);
        res.exit_code = r.passed() ? kOk : kDegenerate;
        if (!r.passed()) res.err = r.failure + ": " + r.failure_detail + "\n";
    } catch (const Error& e) {
        res.err = describe(e) + "\n";
        res.exit_code = exit_code_for(e);
    }
    return res;
}

// ---------------------------------------------------------------------------
// analyze

struct Analysis {
    IntersectionPoint point;
    CheckReport check;
    FrenetApparatus frenet;
    std::array<GeodesicData, 4> geodesic;
};

/// Runs checks, the Frenet pipeline and the Darboux data. A failed check throws an Error
/// of the Degeneracy class named after the criterion; Frenet degeneracy is reported
/// through frenet.degenerate_level.
inline Analysis run_analysis(const Scene& sc) {
    Analysis a;
    a.check = run_checks(sc);
    if (!a.check.passed()) throw Error(a.check.failure, ErrorClass::Degeneracy, a.check.failure_detail);
    a.point = make_intersection_point(sc.surfaces, sc.start);
    a.frenet = analyze(sc.surfaces, sc.start, sc.tolerances.analysis());
    a.geodesic = detail::run_stage("darboux", [&] { return geodesic_data(a.frenet, sc.tolerances.degeneracy); });
    return a;
}

namespace detail {
inline std::span<const double> as_span(const Vec5& v) { return v.v; }
inline std::span<const double> as_span(const Vec4& v) { return v; }

inline void write_vec(report::JsonWriter& w, std::string_view key, const std::optional<Vec5>& v) {
    w.key(key);
    if (v) w.numbers(as_span(*v));
    else w.null();
}

inline void write_opt(report::JsonWriter& w, std::string_view key, const std::optional<double>& v) {
    w.key(key);
    if (v) w.value(*v);
    else w.null();
}

inline void write_mat(report::JsonWriter& w, std::string_view key, const Mat4& m) {
    w.key(key).begin_array();
    for (const auto& row : m.m) w.numbers(row);
    w.end_array();
}
} // namespace detail

inline std::string analysis_json(const Scene& sc, const Analysis& a) {
    using detail::as_span;
    const FrenetApparatus& f = a.frenet;
    const DerivativeData& dd = f.data;
    report::JsonWriter w;
    w.begin_object();
    w.field("scene", std::string_view(sc.name));
    w.field("frenet_status", std::string_view(f.status()));
    w.field("degenerate_level", f.degenerate_level);

    w.key("point").begin_object();
    w.field_numbers("x", as_span(a.point.x));
    w.key("params").begin_array();
    for (const auto& p : a.point.params) w.numbers(p);
    w.end_array();
    w.field("agreement", a.point.agreement);
    w.field("residual_inf", a.point.residual_inf);
    w.end_object();

    w.key("checks").begin_object();
    w.field("agreement", a.check.agreement);
    w.field_numbers("regularity_margins", a.check.regularity);
    detail::write_opt(w, "transversality", a.check.transversality);
    w.end_object();

    w.field_numbers("tangent", as_span(f.t));
    detail::write_vec(w, "normal", f.n);
    detail::write_vec(w, "binormal1", f.b1);
    detail::write_vec(w, "binormal2", f.b2);
    detail::write_vec(w, "binormal3", f.b3);
    w.field("kappa1", f.k1);
    detail::write_opt(w, "kappa2", f.k2);
    detail::write_opt(w, "kappa3", f.k3);
    detail::write_opt(w, "kappa4", f.k4);
    detail::write_opt(w, "kappa1_prime", f.k1_prime);
    detail::write_opt(w, "kappa1_second", f.k1_second);

    const int done = dd.orders_done;
    w.key("alpha").begin_array();
    for (int k = 0; k < 5; ++k) {
        if (k < done) w.numbers(as_span(dd.alpha[k]));
        else w.null();
    }
    w.end_array();
    detail::write_mat(w, "normal_gram", dd.gram);
    auto vec4_or_null = [&](std::string_view key, const Vec4& v, bool available) {
        w.key(key);
        if (available) w.numbers(v);
        else w.null();
    };
    vec4_or_null("kn", dd.kn, done >= 2);
    vec4_or_null("a", dd.a, done >= 2);
    vec4_or_null("mu", dd.mu, done >= 3);
    vec4_or_null("c", dd.c, done >= 3);
    vec4_or_null("xi", dd.xi, done >= 4);
    vec4_or_null("d", dd.d, done >= 4);
    vec4_or_null("eta", dd.eta, done >= 5);
    vec4_or_null("m", dd.m, done >= 5);
    detail::write_opt(w, "alpha5_tangential", done >= 5 ? std::optional<double>(dd.tangential5) : std::nullopt);

    w.key("surfaces").begin_array();
    for (int i = 0; i < 4; ++i) {
        const SurfaceTerms& st = dd.surfaces[i];
        const GeodesicData& g = a.geodesic[i];
        w.begin_object();
        w.field("name", std::string_view(sc.surfaces[i].name()));
        w.field_numbers("normal", as_span(st.normal));
        w.field("regularity_margin", a.check.regularity[i]);
        detail::write_mat(w, "first_fundamental", st.first_fundamental);
        detail::write_mat(w, "second_fundamental", st.second_fundamental);
        w.key("u").begin_array();
        for (int k = 0; k < 4; ++k) {
            if (k < std::min(done, 4)) w.numbers(st.u[k]);
            else w.null();
        }
        w.end_array();
        w.field("kn", st.kn);
        detail::write_opt(w, "mu", done >= 3 ? std::optional<double>(st.mu) : std::nullopt);
        detail::write_opt(w, "xi", done >= 4 ? std::optional<double>(st.xi) : std::nullopt);
        detail::write_opt(w, "eta", done >= 5 ? std::optional<double>(st.eta) : std::nullopt);
        w.key("darboux").begin_object();
        w.key("U").begin_array();
        for (const Vec5& u : g.frame.U) w.numbers(as_span(u));
        w.end_array();
        w.field("completed_from", g.frame.completed_from);
        w.field("kappa1g", g.k1g);
        w.field("tau1g", g.tau[0]);
        w.field("tau2g", g.tau[1]);
        w.field("tau3g", g.tau[2]);
        w.field_numbers("dN_ds", as_span(g.dNds));
        w.end_object();
        w.end_object();
    }
    w.end_array();

    if (!sc.reference.empty()) {
        const std::array<std::optional<double>, 4> computed{f.k1, f.k2, f.k3, f.k4};
        w.key("reference").begin_object();
        for (int k = 0; k < 4; ++k) {
            const std::string key = "kappa" + std::to_string(k + 1);
            const auto it = sc.reference.find(key);
            if (it == sc.reference.end()) continue;
            w.key(key).begin_object();
            w.field("reference", it->second);
            detail::write_opt(w, "computed", computed[k]);
            detail::write_opt(w, "delta", computed[k] ? std::optional<double>(*computed[k] - it->second) : std::nullopt);
            w.end_object();
        }
        w.end_object();
    }
    w.end_object();
    return w.str();
}

inline std::string analysis_text(const Scene& sc, const Analysis& a) {
    const FrenetApparatus& f = a.frenet;
    const DerivativeData& dd = f.data;
    std::ostringstream os;
    auto line = [&](const std::string& label, const std::string& value) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%-18s", label.c_str());
        os << buf << value << "\n";
    };
    auto vec = [](std::span<const double> v) {
        std::string s;
        for (std::size_t i = 0; i < v.size(); ++i) {
            char buf[32];
            std::snprintf(buf, sizeof buf, "%12s", report::fmt6(v[i]).c_str());
            s += buf;
        }
        return s;
    };
    auto opt = [](const std::optional<double>& v) { return v ? report::fmt6(*v) : std::string("-"); };

    if (!sc.name.empty()) line("scene", sc.name);
    line("frenet_status", f.status());
    line("point", vec(a.point.x.v));
    line("agreement", report::fmt6(a.point.agreement));
    if (a.check.transversality) line("transversality", report::fmt6(*a.check.transversality));
    line("t", vec(f.t.v));
    if (f.n) line("n", vec(f.n->v));
    if (f.b1) line("b1", vec(f.b1->v));
    if (f.b2) line("b2", vec(f.b2->v));
    if (f.b3) line("b3", vec(f.b3->v));
    line("kappa1", report::fmt6(f.k1));
    line("kappa2", opt(f.k2));
    line("kappa3", opt(f.k3));
    line("kappa4", opt(f.k4));
    line("kappa1'", opt(f.k1_prime));
    line("kappa1''", opt(f.k1_second));
    const int done = dd.orders_done;
    line("kn", vec(dd.kn));
    line("a", vec(dd.a));
    if (done >= 3) line("c", vec(dd.c));
    if (done >= 4) line("d", vec(dd.d));
    if (done >= 5) line("m", vec(dd.m));
    for (int i = 0; i < 4; ++i) {
        const SurfaceTerms& st = dd.surfaces[i];
        const GeodesicData& g = a.geodesic[i];
        os << "\nsurface " << sc.surfaces[i].name() << "\n";
        line("  normal", vec(st.normal.v));
        const char* names[4] = {"  u'", "  u''", "  u'''", "  u''''"};
        for (int k = 0; k < std::min(done, 4); ++k) line(names[k], vec(st.u[k]));
        line("  kn", report::fmt6(st.kn));
        line("  kappa1g", report::fmt6(g.k1g));
        line("  tau1g", report::fmt6(g.tau[0]));
        line("  tau2g", report::fmt6(g.tau[1]));
        line("  tau3g", report::fmt6(g.tau[2]));
    }
    if (!sc.reference.empty()) {
        os << "\nreference values\n";
        const std::array<std::optional<double>, 4> computed{f.k1, f.k2, f.k3, f.k4};
        for (int k = 0; k < 4; ++k) {
            const std::string key = "kappa" + std::to_string(k + 1);
            const auto it = sc.reference.find(key);
            if (it == sc.reference.end()) continue;
            std::string v = "reference " + report::fmt6(it->second) + "  computed " + opt(computed[k]);
            if (computed[k]) v += "  delta " + report::fmt6(*computed[k] - it->second);
            line("  " + key, v);
        }
    }
    return os.str();
}

inline CommandResult cmd_analyze(const Scene& sc, std::string_view format = "text") {
    CommandResult res;
    if (format != "text" && format != "json") {
        res.exit_code = kInput;
        res.err = "unknown format '" + std::string(format) + "' (expected json or text)\n";
        return res;
    }
    try {
        const Analysis a = run_analysis(sc);
        res.out = format == "json" ? analysis_json(sc, a) : analysis_text(sc, a);
        if (!a.frenet.complete()) {
            res.exit_code = kDegenerate;
            res.err = "Frenet frame " + a.frenet.status() + "\n";
        }
    } catch (const Error& e) {
        res.err = describe(e) + "\n";
        res.exit_code = exit_code_for(e);
    }
    return res;
}

// ---------------------------------------------------------------------------
// trace

struct TraceOptions {
    int steps = 100;
    double step = 1e-3;
    bool profile = false;
    bool reverse = false;
    bool equal_chords = true;
    std::string out_path; // empty: CSV goes to CommandResult::out
};

inline TraceConfig trace_config(const Scene& sc, const TraceOptions& o) {
    TraceConfig c;
    c.step = o.step;
    c.steps = o.steps;
    c.tolerance = sc.tolerances.corrector;
    c.max_iterations = sc.tolerances.max_newton_iterations;
    c.min_step = sc.tolerances.min_step;
    c.reverse = o.reverse;
    c.equal_chords = o.equal_chords;
    return c;
}

/// Per-point profile cells; empty strings mark unavailable (degenerate) values.
inline std::array<std::string, 12> profile_cells(const Scene& sc, const IntersectionPoint& p) {
    std::array<std::string, 12> cells{};
    FrenetApparatus f;
    try {
        f = analyze(sc.surfaces, p.params, sc.tolerances.analysis());
    } catch (const Error&) {
        return cells;
    }
    cells[0] = report::fmt17(f.k1);
    if (f.k2) cells[1] = report::fmt17(*f.k2);
    if (f.k3) cells[2] = report::fmt17(*f.k3);
    if (f.k4) cells[3] = report::fmt17(*f.k4);
    for (int i = 0; i < 4; ++i) cells[4 + i] = report::fmt17(f.data.kn[i]);
    try {
        const auto g = geodesic_data(f, sc.tolerances.degeneracy);
        for (int i = 0; i < 4; ++i) cells[8 + i] = report::fmt17(g[i].k1g);
    } catch (const Error&) {
    }
    return cells;
}

inline std::string trace_csv(const Scene& sc, const Trace& tr, bool profile) {
    std::string out = "s,x1,x2,x3,x4,x5";
    if (profile) out += ",k1,k2,k3,k4,kn1,kn2,kn3,kn4,k1g1,k1g2,k1g3,k1g4";
    out += '\n';
    for (const TracePoint& p : tr.points) {
        out += report::fmt17(p.s);
        for (double x : p.point.x.v) out += ',' + report::fmt17(x);
        if (profile)
            for (const std::string& c : profile_cells(sc, p.point)) out += ',' + c;
        out += '\n';
    }
    return out;
}

inline CommandResult cmd_trace(const Scene& sc, const TraceOptions& o) {
    CommandResult res;
    try {
        if (!(o.step > 0.0)) throw InputError("--step must be positive");
        if (o.steps < 0) throw InputError("--steps must be nonnegative");
        const CheckReport r = run_checks(sc);
        if (!r.passed()) {
            res.exit_code = kDegenerate;
            res.err = r.failure + ": " + r.failure_detail + "\n";
            return res;
        }
        CorrectorOptions copt;
        copt.tolerance = sc.tolerances.corrector;
        copt.max_iterations = sc.tolerances.max_newton_iterations;
        copt.regularity = sc.tolerances.regularity;
        const IntersectionPoint start = newton_correct(sc.surfaces, sc.start, copt).point;
        const Trace tr = trace(sc.surfaces, start, trace_config(sc, o), sc.domains);
        const std::string csv = trace_csv(sc, tr, o.profile);
        if (o.out_path.empty()) {
            res.out = csv;
        } else {
            std::ofstream f(o.out_path, std::ios::binary);
            if (!f) throw InputError("cannot write '" + o.out_path + "'");
            f << csv;
            if (!f) throw InputError("failed writing '" + o.out_path + "'");
            res.out = "wrote " + std::to_string(tr.points.size()) + " points to " + o.out_path + "\n";
        }
    } catch (const NewtonDivergence& e) {
        res.exit_code = kNumerical;
        res.err = describe(e) + (e.step() >= 0 ? " [step " + std::to_string(e.step()) + "]" : std::string()) + "\n";
    } catch (const Error& e) {
        res.err = describe(e) + "\n";
        res.exit_code = exit_code_for(e);
    }
    return res;
}

} // namespace isect5::cli
