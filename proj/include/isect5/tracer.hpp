#pragma once

// Predictor-corrector marching along the intersection curve, plus a finite-difference
// curvature oracle over the resulting point sequence.

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "isect5/curve.hpp"
#include "isect5/errors.hpp"
#include "isect5/linalg.hpp"
#include "isect5/surface.hpp"

namespace isect5 {

struct TraceConfig {
    double step = 1e-3;           // arc length per step
    int steps = 0;
    double tolerance = 1e-12;     // residual inf-norm
    int max_iterations = 25;
    double min_step = 1e-8;
    bool reverse = false;         // march along -t of the start point
    bool equal_chords = true;     // constrain every accepted chord to the current step size
};

/// Optional [lo, hi] box per parameter of each surface.
using ParamBox = std::array<std::array<double, 2>, 4>;
using DomainBoxes = std::array<std::optional<ParamBox>, 4>;

inline bool inside(const DomainBoxes& boxes, const ParamSet& params) {
    for (int i = 0; i < 4; ++i) {
        if (!boxes[i]) continue;
        for (int k = 0; k < 4; ++k) {
            const auto& b = (*boxes[i])[k];
            if (params[i][k] < b[0] || params[i][k] > b[1]) return false;
        }
    }
    return true;
}

struct TracePoint {
    double s = 0.0;
    IntersectionPoint point;
    Vec5 tangent; // oriented along the direction of travel
};

struct Trace {
    std::vector<TracePoint> points;
};

struct CorrectorOptions {
    double tolerance = 1e-12;
    int max_iterations = 25;
    double regularity = kRegularityTolerance;
    /// When set, adds ||x - anchor|| = chord as a 16th equation.
    std::optional<Vec5> anchor;
    double chord = 0.0;
};

struct CorrectorResult {
    IntersectionPoint point;
    int iterations = 0;
};

namespace detail {
struct Residual {
    Eigen::VectorXd f;
    Eigen::MatrixXd jac;
    std::array<Vec5, 4> x;
};

inline Residual corrector_system(const SurfaceQuad& s, const ParamSet& params, const CorrectorOptions& opt) {
    const bool chord = opt.anchor.has_value();
    Residual r;
    r.f = Eigen::VectorXd::Zero(chord ? 16 : 15);
    r.jac = Eigen::MatrixXd::Zero(chord ? 16 : 15, 16);
    std::array<std::array<Vec5, 4>, 4> tang;
    for (int i = 0; i < 4; ++i) {
        const SurfaceJet j = s[i].jet(params[i], 1, opt.regularity);
        r.x[i] = j.point();
        tang[i] = j.tangents();
    }
    for (int b = 0; b < 3; ++b) {
        for (int c = 0; c < 5; ++c) {
            const int row = 5 * b + c;
            r.f[row] = r.x[0][c] - r.x[b + 1][c];
            for (int l = 0; l < 4; ++l) {
                r.jac(row, l) = tang[0][l][c];
                r.jac(row, 4 * (b + 1) + l) = -tang[b + 1][l][c];
            }
        }
    }
    if (chord) {
        const Vec5 d = r.x[0] - *opt.anchor;
        const double len = norm(d);
        r.f[15] = len - opt.chord;
        if (len > 0.0)
            for (int l = 0; l < 4; ++l) r.jac(15, l) = dot(d, tang[0][l]) / len;
    }
    return r;
}

inline double residual_norm(const Eigen::VectorXd& f) { return f.size() ? f.cwiseAbs().maxCoeff() : 0.0; }
} // namespace detail

/// Gauss-Newton with minimum-norm steps on F(U) = (Phi1-Phi2, Phi1-Phi3, Phi1-Phi4).
/// After the tolerance is met one more step is taken to push the residual to roundoff.
inline CorrectorResult newton_correct(const SurfaceQuad& s, const ParamSet& guess, const CorrectorOptions& opt = {}) {
    ParamSet params = guess;
    detail::Residual r = detail::corrector_system(s, params, opt);
    double res = detail::residual_norm(r.f);
    int it = 0;
    auto apply = [&](const Eigen::VectorXd& du) {
        for (int i = 0; i < 4; ++i)
            for (int k = 0; k < 4; ++k) params[i][k] += du[4 * i + k];
    };
    while (!(res <= opt.tolerance)) {
        if (it >= opt.max_iterations || !std::isfinite(res))
            throw NewtonDivergence("corrector did not converge in " + std::to_string(it) +
                                   " iterations (residual " + std::to_string(res) + ")");
        const Eigen::VectorXd du = r.jac.completeOrthogonalDecomposition().solve(-r.f);
        apply(du);
        ++it;
        r = detail::corrector_system(s, params, opt);
        res = detail::residual_norm(r.f);
    }
    if (it > 0) {
        const ParamSet before = params;
        apply(r.jac.completeOrthogonalDecomposition().solve(-r.f));
        const detail::Residual polished = detail::corrector_system(s, params, opt);
        if (detail::residual_norm(polished.f) <= res) r = polished;
        else params = before;
    }
    return {make_intersection_point(s, params), it};
}

/// Unit tangent at an intersection point together with each surface's u' along it.
struct TangentData {
    Vec5 t;
    ParamSet uprime{};
};

inline TangentData tangent_data(const SurfaceQuad& s, const ParamSet& params, const Vec5* orient = nullptr,
                                double regularity = kRegularityTolerance,
                                double transversality = kTransversalityTolerance) {
    std::array<SurfaceJet, 4> jets{s[0].jet(params[0], 1, regularity), s[1].jet(params[1], 1, regularity),
                                   s[2].jet(params[2], 1, regularity), s[3].jet(params[3], 1, regularity)};
    std::array<Vec5, 4> normals;
    for (int i = 0; i < 4; ++i) normals[i] = unit_normal(jets[i], regularity);
    TangentData td;
    td.t = transversal_tangent(normals, transversality);
    if (orient && dot(td.t, *orient) < 0.0) td.t = -td.t;
    for (int i = 0; i < 4; ++i) td.uprime[i] = param_derivs(jets[i], 1, {}, td.t);
    return td;
}

/// Marches `config.steps` steps from `start`. Failed corrections halve the step down to
/// min_step, after which NewtonDivergence reports the step index.
inline Trace trace(const SurfaceQuad& s, const IntersectionPoint& start, const TraceConfig& config,
                   const DomainBoxes& boxes = {}) {
    if (!(config.step > 0.0)) throw InputError("trace step must be positive");
    if (config.steps < 0) throw InputError("trace step count must be nonnegative");
    Trace out;
    TangentData td = tangent_data(s, start.params);
    if (config.reverse) td.t = -td.t;
    if (config.reverse)
        for (auto& u : td.uprime)
            for (double& x : u) x = -x;
    out.points.push_back({0.0, start, td.t});
    out.points.reserve(static_cast<std::size_t>(config.steps) + 1);

    CorrectorOptions copt;
    copt.tolerance = config.tolerance;
    copt.max_iterations = config.max_iterations;

    for (int step = 1; step <= config.steps; ++step) {
        const TracePoint& prev = out.points.back();
        double h = config.step;
        std::optional<IntersectionPoint> next;
        while (!next) {
            ParamSet guess = prev.point.params;
            for (int i = 0; i < 4; ++i)
                for (int k = 0; k < 4; ++k) guess[i][k] += h * td.uprime[i][k];
            if (config.equal_chords) {
                copt.anchor = prev.point.x;
                copt.chord = h;
            }
            try {
                IntersectionPoint p = newton_correct(s, guess, copt).point;
                const Vec5 chord = p.x - prev.point.x;
                // Reject corrections that jumped backwards or far off the predicted chord.
                if (inside(boxes, p.params) && dot(chord, prev.tangent) > 0.0 && norm(chord) < 2.0 * h)
                    next = p;
            } catch (const NewtonDivergence&) {
            } catch (const NotRegular&) {
            } catch (const DomainError&) {
            }
            if (!next) {
                h *= 0.5;
                if (h < config.min_step)
                    throw NewtonDivergence("trace failed at step " + std::to_string(step) +
                                               " after halving below the minimum step",
                                           step);
            }
        }
        try {
            td = tangent_data(s, next->params, &prev.tangent);
        } catch (Error& e) {
            e.set_stage("trace step " + std::to_string(step));
            throw;
        }
        out.points.push_back({prev.s + norm(next->x - prev.point.x), *next, td.t});
    }
    return out;
}

/// 2n+1 points centred on `start`: n steps along -t, then n along +t. s is 0 at the start.
inline Trace trace_centered(const SurfaceQuad& s, const IntersectionPoint& start, TraceConfig config, int n,
                            const DomainBoxes& boxes = {}) {
    config.steps = n;
    config.reverse = true;
    Trace back = trace(s, start, config, boxes);
    config.reverse = false;
    Trace fwd = trace(s, start, config, boxes);
    Trace out;
    out.points.reserve(back.points.size() + fwd.points.size() - 1);
    for (auto it = back.points.rbegin(); it != back.points.rend(); ++it) {
        TracePoint p = *it;
        p.s = -p.s;
        p.tangent = -p.tangent;
        out.points.push_back(p);
    }
    out.points.insert(out.points.end(), fwd.points.begin() + 1, fwd.points.end());
    return out;
}

/// Largest 15-equation residual over the trace.
inline double max_residual(const Trace& t) {
    double m = 0.0;
    for (const auto& p : t.points) m = std::max(m, p.point.residual_inf);
    return m;
}

struct FdCurvature {
    std::size_t index = 0;
    double s = 0.0;
    double k1 = 0.0;
    double k2 = 0.0;
};

/// Five-point central differences on the ambient points (uniform spacing = mean chord).
inline std::vector<FdCurvature> fd_curvature_oracle(const Trace& tr) {
    const auto& p = tr.points;
    if (p.size() < 5) throw InsufficientTrace("curvature oracle needs at least 5 points");
    const double h = (p.back().s - p.front().s) / static_cast<double>(p.size() - 1);
    std::vector<FdCurvature> out;
    for (std::size_t i = 2; i + 2 < p.size(); ++i) {
        const Vec5& xm2 = p[i - 2].point.x;
        const Vec5& xm1 = p[i - 1].point.x;
        const Vec5& x0 = p[i].point.x;
        const Vec5& xp1 = p[i + 1].point.x;
        const Vec5& xp2 = p[i + 2].point.x;
        const Vec5 d1 = (xm2 - 8.0 * xm1 + 8.0 * xp1 - xp2) / (12.0 * h);
        const Vec5 d2 = (-1.0 * xm2 + 16.0 * xm1 - 30.0 * x0 + 16.0 * xp1 - xp2) / (12.0 * h * h);
        const Vec5 d3 = (-1.0 * xm2 + 2.0 * xm1 - 2.0 * xp1 + xp2) / (2.0 * h * h * h);
        FdCurvature c;
        c.index = i;
        c.s = p[i].s;
        c.k1 = norm(d2);
        if (c.k1 > 0.0) {
            const std::array<Vec5, 2> tn{normalized(d1), d2 / c.k1};
            c.k2 = norm(reject(d3, tn)) / c.k1;
        }
        out.push_back(c);
    }
    return out;
}

} // namespace isect5
