#pragma once

// Numerical checks of the a priori estimates for convex solutions of the
// flow: the Jacobi inequality for b, the interior height bound and its
// barrier, the oscillation-to-gradient bound, and the Korevaar-type Hessian
// bound with its explicit constants.
//
// Every check returns an EstimateReport whose margin is positive when the
// inequality holds. Discretisation noise is budgeted by a ToleranceSchedule.

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <string>
#include <vector>

#include "lmcf/errors.hpp"
#include "lmcf/flow.hpp"
#include "lmcf/geometry.hpp"
#include "lmcf/grid.hpp"
#include "lmcf/trajectory.hpp"

namespace lmcf {

enum class Status { pass, fail, not_applicable };

inline const char* to_string(Status s) {
    switch (s) {
        case Status::pass: return "pass";
        case Status::fail: return "fail";
        case Status::not_applicable: return "not_applicable";
    }
    return "?";
}

struct HypothesisEntry {
    std::string description;
    bool satisfied = true;
};

struct Location {
    std::size_t node = 0;
    Point x{};
    double t = 0.0;
};

struct EstimateReport {
    std::string check_name;
    Status status = Status::pass;
    double worst_margin = 0.0;
    Location worst_location;
    double tolerance_used = 0.0;
    std::vector<HypothesisEntry> hypothesis_log;
    std::map<std::string, double> details;  // check-specific numbers (bounds, constants)

    bool hypotheses_hold() const {
        return std::all_of(hypothesis_log.begin(), hypothesis_log.end(),
                           [](const HypothesisEntry& e) { return e.satisfied; });
    }

    /// Sets status from the hypotheses and the margin.
    void finalize() {
        if (!hypotheses_hold())
            status = Status::not_applicable;
        else
            status = worst_margin < -tolerance_used ? Status::fail : Status::pass;
    }
};

/// tol = c1 h^2 + c2 dt_snap.
struct ToleranceSchedule {
    double c1 = 10.0;
    double c2 = 10.0;
    double operator()(double h, double dt_snap) const { return c1 * h * h + c2 * dt_snap; }
};

struct KorevaarParams {
    double alpha = 0.0;
    double gamma = 0.0;
    double K = 1.0;
};

struct BarrierSpec {
    double R = 1.0;
    int n = 1;
};

namespace detail {

inline Location locate(const GridSpec& g, std::size_t node, double t) { return {node, g.position(node), t}; }

inline HypothesisEntry convexity_hypothesis(const Trajectory& traj, std::span<const std::size_t> nodes,
                                            const std::string& where) {
    double lo = std::numeric_limits<double>::infinity();
    for (const auto& s : traj.snapshots)
        lo = std::min(lo, nodes.empty() ? convexity_monitor(s) : convexity_monitor(s, nodes));
    return {"convex on " + where + " for all snapshots (min lambda_min = " + std::to_string(lo) + " >= -" +
                std::to_string(kConvexityTolerance) + ")",
            lo >= -kConvexityTolerance};
}

inline HypothesisEntry convexity_hypothesis(const Trajectory& traj) {
    return convexity_hypothesis(traj, {}, "interior nodes");
}

/// The snapshots in [t0, t0 + 1/n] and the index of the one at t0 + 1/n.
inline std::size_t unit_time_index(const Trajectory& traj) {
    const double target = traj.times.front() + 1.0 / traj.grid.dim();
    const double slack = traj.dt > 0.0 ? traj.dt : 1e-9 * std::max(1.0, target);
    return traj.index_at(target, slack);
}

/// Values of the u_t = Theta solution u + theta0 (t - t0).
inline ScalarField unshifted(const Trajectory& traj, std::size_t k) {
    ScalarField u = traj.snapshots[k];
    const double shift = traj.theta0 * (traj.times[k] - traj.times.front());
    if (shift != 0.0)
        for (auto& v : u.values) v += shift;
    return u;
}

inline void require_fit(const GridSpec& g, double radius, const std::string& what) {
    if (!ball_fits(g, Point{}, radius))
        throw ConfigError(what + ": ball of radius " + std::to_string(radius) + " does not fit the grid (half width " +
                          std::to_string(g.half_width()) + ")");
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Jacobi inequality

/// Worst slack of -(Lb + 2|grad_g b|^2 / b) over the interior mask nodes and
/// interior snapshot times.
inline EstimateReport check_jacobi(const Trajectory& traj, const BallMask& mask, ToleranceSchedule tol = {}) {
    if (traj.size() < 3) throw RangeError("check_jacobi needs at least 3 snapshots");
    EstimateReport rep;
    rep.check_name = "jacobi";
    const double dt_snap = traj.snapshot_spacing();
    rep.tolerance_used = tol(traj.grid.spacing(), dt_snap);
    rep.hypothesis_log.push_back(detail::convexity_hypothesis(traj));
    if (!rep.hypotheses_hold()) {
        rep.finalize();
        return rep;
    }

    std::vector<ScalarField> b;
    b.reserve(traj.size());
    for (const auto& s : traj.snapshots) b.push_back(volume_element_b(s));

    const auto nodes = mask.interior_nodes();
    rep.worst_margin = std::numeric_limits<double>::infinity();
    double worst_residual = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 1; k + 1 < traj.size(); ++k) {
        const auto metric = metric_field(traj.snapshots[k]);
        const auto Lb = apply_L_fields(b[k - 1], b[k], b[k + 1], traj.times[k + 1] - traj.times[k - 1], metric);
        for (auto p : nodes) {
            const Point db = detail::gradient_at(traj.grid, b[k].values, p);
            const double lhs = Lb.values[p] + 2.0 * covariant_grad_sq(metric[p], db) / b[k].values[p];
            worst_residual = std::max(worst_residual, lhs);
            if (-lhs < rep.worst_margin) {
                rep.worst_margin = -lhs;
                rep.worst_location = detail::locate(traj.grid, p, traj.times[k]);
            }
        }
    }
    rep.details["max_Lb_plus_grad_term"] = worst_residual;
    rep.details["mask_radius"] = mask.radius;
    rep.finalize();
    return rep;
}

// ---------------------------------------------------------------------------
// Height bound and barrier

/// arctan(pi / R^2) + max_{B_R, t0} u - u(0, t0 + 1/n) for the u_t = Theta
/// form of the trajectory (u + theta0 (t - t0)).
inline EstimateReport height_bound_check(const Trajectory& traj, double R, ToleranceSchedule tol = {}) {
    if (traj.size() == 0) throw RangeError("empty trajectory");
    detail::require_fit(traj.grid, R, "height_bound_check");
    const std::size_t k_end = detail::unit_time_index(traj);
    const auto mask = make_ball_mask(traj.grid, R);

    EstimateReport rep;
    rep.check_name = "height";
    rep.tolerance_used = tol(traj.grid.spacing(), traj.snapshot_spacing());
    rep.hypothesis_log.push_back({"trajectory spans [t0, t0 + 1/n]", true});
    if (traj.theta0 != 0.0)
        rep.hypothesis_log.push_back({"theta0 != 0: checked on u + theta0 (t - t0), a solution of u_t = Theta", true});

    const auto u0 = detail::unshifted(traj, 0);
    double max0 = -std::numeric_limits<double>::infinity();
    for (auto p : mask.member_nodes) max0 = std::max(max0, u0.values[p]);
    const std::size_t origin = traj.grid.origin_index();
    const double u_end = detail::unshifted(traj, k_end).values[origin];
    const double bound = std::atan(std::numbers::pi / (R * R)) + max0;

    rep.worst_margin = bound - u_end;
    rep.worst_location = detail::locate(traj.grid, origin, traj.times[k_end]);
    rep.details["bound"] = bound;
    rep.details["u_origin_end"] = u_end;
    rep.details["max_initial_on_ball"] = max0;
    rep.details["R"] = R;
    rep.finalize();
    return rep;
}

/// w_t - sum arctan(lambda_i(D^2 w)) for
///   w = (t n pi / 2)(|x| / R)^2 + n t arctan(t n pi / R^2),
/// evaluated in closed form. D^2 w = (t n pi / R^2) I, so the angle term
/// cancels the arctan part of w_t, leaving two nonnegative terms.
inline double barrier_residual(const BarrierSpec& spec, const Point& x, double t) {
    if (t < 0.0) throw ContractError("barrier_residual requires t >= 0");
    const int n = spec.n;
    const double r2 = spec.R * spec.R;
    const double s = t * n * std::numbers::pi / r2;
    return n * std::numbers::pi / 2.0 * norm_sq(x, n) / r2 + n * t * (n * std::numbers::pi / r2) / (1.0 + s * s);
}

inline double barrier_value(const BarrierSpec& spec, const Point& x, double t) {
    const int n = spec.n;
    const double r2 = spec.R * spec.R;
    return t * n * std::numbers::pi / 2.0 * norm_sq(x, n) / r2 + n * t * std::atan(t * n * std::numbers::pi / r2);
}

struct SpaceTimePoint {
    Point x{};
    double t = 0.0;
};

inline std::vector<double> barrier_residual(const BarrierSpec& spec, std::span<const SpaceTimePoint> points) {
    if (!(spec.R > 0.0)) throw ConfigError("barrier radius must be positive");
    std::vector<double> out;
    out.reserve(points.size());
    for (const auto& pt : points) out.push_back(barrier_residual(spec, pt.x, pt.t));
    return out;
}

// ---------------------------------------------------------------------------
// Gradient bound from the oscillation

inline double gradient_bound_value(double R, double M) {
    return (M + std::atan(std::numbers::pi / (R * R))) / R;
}

inline double oscillation(const ScalarField& u, std::span<const std::size_t> nodes) {
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (auto p : nodes) {
        lo = std::min(lo, u.values[p]);
        hi = std::max(hi, u.values[p]);
    }
    return hi - lo;
}

/// (1/R)[M + arctan(pi/R^2)] - max_{B_1 x [t0, t0+1/n]} |Du|.
inline EstimateReport gradient_bound_check(const Trajectory& traj, double R, double M, ToleranceSchedule tol = {}) {
    if (!(R > 0.0)) throw ConfigError("gradient_bound_check: R must be positive");
    detail::require_fit(traj.grid, 2.0 * R + 1.0, "gradient_bound_check");
    const std::size_t k_end = detail::unit_time_index(traj);

    EstimateReport rep;
    rep.check_name = "gradient";
    rep.tolerance_used = tol(traj.grid.spacing(), traj.snapshot_spacing());
    rep.hypothesis_log.push_back(detail::convexity_hypothesis(traj));
    const auto big = make_ball_mask(traj.grid, 2.0 * R + 1.0);
    const double osc = oscillation(traj.snapshots.front(), big.member_nodes);
    rep.hypothesis_log.push_back({"oscillation on B_{2R+1} at t0 is " + std::to_string(osc) + " <= M = " +
                                      std::to_string(M),
                                  osc <= M * (1.0 + 1e-12)});
    rep.details["oscillation_t0"] = osc;
    const double bound = gradient_bound_value(R, M);
    rep.details["bound"] = bound;
    if (!rep.hypotheses_hold()) {
        rep.finalize();
        return rep;
    }

    const auto unit = make_ball_mask(traj.grid, 1.0);
    double worst = 0.0;
    for (std::size_t k = 0; k <= k_end; ++k) {
        const auto& u = traj.snapshots[k];
        for (auto p : unit.member_nodes) {
            const double g = std::sqrt(norm_sq(detail::gradient_at(traj.grid, u.values, p), traj.grid.dim()));
            if (g >= worst) {
                worst = g;
                rep.worst_location = detail::locate(traj.grid, p, traj.times[k]);
            }
        }
    }
    rep.details["max_grad"] = worst;
    rep.worst_margin = bound - worst;
    rep.finalize();
    return rep;
}

// ---------------------------------------------------------------------------
// Korevaar test function and Hessian bounds

inline void validate(const KorevaarParams& p, int n) {
    if (!(p.alpha > 1.5 * n)) throw HypothesisError("alpha must exceed 3n/2");
    if (!(p.gamma > 0.0)) throw HypothesisError("gamma must be positive");
    if (!(p.alpha * p.gamma < 1.0)) throw HypothesisError("alpha * gamma must be below 1");
    if (!(p.K > 0.0)) throw HypothesisError("K must be positive");
}

struct KorevaarFields {
    ScalarField phi;
    ScalarField eta;
    ScalarField h;
    std::size_t argmax = 0;  // over the unit-ball mask
    double max_h = 0.0;
};

/// phi = [alpha |Du|^2 - alpha gamma + n t (1 - |x|^2)]^+, eta = e^{K phi} - 1,
/// h = eta b.
inline KorevaarFields korevaar_fields(const FlowState& state, const KorevaarParams& params, double t) {
    const auto& g = state.u.grid;
    const int n = g.dim();
    const auto du = fd_gradient(state.u);
    const auto b = volume_element_b(state.u);
    KorevaarFields out{ScalarField(g), ScalarField(g), ScalarField(g), 0, 0.0};
    for (std::size_t p = 0; p < g.node_count(); ++p) {
        const Point x = g.position(p);
        const double raw = params.alpha * norm_sq(du.values[p], n) - params.alpha * params.gamma +
                           n * t * (1.0 - norm_sq(x, n));
        const double phi = raw > 0.0 ? raw : 0.0;
        out.phi.values[p] = phi;
        out.eta.values[p] = std::expm1(params.K * phi);
        out.h.values[p] = out.eta.values[p] * b.values[p];
    }
    const double r = std::min(1.0, g.half_width());
    const auto unit = make_ball_mask(g, r);
    out.argmax = unit.member_nodes.front();
    for (auto p : unit.member_nodes)
        if (out.h.values[p] > out.h.values[out.argmax]) out.argmax = p;
    out.max_h = out.h.values[out.argmax];
    return out;
}

/// e^{2nK} (2 alpha / (2 alpha - 3n))^n / (e^{K (1 - alpha gamma)} - 1)^{2n}.
inline double hessian_bound_constant(int n, const KorevaarParams& p) {
    validate(p, n);
    const double log_c = 2.0 * n * p.K + n * std::log(2.0 * p.alpha / (2.0 * p.alpha - 3.0 * n)) -
                         2.0 * n * std::log(std::expm1(p.K * (1.0 - p.alpha * p.gamma)));
    return std::exp(log_c);
}

/// The same bound with the leading e^{2nK} replaced by e^K; for alpha = 1.6n
/// and K = 1 this is e 16^n / (e^{1 - alpha gamma} - 1)^{2n}.
inline double hessian_bound_constant_printed(int n, const KorevaarParams& p) {
    validate(p, n);
    const double log_c = p.K + n * std::log(2.0 * p.alpha / (2.0 * p.alpha - 3.0 * n)) -
                         2.0 * n * std::log(std::expm1(p.K * (1.0 - p.alpha * p.gamma)));
    return std::exp(log_c);
}

struct MainConstants {
    int n = 1;
    double gamma = 0.0;
    double alpha = 0.0;
    double K = 1.0;
    double C_hb = 0.0;
    double C_printed = 0.0;
    bool gamma_below_limit = false;  // gamma < 0.61 / n
};

/// gamma(n) = (2 + arctan(pi / 9n))^2 / 9n with alpha = 1.6n and K = 1.
inline MainConstants main_constant(int n) {
    if (n < 1) throw ConfigError("main_constant: n must be >= 1");
    MainConstants c;
    c.n = n;
    const double nd = n;
    const double s = 2.0 + std::atan(std::numbers::pi / (9.0 * nd));
    c.gamma = s * s / (9.0 * nd);
    c.alpha = 1.6 * nd;
    c.K = 1.0;
    c.gamma_below_limit = c.gamma < 0.61 / nd;
    const KorevaarParams p{c.alpha, c.gamma, c.K};
    c.C_hb = hessian_bound_constant(n, p);
    c.C_printed = std::exp(1.0 + nd * std::log(16.0) - 2.0 * nd * std::log(std::expm1(1.0 - c.alpha * c.gamma)));
    return c;
}

enum class ConstantPolicy { weaker, stricter };

/// bound - lambda_max^2 at (origin, t0 + 1/n). The bound is the larger of
/// the two constant forms unless `policy` asks for the smaller one.
inline EstimateReport hessian_bound_check(const Trajectory& traj, const KorevaarParams& params,
                                          ConstantPolicy policy = ConstantPolicy::weaker) {
    const int n = traj.grid.dim();
    const double c_hb = hessian_bound_constant(n, params);
    const double c_printed = hessian_bound_constant_printed(n, params);
    detail::require_fit(traj.grid, 1.0, "hessian_bound_check");
    const std::size_t k_end = detail::unit_time_index(traj);

    EstimateReport rep;
    rep.check_name = "hessian";
    rep.tolerance_used = 0.0;
    rep.details["C_hb"] = c_hb;
    rep.details["C_printed"] = c_printed;
    const double bound = policy == ConstantPolicy::weaker ? std::max(c_hb, c_printed) : std::min(c_hb, c_printed);
    rep.details["bound"] = bound;

    const auto unit = make_ball_mask(traj.grid, 1.0);
    Trajectory cyl = traj;
    cyl.snapshots.resize(k_end + 1);
    cyl.times.resize(k_end + 1);
    rep.hypothesis_log.push_back(detail::convexity_hypothesis(cyl, unit.member_nodes, "B_1"));
    double max_grad_sq = 0.0;
    for (const auto& u : cyl.snapshots)
        for (auto p : unit.member_nodes)
            max_grad_sq = std::max(max_grad_sq, norm_sq(detail::gradient_at(traj.grid, u.values, p), n));
    rep.details["max_grad_sq"] = max_grad_sq;
    rep.hypothesis_log.push_back({"sup |Du|^2 on B_1 x [t0, t0+1/n] = " + std::to_string(max_grad_sq) +
                                      " < gamma = " + std::to_string(params.gamma),
                                  max_grad_sq < params.gamma});
    if (!rep.hypotheses_hold()) {
        rep.finalize();
        return rep;
    }

    const std::size_t origin = traj.grid.origin_index();
    const double lam_max = eigenvalues_sym(detail::hessian_at(traj.grid, traj.snapshots[k_end].values, origin))
                               [static_cast<std::size_t>(n - 1)];
    rep.details["lambda_max_sq"] = lam_max * lam_max;
    rep.worst_margin = bound - lam_max * lam_max;
    rep.worst_location = detail::locate(traj.grid, origin, traj.times[k_end]);
    rep.finalize();
    return rep;
}

// ---------------------------------------------------------------------------
// Monotonicity along u_t = Theta

/// min over nodes and consecutive snapshots of u(t_{k+1}) - u(t_k), for the
/// u_t = Theta form of the trajectory.
inline EstimateReport theta_monotonicity_check(const Trajectory& traj, double tolerance) {
    EstimateReport rep;
    rep.check_name = "monotone";
    rep.tolerance_used = tolerance;
    rep.hypothesis_log.push_back(detail::convexity_hypothesis(traj));
    if (traj.theta0 != 0.0)
        rep.hypothesis_log.push_back({"theta0 != 0: checked on u + theta0 (t - t0), a solution of u_t = Theta", true});
    if (!rep.hypotheses_hold() || traj.size() < 2) {
        rep.finalize();
        return rep;
    }
    rep.worst_margin = std::numeric_limits<double>::infinity();
    ScalarField prev = detail::unshifted(traj, 0);
    for (std::size_t k = 1; k < traj.size(); ++k) {
        ScalarField cur = detail::unshifted(traj, k);
        for (std::size_t p = 0; p < cur.size(); ++p) {
            const double d = cur.values[p] - prev.values[p];
            if (d < rep.worst_margin) {
                rep.worst_margin = d;
                rep.worst_location = detail::locate(traj.grid, p, traj.times[k]);
            }
        }
        prev = std::move(cur);
    }
    rep.finalize();
    return rep;
}

/// Default monotonicity tolerance: 10 machine epsilons per snapshot.
inline double monotonicity_tolerance(const Trajectory& traj) {
    return 10.0 * std::numeric_limits<double>::epsilon() * static_cast<double>(traj.size());
}

}  // namespace lmcf
