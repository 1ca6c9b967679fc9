#pragma once

// Explicit time integration of u_t = sum arctan(lambda_i(D^2u)) - theta0 and
// a damped Newton solver for its stationary (special Lagrangian) solutions.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include "lmcf/errors.hpp"
#include "lmcf/geometry.hpp"
#include "lmcf/grid.hpp"
#include "lmcf/trajectory.hpp"

namespace lmcf {

enum class Scheme { rk2, rk4 };
enum class BoundaryMode { free, dirichlet_function };

/// Boundary values as a function of (x, t).
using BoundaryFunction = std::function<double(const Point&, double)>;

struct FlowState {
    ScalarField u;
    double t = 0.0;
    double theta0 = 0.0;
};

struct SolverConfig {
    double dt_safety = 0.4;
    Scheme scheme = Scheme::rk2;
    double t_end = 0.0;
    int snapshot_stride = 1;
    BoundaryMode boundary_mode = BoundaryMode::free;
    BoundaryFunction boundary;  // required for dirichlet_function

    void validate() const {
        if (!(dt_safety > 0.0 && dt_safety <= 0.5)) throw ConfigError("dt_safety must lie in (0, 0.5]");
        if (snapshot_stride < 1) throw ConfigError("snapshot_stride must be >= 1");
        if (boundary_mode == BoundaryMode::dirichlet_function && !boundary)
            throw ConfigError("dirichlet_function boundary mode needs a boundary function");
    }
};

/// Largest admissible step: dt_safety * h^2 / dim. The coefficients of the
/// linearisation are eigenvalues of g^{-1}, all in (0, 1], so the discrete
/// operator is bounded by the dim-dimensional Laplacian, whose spectral
/// radius is 4 dim / h^2.
inline double max_stable_dt(const GridSpec& g, double dt_safety) {
    return dt_safety * g.spacing() * g.spacing() / g.dim();
}

/// F(D^2u) - theta0 at every node.
inline ScalarField rhs(const FlowState& s) {
    const auto& g = s.u.grid;
    detail::require_stencil_size(g);
    ScalarField out(g);
    for (std::size_t p = 0; p < g.node_count(); ++p)
        out.values[p] = angle_of(detail::hessian_at(g, s.u.values, p)) - s.theta0;
    return out;
}

namespace detail {

inline void apply_dirichlet(ScalarField& u, const BoundaryFunction& f, double t) {
    for (std::size_t p = 0; p < u.size(); ++p)
        if (u.grid.is_boundary(p)) u.values[p] = f(u.grid.position(p), t);
}

inline ScalarField axpy(const ScalarField& x, double a, const ScalarField& y) {
    ScalarField out(x.grid);
    for (std::size_t p = 0; p < x.size(); ++p) out.values[p] = x.values[p] + a * y.values[p];
    return out;
}

}  // namespace detail

inline FlowState step(const FlowState& s, double dt, const SolverConfig& cfg) {
    if (dt < 0.0) throw ConfigError("negative time step");
    const double limit = max_stable_dt(s.u.grid, cfg.dt_safety);
    if (dt > limit * (1.0 + 1e-12))
        throw ConfigError("time step " + std::to_string(dt) + " exceeds stability bound " + std::to_string(limit));
    if (dt == 0.0) return s;

    const bool pinned = cfg.boundary_mode == BoundaryMode::dirichlet_function;
    auto stage = [&](const ScalarField& u, double t) {
        FlowState st{u, t, s.theta0};
        if (pinned) detail::apply_dirichlet(st.u, cfg.boundary, t);
        return st;
    };

    FlowState next{ScalarField(s.u.grid), s.t + dt, s.theta0};
    if (cfg.scheme == Scheme::rk2) {
        // Heun
        const auto k1 = rhs(s);
        const auto k2 = rhs(stage(detail::axpy(s.u, dt, k1), s.t + dt));
        for (std::size_t p = 0; p < s.u.size(); ++p)
            next.u.values[p] = s.u.values[p] + 0.5 * dt * (k1.values[p] + k2.values[p]);
    } else {
        const auto k1 = rhs(s);
        const auto k2 = rhs(stage(detail::axpy(s.u, 0.5 * dt, k1), s.t + 0.5 * dt));
        const auto k3 = rhs(stage(detail::axpy(s.u, 0.5 * dt, k2), s.t + 0.5 * dt));
        const auto k4 = rhs(stage(detail::axpy(s.u, dt, k3), s.t + dt));
        for (std::size_t p = 0; p < s.u.size(); ++p)
            next.u.values[p] = s.u.values[p] + dt / 6.0 *
                               (k1.values[p] + 2.0 * k2.values[p] + 2.0 * k3.values[p] + k4.values[p]);
    }
    if (pinned) detail::apply_dirichlet(next.u, cfg.boundary, next.t);

    for (std::size_t p = 0; p < next.u.size(); ++p)
        if (!std::isfinite(next.u.values[p]))
            throw DivergenceError("non-finite value at node " + std::to_string(p) + ", t = " + std::to_string(next.t),
                                  p, next.t);
    return next;
}

/// Uniform-dt march to cfg.t_end. The step count is rounded up to a
/// multiple of snapshot_stride so snapshots are equally spaced and the last
/// one sits exactly at t_end.
inline Trajectory evolve(const FlowState& initial, const SolverConfig& cfg) {
    cfg.validate();
    if (cfg.t_end < initial.t) throw ConfigError("t_end precedes the initial time");

    Trajectory traj;
    traj.grid = initial.u.grid;
    traj.theta0 = initial.theta0;
    traj.times.push_back(initial.t);
    traj.snapshots.push_back(initial.u);
    traj.provenance = {{"dt_safety", cfg.dt_safety},
                       {"scheme", cfg.scheme == Scheme::rk2 ? "rk2" : "rk4"},
                       {"t_end", cfg.t_end},
                       {"snapshot_stride", cfg.snapshot_stride},
                       {"boundary_mode", cfg.boundary_mode == BoundaryMode::free ? "free" : "dirichlet_function"}};
    if (cfg.t_end == initial.t) return traj;

    const double span = cfg.t_end - initial.t;
    const double dt_max = max_stable_dt(initial.u.grid, cfg.dt_safety);
    const auto stride = static_cast<long>(cfg.snapshot_stride);
    long chunks = static_cast<long>(std::ceil(span / (dt_max * static_cast<double>(stride)) - 1e-12));
    chunks = std::max(chunks, 1L);
    const long steps = chunks * stride;
    const double dt = span / static_cast<double>(steps);
    traj.dt = dt;

    FlowState s = initial;
    if (cfg.boundary_mode == BoundaryMode::dirichlet_function) detail::apply_dirichlet(s.u, cfg.boundary, s.t);
    for (long k = 1; k <= steps; ++k) {
        try {
            s = step(s, dt, cfg);
        } catch (DivergenceError& e) {
            e.set_partial(std::make_shared<const Trajectory>(traj));
            throw;
        }
        s.t = initial.t + static_cast<double>(k) * dt;
        if (k % stride == 0) {
            if (k == steps) s.t = cfg.t_end;
            traj.times.push_back(s.t);
            traj.snapshots.push_back(s.u);
        }
    }
    return traj;
}

/// min over interior nodes of lambda_min(D^2u).
inline double convexity_monitor(const ScalarField& u) {
    double lo = std::numeric_limits<double>::infinity();
    for (std::size_t p = 0; p < u.size(); ++p) {
        if (u.grid.is_boundary(p)) continue;
        lo = std::min(lo, min_eigenvalue(detail::hessian_at(u.grid, u.values, p)));
    }
    return lo;
}

inline double convexity_monitor(const FlowState& s) { return convexity_monitor(s.u); }

/// Same scan restricted to a node set.
inline double convexity_monitor(const ScalarField& u, std::span<const std::size_t> nodes) {
    double lo = std::numeric_limits<double>::infinity();
    for (auto p : nodes) lo = std::min(lo, min_eigenvalue(detail::hessian_at(u.grid, u.values, p)));
    return lo;
}

inline constexpr double kConvexityTolerance = 1e-8;

// ---------------------------------------------------------------------------
// Stationary solutions

using BoundaryData = std::function<double(const Point&)>;

struct StationaryOptions {
    int max_iters = 50;
    double tolerance = 1e-10;
};

struct StationaryResult {
    ScalarField u;
    std::vector<double> residual_history;
    int iterations = 0;
};

namespace detail {

inline double interior_residual(const ScalarField& u, double theta0, std::vector<double>* out) {
    const auto& g = u.grid;
    double worst = 0.0;
    std::size_t row = 0;
    for (std::size_t p = 0; p < g.node_count(); ++p) {
        if (g.is_boundary(p)) continue;
        const double r = angle_of(hessian_at(g, u.values, p)) - theta0;
        if (out) (*out)[row] = r;
        ++row;
        worst = std::max(worst, std::abs(r));
    }
    return worst;
}

}  // namespace detail

/// Damped Newton for sum arctan(lambda_i(D^2u)) = theta0 with Dirichlet data
/// on the cube faces. The Jacobian of the discrete residual is g^{ij} d_ij
/// with g from the current iterate; each step is halved until the residual
/// max-norm decreases.
inline StationaryResult solve_stationary_detailed(double theta0, const BoundaryData& boundary_data,
                                                  const GridSpec& grid, const StationaryOptions& opts = {}) {
    const int n = grid.dim();
    if (!(std::abs(theta0) < n * M_PI / 2.0)) throw ConfigError("|theta0| must be below n*pi/2");
    detail::require_stencil_size(grid);

    std::vector<std::size_t> unknown_of(grid.node_count(), static_cast<std::size_t>(-1));
    std::vector<std::size_t> interior;
    std::vector<std::size_t> faces;
    for (std::size_t p = 0; p < grid.node_count(); ++p) {
        if (grid.is_boundary(p)) {
            faces.push_back(p);
        } else {
            unknown_of[p] = interior.size();
            interior.push_back(p);
        }
    }

    // Initial guess: 0.5 tan(theta0/n)|x|^2 plus the affine part that best
    // matches the boundary data in least squares.
    const double k = std::tan(theta0 / n);
    Eigen::MatrixXd design(static_cast<Eigen::Index>(faces.size()), n + 1);
    Eigen::VectorXd rhs_vec(static_cast<Eigen::Index>(faces.size()));
    ScalarField u(grid);
    for (std::size_t r = 0; r < faces.size(); ++r) {
        const Point x = grid.position(faces[r]);
        const double data = boundary_data(x);
        if (!std::isfinite(data)) throw ConfigError("boundary data is not finite");
        u.values[faces[r]] = data;
        for (int c = 0; c < n; ++c) design(static_cast<Eigen::Index>(r), c) = x[static_cast<std::size_t>(c)];
        design(static_cast<Eigen::Index>(r), n) = 1.0;
        rhs_vec(static_cast<Eigen::Index>(r)) = data - 0.5 * k * norm_sq(x, n);
    }
    const Eigen::VectorXd affine = design.colPivHouseholderQr().solve(rhs_vec);
    for (auto p : interior) {
        const Point x = grid.position(p);
        double v = 0.5 * k * norm_sq(x, n) + affine(n);
        for (int c = 0; c < n; ++c) v += affine(c) * x[static_cast<std::size_t>(c)];
        u.values[p] = v;
    }

    const auto m = static_cast<Eigen::Index>(interior.size());
    std::vector<double> res(interior.size());
    StationaryResult out;
    double norm = detail::interior_residual(u, theta0, &res);
    out.residual_history.push_back(norm);

    const double h = grid.spacing();
    const double inv_h2 = 1.0 / (h * h);
    const double inv_4h2 = 0.25 * inv_h2;
    for (int it = 0; it < opts.max_iters; ++it) {
        if (norm < opts.tolerance) {
            out.u = std::move(u);
            out.iterations = it;
            return out;
        }
        std::vector<Eigen::Triplet<double>> trip;
        trip.reserve(interior.size() * static_cast<std::size_t>(1 + 2 * n + 2 * n * (n - 1)));
        auto add = [&](std::size_t row, std::size_t node, double w) {
            const std::size_t col = unknown_of[node];
            if (col != static_cast<std::size_t>(-1))
                trip.emplace_back(static_cast<int>(row), static_cast<int>(col), w);
        };
        for (std::size_t row = 0; row < interior.size(); ++row) {
            const std::size_t p = interior[row];
            const auto md = induced_metric(eigen_sym(detail::hessian_at(grid, u.values, p)));
            for (int a = 0; a < n; ++a) {
                const std::size_t sa = grid.stride(a);
                const double w = md.g_inv(a, a) * inv_h2;
                add(row, p - sa, w);
                add(row, p, -2.0 * w);
                add(row, p + sa, w);
                for (int b = a + 1; b < n; ++b) {
                    const std::size_t sb = grid.stride(b);
                    const double c = 2.0 * md.g_inv(a, b) * inv_4h2;
                    add(row, p + sa + sb, c);
                    add(row, p + sa - sb, -c);
                    add(row, p - sa + sb, -c);
                    add(row, p - sa - sb, c);
                }
            }
        }
        Eigen::SparseMatrix<double> J(m, m);
        J.setFromTriplets(trip.begin(), trip.end());
        J.makeCompressed();
        Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
        lu.compute(J);
        if (lu.info() != Eigen::Success)
            throw SolverError("linearised stationary system is singular", out.residual_history);
        Eigen::VectorXd r = Eigen::Map<const Eigen::VectorXd>(res.data(), m);
        const Eigen::VectorXd delta = lu.solve(-r);
        if (lu.info() != Eigen::Success || !delta.allFinite())
            throw SolverError("linear solve failed in Newton step", out.residual_history);

        double scale = 1.0;
        ScalarField trial(grid);
        double trial_norm = norm;
        for (int halvings = 0; halvings < 40; ++halvings, scale *= 0.5) {
            trial = u;
            for (std::size_t row = 0; row < interior.size(); ++row)
                trial.values[interior[row]] += scale * delta(static_cast<Eigen::Index>(row));
            trial_norm = detail::interior_residual(trial, theta0, nullptr);
            if (trial_norm < norm) break;
        }
        if (!(trial_norm < norm)) {
            // round-off floor: accept if already at the tolerance level
            if (norm < opts.tolerance) break;
            throw SolverError("Newton line search failed to reduce the residual", out.residual_history);
        }
        u = std::move(trial);
        norm = detail::interior_residual(u, theta0, &res);
        out.residual_history.push_back(norm);
    }
    if (norm < opts.tolerance) {
        out.u = std::move(u);
        out.iterations = opts.max_iters;
        return out;
    }
    throw SolverError("Newton did not converge in " + std::to_string(opts.max_iters) + " iterations",
                      out.residual_history);
}

inline ScalarField solve_stationary(double theta0, const BoundaryData& boundary_data, const GridSpec& grid,
                                    const StationaryOptions& opts = {}) {
    return solve_stationary_detailed(theta0, boundary_data, grid, opts).u;
}

}  // namespace lmcf
