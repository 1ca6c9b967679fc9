#pragma once

// Parabolic rescaling u_lambda(x, t) = u(lambda (x - x0), lambda^2 t) / lambda^2,
// the growth-at-antiquity ratio, and least-squares quadratic fits used to
// measure how close a solution is to a quadratic polynomial.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "lmcf/errors.hpp"
#include "lmcf/geometry.hpp"
#include "lmcf/grid.hpp"
#include "lmcf/trajectory.hpp"

namespace lmcf {

struct RescaleSpec {
    double lambda = 1.0;
    Point x0{};
};

struct QuadraticFit {
    SymMatrix A;
    Point linear{};
    double constant = 0.0;
    double residual_sup = 0.0;

    double operator()(const Point& x) const {
        double v = constant;
        for (int i = 0; i < A.dim; ++i) {
            v += linear[static_cast<std::size_t>(i)] * x[static_cast<std::size_t>(i)];
            for (int j = 0; j < A.dim; ++j)
                v += 0.5 * A(i, j) * x[static_cast<std::size_t>(i)] * x[static_cast<std::size_t>(j)];
        }
        return v;
    }
};

struct GrowthReport {
    double R0 = 1.0;
    double threshold = 0.0;
    std::vector<double> times;
    std::vector<double> ratios;
};

/// 1 / (6 sqrt(n) + 2)^2.
inline double growth_threshold(int n) {
    const double d = 6.0 * std::sqrt(static_cast<double>(n)) + 2.0;
    return 1.0 / (d * d);
}

namespace detail {

// Positions within 1e-9 cells of a node snap to it, so that node-aligned
// rescalings reproduce source values exactly.
inline constexpr double kSnap = 1e-9;

struct AxisWeight {
    int i0 = 0;
    double w = 0.0;  // weight of node i0 + 1
};

inline std::optional<AxisWeight> axis_weight(const GridSpec& g, double y) {
    const int n = g.nodes_per_axis();
    const double s = (y + g.half_width()) / g.spacing();
    if (s < -kSnap || s > (n - 1) + kSnap) return std::nullopt;
    const double r = std::round(s);
    if (std::abs(s - r) <= kSnap) {
        const int i = static_cast<int>(r);
        if (i == n - 1) return AxisWeight{n - 2, 1.0};
        return AxisWeight{i, 0.0};
    }
    const int i0 = std::clamp(static_cast<int>(std::floor(s)), 0, n - 2);
    return AxisWeight{i0, s - i0};
}

/// Multilinear interpolation; nullopt when y is outside the grid.
inline std::optional<double> interpolate(const ScalarField& f, const Point& y) {
    const GridSpec& g = f.grid;
    const int d = g.dim();
    std::array<AxisWeight, kMaxDim> aw{};
    for (int k = 0; k < d; ++k) {
        auto w = axis_weight(g, y[static_cast<std::size_t>(k)]);
        if (!w) return std::nullopt;
        aw[static_cast<std::size_t>(k)] = *w;
    }
    double acc = 0.0;
    for (int corner = 0; corner < (1 << d); ++corner) {
        double weight = 1.0;
        std::array<int, kMaxDim> idx{};
        for (int k = 0; k < d; ++k) {
            const auto& a = aw[static_cast<std::size_t>(k)];
            const bool up = (corner >> k) & 1;
            const double wk = up ? a.w : 1.0 - a.w;
            if (wk == 0.0) {
                weight = 0.0;
                break;
            }
            weight *= wk;
            idx[static_cast<std::size_t>(k)] = a.i0 + (up ? 1 : 0);
        }
        if (weight != 0.0) acc += weight * f.values[g.flat_index(idx)];
    }
    return acc;
}

/// Bracketing snapshot pair and the weight of the later one.
inline std::optional<AxisWeight> time_weight(const std::vector<double>& times, double tau) {
    if (times.empty()) return std::nullopt;
    const double span = std::max(1.0, std::abs(times.back() - times.front()));
    const double slack = kSnap * span;
    for (std::size_t k = 0; k < times.size(); ++k)
        if (std::abs(times[k] - tau) <= slack) return AxisWeight{static_cast<int>(k), 0.0};
    if (tau < times.front() || tau > times.back()) return std::nullopt;
    const auto it = std::upper_bound(times.begin(), times.end(), tau);
    const auto k = static_cast<std::size_t>(it - times.begin()) - 1;
    return AxisWeight{static_cast<int>(k), (tau - times[k]) / (times[k + 1] - times[k])};
}

}  // namespace detail

/// Rescaled trajectory on `target_grid` at `target_times` (default: the
/// source times divided by lambda^2). Throws CoverageError if any target
/// node maps outside the source grid.
inline Trajectory rescale(const Trajectory& traj, const RescaleSpec& spec, const GridSpec& target_grid,
                          std::optional<std::vector<double>> target_times = std::nullopt) {
    if (!(spec.lambda > 0.0)) throw ConfigError("rescale: lambda must be positive");
    if (target_grid.dim() != traj.grid.dim()) throw ConfigError("rescale: dimension mismatch");
    const double lam = spec.lambda;
    const double lam2 = lam * lam;
    const int d = target_grid.dim();

    Trajectory out;
    out.grid = target_grid;
    out.theta0 = traj.theta0;
    out.dt = traj.dt / lam2;
    if (target_times) {
        out.times = *target_times;
    } else {
        for (double t : traj.times) out.times.push_back(t / lam2);
    }
    out.provenance = {{"rescaled_from", traj.provenance}, {"lambda", lam}};

    std::vector<Point> preimage(target_grid.node_count());
    double worst_excess = 0.0;
    std::optional<std::size_t> worst_node;
    for (std::size_t p = 0; p < target_grid.node_count(); ++p) {
        const Point x = target_grid.position(p);
        Point y{};
        double excess = 0.0;
        for (int k = 0; k < d; ++k) {
            y[static_cast<std::size_t>(k)] = lam * (x[static_cast<std::size_t>(k)] - spec.x0[static_cast<std::size_t>(k)]);
            excess = std::max(excess, std::abs(y[static_cast<std::size_t>(k)]) - traj.grid.half_width());
        }
        preimage[p] = y;
        if (excess > detail::kSnap * traj.grid.spacing() && excess > worst_excess) {
            worst_excess = excess;
            worst_node = p;
        }
    }
    if (worst_node)
        throw CoverageError("rescale: preimage of target node " + std::to_string(*worst_node) +
                                " lies outside the source grid by " + std::to_string(worst_excess),
                            *worst_node);

    const double inv_lam2 = 1.0 / lam2;
    for (double tt : out.times) {
        const auto tw = detail::time_weight(traj.times, lam2 * tt);
        if (!tw) throw CoverageError("rescale: time " + std::to_string(tt) + " maps outside the source trajectory", 0);
        ScalarField f(target_grid);
        const auto k = static_cast<std::size_t>(tw->i0);
        for (std::size_t p = 0; p < f.size(); ++p) {
            double v = *detail::interpolate(traj.snapshots[k], preimage[p]);
            if (tw->w != 0.0) v = (1.0 - tw->w) * v + tw->w * *detail::interpolate(traj.snapshots[k + 1], preimage[p]);
            f.values[p] = lam == 1.0 ? v : v * inv_lam2;
        }
        out.snapshots.push_back(std::move(f));
    }
    return out;
}

/// Target grid with the same node count whose nodes map onto source nodes
/// under y = lambda x (x0 = 0).
inline GridSpec aligned_target_grid(const GridSpec& source, double lambda) {
    return GridSpec(source.dim(), source.half_width() / lambda, source.nodes_per_axis());
}

/// max |u_t - (F(D^2u) - theta0)| over interior grid nodes (or `nodes`) and
/// interior snapshot times, u_t by central differences.
inline double equation_residual(const Trajectory& traj, std::span<const std::size_t> nodes = {}) {
    if (traj.size() < 3) throw RangeError("equation_residual needs at least 3 snapshots");
    const auto& g = traj.grid;
    std::vector<std::size_t> all;
    if (nodes.empty()) {
        for (std::size_t p = 0; p < g.node_count(); ++p)
            if (!g.is_boundary(p)) all.push_back(p);
        nodes = all;
    }
    double worst = 0.0;
    for (std::size_t k = 1; k + 1 < traj.size(); ++k) {
        const double two_dt = traj.times[k + 1] - traj.times[k - 1];
        for (auto p : nodes) {
            const double ut = (traj.snapshots[k + 1].values[p] - traj.snapshots[k - 1].values[p]) / two_dt;
            const double f = angle_of(detail::hessian_at(g, traj.snapshots[k].values, p)) - traj.theta0;
            worst = std::max(worst, std::abs(ut - f));
        }
    }
    return worst;
}

/// Per snapshot, sup over mask nodes of |u| / (|x|^2 + R0).
inline GrowthReport growth_ratio(const Trajectory& traj, double R0, const BallMask& mask) {
    if (!(R0 > 0.0)) throw ConfigError("growth_ratio: R0 must be positive");
    GrowthReport rep;
    rep.R0 = R0;
    rep.threshold = growth_threshold(traj.grid.dim());
    rep.times = traj.times;
    for (const auto& u : traj.snapshots) {
        double sup = 0.0;
        for (auto p : mask.member_nodes) {
            const Point x = traj.grid.position(p);
            sup = std::max(sup, std::abs(u.values[p]) / (norm_sq(x, traj.grid.dim()) + R0));
        }
        rep.ratios.push_back(sup);
    }
    return rep;
}

/// Least-squares fit by 0.5 x^T A x + b.x + c over the mask nodes, solved
/// through the normal equations with a Cholesky factorisation.
inline QuadraticFit quadratic_fit(const ScalarField& field, const BallMask& mask) {
    const GridSpec& g = field.grid;
    const int n = g.dim();
    const int n_quad = n * (n + 1) / 2;
    const int n_coef = n_quad + n + 1;
    if (static_cast<int>(mask.member_nodes.size()) < n_coef)
        throw FitError("quadratic_fit: mask has fewer nodes than quadratic coefficients");

    // Coordinates are scaled by the mask radius for conditioning.
    const double scale = mask.radius;
    auto basis = [&](const Point& x, Eigen::Ref<Eigen::VectorXd> row) {
        int c = 0;
        for (int i = 0; i < n; ++i)
            for (int j = i; j < n; ++j) {
                const double xi = x[static_cast<std::size_t>(i)] / scale, xj = x[static_cast<std::size_t>(j)] / scale;
                row(c++) = i == j ? 0.5 * xi * xi : xi * xj;
            }
        for (int i = 0; i < n; ++i) row(c++) = x[static_cast<std::size_t>(i)] / scale;
        row(c) = 1.0;
    };

    Eigen::MatrixXd normal = Eigen::MatrixXd::Zero(n_coef, n_coef);
    Eigen::VectorXd rhs_vec = Eigen::VectorXd::Zero(n_coef);
    Eigen::VectorXd row(n_coef);
    for (auto p : mask.member_nodes) {
        basis(g.position(p), row);
        normal.selfadjointView<Eigen::Lower>().rankUpdate(row);
        rhs_vec += row * field.values[p];
    }
    normal.triangularView<Eigen::StrictlyUpper>() = normal.transpose();
    Eigen::LLT<Eigen::MatrixXd> llt(normal);
    if (llt.info() != Eigen::Success || llt.rcond() < 1e-14)
        throw FitError("quadratic_fit: design matrix is rank deficient");
    const Eigen::VectorXd coef = llt.solve(rhs_vec);

    QuadraticFit fit;
    fit.A = SymMatrix(n);
    int c = 0;
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
            const double a = coef(c++) / (scale * scale);
            fit.A(i, j) = fit.A(j, i) = a;
        }
    for (int i = 0; i < n; ++i) fit.linear[static_cast<std::size_t>(i)] = coef(c++) / scale;
    fit.constant = coef(c);

    for (auto p : mask.member_nodes)
        fit.residual_sup = std::max(fit.residual_sup, std::abs(field.values[p] - fit(g.position(p))));
    return fit;
}

}  // namespace lmcf
