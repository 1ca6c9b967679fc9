#pragma once

// Admissible initial data: quadratics 0.5 x^T A x with A >= 0, and seeded
// convex data 0.5 x^T (Q^T D Q) x + eps sqrt(1 + |x - c|^2).

#include <bit>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <optional>
#include <random>
#include <string>

#include <Eigen/Dense>

#include "lmcf/errors.hpp"
#include "lmcf/geometry.hpp"
#include "lmcf/grid.hpp"

namespace lmcf {

enum class InitialKind { quadratic, seeded_convex, file };

struct OscillationTarget {
    double M = 2.0;
    double radius = 1.0;  // ball over which the t = 0 oscillation is measured
};

struct InitialDataSpec {
    InitialKind kind = InitialKind::seeded_convex;
    SymMatrix A;                 // quadratic
    std::uint64_t seed = 0;      // seeded_convex
    double epsilon = 0.1;        // weight of the sqrt(1 + |x - c|^2) term
    double d_min = 0.0;          // diagonal of D drawn from [d_min, d_max]
    double d_max = 1.0;
    double center_box = 0.5;     // c drawn from [-center_box, center_box]^n
    double scale = 1.0;          // overall factor
    std::optional<OscillationTarget> normalize;
    std::string path;            // file
};

/// Closed-form convex function 0.5 x^T A x + eps sqrt(1 + |x - c|^2).
struct ConvexProfile {
    int dim = 1;
    SymMatrix A;
    double epsilon = 0.0;
    Point center{};
    double scale = 1.0;

    double value(const Point& x) const {
        double q = 0.0, r2 = 0.0;
        for (int i = 0; i < dim; ++i) {
            const double di = x[static_cast<std::size_t>(i)] - center[static_cast<std::size_t>(i)];
            r2 += di * di;
            for (int j = 0; j < dim; ++j) q += A(i, j) * x[static_cast<std::size_t>(i)] * x[static_cast<std::size_t>(j)];
        }
        return scale * (0.5 * q + epsilon * std::sqrt(1.0 + r2));
    }

    Point gradient(const Point& x) const {
        Point d{};
        double r2 = 0.0;
        for (int i = 0; i < dim; ++i) {
            const double di = x[static_cast<std::size_t>(i)] - center[static_cast<std::size_t>(i)];
            r2 += di * di;
        }
        const double root = std::sqrt(1.0 + r2);
        for (int i = 0; i < dim; ++i) {
            double acc = 0.0;
            for (int j = 0; j < dim; ++j) acc += A(i, j) * x[static_cast<std::size_t>(j)];
            acc += epsilon * (x[static_cast<std::size_t>(i)] - center[static_cast<std::size_t>(i)]) / root;
            d[static_cast<std::size_t>(i)] = scale * acc;
        }
        return d;
    }

    SymMatrix hessian(const Point& x) const {
        SymMatrix H(dim);
        double r2 = 0.0;
        for (int i = 0; i < dim; ++i) {
            const double di = x[static_cast<std::size_t>(i)] - center[static_cast<std::size_t>(i)];
            r2 += di * di;
        }
        const double w = 1.0 + r2;
        const double w32 = w * std::sqrt(w);
        for (int i = 0; i < dim; ++i)
            for (int j = 0; j < dim; ++j) {
                const double di = x[static_cast<std::size_t>(i)] - center[static_cast<std::size_t>(i)];
                const double dj = x[static_cast<std::size_t>(j)] - center[static_cast<std::size_t>(j)];
                H(i, j) = scale * (A(i, j) + epsilon * ((i == j ? w : 0.0) - di * dj) / w32);
            }
        return H;
    }
};

inline void require_psd(const SymMatrix& A) {
    if (eigen_sym(A).min() < -1e-12) throw ValidationError("quadratic initial data needs a positive semidefinite A");
}

/// Draws Q, D and c from a 64-bit Mersenne twister seeded with `seed`.
inline ConvexProfile seeded_profile(const InitialDataSpec& spec, int dim) {
    if (spec.epsilon < 0.0) throw ValidationError("seeded_convex: epsilon must be >= 0");
    if (spec.d_min < 0.0 || spec.d_max < spec.d_min) throw ValidationError("seeded_convex: need 0 <= d_min <= d_max");
    std::mt19937_64 rng(spec.seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    Eigen::MatrixXd G(dim, dim);
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) G(i, j) = gauss(rng);
    const Eigen::MatrixXd Q = Eigen::HouseholderQR<Eigen::MatrixXd>(G).householderQ();
    Eigen::VectorXd D(dim);
    for (int i = 0; i < dim; ++i) D(i) = spec.d_min + (spec.d_max - spec.d_min) * unit(rng);
    const Eigen::MatrixXd A = Q.transpose() * D.asDiagonal() * Q;

    ConvexProfile prof;
    prof.dim = dim;
    prof.A = SymMatrix(dim);
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) prof.A(i, j) = 0.5 * (A(i, j) + A(j, i));
    prof.epsilon = spec.epsilon;
    for (int i = 0; i < dim; ++i) prof.center[static_cast<std::size_t>(i)] = spec.center_box * (2.0 * unit(rng) - 1.0);
    prof.scale = spec.scale;
    return prof;
}

namespace detail {

inline double ball_oscillation_factor(const ScalarField& u, const OscillationTarget& target) {
    const auto ball = make_ball_mask(u.grid, target.radius);
    double lo = INFINITY, hi = -INFINITY;
    for (auto p : ball.member_nodes) {
        lo = std::min(lo, u.values[p]);
        hi = std::max(hi, u.values[p]);
    }
    if (!(hi > lo)) throw ValidationError("cannot normalise constant initial data to a positive oscillation");
    return target.M / (hi - lo);
}

}  // namespace detail

/// The analytic profile behind quadratic and seeded_convex data, including
/// the oscillation normalisation when one is requested.
inline ConvexProfile initial_profile(const InitialDataSpec& spec, const GridSpec& grid) {
    const int dim = grid.dim();
    ConvexProfile prof;
    switch (spec.kind) {
        case InitialKind::quadratic:
            if (spec.A.dim != dim) throw ValidationError("quadratic initial data: A has the wrong size");
            require_psd(spec.A);
            prof.dim = dim;
            prof.A = spec.A;
            prof.epsilon = 0.0;
            prof.scale = spec.scale;
            break;
        case InitialKind::seeded_convex:
            prof = seeded_profile(spec, dim);
            break;
        case InitialKind::file:
            throw ValidationError("file initial data has no analytic profile");
    }
    if (spec.normalize) {
        const auto u = ScalarField::sample(grid, [&](const Point& x) { return prof.value(x); });
        prof.scale *= detail::ball_oscillation_factor(u, *spec.normalize);
    }
    return prof;
}

inline ScalarField read_raw_field(const std::string& path, const GridSpec& grid);

/// Deterministic for a fixed spec and grid.
inline ScalarField generate_initial_data(const InitialDataSpec& spec, const GridSpec& grid) {
    if (spec.kind != InitialKind::file) {
        const auto prof = initial_profile(spec, grid);
        return ScalarField::sample(grid, [&](const Point& x) { return prof.value(x); });
    }
    ScalarField u = read_raw_field(spec.path, grid);
    const double f = spec.normalize ? detail::ball_oscillation_factor(u, *spec.normalize) : spec.scale;
    if (f != 1.0)
        for (auto& v : u.values) v *= f;
    return u;
}

/// Flat little-endian float64 array in node order.
inline ScalarField read_raw_field(const std::string& path, const GridSpec& grid) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw LoadError(LoadError::Kind::io, "cannot open " + path);
    std::vector<char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    const std::size_t want = grid.node_count() * sizeof(double);
    if (bytes.size() < want)
        throw LoadError(LoadError::Kind::truncated, path + ": truncated (" + std::to_string(bytes.size()) +
                                                        " bytes, expected " + std::to_string(want) + ")");
    if (bytes.size() > want)
        throw LoadError(LoadError::Kind::format, path + ": " + std::to_string(bytes.size()) + " bytes, expected " +
                                                     std::to_string(want));
    ScalarField f(grid);
    for (std::size_t i = 0; i < grid.node_count(); ++i) {
        std::uint64_t bits = 0;
        for (int b = 0; b < 8; ++b)
            bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes[i * 8 + static_cast<std::size_t>(b)]))
                    << (8 * b);
        f.values[i] = std::bit_cast<double>(bits);
    }
    return f;
}

}  // namespace lmcf
