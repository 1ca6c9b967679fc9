#pragma once

// Uniform cube grids in dimensions 1-3, node-sampled fields and the
// finite-difference stencils used by every other module.
//
// Node ordering is row-major with axis 0 slowest:
//   flat = ((i0 * N) + i1) * N + i2
// and the node coordinate along any axis is a * (2i - (N-1)) / (N-1), which
// is symmetric about the origin and puts the origin exactly on a node.

#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "lmcf/errors.hpp"

namespace lmcf {

inline constexpr int kMaxDim = 3;

using Point = std::array<double, kMaxDim>;

/// Dense 3x3 storage used for symmetric matrices of size dim <= 3.
/// Entries outside the leading dim x dim block are zero.
struct SymMatrix {
    int dim = 0;
    std::array<double, 9> m{};

    SymMatrix() = default;
    explicit SymMatrix(int d) : dim(d) {}

    double& operator()(int i, int j) { return m[static_cast<std::size_t>(3 * i + j)]; }
    double operator()(int i, int j) const { return m[static_cast<std::size_t>(3 * i + j)]; }

    static SymMatrix identity(int d) {
        SymMatrix s(d);
        for (int i = 0; i < d; ++i) s(i, i) = 1.0;
        return s;
    }

    double frobenius() const {
        double acc = 0.0;
        for (int i = 0; i < dim; ++i)
            for (int j = 0; j < dim; ++j) acc += (*this)(i, j) * (*this)(i, j);
        return std::sqrt(acc);
    }
};

class GridSpec {
public:
    GridSpec() = default;

    GridSpec(int dim, double half_width, int nodes_per_axis)
        : dim_(dim), half_width_(half_width), nodes_(nodes_per_axis) {
        if (dim < 1 || dim > kMaxDim)
            throw ConfigError("grid dimension must be 1, 2 or 3, got " + std::to_string(dim));
        if (!(half_width > 0.0) || !std::isfinite(half_width))
            throw ConfigError("grid half_width must be positive and finite");
        if (nodes_per_axis < 5 || nodes_per_axis % 2 == 0)
            throw ConfigError("nodes_per_axis must be odd and >= 5, got " +
                              std::to_string(nodes_per_axis));
        spacing_ = 2.0 * half_width / static_cast<double>(nodes_per_axis - 1);
        count_ = 1;
        for (int k = 0; k < dim; ++k) count_ *= static_cast<std::size_t>(nodes_per_axis);
    }

    int dim() const noexcept { return dim_; }
    double half_width() const noexcept { return half_width_; }
    int nodes_per_axis() const noexcept { return nodes_; }
    double spacing() const noexcept { return spacing_; }
    std::size_t node_count() const noexcept { return count_; }

    /// Flat-index distance between neighbours along `axis`.
    std::size_t stride(int axis) const noexcept {
        std::size_t s = 1;
        for (int k = axis + 1; k < dim_; ++k) s *= static_cast<std::size_t>(nodes_);
        return s;
    }

    double coord(int i) const noexcept {
        const double n1 = static_cast<double>(nodes_ - 1);
        return half_width_ * (2.0 * i - n1) / n1;
    }

    std::array<int, kMaxDim> multi_index(std::size_t flat) const noexcept {
        std::array<int, kMaxDim> idx{};
        for (int k = dim_ - 1; k >= 0; --k) {
            idx[static_cast<std::size_t>(k)] = static_cast<int>(flat % static_cast<std::size_t>(nodes_));
            flat /= static_cast<std::size_t>(nodes_);
        }
        return idx;
    }

    std::size_t flat_index(const std::array<int, kMaxDim>& idx) const noexcept {
        std::size_t flat = 0;
        for (int k = 0; k < dim_; ++k)
            flat = flat * static_cast<std::size_t>(nodes_) + static_cast<std::size_t>(idx[static_cast<std::size_t>(k)]);
        return flat;
    }

    Point position(std::size_t flat) const noexcept {
        const auto idx = multi_index(flat);
        Point x{};
        for (int k = 0; k < dim_; ++k) x[static_cast<std::size_t>(k)] = coord(idx[static_cast<std::size_t>(k)]);
        return x;
    }

    bool is_boundary(std::size_t flat) const noexcept {
        const auto idx = multi_index(flat);
        for (int k = 0; k < dim_; ++k) {
            const int i = idx[static_cast<std::size_t>(k)];
            if (i == 0 || i == nodes_ - 1) return true;
        }
        return false;
    }

    std::size_t origin_index() const noexcept {
        std::array<int, kMaxDim> idx{};
        for (int k = 0; k < dim_; ++k) idx[static_cast<std::size_t>(k)] = (nodes_ - 1) / 2;
        return flat_index(idx);
    }

    friend bool operator==(const GridSpec& a, const GridSpec& b) noexcept {
        return a.dim_ == b.dim_ && a.half_width_ == b.half_width_ && a.nodes_ == b.nodes_;
    }

private:
    int dim_ = 1;
    double half_width_ = 1.0;
    int nodes_ = 5;
    double spacing_ = 0.5;
    std::size_t count_ = 5;
};

inline double norm_sq(const Point& x, int dim) noexcept {
    double s = 0.0;
    for (int k = 0; k < dim; ++k) s += x[static_cast<std::size_t>(k)] * x[static_cast<std::size_t>(k)];
    return s;
}

struct ScalarField {
    GridSpec grid;
    std::vector<double> values;

    ScalarField() = default;
    explicit ScalarField(const GridSpec& g, double fill = 0.0) : grid(g), values(g.node_count(), fill) {}
    ScalarField(const GridSpec& g, std::vector<double> v) : grid(g), values(std::move(v)) {
        if (values.size() != grid.node_count())
            throw ContractError("field value count does not match the grid node count");
    }

    double operator[](std::size_t i) const { return values[i]; }
    double& operator[](std::size_t i) { return values[i]; }
    std::size_t size() const noexcept { return values.size(); }

    template <class F>
    static ScalarField sample(const GridSpec& g, F&& f) {
        ScalarField out(g);
        for (std::size_t i = 0; i < g.node_count(); ++i) out.values[i] = f(g.position(i));
        return out;
    }
};

struct VectorField {
    GridSpec grid;
    std::vector<Point> values;
};

struct SymMatrixField {
    GridSpec grid;
    std::vector<SymMatrix> values;
};

namespace detail {

struct Stencil3 {
    std::array<int, 3> offsets{};
    std::array<double, 3> weights{};
};

// Second-order first derivative along one axis at 1D position i.
inline Stencil3 first_derivative_stencil(int i, int n, double h) {
    const double inv = 1.0 / (2.0 * h);
    if (i == 0) return {{0, 1, 2}, {-3.0 * inv, 4.0 * inv, -1.0 * inv}};
    if (i == n - 1) return {{0, -1, -2}, {3.0 * inv, -4.0 * inv, 1.0 * inv}};
    return {{-1, 0, 1}, {-inv, 0.0, inv}};
}

inline void require_stencil_size(const GridSpec& g) {
    if (g.nodes_per_axis() < 5) throw ConfigError("finite differences need at least 5 nodes per axis");
}

inline double second_derivative(std::span<const double> f, std::size_t p, int i, int n,
                                std::size_t s, double inv_h2) {
    if (i == 0)
        return (2.0 * f[p] - 5.0 * f[p + s] + 4.0 * f[p + 2 * s] - f[p + 3 * s]) * inv_h2;
    if (i == n - 1)
        return (2.0 * f[p] - 5.0 * f[p - s] + 4.0 * f[p - 2 * s] - f[p - 3 * s]) * inv_h2;
    return (f[p - s] - 2.0 * f[p] + f[p + s]) * inv_h2;
}

inline std::size_t shift(std::size_t p, int offset, std::size_t s) {
    return offset >= 0 ? p + static_cast<std::size_t>(offset) * s : p - static_cast<std::size_t>(-offset) * s;
}

/// Hessian at one node. Pure second derivatives use the 3-point central
/// stencil inside and the 4-point one-sided stencil on the faces; mixed
/// derivatives are the tensor product of the axis first-derivative stencils,
/// i.e. the 4-point cross stencil at interior nodes.
inline SymMatrix hessian_at(const GridSpec& g, std::span<const double> f, std::size_t p) {
    const int dim = g.dim();
    const int n = g.nodes_per_axis();
    const double h = g.spacing();
    const double inv_h2 = 1.0 / (h * h);
    const auto idx = g.multi_index(p);
    SymMatrix H(dim);
    for (int a = 0; a < dim; ++a) {
        const std::size_t sa = g.stride(a);
        const int ia = idx[static_cast<std::size_t>(a)];
        H(a, a) = second_derivative(f, p, ia, n, sa, inv_h2);
        const Stencil3 da = first_derivative_stencil(ia, n, h);
        for (int b = a + 1; b < dim; ++b) {
            const std::size_t sb = g.stride(b);
            const Stencil3 db = first_derivative_stencil(idx[static_cast<std::size_t>(b)], n, h);
            double acc = 0.0;
            for (int u = 0; u < 3; ++u) {
                if (da.weights[static_cast<std::size_t>(u)] == 0.0) continue;
                const std::size_t pa = shift(p, da.offsets[static_cast<std::size_t>(u)], sa);
                double inner = 0.0;
                for (int v = 0; v < 3; ++v) {
                    if (db.weights[static_cast<std::size_t>(v)] == 0.0) continue;
                    inner += db.weights[static_cast<std::size_t>(v)] * f[shift(pa, db.offsets[static_cast<std::size_t>(v)], sb)];
                }
                acc += da.weights[static_cast<std::size_t>(u)] * inner;
            }
            H(a, b) = acc;
            H(b, a) = acc;
        }
    }
    return H;
}

inline Point gradient_at(const GridSpec& g, std::span<const double> f, std::size_t p) {
    const auto idx = g.multi_index(p);
    Point d{};
    for (int a = 0; a < g.dim(); ++a) {
        const std::size_t s = g.stride(a);
        const Stencil3 st = first_derivative_stencil(idx[static_cast<std::size_t>(a)], g.nodes_per_axis(), g.spacing());
        double acc = 0.0;
        for (int u = 0; u < 3; ++u)
            if (st.weights[static_cast<std::size_t>(u)] != 0.0)
                acc += st.weights[static_cast<std::size_t>(u)] * f[shift(p, st.offsets[static_cast<std::size_t>(u)], s)];
        d[static_cast<std::size_t>(a)] = acc;
    }
    return d;
}

}  // namespace detail

/// Du with second-order central differences inside and second-order
/// one-sided differences on the boundary faces.
inline VectorField fd_gradient(const ScalarField& field) {
    detail::require_stencil_size(field.grid);
    VectorField out{field.grid, std::vector<Point>(field.size())};
    for (std::size_t p = 0; p < field.size(); ++p) out.values[p] = detail::gradient_at(field.grid, field.values, p);
    return out;
}

/// D^2u; symmetric bit-exactly, exact on polynomials of degree <= 2.
inline SymMatrixField fd_hessian(const ScalarField& field) {
    detail::require_stencil_size(field.grid);
    SymMatrixField out{field.grid, std::vector<SymMatrix>(field.size())};
    for (std::size_t p = 0; p < field.size(); ++p) out.values[p] = detail::hessian_at(field.grid, field.values, p);
    return out;
}

struct BallMask {
    GridSpec grid;
    Point center{};
    double radius = 0.0;
    std::vector<std::size_t> member_nodes;
    /// Members with at least one axis neighbour outside the mask (or outside the grid).
    std::vector<std::size_t> boundary_nodes;
    std::vector<char> is_member;  // one flag per grid node

    bool contains(std::size_t node) const { return is_member[node] != 0; }

    /// Members that are neither on the discrete ball boundary nor on the cube faces.
    std::vector<std::size_t> interior_nodes() const {
        std::vector<std::size_t> out;
        std::vector<char> on_edge(grid.node_count(), 0);
        for (auto b : boundary_nodes) on_edge[b] = 1;
        for (auto m : member_nodes)
            if (!on_edge[m] && !grid.is_boundary(m)) out.push_back(m);
        return out;
    }
};

/// True when the closed ball lies inside the cube (up to round-off).
inline bool ball_fits(const GridSpec& g, const Point& center, double radius) {
    const double slack = 1e-12 * g.half_width();
    for (int k = 0; k < g.dim(); ++k)
        if (std::abs(center[static_cast<std::size_t>(k)]) + radius > g.half_width() + slack) return false;
    return true;
}

inline BallMask make_ball_mask(const GridSpec& grid, const Point& center, double radius) {
    if (!(radius > 0.0)) throw ConfigError("ball radius must be positive");
    BallMask mask;
    mask.grid = grid;
    mask.center = center;
    mask.radius = radius;
    mask.is_member.assign(grid.node_count(), 0);
    const double r2 = radius * radius;
    for (std::size_t p = 0; p < grid.node_count(); ++p) {
        const Point x = grid.position(p);
        double d2 = 0.0;
        for (int k = 0; k < grid.dim(); ++k) {
            const double dk = x[static_cast<std::size_t>(k)] - center[static_cast<std::size_t>(k)];
            d2 += dk * dk;
        }
        if (d2 <= r2) {
            mask.is_member[p] = 1;
            mask.member_nodes.push_back(p);
        }
    }
    if (mask.member_nodes.empty()) throw ConfigError("ball mask contains no grid nodes");

    const int n = grid.nodes_per_axis();
    for (auto p : mask.member_nodes) {
        const auto idx = grid.multi_index(p);
        bool edge = false;
        for (int k = 0; k < grid.dim() && !edge; ++k) {
            const int i = idx[static_cast<std::size_t>(k)];
            const std::size_t s = grid.stride(k);
            if (i == 0 || i == n - 1 || !mask.is_member[p - s] || !mask.is_member[p + s]) edge = true;
        }
        if (edge) mask.boundary_nodes.push_back(p);
    }
    return mask;
}

inline BallMask make_ball_mask(const GridSpec& grid, double radius) {
    return make_ball_mask(grid, Point{}, radius);
}

}  // namespace lmcf
