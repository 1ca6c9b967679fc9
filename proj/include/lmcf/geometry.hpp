#pragma once

// Pointwise geometry of the gradient graph (x, Du): Hessian spectrum,
// Lagrangian angle, induced metric g = I + (D^2u)^2, volume element and the
// linearised operator L = d/dt - g^{ij} d_ij.

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <numeric>

#include "lmcf/errors.hpp"
#include "lmcf/grid.hpp"
#include "lmcf/trajectory.hpp"

namespace lmcf {

/// Columns of `frame` are the eigenvectors, eigenvalues ascending.
struct HessianSpectrum {
    int dim = 0;
    std::array<double, 3> eigenvalues{};
    SymMatrix frame;  // general 3x3 storage, not symmetric

    double min() const noexcept { return eigenvalues[0]; }
    double max() const noexcept { return eigenvalues[static_cast<std::size_t>(dim - 1)]; }
};

struct MetricData {
    int dim = 0;
    SymMatrix g;
    SymMatrix g_inv;
    double volume = 1.0;
    double b = 1.0;
};

namespace detail {

inline void normalize_signs(HessianSpectrum& s) {
    const int n = s.dim;
    for (int c = 0; c < n; ++c) {
        double big = 0.0;
        for (int r = 0; r < n; ++r) big = std::max(big, std::abs(s.frame(r, c)));
        // first entry within round-off of the largest magnitude wins ties
        for (int r = 0; r < n; ++r) {
            if (std::abs(s.frame(r, c)) >= big - 1e-12) {
                if (s.frame(r, c) < 0.0)
                    for (int q = 0; q < n; ++q) s.frame(q, c) = -s.frame(q, c);
                break;
            }
        }
    }
}

inline void sort_ascending(HessianSpectrum& s) {
    std::array<int, 3> order{0, 1, 2};
    std::sort(order.begin(), order.begin() + s.dim,
              [&](int a, int b) { return s.eigenvalues[static_cast<std::size_t>(a)] < s.eigenvalues[static_cast<std::size_t>(b)]; });
    HessianSpectrum out;
    out.dim = s.dim;
    out.frame = SymMatrix(s.dim);
    for (int c = 0; c < s.dim; ++c) {
        out.eigenvalues[static_cast<std::size_t>(c)] = s.eigenvalues[static_cast<std::size_t>(order[static_cast<std::size_t>(c)])];
        for (int r = 0; r < s.dim; ++r) out.frame(r, c) = s.frame(r, order[static_cast<std::size_t>(c)]);
    }
    s = out;
}

inline HessianSpectrum eigen2(const SymMatrix& S) {
    const double a = S(0, 0), b = S(0, 1), c = S(1, 1);
    if (b == 0.0) {
        HessianSpectrum s;
        s.dim = 2;
        s.frame = SymMatrix::identity(2);
        s.eigenvalues = {a, c, 0.0};
        return s;  // sort_ascending orders the columns
    }
    const double mean = 0.5 * (a + c);
    const double r = std::hypot(0.5 * (a - c), b);
    // (cos t, sin t) spans the eigenspace of the larger eigenvalue
    const double t = 0.5 * std::atan2(2.0 * b, a - c);
    const double ct = std::cos(t), st = std::sin(t);
    HessianSpectrum s;
    s.dim = 2;
    s.frame = SymMatrix(2);
    s.eigenvalues = {mean - r, mean + r, 0.0};
    s.frame(0, 0) = -st;
    s.frame(1, 0) = ct;
    s.frame(0, 1) = ct;
    s.frame(1, 1) = st;
    return s;
}

// Cyclic Jacobi; stops once the off-diagonal Frobenius norm drops below
// 1e-14 * |S|.
inline HessianSpectrum eigen3(const SymMatrix& S) {
    SymMatrix A = S;
    SymMatrix V = SymMatrix::identity(3);
    const double scale = S.frobenius();
    HessianSpectrum s;
    s.dim = 3;
    if (scale == 0.0) {
        s.frame = V;
        return s;
    }
    const double target = 1e-14 * scale;
    for (int sweep = 0; sweep < 64; ++sweep) {
        const double off = std::sqrt(2.0 * (A(0, 1) * A(0, 1) + A(0, 2) * A(0, 2) + A(1, 2) * A(1, 2)));
        if (off < target) break;
        for (int p = 0; p < 2; ++p) {
            for (int q = p + 1; q < 3; ++q) {
                const double apq = A(p, q);
                if (apq == 0.0) continue;
                const double theta = (A(q, q) - A(p, p)) / (2.0 * apq);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double sn = t * c;
                // A <- J^T A J with J the (p, q) rotation
                for (int k = 0; k < 3; ++k) {
                    const double akp = A(k, p), akq = A(k, q);
                    A(k, p) = c * akp - sn * akq;
                    A(k, q) = sn * akp + c * akq;
                }
                for (int k = 0; k < 3; ++k) {
                    const double apk = A(p, k), aqk = A(q, k);
                    A(p, k) = c * apk - sn * aqk;
                    A(q, k) = sn * apk + c * aqk;
                }
                A(p, q) = 0.0;
                A(q, p) = 0.0;
                for (int k = 0; k < 3; ++k) {
                    const double vkp = V(k, p), vkq = V(k, q);
                    V(k, p) = c * vkp - sn * vkq;
                    V(k, q) = sn * vkp + c * vkq;
                }
            }
        }
    }
    s.eigenvalues = {A(0, 0), A(1, 1), A(2, 2)};
    s.frame = V;
    return s;
}

}  // namespace detail

inline HessianSpectrum eigen_sym(const SymMatrix& S) {
    const int n = S.dim;
    if (n < 1 || n > kMaxDim) throw ContractError("eigen_sym: dimension must be 1, 2 or 3");
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if (std::abs(S(i, j) - S(j, i)) > 1e-12)
                throw ContractError("eigen_sym: input matrix is not symmetric");

    HessianSpectrum s;
    if (n == 1) {
        s.dim = 1;
        s.eigenvalues = {S(0, 0), 0.0, 0.0};
        s.frame = SymMatrix::identity(1);
        return s;
    }
    s = n == 2 ? detail::eigen2(S) : detail::eigen3(S);
    detail::sort_ascending(s);
    detail::normalize_signs(s);
    return s;
}

/// Theta = sum_i arctan(lambda_i).
inline double lagrangian_angle(const HessianSpectrum& s) {
    double theta = 0.0;
    for (int i = 0; i < s.dim; ++i) theta += std::atan(s.eigenvalues[static_cast<std::size_t>(i)]);
    return theta;
}

/// Ascending eigenvalues without the frame. Same kernels as eigen_sym, minus
/// the eigenvector bookkeeping; used on the per-node hot paths.
inline std::array<double, 3> eigenvalues_sym(const SymMatrix& S) {
    if (S.dim == 1) return {S(0, 0), 0.0, 0.0};
    if (S.dim == 2) {
        const double mean = 0.5 * (S(0, 0) + S(1, 1));
        const double r = std::hypot(0.5 * (S(0, 0) - S(1, 1)), S(0, 1));
        return {mean - r, mean + r, 0.0};
    }
    return eigen_sym(S).eigenvalues;
}

inline double angle_of(const SymMatrix& S) {
    const auto lam = eigenvalues_sym(S);
    double theta = 0.0;
    for (int i = 0; i < S.dim; ++i) theta += std::atan(lam[static_cast<std::size_t>(i)]);
    return theta;
}

inline double min_eigenvalue(const SymMatrix& S) { return eigenvalues_sym(S)[0]; }

/// g = Q diag(1 + lambda^2) Q^T and friends. V and b are formed through
/// sum log(1 + lambda^2) so large eigenvalues do not overflow.
inline MetricData induced_metric(const HessianSpectrum& s) {
    const int n = s.dim;
    MetricData md;
    md.dim = n;
    md.g = SymMatrix(n);
    md.g_inv = SymMatrix(n);
    std::array<double, 3> w{}, winv{};
    double log_v = 0.0;
    for (int k = 0; k < n; ++k) {
        const double lam = s.eigenvalues[static_cast<std::size_t>(k)];
        w[static_cast<std::size_t>(k)] = 1.0 + lam * lam;
        winv[static_cast<std::size_t>(k)] = 1.0 / w[static_cast<std::size_t>(k)];
        const double al = std::abs(lam);
        log_v += 0.5 * (al > 1.0 ? 2.0 * std::log(al) + std::log1p(1.0 / (al * al)) : std::log1p(lam * lam));
    }
    for (int i = 0; i < n; ++i) {
        for (int j = i; j < n; ++j) {
            double gij = 0.0, hij = 0.0;
            for (int k = 0; k < n; ++k) {
                const double qq = s.frame(i, k) * s.frame(j, k);
                gij += qq * w[static_cast<std::size_t>(k)];
                hij += qq * winv[static_cast<std::size_t>(k)];
            }
            md.g(i, j) = md.g(j, i) = gij;
            md.g_inv(i, j) = md.g_inv(j, i) = hij;
        }
    }
    md.volume = std::exp(log_v);
    md.b = std::exp(log_v / n);
    return md;
}

/// |grad f|_g^2 = g^{ij} f_i f_j.
inline double covariant_grad_sq(const MetricData& md, const Point& grad) {
    double acc = 0.0;
    for (int i = 0; i < md.dim; ++i)
        for (int j = 0; j < md.dim; ++j)
            acc += md.g_inv(i, j) * grad[static_cast<std::size_t>(i)] * grad[static_cast<std::size_t>(j)];
    return std::max(acc, 0.0);
}

/// Per-node metric data of a field's finite-difference Hessian.
inline std::vector<MetricData> metric_field(const ScalarField& u) {
    const auto H = fd_hessian(u);
    std::vector<MetricData> out(u.size());
    for (std::size_t p = 0; p < u.size(); ++p) out[p] = induced_metric(eigen_sym(H.values[p]));
    return out;
}

inline ScalarField volume_element_b(const ScalarField& u) {
    const auto H = fd_hessian(u);
    ScalarField b(u.grid);
    for (std::size_t p = 0; p < u.size(); ++p) b.values[p] = induced_metric(eigen_sym(H.values[p])).b;
    return b;
}

/// A scalar quantity derived from one snapshot of u (u itself, u_k, b, ...).
using DerivedField = std::function<ScalarField(const ScalarField&)>;

/// L f = (f_next - f_prev) / (t_next - t_prev) - g^{ij} f_ij for
/// precomputed snapshots of f around the middle time.
inline ScalarField apply_L_fields(const ScalarField& f_prev, const ScalarField& f_mid, const ScalarField& f_next,
                                  double two_dt, const std::vector<MetricData>& metric_mid) {
    const auto Hf = fd_hessian(f_mid);
    ScalarField out(f_mid.grid);
    const int n = f_mid.grid.dim();
    for (std::size_t p = 0; p < out.size(); ++p) {
        double diffusion = 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) diffusion += metric_mid[p].g_inv(i, j) * Hf.values[p](i, j);
        out.values[p] = (f_next.values[p] - f_prev.values[p]) / two_dt - diffusion;
    }
    return out;
}

/// L f at snapshot `time_index`: central time difference over the two
/// neighbouring snapshots, g from the Hessian of the middle snapshot.
inline ScalarField apply_L(const Trajectory& traj, const DerivedField& derived, std::size_t time_index) {
    if (time_index == 0 || time_index + 1 >= traj.size())
        throw RangeError("apply_L needs a snapshot on both sides of time index " + std::to_string(time_index));
    const double two_dt = traj.times[time_index + 1] - traj.times[time_index - 1];
    return apply_L_fields(derived(traj.snapshots[time_index - 1]), derived(traj.snapshots[time_index]),
                          derived(traj.snapshots[time_index + 1]), two_dt, metric_field(traj.snapshots[time_index]));
}

/// The k-th first derivative of u as a field; handy as a DerivedField.
inline ScalarField partial_derivative(const ScalarField& u, int axis) {
    const auto du = fd_gradient(u);
    ScalarField out(u.grid);
    for (std::size_t p = 0; p < u.size(); ++p) out.values[p] = du.values[p][static_cast<std::size_t>(axis)];
    return out;
}

}  // namespace lmcf
