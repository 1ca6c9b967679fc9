#pragma once

#include <cstddef>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace lmcf {

struct Trajectory;

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid grid, solver or check configuration.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Caller broke a documented precondition (e.g. asymmetric matrix).
class ContractError : public Error {
public:
    using Error::Error;
};

/// Index or time outside the available range.
class RangeError : public Error {
public:
    using Error::Error;
};

/// A hypothesis of an estimate does not hold for the supplied parameters.
class HypothesisError : public Error {
public:
    using Error::Error;
};

/// Config rejected before any simulation work was done.
class ValidationError : public Error {
public:
    using Error::Error;
};

/// Rescaled preimage leaves the source domain.
class CoverageError : public Error {
public:
    CoverageError(const std::string& what, std::size_t worst_node)
        : Error(what), worst_node_(worst_node) {}
    std::size_t worst_node() const noexcept { return worst_node_; }

private:
    std::size_t worst_node_;
};

/// Least-squares design matrix is rank deficient.
class FitError : public Error {
public:
    using Error::Error;
};

/// Non-finite values appeared during time stepping.
///
/// When raised from evolve() the snapshots computed so far are kept in
/// partial() for inspection.
class DivergenceError : public Error {
public:
    DivergenceError(const std::string& what, std::size_t node, double time)
        : Error(what), node_(node), time_(time) {}

    std::size_t node() const noexcept { return node_; }
    double time() const noexcept { return time_; }
    const std::shared_ptr<const Trajectory>& partial() const noexcept { return partial_; }
    void set_partial(std::shared_ptr<const Trajectory> p) { partial_ = std::move(p); }

private:
    std::size_t node_;
    double time_;
    std::shared_ptr<const Trajectory> partial_;
};

/// Newton iteration failed; carries the residual max-norm per iteration.
class SolverError : public Error {
public:
    SolverError(const std::string& what, std::vector<double> history)
        : Error(what), history_(std::move(history)) {}
    const std::vector<double>& residual_history() const noexcept { return history_; }

private:
    std::vector<double> history_;
};

/// Problems reading a persisted trajectory.
class LoadError : public Error {
public:
    enum class Kind { io, format, version, checksum, truncated };

    LoadError(Kind kind, const std::string& what) : Error(what), kind_(kind) {}
    Kind kind() const noexcept { return kind_; }

private:
    Kind kind_;
};

}  // namespace lmcf
