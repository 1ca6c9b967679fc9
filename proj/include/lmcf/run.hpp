#pragma once

// JSON-configured end-to-end runs: validate, generate data, evolve, persist,
// run the requested checks, and write report.json / summary.csv.
//
// Exit codes: 0 all checks met their expected status, 1 some did not,
// 2 the config was rejected before simulation, 3 a later stage failed.

#include <filesystem>
#include <numbers>
#include <optional>
#include <fstream>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "lmcf/errors.hpp"
#include "lmcf/estimates.hpp"
#include "lmcf/flow.hpp"
#include "lmcf/initial_data.hpp"
#include "lmcf/liouville.hpp"
#include "lmcf/persistence.hpp"
#include "lmcf/reports.hpp"

namespace lmcf {

struct CheckSpec {
    std::string name;
    nlohmann::json params = nlohmann::json::object();
    Status expect = Status::pass;
};

struct FlowParams {
    double theta0 = 0.0;
    bool theta0_matched = false;  // theta0 = sum arctan(eig(A)) for quadratic data
    double t_end = 0.5;
    double dt_safety = 0.4;
    Scheme scheme = Scheme::rk2;
    int snapshot_stride = 1;
    BoundaryMode boundary_mode = BoundaryMode::free;
};

struct RunConfig {
    GridSpec grid;
    FlowParams flow;
    InitialDataSpec initial;
    std::vector<CheckSpec> checks;
    std::filesystem::path output_dir = "lmcf_out";
    nlohmann::json raw = nlohmann::json::object();
};

struct RunResult {
    int exit_code = 0;
    std::vector<std::string> failures;
    nlohmann::json report = nlohmann::json::object();
};

inline constexpr int kExitOk = 0;
inline constexpr int kExitCheckFailed = 1;
inline constexpr int kExitInvalidConfig = 2;
inline constexpr int kExitStageError = 3;

inline const std::set<std::string>& known_checks() {
    static const std::set<std::string> names{"stationarity", "convexity", "jacobi", "height", "gradient", "hessian",
                                             "barrier",      "monotone",  "growth", "quadfit", "rescale"};
    return names;
}

// Probes report numbers but carry no pass/fail status.
inline bool is_probe(const std::string& name) { return name == "growth" || name == "quadfit"; }

inline Status parse_status(const std::string& s) {
    if (s == "pass") return Status::pass;
    if (s == "fail") return Status::fail;
    if (s == "not_applicable") return Status::not_applicable;
    throw ValidationError("unknown expected status '" + s + "'");
}

inline SymMatrix matrix_from_json(const nlohmann::json& j, int dim) {
    SymMatrix A(dim);
    if (!j.is_array() || static_cast<int>(j.size()) != dim) throw ValidationError("matrix must be " + std::to_string(dim) + " rows");
    for (int i = 0; i < dim; ++i) {
        const auto& row = j.at(static_cast<std::size_t>(i));
        if (!row.is_array() || static_cast<int>(row.size()) != dim) throw ValidationError("matrix row has the wrong length");
        for (int k = 0; k < dim; ++k) A(i, k) = row.at(static_cast<std::size_t>(k)).get<double>();
    }
    for (int i = 0; i < dim; ++i)
        for (int k = i + 1; k < dim; ++k)
            if (std::abs(A(i, k) - A(k, i)) > 1e-12) throw ValidationError("matrix must be symmetric");
    return A;
}

inline InitialDataSpec initial_from_json(const nlohmann::json& j, int dim) {
    InitialDataSpec s;
    const auto kind = j.value("kind", std::string("seeded_convex"));
    if (kind == "quadratic") {
        s.kind = InitialKind::quadratic;
        s.A = matrix_from_json(j.at("A"), dim);
    } else if (kind == "seeded_convex") {
        s.kind = InitialKind::seeded_convex;
        s.seed = j.value("seed", std::uint64_t{0});
        s.epsilon = j.value("epsilon", s.epsilon);
        s.d_min = j.value("d_min", s.d_min);
        s.d_max = j.value("d_max", s.d_max);
        s.center_box = j.value("center_box", s.center_box);
    } else if (kind == "file") {
        s.kind = InitialKind::file;
        s.path = j.at("path").get<std::string>();
    } else {
        throw ValidationError("unknown initial data kind '" + kind + "'");
    }
    s.scale = j.value("scale", 1.0);
    if (j.contains("normalize_oscillation")) {
        const auto& n = j.at("normalize_oscillation");
        s.normalize = OscillationTarget{n.at("M").get<double>(), n.at("radius").get<double>()};
    }
    return s;
}

inline RunConfig parse_run_config(const nlohmann::json& j) {
    RunConfig c;
    c.raw = j;
    try {
        const auto& g = j.at("grid");
        c.grid = GridSpec(g.at("dim").get<int>(), g.at("half_width").get<double>(), g.at("nodes_per_axis").get<int>());
        const auto f = j.value("flow", nlohmann::json::object());
        if (f.contains("theta0") && f.at("theta0").is_string()) {
            if (f.at("theta0").get<std::string>() != "matched") throw ValidationError("theta0 must be a number or \"matched\"");
            c.flow.theta0_matched = true;
        } else {
            c.flow.theta0 = f.value("theta0", 0.0);
        }
        c.flow.t_end = f.value("t_end", c.flow.t_end);
        c.flow.dt_safety = f.value("dt_safety", c.flow.dt_safety);
        const auto scheme = f.value("scheme", std::string("rk2"));
        if (scheme != "rk2" && scheme != "rk4") throw ValidationError("scheme must be rk2 or rk4");
        c.flow.scheme = scheme == "rk2" ? Scheme::rk2 : Scheme::rk4;
        c.flow.snapshot_stride = f.value("snapshot_stride", 1);
        const auto bm = f.value("boundary_mode", std::string("free"));
        if (bm != "free" && bm != "dirichlet_function") throw ValidationError("boundary_mode must be free or dirichlet_function");
        c.flow.boundary_mode = bm == "free" ? BoundaryMode::free : BoundaryMode::dirichlet_function;
        c.initial = initial_from_json(j.value("initial_data", nlohmann::json::object()), c.grid.dim());
        for (const auto& cj : j.value("checks", nlohmann::json::array())) {
            CheckSpec cs;
            cs.name = cj.at("name").get<std::string>();
            cs.params = cj;
            cs.expect = parse_status(cj.value("expect", std::string("pass")));
            c.checks.push_back(std::move(cs));
        }
        c.output_dir = j.value("output_dir", std::string("lmcf_out"));
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("malformed config: ") + e.what());
    } catch (const ConfigError& e) {
        throw ValidationError(std::string("invalid grid: ") + e.what());
    }
    return c;
}

inline KorevaarParams korevaar_from_json(const nlohmann::json& p, int n) {
    const auto mc = main_constant(n);
    KorevaarParams k;
    k.alpha = p.value("alpha", mc.alpha);
    k.gamma = p.value("gamma", mc.gamma);
    k.K = p.value("K", 1.0);
    return k;
}

/// Rejects configs whose check parameters break a precondition.
inline void validate_run_config(const RunConfig& c) {
    const int n = c.grid.dim();
    const double a = c.grid.half_width();
    if (!(c.flow.t_end >= 0.0)) throw ValidationError("t_end must be >= 0");
    if (!(c.flow.dt_safety > 0.0 && c.flow.dt_safety <= 0.5)) throw ValidationError("dt_safety must lie in (0, 0.5]");
    if (c.flow.snapshot_stride < 1) throw ValidationError("snapshot_stride must be >= 1");
    if (c.flow.theta0_matched && c.initial.kind != InitialKind::quadratic)
        throw ValidationError("theta0 = \"matched\" needs quadratic initial data");
    if (c.initial.kind == InitialKind::quadratic) require_psd(c.initial.A);
    if (c.initial.kind == InitialKind::seeded_convex && (c.initial.epsilon < 0.0 || c.initial.d_min < 0.0 || c.initial.d_max < c.initial.d_min))
        throw ValidationError("seeded_convex parameters need epsilon >= 0 and 0 <= d_min <= d_max");

    auto fits = [&](double r, const std::string& what) {
        if (!(r > 0.0)) throw ValidationError(what + ": radius must be positive");
        if (r > a * (1.0 + 1e-12)) throw ValidationError(what + ": ball of radius " + std::to_string(r) + " does not fit the grid");
    };
    auto needs_unit_time = [&](const std::string& what) {
        if (c.flow.t_end < 1.0 / n - 1e-12) throw ValidationError(what + " needs t_end >= 1/n");
    };
    for (const auto& cs : c.checks) {
        const auto& p = cs.params;
        if (!known_checks().count(cs.name)) throw ValidationError("unknown check '" + cs.name + "'");
        try {
            if (cs.name == "jacobi") {
                fits(p.value("mask_radius", 0.8), "jacobi");
                if (c.flow.t_end <= 0.0 || c.flow.snapshot_stride < 1) throw ValidationError("jacobi needs t_end > 0");
            } else if (cs.name == "height") {
                fits(p.at("R").get<double>(), "height");
                needs_unit_time("height");
            } else if (cs.name == "gradient") {
                const double R = p.at("R").get<double>();
                if (!(R > 0.0)) throw ValidationError("gradient: R must be positive");
                fits(2.0 * R + 1.0, "gradient (B_{2R+1})");
                if (p.contains("M") && !(p.at("M").get<double>() >= 0.0)) throw ValidationError("gradient: M must be >= 0");
                needs_unit_time("gradient");
            } else if (cs.name == "hessian") {
                try {
                    validate(korevaar_from_json(p, n), n);
                } catch (const HypothesisError& e) {
                    throw ValidationError(std::string("hessian: ") + e.what());
                }
                fits(1.0, "hessian (B_1)");
                needs_unit_time("hessian");
            } else if (cs.name == "barrier") {
                if (!(p.value("R", 1.0) > 0.0)) throw ValidationError("barrier: R must be positive");
            } else if (cs.name == "growth") {
                if (!(p.value("R0", 1.0) > 0.0)) throw ValidationError("growth: R0 must be positive");
                fits(p.value("mask_radius", a), "growth");
            } else if (cs.name == "quadfit") {
                fits(p.value("mask_radius", 1.0), "quadfit");
            } else if (cs.name == "rescale") {
                if (!(p.value("lambda", 2.0) > 0.0)) throw ValidationError("rescale: lambda must be positive");
            } else if (cs.name == "stationarity") {
                if (!(p.value("tolerance", 1e-9) >= 0.0)) throw ValidationError("stationarity: tolerance must be >= 0");
            }
        } catch (const nlohmann::json::exception& e) {
            throw ValidationError("check " + cs.name + ": " + e.what());
        }
    }
}

namespace detail {

inline EstimateReport stationarity_report(const Trajectory& traj, double tolerance) {
    EstimateReport r;
    r.check_name = "stationarity";
    r.tolerance_used = 0.0;
    double worst = 0.0;
    for (std::size_t k = 0; k < traj.size(); ++k)
        for (std::size_t p = 0; p < traj.grid.node_count(); ++p) {
            const double d = std::abs(traj.snapshots[k].values[p] - traj.snapshots[0].values[p]);
            if (d > worst) {
                worst = d;
                r.worst_location = locate(traj.grid, p, traj.times[k]);
            }
        }
    r.details["max_change"] = worst;
    r.details["allowed_change"] = tolerance;
    r.worst_margin = tolerance - worst;
    r.finalize();
    return r;
}

inline EstimateReport convexity_report(const Trajectory& traj) {
    EstimateReport r;
    r.check_name = "convexity";
    r.worst_margin = INFINITY;
    for (std::size_t k = 0; k < traj.size(); ++k) {
        const double lo = convexity_monitor(traj.snapshots[k]);
        if (lo + kConvexityTolerance < r.worst_margin) {
            r.worst_margin = lo + kConvexityTolerance;
            r.worst_location.t = traj.times[k];
        }
    }
    r.finalize();
    return r;
}

inline EstimateReport barrier_report(int n, double R, std::size_t samples, std::uint64_t seed) {
    EstimateReport r;
    r.check_name = "barrier";
    r.tolerance_used = 1e-12;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    std::uniform_real_distribution<double> time(0.0, 1.0 / n);
    const BarrierSpec spec{R, n};
    r.worst_margin = INFINITY;
    for (std::size_t i = 0; i < samples; ++i) {
        SpaceTimePoint pt;
        do {
            for (int k = 0; k < n; ++k) pt.x[static_cast<std::size_t>(k)] = R * unit(rng);
        } while (norm_sq(pt.x, n) > R * R);
        pt.t = time(rng);
        const double v = barrier_residual(spec, pt.x, pt.t);
        if (v < r.worst_margin) {
            r.worst_margin = v;
            r.worst_location.x = pt.x;
            r.worst_location.t = pt.t;
        }
    }
    r.details["R"] = R;
    r.details["samples"] = static_cast<double>(samples);
    r.finalize();
    return r;
}

/// Residual of the rescaled trajectory against 2x the source residual plus
/// 10 h^2 on the (node-aligned) target grid.
inline EstimateReport rescale_report(const Trajectory& traj, double lambda) {
    EstimateReport r;
    r.check_name = "rescale";
    const auto target = aligned_target_grid(traj.grid, lambda);
    const auto scaled = rescale(traj, RescaleSpec{lambda, Point{}}, target);
    const double src = equation_residual(traj);
    const double tgt = equation_residual(scaled);
    const double h = target.spacing();
    r.details["source_residual"] = src;
    r.details["target_residual"] = tgt;
    r.details["lambda"] = lambda;
    r.worst_margin = 2.0 * src + 10.0 * h * h - tgt;
    r.finalize();
    return r;
}

}  // namespace detail

inline RunResult run(const RunConfig& cfg_in) {
    RunResult result;
    RunConfig cfg = cfg_in;
    try {
        validate_run_config(cfg);
    } catch (const Error& e) {
        result.exit_code = kExitInvalidConfig;
        result.failures.push_back(std::string("validation: ") + e.what());
        result.report = {{"stage", "validation"}, {"error", e.what()}};
        return result;
    }

    const auto& out = cfg.output_dir;
    auto write_failures = [&] {
        std::filesystem::create_directories(out);
        std::ofstream f(out / "failures.json");
        f << nlohmann::json(result.failures).dump(2) << '\n';
    };
    const int n = cfg.grid.dim();

    Trajectory traj;
    try {
        const auto u0 = generate_initial_data(cfg.initial, cfg.grid);
        double theta0 = cfg.flow.theta0;
        if (cfg.flow.theta0_matched) theta0 = lagrangian_angle(eigen_sym(cfg.initial.A));
        SolverConfig sc;
        sc.dt_safety = cfg.flow.dt_safety;
        sc.scheme = cfg.flow.scheme;
        sc.t_end = cfg.flow.t_end;
        sc.snapshot_stride = cfg.flow.snapshot_stride;
        sc.boundary_mode = cfg.flow.boundary_mode;
        if (sc.boundary_mode == BoundaryMode::dirichlet_function) {
            if (cfg.initial.kind == InitialKind::file) {
                const ScalarField frozen = u0;
                sc.boundary = [frozen](const Point& x, double) { return *detail::interpolate(frozen, x); };
            } else {
                const auto prof = initial_profile(cfg.initial, cfg.grid);
                sc.boundary = [prof](const Point& x, double) { return prof.value(x); };
            }
        }
        traj = evolve(FlowState{u0, 0.0, theta0}, sc);
        traj.provenance["run_config"] = cfg.raw;
        save_trajectory(traj, out / "trajectory");
    } catch (const DivergenceError& e) {
        result.exit_code = kExitStageError;
        result.failures.push_back(std::string("simulation: ") + e.what());
        if (e.partial()) save_trajectory(*e.partial(), out / "partial_trajectory");
        write_failures();
        return result;
    } catch (const Error& e) {
        result.exit_code = kExitStageError;
        result.failures.push_back(std::string("simulation: ") + e.what());
        write_failures();
        return result;
    }

    nlohmann::json checks = nlohmann::json::array();
    nlohmann::json probes = nlohmann::json::object();
    std::ofstream csv(out / "summary.csv");
    csv << csv_header() << ",expected\n";
    for (const auto& cs : cfg.checks) {
        const auto& p = cs.params;
        try {
            if (cs.name == "growth") {
                const auto mask = make_ball_mask(cfg.grid, p.value("mask_radius", cfg.grid.half_width()));
                const auto g = growth_ratio(traj, p.value("R0", 1.0), mask);
                probes["growth"] = to_json(g);
                std::ofstream gcsv(out / "growth.csv");
                write_growth_csv(g, gcsv);
                continue;
            }
            if (cs.name == "quadfit") {
                const auto mask = make_ball_mask(cfg.grid, p.value("mask_radius", 1.0));
                nlohmann::json series = nlohmann::json::array();
                for (std::size_t k = 0; k < traj.size(); ++k) {
                    auto j = to_json(quadratic_fit(traj.snapshots[k], mask));
                    j["t"] = traj.times[k];
                    series.push_back(j);
                }
                probes["quadfit"] = series;
                continue;
            }
            EstimateReport rep;
            const ToleranceSchedule tol{p.value("c1", 10.0), p.value("c2", 10.0)};
            if (cs.name == "stationarity") {
                rep = detail::stationarity_report(traj, p.value("tolerance", 1e-9));
            } else if (cs.name == "convexity") {
                rep = detail::convexity_report(traj);
            } else if (cs.name == "jacobi") {
                rep = check_jacobi(traj, make_ball_mask(cfg.grid, p.value("mask_radius", 0.8)), tol);
            } else if (cs.name == "height") {
                rep = height_bound_check(traj, p.at("R").get<double>(), tol);
            } else if (cs.name == "gradient") {
                const double R = p.at("R").get<double>();
                double M = 0.0;
                if (p.contains("M")) {
                    M = p.at("M").get<double>();
                } else {
                    M = oscillation(traj.snapshots.front(), make_ball_mask(cfg.grid, 2.0 * R + 1.0).member_nodes);
                }
                rep = gradient_bound_check(traj, R, M, tol);
            } else if (cs.name == "hessian") {
                const auto policy = p.value("policy", std::string("weaker")) == "stricter" ? ConstantPolicy::stricter
                                                                                            : ConstantPolicy::weaker;
                rep = hessian_bound_check(traj, korevaar_from_json(p, n), policy);
            } else if (cs.name == "barrier") {
                rep = detail::barrier_report(n, p.value("R", 3.0 * std::sqrt(double(n))),
                                             p.value("samples", std::size_t{100000}), p.value("seed", std::uint64_t{1}));
            } else if (cs.name == "monotone") {
                rep = theta_monotonicity_check(traj, p.value("tolerance", monotonicity_tolerance(traj)));
            } else if (cs.name == "rescale") {
                rep = detail::rescale_report(traj, p.value("lambda", 2.0));
            }
            auto j = to_json(rep, n);
            j["expected"] = to_string(cs.expect);
            checks.push_back(j);
            csv << csv_row(rep) << ',' << to_string(cs.expect) << '\n';
            if (rep.status != cs.expect)
                result.failures.push_back(cs.name + ": status " + to_string(rep.status) + ", expected " +
                                          to_string(cs.expect));
        } catch (const Error& e) {
            result.failures.push_back(cs.name + ": error: " + e.what());
            checks.push_back({{"name", cs.name}, {"error", e.what()}});
        }
    }

    result.report = {{"grid", grid_to_json(cfg.grid)},
                     {"theta0", traj.theta0},
                     {"times", {{"first", traj.times.front()}, {"last", traj.times.back()}, {"count", traj.size()}}},
                     {"checks", checks},
                     {"probes", probes},
                     {"failures", result.failures}};
    std::ofstream rj(out / "report.json");
    rj << result.report.dump(2) << '\n';
    if (!result.failures.empty()) {
        result.exit_code = kExitCheckFailed;
        write_failures();
    }
    return result;
}

inline RunConfig load_run_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open config " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError("config is not valid JSON: " + std::string(e.what()));
    }
    return parse_run_config(j);
}

// ---------------------------------------------------------------------------
// Stationary solves
//
// {"grid": {...}, "theta0": number | "matched",
//  "boundary": {"kind": "quadratic", "A": [[...]], "b": [...], "c": 0}
//            | {"kind": "file", "path": "..."},
//  "newton": {"max_iters": 50, "tolerance": 1e-10}, "output_dir": "..."}

struct StationaryConfig {
    GridSpec grid;
    double theta0 = 0.0;
    std::optional<QuadraticFit> quadratic;  // closed-form boundary data, when given
    std::string boundary_path;
    StationaryOptions options;
    std::filesystem::path output_dir = "lmcf_stationary";
};

inline StationaryConfig parse_stationary_config(const nlohmann::json& j) {
    StationaryConfig c;
    try {
        const auto& g = j.at("grid");
        c.grid = GridSpec(g.at("dim").get<int>(), g.at("half_width").get<double>(), g.at("nodes_per_axis").get<int>());
        const int n = c.grid.dim();
        const auto& b = j.at("boundary");
        const auto kind = b.value("kind", std::string("quadratic"));
        if (kind == "quadratic") {
            QuadraticFit q;
            q.A = matrix_from_json(b.at("A"), n);
            if (b.contains("b")) {
                const auto lin = b.at("b").get<std::vector<double>>();
                if (static_cast<int>(lin.size()) != n) throw ValidationError("boundary b has the wrong length");
                for (int i = 0; i < n; ++i) q.linear[static_cast<std::size_t>(i)] = lin[static_cast<std::size_t>(i)];
            }
            q.constant = b.value("c", 0.0);
            c.quadratic = q;
        } else if (kind == "file") {
            c.boundary_path = b.at("path").get<std::string>();
        } else {
            throw ValidationError("unknown boundary kind '" + kind + "'");
        }
        const auto& t = j.contains("theta0") ? j.at("theta0") : nlohmann::json("matched");
        if (t.is_string()) {
            if (t.get<std::string>() != "matched" || !c.quadratic)
                throw ValidationError("theta0 = \"matched\" needs quadratic boundary data");
            c.theta0 = lagrangian_angle(eigen_sym(c.quadratic->A));
        } else {
            c.theta0 = t.get<double>();
        }
        if (!(std::abs(c.theta0) < n * std::numbers::pi / 2.0)) throw ValidationError("|theta0| must be below n pi / 2");
        const auto nw = j.value("newton", nlohmann::json::object());
        c.options.max_iters = nw.value("max_iters", c.options.max_iters);
        c.options.tolerance = nw.value("tolerance", c.options.tolerance);
        c.output_dir = j.value("output_dir", std::string("lmcf_stationary"));
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("malformed stationary config: ") + e.what());
    } catch (const ConfigError& e) {
        throw ValidationError(std::string("invalid grid: ") + e.what());
    }
    return c;
}

/// Writes solution.bin, solution.json (Newton history, and the max error
/// against the boundary quadratic when theta0 matches it).
inline RunResult run_stationary(const StationaryConfig& c) {
    RunResult result;
    BoundaryData bd;
    ScalarField frozen(c.grid);
    if (c.quadratic) {
        const auto q = *c.quadratic;
        bd = [q](const Point& x) { return q(x); };
    } else {
        try {
            frozen = read_raw_field(c.boundary_path, c.grid);
        } catch (const Error& e) {
            result.exit_code = kExitInvalidConfig;
            result.failures.push_back(e.what());
            return result;
        }
        bd = [&frozen](const Point& x) { return *detail::interpolate(frozen, x); };
    }
    std::filesystem::create_directories(c.output_dir);
    try {
        const auto sol = solve_stationary_detailed(c.theta0, bd, c.grid, c.options);
        write_raw_field(sol.u, c.output_dir / "solution.bin");
        result.report = {{"grid", grid_to_json(c.grid)},
                         {"theta0", c.theta0},
                         {"iterations", sol.iterations},
                         {"residual_history", sol.residual_history},
                         {"sha256", sha256_hex(encode_le(sol.u))}};
        if (c.quadratic && std::abs(c.theta0 - lagrangian_angle(eigen_sym(c.quadratic->A))) < 1e-15) {
            double err = 0.0;
            for (std::size_t p = 0; p < sol.u.size(); ++p)
                err = std::max(err, std::abs(sol.u.values[p] - (*c.quadratic)(c.grid.position(p))));
            result.report["max_error_vs_quadratic"] = err;
        }
    } catch (const SolverError& e) {
        result.exit_code = kExitStageError;
        result.failures.push_back(e.what());
        result.report = {{"error", e.what()}, {"residual_history", e.residual_history()}};
    } catch (const Error& e) {
        result.exit_code = kExitStageError;
        result.failures.push_back(e.what());
        result.report = {{"error", e.what()}};
    }
    std::ofstream(c.output_dir / "solution.json") << result.report.dump(2) << '\n';
    return result;
}

}  // namespace lmcf
