// lmcf: simulate, verify, rescale and probe graphical Lagrangian mean
// curvature flow trajectories. Run `lmcf --help` for the subcommands.

#include <cmath>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "lmcf/lmcf.hpp"

namespace {

lmcf::Point parse_point(const std::string& s, int dim) {
    lmcf::Point p{};
    if (s.empty()) return p;
    std::stringstream ss(s);
    std::string item;
    int k = 0;
    while (std::getline(ss, item, ',')) {
        if (k >= dim) throw lmcf::ConfigError("--x0 has more than " + std::to_string(dim) + " components");
        p[static_cast<std::size_t>(k++)] = std::stod(item);
    }
    if (k != dim) throw lmcf::ConfigError("--x0 needs " + std::to_string(dim) + " comma-separated components");
    return p;
}

nlohmann::json read_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw lmcf::ValidationError("cannot open " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw lmcf::ValidationError(path + " is not valid JSON: " + e.what());
    }
    return j;
}

struct VerifyArgs {
    std::string check;
    std::string traj;
    double R = NAN;
    double M = NAN;
    double alpha = NAN, gamma = NAN, K = 1.0;
    std::string policy = "weaker";
    double mask_radius = 0.8;
    double c1 = 10.0, c2 = 10.0;
    std::size_t samples = 1000000;
    std::uint64_t seed = 1;
    double tolerance = NAN;
};

int do_verify(const VerifyArgs& a) {
    using namespace lmcf;
    const auto traj = load_trajectory(a.traj);
    const int n = traj.grid.dim();
    const ToleranceSchedule tol{a.c1, a.c2};
    EstimateReport rep;
    if (a.check == "jacobi") {
        rep = check_jacobi(traj, make_ball_mask(traj.grid, a.mask_radius), tol);
    } else if (a.check == "height") {
        rep = height_bound_check(traj, std::isnan(a.R) ? 3.0 : a.R, tol);
    } else if (a.check == "gradient") {
        const double R = std::isnan(a.R) ? 1.0 : a.R;
        const double M = std::isnan(a.M)
                             ? oscillation(traj.snapshots.front(), make_ball_mask(traj.grid, 2.0 * R + 1.0).member_nodes)
                             : a.M;
        rep = gradient_bound_check(traj, R, M, tol);
    } else if (a.check == "hessian") {
        const auto mc = main_constant(n);
        const KorevaarParams p{std::isnan(a.alpha) ? mc.alpha : a.alpha, std::isnan(a.gamma) ? mc.gamma : a.gamma, a.K};
        validate(p, n);
        rep = hessian_bound_check(traj, p, a.policy == "stricter" ? ConstantPolicy::stricter : ConstantPolicy::weaker);
    } else if (a.check == "barrier") {
        rep = detail::barrier_report(n, std::isnan(a.R) ? 3.0 * std::sqrt(double(n)) : a.R, a.samples, a.seed);
    } else if (a.check == "monotone") {
        rep = theta_monotonicity_check(traj, std::isnan(a.tolerance) ? monotonicity_tolerance(traj) : a.tolerance);
    }
    std::cout << to_json(rep, n).dump(2) << '\n';
    return rep.status == Status::fail ? kExitCheckFailed : kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Graphical Lagrangian mean curvature flow laboratory"};
    app.require_subcommand(1);

    std::string config, out;
    auto* simulate = app.add_subcommand("simulate", "run a JSON-configured simulation and its checks");
    simulate->add_option("--config", config, "run config (JSON)")->required()->check(CLI::ExistingFile);
    simulate->add_option("--out", out, "output directory (overrides output_dir)");

    VerifyArgs va;
    auto* verify = app.add_subcommand("verify", "run one estimate check on a saved trajectory");
    verify->add_option("check", va.check)
        ->required()
        ->check(CLI::IsMember({"jacobi", "height", "gradient", "hessian", "barrier", "monotone"}));
    verify->add_option("--traj", va.traj)->required()->check(CLI::ExistingDirectory);
    verify->add_option("--R", va.R, "ball radius");
    verify->add_option("--M", va.M, "oscillation bound (default: measured on B_{2R+1} at t0)");
    verify->add_option("--alpha", va.alpha);
    verify->add_option("--gamma", va.gamma);
    verify->add_option("--K", va.K);
    verify->add_option("--policy", va.policy)->check(CLI::IsMember({"weaker", "stricter"}));
    verify->add_option("--mask-radius", va.mask_radius);
    verify->add_option("--c1", va.c1, "tolerance c1 h^2");
    verify->add_option("--c2", va.c2, "tolerance c2 dt");
    verify->add_option("--samples", va.samples, "barrier sample count");
    verify->add_option("--seed", va.seed);
    verify->add_option("--tolerance", va.tolerance, "monotonicity tolerance");

    int cn = 2;
    double c_alpha = NAN, c_gamma = NAN, c_K = NAN;
    auto* constants = app.add_subcommand("constants", "print gamma(n) and the Hessian bound constants as JSON");
    constants->add_option("--n", cn)->required()->check(CLI::Range(1, 64));
    constants->add_option("--alpha", c_alpha);
    constants->add_option("--gamma", c_gamma);
    constants->add_option("--K", c_K);

    std::string r_traj, r_out, r_x0;
    double r_lambda = 1.0;
    double r_half_width = NAN;
    auto* rescale_cmd = app.add_subcommand("rescale", "write u(lambda (x - x0), lambda^2 t) / lambda^2");
    rescale_cmd->add_option("--traj", r_traj)->required()->check(CLI::ExistingDirectory);
    rescale_cmd->add_option("--lambda", r_lambda)->required();
    rescale_cmd->add_option("--x0", r_x0, "comma-separated point (default: origin)");
    rescale_cmd->add_option("--out", r_out)->required();
    rescale_cmd->add_option("--half-width", r_half_width, "target grid half width (default: largest that fits)");

    std::string p_kind, p_traj, p_csv;
    double p_R0 = 1.0, p_mask = NAN;
    auto* probe = app.add_subcommand("probe", "growth ratio or quadratic-fit probes");
    probe->add_option("kind", p_kind)->required()->check(CLI::IsMember({"growth", "quadfit"}));
    probe->add_option("--traj", p_traj)->required()->check(CLI::ExistingDirectory);
    probe->add_option("--R0", p_R0);
    probe->add_option("--mask-radius", p_mask);
    probe->add_option("--csv", p_csv, "growth: also write t,ratio,threshold to this file");

    std::string s_config, s_out;
    auto* stationary = app.add_subcommand("stationary", "Newton solve of the special Lagrangian Dirichlet problem");
    stationary->add_option("--config", s_config)->required()->check(CLI::ExistingFile);
    stationary->add_option("--out", s_out);

    CLI11_PARSE(app, argc, argv);

    try {
        if (*simulate) {
            lmcf::RunConfig cfg;
            try {
                cfg = lmcf::parse_run_config(read_json(config));
            } catch (const lmcf::ValidationError& e) {
                std::cerr << "validation error: " << e.what() << '\n';
                return lmcf::kExitInvalidConfig;
            }
            if (!out.empty()) cfg.output_dir = out;
            const auto res = lmcf::run(cfg);
            for (const auto& f : res.failures) std::cerr << "FAIL " << f << '\n';
            if (res.exit_code == lmcf::kExitOk) std::cout << "all checks as expected; outputs in " << cfg.output_dir << '\n';
            return res.exit_code;
        }
        if (*verify) return do_verify(va);
        if (*constants) {
            auto j = lmcf::to_json(lmcf::main_constant(cn));
            if (!std::isnan(c_alpha) || !std::isnan(c_gamma) || !std::isnan(c_K)) {
                const auto mc = lmcf::main_constant(cn);
                const lmcf::KorevaarParams p{std::isnan(c_alpha) ? mc.alpha : c_alpha,
                                             std::isnan(c_gamma) ? mc.gamma : c_gamma, std::isnan(c_K) ? 1.0 : c_K};
                j["custom"] = {{"alpha", p.alpha},
                               {"gamma", p.gamma},
                               {"K", p.K},
                               {"C_hb", lmcf::hessian_bound_constant(cn, p)},
                               {"C_printed", lmcf::hessian_bound_constant_printed(cn, p)}};
            }
            std::cout << j.dump(2) << '\n';
            return 0;
        }
        if (*rescale_cmd) {
            const auto traj = lmcf::load_trajectory(r_traj);
            const int n = traj.grid.dim();
            const auto x0 = parse_point(r_x0, n);
            lmcf::GridSpec target = lmcf::aligned_target_grid(traj.grid, r_lambda);
            double shift = 0.0;
            for (int k = 0; k < n; ++k) shift = std::max(shift, std::abs(x0[static_cast<std::size_t>(k)]));
            if (!std::isnan(r_half_width))
                target = lmcf::GridSpec(n, r_half_width, traj.grid.nodes_per_axis());
            else if (shift > 0.0)
                target = lmcf::GridSpec(n, traj.grid.half_width() / r_lambda - shift, traj.grid.nodes_per_axis());
            const auto scaled = lmcf::rescale(traj, lmcf::RescaleSpec{r_lambda, x0}, target);
            lmcf::save_trajectory(scaled, r_out);
            std::cout << "wrote " << scaled.size() << " snapshots to " << r_out << '\n';
            return 0;
        }
        if (*probe) {
            const auto traj = lmcf::load_trajectory(p_traj);
            if (p_kind == "growth") {
                const auto mask = lmcf::make_ball_mask(traj.grid, std::isnan(p_mask) ? traj.grid.half_width() : p_mask);
                const auto g = lmcf::growth_ratio(traj, p_R0, mask);
                std::cout << lmcf::to_json(g).dump(2) << '\n';
                if (!p_csv.empty()) {
                    std::ofstream f(p_csv);
                    lmcf::write_growth_csv(g, f);
                }
            } else {
                const auto mask = lmcf::make_ball_mask(traj.grid, std::isnan(p_mask) ? 1.0 : p_mask);
                nlohmann::json series = nlohmann::json::array();
                for (std::size_t k = 0; k < traj.size(); ++k) {
                    auto j = lmcf::to_json(lmcf::quadratic_fit(traj.snapshots[k], mask));
                    j["t"] = traj.times[k];
                    series.push_back(j);
                }
                std::cout << series.dump(2) << '\n';
            }
            return 0;
        }
        if (*stationary) {
            lmcf::StationaryConfig sc;
            try {
                sc = lmcf::parse_stationary_config(read_json(s_config));
            } catch (const lmcf::ValidationError& e) {
                std::cerr << "validation error: " << e.what() << '\n';
                return lmcf::kExitInvalidConfig;
            }
            if (!s_out.empty()) sc.output_dir = s_out;
            const auto res = lmcf::run_stationary(sc);
            for (const auto& f : res.failures) std::cerr << "FAIL " << f << '\n';
            std::cout << res.report.dump(2) << '\n';
            return res.exit_code;
        }
    } catch (const lmcf::ValidationError& e) {
        std::cerr << "validation error: " << e.what() << '\n';
        return lmcf::kExitInvalidConfig;
    } catch (const lmcf::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return lmcf::kExitStageError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return lmcf::kExitStageError;
    }
    return 0;
}
