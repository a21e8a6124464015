#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "bsdelab/bsde.hpp"
#include "bsdelab/config.hpp"
#include "bsdelab/errors.hpp"
#include "bsdelab/pricing.hpp"
#include "bsdelab/report.hpp"
#include "bsdelab/utility.hpp"
#include "bsdelab/validation.hpp"

namespace {

using namespace bsdelab;

struct Session {
    ExperimentConfig cfg;
    TimeGrid grid;
    PathBundle bundle;
    RegressionBasis basis;
    std::vector<double> state0;
    double r0 = 0.0;
    Eigen::VectorXd theta0;

    explicit Session(ExperimentConfig config)
        : cfg(std::move(config)),
          grid(make_time_grid(cfg.horizon, cfg.steps)),
          bundle(sample_brownian(grid, cfg.model.n, cfg.paths, cfg.seed)),
          basis(RegressionBasis::log_price_monomials(cfg.degree, cfg.model.initial_prices)) {
        state0.assign(cfg.model.d + 1, 1.0);
        for (std::size_t i = 0; i < cfg.model.d; ++i) {
            state0[i + 1] = cfg.model.initial_prices(static_cast<Eigen::Index>(i));
        }
        r0 = cfg.model.rate(0.0, state0);
        theta0 = cfg.model.risk_premium_at(0.0, state0);
    }
};

std::vector<ResultRow> run_price(const Session& s) {
    PriceReport fair = fair_price(*s.cfg.claim, s.cfg.model, s.bundle, s.basis);
    PriceReport emm = emm_price(*s.cfg.claim, s.cfg.model, s.bundle);
    std::vector<ResultRow> rows{{"price", fair.price, fair.std_error, fair.method},
                                {"emm_price", emm.price, emm.std_error, emm.method}};
    if (fair.hedge) {
        ReplayReport replay = hedge_replay(fair, *s.cfg.claim, s.cfg.model, s.bundle);
        rows.push_back({"hedge_rmse", replay.rmse, 0.0, "self-financing-replay"});
    }
    return rows;
}

std::vector<ResultRow> run_borrow_price(const Session& s) {
    double borrow_rate = *s.cfg.borrow_rate;
    ScalarField borrow = [borrow_rate](double, std::span<const double>) { return borrow_rate; };
    PriceReport primal = borrowing_price(*s.cfg.claim, s.cfg.model, borrow, s.bundle, s.basis);
    std::vector<double> beta_grid = uniform_beta_grid(s.r0, borrow_rate, s.cfg.beta_points);
    PriceReport dual =
        borrowing_price_dual(*s.cfg.claim, s.cfg.model, borrow, beta_grid, s.bundle);
    return {{"price", primal.price, primal.std_error, primal.method},
            {"dual_price", dual.price, dual.std_error, dual.method},
            {"dual_argmax_beta", dual.dual->argmax_beta, 0.0, dual.method}};
}

std::vector<ResultRow> run_utility(const Session& s) {
    UtilityReport direct =
        log_utility_value(s.cfg.initial_wealth, s.cfg.model, *s.cfg.constraint, s.bundle);
    double via_solver = log_utility_value_solver(s.cfg.initial_wealth, s.cfg.model,
                                                 *s.cfg.constraint, s.bundle, s.basis);
    return {{"utility_value", direct.value, direct.std_error, "driver-mc"},
            {"utility_value_solver", via_solver, 0.0, "regression-bsde"}};
}

std::vector<ResultRow> run_solve(const Session& s) {
    const Payoff& terminal = s.cfg.claim->payoff;
    PriceReport fair = fair_price(*s.cfg.claim, s.cfg.model, s.bundle, s.basis);

    double r0 = s.r0;
    Eigen::VectorXd theta0 = s.theta0;
    LinearDriverSpec spec;
    spec.intercept = [](double, std::span<const double>) { return 0.0; };
    spec.slope_y = [r0](double, std::span<const double>) { return -r0; };
    spec.slope_z = [theta0](double, std::span<const double>, std::span<double> out) {
        for (Eigen::Index j = 0; j < theta0.size(); ++j) out[j] = -theta0(j);
    };
    spec.slope_y_bound = std::abs(r0);
    spec.slope_z_bound = theta0.norm();
    BsdeSolution linear = solve_linear(spec, terminal, s.cfg.model, s.bundle, s.basis);

    BsdeProblem problem;
    problem.terminal = terminal;
    problem.lipschitz = std::max(std::abs(r0), theta0.norm());
    problem.driver = [r0, theta0](double, std::span<const double>, double y,
                                  std::span<const double> z) {
        double tz = 0.0;
        for (Eigen::Index j = 0; j < theta0.size(); ++j) tz += theta0(j) * z[j];
        return -r0 * y - tz;
    };
    BsdeSolution euler = solve_backward_euler(problem, s.cfg.model, s.bundle, s.basis);

    PicardConfig picard_config;
    double c = problem.lipschitz;
    picard_config.beta_weight = 4.0 * (2.0 + s.cfg.horizon) * c * c + 1.0;
    BsdeSolution picard = solve_picard(problem, s.cfg.model, s.bundle, s.basis, picard_config);

    return {{"price", fair.price, fair.std_error, fair.method},
            {"y0_linear", linear.y.at(0, 0), 0.0, "linear-adjoint"},
            {"y0_euler", euler.y.at(0, 0), 0.0, "backward-euler"},
            {"y0_picard", picard.y.at(0, 0), 0.0, "picard"},
            {"picard_iterations", static_cast<double>(picard.diagnostics.iterations), 0.0,
             "picard"}};
}

int run_validate(const ExperimentConfig& cfg, std::vector<ResultRow>& rows) {
    ValidationReport report = run_validation_suite(cfg);
    for (const CheckResult& check : report.checks) {
        std::cout << (check.passed ? "[PASS] " : "[FAIL] ") << check.name
                  << ": measured " << format_double(check.measured) << ", allowed "
                  << format_double(check.allowed);
        if (!check.detail.empty()) std::cout << " -- " << check.detail;
        std::cout << "\n";
        rows.push_back({check.name, check.measured, 0.0, check.passed ? "pass" : "fail"});
    }
    if (report.numerical_failure) return 3;
    return report.all_passed() ? 0 : 1;
}

int execute(bool force_validate, const std::string& config_path,
            const ConfigOverrides& overrides) {
    ExperimentConfig cfg = load_config(config_path);
    apply_overrides(cfg, overrides);

    auto start = std::chrono::steady_clock::now();
    std::vector<ResultRow> rows;
    int exit_code = 0;
    if (force_validate || cfg.kind == ExperimentKind::Validate) {
        exit_code = run_validate(cfg, rows);
    } else {
        Session session(std::move(cfg));
        switch (session.cfg.kind) {
            case ExperimentKind::Price: rows = run_price(session); break;
            case ExperimentKind::BorrowPrice: rows = run_borrow_price(session); break;
            case ExperimentKind::Utility: rows = run_utility(session); break;
            case ExperimentKind::Solve: rows = run_solve(session); break;
            case ExperimentKind::Validate: break;  // handled above
        }
        for (const ResultRow& row : rows) {
            std::cout << row.name << " = " << format_double(row.value);
            if (row.std_error != 0.0) std::cout << " +/- " << format_double(row.std_error);
            std::cout << "  [" << row.method << "]\n";
        }
        cfg = std::move(session.cfg);
    }
    double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    std::filesystem::path out_dir(cfg.out_dir);
    std::filesystem::create_directories(out_dir);
    write_text_file((out_dir / "results.csv").string(), results_csv(rows));
    write_text_file((out_dir / "summary.txt").string(), summary_text(cfg.echo, rows, wall));
    std::cout << "wrote " << (out_dir / "results.csv").string() << " and "
              << (out_dir / "summary.txt").string() << "\n";
    return exit_code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"BSDE laboratory: pricing, borrowing-rate duality, and portfolio "
                 "experiments driven by flat config files"};
    app.require_subcommand(1);

    std::string config_path;
    std::uint64_t seed = 0;
    std::uint64_t paths = 0;
    std::uint64_t steps = 0;
    std::string out_dir;

    CLI::App* commands[2] = {
        app.add_subcommand("run", "run the configured experiment"),
        app.add_subcommand("validate", "run the cross-module invariant suite"),
    };
    for (CLI::App* cmd : commands) {
        cmd->add_option("config", config_path, "configuration file")->required();
        cmd->add_option("--seed", seed, "override run.seed");
        cmd->add_option("--paths", paths, "override run.paths");
        cmd->add_option("--steps", steps, "override run.steps");
        cmd->add_option("--out", out_dir, "override the output directory");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    CLI::App* active = app.get_subcommands().front();
    ConfigOverrides overrides;
    if (active->count("--seed") > 0) overrides.seed = seed;
    if (active->count("--paths") > 0) overrides.paths = static_cast<std::size_t>(paths);
    if (active->count("--steps") > 0) overrides.steps = static_cast<std::size_t>(steps);
    if (active->count("--out") > 0) overrides.out_dir = out_dir;

    try {
        return execute(active->get_name() == "validate", config_path, overrides);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    }
}
