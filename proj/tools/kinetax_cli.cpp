// kinetax: command-line workbench for the kinetic taxation/audit model.
//
//   kinetax simulate     --config <path|preset> [--sigma s] [--xi x] [--mu m] [--out dir]
//   kinetax sweep        --config <path|preset> --sigma-list a,b,.. --xi-list a,b,.. [--workers k] [--out dir]
//   kinetax fit          --table <sweep.csv> --metric gini|tr [--out dir]
//   kinetax invert       --fit <fit.json> --target C (--sigma s | --xi x)
//   kinetax paper-tables --scenario 1|2 [--workers k] [--out dir]
//
// Exit status: 0 success, 1 non-convergence or failed tolerance, 2 usage or input error.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "kinetax/calibration.hpp"
#include "kinetax/config_io.hpp"
#include "kinetax/dynamics.hpp"
#include "kinetax/kinetic_core.hpp"
#include "kinetax/metrics.hpp"
#include "kinetax/output.hpp"
#include "kinetax/tables.hpp"

namespace fs = std::filesystem;
using namespace kinetax;

namespace {

constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

class UsageError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Parses "0.1,2/56,0.25" into numbers; fractions a/b are allowed.
std::vector<double> parse_list(const std::string& text, const std::string& flag) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        const auto slash = item.find('/');
        try {
            std::size_t used = 0;
            if (slash == std::string::npos) {
                out.push_back(std::stod(item, &used));
                if (used != item.size()) throw std::invalid_argument(item);
            } else {
                const std::string num = item.substr(0, slash), den = item.substr(slash + 1);
                std::size_t u1 = 0, u2 = 0;
                const double a = std::stod(num, &u1), b = std::stod(den, &u2);
                if (u1 != num.size() || u2 != den.size() || b == 0.0) throw std::invalid_argument(item);
                out.push_back(a / b);
            }
        } catch (const std::exception&) {
            throw UsageError(flag + ": cannot parse '" + item + "'");
        }
    }
    if (out.empty()) throw UsageError(flag + ": list is empty");
    return out;
}

fs::path prepare_dir(const std::string& dir) {
    fs::path p(dir);
    fs::create_directories(p);
    return p;
}

void write_json(const fs::path& path, const nlohmann::ordered_json& j) {
    std::ofstream out(path);
    out << j.dump(2) << "\n";
}

void print_warnings(const RunConfig& cfg) {
    for (const auto& w : cfg.warnings) std::cerr << "warning: " << w << "\n";
}

struct SimulateArgs {
    std::string config = "paper.default";
    std::string out;
    std::optional<double> sigma, xi, mu;
};

int cmd_simulate(const SimulateArgs& a) {
    RunConfig cfg = load_config(a.config);
    if (a.sigma) cfg.enforcement.sigma = *a.sigma;
    if (a.xi) cfg.enforcement.xi = *a.xi;
    if (a.mu) cfg.mu = *a.mu;
    if (!a.out.empty()) cfg.output.directory = a.out;
    cfg.validate();
    print_warnings(cfg);

    const TransitionTensors t = build_tensors(cfg.model, cfg.enforcement);
    Trajectory traj;
    const EquilibriumResult eq = find_steady_state(make_audit_system(t, cfg.enforcement),
                                                   make_initial_condition(cfg.model, cfg.mu), cfg.integrator, &traj);
    const MetricsReport metrics = compute_metrics(eq.state, t, cfg.enforcement);

    const fs::path dir = prepare_dir(cfg.output.directory);
    if (cfg.output.wants("csv")) {
        std::ofstream tcsv(dir / "trajectory.csv");
        write_trajectory_csv(tcsv, traj);
        std::ofstream lcsv(dir / "lorenz.csv");
        write_lorenz_csv(lcsv, lorenz(eq.state, t.r));
    }
    if (cfg.output.wants("json")) write_json(dir / "equilibrium.json", equilibrium_json(cfg.mu, cfg.enforcement, eq, metrics));

    std::cout << "converged=" << (eq.converged ? "true" : "false") << " t_final=" << fmt9(eq.t_final)
              << " residual=" << fmt9(eq.residual) << " gini=" << fmt9(metrics.gini)
              << " tax_revenue=" << fmt9(metrics.tax_revenue) << "\n";
    return eq.converged ? 0 : kExitFailure;
}

struct SweepArgs {
    std::string config = "paper.default";
    std::string out;
    std::string sigma_list, xi_list;
    std::optional<double> mu;
    std::size_t workers = 1;
};

int cmd_sweep(const SweepArgs& a) {
    const auto sigmas = parse_list(a.sigma_list, "--sigma-list");
    const auto xis = parse_list(a.xi_list, "--xi-list");
    RunConfig cfg = load_config(a.config);
    if (a.mu) cfg.mu = *a.mu;
    if (!a.out.empty()) cfg.output.directory = a.out;
    cfg.validate();
    print_warnings(cfg);

    const SweepTable table = sweep(cfg.model, cfg.mu, sigmas, xis, cfg.integrator, a.workers, a.config);
    const fs::path dir = prepare_dir(cfg.output.directory);
    std::ofstream csv(dir / "sweep.csv");
    write_sweep_csv(csv, table);
    std::cout << "rows=" << table.rows.size() << " fit_eligible=" << (table.fit_eligible() ? "true" : "false")
              << " -> " << (dir / "sweep.csv").string() << "\n";
    return table.fit_eligible() ? 0 : kExitFailure;
}

struct FitArgs {
    std::string table;
    std::string metric = "tr";
    std::string out = "out";
};

int cmd_fit(const FitArgs& a) {
    std::ifstream in(a.table);
    if (!in) throw UsageError("--table: cannot read '" + a.table + "'");
    const SweepTable table = read_sweep_csv(in);
    const Metric metric = parse_metric(a.metric);
    const FitCoefficients fit = bilinear_fit(table, metric);

    const fs::path dir = prepare_dir(a.out);
    write_json(dir / "fit.json", fit_json(fit));

    // Curvature and axis-transposition diagnostics; informational only.
    nlohmann::ordered_json diag;
    const auto data = samples(table, metric);
    if (data.size() >= 6) {
        try {
            const QuadraticFit q = quadratic_fit(data);
            diag["quadratic"] = {{"a0", round9(q.a0)},   {"a10", round9(q.a10)}, {"a01", round9(q.a01)},
                                 {"a11", round9(q.a11)}, {"a20", round9(q.a20)}, {"a02", round9(q.a02)},
                                 {"fit_residual_max", round9(q.fit_residual_max)}};
        } catch (const FitError& e) {
            diag["quadratic"] = e.what();
        }
    }
    if (table.sigmas.size() == table.xis.size() && table.rows.size() == table.sigmas.size() * table.xis.size()) {
        const auto tdata = transposed_samples(table, metric);
        diag["transposed"] = fit_json(bilinear_fit(tdata, metric_name(metric)));
    }
    write_json(dir / "fit_diagnostics.json", diag);

    std::cout << "f(xi,sigma) = " << fmt9(fit.a0) << " + " << fmt9(fit.a10) << "*xi + " << fmt9(fit.a01)
              << "*sigma + " << fmt9(fit.a11) << "*xi*sigma  (max residual " << fmt9(fit.fit_residual_max) << ")\n";
    return 0;
}

struct InvertArgs {
    std::string fit;
    std::optional<double> target, sigma, xi;
};

int cmd_invert(const InvertArgs& a) {
    if (!a.target) throw UsageError("--target is required");
    if (a.sigma.has_value() == a.xi.has_value()) throw UsageError("give exactly one of --sigma or --xi");
    std::ifstream in(a.fit);
    if (!in) throw UsageError("--fit: cannot read '" + a.fit + "'");
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(std::string("fit json: ") + e.what());
    }
    const FitCoefficients fit = parse_fit_json(j);

    InversionResult res;
    double sigma = 0.0, xi = 0.0;
    if (a.sigma) {
        sigma = *a.sigma;
        res = xi_for_target(fit, *a.target, sigma);
        xi = res.value;
        std::cout << "xi=" << fmt9(res.value);
    } else {
        xi = *a.xi;
        res = sigma_for_target(fit, *a.target, xi);
        sigma = res.value;
        std::cout << "sigma=" << fmt9(res.value);
    }
    std::cout << "\nformula: " << res.formula << "\nforward: f(xi=" << fmt9(xi) << ", sigma=" << fmt9(sigma)
              << ") = " << fmt9(fit(xi, sigma)) << "\n";
    if (res.warning) std::cout << "warning: " << *res.warning << "\n";
    return 0;
}

struct TablesArgs {
    int scenario = 1;
    std::string out = "out";
    std::size_t workers = 1;
};

int cmd_paper_tables(const TablesArgs& a) {
    if (a.scenario != 1 && a.scenario != 2) throw UsageError("--scenario: expected 1 or 2");
    const TableReproduction rep = reproduce_table(a.scenario, IntegratorSettings{}, a.workers);
    const fs::path dir = prepare_dir(a.out);
    const std::string tag = std::to_string(a.scenario);
    {
        std::ofstream report(dir / ("table" + tag + "_report.csv"));
        write_table_report(report, rep);
        std::ofstream csv(dir / ("table" + tag + "_sweep.csv"));
        write_sweep_csv(csv, rep.sweep);
    }
    std::size_t failed = 0;
    for (const auto& c : rep.comparisons)
        if (!c.pass) {
            ++failed;
            std::cout << "FAIL " << c.quantity << ": computed " << fmt9(c.computed) << " reference "
                      << fmt9(c.reference) << "\n";
        }
    std::cout << "scenario " << tag << ": " << rep.comparisons.size() - failed << "/" << rep.comparisons.size()
              << " comparisons within tolerance, converged=" << (rep.all_converged ? "true" : "false") << " -> "
              << (dir / ("table" + tag + "_report.csv")).string() << "\n";
    return rep.pass() ? 0 : kExitFailure;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"kinetax: kinetic income-distribution model with tax evasion, audits and fines"};
    app.require_subcommand(1);

    SimulateArgs sim;
    auto* simulate = app.add_subcommand("simulate", "Integrate to the stationary distribution and report metrics");
    simulate->add_option("--config", sim.config, "Config file or preset name")->capture_default_str();
    simulate->add_option("--out", sim.out, "Output directory (overrides config)");
    simulate->add_option("--sigma", sim.sigma, "Audited fraction");
    simulate->add_option("--xi", sim.xi, "Fine multiplier");
    simulate->add_option("--mu", sim.mu, "Mean income of the initial condition");

    SweepArgs sw;
    auto* sweep_cmd = app.add_subcommand("sweep", "Steady states over a (sigma, xi) grid");
    sweep_cmd->add_option("--config", sw.config, "Config file or preset name")->capture_default_str();
    sweep_cmd->add_option("--out", sw.out, "Output directory (overrides config)");
    sweep_cmd->add_option("--sigma-list", sw.sigma_list, "Comma-separated sigma values (a/b allowed)")->required();
    sweep_cmd->add_option("--xi-list", sw.xi_list, "Comma-separated xi values")->required();
    sweep_cmd->add_option("--mu", sw.mu, "Mean income of the initial condition");
    sweep_cmd->add_option("--workers", sw.workers, "Worker threads")->check(CLI::PositiveNumber);

    FitArgs ft;
    auto* fit_cmd = app.add_subcommand("fit", "Least-squares bilinear surface over a sweep table");
    fit_cmd->add_option("--table", ft.table, "Sweep CSV")->required();
    fit_cmd->add_option("--metric", ft.metric, "gini or tr")->check(CLI::IsMember({"gini", "tr", "tax_revenue"}));
    fit_cmd->add_option("--out", ft.out, "Output directory")->capture_default_str();

    InvertArgs inv;
    auto* invert_cmd = app.add_subcommand("invert", "Solve the fitted surface for sigma or xi at a target value");
    invert_cmd->add_option("--fit", inv.fit, "Fit JSON")->required();
    invert_cmd->add_option("--target", inv.target, "Target value C")->required();
    invert_cmd->add_option("--sigma", inv.sigma, "Fixed sigma (solve for xi)");
    invert_cmd->add_option("--xi", inv.xi, "Fixed xi (solve for sigma)");

    TablesArgs tb;
    auto* tables_cmd = app.add_subcommand("paper-tables", "Reproduce a reference scenario table and compare");
    tables_cmd->add_option("--scenario", tb.scenario, "1 or 2")->required();
    tables_cmd->add_option("--out", tb.out, "Output directory")->capture_default_str();
    tables_cmd->add_option("--workers", tb.workers, "Worker threads")->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }

    try {
        if (simulate->parsed()) return cmd_simulate(sim);
        if (sweep_cmd->parsed()) return cmd_sweep(sw);
        if (fit_cmd->parsed()) return cmd_fit(ft);
        if (invert_cmd->parsed()) return cmd_invert(inv);
        if (tables_cmd->parsed()) return cmd_paper_tables(tb);
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const ConstraintError& e) {
        std::cerr << "constraint error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const SingularInversionError& e) {
        std::cerr << "inversion error: " << e.what() << "\n";
        return kExitFailure;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitFailure;
    }
    return kExitUsage;
}
