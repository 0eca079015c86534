#include "cli/cli.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "airob/attack.hpp"
#include "airob/design.hpp"
#include "airob/distributions.hpp"
#include "airob/errors.hpp"
#include "airob/l_estimator.hpp"
#include "airob/m_estimator.hpp"
#include "airob/population.hpp"

namespace airob::cli {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

constexpr const char* kVersion = "0.1.0";

bool ends_with(const std::string& s, const std::string& suffix) {
    return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

struct ResolvedPsi {
    PsiSpec spec;
    std::optional<DesignedPsi> designed;
};

ResolvedPsi resolve_psi(const RunConfig& cfg) {
    if (cfg.psi.empty()) throw error(errc::invalid_config, "--psi is required for this command");
    if (ends_with(cfg.psi, ".json")) {
        DesignedPsi d = DesignedPsi::load_json(cfg.psi);
        return {d.to_psi_spec(), std::move(d)};
    }
    return {builtin_psi(cfg.psi, cfg.huber_b), std::nullopt};
}

DistributionModel resolve_model(const RunConfig& cfg) {
    if (cfg.model.empty()) throw error(errc::invalid_config, "--model is required for this command");
    return DistributionModel::parse(cfg.model);
}

std::vector<double> require_data(const RunConfig& cfg) {
    if (cfg.data_path.empty()) throw error(errc::invalid_config, "--data is required for this command");
    return ingest(cfg.data_path);
}

json json_finite(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return v;
}

json inputs_echo(const RunConfig& cfg) {
    json in;
    in["command"] = cfg.command;
    in["psi"] = cfg.psi;
    in["b"] = cfg.huber_b;
    in["model"] = cfg.model;
    in["p"] = cfg.p;
    in["eta"] = cfg.eta ? json(*cfg.eta) : json(nullptr);
    in["eta_grid"] = cfg.eta_grid;
    in["xi"] = cfg.xi ? json(*cfg.xi) : json(nullptr);
    in["xi_grid"] = cfg.xi_grid;
    in["n_grid"] = cfg.n_grid;
    in["data"] = cfg.data_path;
    in["weights"] = cfg.weights_path;
    in["alpha"] = cfg.alpha ? json(*cfg.alpha) : json(nullptr);
    in["n"] = cfg.n ? json(*cfg.n) : json(nullptr);
    in["kind"] = cfg.kind;
    in["method"] = cfg.method;
    in["tol"] = cfg.quad_tol;
    in["root_tol"] = cfg.root_tol;
    in["residual_tol"] = cfg.residual_tol;
    return in;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw error(errc::io_error, "cannot write " + path.string());
    out << text;
}

void write_report(const RunConfig& cfg, json results, json diagnostics,
                  std::vector<std::string> artifacts) {
    json report;
    report["schema_version"] = 1;
    report["version"] = kVersion;
    report["command"] = cfg.command;
    report["seed"] = cfg.seed;
    report["inputs"] = inputs_echo(cfg);
    report["results"] = std::move(results);
    report["diagnostics"] = std::move(diagnostics);
    artifacts.insert(artifacts.begin(), "report.json");
    report["artifacts"] = artifacts;
    write_text(fs::path(cfg.out_dir) / "report.json", report.dump(2) + "\n");
}

SolveOptions solve_options(const RunConfig& cfg) {
    SolveOptions opts;
    opts.width_tol = cfg.root_tol;
    opts.residual_tol = cfg.residual_tol;
    return opts;
}

std::string format_row(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

PopulationContext make_population_context(const ResolvedPsi& psi, const DistributionModel& model) {
    if (psi.spec.kind == PsiKind::scale) return PopulationContext::scale(model, psi.spec);
    return PopulationContext::location(model, psi.spec);
}

void cmd_fit(const RunConfig& cfg) {
    ResolvedPsi psi = resolve_psi(cfg);
    const auto data = require_data(cfg);
    const MEstimate est = solve(psi.spec, data, solve_options(cfg));
    json results{{"estimate", est.value}, {"residual", est.residual},
                 {"iterations", est.iterations}};
    json diag{{"bracket_lo", est.bracket_lo}, {"bracket_hi", est.bracket_hi},
              {"n", data.size()}};
    write_report(cfg, results, diag, {});
}

void cmd_attack(const RunConfig& cfg) {
    ResolvedPsi psi = resolve_psi(cfg);
    const auto data = require_data(cfg);
    if (!cfg.eta) throw error(errc::invalid_config, "--eta is required for attack");
    const AttackPlan plan =
        optimal_attack(psi.spec, data, *cfg.eta, NormOrder::parse(cfg.p), solve_options(cfg));
    std::ostringstream delta_csv;
    delta_csv.precision(17);
    for (double d : plan.delta) delta_csv << d << '\n';
    write_text(fs::path(cfg.out_dir) / "delta.csv", delta_csv.str());
    json results{{"predicted_shift", plan.predicted_shift},
                 {"realized_shift", plan.realized_shift},
                 {"argmax_index", plan.argmax_index}};
    write_report(cfg, results, json::object(), {"delta.csv"});
}

void cmd_aif(const RunConfig& cfg) {
    ResolvedPsi psi = resolve_psi(cfg);
    const auto data = require_data(cfg);
    const NormOrder p = NormOrder::parse(cfg.p);
    AifReport report;
    if (!cfg.eta_grid.empty())
        report = aif_finite_eta(psi.spec, data, p, cfg.eta_grid, solve_options(cfg));
    else
        report = aif_empirical(psi.spec, data, p, solve_options(cfg));
    json results{{"aif", json_finite(report.value)},
                 {"method", AifReport::method_name(report.method)}};
    json diag;
    for (const auto& [k, v] : report.diagnostics) diag[k] = json_finite(v);
    if (!report.eta_curve.empty()) {
        json curve = json::array();
        for (const auto& [eta, ratio] : report.eta_curve)
            curve.push_back(json{{"eta", eta}, {"shift_over_eta", ratio}});
        diag["eta_curve"] = curve;
        diag["convergence_warning"] = report.convergence_warning;
    }
    write_report(cfg, results, diag, {});
}

void cmd_aif_pop(const RunConfig& cfg) {
    ResolvedPsi psi = resolve_psi(cfg);
    DistributionModel model = [&] {
        if (!cfg.model.empty()) return resolve_model(cfg);
        if (psi.designed && psi.designed->model) return *psi.designed->model;
        throw error(errc::invalid_config, "aif-pop needs --model (or a designed psi carrying one)");
    }();
    const PopulationContext ctx = make_population_context(psi, model);
    const AifReport report = aif_population(ctx, NormOrder::parse(cfg.p), cfg.quad_tol);
    json results{{"aif", json_finite(report.value)},
                 {"method", AifReport::method_name(report.method)},
                 {"gamma_star", json_finite(gross_error_sensitivity(ctx))},
                 {"fisher_residual", ctx.fisher_residual}};
    json diag;
    for (const auto& [k, v] : report.diagnostics) diag[k] = json_finite(v);
    write_report(cfg, results, diag, {});
}

void cmd_converge(const RunConfig& cfg) {
    ResolvedPsi psi = resolve_psi(cfg);
    DistributionModel model = resolve_model(cfg);
    const PopulationContext ctx = make_population_context(psi, model);
    std::vector<std::size_t> grid = cfg.n_grid;
    if (grid.empty()) grid = {100, 1000, 10000};
    const auto rows = aif_convergence_study(ctx, NormOrder::parse(cfg.p), grid, cfg.seed);
    std::ostringstream csv;
    csv << "N,empirical_aif,population_aif,rel_error\n";
    json jrows = json::array();
    for (const auto& row : rows) {
        csv << row.n << ',' << format_row(row.empirical_aif) << ','
            << format_row(row.population_aif) << ',' << format_row(row.rel_error) << '\n';
        jrows.push_back(json{{"N", row.n},
                             {"empirical_aif", row.empirical_aif},
                             {"population_aif", row.population_aif},
                             {"rel_error", row.rel_error}});
    }
    write_text(fs::path(cfg.out_dir) / "convergence.csv", csv.str());
    write_report(cfg, json{{"rows", jrows}}, json::object(), {"convergence.csv"});
}

void write_design_artifacts(const RunConfig& cfg, const DesignedPsi& design, json extra_results) {
    design.save_json((fs::path(cfg.out_dir) / "psi.json").string());
    std::ostringstream curve;
    curve << "x,psi\n";
    curve.precision(17);
    for (const auto& [x, v] : design.sample_curve()) curve << x << ',' << v << '\n';
    write_text(fs::path(cfg.out_dir) / "psi_curve.csv", curve.str());

    json results = std::move(extra_results);
    results["kind"] = design.kind == PsiKind::scale ? "scale" : "location";
    results["nu"] = design.multipliers.nu;
    results["theta1"] = design.multipliers.theta1;
    results["theta2"] = design.multipliers.theta2;
    results["psi_neg_inf"] = json_finite(design.psi_neg_inf());
    json region = json::array();
    for (const auto& iv : design.active_region())
        region.push_back(json{{"lo", json_finite(iv.lo)}, {"hi", json_finite(iv.hi)}});
    results["active_region"] = region;
    json diag;
    for (const auto& [k, v] : design.diagnostics) diag[k] = json_finite(v);
    write_report(cfg, results, diag, {"psi.json", "psi_curve.csv"});
}

void cmd_design_min(const RunConfig& cfg) {
    if (cfg.kind == "scale") {
        DistributionModel model = resolve_model(cfg);
        const DesignedPsi design = min_aif_scale(model);
        write_design_artifacts(cfg, design,
                               json{{"min_aif", design.diagnostics.at("min_aif")}});
    } else {
        const DesignedPsi design = min_aif_location();
        write_design_artifacts(cfg, design, json{{"min_aif", 1.0}});
    }
}

void cmd_design_tradeoff(const RunConfig& cfg) {
    if (!cfg.xi) throw error(errc::invalid_config, "--xi is required for design-tradeoff");
    DistributionModel model = resolve_model(cfg);
    const bool scale = cfg.kind == "scale";
    std::string method = cfg.method;
    if (method == "auto")
        method = (!scale && model.family() == Family::exponential_rate1 && *cfg.xi > 1.0)
                     ? "closed-form"
                     : "generic";
    DesignedPsi design = [&] {
        if (method == "closed-form") {
            if (scale || model.family() != Family::exponential_rate1)
                throw error(errc::invalid_config,
                            "closed-form design requires --kind location and the "
                            "exponential-rate-1 model");
            return exponential_tradeoff(*cfg.xi);
        }
        return scale ? tradeoff_scale(model, *cfg.xi) : tradeoff_location(model, *cfg.xi);
    }();
    json extra{{"xi", *cfg.xi}, {"method", method}};
    if (design.diagnostics.count("a")) extra["a"] = design.diagnostics.at("a");
    write_design_artifacts(cfg, design, extra);
}

void cmd_tradeoff_curve(const RunConfig& cfg) {
    if (cfg.xi_grid.empty())
        throw error(errc::invalid_config, "--xi-grid is required for tradeoff-curve");
    DistributionModel model = resolve_model(cfg);
    const PsiKind kind = cfg.kind == "scale" ? PsiKind::scale : PsiKind::location;
    const auto rows = tradeoff_curve(model, cfg.xi_grid, kind);
    std::ostringstream csv;
    csv << "xi,aif,gamma_star\n";
    json jrows = json::array();
    for (const auto& row : rows) {
        if (!row.skipped)
            csv << format_row(row.xi) << ',' << format_row(row.aif) << ','
                << format_row(row.gamma_star) << '\n';
        json jr{{"xi", row.xi}, {"skipped", row.skipped}};
        if (row.skipped)
            jr["reason"] = row.reason;
        else {
            jr["aif"] = row.aif;
            jr["gamma_star"] = json_finite(row.gamma_star);
        }
        jrows.push_back(jr);
    }
    write_text(fs::path(cfg.out_dir) / "curve.csv", csv.str());
    write_report(cfg, json{{"rows", jrows}}, json::object(), {"curve.csv"});
}

void cmd_l_aif(const RunConfig& cfg) {
    LWeights weights = [&] {
        if (!cfg.weights_path.empty()) return weights_from_csv(cfg.weights_path);
        if (cfg.alpha && cfg.n) return alpha_trimmed_weights(*cfg.alpha, *cfg.n);
        if (cfg.n && cfg.psi == "mean") return mean_weights(*cfg.n);
        if (cfg.n && cfg.psi == "median") return median_weights(*cfg.n);
        throw error(errc::invalid_config,
                    "l-aif needs --weights, or --alpha with --n, or --psi mean|median with --n");
    }();
    weights_to_csv(weights, (fs::path(cfg.out_dir) / "weights.csv").string());
    const AifReport report = l_aif(weights, NormOrder::parse(cfg.p));
    json results{{"aif", report.value}, {"n", weights.a.size()}};
    json diag;
    for (const auto& [k, v] : report.diagnostics) diag[k] = v;
    if (!cfg.data_path.empty()) {
        const auto data = require_data(cfg);
        results["estimate"] = l_estimate(weights, data);
        const auto thr = ordering_safety_threshold(data, NormOrder::parse(cfg.p));
        diag["ordering_safety_eta"] = thr.eta_star;
        diag["all_equal"] = thr.all_equal;
    }
    write_report(cfg, results, diag, {"weights.csv"});
}

}  // namespace

RunConfig parse_args(int argc, const char* const* argv) {
    RunConfig cfg;
    CLI::App app{"adversarial influence analysis of robust estimators"};
    app.add_option("--command", cfg.command,
                   "fit | attack | aif | aif-pop | converge | design-min | design-tradeoff | "
                   "tradeoff-curve | l-aif")
        ->required();
    app.add_option("--psi", cfg.psi, "mean | huber | gaussian-scale-mle | designed-psi JSON path");
    app.add_option("--b", cfg.huber_b, "huber clipping parameter");
    app.add_option("--model", cfg.model,
                   "standard-normal | exponential-rate-1 | uniform:a,b | tabulated CSV path");
    app.add_option("--p", cfg.p, "norm order: 1, any p > 1, or inf");
    app.add_option("--eta", cfg.eta, "attack budget");
    app.add_option("--eta-grid", cfg.eta_grid, "decreasing eta grid")->delimiter(',');
    app.add_option("--xi", cfg.xi, "gross-error sensitivity budget");
    app.add_option("--xi-grid", cfg.xi_grid, "increasing xi grid")->delimiter(',');
    app.add_option("--n-grid", cfg.n_grid, "increasing sample sizes")->delimiter(',');
    app.add_option("--data", cfg.data_path, "data file, one value per line");
    app.add_option("--weights", cfg.weights_path, "L-estimator weights CSV");
    app.add_option("--alpha", cfg.alpha, "trimming fraction in (0, 1/2)");
    app.add_option("--n", cfg.n, "weight count for constructed L-estimators");
    app.add_option("--kind", cfg.kind, "location | scale")
        ->check(CLI::IsMember({"location", "scale"}));
    app.add_option("--method", cfg.method, "design-tradeoff: auto | generic | closed-form")
        ->check(CLI::IsMember({"auto", "generic", "closed-form"}));
    app.add_option("--seed", cfg.seed, "RNG seed");
    app.add_option("--out", cfg.out_dir, "output directory");
    app.add_option("--tol", cfg.quad_tol, "quadrature absolute tolerance");
    app.add_option("--root-tol", cfg.root_tol, "root bracketing width tolerance");
    app.add_option("--residual-tol", cfg.residual_tol, "per-sample residual tolerance");
    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        std::cout << app.help();
        throw error(errc::invalid_config, "help requested");
    } catch (const CLI::ParseError& e) {
        throw error(errc::invalid_config, std::string("bad command line: ") + e.what());
    }
    return cfg;
}

std::vector<double> ingest(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw error(errc::io_error, "cannot open data file: " + path);
    std::vector<double> values;
    std::string line;
    std::size_t lineno = 0;
    bool header_allowed = true;
    while (std::getline(in, line)) {
        ++lineno;
        const auto begin = line.find_first_not_of(" \t\r");
        if (begin == std::string::npos) continue;
        const auto end = line.find_last_not_of(" \t\r");
        const std::string token = line.substr(begin, end - begin + 1);
        double value = 0.0;
        bool parsed = false;
        try {
            std::size_t pos = 0;
            value = std::stod(token, &pos);
            parsed = pos == token.size();
        } catch (const std::logic_error&) {
            parsed = false;
        }
        if (!parsed) {
            if (header_allowed && lineno == 1) {
                header_allowed = false;
                continue;
            }
            throw error(errc::parse_error,
                        path + ": parse error at line " + std::to_string(lineno));
        }
        if (!std::isfinite(value))
            throw error(errc::parse_error,
                        path + ": non-finite value at line " + std::to_string(lineno));
        values.push_back(value);
    }
    if (values.empty()) throw error(errc::parse_error, path + ": no data values found");
    return values;
}

int run(const RunConfig& cfg) {
    try {
        fs::create_directories(cfg.out_dir);
        if (cfg.command == "fit")
            cmd_fit(cfg);
        else if (cfg.command == "attack")
            cmd_attack(cfg);
        else if (cfg.command == "aif")
            cmd_aif(cfg);
        else if (cfg.command == "aif-pop")
            cmd_aif_pop(cfg);
        else if (cfg.command == "converge")
            cmd_converge(cfg);
        else if (cfg.command == "design-min")
            cmd_design_min(cfg);
        else if (cfg.command == "design-tradeoff")
            cmd_design_tradeoff(cfg);
        else if (cfg.command == "tradeoff-curve")
            cmd_tradeoff_curve(cfg);
        else if (cfg.command == "l-aif")
            cmd_l_aif(cfg);
        else
            throw error(errc::invalid_config, "unknown command: " + cfg.command);
        return 0;
    } catch (const error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return e.is_usage_error() ? 2 : 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}

int main_entry(int argc, const char* const* argv) {
    try {
        const RunConfig cfg = parse_args(argc, argv);
        return run(cfg);
    } catch (const error& e) {
        if (std::string(e.what()) == "help requested") return 0;
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
}

}  // namespace airob::cli
