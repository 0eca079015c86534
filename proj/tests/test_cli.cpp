#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "airob/errors.hpp"
#include "airob/norm.hpp"
#include "cli/cli.hpp"

using namespace airob;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("airob_test_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

void write_file(const fs::path& path, const std::string& text) {
    std::ofstream out(path);
    out << text;
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

}  // namespace

TEST_CASE("ingest: plain values, header skip, error paths") {
    const fs::path dir = temp_dir("ingest");
    write_file(dir / "plain.csv", "1\n2\n3\n");
    CHECK(cli::ingest((dir / "plain.csv").string()) == std::vector<double>{1.0, 2.0, 3.0});

    write_file(dir / "header.csv", "x\n1\n2\n");
    CHECK(cli::ingest((dir / "header.csv").string()) == std::vector<double>{1.0, 2.0});

    write_file(dir / "bad.csv", "1\nfoo\n");
    try {
        cli::ingest((dir / "bad.csv").string());
        CHECK(false);
    } catch (const error& e) {
        CHECK(e.code() == errc::parse_error);
        CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    }

    write_file(dir / "inf.csv", "1\ninf\n");
    CHECK_THROWS_AS(cli::ingest((dir / "inf.csv").string()), error);
    CHECK_THROWS_AS(cli::ingest((dir / "missing.csv").string()), error);
    fs::remove_all(dir);
}

TEST_CASE("fit command writes the estimate") {
    const fs::path dir = temp_dir("fit");
    write_file(dir / "data.csv", "1\n2\n3\n");
    cli::RunConfig cfg;
    cfg.command = "fit";
    cfg.psi = "mean";
    cfg.data_path = (dir / "data.csv").string();
    cfg.out_dir = (dir / "out").string();
    CHECK(cli::run(cfg) == 0);
    const json report = json::parse(slurp(dir / "out" / "report.json"));
    CHECK(report["results"]["estimate"].get<double>() == doctest::Approx(2.0));
    CHECK(report["schema_version"] == 1);
    CHECK(report["command"] == "fit");
    fs::remove_all(dir);
}

TEST_CASE("reports are byte-identical across reruns") {
    const fs::path dir = temp_dir("determinism");
    write_file(dir / "data.csv", "0.4\n-1.2\n2.2\n0.9\n");
    cli::RunConfig cfg;
    cfg.command = "aif";
    cfg.psi = "huber";
    cfg.huber_b = 1.5;
    cfg.p = "2";
    cfg.seed = 42;
    cfg.data_path = (dir / "data.csv").string();
    cfg.out_dir = (dir / "a").string();
    CHECK(cli::run(cfg) == 0);
    const std::string first = slurp(dir / "a" / "report.json");
    cfg.out_dir = (dir / "b").string();
    CHECK(cli::run(cfg) == 0);
    CHECK(first == slurp(dir / "b" / "report.json"));
    fs::remove_all(dir);
}

TEST_CASE("design export re-imports with identical population AIF") {
    const fs::path dir = temp_dir("roundtrip");
    cli::RunConfig design;
    design.command = "design-tradeoff";
    design.model = "exponential-rate-1";
    design.kind = "location";
    design.xi = 3.0;
    design.out_dir = (dir / "design").string();
    CHECK(cli::run(design) == 0);
    const json dreport = json::parse(slurp(dir / "design" / "report.json"));
    CHECK(dreport["results"]["a"].get<double>() == doctest::Approx(4.8).epsilon(0.02));

    cli::RunConfig pop;
    pop.command = "aif-pop";
    pop.psi = (dir / "design" / "psi.json").string();
    pop.p = "2";
    pop.out_dir = (dir / "pop").string();
    CHECK(cli::run(pop) == 0);
    const json preport = json::parse(slurp(dir / "pop" / "report.json"));
    CHECK(preport["results"]["aif"].get<double>() ==
          doctest::Approx(dreport["diagnostics"]["aif"].get<double>()).epsilon(1e-8));

    // psi_curve.csv carries the exact header the plots expect.
    const std::string curve = slurp(dir / "design" / "psi_curve.csv");
    CHECK(curve.rfind("x,psi\n", 0) == 0);
    fs::remove_all(dir);
}

TEST_CASE("tradeoff-curve command emits the curve CSV") {
    const fs::path dir = temp_dir("curve");
    cli::RunConfig cfg;
    cfg.command = "tradeoff-curve";
    cfg.model = "exponential-rate-1";
    cfg.kind = "location";
    cfg.xi_grid = {1.5, 3.0};
    cfg.out_dir = dir.string();
    CHECK(cli::run(cfg) == 0);
    const std::string curve = slurp(dir / "curve.csv");
    CHECK(curve.rfind("xi,aif,gamma_star\n", 0) == 0);
    CHECK(std::count(curve.begin(), curve.end(), '\n') == 3);
    fs::remove_all(dir);
}

TEST_CASE("converge command emits the convergence CSV") {
    const fs::path dir = temp_dir("converge");
    cli::RunConfig cfg;
    cfg.command = "converge";
    cfg.psi = "huber";
    cfg.huber_b = 1.5;
    cfg.model = "standard-normal";
    cfg.p = "2";
    cfg.n_grid = {100, 1000};
    cfg.seed = 3;
    cfg.out_dir = dir.string();
    CHECK(cli::run(cfg) == 0);
    const std::string csv = slurp(dir / "convergence.csv");
    CHECK(csv.rfind("N,empirical_aif,population_aif,rel_error\n", 0) == 0);
    fs::remove_all(dir);
}

TEST_CASE("attack command writes shifts and the delta artifact") {
    const fs::path dir = temp_dir("attack");
    write_file(dir / "data.csv", "1\n2\n3\n");
    cli::RunConfig cfg;
    cfg.command = "attack";
    cfg.psi = "mean";
    cfg.p = "1";
    cfg.data_path = (dir / "data.csv").string();
    cfg.out_dir = dir.string();
    CHECK(cli::run(cfg) == 2);  // --eta missing
    cfg.eta = 0.1;
    CHECK(cli::run(cfg) == 0);
    const json report = json::parse(slurp(dir / "report.json"));
    CHECK(report["results"]["predicted_shift"].get<double>() == doctest::Approx(0.1));
    CHECK(report["results"]["realized_shift"].get<double>() == doctest::Approx(0.1));
    const std::string delta = slurp(dir / "delta.csv");
    CHECK(delta == "0.30000000000000004\n0\n0\n");
    fs::remove_all(dir);
}

TEST_CASE("aif command with an eta grid uses the finite-eta method") {
    const fs::path dir = temp_dir("finite_eta");
    write_file(dir / "data.csv", "1\n2\n3\n");
    cli::RunConfig cfg;
    cfg.command = "aif";
    cfg.psi = "mean";
    cfg.p = "2";
    cfg.eta_grid = {0.1, 0.05, 0.025};
    cfg.data_path = (dir / "data.csv").string();
    cfg.out_dir = dir.string();
    CHECK(cli::run(cfg) == 0);
    const json report = json::parse(slurp(dir / "report.json"));
    CHECK(report["results"]["method"] == "finite-eta-extrapolation");
    CHECK(report["results"]["aif"].get<double>() == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(report["diagnostics"]["eta_curve"].size() == 3);
    fs::remove_all(dir);
}

TEST_CASE("l-aif command") {
    const fs::path dir = temp_dir("laif");
    cli::RunConfig cfg;
    cfg.command = "l-aif";
    cfg.alpha = 0.25;
    cfg.n = 8;
    cfg.p = "2";
    cfg.out_dir = dir.string();
    CHECK(cli::run(cfg) == 0);
    const json report = json::parse(slurp(dir / "report.json"));
    CHECK(report["results"]["aif"].get<double>() == doctest::Approx(std::sqrt(2.0)));
    fs::remove_all(dir);
}

TEST_CASE("design-min scale reports the minimum AIF") {
    const fs::path dir = temp_dir("design_min");
    cli::RunConfig cfg;
    cfg.command = "design-min";
    cfg.kind = "scale";
    cfg.model = "exponential-rate-1";
    cfg.out_dir = dir.string();
    CHECK(cli::run(cfg) == 0);
    const json report = json::parse(slurp(dir / "report.json"));
    CHECK(report["results"]["min_aif"].get<double>() ==
          doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-8));
    CHECK(fs::exists(dir / "psi.json"));
    CHECK(fs::exists(dir / "psi_curve.csv"));
    fs::remove_all(dir);
}

TEST_CASE("exit codes: domain errors 1, config and parse errors 2") {
    const fs::path dir = temp_dir("exitcodes");
    cli::RunConfig cfg;
    cfg.command = "design-tradeoff";
    cfg.model = "exponential-rate-1";
    cfg.kind = "location";
    cfg.xi = 0.5;  // infeasible
    cfg.method = "generic";
    cfg.out_dir = dir.string();
    CHECK(cli::run(cfg) == 1);

    cli::RunConfig missing;
    missing.command = "fit";
    missing.psi = "mean";
    missing.out_dir = dir.string();
    CHECK(cli::run(missing) == 2);  // no --data

    write_file(dir / "bad.csv", "a\nb\n");
    missing.data_path = (dir / "bad.csv").string();
    CHECK(cli::run(missing) == 2);

    cli::RunConfig unknown;
    unknown.command = "frobnicate";
    unknown.out_dir = dir.string();
    CHECK(cli::run(unknown) == 2);
    fs::remove_all(dir);
}

TEST_CASE("argument parsing fills the config") {
    const char* argv[] = {"airobust", "--command", "aif",      "--psi",    "huber",
                          "--b",      "2.5",       "--data",   "d.csv",    "--p",
                          "1.5",      "--eta-grid", "0.1,0.05,0.025", "--seed", "9",
                          "--out",    "somewhere"};
    const auto cfg = cli::parse_args(static_cast<int>(std::size(argv)), argv);
    CHECK(cfg.command == "aif");
    CHECK(cfg.psi == "huber");
    CHECK(cfg.huber_b == 2.5);
    CHECK(cfg.p == "1.5");
    CHECK(cfg.eta_grid == std::vector<double>{0.1, 0.05, 0.025});
    CHECK(cfg.seed == 9);
    CHECK(cfg.out_dir == "somewhere");
    const char* bad[] = {"airobust", "--nope"};
    CHECK_THROWS_AS(cli::parse_args(2, bad), error);
}

TEST_CASE("norm order parsing") {
    CHECK(NormOrder::parse("1").is_one());
    CHECK(NormOrder::parse("inf").is_infinity());
    CHECK(NormOrder::parse("2.5").value() == 2.5);
    CHECK_THROWS_AS(NormOrder::parse("0.5"), error);   // p < 1 unsupported
    CHECK_THROWS_AS(NormOrder::parse("abc"), error);
    CHECK_THROWS_AS(NormOrder::parse("2x"), error);
}

TEST_CASE("binary smoke test") {
    const fs::path dir = temp_dir("binary");
    write_file(dir / "data.csv", "1\n2\n3\n");
    std::ostringstream cmd;
    cmd << AIROBUST_BIN << " --command fit --psi mean --data " << (dir / "data.csv")
        << " --out " << (dir / "out") << " >/dev/null 2>&1";
    CHECK(std::system(cmd.str().c_str()) == 0);
    const json report = json::parse(slurp(dir / "out" / "report.json"));
    CHECK(report["results"]["estimate"].get<double>() == doctest::Approx(2.0));

    std::ostringstream bad;
    bad << AIROBUST_BIN << " --no-such-flag >/dev/null 2>&1";
    const int status = std::system(bad.str().c_str());
    CHECK(WEXITSTATUS(status) == 2);
    fs::remove_all(dir);
}
