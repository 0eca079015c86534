#pragma once

#include <optional>
#include <string>
#include <vector>

namespace airob::cli {

/// Parsed command line. Every command validates the fields it needs before
/// doing any computation.
struct RunConfig {
    std::string command;  // fit | attack | aif | aif-pop | converge | design-min |
                          // design-tradeoff | tradeoff-curve | l-aif
    std::string psi;      // builtin name or designed-psi JSON path
    double huber_b = 1.5;
    std::string model;
    std::string p = "2";
    std::optional<double> eta;
    std::vector<double> eta_grid;
    std::optional<double> xi;
    std::vector<double> xi_grid;
    std::vector<std::size_t> n_grid;
    std::string data_path;
    std::string weights_path;
    std::optional<double> alpha;
    std::optional<std::size_t> n;
    std::string kind = "location";
    std::string method = "auto";  // design-tradeoff: auto | generic | closed-form
    std::uint64_t seed = 0;
    std::string out_dir = ".";
    double quad_tol = 1e-9;
    double root_tol = 1e-12;
    double residual_tol = 1e-10;
};

/// Parse argv into a RunConfig; throws airob::error(invalid_config) on bad
/// flags. The long option names mirror the RunConfig fields.
RunConfig parse_args(int argc, const char* const* argv);

/// One numeric value per line; a single header line is tolerated. NaN and
/// infinities are rejected with the offending line number.
std::vector<double> ingest(const std::string& path);

/// Execute the command, writing report.json (and any CSV artifacts) into
/// config.out_dir. Returns the process exit status: 0 success, 1 domain
/// error, 2 I/O, parse or configuration error.
int run(const RunConfig& config);

/// main() body for the binary.
int main_entry(int argc, const char* const* argv);

}  // namespace airob::cli
