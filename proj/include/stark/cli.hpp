#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "stark/potential.hpp"

namespace stark {

/// Exit codes of the command-line tool.
enum ExitCode : int { exit_ok = 0, exit_config = 2, exit_numeric = 3, exit_check = 4 };

struct ExperimentConfig {
    nlohmann::json potential_descriptor;
    Potential potential;
    int n_min = 1;
    int n_max = 30;
    std::set<std::string> methods{"shooting", "oracle"};
    std::set<std::string> checks{"eigen_asym", "kappa_asym", "gradients", "invariants"};
    std::map<std::string, double> tolerances;  ///< always holds every known key
    std::string output_dir = "out";
    std::uint64_t seed = 0;
};

/// Known tolerance keys and their defaults. Slope thresholds are magnitudes:
/// a fit passes when slope <= -threshold.
const std::map<std::string, double>& default_tolerances();

/// Parse and validate a JSON configuration; missing fields take defaults.
/// Throws ConfigError naming the offending field, ValidationError for an
/// inadmissible potential.
ExperimentConfig parse_config(std::string_view text);

/// Everything `verify` produces, held in memory until written.
struct VerifyReport {
    int exit_code = exit_ok;
    std::string results_csv;
    nlohmann::json summary;
    std::string log;
};

/// Run every enabled method and check. Never throws for numerical failures:
/// they are recorded in the summary with exit code 3.
VerifyReport run_verify(const ExperimentConfig& config);

/// Write results.csv, summary.json and log.txt into `dir` (created if
/// needed). Each file is written to a temporary name and renamed, so no
/// partial files remain on failure. Throws IoError.
void write_report(const VerifyReport& report, const std::string& dir);

/// Fixed CSV header of results.csv.
std::string results_header();

/// Decimal rendering with 17 significant digits (round-trips every double).
std::string format_number(double value);

}  // namespace stark
