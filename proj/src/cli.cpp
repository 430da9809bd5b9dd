#include "stark/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <sstream>

#include "stark/airy.hpp"
#include "stark/asymptotics.hpp"
#include "stark/error.hpp"
#include "stark/oracle.hpp"
#include "stark/spectrum.hpp"
#include "stark/volterra.hpp"

namespace stark {
namespace {

using nlohmann::json;

const std::set<std::string> known_methods{"shooting", "oracle"};
const std::set<std::string> known_checks{"eigen_asym", "kappa_asym", "gradients", "invariants"};
const std::set<std::string> known_fields{"potential", "n_min",      "n_max", "methods",
                                         "checks",    "tolerances", "output_dir", "seed"};

int read_index(const json& j, const char* field) {
    if (!j.is_number_integer() || j.get<long long>() < 1 || j.get<long long>() > 100000)
        throw ConfigError(std::string("config.") + field + ": must be an integer >= 1");
    return static_cast<int>(j.get<long long>());
}

std::set<std::string> read_subset(const json& j, const char* field, const std::set<std::string>& allowed) {
    if (!j.is_array()) throw ConfigError(std::string("config.") + field + ": must be an array of strings");
    std::set<std::string> out;
    for (const auto& item : j) {
        if (!item.is_string()) throw ConfigError(std::string("config.") + field + ": entries must be strings");
        const std::string name = item.get<std::string>();
        if (!allowed.contains(name)) throw ConfigError(std::string("config.") + field + ": unknown entry '" + name + "'");
        out.insert(name);
    }
    return out;
}

const char* error_kind(const std::exception& e) {
    if (dynamic_cast<const BracketError*>(&e)) return "bracket";
    if (dynamic_cast<const TruncationError*>(&e)) return "truncation";
    if (dynamic_cast<const InsufficientDataError*>(&e)) return "insufficient_data";
    if (dynamic_cast<const NumericError*>(&e)) return "numeric";
    if (dynamic_cast<const DomainError*>(&e)) return "domain";
    if (dynamic_cast<const ValidationError*>(&e)) return "validation";
    return "error";
}

double relative_gap(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-12); }

// Directions for the gradient check, paired with eigenvalue indices inside the range.
std::vector<std::pair<int, Potential>> gradient_pairs(const ExperimentConfig& c) {
    const double r = c.potential.r();
    const std::vector<Potential> directions = {exp_decay(1.0, 1.0, r), bump(1.0, 1.5, 1.0, r),
                                               alg_decay(1.0, std::max(3.0, 0.5 * (r + 1.0) + 1.0), r)};
    std::vector<std::pair<int, Potential>> out;
    for (std::size_t i = 0; i < directions.size(); ++i)
        out.emplace_back(std::min(c.n_min + static_cast<int>(i), c.n_max), directions[i]);
    return out;
}

void write_atomic(const std::filesystem::path& path, const std::string& content) {
    const std::filesystem::path tmp = path.parent_path() / ("." + path.filename().string() + ".tmp");
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
        out << content;
        out.flush();
        if (!out) throw IoError("write to " + tmp.string() + " failed");
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp, ec);
        throw IoError("cannot move " + tmp.string() + " to " + path.string());
    }
}

}  // namespace

const std::map<std::string, double>& default_tolerances() {
    static const std::map<std::string, double> defaults = {
        {"lambda_agreement", 1e-6},   // |lambda_shoot - lambda_oracle|
        {"kappa_agreement", 1e-4},    // |kappa_shoot - kappa_oracle|
        {"lambda_slope", 0.8},        // r >= 2
        {"kappa_slope", 0.8},         // r >= 2
        {"slope_log", 0.75},          // r in (1, 2), both fits
        {"gradient_lambda", 1e-4},    // relative
        {"gradient_kappa", 1e-3},     // relative
        {"norm_gap", 1e-6},
        {"kappa_consistency", 1e-6},
        {"shoot_residual", 1e-10},    // relative to |psi'(0)|
        {"wronskian", 1e-8},
        {"noise_floor", 1e-9},
        {"gradient_step", 1e-4},
    };
    return defaults;
}

std::string format_number(double value) {
    if (!std::isfinite(value)) return "";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", value);
    return buf;
}

std::string results_header() {
    return "n,lambda_shoot,lambda_oracle,lambda_pred,lambda_resid,kappa_shoot,kappa_oracle,kappa_pred,kappa_resid,"
           "omega_r";
}

ExperimentConfig parse_config(std::string_view text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config: malformed JSON: ") + e.what());
    }
    if (!j.is_object()) throw ConfigError("config: top level must be a JSON object");
    for (const auto& [key, value] : j.items())
        if (!known_fields.contains(key)) throw ConfigError("config." + key + ": unknown field");

    ExperimentConfig c;
    c.potential_descriptor = j.contains("potential")
                                 ? j["potential"]
                                 : json{{"family", "exp"}, {"params", {{"c", 0.3}, {"a", 1.0}}}, {"r", 2.0}};
    c.potential = potential_from_json(c.potential_descriptor);
    if (j.contains("n_min")) c.n_min = read_index(j["n_min"], "n_min");
    if (j.contains("n_max")) c.n_max = read_index(j["n_max"], "n_max");
    if (c.n_max < c.n_min) throw ConfigError("config.n_max: must be >= n_min");
    if (j.contains("methods")) {
        c.methods = read_subset(j["methods"], "methods", known_methods);
        if (c.methods.empty()) throw ConfigError("config.methods: at least one method is required");
    }
    if (j.contains("checks")) c.checks = read_subset(j["checks"], "checks", known_checks);
    c.tolerances = default_tolerances();
    if (j.contains("tolerances")) {
        const json& t = j["tolerances"];
        if (!t.is_object()) throw ConfigError("config.tolerances: must be an object");
        for (const auto& [key, value] : t.items()) {
            if (!c.tolerances.contains(key)) throw ConfigError("config.tolerances." + key + ": unknown tolerance");
            if (!value.is_number() || !(value.get<double>() > 0.0) || !std::isfinite(value.get<double>()))
                throw ConfigError("config.tolerances." + key + ": must be a positive number");
            c.tolerances[key] = value.get<double>();
        }
    }
    if (j.contains("output_dir")) {
        if (!j["output_dir"].is_string() || j["output_dir"].get<std::string>().empty())
            throw ConfigError("config.output_dir: must be a non-empty string");
        c.output_dir = j["output_dir"].get<std::string>();
    }
    if (j.contains("seed")) {
        if (!j["seed"].is_number_integer() || j["seed"].get<long long>() < 0)
            throw ConfigError("config.seed: must be a non-negative integer");
        c.seed = j["seed"].get<std::uint64_t>();
    }
    return c;
}

VerifyReport run_verify(const ExperimentConfig& config) {
    VerifyReport report;
    std::ostringstream log;
    const auto& tol = config.tolerances;
    const Potential& q = config.potential;
    const int count = config.n_max - config.n_min + 1;
    const bool shooting = config.methods.contains("shooting");
    const bool oracle = config.methods.contains("oracle");

    json summary;
    summary["potential"] = config.potential_descriptor;
    summary["n_min"] = config.n_min;
    summary["n_max"] = config.n_max;
    summary["methods"] = json(std::vector<std::string>(config.methods.begin(), config.methods.end()));
    summary["tolerances"] = json(config.tolerances);
    summary["checks"] = json::object();
    summary["error"] = nullptr;

    std::vector<int> ns(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) ns[static_cast<std::size_t>(i)] = config.n_min + i;
    const double nan = std::numeric_limits<double>::quiet_NaN();
    std::vector<double> lam_s(ns.size(), nan), kap_s(ns.size(), nan), lam_o(ns.size(), nan), kap_o(ns.size(), nan);
    std::vector<EigenRecord> records;
    std::optional<OracleResult> oracle_result;
    std::optional<AsymptoticsReport> asym;

    bool numeric_failure = false;
    bool checks_failed = false;
    auto fail_stage = [&](const std::string& stage, const std::exception& e) {
        numeric_failure = true;
        summary["error"] = {{"check", stage}, {"kind", error_kind(e)}, {"message", e.what()}};
        log << "error in " << stage << ": " << e.what() << "\n";
    };
    // Runs one stage; numerical errors are recorded and stop further work.
    auto stage = [&](const std::string& name, const std::function<void()>& body) {
        if (numeric_failure) return;
        try {
            body();
        } catch (const Error& e) {
            fail_stage(name, e);
        }
        // No wall-clock times here: the log must be reproducible byte for byte.
        log << "stage " << name << (numeric_failure ? ": failed" : ": done") << "\n";
    };

    log << "potential " << q.describe() << ", r = " << q.r() << ", n = " << config.n_min << ".." << config.n_max
        << "\n";

    if (shooting) {
        stage("shooting", [&] {
            records = locate_eigenvalues(q, config.n_min, config.n_max);
            for (std::size_t i = 0; i < records.size(); ++i) {
                lam_s[i] = records[i].lambda;
                kap_s[i] = records[i].kappa;
            }
        });
    }
    if (oracle) {
        stage("oracle", [&] {
            oracle_result = oracle_extrapolated(q, config.n_max);
            summary["oracle_length"] = oracle_result->L;
            for (std::size_t i = 0; i < ns.size(); ++i) {
                const std::size_t k = static_cast<std::size_t>(ns[i] - 1);
                lam_o[i] = oracle_result->lambda[k].value;
                kap_o[i] = oracle_result->kappa[k].value;
                for (const auto* r : {&oracle_result->lambda[k], &oracle_result->kappa[k]})
                    if (!r->warning.empty()) log << "oracle n=" << ns[i] << ": " << r->warning << "\n";
            }
        });
    }
    const std::vector<double>& lam = shooting ? lam_s : lam_o;
    const std::vector<double>& kap = shooting ? kap_s : kap_o;

    stage("asymptotics", [&] {
        asym = asymptotics_report(q, ns, lam, kap, tol.at("noise_floor"), std::max(2, config.n_min));
    });

    const bool log_factor = q.r() < 2.0;
    auto slope_check = [&](const char* name, bool ok, const SlopeFit& fit, const std::vector<double>& resid,
                           double threshold, double constant) {
        json c;
        c["enabled"] = true;
        c["threshold"] = -threshold;
        c["empirical_constant"] = constant;
        if (ok) {
            c["slope"] = fit.slope;
            c["half_width"] = fit.half_width;
            c["points"] = fit.points;
            c["passed"] = fit.slope <= -threshold;
            c["detail"] = "least-squares slope of log|resid| against log n";
        } else {
            // Either every residual is below the floor, or too few are above it.
            const bool all_below = std::all_of(resid.begin(), resid.end(), [&](double r) {
                return !(std::abs(r) >= tol.at("noise_floor"));
            });
            c["slope"] = nullptr;
            c["half_width"] = nullptr;
            c["points"] = 0;
            c["passed"] = all_below;
            c["detail"] = all_below ? "all residuals below the noise floor" : "fewer than 8 residuals above the noise floor";
        }
        summary["checks"][name] = c;
        if (!c["passed"].get<bool>()) checks_failed = true;
    };

    if (asym && config.checks.contains("eigen_asym")) {
        slope_check("eigen_asym", asym->lambda_fit_ok, asym->lambda_fit, asym->lambda_resid,
                    log_factor ? tol.at("slope_log") : tol.at("lambda_slope"), asym->lambda_constant);
    }
    if (asym && config.checks.contains("kappa_asym")) {
        slope_check("kappa_asym", asym->kappa_fit_ok, asym->kappa_fit, asym->kappa_resid,
                    log_factor ? tol.at("slope_log") : tol.at("kappa_slope"), asym->kappa_constant);
    }

    if (config.checks.contains("gradients")) {
        stage("gradients", [&] {
            json pairs = json::array();
            bool passed = true;
            const double h = tol.at("gradient_step");
            for (const auto& [n, v] : gradient_pairs(config)) {
                const double dl = lambda_directional_derivative(q, n, v);
                const double dk = kappa_directional_derivative(q, n, v);
                const EigenRecord up = locate_eigenvalue(q + h * v, n);
                const EigenRecord down = locate_eigenvalue(q + (-h) * v, n);
                const double fd_l = (up.lambda - down.lambda) / (2.0 * h);
                const double fd_k = (up.kappa - down.kappa) / (2.0 * h);
                const double el = relative_gap(dl, fd_l), ek = relative_gap(dk, fd_k);
                const bool ok = el <= tol.at("gradient_lambda") && ek <= tol.at("gradient_kappa");
                passed = passed && ok;
                pairs.push_back({{"n", n},
                                 {"direction", v.describe()},
                                 {"lambda_derivative", dl},
                                 {"lambda_fd", fd_l},
                                 {"lambda_rel_error", el},
                                 {"kappa_derivative", dk},
                                 {"kappa_fd", fd_k},
                                 {"kappa_rel_error", ek},
                                 {"passed", ok}});
            }
            summary["checks"]["gradients"] = {{"enabled", true}, {"pairs", pairs}, {"passed", passed}};
            if (!passed) checks_failed = true;
        });
    }

    if (config.checks.contains("invariants")) {
        stage("invariants", [&] {
            json c;
            bool passed = true;
            if (shooting && !records.empty()) {
                double gap = 0.0, consistency = 0.0, residual = 0.0;
                bool nodes_ok = true;
                for (const EigenRecord& r : records) {
                    gap = std::max(gap, r.norm_gap);
                    consistency = std::max(consistency, std::abs(r.kappa - r.kappa_alt));
                    residual = std::max(residual, r.shoot_residual / std::abs(r.psi_prime));
                    nodes_ok = nodes_ok && r.sign_changes == r.n - 1;
                }
                // Wronskian of psi and theta at the first eigenvalue is constant in x.
                const EigenRecord& first = records.front();
                const Grid grid = make_grid(q, first.bracket_lo, first.bracket_hi);
                SolveOptions so;
                so.z_derivative = false;
                const SolutionProfile psi = solve_psi(q, first.lambda, grid, so);
                const SolutionProfile theta = solve_theta(q, first.lambda, grid, so);
                const double w0 = psi.at_zero.value * theta.at_zero.deriv - psi.at_zero.deriv * theta.at_zero.value;
                double wdev = 0.0;
                for (std::size_t i = 0; i < grid.size(); ++i) {
                    const double w = psi.values[i] * theta.derivs[i] - psi.derivs[i] * theta.values[i];
                    wdev = std::max(wdev, std::abs(w - w0) / std::abs(w0));
                }
                c["norm_gap_max"] = gap;
                c["kappa_consistency_max"] = consistency;
                c["shoot_residual_max"] = residual;
                c["oscillation_counts_exact"] = nodes_ok;
                c["wronskian_deviation"] = wdev;
                passed = gap <= tol.at("norm_gap") && consistency <= tol.at("kappa_consistency") &&
                         residual <= tol.at("shoot_residual") && nodes_ok && wdev <= tol.at("wronskian");

                json norm_ratio = json::array();
                for (const EigenRecord& r : records)
                    norm_ratio.push_back(r.norm_sq * std::pow(1.5 * std::numbers::pi * r.n, -1.0 / 3.0));
                c["norm_ratio"] = norm_ratio;
                c["localization_onset"] = localization_onset(records);
                c["negative_eigenvalues"] = scan_negative_eigenvalues(q);
            }
            if (shooting && oracle && oracle_result) {
                double dl = 0.0, dk = 0.0;
                for (std::size_t i = 0; i < ns.size(); ++i) {
                    dl = std::max(dl, std::abs(lam_s[i] - lam_o[i]));
                    dk = std::max(dk, std::abs(kap_s[i] - kap_o[i]));
                }
                c["lambda_agreement_max"] = dl;
                c["kappa_agreement_max"] = dk;
                passed = passed && dl <= tol.at("lambda_agreement") && dk <= tol.at("kappa_agreement");
            }
            c["enabled"] = true;
            c["passed"] = passed;
            summary["checks"]["invariants"] = c;
            if (!passed) checks_failed = true;
        });
    }

    std::ostringstream csv;
    csv << results_header() << "\n";
    for (std::size_t i = 0; i < ns.size(); ++i) {
        const double lp = asym ? asym->lambda_pred[i] : nan;
        const double kp = asym ? asym->kappa_pred[i] : nan;
        csv << ns[i] << ',' << format_number(lam_s[i]) << ',' << format_number(lam_o[i]) << ',' << format_number(lp)
            << ',' << format_number(lam[i] - lp) << ',' << format_number(kap_s[i]) << ',' << format_number(kap_o[i])
            << ',' << format_number(kp) << ',' << format_number(kap[i] - kp) << ','
            << format_number(omega_r(q.r(), ns[i])) << "\n";
    }

    for (const std::string& name : known_checks) {
        if (!config.checks.contains(name)) {
            summary["checks"][name] = {{"enabled", false}, {"passed", nullptr}};
        } else if (!summary["checks"].contains(name)) {
            summary["checks"][name] = {{"enabled", true}, {"passed", false}, {"detail", "not run: earlier stage failed"}};
        }
    }

    report.exit_code = numeric_failure ? exit_numeric : (checks_failed ? exit_check : exit_ok);
    summary["passed"] = report.exit_code == exit_ok;
    summary["exit_code"] = report.exit_code;
    report.summary = summary;
    report.results_csv = csv.str();
    log << "exit code " << report.exit_code << "\n";
    report.log = log.str();
    return report;
}

void write_report(const VerifyReport& report, const std::string& dir) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) throw IoError("cannot create output directory " + dir);
    write_atomic(fs::path(dir) / "results.csv", report.results_csv);
    write_atomic(fs::path(dir) / "summary.json", report.summary.dump(2) + "\n");
    write_atomic(fs::path(dir) / "log.txt", report.log);
}

}  // namespace stark
