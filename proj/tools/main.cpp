#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "stark/airy.hpp"
#include "stark/asymptotics.hpp"
#include "stark/cli.hpp"
#include "stark/error.hpp"
#include "stark/oracle.hpp"
#include "stark/spectrum.hpp"

namespace {

using namespace stark;

struct CommonFlags {
    std::string config_path;
    int n_max = 0;
    std::string method;
    std::string out;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
    cmd->add_option("--config", f.config_path, "JSON experiment configuration");
    cmd->add_option("--n-max", f.n_max, "largest eigenvalue index")->check(CLI::PositiveNumber);
    cmd->add_option("--method", f.method, "shooting, oracle or both")
        ->check(CLI::IsMember({"shooting", "oracle", "both"}));
    cmd->add_option("--out", f.out, "output directory");
}

ExperimentConfig load(const CommonFlags& f) {
    std::string text = "{}";
    if (!f.config_path.empty()) {
        std::ifstream in(f.config_path);
        if (!in) throw ConfigError("cannot read config file " + f.config_path);
        std::ostringstream buf;
        buf << in.rdbuf();
        text = buf.str();
    }
    ExperimentConfig c = parse_config(text);
    if (f.n_max > 0) {
        c.n_max = f.n_max;
        if (c.n_max < c.n_min) throw ConfigError("--n-max: must be >= n_min");
    }
    if (f.method == "both") c.methods = {"shooting", "oracle"};
    else if (!f.method.empty()) c.methods = {f.method};
    if (!f.out.empty()) c.output_dir = f.out;
    return c;
}

// Prints `table` and, with --out, also stores it as dir/name.
void emit(const std::string& table, const CommonFlags& f, const std::string& name) {
    std::cout << table;
    if (f.out.empty()) return;
    std::error_code ec;
    std::filesystem::create_directories(f.out, ec);
    std::ofstream out(std::filesystem::path(f.out) / name);
    if (!out) throw IoError("cannot write " + (std::filesystem::path(f.out) / name).string());
    out << table;
}

struct Columns {
    std::vector<double> lambda_s, kappa_s, kappa_alt, lambda_o, kappa_o;
};

Columns compute(const ExperimentConfig& c) {
    const std::size_t count = static_cast<std::size_t>(c.n_max - c.n_min + 1);
    const double nan = std::nan("");
    Columns col{std::vector<double>(count, nan), std::vector<double>(count, nan), std::vector<double>(count, nan),
                std::vector<double>(count, nan), std::vector<double>(count, nan)};
    if (c.methods.contains("shooting")) {
        const auto records = locate_eigenvalues(c.potential, c.n_min, c.n_max);
        for (std::size_t i = 0; i < count; ++i) {
            col.lambda_s[i] = records[i].lambda;
            col.kappa_s[i] = records[i].kappa;
            col.kappa_alt[i] = records[i].kappa_alt;
        }
    }
    if (c.methods.contains("oracle")) {
        const OracleResult o = oracle_extrapolated(c.potential, c.n_max);
        for (std::size_t i = 0; i < count; ++i) {
            col.lambda_o[i] = o.lambda[static_cast<std::size_t>(c.n_min) - 1 + i].value;
            col.kappa_o[i] = o.kappa[static_cast<std::size_t>(c.n_min) - 1 + i].value;
        }
    }
    return col;
}

int run_eig(const CommonFlags& f) {
    const ExperimentConfig c = load(f);
    const Columns col = compute(c);
    std::ostringstream t;
    t << "n,lambda_shoot,lambda_oracle\n";
    for (int n = c.n_min; n <= c.n_max; ++n) {
        const std::size_t i = static_cast<std::size_t>(n - c.n_min);
        t << n << ',' << format_number(col.lambda_s[i]) << ',' << format_number(col.lambda_o[i]) << "\n";
    }
    emit(t.str(), f, "eig.csv");
    return exit_ok;
}

int run_norming(const CommonFlags& f) {
    const ExperimentConfig c = load(f);
    const Columns col = compute(c);
    std::ostringstream t;
    t << "n,kappa_shoot,kappa_alt,kappa_oracle\n";
    for (int n = c.n_min; n <= c.n_max; ++n) {
        const std::size_t i = static_cast<std::size_t>(n - c.n_min);
        t << n << ',' << format_number(col.kappa_s[i]) << ',' << format_number(col.kappa_alt[i]) << ','
          << format_number(col.kappa_o[i]) << "\n";
    }
    emit(t.str(), f, "norming.csv");
    return exit_ok;
}

int run_asympt(const CommonFlags& f) {
    ExperimentConfig c = load(f);
    const Columns col = compute(c);
    const bool shooting = c.methods.contains("shooting");
    std::vector<int> ns;
    for (int n = c.n_min; n <= c.n_max; ++n) ns.push_back(n);
    const AsymptoticsReport rep = asymptotics_report(c.potential, ns, shooting ? col.lambda_s : col.lambda_o,
                                                     shooting ? col.kappa_s : col.kappa_o,
                                                     c.tolerances.at("noise_floor"), std::max(2, c.n_min));
    std::ostringstream t;
    t << "n,lambda_pred,lambda_resid,kappa_pred,kappa_resid,omega_r\n";
    for (std::size_t i = 0; i < ns.size(); ++i) {
        t << ns[i] << ',' << format_number(rep.lambda_pred[i]) << ',' << format_number(rep.lambda_resid[i]) << ','
          << format_number(rep.kappa_pred[i]) << ',' << format_number(rep.kappa_resid[i]) << ','
          << format_number(rep.omega_r_values[i]) << "\n";
    }
    emit(t.str(), f, "asympt.csv");
    auto describe = [](const char* name, bool ok, const SlopeFit& fit) {
        std::cerr << name << ": ";
        if (ok) std::cerr << "slope " << fit.slope << " +- " << fit.half_width << " (" << fit.points << " points)\n";
        else std::cerr << "no fit (residuals at the noise floor)\n";
    };
    describe("lambda remainder", rep.lambda_fit_ok, rep.lambda_fit);
    describe("kappa remainder", rep.kappa_fit_ok, rep.kappa_fit);
    return exit_ok;
}

int run_verify_command(const CommonFlags& f) {
    const ExperimentConfig c = load(f);
    const VerifyReport report = run_verify(c);
    write_report(report, c.output_dir);
    for (const auto& [name, check] : report.summary["checks"].items()) {
        const auto& passed = check["passed"];
        std::cout << name << ": " << (passed.is_null() ? "skipped" : (passed.get<bool>() ? "pass" : "FAIL")) << "\n";
    }
    if (!report.summary["error"].is_null())
        std::cout << "error in " << report.summary["error"]["check"].get<std::string>() << ": "
                  << report.summary["error"]["message"].get<std::string>() << "\n";
    std::cout << "results written to " << c.output_dir << "\n";
    return report.exit_code;
}

int run_airy_selftest() {
    bool ok = true;
    auto line = [&](const std::string& what, double value, double limit) {
        const bool pass = value <= limit;
        ok = ok && pass;
        std::cout << (pass ? "pass " : "FAIL ") << what << ": " << value << " (limit " << limit << ")\n";
    };
    double wr = 0.0;
    for (double w = -20.0; w <= 20.0; w += 0.01) {
        const AiryValues v = airy_eval(w);
        if (v.scaled) continue;
        wr = std::max(wr, std::abs(std::numbers::pi * (v.ai * v.bi_prime - v.ai_prime * v.bi) - 1.0));
    }
    line("Wronskian pi (Ai Bi' - Ai' Bi) - 1 on [-20, 20]", wr, 1e-10);
    double zr = 0.0, order = 0.0;
    double previous = 0.0;
    for (int n = 1; n <= 100; ++n) {
        const AiryZero z = airy_zero(n);
        zr = std::max(zr, std::abs(z.refinement_residual));
        if (n > 1 && !(z.a_n < previous)) order = 1.0;
        previous = z.a_n;
    }
    line("zero residual |Ai(a_n)|, n = 1..100", zr, 1e-12);
    line("zeros strictly decreasing (0 = yes)", order, 0.0);
    const AiryValues v0 = airy_eval(0.0);
    line("|Ai(0) - 0.3550280538878172|", std::abs(v0.ai - 0.3550280538878172), 1e-15);
    line("|Bi(0) - 0.6149266274460007|", std::abs(v0.bi - 0.6149266274460007), 1e-15);
    return ok ? exit_ok : exit_check;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Eigenvalues and norming constants of the perturbed Stark operator on the half-line"};
    app.require_subcommand(1);
    CommonFlags flags;
    auto* eig = app.add_subcommand("eig", "eigenvalues by shooting and/or the finite-difference oracle");
    auto* norming = app.add_subcommand("norming", "norming constants");
    auto* asympt = app.add_subcommand("asympt", "first-order predictions and remainder fits");
    auto* verify = app.add_subcommand("verify", "full verification run writing results.csv, summary.json, log.txt");
    app.add_subcommand("airy-selftest", "consistency checks of the Airy kernel");
    for (auto* cmd : {eig, norming, asympt, verify}) add_common(cmd, flags);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? exit_ok : exit_config;
    }

    try {
        if (*eig) return run_eig(flags);
        if (*norming) return run_norming(flags);
        if (*asympt) return run_asympt(flags);
        if (*verify) return run_verify_command(flags);
        return run_airy_selftest();
    } catch (const ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return exit_config;
    } catch (const ValidationError& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return exit_config;
    } catch (const IoError& e) {
        std::cerr << "I/O error: " << e.what() << "\n";
        return exit_config;
    } catch (const Error& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return exit_numeric;
    }
}
