#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "stark/cli.hpp"
#include "stark/error.hpp"

using namespace stark;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("stark_cli_test_" + name);
    fs::remove_all(dir);
    return dir;
}

}  // namespace

TEST_CASE("empty configuration takes the defaults") {
    const ExperimentConfig c = parse_config("{}");
    CHECK(c.n_min == 1);
    CHECK(c.n_max == 30);
    CHECK(c.methods.size() == 2);
    CHECK(c.checks.size() == 4);
    CHECK(c.tolerances == default_tolerances());
    CHECK(c.output_dir == "out");
    CHECK(c.potential(0.0) == doctest::Approx(0.3));
}

TEST_CASE("configuration parsing and validation") {
    const ExperimentConfig c = parse_config(R"({
        "potential": {"family": "exp", "params": {"c": 0.3, "a": 1.0}, "r": 2},
        "n_min": 1, "n_max": 40, "methods": ["shooting", "oracle"],
        "checks": ["eigen_asym", "kappa_asym", "gradients", "invariants"],
        "tolerances": {"lambda_agreement": 1e-6, "kappa_agreement": 1e-4},
        "output_dir": "out/exp03", "seed": 0})");
    CHECK(c.n_max == 40);
    CHECK(c.output_dir == "out/exp03");
    CHECK(c.tolerances.at("kappa_agreement") == 1e-4);
    CHECK_THROWS_AS(parse_config(R"({"potential": {"family": "alg", "params": {"c": 1, "p": 1}, "r": 2}})"),
                    ValidationError);
    CHECK_THROWS_AS(parse_config(R"({"colour": 3})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"tolerances": {"lambda_agreement": -1}})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"tolerances": {"made_up": 1}})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"n_min": 5, "n_max": 2})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"methods": ["magic"]})"), ConfigError);
    CHECK_THROWS_AS(parse_config("{not json"), ConfigError);
}

TEST_CASE("number formatting round-trips") {
    for (double v : {0.1, -2.338107410459767, 1e-300, 12345.678901234567}) CHECK(std::stod(format_number(v)) == v);
    CHECK(format_number(std::nan("")).empty());
}

TEST_CASE("verify on the zero potential passes and is deterministic") {
    ExperimentConfig c = parse_config(R"({"potential": {"family": "exp", "params": {"c": 0, "a": 1}, "r": 2},
                                          "n_max": 12})");
    const VerifyReport a = run_verify(c);
    CHECK(a.exit_code == exit_ok);
    CHECK(a.summary["passed"].get<bool>());
    const VerifyReport b = run_verify(c);
    CHECK(a.results_csv == b.results_csv);
    CHECK(a.summary.dump() == b.summary.dump());
    CHECK(a.results_csv.rfind(results_header(), 0) == 0);
    const fs::path d1 = scratch("a"), d2 = scratch("b");
    write_report(a, d1.string());
    write_report(b, d2.string());
    for (const char* f : {"results.csv", "summary.json", "log.txt"}) {
        REQUIRE(fs::exists(d1 / f));
        CHECK(slurp(d1 / f) == slurp(d2 / f));
    }
    for (const auto& entry : fs::directory_iterator(d1)) CHECK(entry.path().extension() != ".tmp");
    fs::remove_all(d1);
    fs::remove_all(d2);
}

TEST_CASE("unwritable output directory") {
    const fs::path blocker = scratch("blocker");
    { std::ofstream(blocker) << "x"; }
    VerifyReport r;
    r.summary = nlohmann::json::object();
    CHECK_THROWS_AS(write_report(r, (blocker / "sub").string()), IoError);
    fs::remove(blocker);
}
