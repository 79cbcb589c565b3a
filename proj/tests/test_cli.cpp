#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "halfspace/core.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct RunResult {
    int exit_code;
    std::string stderr_text;
};

fs::path fresh_dir(const std::string& tag) {
    const fs::path dir = fs::temp_directory_path() / ("halfspace_cli_" + tag);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

RunResult run_cli(const std::string& args, const fs::path& dir) {
    const fs::path errfile = dir / "stderr.txt";
    const std::string cmd =
        std::string(HALFSPACE_CLI_PATH) + " " + args + " 2>" + errfile.string() + " >/dev/null";
    const int raw = std::system(cmd.c_str());
    std::ifstream err(errfile);
    std::string text((std::istreambuf_iterator<char>(err)), std::istreambuf_iterator<char>());
    return {WEXITSTATUS(raw), text};
}

fs::path write_config(const fs::path& dir, const json& cfg) {
    const fs::path path = dir / "config.json";
    std::ofstream out(path);
    out << cfg.dump(2);
    return path;
}

json read_json(const fs::path& path) {
    std::ifstream in(path);
    REQUIRE(in.good());
    json doc;
    in >> doc;
    return doc;
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

const json constant_solve_config{{"n", 2},
                                 {"L", 1.0},
                                 {"H", 2.0},
                                 {"nodes", {17, 17}},
                                 {"a", 0.5},
                                 {"bc", "dirichlet"},
                                 {"data",
                                  {{"bottom", {{"type", "constant"}, {"value", 1.0}}},
                                   {"far", {{"type", "constant"}, {"value", 1.0}}}}}};

}  // namespace

TEST_CASE("solve: constant data reports the constant fit", "[cli]") {
    const auto dir = fresh_dir("solve_const");
    const auto cfg = write_config(dir, constant_solve_config);
    const RunResult r = run_cli("solve --config " + cfg.string() + " --out " + dir.string(), dir);
    REQUIRE(r.exit_code == 0);

    const json rep = read_json(dir / "solve_report.json");
    CHECK(std::abs(rep.at("c_star").get<double>()) < 1e-9);
    CHECK(rep.at("c2").get<double>() == Catch::Approx(1.0).epsilon(1e-9));
    CHECK(rep.at("max_principle_ok").get<bool>());
    CHECK(rep.at("meta").at("normalization") == "mass-one");
    CHECK(rep.at("meta").at("grid").at("h").get<double>() == Catch::Approx(0.125));
    CHECK(fs::exists(dir / "solve_field.csv"));
}

TEST_CASE("solve: malformed configs exit 1 with a diagnostic", "[cli]") {
    const auto dir = fresh_dir("solve_bad");

    json bad_tol = constant_solve_config;
    bad_tol["tolerance"] = -1.0;
    auto cfg = write_config(dir, bad_tol);
    RunResult r = run_cli("solve --config " + cfg.string() + " --out " + dir.string(), dir);
    CHECK(r.exit_code == 1);
    CHECK(r.stderr_text.find("tolerance") != std::string::npos);

    json unknown = constant_solve_config;
    unknown["surprise"] = 1;
    cfg = write_config(dir, unknown);
    r = run_cli("solve --config " + cfg.string() + " --out " + dir.string(), dir);
    CHECK(r.exit_code == 1);
    CHECK(r.stderr_text.find("unknown key") != std::string::npos);

    const fs::path missing = dir / "nope.json";
    r = run_cli("solve --config " + missing.string() + " --out " + dir.string(), dir);
    CHECK(r.exit_code == 1);
}

TEST_CASE("solve: non-convergence exits 2", "[cli]") {
    const auto dir = fresh_dir("solve_nc");
    json cfg = constant_solve_config;
    cfg["data"]["far"] = {{"type", "random_smooth"}, {"amplitude", 1.0}};
    cfg["tolerance"] = 1e-15;
    cfg["max_iterations"] = 2;
    const auto path = write_config(dir, cfg);
    const RunResult r = run_cli("solve --config " + path.string() + " --out " + dir.string(), dir);
    CHECK(r.exit_code == 2);
    CHECK(r.stderr_text.find("non_convergence") != std::string::npos);
}

TEST_CASE("solve: identical config and seed give byte-identical outputs", "[cli]") {
    const auto dir1 = fresh_dir("det1");
    const auto dir2 = fresh_dir("det2");
    json cfg = constant_solve_config;
    cfg["data"]["far"] = {{"type", "random_smooth"}, {"amplitude", 1.0}};
    const auto p1 = write_config(dir1, cfg);
    const auto p2 = write_config(dir2, cfg);
    REQUIRE(run_cli("solve --seed 7 --config " + p1.string() + " --out " + dir1.string(), dir1)
                .exit_code == 0);
    REQUIRE(run_cli("solve --seed 7 --config " + p2.string() + " --out " + dir2.string(), dir2)
                .exit_code == 0);
    CHECK(slurp(dir1 / "solve_field.csv") == slurp(dir2 / "solve_field.csv"));
    CHECK(slurp(dir1 / "solve_report.json") == slurp(dir2 / "solve_report.json"));
}

TEST_CASE("kernel eval and norm emit spec, point, value", "[cli]") {
    const auto dir = fresh_dir("kernel");
    const json cfg{{"kernel", {{"type", "poisson"}, {"a", 0.0}}},
                   {"n", 3},
                   {"point", {1.0, 0.0, 1.0}}};
    const auto path = write_config(dir, cfg);
    REQUIRE(run_cli("kernel eval --config " + path.string() + " --out " + dir.string(), dir)
                .exit_code == 0);
    const json doc = read_json(dir / "kernel_eval.json");
    CHECK(doc.at("value").get<double>() == Catch::Approx(std::pow(2.0, -1.5)).epsilon(1e-12));
    CHECK(doc.at("spec").at("type") == "poisson");

    const json ncfg{{"kernel", {{"type", "poisson"}, {"a", 0.0}}}, {"n", 2}};
    const auto npath = write_config(dir, ncfg);
    REQUIRE(run_cli("kernel norm --config " + npath.string() + " --out " + dir.string(), dir)
                .exit_code == 0);
    const json ndoc = read_json(dir / "kernel_norm.json");
    CHECK(ndoc.at("value").get<double>() == Catch::Approx(halfspace::pi).epsilon(1e-9));

    const json divergent{{"kernel", {{"type", "riesz"}, {"alpha", 1.5}}}, {"n", 2}};
    const auto dpath = write_config(dir, divergent);
    CHECK(run_cli("kernel norm --config " + dpath.string() + " --out " + dir.string(), dir)
              .exit_code == 1);
}

TEST_CASE("verify-invariance single case passes the rate gate", "[cli]") {
    const auto dir = fresh_dir("verify");
    const json cfg{{"n", 2}, {"a", 0.5}, {"h_levels", {1.0 / 16, 1.0 / 32, 1.0 / 64}}};
    const auto path = write_config(dir, cfg);
    const RunResult r =
        run_cli("verify-invariance --config " + path.string() + " --out " + dir.string(), dir);
    REQUIRE(r.exit_code == 0);
    const json doc = read_json(dir / "verify_invariance.json");
    CHECK(doc.at("worst_rate").get<double>() >= 1.8);
    CHECK(doc.at("cases").size() == 3);
}

TEST_CASE("verify-invariance default battery covers both dimensions", "[cli]") {
    const auto dir = fresh_dir("verify_full");
    const RunResult r = run_cli("verify-invariance --out " + dir.string(), dir);
    REQUIRE(r.exit_code == 0);
    const json doc = read_json(dir / "verify_invariance.json");
    CHECK(doc.at("worst_rate").get<double>() >= 1.8);
    CHECK(doc.at("cases").size() == 21);  // 3 weights x 3 fns (n=2) + 4 x 3 (n=3)
}

TEST_CASE("moving-sphere flags comparison violations with exit 2", "[cli]") {
    // 1 + x_n^{1/2} - 4 dips below its transforms: an honest counterexample
    // to the comparison for data violating the positivity normalization.
    const auto dir = fresh_dir("ms_violation");
    const json cfg{{"n", 2},
                   {"a", 0.5},
                   {"u", {{"type", "family"}, {"c_star", 1.0}, {"c2", -4.0}}},
                   {"maps", {{"count", 8}}},
                   {"probes", {{"count", 200}}}};
    const auto path = write_config(dir, cfg);
    const RunResult r =
        run_cli("moving-sphere --seed 5 --config " + path.string() + " --out " + dir.string(), dir);
    CHECK(r.exit_code == 2);
    const json doc = read_json(dir / "moving_sphere.json");
    CHECK(doc.at("scan").at("global_min").get<double>() < 0.0);
    CHECK_FALSE(doc.at("scan").at("violations").empty());
}

TEST_CASE("worker thread count does not change results", "[cli]") {
    const auto dir1 = fresh_dir("thr1");
    const auto dir2 = fresh_dir("thr2");
    json cfg = constant_solve_config;
    cfg["data"]["far"] = {{"type", "random_smooth"}, {"amplitude", 1.0}};
    const auto p1 = write_config(dir1, cfg);
    const auto p2 = write_config(dir2, cfg);
    REQUIRE(run_cli("solve --seed 9 --threads 1 --config " + p1.string() + " --out " +
                        dir1.string(), dir1).exit_code == 0);
    REQUIRE(run_cli("solve --seed 9 --threads 4 --config " + p2.string() + " --out " +
                        dir2.string(), dir2).exit_code == 0);
    CHECK(slurp(dir1 / "solve_field.csv") == slurp(dir2 / "solve_field.csv"));
}

TEST_CASE("fraclap reports values with the spectral oracle attached", "[cli]") {
    const auto dir = fresh_dir("fraclap");
    const json cfg{{"s", 0.5},
                   {"f", {{"type", "gaussian"}, {"amplitude", 1.0}, {"width", 1.0}, {"center", {0.0}}}},
                   {"xprime", {0.0}}};
    const auto path = write_config(dir, cfg);
    const RunResult r = run_cli("fraclap --config " + path.string() + " --out " + dir.string(), dir);
    REQUIRE(r.exit_code == 0);
    const json doc = read_json(dir / "fraclap.json");
    const auto& row = doc.at("results").at(0);
    CHECK(row.at("value").get<double>() ==
          Catch::Approx(row.at("spectral_oracle").get<double>()).epsilon(0.01));
    CHECK_FALSE(row.at("low_confidence").get<bool>());
}

TEST_CASE("extend evaluates the normalized boundary-value extension", "[cli]") {
    const auto dir = fresh_dir("extend");
    const json cfg{{"kind", "dirichlet"},
                   {"n", 2},
                   {"a", 0.0},
                   {"f", {{"type", "gaussian"}, {"amplitude", 1.0}, {"width", 1.0}, {"center", {0.0}}}},
                   {"points", {{0.0, 1.0}}}};
    const auto path = write_config(dir, cfg);
    REQUIRE(run_cli("extend --config " + path.string() + " --out " + dir.string(), dir).exit_code ==
            0);
    const json doc = read_json(dir / "extend.json");
    CHECK(doc.at("results").at(0).at("value").get<double>() ==
          Catch::Approx(std::exp(1.0) * std::erfc(1.0)).epsilon(1e-6));
}

TEST_CASE("moving-sphere certificate on an analytic family", "[cli]") {
    const auto dir = fresh_dir("ms");
    const json cfg{{"n", 2},
                   {"a", 0.5},
                   {"u", {{"type", "comparison_family"}}},
                   {"maps", {{"count", 10}}},
                   {"probes", {{"count", 200}}}};
    const auto path = write_config(dir, cfg);
    const RunResult r =
        run_cli("moving-sphere --seed 3 --config " + path.string() + " --out " + dir.string(), dir);
    REQUIRE(r.exit_code == 0);
    const json doc = read_json(dir / "moving_sphere.json");
    CHECK(doc.at("scan").at("global_min").get<double>() >= -1e-12);
    CHECK(doc.at("scan").at("violations").empty());
    CHECK(doc.at("scan").at("per_map").size() == 10);
}

TEST_CASE("classify runs the uniqueness experiment end to end", "[cli]") {
    const auto dir = fresh_dir("classify");
    const json cfg{{"scenario", "dirichlet"}, {"n", 2},     {"L", 1.0},    {"H", 2.0},
                   {"nodes", {33, 33}},       {"a", 0.5},   {"c_star", 2.0}, {"c2", 0.0},
                   {"scan", {{"maps", 6}, {"probes", 128}}}};
    const auto path = write_config(dir, cfg);
    const RunResult r =
        run_cli("classify --config " + path.string() + " --out " + dir.string(), dir);
    REQUIRE(r.exit_code == 0);
    const json doc = read_json(dir / "classify_report.json");
    CHECK(doc.at("fit").at("c_star").get<double>() == Catch::Approx(2.0).epsilon(0.02));
    CHECK(doc.at("tangential_variation").get<double>() <= 0.01);
    CHECK(fs::exists(dir / "classify_field.csv"));
}

TEST_CASE("config is required where it matters", "[cli]") {
    const auto dir = fresh_dir("noconfig");
    CHECK(run_cli("solve --out " + dir.string(), dir).exit_code == 1);
    CHECK(run_cli("kernel eval --out " + dir.string(), dir).exit_code == 1);
}
