#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <doctest.h>
#include <json.hpp>

#include "cli.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using r2d2surv::cli::run;

namespace {

fs::path scratch(const std::string& name) {
    fs::path dir = fs::temp_directory_path() / ("r2d2surv_cli_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

void spit(const fs::path& p, const std::string& text) { std::ofstream(p, std::ios::binary) << text; }

const fs::path kToy = fs::path(FIXTURE_DIR) / "toy.csv";

std::vector<std::string> fit_args(const fs::path& out) {
    return {"fit", "--data", kToy.string(), "--seed", "5", "--iterations", "1200", "--burn-in", "400",
            "--thin", "2", "--out", out.string(), "-q"};
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("usage errors") {
    CHECK(run(std::vector<std::string>{}) == r2d2surv::cli::kUsage);
    CHECK(run({"frobnicate"}) == r2d2surv::cli::kUsage);
    const auto out = scratch("noseed");
    CHECK(run({"fit", "--data", kToy.string(), "--out", out.string(), "-q"}) == r2d2surv::cli::kUsage);
    CHECK(run({"fit", "--data", (out / "missing.csv").string(), "--seed", "1", "-q"}) == r2d2surv::cli::kUsage);
    CHECK(run({"approx-gbp", "--a", "-1", "--b", "1", "--theta", "1", "-q"}) == r2d2surv::cli::kUsage);
}

TEST_CASE("data errors exit with code 2") {
    const auto dir = scratch("baddata");
    spit(dir / "nostatus.csv", "time,x\n1,2\n2,3\n3,1\n");
    CHECK(run({"fit", "--data", (dir / "nostatus.csv").string(), "--seed", "1", "--out", dir.string(), "-q"}) ==
          r2d2surv::cli::kDataError);
    spit(dir / "badnum.csv", "time,status,x\n1,1,2\n2,1,oops\n");
    CHECK(run({"fit", "--data", (dir / "badnum.csv").string(), "--seed", "1", "--out", dir.string(), "-q"}) ==
          r2d2surv::cli::kDataError);
}

TEST_CASE("fit writes a deterministic summary") {
    const auto a = scratch("fit_a"), b = scratch("fit_b");
    REQUIRE(run(fit_args(a)) == r2d2surv::cli::kOk);
    REQUIRE(run(fit_args(b)) == r2d2surv::cli::kOk);
    const std::string sa = slurp(a / "fit_summary.json");
    CHECK(sa == slurp(b / "fit_summary.json"));
    CHECK(slurp(a / "fit_trace.csv") == slurp(b / "fit_trace.csv"));

    const json doc = json::parse(sa);
    CHECK(doc["schema_version"] == r2d2surv::cli::kSchemaVersion);
    CHECK(doc["command"] == "fit");
    CHECK(doc["seed"] == 5);
    CHECK(doc["data"]["n"] == 20);
    CHECK(doc["data"]["p"] == 3);
    CHECK(doc["data"]["events"] == 17);
    REQUIRE(doc["coefficients"].size() == 3);
    CHECK(doc["coefficients"][0]["name"] == "age");
    for (const auto& c : doc["coefficients"]) {
        CHECK(c["lower"].get<double>() <= c["median"].get<double>());
        CHECK(c["median"].get<double>() <= c["upper"].get<double>());
    }
    CHECK(doc["r2"]["median"].get<double>() >= 0.0);
    CHECK(doc["acceptance"].contains("beta0"));

    // trace: header plus (1200 - 400) / 2 rows
    std::istringstream trace(slurp(a / "fit_trace.csv"));
    std::string line;
    int lines = 0;
    std::getline(trace, line);
    CHECK(line.rfind("iteration,", 0) == 0);
    while (std::getline(trace, line)) ++lines;
    CHECK(lines == 400);

    const auto c = scratch("fit_c");
    auto other = fit_args(c);
    other[4] = "6";
    REQUIRE(run(other) == r2d2surv::cli::kOk);
    CHECK(slurp(c / "fit_summary.json") != sa);
}

TEST_CASE("fit with the other priors") {
    for (const char* prior : {"horseshoe", "gaussian"}) {
        const auto dir = scratch(std::string("fit_") + prior);
        auto args = fit_args(dir);
        args.push_back("--prior");
        args.push_back(prior);
        REQUIRE(run(args) == r2d2surv::cli::kOk);
        const json doc = json::parse(slurp(dir / "fit_summary.json"));
        CHECK(doc["prior"] == prior);
        CHECK(doc["coefficients"].size() == 3);
    }
}

TEST_CASE("approx-gbp matches the golden file") {
    const auto dir = scratch("gbp");
    REQUIRE(run({"approx-gbp", "--a", "0.5", "--b", "0.5", "--theta", "1.6487", "--out", dir.string(), "-q"}) ==
            r2d2surv::cli::kOk);
    const json got = json::parse(slurp(dir / "approx_gbp.json"));
    const json want = json::parse(slurp(fs::path(FIXTURE_DIR) / "approx_gbp_0.5_0.5_1.6487.json"));
    for (const char* key : {"a", "b", "theta", "a_star", "b_star", "d_star", "divergence"})
        CHECK(got[key].get<double>() == doctest::Approx(want[key].get<double>()).epsilon(1e-9));
    CHECK(got["converged"] == want["converged"]);
    CHECK(got["ill_conditioned"] == want["ill_conditioned"]);
}

TEST_CASE("simulate writes one row per replicate and method") {
    const auto dir = scratch("sim");
    spit(dir / "ext.csv", "method,setting,replicate,metric,value\ncox_ridge,p20_rho0.5,0,auc,0.7\n");
    REQUIRE(run({"simulate", "--p", "20", "--replicates", "2", "--iterations", "1000", "--burn-in", "400", "--thin",
                 "1", "--seed", "3", "--threads", "1", "--external-results", (dir / "ext.csv").string(), "--out",
                 dir.string(), "-q"}) == r2d2surv::cli::kOk);
    std::istringstream reps(slurp(dir / "simulate_replicates.csv"));
    std::string line;
    std::getline(reps, line);
    int r2d2 = 0, hs = 0;
    while (std::getline(reps, line)) {
        r2d2 += line.rfind("r2d2_0.5_0.5,", 0) == 0;
        hs += line.rfind("horseshoe,", 0) == 0;
    }
    CHECK(r2d2 == 2);
    CHECK(hs == 2);
    const std::string summary = slurp(dir / "simulate_summary.csv");
    CHECK(summary.find("cox_ridge,p20_rho0.5,auc") != std::string::npos);
    CHECK(json::parse(slurp(dir / "simulate.json"))["command"] == "simulate");
}

TEST_CASE("mediate end to end") {
    const auto dir = scratch("med");
    std::ostringstream outcome, mediators, exposures;
    outcome << "time,status\n";
    mediators << "m_cont,m_bin\n";
    exposures << "e1,e2,e3\n";
    for (int i = 0; i < 60; ++i) {
        const double e1 = std::sin(i * 0.7), e2 = std::cos(i * 1.3), e3 = std::sin(i * 2.1 + 0.4);
        const double m = 0.5 * e1 + 0.3 * std::cos(i * 3.7);
        outcome << (1.0 + 0.5 * std::abs(std::sin(i * 0.9)) + 0.1 * m) << ',' << (i % 5 ? 1 : 0) << '\n';
        mediators << m << ',' << (i % 3 == 0 ? 1 : 0) << '\n';
        exposures << e1 << ',' << e2 << ',' << e3 << '\n';
    }
    spit(dir / "y.csv", outcome.str());
    spit(dir / "m.csv", mediators.str());
    spit(dir / "x.csv", exposures.str());
    REQUIRE(run({"mediate", "--outcome", (dir / "y.csv").string(), "--mediators", (dir / "m.csv").string(),
                 "--exposures", (dir / "x.csv").string(), "--iterations", "1500", "--burn-in", "500", "--seed", "9",
                 "--mean-age", "70", "--out", dir.string(), "-q"}) == r2d2surv::cli::kOk);
    const json doc = json::parse(slurp(dir / "mediate.json"));
    CHECK(doc["command"] == "mediate");
    CHECK(fs::exists(dir / "mediate_effects.csv"));
    CHECK(fs::exists(dir / "mediate_delta_days.csv"));
    const std::string effects = slurp(dir / "mediate_effects.csv");
    CHECK(effects.find("e1") != std::string::npos);
    CHECK(effects.find("e3") != std::string::npos);
}

}
