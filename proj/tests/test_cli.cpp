#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <fstream>
#include <sstream>

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

void spit(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    REQUIRE(out);
    out << content;
}

int run_cli(const std::string& args) {
    std::string cmd = std::string(SOBOCOMP_CLI_PATH) + " " + args + " > /dev/null 2>&1";
    int rc = std::system(cmd.c_str());
    return WEXITSTATUS(rc);
}

const char* kTinyGeneral = R"({
  "domain": {"dim": 1, "bounds": [[0.0, 1.0]], "cells": [512]},
  "measures": {"w": "lebesgue", "nu": "lebesgue", "mu": "lebesgue"},
  "family": {"preset": "sine_decay", "count": 8, "M": 2.0},
  "exponents": {"p": "2", "N": "inf", "q_list": ["1"]},
  "engine": {"eps_schedule": [0.1, 0.05]}
})";

}  // namespace

TEST_CASE("cli golden determinism") {
    spit("/tmp/sobocomp_tiny.json", kTinyGeneral);
    REQUIRE(run_cli("compact-general --config /tmp/sobocomp_tiny.json --out /tmp/sobocomp_g1") == 0);
    REQUIRE(run_cli("compact-general --config /tmp/sobocomp_tiny.json --out /tmp/sobocomp_g2") == 0);
    CHECK(slurp("/tmp/sobocomp_g1/summary.json") == slurp("/tmp/sobocomp_g2/summary.json"));
    CHECK(slurp("/tmp/sobocomp_g1/levels.csv") == slurp("/tmp/sobocomp_g2/levels.csv"));
    CHECK(slurp("/tmp/sobocomp_g1/cover_0.csv") == slurp("/tmp/sobocomp_g2/cover_0.csv"));

    // column order is pinned
    CHECK(slurp("/tmp/sobocomp_g1/levels.csv").rfind("eps,J,radius,M,I,II,modulus,bound_L1,T_eps",
                                                     0) == 0);
}

TEST_CASE("cli exit codes") {
    spit("/tmp/sobocomp_bad.json", "{broken");
    CHECK(run_cli("cover --config /tmp/sobocomp_bad.json") == 3);
    CHECK(run_cli("cover --config /tmp/does_not_exist.json") == 3);

    // certificate refusal surfaces as a hypothesis violation (exit 1)
    spit("/tmp/sobocomp_neg.json", R"({
      "domain": {"dim": 1, "bounds": [[0.0, 1.0]], "cells": [512]},
      "measures": {"w": "lebesgue", "nu": "lebesgue", "mu": "lebesgue"},
      "family": {"preset": "sine", "count": 8, "M": 2.0},
      "exponents": {"p": "2", "N": "inf", "q_list": ["1"]},
      "engine": {"eps_schedule": [0.1]}
    })");
    CHECK(run_cli("compact-general --config /tmp/sobocomp_neg.json --out /tmp/sobocomp_neg_out") == 1);
}

TEST_CASE("cli threads flag preserves results") {
    spit("/tmp/sobocomp_tiny.json", kTinyGeneral);
    REQUIRE(run_cli("compact-general --config /tmp/sobocomp_tiny.json --out /tmp/sobocomp_t1 --threads 1") == 0);
    REQUIRE(run_cli("compact-general --config /tmp/sobocomp_tiny.json --out /tmp/sobocomp_t4 --threads 4") == 0);
    CHECK(slurp("/tmp/sobocomp_t1/summary.json") == slurp("/tmp/sobocomp_t4/summary.json"));
}

TEST_CASE("cli runs a bundled scenario") {
    std::string cfg = std::string(SOBOCOMP_SOURCE_DIR) + "/scenarios/exponents_grid.json";
    CHECK(run_cli("exponents --config " + cfg + " --out /tmp/sobocomp_scenario_out") == 0);
    std::string summary = slurp("/tmp/sobocomp_scenario_out/summary.json");
    CHECK(summary.find("verdicts") != std::string::npos);
}

TEST_CASE("cli exponents subcommand prints the verdict table") {
    spit("/tmp/sobocomp_exp.json", R"({
      "lab": {"grid": {"n": [2], "p": ["2"], "a": ["0"], "b": ["0"], "s": ["3/2", "3"], "part": "i"}}
    })");
    std::string cmd = std::string(SOBOCOMP_CLI_PATH) +
                      " exponents --config /tmp/sobocomp_exp.json --out /tmp/sobocomp_exp_out"
                      " > /tmp/sobocomp_exp_stdout.txt 2>&1";
    REQUIRE(WEXITSTATUS(std::system(cmd.c_str())) == 0);
    std::string out = slurp("/tmp/sobocomp_exp_stdout.txt");
    // s = 3/2 < 1 + p/(n-1) = 3 holds; s = 3 does not
    CHECK(out.find("\"holds\":true") != std::string::npos);
    CHECK(out.find("\"holds\":false") != std::string::npos);
}

TEST_CASE("cli tripled euclidean cover scenario") {
    std::string cfg = std::string(SOBOCOMP_SOURCE_DIR) + "/scenarios/cover_triples_interval.json";
    REQUIRE(run_cli("cover --config " + cfg + " --out /tmp/sobocomp_triples") == 0);
    std::string summary = slurp("/tmp/sobocomp_triples/summary.json");
    CHECK(summary.find("\"coverage_deficit\"") != std::string::npos);
    // 1-d tripled intervals never overlap more than sevenfold
    auto pos = summary.find("\"overlap_M\":");
    REQUIRE(pos != std::string::npos);
    int M = std::stoi(summary.substr(pos + 12));
    CHECK(M >= 1);
    CHECK(M <= 7);
}

TEST_CASE("bundled scenario sweep is reproducible") {
    // every bundled scenario runs twice with byte-identical summaries; the
    // negative control must refuse both times
    const char* scenarios[] = {
        "cover_square",           "cover_triples_interval", "poincare_interval",
        "apcheck_sqrt",           "doubling_sqrt",          "exponents_grid",
        "partition_square",       "sobolev_local_interval", "compact_abstract_reduction",
        "compact_local_spike",    "compact_quasimetric_radius",
    };
    const char* commands[] = {
        "cover",           "cover",          "poincare",
        "apcheck",         "doubling",       "exponents",
        "partition",       "sobolev-local",  "compact-abstract",
        "compact-local",   "compact-quasimetric",
    };
    for (size_t i = 0; i < std::size(scenarios); ++i) {
        std::string cfg = std::string(SOBOCOMP_SOURCE_DIR) + "/scenarios/" + scenarios[i] + ".json";
        std::string o1 = std::string("/tmp/sweep_") + scenarios[i] + "_1";
        std::string o2 = std::string("/tmp/sweep_") + scenarios[i] + "_2";
        INFO(scenarios[i]);
        REQUIRE(run_cli(std::string(commands[i]) + " --config " + cfg + " --out " + o1) == 0);
        REQUIRE(run_cli(std::string(commands[i]) + " --config " + cfg + " --out " + o2) == 0);
        CHECK(slurp(o1 + "/summary.json") == slurp(o2 + "/summary.json"));
    }
    std::string neg = std::string(SOBOCOMP_SOURCE_DIR) + "/scenarios/compact_general_sine_negative.json";
    CHECK(run_cli("compact-general --config " + neg + " --out /tmp/sweep_neg") == 1);
}
