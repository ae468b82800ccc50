#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <json.hpp>
#include <sys/wait.h>

#include "tlbethe/cli.hpp"

using json = nlohmann::json;

namespace {

struct CliRun {
    int exit_code;
    std::string out;
    std::string err;
};

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

CliRun run_cli(const std::string& args) {
    static int counter = 0;
    std::string o = "cli_out_" + std::to_string(counter) + ".txt";
    std::string e = "cli_err_" + std::to_string(counter) + ".txt";
    ++counter;
    std::string cmd = std::string(TLB_BINARY) + " " + args + " > " + o + " 2> " + e;
    int rc = std::system(cmd.c_str());
    CliRun r;
    r.exit_code = WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
    r.out = slurp(o);
    r.err = slurp(e);
    std::remove(o.c_str());
    std::remove(e.c_str());
    return r;
}

}  // namespace

TEST_CASE("complex argument parsing") {
    using tlbethe::cli::parse_complex;
    REQUIRE(parse_complex("1.5") == tlbethe::cd(1.5, 0.0));
    REQUIRE(parse_complex("1.5,-0.25") == tlbethe::cd(1.5, -0.25));
    REQUIRE(parse_complex("-2,3") == tlbethe::cd(-2.0, 3.0));
    REQUIRE_THROWS_AS(parse_complex("abc"), std::invalid_argument);
    REQUIRE_THROWS_AS(parse_complex("1.5;2"), std::invalid_argument);
    REQUIRE_THROWS_AS(parse_complex("1.5,2,3"), std::invalid_argument);
}

TEST_CASE("check command passes and emits the documented schema") {
    CliRun r = run_cli("check --N 2 --seeds 10");
    REQUIRE(r.exit_code == 0);
    json doc = json::parse(r.out);
    REQUIRE(doc["schema"] == "tl-bethe/1");
    REQUIRE(doc["command"] == "check");
    REQUIRE(doc["all_pass"] == true);
    REQUIRE(doc["params"]["N"] == 2);
    REQUIRE(doc["params"]["Q"].is_array());
    REQUIRE(doc["params"]["Q"][0] == 1.1);
    REQUIRE(doc["checks"].is_array());
    REQUIRE(doc["checks"].size() >= 20);
    std::string prev;
    for (const auto& c : doc["checks"]) {
        REQUIRE(c["pass"] == true);
        REQUIRE(c["residual"].is_number());
        std::string name = c["name"];
        REQUIRE(prev < name);  // sorted, no duplicates
        prev = name;
    }
}

TEST_CASE("identical configurations produce byte-identical reports") {
    CliRun a = run_cli("check --N 2 --rng-seed 777");
    CliRun b = run_cli("check --N 2 --rng-seed 777");
    REQUIRE(a.exit_code == 0);
    REQUIRE(a.out == b.out);
}

TEST_CASE("impossible tolerance turns the suite red with exit code one") {
    CliRun r = run_cli("check --N 2 --tol-identity 1e-30");
    REQUIRE(r.exit_code == 1);
    json doc = json::parse(r.out);
    REQUIRE(doc["all_pass"] == false);
}

TEST_CASE("table format renders one row per check") {
    CliRun r = run_cli("check --N 2 --format table");
    REQUIRE(r.exit_code == 0);
    REQUIRE(r.out.find("pass") != std::string::npos);
    REQUIRE(r.out.find("all checks passed") != std::string::npos);
}

TEST_CASE("output can be redirected to a file") {
    std::string path = "cli_file_out.json";
    CliRun r = run_cli("check --N 2 --out " + path);
    REQUIRE(r.exit_code == 0);
    REQUIRE(r.out.empty());
    json doc = json::parse(slurp(path));
    REQUIRE(doc["schema"] == "tl-bethe/1");
    std::remove(path.c_str());
}

TEST_CASE("solve finds the full one-magnon family") {
    CliRun r = run_cli("solve --N 3 --M 1 --seeds 60");
    REQUIRE(r.exit_code == 0);
    json doc = json::parse(r.out);
    REQUIRE(doc["command"] == "solve");
    REQUIRE(doc["solutions"].size() == 4);
    REQUIRE(doc["ed"] == "ok");
    for (const auto& s : doc["solutions"]) {
        REQUIRE(s["equation_residual"].get<double>() < 1e-9);
        REQUIRE(s["ed_gap"].get<double>() < 1e-7);
        REQUIRE(s["roots"][0].is_array());
        REQUIRE(s["roots"][0].size() == 2);
    }
}

TEST_CASE("solve on a two-magnon three-site chain reports only rejections") {
    CliRun r = run_cli("solve --N 3 --M 2 --seeds 80");
    REQUIRE(r.exit_code == 0);
    json doc = json::parse(r.out);
    REQUIRE(doc["solutions"].empty());
    REQUIRE(doc["spurious_rejected"].get<int>() > 0);
}

TEST_CASE("diagonalize emits the full spectrum") {
    CliRun r = run_cli("diagonalize --N 2");
    REQUIRE(r.exit_code == 0);
    json doc = json::parse(r.out);
    REQUIRE(doc["hamiltonian_spectrum"].size() == 9);
    REQUIRE(doc["transfer_spectrum"].size() == 9);
}

TEST_CASE("slavnov command compares determinant and direct values") {
    CliRun r = run_cli("slavnov --N 2 --M 1 --seeds 40");
    REQUIRE(r.exit_code == 0);
    json doc = json::parse(r.out);
    REQUIRE(doc["worst_relative_error"].get<double>() < 1e-6);
    REQUIRE(!doc["comparisons"].empty());
    for (const auto& row : doc["comparisons"])
        REQUIRE(row["cauchy_condition"].is_number());
}

TEST_CASE("explicit off-shell left rapidities are a usage error") {
    CliRun r = run_cli("slavnov --N 2 --M 1 --u 1.27,0.31");
    REQUIRE(r.exit_code == 2);
    REQUIRE(r.err.find("Bethe") != std::string::npos);
}

TEST_CASE("usage errors exit with code two") {
    REQUIRE(run_cli("").exit_code == 2);
    REQUIRE(run_cli("frobnicate").exit_code == 2);
    REQUIRE(run_cli("check --N 0").exit_code == 2);
    REQUIRE(run_cli("check --Q 0").exit_code == 2);
    REQUIRE(run_cli("check --Q bogus").exit_code == 2);
    REQUIRE(run_cli("check --branch sideways").exit_code == 2);
    REQUIRE(run_cli("check --format yaml").exit_code == 2);
    REQUIRE(run_cli("solve --M 0").exit_code == 2);
    REQUIRE(run_cli("diagonalize --N 9").exit_code == 2);
    REQUIRE(run_cli("slavnov --M 3").exit_code == 2);
}

TEST_CASE("help is not an error") {
    REQUIRE(run_cli("--help").exit_code == 0);
    REQUIRE(run_cli("check --help").exit_code == 0);
}

TEST_CASE("complex deformation parameters run end to end") {
    CliRun r = run_cli("check --N 2 --Q 1.1,0.2 --branch minus");
    REQUIRE(r.exit_code == 0);
    json doc = json::parse(r.out);
    REQUIRE(doc["all_pass"] == true);
    REQUIRE(doc["params"]["branch"] == "minus");
}
