#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <unistd.h>
#include <vector>

#include "cli_app.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

struct CaptureStdout {
    std::stringstream buffer;
    std::streambuf* old;
    CaptureStdout() : old(std::cout.rdbuf(buffer.rdbuf())) {}
    ~CaptureStdout() { std::cout.rdbuf(old); }
    std::string str() const { return buffer.str(); }
};

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("belllab_test_" + std::to_string(::getpid()) + "_" +
                std::to_string(counter()++));
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
    static int& counter() {
        static int c = 0;
        return c;
    }
    std::string prefix(const std::string& name) const { return (path / name).string(); }
};

int run(const std::vector<std::string>& args, std::string* out = nullptr) {
    CaptureStdout cap;
    const int code = belllab::cli::run_cli(args);
    if (out != nullptr) *out = cap.str();
    return code;
}

std::string slurp(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    REQUIRE(is.good());
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("simulate writes trials, summary and manifest") {
    TempDir dir;
    const std::string prefix = dir.prefix("run1");
    std::string out;
    const int code = run({"simulate", "--model", "qm", "--rounds", "100000", "--seed", "7",
                          "--angles", "0,90,45,315", "--out", prefix},
                         &out);
    REQUIRE(code == 0);

    const ordered_json summary = ordered_json::parse(slurp(prefix + ".summary.json"));
    REQUIRE(summary["model"] == "qm");
    REQUIRE(summary["rounds"] == 100000);
    REQUIRE(summary["feasible"] == false);
    REQUIRE(summary["max_deterministic_S"] == 2.0);
    const double s = summary["S"].get<double>();
    const double se = summary["SE"].get<double>();
    REQUIRE(std::abs(s - (-2.82842712)) <= 3.0 * se);
    REQUIRE(summary["sigma_above_2"].get<double>() > 5.0);

    // stdout carries the same summary
    REQUIRE(ordered_json::parse(out) == summary);

    const auto records = [&] {
        std::ifstream is(prefix + ".trials.csv");
        return belllab::models::read_trial_csv(is);
    }();
    REQUIRE(records.size() == 100000);

    const ordered_json manifest = ordered_json::parse(slurp(prefix + ".manifest.json"));
    REQUIRE(manifest["command"] == "simulate");
    REQUIRE(manifest["version"] == belllab::kVersion);
    REQUIRE(manifest["seed"] == 7);
    REQUIRE(manifest["outputs"].size() == 2);
}

TEST_CASE("replaying the manifest argv reproduces outputs byte for byte") {
    TempDir dir;
    const std::string prefix = dir.prefix("runA");
    REQUIRE(run({"simulate", "--model", "lhv-cos", "--rounds", "5000", "--seed", "42",
                 "--angles", "0,90,45,315", "--out", prefix}) == 0);
    const std::string trials = slurp(prefix + ".trials.csv");
    const std::string summary = slurp(prefix + ".summary.json");
    const ordered_json manifest = ordered_json::parse(slurp(prefix + ".manifest.json"));

    // rerun with the recorded argv, into a second prefix
    std::vector<std::string> argv = manifest["argv"].get<std::vector<std::string>>();
    const std::string prefix2 = dir.prefix("runB");
    for (std::string& a : argv)
        if (a == prefix) a = prefix2;
    REQUIRE(run(argv) == 0);
    REQUIRE(slurp(prefix2 + ".trials.csv") == trials);
    REQUIRE(slurp(prefix2 + ".summary.json") == summary);
}

TEST_CASE("worker count does not change the output") {
    TempDir dir;
    const std::string p1 = dir.prefix("w1");
    const std::string p4 = dir.prefix("w4");
    REQUIRE(run({"simulate", "--model", "qm", "--rounds", "8000", "--seed", "5", "--angles",
                 "0,90,45,315", "--out", p1}) == 0);
    REQUIRE(run({"simulate", "--model", "qm", "--rounds", "8000", "--seed", "5", "--angles",
                 "0,90,45,315", "--out", p4, "--workers", "4"}) == 0);
    REQUIRE(slurp(p1 + ".trials.csv") == slurp(p4 + ".trials.csv"));
    REQUIRE(slurp(p1 + ".summary.json") == slurp(p4 + ".summary.json"));
}

TEST_CASE("BELLLAB_SEED provides the default seed") {
    TempDir dir;
    ::setenv("BELLLAB_SEED", "12345", 1);
    const std::string p_env = dir.prefix("env");
    REQUIRE(run({"simulate", "--model", "qm", "--rounds", "1000", "--angles", "0,90,45,315",
                 "--out", p_env}) == 0);
    ::unsetenv("BELLLAB_SEED");
    const std::string p_flag = dir.prefix("flag");
    REQUIRE(run({"simulate", "--model", "qm", "--rounds", "1000", "--seed", "12345", "--angles",
                 "0,90,45,315", "--out", p_flag}) == 0);
    REQUIRE(slurp(p_env + ".trials.csv") == slurp(p_flag + ".trials.csv"));
}

TEST_CASE("usage errors exit with code 2") {
    TempDir dir;
    REQUIRE(run({"simulate", "--model", "qm", "--rounds", "0", "--out", dir.prefix("x")}) == 2);
    REQUIRE(run({"simulate", "--model", "nonsense", "--out", dir.prefix("x")}) == 2);
    REQUIRE(run({"simulate", "--model", "qm", "--rounds", "10"}) == 2);  // --out missing
    REQUIRE(run({"nonsense"}) == 2);
    REQUIRE(run({}) == 2);
    REQUIRE(run({"verify", "nonsense"}) == 2);
    REQUIRE(run({"simulate", "--model", "lhv-table", "--rounds", "10", "--out",
                 dir.prefix("x")}) == 2);  // strategy file missing
}

TEST_CASE("io failures exit with code 3") {
    REQUIRE(run({"simulate", "--model", "qm", "--rounds", "10", "--out",
                 "/nonexistent_dir_zz9/run"}) == 3);
}

TEST_CASE("verify spectrum emits the expected report") {
    std::string out;
    REQUIRE(run({"verify", "spectrum"}, &out) == 0);
    const ordered_json rep = ordered_json::parse(out);
    REQUIRE(rep["pass"] == true);
    REQUIRE(rep["singlet_eigenvalue"] == -3.0);
    REQUIRE(rep["eigenvalues"].size() == 4);
    REQUIRE(rep["eigenvalues"][0] == -3.0);
    REQUIRE(rep["eigenvalues"][1] == 1.0);
    REQUIRE(rep["multiplicities"] == ordered_json::array({1, 3}));
}

TEST_CASE("verify relatedness reports pairwise witnesses") {
    std::string out;
    REQUIRE(run({"verify", "relatedness"}, &out) == 0);
    const ordered_json rep = ordered_json::parse(out);
    REQUIRE(rep["pass"] == true);
    REQUIRE(rep["pairs"].size() == 3);
    for (const auto& pair : rep["pairs"]) REQUIRE(pair["related"] == true);
    REQUIRE(rep["pairs"][0]["witness"] == 315);
    REQUIRE(rep["theorem1"]["composition_verified"] == true);
}

TEST_CASE("verify theorem1 finds no counterexamples") {
    std::string out;
    REQUIRE(run({"verify", "theorem1"}, &out) == 0);
    const ordered_json rep = ordered_json::parse(out);
    REQUIRE(rep["counterexamples"] == 0);
    REQUIRE(rep["hypothesis_met"].get<int>() > 0);
    REQUIRE(rep["vacuous"].get<int>() > 0);
}

TEST_CASE("verify theorem2 tabulates C and D") {
    std::string out;
    REQUIRE(run({"verify", "theorem2"}, &out) == 0);
    const ordered_json rep = ordered_json::parse(out);
    REQUIRE(rep["pass"] == true);
    REQUIRE(rep["d_plus_count"] == 8);
    REQUIRE(rep["points"].size() == 16);
    REQUIRE(rep["points"][0]["C"] == 2);   // (+1,+1,+1,+1)
    REQUIRE(rep["points"][1]["C"] == 0);   // (+1,+1,+1,-1)
    REQUIRE(rep["points"][1]["D"] == -1);
    REQUIRE(rep["group_size"] == 384);
}

TEST_CASE("enumerate reports the classical maximum") {
    std::string out;
    REQUIRE(run({"enumerate"}, &out) == 0);
    const ordered_json rep = ordered_json::parse(out);
    REQUIRE(rep["max_S"] == 2.0);
    REQUIRE(rep["argmax_count"] == 8);
    REQUIRE(rep["argmax_tables"].size() == 8);
}

TEST_CASE("optimize reports the Tsirelson value") {
    std::string out;
    REQUIRE(run({"optimize", "--model", "qm"}, &out) == 0);
    const ordered_json rep = ordered_json::parse(out);
    REQUIRE(std::abs(rep["S_abs"].get<double>() - 2.8284271) <= 1e-6);

    REQUIRE(run({"optimize", "--model", "lhv-cos", "--start", "10,20,30,40"}, &out) == 0);
    const ordered_json rep2 = ordered_json::parse(out);
    REQUIRE(rep2["S_abs"].get<double>() <= 2.0 + 1e-9);
}

TEST_CASE("feasibility subcommand distinguishes the models") {
    std::string out;
    REQUIRE(run({"feasibility", "--model", "qm", "--angles", "0,90,45,315"}, &out) == 0);
    const ordered_json qm = ordered_json::parse(out);
    REQUIRE(qm["feasible"] == false);
    REQUIRE(qm["violated_variant"] == "a'b'");
    REQUIRE(std::abs(qm["violated_value"].get<double>() - (-2.82842712)) <= 1e-6);

    REQUIRE(run({"feasibility", "--model", "lhv-cos", "--angles", "0,90,45,315"}, &out) == 0);
    const ordered_json lhv = ordered_json::parse(out);
    REQUIRE(lhv["feasible"] == true);
    REQUIRE(lhv["joint"].size() == 16);
}

TEST_CASE("strategy files drive lhv-table runs") {
    TempDir dir;
    const std::string table_path = dir.prefix("tables.json");
    {
        std::ofstream os(table_path);
        os << R"([{"A": 1, "A'": 1, "B": 1, "B'": 1, "weight": 1.0}])";
    }
    const std::string prefix = dir.prefix("table_run");
    std::string out;
    REQUIRE(run({"simulate", "--model", "lhv-table", "--rounds", "2000", "--seed", "9",
                 "--angles", "0,90,45,315", "--out", prefix, "--strategy-file", table_path},
                &out) == 0);
    const ordered_json summary = ordered_json::parse(out);
    REQUIRE(summary["S"] == 2.0);
    REQUIRE(summary["feasible"] == true);

    // malformed strategy file is a usage error
    const std::string bad_path = dir.prefix("bad.json");
    {
        std::ofstream os(bad_path);
        os << "{not json";
    }
    REQUIRE(run({"simulate", "--model", "lhv-table", "--rounds", "10", "--out", prefix,
                 "--strategy-file", bad_path}) == 2);
}

TEST_CASE("sweep emits the correlation curve") {
    TempDir dir;
    const std::string prefix = dir.prefix("sweep");
    REQUIRE(run({"simulate", "--model", "lhv-cos", "--rounds", "4000", "--seed", "3", "--angles",
                 "0,90,45,315", "--out", prefix, "--sweep", "--sweep-points", "19"}) == 0);
    std::istringstream is(slurp(prefix + ".sweep.csv"));
    std::string header;
    REQUIRE(std::getline(is, header));
    REQUIRE(header == "theta_deg,E_model,E_empirical");
    int rows = 0;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        ++rows;
        const auto fields = belllab::models::detail::split_csv_line(line);
        REQUIRE(fields.size() == 3);
        const double theta = std::stod(fields[0]);
        const double e_model = std::stod(fields[1]);
        const double e_emp = std::stod(fields[2]);
        REQUIRE(e_model == Catch::Approx(-1.0 + 2.0 * theta / 180.0).margin(1e-6));
        REQUIRE(std::abs(e_emp - e_model) <= 4.0 / std::sqrt(4000.0));
    }
    REQUIRE(rows == 19);
    const ordered_json manifest = ordered_json::parse(slurp(prefix + ".manifest.json"));
    REQUIRE(manifest["outputs"].size() == 1);
}

TEST_CASE("summary json uses 9 significant digits") {
    // spot check the formatter itself
    REQUIRE(belllab::cli::sig9(-2.8284271247461903) == -2.82842712);
    REQUIRE(belllab::cli::sig9(0.3333333333333333) == 0.333333333);
    REQUIRE(belllab::cli::sig9(2.0) == 2.0);
}
