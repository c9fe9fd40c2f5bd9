#include <volterra/cli.hpp>

#include <catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

namespace fs = std::filesystem;
using volterra::cli::run_cli;

namespace {

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run run(const std::vector<std::string>& args) {
    std::ostringstream out, err;
    const int code = run_cli(args, out, err);
    return {code, out.str(), err.str()};
}

std::string fixture(const std::string& name) { return std::string(VOLTERRA_FIXTURE_DIR) + "/" + name + ".json"; }

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path scratch_dir(const std::string& tag) {
    const auto dir = fs::temp_directory_path() / ("volterra_cli_test_" + tag);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

}  // namespace

TEST_CASE("certify prints the one-line verdict", "[cli]") {
    const auto r = run({"certify", "--kernel", fixture("renewal")});
    CHECK(r.code == 0);
    CHECK(r.out == "asymptotically_stable (EFP, rigorous)\n");
}

TEST_CASE("certify writes the report and a metadata sidecar", "[cli]") {
    const auto dir = scratch_dir("certify");
    const auto out = (dir / "report.json").string();
    REQUIRE(run({"certify", "--kernel", fixture("double_root_unstable"), "--out", out}).code == 0);
    const auto first = slurp(out);
    const auto report = nlohmann::json::parse(first);
    CHECK(report.at("final").at("verdict") == "unstable");
    CHECK(report.at("final").at("criterion") == "RealAxisRoot");
    CHECK(report.contains("kernel_id"));
    CHECK(fs::exists(out + ".meta.json"));
    CHECK(nlohmann::json::parse(slurp(out + ".meta.json")).contains("created"));
    // no timestamps in the data file: reruns are byte-identical
    REQUIRE(run({"certify", "--kernel", fixture("double_root_unstable"), "--out", out}).code == 0);
    CHECK(slurp(out) == first);
    fs::remove_all(dir);
}

TEST_CASE("simulate writes CSV", "[cli]") {
    const auto r = run({"simulate", "--kernel", fixture("negative_geometric_p3"), "--steps", "3"});
    CHECK(r.code == 0);
    CHECK(r.out == "n,x\n0,1\n1,-3\n2,0\n3,0\n");
}

TEST_CASE("simulate JSON and file output", "[cli]") {
    const auto dir = scratch_dir("simulate");
    const auto out = (dir / "traj.json").string();
    REQUIRE(run({"simulate", "--kernel", fixture("half_geometric"), "--steps", "5", "--format", "json", "--out", out})
                .code == 0);
    const auto j = nlohmann::json::parse(slurp(out));
    REQUIRE(j.at("values").size() == 6);
    CHECK(j.at("values").at(0) == 1.0);
    CHECK(j.at("values").at(5).get<double>() == Catch::Approx(0.5).margin(1e-15));
    fs::remove_all(dir);
}

TEST_CASE("roots writes the root set", "[cli]") {
    const auto r = run({"roots", "--kernel", fixture("double_root_stable_plus"), "--n", "2"});
    REQUIRE(r.code == 0);
    const auto j = nlohmann::json::parse(r.out);
    CHECK(j.at("n") == 2);
    REQUIRE(j.at("roots").size() == 2);
    for (const auto& z : j.at("roots")) {
        CHECK(std::fabs(z.at("re").get<double>() - 0.75) <= 1e-9);
        CHECK(std::fabs(z.at("im").get<double>()) <= 1e-9);
    }
    CHECK(std::fabs(j.at("r_n").get<double>() - 0.75) <= 1e-9);
    CHECK(j.at("residual_bound").get<double>() <= 1e-8);
}

TEST_CASE("reproduce-paper matches the published table", "[cli]") {
    const auto r = run({"reproduce-paper"});
    CHECK(r.code == 0);
    CHECK(r.out.find("6, 0.667, 0.00024, 0.00137\n") != std::string::npos);
    CHECK(r.out.find("5, 0.781, 0.04963, 0.00050\n") != std::string::npos);
    CHECK(r.out.find("1, 1.000, -, -\n") != std::string::npos);
    CHECK(r.out.find("six_term_stable: asymptotically_stable (RoucheStable, rigorous)") != std::string::npos);
    CHECK(r.out.find("renewal: asymptotically_stable (EFP, rigorous)") != std::string::npos);
    CHECK(r.err.empty());
}

TEST_CASE("reproduce-paper fails on a deviating fixture", "[cli]") {
    const auto dir = scratch_dir("fixtures");
    for (const auto& entry : fs::directory_iterator(VOLTERRA_FIXTURE_DIR)) fs::copy(entry.path(), dir / entry.path().filename());
    // perturb the six-term prefix so r_4 moves
    auto j = nlohmann::json::parse(slurp(dir / "six_term_stable.json"));
    j["prefix"][3] = -0.3;
    std::ofstream(dir / "six_term_stable.json") << j.dump();
    const auto r = run({"reproduce-paper", "--fixtures", dir.string()});
    CHECK(r.code == 1);
    CHECK(r.err.find("deviation") != std::string::npos);
    fs::remove_all(dir);
}

TEST_CASE("parse errors exit with code 2", "[cli]") {
    CHECK(run({}).code == 2);
    CHECK(run({"certify"}).code == 2);
    CHECK(run({"certify", "--kernel", fixture("renewal"), "--bogus"}).code == 2);
    CHECK(run({"simulate", "--kernel", fixture("renewal"), "--format", "xml"}).code == 2);
    CHECK(run({"roots", "--kernel", fixture("renewal")}).code == 2);
    CHECK(run({"frobnicate"}).code == 2);
}

TEST_CASE("malformed kernels name the offending field", "[cli]") {
    const auto dir = scratch_dir("bad");
    const auto write = [&](const std::string& name, const std::string& text) {
        std::ofstream(dir / name) << text;
        return (dir / name).string();
    };
    const auto bad_prefix = write("a.json", R"({"prefix": [1, "x"], "tail": {"kind": "zero"}})");
    auto r = run({"certify", "--kernel", bad_prefix});
    CHECK(r.code == 2);
    CHECK(r.err.find("prefix[1]") != std::string::npos);

    const auto bad_tail = write("b.json", R"({"prefix": [], "tail": {"kind": "parametric", "c": 1, "q": 0.5, "alpha": 0}})");
    r = run({"simulate", "--kernel", bad_tail});
    CHECK(r.code == 2);
    CHECK(r.err.find("tail.beta") != std::string::npos);

    const auto not_json = write("c.json", "{prefix");
    CHECK(run({"roots", "--kernel", not_json, "--n", "2"}).code == 2);
    CHECK(run({"roots", "--kernel", (dir / "missing.json").string(), "--n", "2"}).code == 2);
    fs::remove_all(dir);
}

TEST_CASE("root-finder failure exits with code 3", "[cli]") {
    const auto dir = scratch_dir("nc");
    const auto path = (dir / "k.json").string();
    std::ofstream(path) << R"({"prefix": [1e200, 1e-200, 1e200, 1e-200, 1e200, 1e-200, 1e200, 1e-200], "tail": {"kind": "zero"}})";
    const auto r = run({"roots", "--kernel", path, "--n", "8"});
    CHECK(r.code == 3);
    CHECK_FALSE(r.err.empty());
    fs::remove_all(dir);
}

TEST_CASE("defaults are applied", "[cli]") {
    const auto dir = scratch_dir("defaults");
    const auto out = (dir / "r.json").string();
    REQUIRE(run({"certify", "--kernel", fixture("half_geometric"), "--out", out}).code == 0);
    const auto meta = nlohmann::json::parse(slurp(out + ".meta.json"));
    CHECK(meta.at("steps") == 10000);
    CHECK(meta.at("max_degree") == 32);
    CHECK(meta.at("grid_points") == 4096);
    const auto report = nlohmann::json::parse(slurp(out));
    CHECK(report.at("empirical").at("steps") == 10000);
    fs::remove_all(dir);
}
