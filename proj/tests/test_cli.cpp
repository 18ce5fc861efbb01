#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>

#include <json.hpp>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path scratch() {
    static const fs::path root = [] {
        auto p = fs::temp_directory_path() / ("nlcvp-cli-" + std::to_string(::getpid()));
        fs::remove_all(p);
        fs::create_directories(p);
        return p;
    }();
    return root;
}

std::string slurp(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    std::ostringstream os;
    os << is.rdbuf();
    return os.str();
}

struct Run {
    int code = -1;
    std::string out;
};

Run run(const std::string& name, const std::string& config_text, const std::string& extra = "") {
    const char* bin = std::getenv("NLCVP_BIN");
    REQUIRE_MESSAGE(bin, "NLCVP_BIN is not set");
    const fs::path cfg = scratch() / (name + ".json");
    std::ofstream(cfg) << config_text;
    const std::string cmd = std::string("'") + bin + "' --config '" + cfg.string() + "' --out '" +
                            (scratch() / name).string() + "' " + extra + " 2>/dev/null";
    Run r;
    FILE* p = popen(cmd.c_str(), "r");
    REQUIRE(p);
    char buf[4096];
    while (std::fgets(buf, sizeof buf, p)) r.out += buf;
    const int status = pclose(p);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

}  // namespace

TEST_CASE("gauss-green with defaults") {
    const auto r = run("gg", R"({"schema_version": 1, "experiment": "gauss-green"})");
    REQUIRE(r.code == 0);
    const auto s = json::parse(slurp(scratch() / "gg" / "summary.json"));
    CHECK(s["pass"] == true);
    CHECK(s["pair_residual"].get<double>() < 1e-9);
    const auto m = json::parse(slurp(scratch() / "gg" / "manifest.json"));
    CHECK(m["experiment"] == "gauss-green");
    CHECK(m["config"]["params"]["pairs"] == 100);
    CHECK(m.contains("libraries"));
}

TEST_CASE("invalid configurations exit with 2") {
    CHECK(run("bad1", "{not json").code == 2);
    CHECK(run("bad2", R"({"schema_version": 1, "experiment": "robin", "params": {"betas": [1, -1]}})").code == 2);
    CHECK(run("bad3", R"({"schema_version": 3, "experiment": "robin"})").code == 2);
}

TEST_CASE("numerical failures exit with 3") {
    const auto r = run("gamma", R"({"schema_version": 1, "experiment": "nonexistence-probe", "params": {"gamma": 1.5}})");
    CHECK(r.code == 3);
    const auto s = json::parse(slurp(scratch() / "gamma" / "summary.json"));
    CHECK(s["error"] == "data-not-integrable");
}

TEST_CASE("probe reports divergence") {
    const auto r = run("probe", R"({"schema_version": 1, "experiment": "nonexistence-probe", "params": {"gamma": 0.8}})");
    REQUIRE(r.code == 0);
    CHECK(json::parse(r.out)["verdict"] == "divergent");
    CHECK(fs::exists(scratch() / "probe" / "probe.csv"));
}

TEST_CASE("outputs are byte identical across runs and thread counts") {
    const std::string cfg =
        R"({"schema_version": 1, "experiment": "solve", "seed": 9,
            "kernel": {"family": "fractional", "params": {"alpha": 0.6}},
            "params": {"variant": "robin", "refinements": [0.25, 0.125]}})";
    REQUIRE(run("rep1", cfg, "--threads 1 --mesh-dump --matrix-dump").code == 0);
    REQUIRE(run("rep2", cfg, "--threads 1 --mesh-dump --matrix-dump").code == 0);
    REQUIRE(run("rep3", cfg, "--threads 2 --mesh-dump --matrix-dump").code == 0);
    int compared = 0;
    for (const auto& e : fs::directory_iterator(scratch() / "rep1")) {
        const auto name = e.path().filename();
        if (name == "manifest.json") continue;  // records the thread count
        CHECK_MESSAGE(slurp(e.path()) == slurp(scratch() / "rep2" / name), name.string());
        CHECK_MESSAGE(slurp(e.path()) == slurp(scratch() / "rep3" / name), name.string());
        ++compared;
    }
    CHECK(compared >= 9);
    CHECK(slurp(scratch() / "rep1" / "manifest.json") == slurp(scratch() / "rep2" / "manifest.json"));
}
