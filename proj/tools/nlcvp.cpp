// Command line runner: one experiment per JSON config.
//
//   nlcvp --config run.json --out results/ [--threads N] [--mesh-dump] [--matrix-dump]
//
// Exit codes: 0 success, 2 invalid config, 3 numerical failure, 1 anything else.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <boost/version.hpp>
#include <json.hpp>

#include "nlcvp/error.hpp"
#include "nlcvp/experiments.hpp"
#include "nlcvp/solvers.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* tool_version = "1.0.0";

void write_file(const fs::path& p, const std::string& text) {
    std::ofstream os(p, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write " + p.string());
    os << text;
}

std::string coo(const nlcvp::Matrix& m) {
    nlcvp::Table t{"", {"row", "col", "value"}, {}};
    for (Eigen::Index j = 0; j < m.cols(); ++j)
        for (Eigen::Index i = 0; i < m.rows(); ++i)
            if (m(i, j) != 0.0) t.rows.push_back({i, j, m(i, j)});
    return t.to_csv();
}

int threads_from_env() {
    const char* s = std::getenv("NONLOCAL_CVP_THREADS");
    if (!s) return 1;
    try {
        return std::max(1, std::stoi(s));
    } catch (...) {
        return 1;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Nonlocal complement-value problems: config-driven experiments"};
    std::string config_path, out_dir = "nlcvp-out";
    int threads = 0;
    bool mesh_dump = false, matrix_dump = false, list_kinds = false;
    app.add_option("--config", config_path, "experiment configuration (JSON)");
    app.add_option("--out", out_dir, "output directory")->capture_default_str();
    app.add_option("--threads", threads, "assembly threads (default: NONLOCAL_CVP_THREADS or 1)")
        ->check(CLI::PositiveNumber);
    app.add_flag("--mesh-dump", mesh_dump, "write mesh.json");
    app.add_flag("--matrix-dump", matrix_dump, "write the assembled matrices in COO form");
    app.add_flag("--list", list_kinds, "print the experiment kinds and exit");
    CLI11_PARSE(app, argc, argv);

    if (list_kinds) {
        for (const auto& k : nlcvp::experiment_kinds()) std::cout << k << '\n';
        return 0;
    }
    if (config_path.empty()) {
        std::cerr << "error: --config is required\n";
        return 2;
    }
    if (threads == 0) threads = threads_from_env();

    nlcvp::ExperimentConfig cfg;
    try {
        std::ifstream is(config_path);
        if (!is) throw nlcvp::SchemaError("--config", "cannot read " + config_path);
        json j;
        try {
            j = json::parse(is);
        } catch (const json::parse_error& e) {
            throw nlcvp::SchemaError("$", std::string("malformed JSON: ") + e.what());
        }
        cfg = nlcvp::parse_config(j);
    } catch (const nlcvp::SchemaError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    }

    nlcvp::ExperimentResult res;
    try {
        res = nlcvp::run_experiment(cfg, threads);
    } catch (const nlcvp::Error& e) {
        std::cerr << "numerical error: " << e.what() << '\n';
        json failure = {{"experiment", cfg.kind}, {"error", std::string(nlcvp::to_string(e.code()))}, {"message", e.what()}};
        try {
            fs::create_directories(out_dir);
            write_file(fs::path(out_dir) / "summary.json", failure.dump(2) + "\n");
        } catch (...) {
        }
        return 3;
    } catch (const nlcvp::SchemaError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    }

    try {
        const fs::path out(out_dir);
        fs::create_directories(out);
        std::vector<std::string> files{"summary.json"};
        write_file(out / "summary.json", res.summary.dump(2) + "\n");
        for (const auto& t : res.tables) {
            write_file(out / (t.name + ".csv"), t.to_csv());
            files.push_back(t.name + ".csv");
        }
        if (mesh_dump && res.system) {
            write_file(out / "mesh.json", res.system->space->mesh.to_json().dump(2) + "\n");
            files.push_back("mesh.json");
        }
        if (matrix_dump && res.system) {
            const auto& s = *res.system;
            const std::pair<const char*, const nlcvp::Matrix*> mats[] = {
                {"A", &s.A}, {"A_inner", &s.A_inner}, {"A_cross", &s.A_cross}, {"P", &s.P},
                {"N", &s.N_op}, {"M", &s.M}, {"M_tilde", &s.M_tilde}};
            for (const auto& [name, m] : mats) {
                const std::string f = std::string("matrix_") + name + ".coo.csv";
                write_file(out / f, coo(*m));
                files.push_back(f);
            }
        }
        std::ostringstream eigen_version;
        eigen_version << EIGEN_WORLD_VERSION << '.' << EIGEN_MAJOR_VERSION << '.' << EIGEN_MINOR_VERSION;
        json manifest = {{"tool", "nlcvp"},
                         {"version", tool_version},
                         {"schema_version", nlcvp::config_schema_version},
                         {"experiment", cfg.kind},
                         {"seed", cfg.seed},
                         {"threads", threads},
                         {"config", cfg.raw},
                         {"kernel", res.system ? res.system->kernel->to_json() : cfg.kernel.to_json()},
                         {"quadrature", cfg.rule.to_json()},
                         {"libraries",
                          {{"eigen", eigen_version.str()},
                           {"boost", BOOST_LIB_VERSION},
                           {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                                 std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                                 std::to_string(NLOHMANN_JSON_VERSION_PATCH)}}},
                         {"files", files}};
        if (res.system) {
            manifest["mesh"] = res.system->space->mesh.to_json();
            manifest["assembly"] = res.system->meta;
        }
        write_file(out / "manifest.json", manifest.dump(2) + "\n");
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }

    std::cout << res.summary.dump() << '\n';
    return 0;
}
