// mortalworld command-line runner.
//
// Subcommands: simulate, empowerment-map, viability, sweep, validate.
// Exit codes: 0 success, 2 config error, 3 capacity budget exceeded,
// 4 I/O error. MORTAL_WORLD_THREADS caps parallelism.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "mortalworld/harness.hpp"

namespace mw = mortalworld;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitBudget = 3;
constexpr int kExitIo = 4;

std::size_t worker_threads() {
    return mw::thread_cap_from_env(std::thread::hardware_concurrency());
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::ios_base::failure("cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

bool looks_like_mdp_json(const std::string& path) {
    return path.size() > 5 && path.substr(path.size() - 5) == ".json";
}

// Loads either a compiled experiment config or a bare MDP document.
mw::FiniteMdp load_model(const std::string& path) {
    if (looks_like_mdp_json(path)) {
        return mw::FiniteMdp::from_json(read_file(path));
    }
    return mw::build_experiment(mw::ConfigTable::parse_file(path)).model;
}

int cmd_simulate(const std::string& config_path) {
    auto config = mw::ConfigTable::parse_file(config_path);
    auto result = mw::run_experiment(config, worker_threads());
    std::cout << result.summary.to_json() << "\n";
    return 0;
}

int cmd_empowerment_map(const std::string& path, std::size_t n, double tol,
                        const std::string& out_path) {
    mw::FiniteMdp model = load_model(path);
    auto map = mw::empowerment_map(model, n, tol, mw::kDefaultCapacityMaxIter,
                                   worker_threads());
    mw::write_empowerment_map_csv(model, map, out_path);
    std::cout << "wrote " << out_path << "\n";
    return 0;
}

int cmd_viability(const std::string& path, const std::string& out_path) {
    mw::FiniteMdp model = load_model(path);
    auto kernel = mw::viability_kernel(model);
    mw::write_viability_json(model, kernel, out_path);
    std::cout << "kernel size " << kernel.members.size() << ", wrote " << out_path
              << "\n";
    return 0;
}

int cmd_sweep(const std::string& config_path, const std::string& grid_path) {
    auto config = mw::ConfigTable::parse_file(config_path);
    auto grid = mw::ConfigTable::parse_file(grid_path);
    auto combined = mw::run_sweep(config, grid, worker_threads());
    std::cout << "wrote " << combined.string() << "\n";
    return 0;
}

int cmd_validate(const std::string& path) {
    auto mdp = mw::FiniteMdp::from_json(read_file(path), /*check=*/false);
    auto violations = mdp.validate();
    if (violations.empty()) {
        std::cout << "valid: " << mdp.num_states() << " states, "
                  << mdp.num_actions() << " actions, "
                  << mdp.terminal_set().size() << " terminal\n";
        return 0;
    }
    for (const auto& v : violations) std::cout << "violation: " << v.message << "\n";
    return kExitConfig;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Finite embodied-agent survival simulator and analysis toolkit"};
    app.require_subcommand(1);

    std::string config_path;
    std::string grid_path;
    std::string out_path;
    std::size_t horizon = 1;
    double tol = mw::kDefaultCapacityTol;

    auto* simulate = app.add_subcommand("simulate", "Run a seeded experiment");
    simulate->add_option("config", config_path, "Experiment config file")->required();

    auto* emap = app.add_subcommand("empowerment-map",
                                    "Per-state empowerment to CSV");
    emap->add_option("input", config_path, "Config file or mdp.json")->required();
    emap->add_option("--n", horizon, "Empowerment horizon")->required();
    emap->add_option("--tol", tol, "Capacity tolerance in bits");
    emap->add_option("--out", out_path, "Output CSV path");

    auto* viab = app.add_subcommand("viability", "Viability kernel to JSON");
    viab->add_option("input", config_path, "Config file or mdp.json")->required();
    viab->add_option("--out", out_path, "Output JSON path");

    auto* sweep = app.add_subcommand("sweep", "Run a parameter grid");
    sweep->add_option("config", config_path, "Experiment config template")->required();
    sweep->add_option("--grid", grid_path, "Grid file (key = [values] lines)")
        ->required();

    auto* validate = app.add_subcommand("validate", "Validate an MDP document");
    validate->add_option("input", config_path, "mdp.json path")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (simulate->parsed()) return cmd_simulate(config_path);
        if (emap->parsed()) {
            if (out_path.empty()) out_path = "empowerment_map.csv";
            return cmd_empowerment_map(config_path, horizon, tol, out_path);
        }
        if (viab->parsed()) {
            if (out_path.empty()) out_path = "viability.json";
            return cmd_viability(config_path, out_path);
        }
        if (sweep->parsed()) return cmd_sweep(config_path, grid_path);
        if (validate->parsed()) return cmd_validate(config_path);
    } catch (const mw::CapacityBudgetError& e) {
        std::cerr << "capacity budget exceeded: " << e.what() << "\n";
        return kExitBudget;
    } catch (const mw::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::ios_base::failure& e) {
        std::cerr << "I/O error: " << e.what() << "\n";
        return kExitIo;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
