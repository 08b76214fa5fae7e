#pragma once
// Config-driven experiment runner: seeded survival rollouts, metric
// collection, and byte-deterministic CSV/JSON outputs.

#include <cstdint>
#include <filesystem>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "mortalworld/agents.hpp"
#include "mortalworld/config.hpp"
#include "mortalworld/embodiment.hpp"
#include "mortalworld/empowerment.hpp"
#include "mortalworld/envs.hpp"
#include "mortalworld/mdp.hpp"
#include "mortalworld/viability.hpp"

namespace mortalworld {

struct ExperimentRecord {
    std::uint64_t seed = 0;
    std::size_t step = 0;
    StateId world_state = 0;
    double energy = 0.0;
    long long action = -1;  // -1 on the terminal row
    double empowerment_bits = std::numeric_limits<double>::quiet_NaN();
    double health = std::numeric_limits<double>::quiet_NaN();
    double valence = 0.0;
    double stress = 0.0;
    bool alive = true;
};

struct SummaryStats {
    std::string agent_kind;
    std::size_t num_seeds = 0;
    double median_survival = 0.0;
    double mean_survival = 0.0;
    double survival_q25 = 0.0;
    double survival_q75 = 0.0;
    double mean_empowerment_bits = std::numeric_limits<double>::quiet_NaN();
    double nominal_health = std::numeric_limits<double>::quiet_NaN();
    std::vector<std::size_t> survival_steps;  // per seed, in seed order
    std::vector<double> final_health;         // per seed, NaN when untracked

    std::string to_json() const;
};

struct RunResult {
    SummaryStats summary;
    std::vector<ExperimentRecord> records;
    std::optional<std::filesystem::path> records_path;
    std::optional<std::filesystem::path> summary_path;
};

// The model a run executes on plus decode metadata.
struct BuiltExperiment {
    FiniteMdp model;
    std::optional<CompiledModel> compiled;  // set for embodied environments
    std::optional<EmbodiedEnv> env;
    StateId start = 0;
    std::string env_kind;
};

std::size_t thread_cap_from_env(std::size_t fallback = 1);

// Builds env + embodiment from the [env]/[embodiment] blocks; embodied
// environments are compiled with run.energy_levels quantization.
BuiltExperiment build_experiment(const ConfigTable& config);

// Parses the [agent] block.
Policy make_policy(const ConfigTable& config);
AffectState make_affect(const ConfigTable& config);

RunResult run_experiment(const ConfigTable& config, std::size_t threads = 1,
                         std::optional<std::filesystem::path> output_dir = {});

// One run_experiment per grid cell (cartesian product over the grid
// file's value arrays); writes per-cell outputs plus a combined CSV.
std::filesystem::path run_sweep(const ConfigTable& config,
                                const ConfigTable& grid, std::size_t threads,
                                std::optional<std::filesystem::path> output_dir = {});

void write_empowerment_map_csv(const FiniteMdp& mdp,
                               const std::vector<EmpowermentValue>& map,
                               const std::filesystem::path& path);

void write_viability_json(const FiniteMdp& mdp, const ViabilityKernel& kernel,
                          const std::filesystem::path& path);

std::string records_to_csv(const std::vector<ExperimentRecord>& records);

// Standard perturbation battery applied through the embodiment wrappers:
// actuator dropout 0.25, sensor mask 25%, leak x2, policy noise 0.25.
std::vector<PerturbationSpec> standard_perturbations();

// Health of the start state under the configured agent, with one
// perturbation applied by rebuilding the embodied model.
double perturbed_start_health(const ConfigTable& config,
                              const PerturbationSpec& spec, std::size_t horizon,
                              std::size_t num_rollouts, std::uint64_t seed);

// Worst-case start-health loss over the given perturbations.
double config_vulnerability(const ConfigTable& config,
                            const std::vector<PerturbationSpec>& perturbations,
                            std::size_t horizon, std::size_t num_rollouts,
                            std::uint64_t seed);

}  // namespace mortalworld
