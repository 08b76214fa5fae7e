#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fmt/format.h>
#include <fstream>
#include <sstream>

#include "helpers.hpp"
#include "mortalworld/harness.hpp"

using namespace mortalworld;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

fs::path fresh_dir(const std::string& name) {
    auto dir = fs::temp_directory_path() / ("mortalworld_test_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

const char* kGridConfig = R"(
[env]
kind = "grid_forage"
width = 5
height = 5
food_cells = [[2, 2]]
food_energy = 1.0
food_respawn_period = 1
leak = 0.1

[run]
num_seeds = 6
max_steps = 30
base_seed = 7
energy_levels = 11
health_every = 5
health_horizon = 10
health_rollouts = 50

[agent]
kind = "random"
)";

const char* kJarConfig = R"(
[env]
kind = "jar_chain"
chain_length = 6
irreversible_edge = 2
last_state_terminal = true

[run]
num_seeds = 4
max_steps = 25
base_seed = 3
health_every = 5
health_horizon = 8
health_rollouts = 40

[agent]
kind = "random"
)";

}  // namespace

TEST_CASE("thread cap honors the environment variable") {
    unsetenv("MORTAL_WORLD_THREADS");
    CHECK(thread_cap_from_env(4) == 4);
    setenv("MORTAL_WORLD_THREADS", "2", 1);
    CHECK(thread_cap_from_env(16) == 2);
    setenv("MORTAL_WORLD_THREADS", "garbage", 1);
    CHECK(thread_cap_from_env(4) == 4);
    unsetenv("MORTAL_WORLD_THREADS");
}

TEST_CASE("build_experiment compiles an embodied grid") {
    auto config = ConfigTable::parse(kGridConfig);
    auto built = build_experiment(config);
    REQUIRE(built.compiled.has_value());
    CHECK(built.env_kind == "grid_forage");
    CHECK(built.model.validate().empty());
    // Start: full energy, zero damage, center cell.
    auto dec = built.compiled->decode(built.start);
    CHECK(dec.energy_level == built.compiled->energy_levels - 1);
    CHECK(!dec.dead);
}

TEST_CASE("unknown env kind is a config error") {
    auto config = ConfigTable::parse("[env]\nkind = \"marsh\"");
    CHECK_THROWS_AS(build_experiment(config), ConfigError);
}

TEST_CASE("runs are byte-identical across thread counts") {
    auto config = ConfigTable::parse(kGridConfig);
    auto dir1 = fresh_dir("threads1");
    auto dir8 = fresh_dir("threads8");
    run_experiment(config, 1, dir1);
    run_experiment(config, 8, dir8);
    CHECK(slurp(dir1 / "records.csv") == slurp(dir8 / "records.csv"));
    CHECK(slurp(dir1 / "summary.json") == slurp(dir8 / "summary.json"));
    fs::remove_all(dir1);
    fs::remove_all(dir8);
}

TEST_CASE("record integrity: alive flag matches early termination") {
    auto config = ConfigTable::parse(kGridConfig);
    auto result = run_experiment(config, 2);
    const auto& summary = result.summary;
    REQUIRE(summary.num_seeds == 6);
    for (std::size_t seed = 0; seed < summary.num_seeds; ++seed) {
        std::vector<const ExperimentRecord*> rows;
        for (const auto& r : result.records) {
            if (r.seed == seed) rows.push_back(&r);
        }
        REQUIRE(!rows.empty());
        bool died_early = summary.survival_steps[seed] < 30;
        CHECK(rows.back()->alive == !died_early);
        if (died_early) {
            CHECK(rows.back()->action == -1);
            CHECK(rows.size() == summary.survival_steps[seed] + 1);
        } else {
            CHECK(rows.size() == 30);
        }
        // Alive rows precede the terminal row.
        for (std::size_t i = 0; i + 1 < rows.size(); ++i) CHECK(rows[i]->alive);
    }
}

TEST_CASE("summary statistics recompute from the records") {
    auto config = ConfigTable::parse(kJarConfig);
    auto result = run_experiment(config, 1);
    std::vector<double> survival(result.summary.survival_steps.begin(),
                                 result.summary.survival_steps.end());
    std::sort(survival.begin(), survival.end());
    double mean = 0.0;
    for (double s : survival) mean += s;
    mean /= static_cast<double>(survival.size());
    CHECK(result.summary.mean_survival == doctest::Approx(mean).epsilon(1e-12));
    double median = (survival[1] + survival[2]) / 2.0;
    CHECK(result.summary.median_survival == doctest::Approx(median).epsilon(1e-12));
}

TEST_CASE("tracked empowerment shows up in records and summary") {
    auto config = ConfigTable::parse(kJarConfig);
    config.set("run.track_empowerment", ConfigValue{true});
    auto result = run_experiment(config, 1);
    bool any = false;
    for (const auto& r : result.records) {
        if (!std::isnan(r.empowerment_bits)) any = true;
    }
    CHECK(any);
    CHECK(!std::isnan(result.summary.mean_empowerment_bits));
}

TEST_CASE("summary json is stable and null-safe") {
    SummaryStats stats;
    stats.agent_kind = "random";
    stats.num_seeds = 1;
    stats.survival_steps = {5};
    stats.final_health = {std::numeric_limits<double>::quiet_NaN()};
    auto json = stats.to_json();
    CHECK(json.find("\"mean_empowerment_bits\": null") != std::string::npos);
    CHECK(json.find("nan") == std::string::npos);
}

TEST_CASE("empowerment map csv quotes labels with commas") {
    std::vector<double> t{1.0};
    FiniteMdp mdp(1, 1, std::move(t), {}, {"a,b"});
    auto map = empowerment_map(mdp, 1);
    auto dir = fresh_dir("emap");
    auto path = dir / "map.csv";
    write_empowerment_map_csv(mdp, map, path);
    auto text = slurp(path);
    CHECK(text.find("\"a,b\"") != std::string::npos);
    CHECK(text.rfind("state_id,label,bits,gap\n", 0) == 0);
    fs::remove_all(dir);
}

TEST_CASE("viability json lists members and per-state integrity") {
    auto config = ConfigTable::parse(kJarConfig);
    auto built = build_experiment(config);
    auto kernel = viability_kernel(built.model);
    auto dir = fresh_dir("viab");
    auto path = dir / "viability.json";
    write_viability_json(built.model, kernel, path);
    auto text = slurp(path);
    CHECK(text.find("\"members\"") != std::string::npos);
    CHECK(text.find("\"integrity\"") != std::string::npos);
    CHECK(text.find("\"iterations_to_fixpoint\"") != std::string::npos);
    fs::remove_all(dir);
}

TEST_CASE("starvation grid has an empty kernel") {
    // Leak with no food: every state eventually starves.
    auto config = ConfigTable::parse(R"(
[env]
kind = "grid_forage"
width = 3
height = 3
leak = 0.2
[run]
energy_levels = 6
)");
    auto built = build_experiment(config);
    CHECK(viability_kernel(built.model).members.empty());
}

TEST_CASE("fed grid keeps a nonempty kernel of high-energy states") {
    auto config = ConfigTable::parse(kGridConfig);
    auto built = build_experiment(config);
    auto kernel = viability_kernel(built.model);
    CHECK(!kernel.members.empty());
    for (StateId s : kernel.members) {
        CHECK(built.compiled->decode(s).energy_level > 0);
    }
}

TEST_CASE("one-point sweep reduces to a single run") {
    auto config = ConfigTable::parse(kJarConfig);
    auto grid = ConfigTable::parse("run.max_steps = [25]");
    auto dir = fresh_dir("sweep1");
    auto combined = run_sweep(config, grid, 1, dir);
    auto text = slurp(combined);
    // Header plus exactly one cell row.
    CHECK(std::count(text.begin(), text.end(), '\n') == 2);
    auto direct = run_experiment(config, 1);
    CHECK(text.find(fmt::format("{}", direct.summary.num_seeds)) !=
          std::string::npos);
    CHECK(slurp(dir / "cell_000" / "summary.json") == direct.summary.to_json() + "\n");
    fs::remove_all(dir);
}

TEST_CASE("survival is non-increasing in the energy leak") {
    auto config = ConfigTable::parse(kGridConfig);
    config.set("run.num_seeds", ConfigValue{8.0});
    ConfigTable grid;
    grid.set("env.leak",
             ConfigValue{std::vector<ConfigValue>{
                 ConfigValue{0.0}, ConfigValue{0.5}, ConfigValue{1.0}}});
    auto dir = fresh_dir("sweepleak");
    run_sweep(config, grid, 2, dir);
    std::vector<double> medians;
    for (int cell = 0; cell < 3; ++cell) {
        auto leaky = config;
        leaky.set("env.leak", ConfigValue{cell * 0.5});
        medians.push_back(run_experiment(leaky, 2).summary.median_survival);
    }
    CHECK(medians[0] >= medians[1]);
    CHECK(medians[1] >= medians[2]);
    fs::remove_all(dir);
}

TEST_CASE("standard perturbations cover the embodied surfaces") {
    auto specs = standard_perturbations();
    REQUIRE(specs.size() == 4);
    CHECK(specs[0].kind == PerturbationSpec::Kind::actuator_dropout);
    CHECK(specs[1].kind == PerturbationSpec::Kind::sensor_mask);
    CHECK(specs[2].kind == PerturbationSpec::Kind::energy_leak_increase);
    CHECK(specs[3].kind == PerturbationSpec::Kind::policy_noise);
}

TEST_CASE("actuator dropout makes the grid agent vulnerable") {
    auto config = ConfigTable::parse(kGridConfig);
    // Start far from food so a pinned actuator costs meals.
    config.set("env.start", ConfigValue{std::vector<ConfigValue>{
                                ConfigValue{0.0}, ConfigValue{0.0}}});
    double nominal = perturbed_start_health(
        config, {PerturbationSpec::Kind::policy_noise, 0.0, "policy"}, 10, 400, 5);
    double dropped = perturbed_start_health(
        config, {PerturbationSpec::Kind::actuator_dropout, 0.9, "actuator"}, 10,
        400, 5);
    CHECK(nominal >= dropped);
    double v = config_vulnerability(config, standard_perturbations(), 10, 400, 5);
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
}

TEST_CASE("energy leak perturbation requires an embodied env") {
    auto config = ConfigTable::parse(kJarConfig);
    CHECK_THROWS_AS(
        perturbed_start_health(
            config, {PerturbationSpec::Kind::energy_leak_increase, 2.0, "energy"},
            5, 50, 1),
        ConfigError);
}
