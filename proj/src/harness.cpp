#include "mortalworld/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <fmt/format.h>
#include <fstream>
#include <mutex>
#include <numeric>
#include <thread>

#include <json.hpp>

namespace mortalworld {

namespace {

constexpr std::uint64_t kRolloutTag = 0x726f6c6c;   // "roll"
constexpr std::uint64_t kHealthTag = 0x6865616c;    // "heal"
constexpr std::uint64_t kNominalTag = 0x6e6f6d69;   // "nomi"

std::string fmt_double(double v) {
    if (std::isnan(v)) return "nan";
    return fmt::format("{:.17g}", v);
}

Cell cell_from_value(const ConfigValue& v) {
    const auto& arr = v.as_array();
    if (arr.size() != 2) throw ConfigError("cell values must be [x, y]");
    return Cell{static_cast<int>(arr[0].as_int()),
                static_cast<int>(arr[1].as_int())};
}

std::set<Cell> cells_from(const ConfigTable& config, const std::string& key) {
    std::set<Cell> out;
    if (!config.has(key)) return out;
    for (const auto& v : config.at(key).as_array()) out.insert(cell_from_value(v));
    return out;
}

BumpSemantics bump_from(const std::string& name) {
    if (name == "stay") return BumpSemantics::stay;
    if (name == "blocked_noop") return BumpSemantics::blocked_noop;
    throw ConfigError("unknown bump_semantics: " + name);
}

void apply_embodiment_overrides(const ConfigTable& config, EmbodimentConfig& cfg) {
    if (config.has("embodiment.energy_max")) {
        cfg.energy_max = config.number("embodiment.energy_max");
    }
    if (config.has("embodiment.leak")) cfg.leak = config.number("embodiment.leak");
    if (config.has("embodiment.action_cost")) {
        cfg.action_cost = config.number("embodiment.action_cost");
    }
    if (config.has("embodiment.damage_prob")) {
        cfg.damage_prob = config.number("embodiment.damage_prob");
    }
    if (config.has("embodiment.damage_max")) {
        cfg.damage_max = static_cast<int>(config.integer("embodiment.damage_max"));
    }
    if (config.has("embodiment.sensor.modality")) {
        const std::string m = config.string("embodiment.sensor.modality");
        if (m == "mask") cfg.sensor.modality = SensorSpec::Modality::mask;
        else if (m == "noise") cfg.sensor.modality = SensorSpec::Modality::noise;
        else if (m == "energy_fidelity") {
            cfg.sensor.modality = SensorSpec::Modality::energy_fidelity;
        } else {
            throw ConfigError("unknown sensor.modality: " + m);
        }
    }
    if (config.has("embodiment.sensor.mask_fraction")) {
        cfg.sensor.mask_fraction = config.number("embodiment.sensor.mask_fraction");
    }
    if (config.has("embodiment.sensor.noise_std")) {
        cfg.sensor.noise_std = config.number("embodiment.sensor.noise_std");
    }
    if (config.has("embodiment.actuator.dropout_prob")) {
        cfg.actuator.dropout_prob =
            config.number("embodiment.actuator.dropout_prob");
    }
    if (config.has("embodiment.actuator.gain_decay")) {
        cfg.actuator.gain_decay_per_damage =
            config.number("embodiment.actuator.gain_decay");
    }
    if (config.has("embodiment.actuator.energy_cost")) {
        cfg.actuator.energy_cost_per_action =
            config.number("embodiment.actuator.energy_cost");
    }
}

double quantile(std::vector<double> sorted, double q) {
    if (sorted.empty()) return 0.0;
    double pos = q * static_cast<double>(sorted.size() - 1);
    auto lo = static_cast<std::size_t>(std::floor(pos));
    auto hi = static_cast<std::size_t>(std::ceil(pos));
    double frac = pos - static_cast<double>(lo);
    return sorted[lo] * (1.0 - frac) + sorted[hi] * frac;
}

struct RunSettings {
    std::size_t num_seeds;
    std::size_t max_steps;
    std::size_t horizon_n;
    std::size_t health_horizon;
    std::size_t health_rollouts;
    std::size_t health_every;  // 0 disables health/affect tracking
    std::uint64_t base_seed;
    std::size_t energy_levels;
    bool track_empowerment;
    double tol;
    std::size_t max_iter;
};

RunSettings run_settings(const ConfigTable& config) {
    RunSettings r{};
    r.num_seeds = static_cast<std::size_t>(config.integer("run.num_seeds", 1));
    r.max_steps = static_cast<std::size_t>(config.integer("run.max_steps", 100));
    r.horizon_n =
        static_cast<std::size_t>(config.integer("agent.horizon_n",
                                                config.integer("run.horizon_n", 1)));
    r.health_horizon =
        static_cast<std::size_t>(config.integer("run.health_horizon", 20));
    r.health_rollouts =
        static_cast<std::size_t>(config.integer("run.health_rollouts", 100));
    r.health_every = static_cast<std::size_t>(config.integer("run.health_every", 5));
    r.base_seed = static_cast<std::uint64_t>(config.integer("run.base_seed", 0));
    r.energy_levels =
        static_cast<std::size_t>(config.integer("run.energy_levels", 11));
    r.track_empowerment = config.boolean("run.track_empowerment", false);
    r.tol = config.number("run.tol", kDefaultCapacityTol);
    r.max_iter = static_cast<std::size_t>(
        config.integer("run.max_iter",
                       static_cast<long long>(kDefaultCapacityMaxIter)));
    if (r.num_seeds < 1 || r.max_steps < 1) {
        throw ConfigError("run.num_seeds and run.max_steps must be >= 1");
    }
    return r;
}

}  // namespace

std::size_t thread_cap_from_env(std::size_t fallback) {
    if (const char* v = std::getenv("MORTAL_WORLD_THREADS")) {
        long parsed = std::strtol(v, nullptr, 10);
        if (parsed >= 1) return static_cast<std::size_t>(parsed);
    }
    return std::max<std::size_t>(1, fallback);
}

BuiltExperiment build_experiment(const ConfigTable& config) {
    const std::string kind = config.string("env.kind");
    const auto run = run_settings(config);

    if (kind == "jar_chain") {
        JarChainConfig jc;
        jc.chain_length = static_cast<int>(config.integer("env.chain_length", 7));
        jc.irreversible_edge =
            static_cast<int>(config.integer("env.irreversible_edge", 3));
        jc.last_state_terminal = config.boolean("env.last_state_terminal", false);
        BuiltExperiment built{build_jar_chain(jc), std::nullopt, std::nullopt,
                              static_cast<StateId>(config.integer("env.start", 0)),
                              kind};
        return built;
    }

    EmbodiedEnv env;
    std::optional<Cell> start;
    if (config.has("env.start")) start = cell_from_value(config.at("env.start"));

    if (kind == "grid_forage") {
        GridForageConfig gc;
        gc.width = static_cast<int>(config.integer("env.width", 5));
        gc.height = static_cast<int>(config.integer("env.height", 5));
        gc.walls = cells_from(config, "env.walls");
        gc.food_cells = cells_from(config, "env.food_cells");
        gc.food_energy = config.number("env.food_energy", 1.0);
        gc.food_respawn_period =
            static_cast<int>(config.integer("env.food_respawn_period", 1));
        gc.energy_max = config.number("env.energy_max", 1.0);
        gc.leak = config.number("env.leak", 0.05);
        gc.move_cost = config.number("env.move_cost", 0.0);
        gc.bump_semantics = bump_from(config.string("env.bump_semantics", "stay"));
        env = build_grid_forage(gc);
    } else if (kind == "wear_world") {
        WearWorldConfig wc;
        wc.width = static_cast<int>(config.integer("env.width", 5));
        wc.height = static_cast<int>(config.integer("env.height", 5));
        wc.damage_prob = config.number("env.damage_prob", 0.1);
        wc.repair_cell = config.has("env.repair_cell")
                             ? cell_from_value(config.at("env.repair_cell"))
                             : Cell{0, 0};
        wc.repair_amount = static_cast<int>(config.integer("env.repair_amount", 1));
        if (config.has("env.food_cell")) {
            wc.food_cell = cell_from_value(config.at("env.food_cell"));
        }
        wc.food_energy = config.number("env.food_energy", 1.0);
        wc.food_respawn_period =
            static_cast<int>(config.integer("env.food_respawn_period", 1));
        wc.energy_max = config.number("env.energy_max", 1.0);
        wc.leak = config.number("env.leak", 0.05);
        wc.move_cost = config.number("env.move_cost", 0.0);
        env = build_wear_world(wc);
    } else {
        throw ConfigError("unknown env.kind: " + kind);
    }

    apply_embodiment_overrides(config, env.config);
    StateId world_start = grid_start_state(env, start);
    CompiledModel compiled = compile_explicit(env, run.energy_levels);
    StateId start_state = compiled.encode(
        world_start, compiled.energy_levels - 1, 0);
    BuiltExperiment built{compiled.mdp, std::move(compiled), std::move(env),
                          start_state, kind};
    return built;
}

Policy make_policy(const ConfigTable& config) {
    Policy p;
    const std::string kind = config.string("agent.kind", "random");
    if (kind == "random") p.kind = PolicyKind::random;
    else if (kind == "greedy_empowerment") p.kind = PolicyKind::greedy_empowerment;
    else if (kind == "homeostatic_q") p.kind = PolicyKind::homeostatic_q;
    else if (kind == "hybrid") p.kind = PolicyKind::hybrid;
    else throw ConfigError("unknown agent.kind: " + kind);
    p.params.alpha = config.number("agent.alpha", 0.1);
    p.params.gamma = config.number("agent.gamma", 0.95);
    p.params.epsilon_base = config.number("agent.epsilon", 0.1);
    p.params.setpoint = config.number("agent.setpoint", 0.7);
    p.params.beta = config.number("agent.beta", 0.0);
    p.horizon_n = static_cast<std::size_t>(
        config.integer("agent.horizon_n", config.integer("run.horizon_n", 1)));
    const std::string tie = config.string("agent.tie_mode", "lowest_index");
    if (tie == "lowest_index") p.tie_mode = TieMode::lowest_index;
    else if (tie == "seeded_uniform") p.tie_mode = TieMode::seeded_uniform;
    else throw ConfigError("unknown agent.tie_mode: " + tie);
    return p;
}

AffectState make_affect(const ConfigTable& config) {
    AffectState a;
    a.lambda = config.number("agent.lambda", 0.9);
    a.kappa = config.number("agent.kappa", 0.5);
    if (a.lambda < 0.0 || a.lambda >= 1.0) {
        throw ConfigError("agent.lambda must be in [0,1)");
    }
    return a;
}

std::string SummaryStats::to_json() const {
    nlohmann::json doc;  // nlohmann::json sorts keys, giving byte determinism
    doc["agent_kind"] = agent_kind;
    doc["num_seeds"] = num_seeds;
    doc["median_survival"] = median_survival;
    doc["mean_survival"] = mean_survival;
    doc["survival_q25"] = survival_q25;
    doc["survival_q75"] = survival_q75;
    if (std::isnan(mean_empowerment_bits)) doc["mean_empowerment_bits"] = nullptr;
    else doc["mean_empowerment_bits"] = mean_empowerment_bits;
    if (std::isnan(nominal_health)) doc["nominal_health"] = nullptr;
    else doc["nominal_health"] = nominal_health;
    doc["survival_steps"] = survival_steps;
    auto fh = nlohmann::json::array();
    for (double h : final_health) {
        if (std::isnan(h)) fh.push_back(nullptr);
        else fh.push_back(h);
    }
    doc["final_health"] = fh;
    return doc.dump(2);
}

std::string records_to_csv(const std::vector<ExperimentRecord>& records) {
    std::string out =
        "seed,step,world_state,energy,action,empowerment_bits,health,valence,"
        "stress,alive\n";
    for (const auto& r : records) {
        out += fmt::format("{},{},{},{},{},{},{},{},{},{}\n", r.seed, r.step,
                           r.world_state, fmt_double(r.energy), r.action,
                           fmt_double(r.empowerment_bits), fmt_double(r.health),
                           fmt_double(r.valence), fmt_double(r.stress),
                           r.alive ? "true" : "false");
    }
    return out;
}

RunResult run_experiment(const ConfigTable& config, std::size_t threads,
                         std::optional<std::filesystem::path> output_dir) {
    const auto run = run_settings(config);
    BuiltExperiment built = build_experiment(config);
    const FiniteMdp& model = built.model;
    Policy policy_template = make_policy(config);
    AffectState affect_init = make_affect(config);

    const bool needs_map = policy_template.kind == PolicyKind::greedy_empowerment ||
                           policy_template.kind == PolicyKind::hybrid ||
                           run.track_empowerment;
    std::optional<std::vector<EmpowermentValue>> map;
    if (needs_map) {
        map = empowerment_map(model, policy_template.horizon_n, run.tol,
                              run.max_iter, threads);
    }
    const std::vector<EmpowermentValue>* map_ptr = map ? &*map : nullptr;

    std::vector<std::vector<ExperimentRecord>> per_seed(run.num_seeds);
    std::vector<std::size_t> survival(run.num_seeds, 0);
    std::vector<double> final_health(run.num_seeds,
                                     std::numeric_limits<double>::quiet_NaN());

    auto energy_of = [&](StateId s) {
        return built.compiled ? built.compiled->energy_of(s)
                              : std::numeric_limits<double>::quiet_NaN();
    };
    double energy_max =
        built.env ? built.env->config.energy_max : 1.0;

    auto run_seed = [&](std::size_t seed_index) {
        Policy policy = policy_template;
        policy.bind(model);
        AffectState affect = affect_init;
        CounterRng rng(
            CounterRng::derive_key(run.base_seed, seed_index, kRolloutTag));
        StateId s = built.start;
        auto& rows = per_seed[seed_index];
        double last_health = std::numeric_limits<double>::quiet_NaN();

        auto health_policy = [&](const FiniteMdp& m, StateId hs,
                                 CounterRng& hrng) -> ActionId {
            return act(policy, m, hs, map_ptr, affect, hrng);
        };

        std::size_t lived = run.max_steps;
        for (std::size_t t = 0; t < run.max_steps; ++t) {
            if (model.is_terminal(s)) {
                ExperimentRecord r;
                r.seed = seed_index;
                r.step = t;
                r.world_state = s;
                r.energy = energy_of(s);
                r.action = -1;
                if (map_ptr) r.empowerment_bits = (*map_ptr)[s].bits;
                r.health = 0.0;
                r.valence = affect.valence;
                r.stress = affect.stress;
                r.alive = false;
                rows.push_back(r);
                lived = t;
                final_health[seed_index] = 0.0;
                break;
            }
            if (run.health_every > 0 && t % run.health_every == 0 &&
                run.health_rollouts > 0) {
                auto est = health(
                    model, health_policy, s, run.health_horizon,
                    run.health_rollouts,
                    CounterRng::derive_key(run.base_seed, seed_index,
                                           kHealthTag + 2 * t));
                affect = update_affect(affect, est.probability);
                last_health = est.probability;
                final_health[seed_index] = est.probability;
            }
            ActionId a = act(policy, model, s, map_ptr, affect, rng);
            StateId s_next = model.step(s, a, rng);
            if (policy.learning()) {
                double reward = homeostatic_reward(
                    energy_max > 0.0 && built.compiled
                        ? energy_of(s_next) / energy_max
                        : 0.0,
                    policy.params.setpoint);
                if (policy.kind == PolicyKind::hybrid && map_ptr) {
                    reward += policy.params.beta * (*map_ptr)[s_next].bits;
                }
                q_update(policy, model, s, a, reward, s_next);
            }
            ExperimentRecord r;
            r.seed = seed_index;
            r.step = t;
            r.world_state = s;
            r.energy = energy_of(s);
            r.action = static_cast<long long>(a);
            if (map_ptr) r.empowerment_bits = (*map_ptr)[s].bits;
            r.health = last_health;
            r.valence = affect.valence;
            r.stress = affect.stress;
            r.alive = true;
            rows.push_back(r);
            s = s_next;
        }
        survival[seed_index] = lived;
    };

    threads = std::max<std::size_t>(1, threads);
    if (threads == 1 || run.num_seeds == 1) {
        for (std::size_t i = 0; i < run.num_seeds; ++i) run_seed(i);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> workers;
        for (std::size_t t = 0; t < std::min(threads, run.num_seeds); ++t) {
            workers.emplace_back([&] {
                for (;;) {
                    std::size_t i = next.fetch_add(1);
                    if (i >= run.num_seeds) return;
                    run_seed(i);
                }
            });
        }
        for (auto& w : workers) w.join();
    }

    RunResult result;
    auto& summary = result.summary;
    summary.agent_kind = config.string("agent.kind", "random");
    summary.num_seeds = run.num_seeds;
    summary.survival_steps = survival;
    summary.final_health = final_health;
    std::vector<double> sorted(survival.begin(), survival.end());
    std::sort(sorted.begin(), sorted.end());
    summary.median_survival = quantile(sorted, 0.5);
    summary.survival_q25 = quantile(sorted, 0.25);
    summary.survival_q75 = quantile(sorted, 0.75);
    summary.mean_survival =
        std::accumulate(sorted.begin(), sorted.end(), 0.0) /
        static_cast<double>(sorted.size());

    if (map_ptr) {
        double total = 0.0;
        std::size_t count = 0;
        for (const auto& rows : per_seed) {
            for (const auto& r : rows) {
                if (r.alive && !std::isnan(r.empowerment_bits)) {
                    total += r.empowerment_bits;
                    ++count;
                }
            }
        }
        if (count > 0) summary.mean_empowerment_bits = total / static_cast<double>(count);
    }
    if (run.health_rollouts > 0 && run.health_every > 0) {
        Policy nominal = policy_template;
        nominal.bind(model);
        AffectState affect = affect_init;
        auto nominal_policy = [&](const FiniteMdp& m, StateId hs,
                                  CounterRng& hrng) -> ActionId {
            return act(nominal, m, hs, map_ptr, affect, hrng);
        };
        summary.nominal_health =
            health(model, nominal_policy, built.start, run.health_horizon,
                   run.health_rollouts,
                   CounterRng::derive_key(run.base_seed, 0, kNominalTag))
                .probability;
    }

    for (const auto& rows : per_seed) {
        result.records.insert(result.records.end(), rows.begin(), rows.end());
    }

    std::optional<std::filesystem::path> dir = output_dir;
    if (!dir && config.has("output.directory")) {
        dir = std::filesystem::path(config.string("output.directory"));
    }
    if (dir) {
        std::error_code ec;
        std::filesystem::create_directories(*dir, ec);
        bool want_csv = true;
        bool want_json = true;
        if (config.has("output.formats")) {
            want_csv = want_json = false;
            for (const auto& f : config.at("output.formats").as_array()) {
                if (f.as_string() == "csv") want_csv = true;
                if (f.as_string() == "json") want_json = true;
            }
        }
        if (want_csv) {
            auto path = *dir / "records.csv";
            std::ofstream out(path, std::ios::binary);
            if (!out) throw std::ios_base::failure("cannot write " + path.string());
            out << records_to_csv(result.records);
            result.records_path = path;
        }
        if (want_json) {
            auto path = *dir / "summary.json";
            std::ofstream out(path, std::ios::binary);
            if (!out) throw std::ios_base::failure("cannot write " + path.string());
            out << summary.to_json() << "\n";
            result.summary_path = path;
        }
    }
    return result;
}

void write_empowerment_map_csv(const FiniteMdp& mdp,
                               const std::vector<EmpowermentValue>& map,
                               const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::ios_base::failure("cannot write " + path.string());
    out << "state_id,label,bits,gap\n";
    for (StateId s = 0; s < mdp.num_states(); ++s) {
        std::string label = s < mdp.labels().size() ? mdp.labels()[s] : "";
        if (label.find(',') != std::string::npos ||
            label.find('"') != std::string::npos) {
            std::string quoted = "\"";
            for (char c : label) {
                if (c == '"') quoted += '"';
                quoted += c;
            }
            label = quoted + "\"";
        }
        out << fmt::format("{},{},{},{}\n", s, label, fmt_double(map[s].bits),
                           fmt_double(map[s].gap));
    }
}

void write_viability_json(const FiniteMdp& mdp, const ViabilityKernel& kernel,
                          const std::filesystem::path& path) {
    nlohmann::json doc;
    doc["iterations_to_fixpoint"] = kernel.iterations_to_fixpoint;
    doc["members"] = kernel.members;
    std::vector<bool> integrity_flags(mdp.num_states(), false);
    for (StateId s : kernel.members) integrity_flags[s] = true;
    doc["integrity"] = integrity_flags;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::ios_base::failure("cannot write " + path.string());
    out << doc.dump(2) << "\n";
}

std::filesystem::path run_sweep(const ConfigTable& config,
                                const ConfigTable& grid, std::size_t threads,
                                std::optional<std::filesystem::path> output_dir) {
    std::vector<std::pair<std::string, std::vector<ConfigValue>>> axes;
    for (const auto& [key, value] : grid.values()) {
        axes.emplace_back(key, value.as_array());
        if (axes.back().second.empty()) {
            throw ConfigError("sweep axis '" + key + "' is empty");
        }
    }
    if (axes.empty()) throw ConfigError("sweep grid has no axes");

    std::filesystem::path base =
        output_dir ? *output_dir
                   : std::filesystem::path(config.string("output.directory", "sweep_out"));
    std::error_code ec;
    std::filesystem::create_directories(base, ec);

    std::size_t cells = 1;
    for (const auto& [key, values] : axes) cells *= values.size();

    std::string combined =
        "cell";
    for (const auto& [key, values] : axes) combined += "," + key;
    combined +=
        ",num_seeds,median_survival,mean_survival,survival_q25,survival_q75,"
        "mean_empowerment_bits,nominal_health\n";

    for (std::size_t cell = 0; cell < cells; ++cell) {
        ConfigTable cell_config = config;
        std::size_t rest = cell;
        std::string cell_values;
        for (const auto& [key, values] : axes) {
            const ConfigValue& v = values[rest % values.size()];
            rest /= values.size();
            cell_config.set(key, v);
            if (const double* d = std::get_if<double>(&v.data)) {
                cell_values += "," + fmt_double(*d);
            } else if (const bool* b = std::get_if<bool>(&v.data)) {
                cell_values += *b ? ",true" : ",false";
            } else if (const std::string* s = std::get_if<std::string>(&v.data)) {
                cell_values += "," + *s;
            } else {
                throw ConfigError("sweep axis values must be scalars");
            }
        }
        auto cell_dir = base / fmt::format("cell_{:03}", cell);
        cell_config.set("output.directory", ConfigValue{cell_dir.string()});
        auto result = run_experiment(cell_config, threads, cell_dir);
        const auto& s = result.summary;
        combined += fmt::format("{}{},{},{},{},{},{},{},{}\n", cell, cell_values,
                                s.num_seeds, fmt_double(s.median_survival),
                                fmt_double(s.mean_survival),
                                fmt_double(s.survival_q25),
                                fmt_double(s.survival_q75),
                                fmt_double(s.mean_empowerment_bits),
                                fmt_double(s.nominal_health));
    }

    auto combined_path = base / "sweep.csv";
    std::ofstream out(combined_path, std::ios::binary);
    if (!out) {
        throw std::ios_base::failure("cannot write " + combined_path.string());
    }
    out << combined;
    return combined_path;
}

std::vector<PerturbationSpec> standard_perturbations() {
    return {
        {PerturbationSpec::Kind::actuator_dropout, 0.25, "actuator"},
        {PerturbationSpec::Kind::sensor_mask, 0.25, "sensor"},
        {PerturbationSpec::Kind::energy_leak_increase, 2.0, "energy"},
        {PerturbationSpec::Kind::policy_noise, 0.25, "policy"},
    };
}

double perturbed_start_health(const ConfigTable& config,
                              const PerturbationSpec& spec, std::size_t horizon,
                              std::size_t num_rollouts, std::uint64_t seed) {
    ConfigTable perturbed = config;
    bool wrap_policy_noise = false;
    switch (spec.kind) {
        case PerturbationSpec::Kind::policy_noise:
            wrap_policy_noise = true;
            break;
        case PerturbationSpec::Kind::actuator_dropout:
            perturbed.set("embodiment.actuator.dropout_prob",
                          ConfigValue{spec.magnitude});
            break;
        case PerturbationSpec::Kind::sensor_mask:
            perturbed.set("embodiment.sensor.modality", ConfigValue{std::string("mask")});
            perturbed.set("embodiment.sensor.mask_fraction",
                          ConfigValue{spec.magnitude});
            break;
        case PerturbationSpec::Kind::energy_leak_increase: {
            BuiltExperiment probe = build_experiment(config);
            if (!probe.env) {
                throw ConfigError(
                    "energy_leak_increase perturbation requires an embodied "
                    "environment (target '" + spec.target + "')");
            }
            perturbed.set("embodiment.leak",
                          ConfigValue{probe.env->config.leak * spec.magnitude});
            break;
        }
    }
    BuiltExperiment built = build_experiment(perturbed);
    if (!built.env && spec.kind != PerturbationSpec::Kind::policy_noise) {
        throw ConfigError("perturbation '" + spec.target +
                          "' requires an embodied environment");
    }
    Policy policy = make_policy(perturbed);
    policy.bind(built.model);
    AffectState affect = make_affect(perturbed);
    std::optional<std::vector<EmpowermentValue>> map;
    if (policy.kind == PolicyKind::greedy_empowerment ||
        policy.kind == PolicyKind::hybrid) {
        map = empowerment_map(built.model, policy.horizon_n);
    }
    const std::vector<EmpowermentValue>* map_ptr = map ? &*map : nullptr;
    StatePolicy base = [&policy, map_ptr, affect](const FiniteMdp& m, StateId s,
                                                  CounterRng& rng) {
        return act(policy, m, s, map_ptr, affect, rng);
    };
    StatePolicy effective =
        wrap_policy_noise ? with_policy_noise(base, spec.magnitude) : base;
    return health(built.model, effective, built.start, horizon, num_rollouts, seed)
        .probability;
}

double config_vulnerability(const ConfigTable& config,
                            const std::vector<PerturbationSpec>& perturbations,
                            std::size_t horizon, std::size_t num_rollouts,
                            std::uint64_t seed) {
    if (perturbations.empty()) {
        throw ConfigError("perturbation list must be nonempty");
    }
    BuiltExperiment built = build_experiment(config);
    Policy policy = make_policy(config);
    policy.bind(built.model);
    AffectState affect = make_affect(config);
    std::optional<std::vector<EmpowermentValue>> map;
    if (policy.kind == PolicyKind::greedy_empowerment ||
        policy.kind == PolicyKind::hybrid) {
        map = empowerment_map(built.model, policy.horizon_n);
    }
    const std::vector<EmpowermentValue>* map_ptr = map ? &*map : nullptr;
    StatePolicy nominal_policy = [&policy, map_ptr, affect](const FiniteMdp& m,
                                                            StateId s,
                                                            CounterRng& rng) {
        return act(policy, m, s, map_ptr, affect, rng);
    };
    double nominal =
        health(built.model, nominal_policy, built.start, horizon, num_rollouts, seed)
            .probability;
    std::vector<double> perturbed;
    for (const auto& spec : perturbations) {
        perturbed.push_back(
            perturbed_start_health(config, spec, horizon, num_rollouts, seed));
    }
    return vulnerability_from_health(nominal, perturbed);
}

}  // namespace mortalworld
