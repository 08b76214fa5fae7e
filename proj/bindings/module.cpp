// Python bindings for the core analysis operations. Rollout policies
// passed from Python run single-threaded under the GIL.

#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "mortalworld/harness.hpp"

namespace py = pybind11;
using namespace mortalworld;

namespace {

FiniteMdp make_mdp(std::size_t num_states, std::size_t num_actions,
                   std::vector<double> transition, std::vector<StateId> terminal,
                   std::vector<std::string> labels) {
    return FiniteMdp(num_states, num_actions, std::move(transition),
                     std::set<StateId>(terminal.begin(), terminal.end()),
                     std::move(labels));
}

StatePolicy policy_from_python(const py::object& policy) {
    if (policy.is_none()) {
        return [](const FiniteMdp& mdp, StateId, CounterRng& rng) {
            return rng.next_index(mdp.num_actions());
        };
    }
    auto fn = policy.cast<py::function>();
    return [fn](const FiniteMdp& mdp, StateId s, CounterRng&) -> ActionId {
        return fn(s).cast<ActionId>();
    };
}

}  // namespace

PYBIND11_MODULE(mortalworld, m) {
    m.doc() =
        "Deterministic finite-MDP survival simulator: empowerment, "
        "viability, health, and seeded experiment runs";

    py::register_exception<CapacityBudgetError>(m, "CapacityBudgetError");
    py::register_exception<ConfigError>(m, "ConfigError");

    py::class_<CounterRng>(m, "CounterRng")
        .def(py::init<std::uint64_t>(), py::arg("key"))
        .def_static("derive_key", &CounterRng::derive_key, py::arg("base_seed"),
                    py::arg("stream_index"), py::arg("stream_tag"))
        .def("next_u64", &CounterRng::next_u64)
        .def("next_double", &CounterRng::next_double)
        .def("next_index", &CounterRng::next_index, py::arg("n"));

    py::class_<EmpowermentValue>(m, "EmpowermentValue")
        .def_readonly("bits", &EmpowermentValue::bits)
        .def_readonly("horizon", &EmpowermentValue::horizon)
        .def_readonly("gap", &EmpowermentValue::gap)
        .def_readonly("converged", &EmpowermentValue::converged)
        .def("__repr__", [](const EmpowermentValue& v) {
            return "EmpowermentValue(bits=" + std::to_string(v.bits) +
                   ", horizon=" + std::to_string(v.horizon) + ")";
        });

    py::class_<ViabilityKernel>(m, "ViabilityKernel")
        .def_readonly("members", &ViabilityKernel::members)
        .def_readonly("iterations_to_fixpoint",
                      &ViabilityKernel::iterations_to_fixpoint)
        .def("contains", &ViabilityKernel::contains, py::arg("state"));

    py::class_<HealthEstimate>(m, "HealthEstimate")
        .def_readonly("probability", &HealthEstimate::probability)
        .def_readonly("horizon", &HealthEstimate::horizon)
        .def_readonly("num_rollouts", &HealthEstimate::num_rollouts)
        .def_readonly("confidence_halfwidth",
                      &HealthEstimate::confidence_halfwidth);

    py::class_<FiniteMdp>(m, "FiniteMdp")
        .def(py::init(&make_mdp), py::arg("num_states"), py::arg("num_actions"),
             py::arg("transition"), py::arg("terminal") = std::vector<StateId>{},
             py::arg("labels") = std::vector<std::string>{})
        .def_property_readonly("num_states", &FiniteMdp::num_states)
        .def_property_readonly("num_actions", &FiniteMdp::num_actions)
        .def_property_readonly("labels", &FiniteMdp::labels)
        .def("terminal_states",
             [](const FiniteMdp& mdp) {
                 return std::vector<StateId>(mdp.terminal_set().begin(),
                                             mdp.terminal_set().end());
             })
        .def("validate",
             [](const FiniteMdp& mdp) {
                 std::vector<std::string> out;
                 for (const auto& v : mdp.validate()) out.push_back(v.message);
                 return out;
             })
        .def("is_terminal", &FiniteMdp::is_terminal, py::arg("state"))
        .def("row",
             [](const FiniteMdp& mdp, StateId s, ActionId a) {
                 auto r = mdp.row(s, a);
                 return std::vector<double>(r.begin(), r.end());
             },
             py::arg("state"), py::arg("action"))
        .def("step", &FiniteMdp::step, py::arg("state"), py::arg("action"),
             py::arg("rng"))
        .def("successor_support", &FiniteMdp::successor_support,
             py::arg("state"), py::arg("action"))
        .def("reachable_states", &FiniteMdp::reachable_states, py::arg("state"),
             py::arg("horizon"))
        .def("irreversibility", &FiniteMdp::irreversibility, py::arg("from_state"),
             py::arg("to_state"))
        .def("to_json", &FiniteMdp::to_json)
        .def_static("from_json", &FiniteMdp::from_json, py::arg("text"),
                    py::arg("check") = true);

    m.def(
        "empowerment",
        [](const FiniteMdp& mdp, StateId s, std::size_t n, double tol) {
            return empowerment(mdp, s, n, tol);
        },
        py::arg("mdp"), py::arg("state"), py::arg("n"),
        py::arg("tol") = kDefaultCapacityTol);
    m.def(
        "empowerment_map",
        [](const FiniteMdp& mdp, std::size_t n, double tol, std::size_t threads) {
            py::gil_scoped_release release;
            return empowerment_map(mdp, n, tol, kDefaultCapacityMaxIter, threads);
        },
        py::arg("mdp"), py::arg("n"), py::arg("tol") = kDefaultCapacityTol,
        py::arg("threads") = 1);
    m.def(
        "channel_capacity",
        [](const std::vector<std::vector<double>>& rows, double tol) {
            ChannelMatrix ch;
            ch.num_inputs = rows.size();
            ch.num_outputs = rows.empty() ? 0 : rows.front().size();
            for (const auto& r : rows) {
                ch.probs.insert(ch.probs.end(), r.begin(), r.end());
            }
            ch.input_labels.resize(ch.num_inputs);
            ch.output_labels.resize(ch.num_outputs);
            return channel_capacity_ba(ch, tol);
        },
        py::arg("rows"), py::arg("tol") = kDefaultCapacityTol,
        "Channel capacity in bits of a row-stochastic matrix p(out | in)");

    m.def("viability_kernel", &viability_kernel, py::arg("mdp"));
    m.def("integrity", &integrity, py::arg("mdp"), py::arg("state"));
    m.def(
        "health",
        [](const FiniteMdp& mdp, StateId s, std::size_t horizon,
           std::size_t num_rollouts, std::uint64_t seed,
           const py::object& policy) {
            return health(mdp, policy_from_python(policy), s, horizon,
                          num_rollouts, seed, 1);
        },
        py::arg("mdp"), py::arg("state"), py::arg("horizon"),
        py::arg("num_rollouts"), py::arg("seed"), py::arg("policy") = py::none(),
        "Survival probability; policy maps state -> action, default uniform");

    m.def(
        "build_jar_chain",
        [](int chain_length, int irreversible_edge, bool last_state_terminal) {
            JarChainConfig jc;
            jc.chain_length = chain_length;
            jc.irreversible_edge = irreversible_edge;
            jc.last_state_terminal = last_state_terminal;
            return build_jar_chain(jc);
        },
        py::arg("chain_length") = 7, py::arg("irreversible_edge") = 3,
        py::arg("last_state_terminal") = false);

    m.def(
        "build_experiment_model",
        [](const std::string& config_text) {
            auto built = build_experiment(ConfigTable::parse(config_text));
            return py::make_tuple(std::move(built.model), built.start);
        },
        py::arg("config_text"),
        "Compile the [env]/[embodiment] blocks into (FiniteMdp, start_state)");
    m.def(
        "run_experiment",
        [](const std::string& config_text, std::size_t threads,
           const std::optional<std::filesystem::path>& output_dir) {
            auto config = ConfigTable::parse(config_text);
            std::string summary;
            {
                py::gil_scoped_release release;
                summary = run_experiment(config, threads, output_dir)
                              .summary.to_json();
            }
            py::module_ json = py::module_::import("json");
            return json.attr("loads")(summary);
        },
        py::arg("config_text"), py::arg("threads") = 1,
        py::arg("output_dir") = py::none(),
        "Run a config and return the summary statistics as a dict");
    m.def(
        "config_vulnerability",
        [](const std::string& config_text, std::size_t horizon,
           std::size_t num_rollouts, std::uint64_t seed) {
            return config_vulnerability(ConfigTable::parse(config_text),
                                        standard_perturbations(), horizon,
                                        num_rollouts, seed);
        },
        py::arg("config_text"), py::arg("horizon") = 20,
        py::arg("num_rollouts") = 200, py::arg("seed") = 0,
        "Worst-case start-health loss under the standard perturbations");
    m.def("validate_mdp_json", [](const std::string& text) {
        std::vector<std::string> out;
        for (const auto& v : FiniteMdp::from_json(text, false).validate()) {
            out.push_back(v.message);
        }
        return out;
    });
}
