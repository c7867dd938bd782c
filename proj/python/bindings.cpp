#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "gridwm/config.hpp"
#include "gridwm/errors.hpp"
#include "gridwm/evaluation.hpp"
#include "gridwm/pipeline.hpp"
#include "gridwm/serialize.hpp"
#include "gridwm/solver.hpp"
#include "gridwm/state_rep.hpp"
#include "gridwm/world_model.hpp"

namespace py = pybind11;
using namespace gridwm;

namespace {

// Python objects cross the boundary as JSON text.
json to_cpp(const py::object& obj) {
    // Leaked: must outlive interpreter finalization.
    static auto* dumps = new py::object(py::module_::import("json").attr("dumps"));
    return json::parse((*dumps)(obj).cast<std::string>());
}

py::object to_py(const json& j) {
    static auto* loads = new py::object(py::module_::import("json").attr("loads"));
    return (*loads)(j.dump());
}

EnvConfig config_arg(const py::object& obj) {
    if (py::isinstance<py::str>(obj)) return EnvConfig::defaults(env_kind_from_string(obj.cast<std::string>()));
    return env_config_from_json(to_cpp(obj));
}

std::vector<Action> actions_arg(EnvKind kind, const std::vector<std::string>& names) {
    std::vector<Action> out;
    for (const auto& n : names) {
        auto a = parse_action(n, kind);
        if (!a) throw std::invalid_argument("unparseable action: " + n);
        out.push_back(*a);
    }
    return out;
}

py::dict parsed_dict(const ParsedTurn& p) {
    py::dict d;
    d["observation"] = p.observation_text;
    d["prediction"] = p.prediction_text;
    d["free_reasoning"] = p.free_reasoning;
    d["answer"] = p.answer_text;
    std::vector<std::string> actions;
    for (const auto& a : p.actions) actions.push_back(format_action(a));
    d["actions"] = actions;
    std::vector<std::string> flags;
    for (auto f : p.flags) flags.emplace_back(to_string(f));
    d["flags"] = flags;
    return d;
}

py::dict verdict_dict(const FormatVerdict& v) {
    py::dict d;
    d["valid"] = v.valid;
    std::vector<std::string> rules;
    for (auto r : v.violations) rules.emplace_back(to_string(r));
    d["violations"] = rules;
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Grid-world environments, self-play data pipeline, tabular world model and metrics";
    m.attr("__version__") = std::string(kVersion);

    py::register_exception<InvalidConfig>(m, "InvalidConfig", PyExc_ValueError);
    py::register_exception<SteppedTerminal>(m, "SteppedTerminal", PyExc_RuntimeError);
    py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
    py::register_exception<SourceExhausted>(m, "SourceExhausted", PyExc_RuntimeError);
    py::register_exception<EmptyHeldout>(m, "EmptyHeldout", PyExc_ValueError);
    py::register_exception<ParseFailure>(m, "ParseFailure", PyExc_ValueError);

    py::class_<EpisodeState>(m, "State")
        .def_property_readonly("kind", [](const EpisodeState& s) { return std::string(to_string(s.kind())); })
        .def_readonly("turn", &EpisodeState::turn)
        .def_readonly("terminal", &EpisodeState::terminal)
        .def_readonly("success", &EpisodeState::success)
        .def("render", &render_symbols)
        .def("to_dict", [](const EpisodeState& s) { return to_py(to_json(s)); })
        .def_static("from_dict", [](const py::object& d) { return episode_state_from_json(to_cpp(d)); })
        .def("__eq__", [](const EpisodeState& a, const EpisodeState& b) { return a == b; })
        .def("__repr__", [](const EpisodeState& s) { return "<State " + std::string(to_string(s.kind())) + ">\n" + render_symbols(s); });

    m.def("default_config", [](const std::string& kind) { return to_py(to_json(EnvConfig::defaults(env_kind_from_string(kind)))); },
          py::arg("kind"));
    m.def("generate", [](const py::object& config, std::uint64_t seed) { return generate(config_arg(config), seed); },
          py::arg("config"), py::arg("seed"));
    m.def(
        "step",
        [](const EpisodeState& s, const std::vector<std::string>& actions) {
            const auto acts = actions_arg(s.kind(), actions);
            StepResult r = step(s, acts);
            py::dict d;
            d["state"] = r.next_state;
            d["reward"] = r.reward;
            d["done"] = r.done;
            d["actions_executed"] = r.actions_executed;
            d["actions_effective"] = r.actions_effective;
            std::vector<std::string> resolved;
            for (const auto& a : r.resolved) resolved.push_back(format_action(a));
            d["resolved"] = resolved;
            return d;
        },
        py::arg("state"), py::arg("actions"));
    m.def("parse_symbols", [](const std::string& text, const py::object& config) { return parse_symbols(text, config_arg(config)); },
          py::arg("text"), py::arg("config"));
    m.def(
        "compose_state",
        [](const EpisodeState& s) {
            StateText t = compose_state(s);
            py::dict d;
            d["raw"] = t.raw;
            d["abstraction"] = t.abstraction;
            d["composed"] = t.composed;
            return d;
        },
        py::arg("state"));
    m.def(
        "solve",
        [](const EpisodeState& s) -> std::optional<std::vector<std::string>> {
            auto plan = solve(s);
            if (!plan) return std::nullopt;
            std::vector<std::string> out;
            for (const auto& a : *plan) out.push_back(format_action(a));
            return out;
        },
        py::arg("state"));

    m.def(
        "system_prompt",
        [](const std::string& kind, const std::string& mode, int grid_size) {
            return make_template(env_kind_from_string(kind), prompt_mode_from_string(mode), grid_size).system_text;
        },
        py::arg("kind"), py::arg("mode") = "observation_then_prediction", py::arg("grid_size") = 6);
    m.def(
        "parse_output", [](const std::string& text, const std::string& kind) { return parsed_dict(parse_agent_output(text, env_kind_from_string(kind))); },
        py::arg("text"), py::arg("kind"));
    m.def(
        "check_format",
        [](const std::string& text, const std::string& kind, const std::string& mode, bool strict) {
            return verdict_dict(check_format(text, env_kind_from_string(kind), prompt_mode_from_string(mode), {strict}));
        },
        py::arg("text"), py::arg("kind"), py::arg("mode") = "observation_then_prediction", py::arg("strict") = false);

    m.def(
        "collect_trajectory",
        [](const py::object& config, std::uint64_t seed, const py::object& policy, const std::string& mode) {
            const EnvConfig c = config_arg(config);
            const auto tmpl = make_template(c.kind, prompt_mode_from_string(mode), c.grid_size);
            return to_py(to_json(collect_trajectory(c, seed, policy_spec_from_json(to_cpp(policy)), tmpl)));
        },
        py::arg("config"), py::arg("seed"), py::arg("policy") = py::dict(py::arg("type") = "random"),
        py::arg("mode") = "observation_then_prediction");
    m.def(
        "sft_records",
        [](const py::object& trajectory, const std::string& mode) {
            Trajectory t = trajectory_from_json(to_cpp(trajectory));
            const MaskMode mm = mask_mode_from_string(mode);
            if (mm != MaskMode::SelfBelief) t = rewrite_with_ground_truth(t);
            py::list out;
            for (const auto& r : emit_sft_records(t, mm)) out.append(to_py(to_json(r)));
            return out;
        },
        py::arg("trajectory"), py::arg("mode") = "world_model");
    m.def(
        "build_dataset",
        [](const py::object& config) {
            const DatasetSpec spec = dataset_spec_from(to_cpp(config));
            DatasetResult r;
            {
                py::gil_scoped_release release;
                r = build_dataset(spec);
            }
            py::list records;
            for (const auto& rec : r.records) records.append(to_py(to_json(rec)));
            py::dict d;
            d["records"] = records;
            d["episodes_used"] = r.episodes_used;
            d["rejected"] = r.rejected;
            d["duplicate_rate"] = r.duplicate_rate;
            return d;
        },
        py::arg("config") = py::dict());

    m.def("pass_at_k", &pass_at_k, py::arg("n"), py::arg("c"), py::arg("k"));
    m.def(
        "uniform_perplexity",
        [](const std::string& text, int vocab_size) { return perplexity(text, UniformProvider{vocab_size}); },
        py::arg("text"), py::arg("vocab_size"));
    m.def(
        "run_eval",
        [](const py::object& config) {
            const EvalSuite suite = eval_suite_from(to_cpp(config));
            EvalReport r;
            {
                py::gil_scoped_release release;
                r = run_eval(suite);
            }
            return to_py(json::parse(report_json(r)));
        },
        py::arg("config") = py::dict());

    py::class_<TransitionTable, std::shared_ptr<TransitionTable>>(m, "TransitionTable")
        .def(py::init<>())
        .def("add", py::overload_cast<const StateKey&, const std::string&, const StateKey&, std::uint64_t>(&TransitionTable::add),
             py::arg("state"), py::arg("action"), py::arg("next"), py::arg("count") = 1)
        .def("pair_count", &TransitionTable::pair_count)
        .def("is_deterministic", &TransitionTable::is_deterministic)
        .def("export_text", &TransitionTable::export_text)
        .def_static("import_text", [](const std::string& text) { return TransitionTable::import_text(text); })
        .def(
            "predict",
            [](const TransitionTable& t, const std::string& state, const std::string& action) -> std::optional<std::string> {
                return predict_argmax(t, state, action);
            },
            py::arg("state"), py::arg("action"))
        .def(
            "plan",
            [](const TransitionTable& t, const EpisodeState& start, int horizon) -> std::optional<std::vector<std::string>> {
                auto p = plan(t, state_key(start), success_predicate(start.config), {horizon});
                if (!p) return std::nullopt;
                return p->actions;
            },
            py::arg("start"), py::arg("horizon") = 10);
    m.def(
        "explore",
        [](const EpisodeState& start, int steps, std::uint64_t seed, int patience) {
            auto table = std::make_shared<TransitionTable>(fit(explore_random(start, steps, seed, patience)));
            return table;
        },
        py::arg("start"), py::arg("steps"), py::arg("seed"), py::arg("patience") = 200);
    m.def(
        "explore_restarts",
        [](const EpisodeState& start, int horizon, std::uint64_t seed, int patience) {
            std::vector<Triple> log;
            {
                py::gil_scoped_release release;
                log = explore_restarts(start, horizon, seed, patience);
            }
            return std::make_shared<TransitionTable>(fit(log));
        },
        py::arg("start"), py::arg("horizon"), py::arg("seed"), py::arg("patience") = 200);
}
