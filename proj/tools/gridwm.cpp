#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "gridwm/config.hpp"
#include "gridwm/errors.hpp"
#include "gridwm/evaluation.hpp"
#include "gridwm/lift.hpp"
#include "gridwm/pipeline.hpp"
#include "gridwm/serialize.hpp"
#include "gridwm/world_model.hpp"

namespace fs = std::filesystem;
using namespace gridwm;

namespace {

struct Common {
    std::string config_path;
    std::vector<std::string> overrides;
    std::optional<std::uint64_t> seed;
    std::optional<int> jobs;
    std::optional<std::string> out;
};

void add_common(CLI::App* cmd, Common& c) {
    cmd->add_option("--config", c.config_path, "JSON run config");
    cmd->add_option("--set", c.overrides, "Override a config value (dotted.key=value)");
    cmd->add_option("--seed", c.seed, "Global seed");
    cmd->add_option("--jobs", c.jobs, "Worker threads");
    cmd->add_option("--out", c.out, "Output directory");
}

json resolve(const Common& c) {
    json config = load_config(c.config_path);
    // A manifest from an earlier run replays its resolved config.
    if (config.contains("command") && config.contains("config") && config["config"].is_object())
        config = json(config["config"]);
    for (const auto& o : c.overrides) apply_override(config, o);
    if (c.seed) config["seed"] = *c.seed;
    if (c.jobs) config["jobs"] = *c.jobs;
    if (c.out) config["out"] = *c.out;
    return config;
}

fs::path out_dir(const json& config) {
    fs::path dir = config.value("out", std::string("out"));
    fs::create_directories(dir);
    return dir;
}

void write_file(const fs::path& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + path.string());
    f << text;
}

std::string read_file(const fs::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot read " + path.string());
    std::ostringstream s;
    s << f.rdbuf();
    return s.str();
}

json run_manifest(const std::string& command, const json& config, std::vector<std::string> files) {
    return {{"command", command}, {"version", kVersion}, {"config", config}, {"files", files}};
}

void write_manifest(const fs::path& dir, const json& manifest) { write_file(dir / "manifest.json", manifest.dump(2) + "\n"); }

int cmd_gen_data(const Common& c) {
    const json config = resolve(c);
    const DatasetSpec spec = dataset_spec_from(config);
    const fs::path dir = out_dir(config);
    const DatasetResult result = build_dataset(spec);
    const json extra = {{"command", "gen-data"},
                        {"version", kVersion},
                        {"config", config},
                        {"files", {"dataset.jsonl", "trajectories.jsonl"}}};
    write_dataset(result, spec, dir, extra.dump());
    std::cout << "kept=" << result.records.size() << " rejected=" << result.rejected
              << " episodes=" << result.episodes_used << " out=" << dir.string() << "\n";
    return 0;
}

int cmd_eval(const Common& c) {
    const json config = resolve(c);
    const EvalSuite suite = eval_suite_from(config);
    const fs::path dir = out_dir(config);
    const EvalReport report = run_eval(suite);
    write_file(dir / "report.json", report_json(report) + "\n");
    write_file(dir / "instances.csv", report_instances_csv(report));
    write_file(dir / "pass_at_k.csv", report_pass_at_k_csv(report));
    write_manifest(dir, run_manifest("eval", config, {"report.json", "instances.csv", "pass_at_k.csv"}));
    std::cout << "policy=" << report.policy << " pass@1=" << report.pass_at_1;
    for (const auto& [k, v] : report.pass_at) std::cout << " pass@" << k << "=" << v;
    std::cout << " failed=" << report.failed.size() << "\n";
    return 0;
}

std::vector<Triple> log_from(const json& config, const char* seed_key) {
    const auto envs = env_configs_from(config);
    const auto seed = config.value("seed", std::uint64_t{0});
    const json wm = config.value("worldmodel", json::object());
    const auto walk_seed = wm.value(seed_key, seed);
    return random_log(envs.front(), seed, wm.value("num_instances", 10), wm.value("steps", 5000),
                      wm.value("episode_length", 10), walk_seed);
}

int cmd_wm_fit(const Common& c) {
    const json config = resolve(c);
    const fs::path dir = out_dir(config);
    const auto triples = log_from(config, "walk_seed");
    const TransitionTable table = fit(triples);
    write_file(dir / "table.txt", table.export_text());
    write_manifest(dir, run_manifest("worldmodel fit", config, {"table.txt"}));
    std::cout << "triples=" << triples.size() << " pairs=" << table.pair_count()
              << " deterministic=" << (table.is_deterministic() ? "true" : "false") << "\n";
    return 0;
}

int cmd_wm_accuracy(const Common& c, const std::string& table_path) {
    const json config = resolve(c);
    const fs::path dir = out_dir(config);
    const TransitionTable table = TransitionTable::import_text(read_file(table_path));
    const auto heldout = log_from(config, "heldout_seed");
    const double acc = eval_accuracy(table, heldout);
    const json report = {{"table", table_path}, {"heldout", heldout.size()}, {"accuracy", acc}};
    write_file(dir / "accuracy.json", report.dump(2) + "\n");
    write_manifest(dir, run_manifest("worldmodel accuracy", config, {"accuracy.json"}));
    std::cout << "accuracy=" << acc << " heldout=" << heldout.size() << "\n";
    return 0;
}

int cmd_wm_plan_eval(const Common& c) {
    const json config = resolve(c);
    const fs::path dir = out_dir(config);
    const LiftOptions options = lift_options_from(config);
    const LiftReport report = run_lift_suite(options);
    write_file(dir / "lift_report.json", lift_report_json(report, options) + "\n");
    write_file(dir / "table.txt", report.table->export_text());
    write_manifest(dir, run_manifest("worldmodel plan-eval", config, {"lift_report.json", "table.txt"}));
    std::cout << "planner pass@1=" << report.planner_pass_at_1 << " random pass@" << options.k << "="
              << report.random_pass_at_k << " lift=" << (report.lift ? "true" : "false") << "\n";
    return report.lift ? 0 : 3;
}

int default_vocab(EnvKind kind) {
    switch (kind) {
        case EnvKind::Sokoban: return 7;
        case EnvKind::FrozenLake: return 6;
        case EnvKind::Sudoku: return 5;
    }
    return 1;
}

int cmd_ppl(const Common& c, const std::string& input) {
    const json config = resolve(c);
    const fs::path dir = out_dir(config);
    const EnvConfig env = env_configs_from(config).front();
    const json pc = config.value("ppl", json::object());

    std::vector<std::string> texts;
    if (!input.empty()) {
        std::string current;
        std::istringstream in(read_file(input));
        for (std::string line; std::getline(in, line);) {
            if (line.find_first_not_of(" \t\r") == std::string::npos) {
                if (!current.empty()) texts.push_back(current);
                current.clear();
            } else {
                current += current.empty() ? line : "\n" + line;
            }
        }
        if (!current.empty()) texts.push_back(current);
    } else {
        const auto seed = config.value("seed", std::uint64_t{0});
        const int n = pc.value("num_samples", 100);
        for (int i = 0; i < n; ++i) texts.push_back(render_symbols(generate(env, seed + static_cast<std::uint64_t>(i))));
    }
    if (texts.empty()) throw EmptyInput("no texts to score");

    const json prov = pc.value("provider", json{{"type", "uniform"}});
    LogProbProvider provider;
    const auto type = prov.value("type", std::string("uniform"));
    if (type == "uniform") {
        provider = UniformProvider{prov.value("vocab_size", default_vocab(env.kind))};
    } else if (type == "remote") {
        json spec = prov;
        spec["type"] = "remote_lm";
        provider = RemoteProvider{std::make_shared<LmClient>(std::get<RemoteLmSpec>(policy_spec_from_json(spec)))};
    } else {
        throw InvalidConfig("unknown ppl provider: " + type);
    }
    const PplUnit unit = ppl_unit_from_string(pc.value("unit", std::string("symbol")));

    json values = json::array();
    double total = 0.0;
    for (const auto& t : texts) {
        const double p = perplexity(t, provider, unit);
        values.push_back(p);
        total += p;
    }
    const double mean = total / static_cast<double>(texts.size());
    const json report = {{"provider", prov}, {"unit", to_string(unit)}, {"count", texts.size()},
                         {"mean_ppl", mean}, {"ppl", values}};
    write_file(dir / "ppl.json", report.dump(2) + "\n");
    write_manifest(dir, run_manifest("ppl", config, {"ppl.json"}));
    std::cout << "mean_ppl=" << mean << " count=" << texts.size() << "\n";
    return 0;
}

int cmd_play_trace(const std::string& input, std::optional<std::size_t> index) {
    std::ifstream in(input);
    if (!in) throw std::runtime_error("cannot read " + input);
    std::size_t line_no = 0;
    for (std::string line; std::getline(in, line); ++line_no) {
        if (line.empty() || (index && *index != line_no)) continue;
        const Trajectory t = trajectory_from_json(json::parse(line));
        std::cout << "=== trajectory " << line_no << ": " << to_string(t.config.kind) << " seed=" << t.seed
                  << " policy=" << t.policy << " ===\n";
        for (std::size_t i = 0; i < t.turns.size(); ++i) {
            const auto& turn = t.turns[i];
            std::cout << "Turn " << i + 1 << ":\nState:\n" << turn.state_text.raw << "\n" << turn.state_text.abstraction
                      << "\nOutput:\n" << turn.raw_output << "\nReward: " << turn.reward << "\n";
            if (!turn.verdict.valid) {
                std::cout << "Format:";
                for (auto r : turn.verdict.violations) std::cout << ' ' << to_string(r);
                std::cout << "\n";
            }
            std::cout << "\n";
        }
        std::cout << "success=" << (t.final_success ? "true" : "false");
        if (t.truncated) std::cout << " truncated=" << t.truncation_cause;
        std::cout << "\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Grid-world self-play data engine and evaluation harness"};
    app.set_version_flag("--version", std::string(kVersion));
    app.require_subcommand(1);

    Common gen, eval, fit_c, acc_c, plan_c, ppl_c;
    auto* gen_cmd = app.add_subcommand("gen-data", "Collect trajectories and write a masked SFT dataset");
    add_common(gen_cmd, gen);
    auto* eval_cmd = app.add_subcommand("eval", "Pass@1 / Pass@k evaluation");
    add_common(eval_cmd, eval);

    auto* wm = app.add_subcommand("worldmodel", "Tabular transition model");
    wm->require_subcommand(1);
    auto* fit_cmd = wm->add_subcommand("fit", "Fit a table on a random self-play log");
    add_common(fit_cmd, fit_c);
    std::string table_path;
    auto* acc_cmd = wm->add_subcommand("accuracy", "Held-out argmax accuracy of a table");
    add_common(acc_cmd, acc_c);
    acc_cmd->add_option("--table", table_path, "Table file from 'worldmodel fit'")->required();
    auto* plan_cmd = wm->add_subcommand("plan-eval", "Planner vs random Pass@k suite");
    add_common(plan_cmd, plan_c);

    std::string ppl_input;
    auto* ppl_cmd = app.add_subcommand("ppl", "Perplexity of state renderings");
    add_common(ppl_cmd, ppl_c);
    ppl_cmd->add_option("--input", ppl_input, "Texts separated by blank lines (default: generated grids)");

    std::string trace_input;
    std::optional<std::size_t> trace_index;
    auto* trace_cmd = app.add_subcommand("play-trace", "Print stored trajectories turn by turn");
    trace_cmd->add_option("--input", trace_input, "trajectories.jsonl")->required();
    trace_cmd->add_option("--index", trace_index, "Only this line (0-based)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*gen_cmd) return cmd_gen_data(gen);
        if (*eval_cmd) return cmd_eval(eval);
        if (*fit_cmd) return cmd_wm_fit(fit_c);
        if (*acc_cmd) return cmd_wm_accuracy(acc_c, table_path);
        if (*plan_cmd) return cmd_wm_plan_eval(plan_c);
        if (*ppl_cmd) return cmd_ppl(ppl_c, ppl_input);
        if (*trace_cmd) return cmd_play_trace(trace_input, trace_index);
    } catch (const ProviderError& e) {
        std::cerr << "error: ProviderError: " << e.what() << "\n";
        return 1;
    } catch (const SourceExhausted& e) {
        std::cerr << "error: SourceExhausted: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
