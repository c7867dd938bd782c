#include "gridwm/pipeline.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <tuple>

#include "gridwm/errors.hpp"
#include "gridwm/parallel.hpp"
#include "gridwm/serialize.hpp"
#include "text_util.hpp"

namespace gridwm {

namespace {

constexpr std::string_view kThinkOpen = "<think>";
constexpr std::string_view kThinkClose = "</think>";

struct Edit {
    std::size_t begin;
    std::size_t end;
    std::string text;
};

std::string apply_edits(std::string text, std::vector<Edit> edits) {
    std::sort(edits.begin(), edits.end(), [](const Edit& a, const Edit& b) { return a.begin > b.begin; });
    for (const auto& e : edits) text.replace(e.begin, e.end - e.begin, e.text);
    return text;
}

std::string block(std::string_view tag, const std::string& content) {
    return "<" + std::string(tag) + ">\n" + content + "\n</" + std::string(tag) + ">";
}

// Rewrites one parsed output so its observation/prediction blocks hold
// `truth_now` / `truth_next`. Blocks already equal to the truth are left
// byte-for-byte alone.
std::string inject_beliefs(const ParsedTurn& p, const std::string& truth_now, const std::string& truth_next) {
    std::vector<Edit> edits;
    const std::size_t think_inner_begin = p.think.begin + kThinkOpen.size();
    const std::size_t think_inner_end = p.think.end - kThinkClose.size();

    if (p.observation) {
        if (detail::trim(std::string_view(p.raw).substr(p.observation->begin, p.observation->size())) != truth_now)
            edits.push_back({p.observation->begin, p.observation->end, "\n" + truth_now + "\n"});
    } else {
        edits.push_back({think_inner_begin, think_inner_begin, "\n" + block("observation", truth_now) + "\n"});
    }
    if (p.prediction) {
        if (detail::trim(std::string_view(p.raw).substr(p.prediction->begin, p.prediction->size())) != truth_next)
            edits.push_back({p.prediction->begin, p.prediction->end, "\n" + truth_next + "\n"});
    } else {
        edits.push_back({think_inner_end, think_inner_end, "\n" + block("prediction", truth_next) + "\n"});
    }
    // Two insertions at one offset (empty think) must keep observation first.
    if (edits.size() == 2 && edits[0].begin == edits[1].begin && edits[0].end == edits[1].end &&
        edits[0].begin == edits[0].end) {
        edits[0].text += edits[1].text.substr(1);
        edits.pop_back();
    }
    return apply_edits(p.raw, std::move(edits));
}

struct MaskedCompletion {
    std::string text;
    std::vector<Span> spans;
};

MaskedCompletion make_completion(const TurnRecord& turn, MaskMode mode) {
    const ParsedTurn& p = *turn.parsed;
    if (mode != MaskMode::MaskedAblation) return {p.raw, {p.think, p.answer}};

    std::vector<Edit> edits;
    if (p.observation) edits.push_back({p.observation->begin, p.observation->end, std::string(kMaskedToken)});
    if (p.prediction) edits.push_back({p.prediction->begin, p.prediction->end, std::string(kMaskedToken)});
    MaskedCompletion out{apply_edits(p.raw, edits), {}};
    const ParsedTurn q = parse_agent_output(out.text, turn.state_before.kind());

    std::vector<Span> holes;
    if (q.observation) holes.push_back(*q.observation);
    if (q.prediction) holes.push_back(*q.prediction);
    std::sort(holes.begin(), holes.end(), [](const Span& a, const Span& b) { return a.begin < b.begin; });
    std::size_t cursor = q.think.begin;
    for (const Span& h : holes) {
        if (h.begin > cursor) out.spans.push_back({cursor, h.begin});
        cursor = h.end;
    }
    if (q.think.end > cursor) out.spans.push_back({cursor, q.think.end});
    out.spans.push_back(q.answer);
    return out;
}

std::string record_key(const SftRecord& r) {
    constexpr std::string_view marker = "\nState:\n";
    const auto pos = r.prompt.rfind(marker);
    std::string state = pos == std::string::npos ? r.prompt : r.prompt.substr(pos + marker.size());
    std::string answer;
    try {
        answer = parse_agent_output(r.completion, r.meta.env).answer_text;
    } catch (const ParseFailure&) {
        answer = r.completion;
    }
    return state + '\x1f' + answer;
}

struct EpisodeOutput {
    Trajectory trajectory;
    FilterResult filtered;
};

}  // namespace

Trajectory collect_trajectory(const EnvConfig& config, std::uint64_t seed, const PolicySpec& policy,
                              const PromptTemplate& tmpl, const CollectOptions& options) {
    validate(config);
    if (config.max_turns < 1) throw InvalidConfig("max_turns must be at least 1");

    Trajectory traj;
    traj.config = config;
    traj.seed = seed;
    traj.policy = std::string(policy_name(policy));
    traj.template_mode = tmpl.mode;

    EpisodeState state = generate(config, seed);
    if (options.dynamics_seed) state.reseed(*options.dynamics_seed);
    Policy actor = Policy::make(policy, options.policy_seed.value_or(seed), options.client);
    std::vector<HistoryTurn> history;

    auto stop = [&](std::string cause) {
        traj.truncated = true;
        traj.truncation_cause = std::move(cause);
    };

    while (!state.terminal) {
        if (static_cast<int>(traj.turns.size()) >= config.max_turns) {
            stop("max_turns");
            break;
        }
        TurnRecord rec;
        rec.state_before = state;
        rec.state_text = compose_state(state);
        const std::string prompt = build_prompt(tmpl, history, rec.state_text);

        PolicyOutput out;
        try {
            out = actor.act(prompt, state);
        } catch (const Timeout&) {
            stop("timeout");
            break;
        } catch (const EndpointError&) {
            stop("endpoint_error");
            break;
        } catch (const PolicyError&) {
            stop("policy_error");
            break;
        }
        rec.raw_output = std::move(out.raw_text);
        rec.prompt_tokens = out.prompt_tokens;
        rec.completion_tokens = out.completion_tokens;

        try {
            rec.parsed = parse_agent_output(rec.raw_output, config.kind);
        } catch (const ParseFailure& e) {
            rec.verdict = e.verdict();
            traj.turns.push_back(std::move(rec));
            stop("parse_failure");
            break;
        }
        rec.verdict = validate_format(*rec.parsed, tmpl.mode);
        StepResult result = step(state, rec.parsed->actions);
        rec.reward = result.reward;
        state = result.next_state;
        rec.step = std::move(result);
        history.push_back({rec.state_text, *rec.parsed, rec.reward});
        traj.turns.push_back(std::move(rec));
    }
    traj.final_success = state.success;
    return traj;
}

Trajectory rewrite_with_ground_truth(const Trajectory& trajectory) {
    Trajectory out = trajectory;
    out.rewritten = true;
    for (auto& turn : out.turns) {
        if (!turn.parsed || !turn.step) continue;
        const ParsedTurn& p = *turn.parsed;
        const std::string now = turn.state_text.composed;
        const std::string next = compose_state(turn.step->next_state).composed;
        turn.belief_observation = p.observation_text;
        turn.belief_prediction = p.prediction_text;
        turn.raw_output = inject_beliefs(p, now, next);
        turn.parsed = parse_agent_output(turn.raw_output, out.config.kind);
        turn.verdict = validate_format(*turn.parsed, out.template_mode);
        turn.rewritten = true;
    }
    return out;
}

std::string_view to_string(MaskMode mode) {
    switch (mode) {
        case MaskMode::WorldModel: return "world_model";
        case MaskMode::MaskedAblation: return "masked_ablation";
        case MaskMode::SelfBelief: return "self_belief";
    }
    return "world_model";
}

MaskMode mask_mode_from_string(std::string_view name) {
    if (name == "world_model") return MaskMode::WorldModel;
    if (name == "masked_ablation") return MaskMode::MaskedAblation;
    if (name == "self_belief") return MaskMode::SelfBelief;
    throw InvalidConfig("unknown mask mode: " + std::string(name));
}

std::vector<SftRecord> emit_sft_records(const Trajectory& trajectory, MaskMode mode) {
    if (mode != MaskMode::SelfBelief && !trajectory.rewritten)
        throw std::invalid_argument(std::string(to_string(mode)) + " records need a rewritten trajectory");

    const PromptTemplate tmpl = make_template(trajectory.config.kind, trajectory.template_mode, trajectory.config.grid_size);
    std::vector<SftRecord> records;
    std::vector<HistoryTurn> history;
    for (std::size_t i = 0; i < trajectory.turns.size(); ++i) {
        const TurnRecord& turn = trajectory.turns[i];
        if (!turn.parsed || !turn.step) continue;
        MaskedCompletion c = make_completion(turn, mode);

        SftRecord r;
        r.prompt = build_prompt(tmpl, history, turn.state_text);
        r.completion = c.text;
        r.mask_spans = std::move(c.spans);
        r.mode = mode;
        r.meta = {trajectory.config.kind, trajectory.seed, static_cast<int>(i), trajectory.policy,
                  trajectory.config.rewards, trajectory.template_mode};
        records.push_back(std::move(r));

        ParsedTurn shown = *turn.parsed;
        shown.raw = std::move(c.text);
        history.push_back({turn.state_text, std::move(shown), turn.reward});
    }
    return records;
}

FilterResult filter_records(std::vector<SftRecord> records, PromptMode mode, const ParseOptions& options) {
    FilterResult out;
    for (auto& r : records) {
        FormatVerdict v = check_format(r.completion, r.meta.env, mode, options);
        if (v.valid) out.kept.push_back(std::move(r));
        else out.rejected.push_back({std::move(r), std::move(v)});
    }
    return out;
}

DatasetResult build_dataset(const DatasetSpec& spec, std::shared_ptr<LmClient> client) {
    if (spec.target_count < 1) throw InvalidConfig("target_count must be at least 1");
    if (spec.configs.empty()) throw InvalidConfig("dataset needs at least one environment config");
    for (const auto& c : spec.configs) validate(c);
    if (!client) {
        if (const auto* lm = std::get_if<RemoteLmSpec>(&spec.policy)) client = std::make_shared<LmClient>(*lm);
    }

    const std::size_t n_configs = spec.configs.size();
    const std::size_t chunk = std::max<std::size_t>(16, static_cast<std::size_t>(std::max(1, spec.jobs)) * 4);
    DatasetResult result;
    std::set<std::string> seen;
    std::size_t kept_keys = 0;

    for (std::size_t base = 0; base < spec.max_episodes; base += chunk) {
        const std::size_t n = std::min(chunk, spec.max_episodes - base);
        std::vector<EpisodeOutput> slots(n);
        parallel_for(n, spec.jobs, [&](std::size_t k) {
            const std::size_t j = base + k;
            const EnvConfig& config = spec.configs[j % n_configs];
            const std::uint64_t seed = spec.seed_start + j / n_configs;
            const PromptTemplate tmpl = make_template(config.kind, spec.template_mode, config.grid_size);
            Trajectory traj = collect_trajectory(config, seed, spec.policy, tmpl, {std::nullopt, std::nullopt, client});
            const Trajectory source = spec.mode == MaskMode::SelfBelief ? traj : rewrite_with_ground_truth(traj);
            slots[k].filtered = filter_records(emit_sft_records(source, spec.mode), spec.template_mode, spec.filter_options);
            slots[k].trajectory = std::move(traj);
        });

        for (std::size_t k = 0; k < n; ++k) {
            auto& slot = slots[k];
            result.trajectories.push_back(std::move(slot.trajectory));
            result.episodes_used = base + k + 1;
            for (auto& rej : slot.filtered.rejected) {
                ++result.rejected;
                for (auto rule : rej.verdict.violations) ++result.rejection_counts[std::string(to_string(rule))];
            }
            for (auto& r : slot.filtered.kept) {
                if (result.records.size() >= spec.target_count) break;
                seen.insert(record_key(r));
                ++kept_keys;
                result.records.push_back(std::move(r));
            }
            if (result.records.size() >= spec.target_count) {
                result.duplicate_rate = 1.0 - static_cast<double>(seen.size()) / static_cast<double>(kept_keys);
                return result;
            }
        }
    }
    throw SourceExhausted("only " + std::to_string(result.records.size()) + " of " + std::to_string(spec.target_count) +
                          " records after " + std::to_string(spec.max_episodes) + " episodes");
}

void write_dataset(const DatasetResult& result, const DatasetSpec& spec, const std::filesystem::path& out_dir,
                   const std::string& manifest_extra_json) {
    std::filesystem::create_directories(out_dir);
    auto open = [&](const char* name) {
        std::ofstream f(out_dir / name, std::ios::binary);
        if (!f) throw std::runtime_error("cannot write " + (out_dir / name).string());
        return f;
    };
    {
        auto f = open("dataset.jsonl");
        for (const auto& r : result.records) f << to_json(r).dump() << '\n';
    }
    {
        auto f = open("trajectories.jsonl");
        for (const auto& t : result.trajectories) f << to_json(t).dump() << '\n';
    }
    json configs = json::array();
    for (const auto& c : spec.configs) configs.push_back(to_json(c));
    json manifest = {
        {"configs", configs},
        {"seed_start", spec.seed_start},
        {"max_episodes", spec.max_episodes},
        {"episodes_used", result.episodes_used},
        {"policy", to_json(spec.policy)},
        {"mode", to_string(spec.mode)},
        {"template_mode", to_string(spec.template_mode)},
        {"target_count", spec.target_count},
        {"kept", result.records.size()},
        {"rejected", result.rejected},
        {"rejection_counts", result.rejection_counts},
        {"duplicate_rate", result.duplicate_rate},
        {"strict_format", spec.filter_options.strict},
        {"mask_spans",
         "half-open [start, end) offsets into completion, counted in Unicode code points; loss applies inside"},
    };
    const json extra = json::parse(manifest_extra_json);
    for (auto it = extra.begin(); it != extra.end(); ++it) manifest[it.key()] = it.value();
    auto f = open("manifest.json");
    f << manifest.dump(2) << '\n';
}

}  // namespace gridwm
