#include "gridwm/protocol.hpp"

#include <algorithm>
#include <array>
#include <cctype>

#include "gridwm/errors.hpp"
#include "prompt_texts.hpp"
#include "text_util.hpp"

namespace gridwm {

namespace {

struct Block {
    Span outer;    // including tags
    Span content;  // between tags
};

std::optional<Block> find_block(std::string_view text, std::string_view name, std::size_t from, std::size_t to) {
    const std::string open = "<" + std::string(name) + ">";
    const std::string close = "</" + std::string(name) + ">";
    const auto o = text.find(open, from);
    if (o == std::string_view::npos || o >= to) return std::nullopt;
    const auto c = text.find(close, o + open.size());
    if (c == std::string_view::npos || c + close.size() > to) return std::nullopt;
    return Block{{o, c + close.size()}, {o + open.size(), c}};
}

std::size_t count_occurrences(std::string_view text, std::string_view needle) {
    std::size_t n = 0;
    for (auto pos = text.find(needle); pos != std::string_view::npos; pos = text.find(needle, pos + needle.size())) ++n;
    return n;
}

bool iequals(std::string_view a, std::string_view b) {
    return a.size() == b.size() && std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
               return std::tolower(static_cast<unsigned char>(x)) == std::tolower(static_cast<unsigned char>(y));
           });
}

[[noreturn]] void fail(FormatRule rule) {
    FormatVerdict v;
    v.add(rule);
    throw ParseFailure(std::move(v));
}

void add_flag(std::vector<FormatRule>& flags, FormatRule rule) {
    if (std::find(flags.begin(), flags.end(), rule) == flags.end()) flags.push_back(rule);
}

}  // namespace

std::string_view to_string(PromptMode mode) {
    return mode == PromptMode::Base ? "base" : "observation_then_prediction";
}

PromptMode prompt_mode_from_string(std::string_view name) {
    if (name == "base") return PromptMode::Base;
    if (name == "observation_then_prediction" || name == "obs_pred") return PromptMode::ObservationThenPrediction;
    throw InvalidConfig("unknown prompt mode: " + std::string(name));
}

PromptTemplate make_template(EnvKind kind, PromptMode mode, int grid_size) {
    PromptTemplate t;
    t.env_kind = kind;
    t.mode = mode;
    const bool base = mode == PromptMode::Base;
    switch (kind) {
        case EnvKind::Sokoban: t.system_text = base ? detail::kSokobanBase : detail::kSokobanObsPred; break;
        case EnvKind::FrozenLake: t.system_text = base ? detail::kFrozenLakeBase : detail::kFrozenLakeObsPred; break;
        case EnvKind::Sudoku: t.system_text = base ? detail::kSudokuBase : detail::kSudokuObsPred; break;
    }
    if (kind == EnvKind::Sokoban && grid_size != 6) {
        const std::string from = "bottom-right corner (5, 5)";
        const auto last = std::to_string(grid_size - 1);
        const std::string to = "bottom-right corner (" + last + ", " + last + ")";
        if (auto pos = t.system_text.find(from); pos != std::string::npos) t.system_text.replace(pos, from.size(), to);
    }
    return t;
}

std::string_view to_string(FormatRule rule) {
    switch (rule) {
        case FormatRule::MissingThink: return "missing_think";
        case FormatRule::MissingAnswer: return "missing_answer";
        case FormatRule::TagOrder: return "tag_order";
        case FormatRule::EmptyAnswer: return "empty_answer";
        case FormatRule::UnparseableAction: return "unparseable_action";
        case FormatRule::TrailingJunk: return "trailing_junk";
        case FormatRule::DuplicateTag: return "duplicate_tag";
        case FormatRule::MissingObservation: return "missing_observation";
        case FormatRule::MissingPrediction: return "missing_prediction";
        case FormatRule::EmptyObservation: return "empty_observation";
        case FormatRule::EmptyPrediction: return "empty_prediction";
    }
    return "unknown";
}

void FormatVerdict::add(FormatRule rule) {
    if (!has(rule)) violations.push_back(rule);
    valid = false;
}

bool FormatVerdict::has(FormatRule rule) const {
    return std::find(violations.begin(), violations.end(), rule) != violations.end();
}

ParseFailure::ParseFailure(FormatVerdict verdict)
    : std::runtime_error("agent output failed to parse: " +
                         std::string(verdict.violations.empty() ? "unknown" : to_string(verdict.violations.front()))),
      verdict_(std::move(verdict)) {}

std::optional<Action> parse_action(std::string_view token, EnvKind kind) {
    token = detail::trim(token);
    if (kind == EnvKind::Sudoku) {
        const auto parts = detail::split(token, ",");
        if (parts.size() != 3) return std::nullopt;
        const auto r = detail::parse_int(parts[0]);
        const auto c = detail::parse_int(parts[1]);
        const auto v = detail::parse_int(parts[2]);
        if (!r || !c || !v) return std::nullopt;
        if (*r < 1 || *r > 4 || *c < 1 || *c > 4 || *v < 1 || *v > 4) return std::nullopt;
        return SudokuMove{*r, *c, *v};
    }
    for (Direction d : kDirections)
        if (iequals(token, to_string(d))) return d;
    return std::nullopt;
}

ParsedTurn parse_agent_output(std::string_view text, EnvKind kind) {
    constexpr std::string_view kThinkOpen = "<think>";
    constexpr std::string_view kThinkClose = "</think>";
    constexpr std::string_view kAnswerOpen = "<answer>";
    constexpr std::string_view kAnswerClose = "</answer>";

    const auto t0 = text.find(kThinkOpen);
    if (t0 == std::string_view::npos) fail(FormatRule::MissingThink);
    const auto t1 = text.find(kThinkClose, t0 + kThinkOpen.size());
    if (t1 == std::string_view::npos) fail(FormatRule::MissingThink);
    const auto a0 = text.find(kAnswerOpen, t1 + kThinkClose.size());
    if (a0 == std::string_view::npos) {
        fail(text.find(kAnswerOpen) != std::string_view::npos ? FormatRule::TagOrder : FormatRule::MissingAnswer);
    }
    const auto a1 = text.find(kAnswerClose, a0 + kAnswerOpen.size());
    if (a1 == std::string_view::npos) fail(FormatRule::MissingAnswer);

    ParsedTurn turn;
    turn.raw = std::string(text);
    turn.think = {t0, t1 + kThinkClose.size()};
    turn.answer = {a0, a1 + kAnswerClose.size()};

    const std::size_t inner_begin = t0 + kThinkOpen.size();
    auto obs = find_block(text, "observation", inner_begin, t1);
    auto pred = find_block(text, "prediction", inner_begin, t1);
    if (obs && pred) {
        const bool overlap = pred->outer.begin < obs->outer.end && obs->outer.begin < pred->outer.end;
        if (overlap) {
            add_flag(turn.flags, FormatRule::TagOrder);
            pred.reset();
        } else if (pred->outer.begin < obs->outer.begin) {
            add_flag(turn.flags, FormatRule::TagOrder);
        }
    }
    if (obs) {
        turn.observation = obs->content;
        turn.observation_text = std::string(detail::trim(text.substr(obs->content.begin, obs->content.size())));
    }
    if (pred) {
        turn.prediction = pred->content;
        turn.prediction_text = std::string(detail::trim(text.substr(pred->content.begin, pred->content.size())));
    }

    std::vector<Span> cut;
    if (obs) cut.push_back(obs->outer);
    if (pred) cut.push_back(pred->outer);
    std::sort(cut.begin(), cut.end(), [](const Span& a, const Span& b) { return a.begin < b.begin; });
    std::vector<std::string> pieces;
    std::size_t cursor = inner_begin;
    for (const Span& s : cut) {
        if (auto piece = detail::trim(text.substr(cursor, s.begin - cursor)); !piece.empty()) pieces.emplace_back(piece);
        cursor = s.end;
    }
    if (auto piece = detail::trim(text.substr(cursor, t1 - cursor)); !piece.empty()) pieces.emplace_back(piece);
    turn.free_reasoning = detail::join(pieces, "\n");

    for (std::string_view tag : {"<think>", "<answer>", "<observation>", "<prediction>"}) {
        if (count_occurrences(text, tag) > 1) add_flag(turn.flags, FormatRule::DuplicateTag);
    }
    if (!detail::is_blank(text.substr(0, t0)) ||
        !detail::is_blank(text.substr(turn.think.end, a0 - turn.think.end)) ||
        !detail::is_blank(text.substr(turn.answer.end))) {
        add_flag(turn.flags, FormatRule::TrailingJunk);
    }

    const auto content = detail::trim(text.substr(a0 + kAnswerOpen.size(), a1 - a0 - kAnswerOpen.size()));
    if (content.empty()) fail(FormatRule::EmptyAnswer);
    turn.answer_text = std::string(content);
    for (auto token : detail::split(content, "||")) {
        auto action = parse_action(token, kind);
        if (!action) fail(FormatRule::UnparseableAction);
        turn.actions.push_back(*action);
    }
    return turn;
}

FormatVerdict validate_format(const ParsedTurn& turn, PromptMode mode, const ParseOptions& options) {
    FormatVerdict verdict;
    for (FormatRule f : turn.flags) {
        if (f == FormatRule::TrailingJunk && !options.strict) continue;
        verdict.add(f);
    }
    if (mode == PromptMode::ObservationThenPrediction) {
        if (!turn.observation_text) verdict.add(FormatRule::MissingObservation);
        else if (turn.observation_text->empty()) verdict.add(FormatRule::EmptyObservation);
        if (!turn.prediction_text) verdict.add(FormatRule::MissingPrediction);
        else if (turn.prediction_text->empty()) verdict.add(FormatRule::EmptyPrediction);
    }
    if (turn.actions.empty()) verdict.add(FormatRule::EmptyAnswer);
    return verdict;
}

FormatVerdict check_format(std::string_view text, EnvKind kind, PromptMode mode, const ParseOptions& options) {
    try {
        return validate_format(parse_agent_output(text, kind), mode, options);
    } catch (const ParseFailure& e) {
        return e.verdict();
    }
}

std::string render_answer(std::span<const Action> actions) {
    std::vector<std::string> parts;
    for (const auto& a : actions) parts.push_back(format_action(a));
    return detail::join(parts, " || ");
}

std::string render_turn(const ParsedTurn& turn) {
    std::string out = "<think>";
    if (turn.observation_text || turn.prediction_text) {
        out += "\n";
        if (turn.observation_text) out += "<observation>\n" + *turn.observation_text + "\n</observation>\n";
        if (!turn.free_reasoning.empty()) out += turn.free_reasoning + "\n";
        if (turn.prediction_text) out += "<prediction>\n" + *turn.prediction_text + "\n</prediction>\n";
    } else {
        out += turn.free_reasoning;
    }
    out += "</think>";
    if (turn.observation_text || turn.prediction_text) out += "\n";
    out += "<answer>" + render_answer(turn.actions) + "</answer>";
    return out;
}

std::string build_prompt(const PromptTemplate& tmpl, std::span<const HistoryTurn> history, const StateText& current) {
    auto header = [&](std::size_t n) {
        std::string h = tmpl.turn_header;
        if (auto pos = h.find("{n}"); pos != std::string::npos) h.replace(pos, 3, std::to_string(n));
        return h;
    };
    std::string out = tmpl.system_text;
    out += "\n\n";
    std::size_t n = 1;
    for (const auto& turn : history) {
        out += header(n++);
        out += turn.state.composed;
        out += "\nOutput:\n";
        out += turn.output.raw;
        out += "\nReward: " + detail::format_double(turn.reward) + "\n\n";
    }
    out += header(n);
    out += current.composed;
    return out;
}

}  // namespace gridwm
