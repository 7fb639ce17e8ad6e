/// @file detection.hpp
/// @brief Detector evaluation harness: balanced task construction, detection
/// prompts, reply parsing, concurrent querying and stratified reports.
#pragma once

#include <cstdint>
#include <iomanip>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <spdlog/spdlog.h>

#include "hallubench/concurrency.hpp"
#include "hallubench/errors.hpp"
#include "hallubench/hashing.hpp"
#include "hallubench/metrics.hpp"
#include "hallubench/model.hpp"
#include "hallubench/prompts.hpp"
#include "hallubench/provider.hpp"

namespace hallubench {

/// One question shown to a detector.
struct EvalTask {
    std::string item_id;
    std::string question;
    std::string presented_answer;
    std::vector<std::string> knowledge;
    bool gold_label = false; ///< true = hallucinated
    bool knowledge_shown = false;
    Protocol protocol = Protocol::binary;
    Difficulty difficulty = Difficulty::easy;
    HallucinationCategory category = HallucinationCategory::misinterpretation_of_question;
    /// First tag of the source item, or "untagged".
    std::string tag;
};

inline constexpr std::string_view kUntagged = "untagged";

/// Two tasks per benchmark row: the hallucinated answer (gold true) and the
/// ground truth (gold false).
inline std::vector<EvalTask> build_tasks(const std::vector<HallucinationRecord>& benchmark,
                                         const std::map<std::string, QAItem>& items, Protocol protocol,
                                         bool knowledge_shown) {
    std::vector<EvalTask> tasks;
    tasks.reserve(2 * benchmark.size());
    for (const auto& rec : benchmark) {
        auto it = items.find(rec.item_id);
        if (it == items.end()) throw ContractError("benchmark row refers to unknown item '" + rec.item_id + "'");
        const QAItem& item = it->second;
        EvalTask base;
        base.item_id = item.id;
        base.question = item.question;
        base.knowledge = item.knowledge;
        base.knowledge_shown = knowledge_shown;
        base.protocol = protocol;
        base.difficulty = rec.difficulty;
        base.category = rec.category;
        base.tag = item.tags.empty() ? std::string(kUntagged) : item.tags.front();

        EvalTask hallucinated = base;
        hallucinated.presented_answer = rec.hallucinated_answer;
        hallucinated.gold_label = true;
        EvalTask truthful = std::move(base);
        truthful.presented_answer = item.ground_truth;
        truthful.gold_label = false;
        tasks.push_back(std::move(hallucinated));
        tasks.push_back(std::move(truthful));
    }
    return tasks;
}

inline prompts::Prompt build_detection_prompt(const EvalTask& task) {
    return prompts::build_detection_prompt(task.question, task.presented_answer,
                                           task.knowledge_shown ? &task.knowledge : nullptr, task.protocol);
}

/// Case-insensitive match of "yes", "no" or (ternary only) "not sure", with an
/// optional "Answer:" prefix. Only the first line is considered.
inline std::optional<DetectionVerdict> parse_verdict(std::string_view raw, Protocol protocol) {
    const auto lines = text::split_lines(text::trim(raw));
    const std::string s = prompts::normalize_choice(lines.empty() ? std::string_view{} : lines.front());
    DetectionVerdict v;
    v.raw = std::string(raw);
    if (s == "yes") {
        v.label = DetectionLabel::yes_hallucinated;
    } else if (s == "no") {
        v.label = DetectionLabel::not_hallucinated;
    } else if (s == "not sure" || s == "not_sure" || s == "unsure") {
        if (protocol == Protocol::binary) return std::nullopt;
        v.label = DetectionLabel::not_sure;
    } else {
        return std::nullopt;
    }
    return v;
}

inline Outcome to_outcome(const std::optional<DetectionVerdict>& v) {
    if (!v) return Outcome::invalid;
    switch (v->label) {
    case DetectionLabel::yes_hallucinated: return Outcome::yes;
    case DetectionLabel::not_hallucinated: return Outcome::no;
    case DetectionLabel::not_sure: return Outcome::abstain;
    }
    return Outcome::invalid;
}

/// A task with the detector's parsed reply. `verdict` is empty for invalid
/// replies; `failed` marks provider failures (also invalid).
struct TaskResult {
    EvalTask task;
    std::optional<DetectionVerdict> verdict;
    std::string raw;
    bool failed = false;

    ScoredTask scored() const { return {task.gold_label, to_outcome(verdict)}; }
};

enum class StratumKey { difficulty, category, tag };

inline std::string stratum_of(const EvalTask& t, StratumKey key) {
    switch (key) {
    case StratumKey::difficulty: return "difficulty:" + std::string(to_string(t.difficulty));
    case StratumKey::category: return "category:" + std::string(to_string(t.category));
    case StratumKey::tag: return "tag:" + t.tag;
    }
    return {};
}

/// One report per stratum value of `key`; every task lands in exactly one.
inline std::map<std::string, MetricsReport> breakdown_by(const std::vector<TaskResult>& results,
                                                         StratumKey key, Protocol protocol) {
    std::map<std::string, std::vector<ScoredTask>> groups;
    for (const auto& r : results) groups[stratum_of(r.task, key)].push_back(r.scored());
    std::map<std::string, MetricsReport> out;
    for (const auto& [name, scored] : groups) out[name] = tally(scored, protocol);
    return out;
}

/// Overall report with difficulty, category and tag strata.
inline MetricsReport aggregate(const std::vector<TaskResult>& results, Protocol protocol) {
    std::vector<ScoredTask> scored;
    scored.reserve(results.size());
    for (const auto& r : results) scored.push_back(r.scored());
    MetricsReport report = tally(scored, protocol);
    for (auto key : {StratumKey::difficulty, StratumKey::category, StratumKey::tag})
        for (auto& [name, sub] : breakdown_by(results, key, protocol)) report.strata[name] = std::move(sub);
    return report;
}

struct EvaluationOptions {
    Protocol protocol = Protocol::binary;
    bool knowledge_shown = false;
    std::uint64_t seed = 0;
    std::size_t workers = 4;
    double temperature = 0.25;
    int max_tokens = 32;
};

struct EvaluationResult {
    MetricsReport report;
    /// In query order (after the seeded shuffle).
    std::vector<TaskResult> results;
    std::int64_t provider_failures = 0;
};

/// Seeded Fisher-Yates; stable across standard libraries.
template <typename T>
void seeded_shuffle(std::vector<T>& v, std::uint64_t seed) {
    SplitMix rng(seed);
    for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[rng.below(i)]);
}

inline TaskResult query_detector(Provider& detector, const EvalTask& task, const EvaluationOptions& opt) {
    TaskResult out;
    out.task = task;
    const auto prompt = build_detection_prompt(task);
    SamplingParams params;
    params.temperature = opt.temperature;
    params.top_p = 0.95;
    params.max_tokens = opt.max_tokens;
    try {
        out.verdict = chat_with_reask(
            detector, make_chat_request(detector, prompt.system, prompt.user, params),
            prompts::detection_reask(task.protocol),
            [&](std::string_view raw) { return parse_verdict(raw, task.protocol); }, out.raw);
        if (!out.verdict) spdlog::info("detector {}: unparseable reply '{}'", detector.name(), out.raw);
    } catch (const ProviderError& e) {
        spdlog::warn("detector {} failed on item {}: {}", detector.name(), task.item_id, e.what());
        out.failed = true;
        out.verdict.reset();
    }
    return out;
}

/// Runs `detector` over the balanced task set built from `benchmark`.
inline EvaluationResult evaluate(const std::vector<HallucinationRecord>& benchmark,
                                 const std::map<std::string, QAItem>& items, Provider& detector,
                                 const EvaluationOptions& opt) {
    if (benchmark.empty()) throw ContractError("evaluate: empty benchmark");
    if (detector.kind() != ProviderKind::generate && detector.kind() != ProviderKind::judge)
        throw ContractError("evaluate: detector " + detector.name() + " must be a chat provider");
    auto tasks = build_tasks(benchmark, items, opt.protocol, opt.knowledge_shown);
    seeded_shuffle(tasks, derive_seed(opt.seed, "task-order"));

    EvaluationResult out;
    out.results = parallel_map<TaskResult>(tasks.size(), opt.workers,
                                           [&](std::size_t i) { return query_detector(detector, tasks[i], opt); });
    for (const auto& r : out.results) out.provider_failures += r.failed ? 1 : 0;
    out.report = aggregate(out.results, opt.protocol);
    return out;
}

// -----------------------------------------------------------------------------
// Report rendering
// -----------------------------------------------------------------------------

inline std::string format_metric(double v) {
    std::ostringstream ss;
    ss << std::fixed << std::setprecision(3) << v;
    return ss.str();
}

inline std::vector<std::pair<std::string, const MetricsReport*>> report_rows(const MetricsReport& r) {
    std::vector<std::pair<std::string, const MetricsReport*>> rows{{"overall", &r}};
    for (const auto& [name, sub] : r.strata) rows.emplace_back(name, &sub);
    return rows;
}

inline std::string render_csv(const MetricsReport& r) {
    std::string out = "stratum,total,tp,fp,tn,fn,abstained,invalid,precision,recall,f1,accuracy,response_rate\n";
    for (const auto& [name, m] : report_rows(r)) {
        std::ostringstream ss;
        ss << std::setprecision(17);
        ss << '"' << name << "\"," << m->total() << ',' << m->tp << ',' << m->fp << ',' << m->tn << ','
           << m->fn << ',' << m->abstained << ',' << m->invalid << ',' << m->precision << ',' << m->recall
           << ',' << m->f1 << ',' << m->accuracy << ',' << m->response_rate << '\n';
        out += ss.str();
    }
    return out;
}

inline std::string render_table(const MetricsReport& r) {
    std::ostringstream ss;
    ss << std::left << std::setw(52) << "stratum" << std::right << std::setw(7) << "n" << std::setw(7) << "tp"
       << std::setw(7) << "fp" << std::setw(7) << "tn" << std::setw(7) << "fn" << std::setw(7) << "abst"
       << std::setw(8) << "P" << std::setw(8) << "R" << std::setw(8) << "F1" << std::setw(8) << "Acc"
       << std::setw(8) << "Resp" << '\n';
    for (const auto& [name, m] : report_rows(r)) {
        ss << std::left << std::setw(52) << name << std::right << std::setw(7) << m->total() << std::setw(7)
           << m->tp << std::setw(7) << m->fp << std::setw(7) << m->tn << std::setw(7) << m->fn << std::setw(7)
           << m->abstained << std::setw(8) << format_metric(m->precision) << std::setw(8)
           << format_metric(m->recall) << std::setw(8) << format_metric(m->f1) << std::setw(8)
           << format_metric(m->accuracy) << std::setw(8) << format_metric(m->response_rate) << '\n';
    }
    return ss.str();
}

} // namespace hallubench
