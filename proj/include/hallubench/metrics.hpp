/// @file metrics.hpp
/// @brief Confusion-matrix metrics under the binary and abstention-aware
/// protocols.
#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "hallubench/model.hpp"
#include "hallubench/prompts.hpp"

namespace hallubench {

using prompts::Protocol;

struct BinaryMetrics {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    double accuracy = 0.0;
    /// Names of metrics whose denominator was zero (reported as 0).
    std::vector<std::string> degenerate;
};

inline BinaryMetrics compute_binary_metrics(std::int64_t tp, std::int64_t fp, std::int64_t tn,
                                            std::int64_t fn) {
    if (tp < 0 || fp < 0 || tn < 0 || fn < 0) throw ContractError("confusion counts must be non-negative");
    BinaryMetrics m;
    auto ratio = [&](std::int64_t num, std::int64_t den, const char* name) {
        if (den == 0) {
            m.degenerate.emplace_back(name);
            return 0.0;
        }
        return static_cast<double>(num) / static_cast<double>(den);
    };
    m.precision = ratio(tp, tp + fp, "precision");
    m.recall = ratio(tp, tp + fn, "recall");
    if (m.precision + m.recall == 0.0)
        m.degenerate.emplace_back("f1");
    else
        m.f1 = 2.0 * m.precision * m.recall / (m.precision + m.recall);
    m.accuracy = ratio(tp + tn, tp + fp + tn + fn, "accuracy");
    return m;
}

/// What a detector said about one task, after parsing.
enum class Outcome { yes, no, abstain, invalid };

struct ScoredTask {
    bool gold = false; ///< true = the presented answer is hallucinated
    Outcome outcome = Outcome::invalid;
};

/// Aggregates outcomes into a report (without strata). Invalid replies count
/// as wrong under the binary protocol and as abstentions under ternary;
/// either way they are also tallied in `invalid`.
inline MetricsReport tally(std::span<const ScoredTask> tasks, Protocol protocol) {
    MetricsReport r;
    for (const auto& t : tasks) {
        Outcome o = t.outcome;
        if (o == Outcome::invalid) ++r.invalid;
        if (protocol == Protocol::binary && o == Outcome::abstain) {
            o = Outcome::invalid;
            ++r.invalid;
        }
        switch (o) {
        case Outcome::yes: ++(t.gold ? r.tp : r.fp); break;
        case Outcome::no: ++(t.gold ? r.fn : r.tn); break;
        case Outcome::abstain: ++r.abstained; break;
        case Outcome::invalid:
            if (protocol == Protocol::binary)
                ++(t.gold ? r.fn : r.fp);
            else
                ++r.abstained;
            break;
        }
    }
    const auto m = compute_binary_metrics(r.tp, r.fp, r.tn, r.fn);
    r.precision = m.precision;
    r.recall = m.recall;
    r.f1 = m.f1;
    r.accuracy = m.accuracy;
    r.degenerate = m.degenerate;
    if (r.total() == 0) {
        r.degenerate.emplace_back("response_rate");
        r.response_rate = 0.0;
    } else {
        r.response_rate = static_cast<double>(r.answered()) / static_cast<double>(r.total());
    }
    return r;
}

/// Side-by-side numbers for the "not sure" option versus forced answers.
struct AbstentionReport {
    double f1_ns = 0.0, p_ns = 0.0, response_rate = 0.0;
    double f1_r = 0.0, p_r = 0.0;
    std::vector<std::string> degenerate;
};

/// `ternary` holds the run where abstaining was allowed; `forced` the binary
/// run over the same tasks.
inline AbstentionReport abstention_report(std::span<const ScoredTask> ternary,
                                          std::span<const ScoredTask> forced) {
    const auto ns = tally(ternary, Protocol::ternary);
    const auto r = tally(forced, Protocol::binary);
    AbstentionReport out;
    out.f1_ns = ns.f1;
    out.p_ns = ns.precision;
    out.response_rate = ns.response_rate;
    out.f1_r = r.f1;
    out.p_r = r.precision;
    for (const auto& d : ns.degenerate) out.degenerate.push_back(d + "_ns");
    for (const auto& d : r.degenerate) out.degenerate.push_back(d + "_r");
    return out;
}

inline void to_json(json& j, const AbstentionReport& a) {
    j = json{{"f1_ns", a.f1_ns}, {"p_ns", a.p_ns}, {"response_rate", a.response_rate},
             {"f1_r", a.f1_r},   {"p_r", a.p_r},   {"degenerate", a.degenerate}};
}

} // namespace hallubench
