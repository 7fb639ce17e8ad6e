/// @file pipeline.hpp
/// @brief Per-item hallucination generation: candidate generation, quality
/// and correctness gating, critique-driven refinement, regeneration and the
/// cosine-similarity fallback.
///
/// Each attempt has two generation slots. The base slot is a fresh sample;
/// if it fails a gate, the second slot regenerates, with the critic's feedback
/// in the prompt when the failure was one of detectability (quality or
/// correctness) and without it when only the length window failed. When every
/// attempt fails, the stored candidate closest to the ground truth in
/// embedding space is emitted as an easy example.
#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <spdlog/spdlog.h>

#include "hallubench/errors.hpp"
#include "hallubench/hashing.hpp"
#include "hallubench/model.hpp"
#include "hallubench/prompts.hpp"
#include "hallubench/provider.hpp"
#include "hallubench/quality.hpp"
#include "hallubench/text.hpp"
#include "hallubench/vecmath.hpp"

namespace hallubench {

struct PipelineConfig {
    int attempt_budget = 5;
    std::vector<ProviderPtr> discriminators;
    ProviderPtr generator;
    ProviderPtr nli;
    ProviderPtr embedder;
    ProviderPtr critic;
    /// Used only when extra_llm_correctness is set.
    ProviderPtr checker;
    bool extra_llm_correctness = false;
    double tau = 0.75;
    double length_window = 0.10;
    double temperature_lo = 0.3;
    double temperature_hi = 0.7;
    double top_p = 0.95;
    int max_tokens = 512;
    RetainRule retain_rule = RetainRule::any_fooled;

    void validate() const {
        if (attempt_budget < 1) throw ContractError("attempt_budget must be >= 1");
        if (discriminators.size() < 2) throw ContractError("need at least two discriminators");
        for (const auto& d : discriminators) {
            if (!d) throw ContractError("null discriminator");
            require_kind(*d, ProviderKind::judge, "pipeline discriminator");
        }
        if (!generator || !nli || !embedder || !critic)
            throw ContractError("pipeline needs generator, nli, embedder and critic providers");
        require_kind(*generator, ProviderKind::generate, "pipeline generator");
        require_kind(*critic, ProviderKind::generate, "pipeline critic");
        require_kind(*nli, ProviderKind::nli, "pipeline nli");
        require_kind(*embedder, ProviderKind::embed, "pipeline embedder");
        if (extra_llm_correctness) {
            if (!checker) throw ContractError("extra_llm_correctness needs a checker provider");
            require_kind(*checker, ProviderKind::generate, "pipeline checker");
        }
        if (!(tau > 0.0 && tau < 1.0)) throw ContractError("tau must lie in (0,1)");
        if (!(length_window > 0.0 && length_window < 1.0))
            throw ContractError("length_window must lie in (0,1)");
        if (!(temperature_lo >= 0.0 && temperature_lo <= temperature_hi && temperature_hi <= 1.0))
            throw ContractError("temperature band must satisfy 0 <= lo <= hi <= 1");
    }
};

/// Uniform draw from the configured temperature band.
inline double draw_temperature(const PipelineConfig& cfg, std::uint64_t seed) {
    return cfg.temperature_lo +
           (cfg.temperature_hi - cfg.temperature_lo) * unit_interval(derive_seed(seed, "temperature"));
}

/// One generator call. Throws GenerationParseError when the reply lacks a
/// category token or answer text.
inline CandidateAnswer generate_candidate(const QAItem& item, int attempt_index,
                                          const std::vector<std::string>& prior_feedback,
                                          const PipelineConfig& cfg, std::uint64_t rng_seed) {
    if (attempt_index < 1 || attempt_index > cfg.attempt_budget)
        throw ContractError("attempt_index " + std::to_string(attempt_index) + " outside budget");
    const auto prompt = prompts::build_generation_prompt(item, prior_feedback);

    SamplingParams params;
    params.temperature = draw_temperature(cfg, rng_seed);
    params.top_p = cfg.top_p;
    params.max_tokens = cfg.max_tokens;
    params.seed = static_cast<std::int64_t>(derive_seed(rng_seed, "provider") >> 1);

    const std::string reply = complete(*cfg.generator, prompt.system, prompt.user, params);
    auto parsed = prompts::parse_generation_reply(reply);
    if (!parsed)
        throw GenerationParseError("generator " + cfg.generator->name() + " reply for item " + item.id +
                                   " lacks a category or answer");

    CandidateAnswer c;
    c.text = std::move(parsed->answer);
    c.category = parsed->category;
    c.attempt_index = attempt_index;
    c.refined = !prior_feedback.empty();
    c.sampling = params;
    c.length_ratio = static_cast<double>(text::word_count(c.text)) /
                     static_cast<double>(text::word_count(item.ground_truth));
    return c;
}

/// |length_ratio - 1| <= window, closed at both ends.
inline bool length_window_check(const CandidateAnswer& candidate, const PipelineConfig& cfg) {
    constexpr double kSlack = 1e-9; // absorbs rounding in ratios such as 11/10
    return std::fabs(candidate.length_ratio - 1.0) <= cfg.length_window + kSlack;
}

/// Feedback on why `candidate` was easy to detect, from the critic provider.
inline std::string critique(const CandidateAnswer& candidate, const QAItem& item,
                            const QualityVerdict* verdict, const EntailmentResult* entailment,
                            Provider& critic) {
    const auto prompt = prompts::build_critique_prompt(item, candidate, verdict, entailment);
    SamplingParams params;
    params.temperature = 0.2;
    params.top_p = 0.95;
    params.max_tokens = 512;
    return std::string(text::trim(complete(critic, prompt.system, prompt.user, params)));
}

/// argmax over candidates of cos(embed(candidate), embed(ground truth));
/// ties go to the lowest attempt_index, then to list order.
inline std::size_t fallback_select_index(const std::vector<CandidateAnswer>& candidates,
                                         const QAItem& item, Provider& embedder) {
    if (candidates.empty()) throw ContractError("fallback_select: no candidates");
    const auto gt = embed(embedder, item.ground_truth);
    std::size_t best = 0;
    double best_cos = -2.0;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        const double c = cosine_similarity(embed(embedder, candidates[i].text), gt);
        if (c > best_cos ||
            (c == best_cos && candidates[i].attempt_index < candidates[best].attempt_index)) {
            best = i;
            best_cos = c;
        }
    }
    return best;
}

inline CandidateAnswer fallback_select(const std::vector<CandidateAnswer>& candidates, const QAItem& item,
                                       Provider& embedder) {
    return candidates[fallback_select_index(candidates, item, embedder)];
}

/// Gate results for one candidate. Later gates are skipped once one fails.
struct CandidateEvaluation {
    bool length_ok = false;
    std::optional<QualityVerdict> verdict;
    bool kept = false;
    std::optional<EntailmentResult> entailment;
    std::optional<bool> distinct;
    bool accepted = false;

    bool detectability_failure() const { return length_ok && !accepted; }
};

inline CandidateEvaluation evaluate_candidate(const CandidateAnswer& c, const QAItem& item,
                                              const PipelineConfig& cfg, std::uint64_t vote_seed) {
    CandidateEvaluation e;
    e.length_ok = length_window_check(c, cfg);
    if (!e.length_ok) return e;
    e.verdict = ensemble_vote(item.question, c.text, item.ground_truth, cfg.discriminators, vote_seed);
    e.kept = retained(*e.verdict, cfg.retain_rule);
    if (!e.kept) return e;
    e.entailment = bidirectional_entailment(c.text, item.ground_truth, *cfg.nli, cfg.tau);
    if (!e.entailment->passes) return e;
    if (cfg.extra_llm_correctness) {
        e.distinct = llm_distinctness_check(c.text, item.ground_truth, *cfg.checker);
        if (!*e.distinct) return e;
    }
    e.accepted = true;
    return e;
}

/// Per-item seed: the same (run seed, item id) always yields the same seed,
/// independent of every other item.
inline std::uint64_t item_seed(std::uint64_t run_seed, std::string_view item_id) {
    return derive_seed(splitmix64(run_seed), item_id);
}

/// Runs the full generation loop for one item. Throws only on unrecoverable
/// provider failure (or when no candidate could be parsed at all).
inline HallucinationRecord run_pipeline(const QAItem& item, const PipelineConfig& cfg, std::uint64_t seed) {
    item.validate();
    cfg.validate();
    if (item.knowledge.empty()) throw ContractError("item " + item.id + " has no knowledge context");

    struct Stored {
        CandidateAnswer candidate;
        CandidateEvaluation evaluation;
    };
    std::vector<Stored> pool;
    std::vector<std::string> feedback_log;

    auto try_generate = [&](int attempt, const std::vector<std::string>& feedback,
                            std::uint64_t s) -> std::optional<CandidateAnswer> {
        try {
            return generate_candidate(item, attempt, feedback, cfg, s);
        } catch (const GenerationParseError& e) {
            spdlog::warn("{}", e.what());
            return std::nullopt;
        }
    };

    auto emit = [&](std::size_t accepted, int attempt) {
        HallucinationRecord r;
        const auto& s = pool[accepted];
        r.item_id = item.id;
        r.hallucinated_answer = s.candidate.text;
        r.category = s.candidate.category;
        r.difficulty = s.evaluation.verdict->difficulty;
        r.fallback_used = false;
        r.attempts_made = attempt;
        r.entailment = s.evaluation.entailment;
        r.feedback_log = feedback_log;
        for (std::size_t i = 0; i < pool.size(); ++i)
            if (i != accepted) r.rejected_candidates.push_back(pool[i].candidate);
        return r;
    };

    for (int attempt = 1; attempt <= cfg.attempt_budget; ++attempt) {
        const std::uint64_t attempt_seed = derive_seed(seed, static_cast<std::uint64_t>(attempt));

        auto base = try_generate(attempt, {}, derive_seed(attempt_seed, "base"));
        if (!base) continue;
        auto base_eval = evaluate_candidate(*base, item, cfg, derive_seed(attempt_seed, "base-vote"));
        pool.push_back({*base, base_eval});
        if (base_eval.accepted) return emit(pool.size() - 1, attempt);

        std::vector<std::string> feedback;
        if (base_eval.detectability_failure()) {
            try {
                feedback.push_back(critique(*base, item, base_eval.verdict ? &*base_eval.verdict : nullptr,
                                            base_eval.entailment ? &*base_eval.entailment : nullptr,
                                            *cfg.critic));
                feedback_log.push_back(feedback.back());
            } catch (const ProviderError& e) {
                spdlog::warn("critique failed for item {} attempt {}: {}; regenerating without feedback",
                             item.id, attempt, e.what());
            }
        }

        auto second = try_generate(attempt, feedback, derive_seed(attempt_seed, "second"));
        if (!second) continue;
        auto second_eval = evaluate_candidate(*second, item, cfg, derive_seed(attempt_seed, "second-vote"));
        pool.push_back({*second, second_eval});
        if (second_eval.accepted) return emit(pool.size() - 1, attempt);
    }

    if (pool.empty())
        throw ProviderError("item " + item.id + ": no parseable candidate in " +
                            std::to_string(cfg.attempt_budget) + " attempts");

    std::vector<CandidateAnswer> candidates;
    candidates.reserve(pool.size());
    for (const auto& s : pool) candidates.push_back(s.candidate);
    const std::size_t chosen = fallback_select_index(candidates, item, *cfg.embedder);

    HallucinationRecord r;
    r.item_id = item.id;
    r.hallucinated_answer = pool[chosen].candidate.text;
    r.category = pool[chosen].candidate.category;
    r.difficulty = Difficulty::easy;
    r.fallback_used = true;
    r.attempts_made = cfg.attempt_budget;
    r.entailment = pool[chosen].evaluation.entailment;
    r.feedback_log = std::move(feedback_log);
    for (std::size_t i = 0; i < pool.size(); ++i)
        if (i != chosen) r.rejected_candidates.push_back(pool[i].candidate);
    return r;
}

} // namespace hallubench
