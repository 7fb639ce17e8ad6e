/// @file quality.hpp
/// @brief Filter stages for generated hallucinations: the discriminator
/// ensemble vote (quality and difficulty) and the correctness checks
/// (bidirectional entailment, optional LLM distinctness check).
#pragma once

#include <cstdint>
#include <future>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <spdlog/spdlog.h>

#include "hallubench/errors.hpp"
#include "hallubench/hashing.hpp"
#include "hallubench/model.hpp"
#include "hallubench/prompts.hpp"
#include "hallubench/provider.hpp"

namespace hallubench {

enum class RetainRule { any_fooled, majority_fooled };

inline std::string_view to_string(RetainRule r) {
    return r == RetainRule::any_fooled ? "any_fooled" : "majority_fooled";
}

inline RetainRule parse_retain_rule(std::string_view s) {
    if (s == "any_fooled") return RetainRule::any_fooled;
    if (s == "majority_fooled") return RetainRule::majority_fooled;
    throw ParseError("unknown retain rule: '" + std::string(s) + "'");
}

/// True when the hallucination should be placed in slot A for this judge.
inline bool candidate_goes_first(std::uint64_t vote_seed, std::string_view judge_name) {
    return (derive_seed(vote_seed, judge_name) & 1ULL) != 0;
}

/// Asks every discriminator which of (candidate, ground truth) is more
/// accurate, with the A/B placement randomized per judge from `vote_seed`.
/// fooled[j] is true when judge j picked the candidate. A judge whose reply
/// stays unparseable after one re-ask counts as not fooled.
inline QualityVerdict ensemble_vote(std::string_view question, std::string_view candidate,
                                    std::string_view ground_truth,
                                    const std::vector<ProviderPtr>& discriminators,
                                    std::uint64_t vote_seed) {
    if (discriminators.size() < 2) throw ContractError("ensemble_vote needs at least two discriminators");

    const std::string q(question), c(candidate), gt(ground_truth);
    auto ask = [&](const ProviderPtr& judge) -> bool {
        const bool first = candidate_goes_first(vote_seed, judge->name());
        try {
            const auto choice = first ? judge_pair(*judge, q, c, gt) : judge_pair(*judge, q, gt, c);
            return (choice.chosen == Choice::A) == first;
        } catch (const JudgeParseError& e) {
            spdlog::warn("{}; counted as not fooled", e.what());
            return false;
        }
    };

    std::vector<std::future<bool>> pending;
    pending.reserve(discriminators.size());
    for (const auto& judge : discriminators)
        pending.push_back(std::async(std::launch::async, ask, std::cref(judge)));

    std::vector<bool> fooled;
    fooled.reserve(discriminators.size());
    std::exception_ptr failure;
    for (auto& f : pending) {
        try {
            fooled.push_back(f.get());
        } catch (...) {
            if (!failure) failure = std::current_exception();
            fooled.push_back(false);
        }
    }
    if (failure) std::rethrow_exception(failure);
    return QualityVerdict::from_votes(std::move(fooled));
}

/// any_fooled: at least one judge fooled. majority_fooled: more than half.
inline bool retained(const QualityVerdict& verdict, RetainRule rule) {
    const auto k = static_cast<int>(verdict.fooled.size());
    switch (rule) {
    case RetainRule::any_fooled: return verdict.fooled_count >= 1;
    case RetainRule::majority_fooled: return 2 * verdict.fooled_count > k;
    }
    return false;
}

/// min(NLI(h -> gt), NLI(gt -> h)); passes when below tau.
inline EntailmentResult bidirectional_entailment(std::string_view hallucination, std::string_view ground_truth,
                                                 Provider& nli, double tau) {
    if (text::trim(hallucination).empty() || text::trim(ground_truth).empty())
        throw ContractError("bidirectional_entailment: empty text");
    const double forward = nli_entail(nli, hallucination, ground_truth);
    const double backward = nli_entail(nli, ground_truth, hallucination);
    return EntailmentResult::from_scores(forward, backward, tau);
}

inline std::optional<bool> parse_distinctness(std::string_view raw) {
    const auto s = prompts::normalize_choice(raw);
    if (s == "different") return true;
    if (s == "same") return false;
    return std::nullopt;
}

/// Asks `checker` whether the two answers differ meaningfully in content.
/// true keeps the candidate. An unreadable reply (after one re-ask) rejects.
inline bool llm_distinctness_check(std::string_view hallucination, std::string_view ground_truth,
                                   Provider& checker) {
    require_kind(checker, ProviderKind::generate, "llm_distinctness_check");
    const auto prompt = prompts::build_distinctness_prompt(hallucination, ground_truth);
    SamplingParams params;
    params.temperature = 0.0;
    params.top_p = 1.0;
    params.max_tokens = 16;
    std::string raw;
    const auto verdict = chat_with_reask(checker, make_chat_request(checker, prompt.system, prompt.user, params),
                                         prompts::kDistinctnessReask, parse_distinctness, raw);
    if (!verdict) {
        spdlog::warn("distinctness checker {} gave an unreadable reply '{}'; rejecting", checker.name(), raw);
        return false;
    }
    return *verdict;
}

} // namespace hallubench
