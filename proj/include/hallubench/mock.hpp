/// @file mock.hpp
/// @brief Deterministic mock providers.
///
/// MockTransport takes arbitrary callables for scripted tests. The builtin
/// behaviors (selected by `mock://<behavior>?key=value` endpoints in a roster)
/// let the whole engine run offline and reproducibly: every reply is a pure
/// function of the request.
#pragma once

#include <array>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "hallubench/errors.hpp"
#include "hallubench/hashing.hpp"
#include "hallubench/model.hpp"
#include "hallubench/prompts.hpp"
#include "hallubench/provider.hpp"
#include "hallubench/text.hpp"

namespace hallubench::mock {

using ChatFn = std::function<std::string(const ChatRequest&)>;
using NliFn = std::function<double(std::string_view premise, std::string_view hypothesis)>;
using EmbedFn = std::function<std::vector<double>(std::string_view)>;

inline std::uint64_t prompt_hash(std::string_view system, std::string_view user) {
    return fnv1a64(user, fnv1a64("\x1f", fnv1a64(system)));
}

inline std::uint64_t prompt_hash(const ChatRequest& req) { return prompt_hash(req.system(), req.user()); }

/// Signed feature hashing over word unigrams, character trigrams and the whole
/// string. Distinct strings get distinct vectors with overwhelming probability.
inline std::vector<double> hashing_embed(std::string_view text, std::size_t dim = 64) {
    std::vector<double> v(dim, 0.0);
    auto add = [&](std::uint64_t h, double w) {
        v[h % dim] += (h >> 63) ? w : -w;
    };
    for (const auto& tok : text::normalized_tokens(text)) add(fnv1a64(tok), 1.0);
    const std::string low = text::lower(text);
    for (std::size_t i = 0; i + 3 <= low.size(); ++i)
        add(splitmix64(fnv1a64(std::string_view(low).substr(i, 3))), 0.5);
    add(splitmix64(fnv1a64(text) ^ 0x5bd1e995ULL), 0.25);
    return v;
}

/// Fraction of the hypothesis' distinct tokens that also occur in the premise.
/// Identical texts score 1.0.
inline double coverage_entailment(std::string_view premise, std::string_view hypothesis) {
    if (premise == hypothesis) return 1.0;
    const auto p = text::normalized_tokens(premise);
    const auto h = text::normalized_tokens(hypothesis);
    const std::set<std::string> ps(p.begin(), p.end());
    const std::set<std::string> hs(h.begin(), h.end());
    if (hs.empty()) return 0.0;
    std::size_t covered = 0;
    for (const auto& t : hs) covered += ps.count(t);
    return static_cast<double>(covered) / static_cast<double>(hs.size());
}

class MockTransport final : public Transport {
public:
    MockTransport() = default;

    MockTransport& on_chat(ChatFn fn) { chat_ = std::move(fn); return *this; }
    MockTransport& on_nli(NliFn fn) { nli_ = std::move(fn); return *this; }
    MockTransport& on_embed(EmbedFn fn) { embed_ = std::move(fn); return *this; }

    std::string chat(const ProviderConfig&, const ChatRequest& req) override {
        if (chat_) return chat_(req);
        return req.user();
    }

    double entail(const ProviderConfig&, std::string_view premise, std::string_view hypothesis) override {
        if (nli_) return nli_(premise, hypothesis);
        return premise == hypothesis ? 1.0 : 0.0;
    }

    std::vector<double> embed(const ProviderConfig&, std::string_view text) override {
        if (embed_) return embed_(text);
        return hashing_embed(text);
    }

private:
    ChatFn chat_;
    NliFn nli_;
    EmbedFn embed_;
};

/// Fails the first `failures` transport attempts with TransientError, then
/// forwards. Counts every attempt it sees.
class FlakyTransport final : public Transport {
public:
    FlakyTransport(std::shared_ptr<Transport> inner, int failures)
        : inner_(std::move(inner)), remaining_(failures) {}

    int attempts() const noexcept { return attempts_.load(); }

    std::string chat(const ProviderConfig& cfg, const ChatRequest& req) override {
        tick();
        return inner_->chat(cfg, req);
    }
    double entail(const ProviderConfig& cfg, std::string_view p, std::string_view h) override {
        tick();
        return inner_->entail(cfg, p, h);
    }
    std::vector<double> embed(const ProviderConfig& cfg, std::string_view t) override {
        tick();
        return inner_->embed(cfg, t);
    }

private:
    void tick() {
        attempts_.fetch_add(1);
        if (remaining_.fetch_sub(1) > 0) throw TransientError("injected transient failure");
    }

    std::shared_ptr<Transport> inner_;
    std::atomic<int> remaining_;
    std::atomic<int> attempts_{0};
};

// -----------------------------------------------------------------------------
// Scripted behaviors for tests
// -----------------------------------------------------------------------------

inline ChatFn echo() {
    return [](const ChatRequest& req) { return req.user(); };
}

inline ChatFn fixed_reply(std::string reply) {
    return [reply = std::move(reply)](const ChatRequest&) { return reply; };
}

/// Replies keyed by prompt_hash(system, user); unknown prompts are a
/// ProviderError.
inline ChatFn reply_table(std::map<std::uint64_t, std::string> table) {
    return [table = std::move(table)](const ChatRequest& req) {
        auto it = table.find(prompt_hash(req));
        if (it == table.end()) throw ProviderError("mock reply table has no entry for prompt");
        return it->second;
    };
}

/// Replies from a list in call order; the last entry repeats.
inline ChatFn reply_sequence(std::vector<std::string> replies) {
    struct State {
        std::mutex m;
        std::size_t next = 0;
    };
    auto state = std::make_shared<State>();
    return [state, replies = std::move(replies)](const ChatRequest&) {
        std::lock_guard lock(state->m);
        const auto i = std::min(state->next++, replies.size() - 1);
        return replies[i];
    };
}

struct JudgePromptParts {
    std::string question, answer_a, answer_b;
};

inline JudgePromptParts parse_judge_prompt(std::string_view user) {
    JudgePromptParts parts;
    parts.question = prompts::extract_section(user, prompts::kQuestion).value_or("");
    parts.answer_a = prompts::extract_section(user, prompts::kAnswerA).value_or("");
    parts.answer_b = prompts::extract_section(user, prompts::kAnswerB).value_or("");
    return parts;
}

/// A judge that knows the ground truth: picks the other answer when `fooled`,
/// the ground truth otherwise. Position-blind by construction.
inline ChatFn scripted_judge(std::string ground_truth, bool fooled) {
    return [gt = std::move(ground_truth), fooled](const ChatRequest& req) {
        const auto parts = parse_judge_prompt(req.user());
        const bool a_is_gt = text::trim(parts.answer_a) == text::trim(gt);
        const bool pick_a = fooled ? !a_is_gt : a_is_gt;
        return std::string(pick_a ? "A" : "B");
    };
}

/// A judge whose fooled-ness is decided per candidate text.
inline ChatFn scripted_judge_by(std::string ground_truth,
                                std::function<bool(const std::string& candidate)> fooled_by) {
    return [gt = std::move(ground_truth), fooled_by = std::move(fooled_by)](const ChatRequest& req) {
        const auto parts = parse_judge_prompt(req.user());
        const bool a_is_gt = text::trim(parts.answer_a) == text::trim(gt);
        const std::string candidate = a_is_gt ? parts.answer_b : parts.answer_a;
        const bool fooled = fooled_by(candidate);
        const bool pick_a = fooled ? !a_is_gt : a_is_gt;
        return std::string(pick_a ? "A" : "B");
    };
}

/// NLI from a table of (premise, hypothesis) -> score, with `fallback` for
/// unlisted pairs and 1.0 for identical strings.
inline NliFn nli_table(std::map<std::pair<std::string, std::string>, double> table, double fallback = 0.0) {
    return [table = std::move(table), fallback](std::string_view p, std::string_view h) {
        if (p == h) return 1.0;
        auto it = table.find({std::string(p), std::string(h)});
        return it == table.end() ? fallback : it->second;
    };
}

inline NliFn nli_constant(double v) {
    return [v](std::string_view, std::string_view) { return v; };
}

/// Embeddings from a table; unknown texts fall back to hashing_embed at the
/// table's dimension.
inline EmbedFn embed_table(std::map<std::string, std::vector<double>> table) {
    return [table = std::move(table)](std::string_view t) {
        auto it = table.find(std::string(t));
        if (it != table.end()) return it->second;
        const std::size_t dim = table.empty() ? 64 : table.begin()->second.size();
        return hashing_embed(t, dim);
    };
}

// -----------------------------------------------------------------------------
// Builtin behaviors (`mock://...` endpoints)
// -----------------------------------------------------------------------------

/// Extra knowledge the orchestrator can hand to builtin mocks.
struct MockContext {
    /// Answers known to be hallucinated; consumed by the oracle detector.
    std::set<std::string> hallucinated_answers;
};

struct MockEndpoint {
    std::string behavior;
    std::map<std::string, std::string> params;

    double number(const std::string& key, double fallback) const {
        auto it = params.find(key);
        if (it == params.end()) return fallback;
        try {
            return std::stod(it->second);
        } catch (const std::exception&) {
            throw ParseError("mock endpoint parameter " + key + " is not a number: " + it->second);
        }
    }
    std::string str(const std::string& key, std::string fallback) const {
        auto it = params.find(key);
        return it == params.end() ? fallback : it->second;
    }
};

inline bool is_mock_endpoint(std::string_view endpoint) { return endpoint.rfind("mock://", 0) == 0; }

inline MockEndpoint parse_mock_endpoint(std::string_view endpoint) {
    if (!is_mock_endpoint(endpoint)) throw ContractError("not a mock endpoint: " + std::string(endpoint));
    std::string_view rest = endpoint.substr(7);
    MockEndpoint ep;
    const auto q = rest.find('?');
    ep.behavior = std::string(rest.substr(0, q));
    if (q != std::string_view::npos) {
        std::string_view query = rest.substr(q + 1);
        while (!query.empty()) {
            const auto amp = query.find('&');
            const auto pair = query.substr(0, amp);
            const auto eq = pair.find('=');
            if (eq == std::string_view::npos)
                ep.params[std::string(pair)] = "";
            else
                ep.params[std::string(pair.substr(0, eq))] = std::string(pair.substr(eq + 1));
            if (amp == std::string_view::npos) break;
            query.remove_prefix(amp + 1);
        }
    }
    return ep;
}

inline constexpr std::array<std::string_view, 24> kMockLexicon{
    "cytokine",   "receptor",   "placebo",     "cohort",     "mitochondrial", "insulin",
    "randomized", "peripheral", "hepatic",     "renal",      "antibody",      "pathway",
    "significant", "reduced",   "increased",   "chronic",    "acute",         "biomarker",
    "systemic",   "inhibition", "mortality",   "prospective", "dose-dependent", "neuronal"};

/// Perturbs the ground truth: each word is replaced with probability
/// 0.1 + 0.5 * temperature; occasionally the answer is padded past the length
/// window or shortened by one word.
inline std::string perturb_answer(std::string_view ground_truth, std::uint64_t seed, double temperature) {
    SplitMix rng(seed);
    auto words = text::split_words(ground_truth);
    std::vector<std::string> out(words.begin(), words.end());
    const double frac = 0.1 + 0.5 * temperature;
    for (auto& w : out)
        if (rng.uniform() < frac) w = std::string(kMockLexicon[rng.below(kMockLexicon.size())]);
    const double shape = rng.uniform();
    if (shape < 0.15) {
        const auto extra = (out.size() + 3) / 4;
        for (std::size_t i = 0; i < extra; ++i)
            out.emplace_back(kMockLexicon[rng.below(kMockLexicon.size())]);
    } else if (shape < 0.25 && out.size() > 10) {
        out.erase(out.begin() + static_cast<std::ptrdiff_t>(rng.below(out.size())));
    }
    if (out.empty()) out.emplace_back(kMockLexicon[rng.below(kMockLexicon.size())]);
    return text::join(out, " ");
}

inline HallucinationCategory mock_category(double u) {
    if (u < 0.60) return HallucinationCategory::misinterpretation_of_question;
    if (u < 0.80) return HallucinationCategory::incomplete_information;
    if (u < 0.95) return HallucinationCategory::mechanism_pathway_misattribution;
    return HallucinationCategory::methodological_evidence_fabrication;
}

inline std::uint64_t request_seed(const ChatRequest& req) {
    std::uint64_t s = prompt_hash(req);
    if (req.params.seed) s = derive_seed(s, static_cast<std::uint64_t>(*req.params.seed));
    return derive_seed(s, static_cast<std::uint64_t>(std::llround(req.params.temperature * 1e6)));
}

/// generator: reads the ground truth section and emits a perturbed answer in
/// the structured reply format. `parse_error_rate` injects malformed replies.
inline ChatFn builtin_generator(const MockEndpoint& ep) {
    const double parse_error_rate = ep.number("parse_error_rate", 0.0);
    return [parse_error_rate](const ChatRequest& req) {
        const std::uint64_t seed = request_seed(req);
        SplitMix rng(derive_seed(seed, "shape"));
        if (rng.uniform() < parse_error_rate) return std::string("I cannot help with that.");
        const auto gt = prompts::extract_section(req.user(), prompts::kGroundTruth);
        if (!gt || gt->empty()) return std::string("category: misinterpretation_of_question\nanswer: unknown");
        const auto category = mock_category(rng.uniform());
        return "category: " + std::string(to_string(category)) + "\nanswer: " +
               perturb_answer(*gt, derive_seed(seed, "words"), req.params.temperature);
    };
}

/// judge: prefers whichever answer hashes higher under its own name, so it is
/// deterministic and blind to A/B placement.
inline ChatFn builtin_judge(const std::string& name) {
    return [name](const ChatRequest& req) {
        const auto parts = parse_judge_prompt(req.user());
        const auto score = [&](const std::string& a) {
            return fnv1a64(text::trim(a), fnv1a64(name + "|" + parts.question));
        };
        return std::string(score(parts.answer_a) >= score(parts.answer_b) ? "A" : "B");
    };
}

inline ChatFn builtin_critic() {
    return [](const ChatRequest& req) {
        const auto candidate = prompts::extract_section(req.user(), prompts::kCandidate).value_or("");
        const auto h = fnv1a64(candidate);
        static constexpr std::array<std::string_view, 4> notes{
            "The phrasing is more hedged than an expert answer; state the claim directly.",
            "The sentence structure mirrors the ground truth too closely in some places and "
            "breaks it abruptly in others; keep the rhythm consistent.",
            "Domain terms are inserted without context; tie each term to the question.",
            "The answer contradicts itself midway; commit to one incorrect mechanism."};
        return std::string(notes[h % notes.size()]) + " (ref " + std::to_string(h % 10007) + ")";
    };
}

/// checker: "same" iff the two answers normalize to the same tokens.
inline ChatFn builtin_checker() {
    return [](const ChatRequest& req) {
        const auto a = prompts::extract_section(req.user(), prompts::kAnswerA).value_or("");
        const auto b = prompts::extract_section(req.user(), prompts::kAnswerB).value_or("");
        return std::string(text::normalized_tokens(a) == text::normalized_tokens(b) ? "same" : "different");
    };
}

/// detector modes: oracle (needs MockContext), yes, no, unsure, random.
inline ChatFn builtin_detector(const MockEndpoint& ep, std::shared_ptr<const MockContext> ctx) {
    const std::string mode = ep.str("mode", "oracle");
    const double unsure_rate = ep.number("unsure_rate", 0.0);
    if (mode == "oracle" && !ctx)
        throw ContractError("mock oracle detector needs the benchmark's hallucinated answers");
    if (mode != "oracle" && mode != "yes" && mode != "no" && mode != "unsure" && mode != "random")
        throw ParseError("unknown mock detector mode: " + mode);
    return [mode, unsure_rate, ctx](const ChatRequest& req) {
        const auto answer = prompts::extract_section(req.user(), prompts::kAnswer).value_or("");
        const bool ternary = req.system().find("Not Sure") != std::string::npos;
        const auto h = unit_interval(splitmix64(fnv1a64(req.user())));
        if (ternary && h < unsure_rate) return std::string("Answer: Not Sure");
        if (mode == "yes") return std::string("Answer: Yes");
        if (mode == "no") return std::string("Answer: No");
        if (mode == "unsure") return std::string("Answer: Not Sure");
        if (mode == "random") return std::string(h < 0.5 ? "Answer: Yes" : "Answer: No");
        return std::string(ctx->hallucinated_answers.count(answer) ? "Answer: Yes" : "Answer: No");
    };
}

/// Builds the transport for a `mock://` endpoint. Behaviors: echo, generator,
/// judge, critic, checker, detector, nli, embed.
inline std::shared_ptr<Transport> make_builtin(const ProviderConfig& cfg,
                                               std::shared_ptr<const MockContext> ctx = nullptr) {
    const auto ep = parse_mock_endpoint(cfg.endpoint);
    auto t = std::make_shared<MockTransport>();
    if (ep.behavior == "echo") {
        t->on_chat(echo());
    } else if (ep.behavior == "generator") {
        t->on_chat(builtin_generator(ep));
    } else if (ep.behavior == "judge") {
        t->on_chat(builtin_judge(cfg.name));
    } else if (ep.behavior == "critic") {
        t->on_chat(builtin_critic());
    } else if (ep.behavior == "checker") {
        t->on_chat(builtin_checker());
    } else if (ep.behavior == "detector") {
        t->on_chat(builtin_detector(ep, std::move(ctx)));
    } else if (ep.behavior == "nli") {
        t->on_nli(coverage_entailment);
    } else if (ep.behavior == "embed") {
        const auto dim = static_cast<std::size_t>(ep.number("dim", 64));
        if (dim == 0) throw ParseError("mock embed dim must be positive");
        t->on_embed([dim](std::string_view s) { return hashing_embed(s, dim); });
    } else {
        throw ParseError("unknown mock behavior: " + ep.behavior);
    }
    return t;
}

} // namespace hallubench::mock
