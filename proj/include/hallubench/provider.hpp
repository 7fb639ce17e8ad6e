/// @file provider.hpp
/// @brief Uniform access to external model capabilities: chat generation,
/// pairwise judging, NLI entailment and embeddings.
///
/// A Provider couples a ProviderConfig with a Transport (HTTP or mock) and
/// owns the retry policy, the rate limiter and call accounting. The free
/// functions complete/judge_pair/nli_entail/embed are the gateway surface.
#pragma once

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <thread>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "hallubench/concurrency.hpp"
#include "hallubench/errors.hpp"
#include "hallubench/jsonl.hpp"
#include "hallubench/model.hpp"
#include "hallubench/prompts.hpp"

namespace hallubench {

enum class ProviderKind { generate, judge, nli, embed };

inline std::string_view to_string(ProviderKind k) {
    switch (k) {
    case ProviderKind::generate: return "generate";
    case ProviderKind::judge: return "judge";
    case ProviderKind::nli: return "nli";
    case ProviderKind::embed: return "embed";
    }
    return "generate";
}

inline ProviderKind parse_provider_kind(std::string_view s) {
    if (s == "generate") return ProviderKind::generate;
    if (s == "judge") return ProviderKind::judge;
    if (s == "nli") return ProviderKind::nli;
    if (s == "embed") return ProviderKind::embed;
    throw ParseError("unknown provider kind: '" + std::string(s) + "'");
}

struct ProviderConfig {
    std::string name;
    ProviderKind kind = ProviderKind::generate;
    std::string endpoint;
    std::string model_id;
    /// Name of the environment variable holding the bearer token; empty means
    /// no Authorization header.
    std::string auth_env_var;
    double timeout_s = 60.0;
    int max_retries = 3;
    std::optional<double> rate_limit_rps;
    /// First backoff delay; doubles on every retry.
    double backoff_s = 0.5;

    bool operator==(const ProviderConfig&) const = default;
};

inline void to_json(json& j, ProviderKind k) { j = std::string(to_string(k)); }
inline void from_json(const json& j, ProviderKind& k) { k = parse_provider_kind(j.get<std::string>()); }

inline void to_json(json& j, const ProviderConfig& c) {
    j = json{{"name", c.name},
             {"kind", c.kind},
             {"endpoint", c.endpoint},
             {"model_id", c.model_id},
             {"auth_env_var", c.auth_env_var},
             {"timeout_s", c.timeout_s},
             {"max_retries", c.max_retries},
             {"rate_limit_rps", c.rate_limit_rps ? json(*c.rate_limit_rps) : json(nullptr)},
             {"backoff_s", c.backoff_s}};
}

inline void from_json(const json& j, ProviderConfig& c) {
    for (const char* secret : {"api_key", "token", "secret", "password", "credential"})
        if (j.contains(secret))
            throw ParseError("provider config must not carry credentials ('" + std::string(secret) +
                             "'); name the environment variable in auth_env_var instead");
    j.at("name").get_to(c.name);
    j.at("kind").get_to(c.kind);
    j.at("endpoint").get_to(c.endpoint);
    c.model_id = j.value("model_id", std::string{});
    c.auth_env_var = j.value("auth_env_var", std::string{});
    c.timeout_s = j.value("timeout_s", 60.0);
    c.max_retries = j.value("max_retries", 3);
    if (auto it = j.find("rate_limit_rps"); it != j.end() && !it->is_null())
        c.rate_limit_rps = it->get<double>();
    c.backoff_s = j.value("backoff_s", 0.5);
    if (c.name.empty()) throw ParseError("provider config: empty name");
    if (!(c.timeout_s > 0)) throw ParseError("provider " + c.name + ": timeout_s must be positive");
    if (c.max_retries < 0) throw ParseError("provider " + c.name + ": max_retries must be >= 0");
    if (c.rate_limit_rps && !(*c.rate_limit_rps > 0))
        throw ParseError("provider " + c.name + ": rate_limit_rps must be positive");
}

/// Reads a roster file: a JSON array of provider configs with unique names.
inline std::vector<ProviderConfig> load_roster(const fs::path& path) {
    json doc;
    try {
        doc = json::parse(read_file(path));
    } catch (const json::parse_error& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
    if (!doc.is_array()) throw ParseError(path.string() + ": roster must be a JSON array");
    std::vector<ProviderConfig> out;
    std::set<std::string> names;
    for (const auto& entry : doc) {
        ProviderConfig cfg;
        try {
            cfg = entry.get<ProviderConfig>();
        } catch (const json::exception& e) {
            throw ParseError(path.string() + ": " + e.what());
        }
        if (!names.insert(cfg.name).second)
            throw ParseError(path.string() + ": duplicate provider name '" + cfg.name + "'");
        out.push_back(std::move(cfg));
    }
    return out;
}

// -----------------------------------------------------------------------------
// Wire-level request and transport interface
// -----------------------------------------------------------------------------

struct ChatMessage {
    std::string role;
    std::string content;
    bool operator==(const ChatMessage&) const = default;
};

struct ChatRequest {
    std::string model;
    std::vector<ChatMessage> messages;
    SamplingParams params;

    const std::string& system() const {
        static const std::string empty;
        for (const auto& m : messages)
            if (m.role == "system") return m.content;
        return empty;
    }

    /// The first user message: the task prompt, unaffected by re-asks.
    const std::string& user() const {
        static const std::string empty;
        for (const auto& m : messages)
            if (m.role == "user") return m.content;
        return empty;
    }

    /// Number of follow-up user turns after the first (re-asks).
    int reasks() const {
        int users = 0;
        for (const auto& m : messages) users += m.role == "user" ? 1 : 0;
        return users > 0 ? users - 1 : 0;
    }
};

/// Chat-completion request body: model, messages, temperature, top_p,
/// max_tokens and (when set) seed.
inline json chat_request_body(const ChatRequest& req) {
    json messages = json::array();
    for (const auto& m : req.messages) messages.push_back({{"role", m.role}, {"content", m.content}});
    json body{{"model", req.model},
              {"messages", std::move(messages)},
              {"temperature", req.params.temperature},
              {"top_p", req.params.top_p},
              {"max_tokens", req.params.max_tokens}};
    if (req.params.seed) body["seed"] = *req.params.seed;
    return body;
}

/// One network round trip per call. Implementations throw TransientError for
/// retryable failures and other ProviderErrors for permanent ones.
class Transport {
public:
    virtual ~Transport() = default;

    virtual std::string chat(const ProviderConfig& cfg, const ChatRequest&) {
        throw ProviderError("provider " + cfg.name + " does not support chat");
    }
    virtual double entail(const ProviderConfig& cfg, std::string_view, std::string_view) {
        throw ProviderError("provider " + cfg.name + " does not support nli");
    }
    virtual std::vector<double> embed(const ProviderConfig& cfg, std::string_view) {
        throw ProviderError("provider " + cfg.name + " does not support embed");
    }
};

class Provider {
public:
    Provider(ProviderConfig cfg, std::shared_ptr<Transport> transport)
        : cfg_(std::move(cfg)), transport_(std::move(transport)), limiter_(cfg_.rate_limit_rps) {
        if (!transport_) throw ContractError("provider " + cfg_.name + ": null transport");
    }

    Provider(const Provider&) = delete;
    Provider& operator=(const Provider&) = delete;

    const ProviderConfig& config() const noexcept { return cfg_; }
    const std::string& name() const noexcept { return cfg_.name; }
    ProviderKind kind() const noexcept { return cfg_.kind; }

    /// Logical calls (one per gateway request, including re-asks).
    std::int64_t calls() const noexcept { return calls_.load(); }
    /// Transport attempts, including retries.
    std::int64_t attempts() const noexcept { return attempts_.load(); }

    std::string chat(const ChatRequest& req) {
        return with_retries([&] { return transport_->chat(cfg_, req); });
    }

    double entail(std::string_view premise, std::string_view hypothesis) {
        return with_retries([&] { return transport_->entail(cfg_, premise, hypothesis); });
    }

    std::vector<double> embed(std::string_view text) {
        auto v = with_retries([&] { return transport_->embed(cfg_, text); });
        if (v.empty()) throw DimensionError("provider " + cfg_.name + " returned an empty vector");
        std::size_t expected = 0;
        if (!embed_dim_.compare_exchange_strong(expected, v.size()) && expected != v.size())
            throw DimensionError("provider " + cfg_.name + " returned dimension " +
                                 std::to_string(v.size()) + ", expected " +
                                 std::to_string(expected));
        return v;
    }

    std::size_t embedding_dimension() const noexcept { return embed_dim_.load(); }

private:
    /// Exactly min(failures, max_retries) + 1 transport attempts per call.
    template <typename F>
    auto with_retries(F&& f) -> decltype(f()) {
        calls_.fetch_add(1);
        for (int retry = 0;; ++retry) {
            limiter_.acquire();
            attempts_.fetch_add(1);
            try {
                return f();
            } catch (const TransientError& e) {
                if (retry >= cfg_.max_retries)
                    throw TransportError("provider " + cfg_.name + " failed after " +
                                         std::to_string(retry + 1) + " attempt(s): " + e.what());
                const double delay = cfg_.backoff_s * std::ldexp(1.0, retry);
                if (delay > 0) std::this_thread::sleep_for(std::chrono::duration<double>(delay));
            }
        }
    }

    ProviderConfig cfg_;
    std::shared_ptr<Transport> transport_;
    RateLimiter limiter_;
    std::atomic<std::int64_t> calls_{0};
    std::atomic<std::int64_t> attempts_{0};
    std::atomic<std::size_t> embed_dim_{0};
};

using ProviderPtr = std::shared_ptr<Provider>;

inline void require_kind(const Provider& p, ProviderKind kind, std::string_view op) {
    if (p.kind() != kind)
        throw ContractError(std::string(op) + ": provider " + p.name() + " is of kind " +
                            std::string(to_string(p.kind())) + ", need " +
                            std::string(to_string(kind)));
}

// -----------------------------------------------------------------------------
// Gateway operations
// -----------------------------------------------------------------------------

inline ChatRequest make_chat_request(const Provider& p, std::string_view system,
                                     std::string_view user, const SamplingParams& params) {
    ChatRequest req;
    req.model = p.config().model_id;
    if (!system.empty()) req.messages.push_back({"system", std::string(system)});
    req.messages.push_back({"user", std::string(user)});
    req.params = params;
    return req;
}

/// Sends a chat request and rejects blank replies.
inline std::string chat_nonempty(Provider& p, const ChatRequest& req) {
    std::string reply = p.chat(req);
    if (text::trim(reply).empty()) throw EmptyReplyError("provider " + p.name() + " returned an empty reply");
    return reply;
}

/// Free-text generation on a generate-kind provider.
inline std::string complete(Provider& p, std::string_view system_prompt, std::string_view user_prompt,
                            const SamplingParams& params) {
    require_kind(p, ProviderKind::generate, "complete");
    if (text::trim(user_prompt).empty()) throw ContractError("complete: empty user prompt");
    params.validate();
    return chat_nonempty(p, make_chat_request(p, system_prompt, user_prompt, params));
}

/// Sends `req`; on a reply `parse` rejects, asks once more with `reask`
/// appended to the conversation. Returns the parsed value and final raw reply,
/// or nullopt with the last raw reply when both fail.
template <typename Parse>
auto chat_with_reask(Provider& p, ChatRequest req, std::string_view reask, Parse&& parse,
                     std::string& raw_out) -> decltype(parse(std::string_view{})) {
    raw_out = chat_nonempty(p, req);
    if (auto v = parse(raw_out)) return v;
    req.messages.push_back({"assistant", raw_out});
    req.messages.push_back({"user", std::string(reask)});
    raw_out = chat_nonempty(p, req);
    return parse(raw_out);
}

enum class Choice { A, B };

struct PairChoice {
    Choice chosen = Choice::A;
    std::string raw;
};

inline std::optional<Choice> parse_pair_choice(std::string_view raw) {
    const auto s = prompts::normalize_choice(raw);
    if (s == "a") return Choice::A;
    if (s == "b") return Choice::B;
    return std::nullopt;
}

inline SamplingParams judge_sampling() {
    SamplingParams p;
    p.temperature = 0.0;
    p.top_p = 1.0;
    p.max_tokens = 16;
    return p;
}

/// Asks a judge which of two answers is more factually accurate. The judge
/// never sees knowledge context. Position randomization is the caller's job.
inline PairChoice judge_pair(Provider& p, std::string_view question, std::string_view answer_a,
                             std::string_view answer_b) {
    require_kind(p, ProviderKind::judge, "judge_pair");
    const auto prompt = prompts::build_judge_prompt(question, answer_a, answer_b);
    PairChoice out;
    auto chosen = chat_with_reask(p, make_chat_request(p, prompt.system, prompt.user, judge_sampling()),
                                  prompts::kJudgeReask, parse_pair_choice, out.raw);
    if (!chosen)
        throw JudgeParseError("judge " + p.name() + " gave an unparseable verdict: '" + out.raw + "'");
    out.chosen = *chosen;
    return out;
}

/// Entailment-class probability that `premise` entails `hypothesis`.
inline double nli_entail(Provider& p, std::string_view premise, std::string_view hypothesis) {
    require_kind(p, ProviderKind::nli, "nli_entail");
    const double v = p.entail(premise, hypothesis);
    if (!(v >= 0.0 && v <= 1.0))
        throw RangeError("provider " + p.name() + " returned entailment " + std::to_string(v) +
                         " outside [0,1]");
    return v;
}

inline std::vector<double> embed(Provider& p, std::string_view text) {
    require_kind(p, ProviderKind::embed, "embed");
    if (text::trim(text).empty()) throw ContractError("embed: empty text");
    return p.embed(text);
}

// -----------------------------------------------------------------------------
// Registry
// -----------------------------------------------------------------------------

/// Named providers resolved from a roster.
class ProviderRegistry {
public:
    void add(ProviderPtr p) {
        const auto name = p->name();
        if (!providers_.emplace(name, std::move(p)).second)
            throw ContractError("duplicate provider '" + name + "'");
    }

    ProviderPtr get(const std::string& name) const {
        auto it = providers_.find(name);
        if (it == providers_.end()) throw ContractError("unknown provider '" + name + "'");
        return it->second;
    }

    ProviderPtr get(const std::string& name, ProviderKind kind) const {
        auto p = get(name);
        require_kind(*p, kind, "registry lookup");
        return p;
    }

    bool contains(const std::string& name) const { return providers_.count(name) != 0; }

    /// Logical call counts by provider name.
    std::map<std::string, std::int64_t> call_counts() const {
        std::map<std::string, std::int64_t> out;
        for (const auto& [name, p] : providers_) out[name] = p->calls();
        return out;
    }

private:
    std::map<std::string, ProviderPtr> providers_;
};

} // namespace hallubench
