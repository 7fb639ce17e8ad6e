/// @file http_transport.hpp
/// @brief HTTP backend for providers.
///
/// generate/judge: POST chat-completion JSON to the endpoint, reply read from
/// choices[0].message.content. nli: POST {premise, hypothesis} -> {entailment}.
/// embed: POST {text} -> {vector}. The bearer token comes from the environment
/// variable named in ProviderConfig::auth_env_var.
#pragma once

#include <cstdlib>
#include <regex>
#include <string>
#include <string_view>
#include <vector>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "hallubench/errors.hpp"
#include "hallubench/provider.hpp"

namespace hallubench {

struct ParsedUrl {
    std::string origin; // scheme://host[:port]
    std::string path;
};

inline ParsedUrl parse_url(const std::string& url) {
    static const std::regex re(R"(^(https?://[^/]+)(/.*)?$)", std::regex::icase);
    std::smatch m;
    if (!std::regex_match(url, m, re)) throw ContractError("invalid endpoint URL: " + url);
    return {m[1].str(), m[2].matched ? m[2].str() : std::string("/")};
}

class HttpTransport final : public Transport {
public:
    std::string chat(const ProviderConfig& cfg, const ChatRequest& req) override {
        const json reply = post(cfg, chat_request_body(req));
        try {
            const auto& content = reply.at("choices").at(0).at("message").at("content");
            return content.is_null() ? std::string() : content.get<std::string>();
        } catch (const json::exception& e) {
            throw ProviderError("provider " + cfg.name + ": malformed chat reply: " + e.what());
        }
    }

    double entail(const ProviderConfig& cfg, std::string_view premise,
                  std::string_view hypothesis) override {
        const json reply = post(cfg, json{{"premise", premise}, {"hypothesis", hypothesis}});
        try {
            return reply.at("entailment").get<double>();
        } catch (const json::exception& e) {
            throw ProviderError("provider " + cfg.name + ": malformed nli reply: " + e.what());
        }
    }

    std::vector<double> embed(const ProviderConfig& cfg, std::string_view text) override {
        const json reply = post(cfg, json{{"text", text}});
        try {
            return reply.at("vector").get<std::vector<double>>();
        } catch (const json::exception& e) {
            throw ProviderError("provider " + cfg.name + ": malformed embed reply: " + e.what());
        }
    }

private:
    static json post(const ProviderConfig& cfg, const json& body) {
        const auto url = parse_url(cfg.endpoint);
        httplib::Client client(url.origin);
        const auto secs = static_cast<time_t>(cfg.timeout_s);
        const auto usecs = static_cast<time_t>((cfg.timeout_s - static_cast<double>(secs)) * 1e6);
        client.set_connection_timeout(secs, usecs);
        client.set_read_timeout(secs, usecs);
        client.set_write_timeout(secs, usecs);

        httplib::Headers headers;
        if (!cfg.auth_env_var.empty()) {
            const char* token = std::getenv(cfg.auth_env_var.c_str());
            if (!token || !*token)
                throw AuthError("provider " + cfg.name + ": environment variable " +
                                cfg.auth_env_var + " is not set");
            headers.emplace("Authorization", std::string("Bearer ") + token);
        }

        auto res = client.Post(url.path, headers, body.dump(), "application/json");
        if (!res)
            throw TransientError("provider " + cfg.name + ": " + httplib::to_string(res.error()));
        const int status = res->status;
        if (status == 401 || status == 403)
            throw AuthError("provider " + cfg.name + ": HTTP " + std::to_string(status));
        if (status == 408 || status == 429 || status >= 500)
            throw TransientError("provider " + cfg.name + ": HTTP " + std::to_string(status));
        if (status < 200 || status >= 300)
            throw ProviderError("provider " + cfg.name + ": HTTP " + std::to_string(status) + ": " +
                                res->body);
        try {
            return json::parse(res->body);
        } catch (const json::parse_error& e) {
            throw ProviderError("provider " + cfg.name + ": reply is not JSON: " + e.what());
        }
    }
};

} // namespace hallubench
