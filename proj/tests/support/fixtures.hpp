/// @file fixtures.hpp
/// @brief Test helpers: provider construction, temp dirs, synthetic corpora and
/// mock run configurations.
#pragma once

#include <atomic>
#include <chrono>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "hallubench/hallubench.hpp"

namespace hbt {

using namespace hallubench;

/// Test binaries only log errors.
inline const bool kQuietLogs = [] {
    spdlog::set_level(spdlog::level::err);
    return true;
}();

inline ProviderPtr make_provider(const std::string& name, ProviderKind kind, std::shared_ptr<Transport> t,
                                 int max_retries = 3) {
    ProviderConfig cfg;
    cfg.name = name;
    cfg.kind = kind;
    cfg.endpoint = "mock://scripted";
    cfg.model_id = name + "-model";
    cfg.max_retries = max_retries;
    cfg.backoff_s = 0.0;
    return std::make_shared<Provider>(cfg, std::move(t));
}

inline ProviderPtr chat_provider(const std::string& name, ProviderKind kind, mock::ChatFn fn) {
    auto t = std::make_shared<mock::MockTransport>();
    t->on_chat(std::move(fn));
    return make_provider(name, kind, t);
}

inline ProviderPtr nli_provider(const std::string& name, mock::NliFn fn) {
    auto t = std::make_shared<mock::MockTransport>();
    t->on_nli(std::move(fn));
    return make_provider(name, ProviderKind::nli, t);
}

inline ProviderPtr embed_provider(const std::string& name, mock::EmbedFn fn) {
    auto t = std::make_shared<mock::MockTransport>();
    t->on_embed(std::move(fn));
    return make_provider(name, ProviderKind::embed, t);
}

class TempDir {
public:
    TempDir() {
        static std::atomic<int> counter{0};
        const auto stamp = std::chrono::steady_clock::now().time_since_epoch().count();
        path_ = fs::temp_directory_path() /
                ("hallubench-test-" + std::to_string(stamp) + "-" + std::to_string(counter.fetch_add(1)));
        fs::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const fs::path& path() const { return path_; }
    fs::path operator/(const std::string& leaf) const { return path_ / leaf; }

private:
    fs::path path_;
};

inline constexpr const char* kTopics[] = {"Atrial Fibrillation", "Sepsis", "Asthma", "Diabetes Mellitus",
                                          "Hip Fractures", "Renal Insufficiency"};

/// `n` medical-flavored items with 12 to 20 word answers and two knowledge
/// passages each.
inline std::vector<QAItem> synthetic_corpus(std::size_t n, std::uint64_t seed = 11) {
    static constexpr const char* kWords[] = {
        "patients", "treated", "with",       "therapy",  "showed",   "lower",   "rates", "of",
        "adverse",  "events",  "compared",   "controls", "after",    "surgery", "and",   "the",
        "effect",   "was",     "consistent", "across",   "subgroups", "in",     "older", "adults"};
    std::vector<QAItem> items;
    SplitMix rng(seed);
    for (std::size_t i = 0; i < n; ++i) {
        QAItem q;
        q.id = "syn-" + std::to_string(1000 + i);
        const std::string topic = kTopics[i % std::size(kTopics)];
        q.question = "Is intervention " + std::to_string(i) + " effective in " + topic + "?";
        const auto len = 12 + rng.below(9);
        std::vector<std::string> words{rng.uniform() < 0.5 ? "Yes." : "No."};
        for (std::uint64_t w = 1; w < len; ++w) words.emplace_back(kWords[rng.below(std::size(kWords))]);
        q.ground_truth = text::join(words, " ");
        q.knowledge = {"Background on " + topic + " and intervention " + std::to_string(i) + ".",
                       "A cohort study reported outcomes for " + std::to_string(50 + i) + " patients."};
        q.tags = {topic, "Humans"};
        items.push_back(std::move(q));
    }
    return items;
}

inline std::string corpus_jsonl(const std::vector<QAItem>& items) { return to_jsonl(items); }

inline nlohmann::json mock_roster_json() {
    return nlohmann::json::parse(R"([
      {"name":"gen","kind":"generate","endpoint":"mock://generator"},
      {"name":"critic","kind":"generate","endpoint":"mock://critic"},
      {"name":"checker","kind":"generate","endpoint":"mock://checker"},
      {"name":"judge-a","kind":"judge","endpoint":"mock://judge"},
      {"name":"judge-b","kind":"judge","endpoint":"mock://judge"},
      {"name":"judge-c","kind":"judge","endpoint":"mock://judge"},
      {"name":"nli","kind":"nli","endpoint":"mock://nli"},
      {"name":"embed","kind":"embed","endpoint":"mock://embed?dim=32"},
      {"name":"oracle","kind":"generate","endpoint":"mock://detector?mode=oracle"},
      {"name":"always-yes","kind":"generate","endpoint":"mock://detector?mode=yes"},
      {"name":"always-unsure","kind":"generate","endpoint":"mock://detector?mode=unsure"},
      {"name":"hedger","kind":"generate","endpoint":"mock://detector?mode=oracle&unsure_rate=0.3"}
    ])");
}

inline nlohmann::json mock_run_json() {
    return nlohmann::json::parse(R"({
      "providers": "roster.json",
      "input": "corpus.jsonl",
      "output_dir": "out",
      "seed": 42,
      "workers": 4,
      "pipeline": {
        "attempt_budget": 5,
        "discriminators": ["judge-a", "judge-b", "judge-c"],
        "generator": "gen", "nli": "nli", "embedder": "embed", "critic": "critic", "checker": "checker",
        "tau": 0.75, "length_window": 0.10, "temperature_band": [0.3, 0.7]
      },
      "evaluation": {"detector": "oracle", "protocol": "binary", "knowledge_shown": false},
      "analysis": {"pool_size": 12, "tau_cluster": 0.75}
    })");
}

/// Writes roster.json, corpus.jsonl and run.json into `dir`; returns the run
/// config path.
inline fs::path write_mock_run(const fs::path& dir, const std::vector<QAItem>& items,
                               nlohmann::json run = mock_run_json()) {
    write_file_atomic(dir / "roster.json", mock_roster_json().dump(2));
    write_file_atomic(dir / "corpus.jsonl", corpus_jsonl(items));
    write_file_atomic(dir / "run.json", run.dump(2));
    return dir / "run.json";
}

} // namespace hbt
