/// @file orchestrator.hpp
/// @brief Run configuration, provider wiring and the generate / evaluate /
/// analyze / stats commands.
///
/// Commands return a process exit code: 0 success, 1 fatal config or I/O
/// error, 2 completed with per-item (or per-task) errors. Every output file is
/// written through write_file_atomic.
#pragma once

#include <cstdint>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "hallubench/concurrency.hpp"
#include "hallubench/corpus.hpp"
#include "hallubench/detection.hpp"
#include "hallubench/errors.hpp"
#include "hallubench/hashing.hpp"
#include "hallubench/http_transport.hpp"
#include "hallubench/jsonl.hpp"
#include "hallubench/metrics.hpp"
#include "hallubench/mock.hpp"
#include "hallubench/model.hpp"
#include "hallubench/pipeline.hpp"
#include "hallubench/provider.hpp"
#include "hallubench/quality.hpp"
#include "hallubench/semantic.hpp"
#include "hallubench/stats.hpp"

namespace hallubench {

// -----------------------------------------------------------------------------
// Configuration
// -----------------------------------------------------------------------------

/// Pipeline settings as they appear in a config file: providers by name.
struct PipelineSettings {
    int attempt_budget = 5;
    std::vector<std::string> discriminators;
    std::string generator, nli, embedder, critic, checker;
    bool extra_llm_correctness = false;
    double tau = 0.75;
    double length_window = 0.10;
    double temperature_lo = 0.3, temperature_hi = 0.7;
    double top_p = 0.95;
    int max_tokens = 512;
    RetainRule retain_rule = RetainRule::any_fooled;
};

inline void from_json(const json& j, PipelineSettings& s) {
    s.attempt_budget = j.value("attempt_budget", 5);
    s.discriminators = j.value("discriminators", std::vector<std::string>{});
    s.generator = j.value("generator", std::string{});
    s.nli = j.value("nli", std::string{});
    s.embedder = j.value("embedder", std::string{});
    s.critic = j.value("critic", std::string{});
    if (auto it = j.find("checker"); it != j.end() && it->is_string()) s.checker = it->get<std::string>();
    s.extra_llm_correctness = j.value("extra_llm_correctness", false);
    s.tau = j.value("tau", 0.75);
    s.length_window = j.value("length_window", 0.10);
    if (auto it = j.find("temperature_band"); it != j.end()) {
        const auto band = it->get<std::vector<double>>();
        if (band.size() != 2) throw ParseError("temperature_band must be [lo, hi]");
        s.temperature_lo = band[0];
        s.temperature_hi = band[1];
    }
    s.top_p = j.value("top_p", 0.95);
    s.max_tokens = j.value("max_tokens", 512);
    s.retain_rule = parse_retain_rule(j.value("retain_rule", std::string("any_fooled")));
}

struct EvaluationSettings {
    Protocol protocol = Protocol::binary;
    bool knowledge_shown = false;
    std::string detector;
    double temperature = 0.25;
};

inline void from_json(const json& j, EvaluationSettings& s) {
    s.protocol = prompts::parse_protocol(j.value("protocol", std::string("binary")));
    s.knowledge_shown = j.value("knowledge_shown", false);
    s.detector = j.value("detector", std::string{});
    s.temperature = j.value("temperature", 0.25);
}

struct AnalysisSettings {
    std::size_t pool_size = 50;
    double tau_cluster = 0.75;
};

inline void from_json(const json& j, AnalysisSettings& s) {
    s.pool_size = j.value("pool_size", std::size_t{50});
    s.tau_cluster = j.value("tau_cluster", 0.75);
}

struct RunConfig {
    PipelineSettings pipeline;
    fs::path providers;
    fs::path input;
    fs::path output_dir = "out";
    std::uint64_t seed = 0;
    std::size_t workers = 4;
    EvaluationSettings evaluation;
    AnalysisSettings analysis;
};

/// Paths inside the file are resolved relative to the file's directory.
inline RunConfig load_run_config(const fs::path& path) {
    json j;
    try {
        j = json::parse(read_file(path));
    } catch (const json::parse_error& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
    const fs::path base = path.has_parent_path() ? path.parent_path() : fs::path(".");
    auto resolve = [&](const std::string& p) { return p.empty() ? fs::path() : base / p; };
    RunConfig cfg;
    try {
        if (auto it = j.find("pipeline"); it != j.end()) cfg.pipeline = it->get<PipelineSettings>();
        cfg.providers = resolve(j.value("providers", std::string{}));
        cfg.input = resolve(j.value("input", std::string{}));
        if (j.contains("output_dir")) cfg.output_dir = resolve(j.at("output_dir").get<std::string>());
        cfg.seed = j.value("seed", std::uint64_t{0});
        cfg.workers = j.value("workers", std::size_t{4});
        if (auto it = j.find("evaluation"); it != j.end()) cfg.evaluation = it->get<EvaluationSettings>();
        if (auto it = j.find("analysis"); it != j.end()) cfg.analysis = it->get<AnalysisSettings>();
    } catch (const json::exception& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
    if (cfg.workers == 0) throw ParseError(path.string() + ": workers must be positive");
    return cfg;
}

// -----------------------------------------------------------------------------
// Provider wiring
// -----------------------------------------------------------------------------

inline std::shared_ptr<Transport> make_transport(const ProviderConfig& cfg,
                                                 std::shared_ptr<const mock::MockContext> ctx = nullptr) {
    if (mock::is_mock_endpoint(cfg.endpoint)) return mock::make_builtin(cfg, std::move(ctx));
    if (cfg.endpoint.rfind("http://", 0) == 0 || cfg.endpoint.rfind("https://", 0) == 0)
        return std::make_shared<HttpTransport>();
    throw ParseError("provider " + cfg.name + ": unsupported endpoint '" + cfg.endpoint + "'");
}

/// Builds providers for the roster entries named in `wanted` (all when empty).
inline ProviderRegistry build_registry(const std::vector<ProviderConfig>& roster,
                                       const std::set<std::string>& wanted = {},
                                       std::shared_ptr<const mock::MockContext> ctx = nullptr) {
    ProviderRegistry reg;
    for (const auto& cfg : roster)
        if (wanted.empty() || wanted.count(cfg.name))
            reg.add(std::make_shared<Provider>(cfg, make_transport(cfg, ctx)));
    for (const auto& name : wanted)
        if (!reg.contains(name)) throw ParseError("provider '" + name + "' is not in the roster");
    return reg;
}

inline std::set<std::string> pipeline_provider_names(const PipelineSettings& s) {
    std::set<std::string> names(s.discriminators.begin(), s.discriminators.end());
    for (const auto* n : {&s.generator, &s.nli, &s.embedder, &s.critic})
        if (!n->empty()) names.insert(*n);
    if (s.extra_llm_correctness && !s.checker.empty()) names.insert(s.checker);
    return names;
}

inline PipelineConfig resolve_pipeline(const PipelineSettings& s, const ProviderRegistry& reg) {
    PipelineConfig cfg;
    cfg.attempt_budget = s.attempt_budget;
    for (const auto& d : s.discriminators) cfg.discriminators.push_back(reg.get(d, ProviderKind::judge));
    auto need = [&](const std::string& name, ProviderKind kind, const char* role) {
        if (name.empty()) throw ParseError(std::string("pipeline.") + role + " is not set");
        return reg.get(name, kind);
    };
    cfg.generator = need(s.generator, ProviderKind::generate, "generator");
    cfg.nli = need(s.nli, ProviderKind::nli, "nli");
    cfg.embedder = need(s.embedder, ProviderKind::embed, "embedder");
    cfg.critic = need(s.critic, ProviderKind::generate, "critic");
    cfg.extra_llm_correctness = s.extra_llm_correctness;
    if (s.extra_llm_correctness) cfg.checker = need(s.checker, ProviderKind::generate, "checker");
    cfg.tau = s.tau;
    cfg.length_window = s.length_window;
    cfg.temperature_lo = s.temperature_lo;
    cfg.temperature_hi = s.temperature_hi;
    cfg.top_p = s.top_p;
    cfg.max_tokens = s.max_tokens;
    cfg.retain_rule = s.retain_rule;
    try {
        cfg.validate();
    } catch (const ContractError& e) {
        throw ParseError(std::string("pipeline config: ") + e.what());
    }
    return cfg;
}

inline std::map<std::string, QAItem> index_items(const std::vector<QAItem>& items) {
    std::map<std::string, QAItem> out;
    for (const auto& i : items) out.emplace(i.id, i);
    return out;
}

/// One-line machine-parseable error for stderr.
inline std::string error_line(std::string_view kind, std::string_view message) {
    return json{{"error", kind}, {"message", message}}.dump();
}

// -----------------------------------------------------------------------------
// generate
// -----------------------------------------------------------------------------

struct GenerateResult {
    std::vector<HallucinationRecord> records;
    std::vector<std::pair<std::string, std::string>> errored; ///< (item id, reason)
    json summary;
};

/// Runs the pipeline over every item; records come back in input order.
inline GenerateResult generate_benchmark(const std::vector<QAItem>& items, const PipelineConfig& pipeline,
                                         std::uint64_t seed, std::size_t workers) {
    using Outcome = std::variant<HallucinationRecord, std::string>;
    auto outcomes = parallel_map<Outcome>(items.size(), workers, [&](std::size_t i) -> Outcome {
        try {
            auto rec = run_pipeline(items[i], pipeline, item_seed(seed, items[i].id));
            rec.validate(pipeline.attempt_budget);
            return rec;
        } catch (const Error& e) {
            spdlog::error("item {} errored: {}", items[i].id, e.what());
            return std::string(e.what());
        }
    });

    GenerateResult out;
    std::map<std::string, std::int64_t> by_difficulty, by_category;
    for (auto d : kEmittedDifficulties) by_difficulty[std::string(to_string(d))] = 0;
    for (auto c : kAllCategories) by_category[std::string(to_string(c))] = 0;
    std::int64_t fallbacks = 0;
    for (std::size_t i = 0; i < outcomes.size(); ++i) {
        if (auto* rec = std::get_if<HallucinationRecord>(&outcomes[i])) {
            ++by_difficulty[std::string(to_string(rec->difficulty))];
            ++by_category[std::string(to_string(rec->category))];
            fallbacks += rec->fallback_used ? 1 : 0;
            out.records.push_back(std::move(*rec));
        } else {
            out.errored.emplace_back(items[i].id, std::get<std::string>(outcomes[i]));
        }
    }
    json errored = json::array();
    for (const auto& [id, why] : out.errored) errored.push_back({{"id", id}, {"error", why}});
    out.summary = json{{"items", items.size()},
                       {"records", out.records.size()},
                       {"errored", std::move(errored)},
                       {"by_difficulty", by_difficulty},
                       {"by_category", by_category},
                       {"fallback_used", fallbacks},
                       {"seed", seed}};
    return out;
}

struct GenerateOptions {
    fs::path config;
    std::optional<fs::path> input;
    std::optional<fs::path> out;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> workers;
};

inline int cmd_generate(const GenerateOptions& opt) {
    try {
        RunConfig cfg = load_run_config(opt.config);
        if (opt.input) cfg.input = *opt.input;
        if (opt.out) cfg.output_dir = *opt.out;
        if (opt.seed) cfg.seed = *opt.seed;
        if (opt.workers) cfg.workers = *opt.workers;
        if (cfg.input.empty()) throw ParseError("no input corpus given");
        if (cfg.workers == 0) throw ParseError("workers must be positive");

        const auto corpus = load_corpus(cfg.input);
        for (const auto& e : corpus.errors) spdlog::warn("corpus {}: {}", e.where, e.reason);
        const auto registry = build_registry(load_roster(cfg.providers), pipeline_provider_names(cfg.pipeline));
        const auto pipeline = resolve_pipeline(cfg.pipeline, registry);

        auto result = generate_benchmark(corpus.items, pipeline, cfg.seed, cfg.workers);
        result.summary["corpus_errors"] = corpus.errors;
        result.summary["provider_calls"] = registry.call_counts();

        write_file_atomic(cfg.output_dir / "benchmark.jsonl", to_jsonl(result.records));
        write_file_atomic(cfg.output_dir / "run_summary.json", result.summary.dump(2) + "\n");
        std::cout << "wrote " << result.records.size() << " records to " << (cfg.output_dir / "benchmark.jsonl").string()
                  << " (" << result.errored.size() << " errored)\n";
        return result.errored.empty() ? 0 : 2;
    } catch (const std::exception& e) {
        std::cerr << error_line("generate", e.what()) << '\n';
        return 1;
    }
}

// -----------------------------------------------------------------------------
// evaluate
// -----------------------------------------------------------------------------

struct EvaluateOptions {
    fs::path config;
    fs::path benchmark;
    std::optional<fs::path> input;
    std::optional<fs::path> out;
    std::optional<std::string> detector;
    std::optional<Protocol> protocol;
    std::optional<bool> knowledge_shown;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> workers;
};

struct EvaluateOutput {
    json document;
    MetricsReport report;
    std::int64_t provider_failures = 0;
};

/// Runs the detector; under the ternary protocol also runs the forced binary
/// companion and attaches the abstention comparison.
inline EvaluateOutput evaluate_benchmark(const std::vector<HallucinationRecord>& benchmark,
                                         const std::map<std::string, QAItem>& items, Provider& detector,
                                         const EvaluationOptions& opt) {
    EvaluateOutput out;
    const auto primary = evaluate(benchmark, items, detector, opt);
    out.report = primary.report;
    out.provider_failures = primary.provider_failures;
    out.document = json{{"detector", detector.name()},
                        {"protocol", std::string(to_string(opt.protocol))},
                        {"knowledge_shown", opt.knowledge_shown},
                        {"seed", opt.seed},
                        {"tasks", primary.results.size()},
                        {"provider_failures", primary.provider_failures},
                        {"report", primary.report}};
    if (opt.protocol == Protocol::ternary) {
        auto forced_opt = opt;
        forced_opt.protocol = Protocol::binary;
        const auto forced = evaluate(benchmark, items, detector, forced_opt);
        std::vector<ScoredTask> ns, r;
        for (const auto& t : primary.results) ns.push_back(t.scored());
        for (const auto& t : forced.results) r.push_back(t.scored());
        out.document["forced_report"] = forced.report;
        out.document["abstention"] = abstention_report(ns, r);
        out.provider_failures += forced.provider_failures;
        out.document["provider_failures"] = out.provider_failures;
    }
    return out;
}

inline int cmd_evaluate(const EvaluateOptions& opt) {
    try {
        RunConfig cfg = load_run_config(opt.config);
        if (opt.input) cfg.input = *opt.input;
        if (opt.out) cfg.output_dir = *opt.out;
        if (opt.seed) cfg.seed = *opt.seed;
        if (opt.workers) cfg.workers = *opt.workers;
        if (opt.detector) cfg.evaluation.detector = *opt.detector;
        if (opt.protocol) cfg.evaluation.protocol = *opt.protocol;
        if (opt.knowledge_shown) cfg.evaluation.knowledge_shown = *opt.knowledge_shown;
        if (cfg.evaluation.detector.empty()) throw ParseError("no detector given");
        if (cfg.input.empty()) throw ParseError("no input corpus given");

        const auto benchmark = read_jsonl<HallucinationRecord>(opt.benchmark);
        if (benchmark.empty()) throw ParseError(opt.benchmark.string() + ": empty benchmark");
        const auto items = index_items(load_corpus(cfg.input).items);

        auto ctx = std::make_shared<mock::MockContext>();
        for (const auto& r : benchmark) ctx->hallucinated_answers.insert(r.hallucinated_answer);
        const auto registry = build_registry(load_roster(cfg.providers), {cfg.evaluation.detector}, ctx);
        auto detector = registry.get(cfg.evaluation.detector);

        EvaluationOptions eo;
        eo.protocol = cfg.evaluation.protocol;
        eo.knowledge_shown = cfg.evaluation.knowledge_shown;
        eo.seed = cfg.seed;
        eo.workers = cfg.workers;
        eo.temperature = cfg.evaluation.temperature;
        const auto result = evaluate_benchmark(benchmark, items, *detector, eo);

        const std::string stem = "metrics_" + detector->name() + "_" + std::string(to_string(eo.protocol)) +
                                 (eo.knowledge_shown ? "_knowledge" : "_noknowledge");
        write_file_atomic(cfg.output_dir / (stem + ".json"), result.document.dump(2) + "\n");
        write_file_atomic(cfg.output_dir / (stem + ".csv"), render_csv(result.report));
        write_file_atomic(cfg.output_dir / (stem + ".txt"), render_table(result.report));
        std::cout << render_table(result.report);
        if (result.document.contains("abstention")) {
            const auto& a = result.document["abstention"];
            std::cout << "not-sure option: F1_NS=" << format_metric(a["f1_ns"].get<double>())
                      << " P_NS=" << format_metric(a["p_ns"].get<double>())
                      << " Response=" << format_metric(a["response_rate"].get<double>())
                      << " | forced: F1_R=" << format_metric(a["f1_r"].get<double>())
                      << " P_R=" << format_metric(a["p_r"].get<double>()) << '\n';
        }
        return result.provider_failures == 0 ? 0 : 2;
    } catch (const std::exception& e) {
        std::cerr << error_line("evaluate", e.what()) << '\n';
        return 1;
    }
}

// -----------------------------------------------------------------------------
// analyze
// -----------------------------------------------------------------------------

/// Candidate pool for one question: the accepted answer, the rejected
/// candidates, then fresh generator samples until `pool_size` is reached.
inline std::vector<std::string> candidate_pool(const HallucinationRecord& rec, const QAItem& item,
                                               const PipelineConfig* pipeline, std::size_t pool_size,
                                               std::uint64_t seed) {
    std::vector<std::string> pool{rec.hallucinated_answer};
    for (const auto& c : rec.rejected_candidates) pool.push_back(c.text);
    if (pool.size() > pool_size) pool.resize(pool_size);
    if (!pipeline || item.knowledge.empty()) return pool;
    for (std::size_t k = 0; pool.size() < pool_size && k < 2 * pool_size; ++k) {
        try {
            pool.push_back(generate_candidate(item, 1, {}, *pipeline, derive_seed(seed, k)).text);
        } catch (const GenerationParseError&) {
        }
    }
    return pool;
}

struct AnalysisInput {
    std::string item_id;
    std::string question;
    std::string ground_truth;
    std::vector<std::string> responses;
    std::optional<std::vector<bool>> fooled;
};

inline json analysis_json(const QuestionAnalysis& qa) {
    json clusters = json::array();
    for (std::size_t i = 0; i < qa.clusters.size(); ++i) {
        json c = qa.clusters[i];
        c["proximity"] = qa.proximity[i];
        clusters.push_back(std::move(c));
    }
    return json{{"item_id", qa.item_id},
                {"responses", qa.responses.size()},
                {"clusters", std::move(clusters)},
                {"uniformity", qa.uniformity}};
}

struct AnalyzeOptions {
    fs::path config;
    std::optional<fs::path> benchmark;
    std::optional<fs::path> responses; ///< raw responses JSONL instead of a benchmark
    std::optional<fs::path> input;
    std::optional<fs::path> out;
    std::optional<std::size_t> pool_size;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> workers;
};

/// Raw responses rows: {item_id, question, ground_truth, responses: [...],
/// fooled: [...] (optional)}.
inline std::vector<AnalysisInput> read_response_rows(const fs::path& path) {
    std::vector<JsonlError> bad;
    const auto rows = parse_jsonl(read_file(path), bad);
    if (!bad.empty()) throw ParseError(path.string() + ":" + std::to_string(bad.front().line) + ": " + bad.front().reason);
    std::vector<AnalysisInput> out;
    for (const auto& row : rows) {
        try {
            AnalysisInput in;
            row.value.at("item_id").get_to(in.item_id);
            in.question = row.value.value("question", std::string{});
            row.value.at("ground_truth").get_to(in.ground_truth);
            row.value.at("responses").get_to(in.responses);
            if (auto it = row.value.find("fooled"); it != row.value.end() && !it->is_null())
                in.fooled = it->get<std::vector<bool>>();
            if (in.responses.empty()) throw ParseError("no responses");
            out.push_back(std::move(in));
        } catch (const std::exception& e) {
            throw ParseError(path.string() + ":" + std::to_string(row.line) + ": " + e.what());
        }
    }
    return out;
}

inline int cmd_analyze(const AnalyzeOptions& opt) {
    try {
        RunConfig cfg = load_run_config(opt.config);
        if (opt.input) cfg.input = *opt.input;
        if (opt.out) cfg.output_dir = *opt.out;
        if (opt.seed) cfg.seed = *opt.seed;
        if (opt.workers) cfg.workers = *opt.workers;
        if (opt.pool_size) cfg.analysis.pool_size = *opt.pool_size;
        if (cfg.analysis.pool_size == 0) throw ParseError("pool size must be positive");
        if (opt.benchmark.has_value() == opt.responses.has_value())
            throw ParseError("give exactly one of --benchmark or --responses");

        const auto roster = load_roster(cfg.providers);
        auto names = pipeline_provider_names(cfg.pipeline);
        const auto registry = build_registry(roster, names);
        auto nli = registry.get(cfg.pipeline.nli, ProviderKind::nli);
        auto embedder = registry.get(cfg.pipeline.embedder, ProviderKind::embed);
        std::vector<ProviderPtr> judges;
        for (const auto& d : cfg.pipeline.discriminators) judges.push_back(registry.get(d, ProviderKind::judge));

        std::optional<PipelineConfig> pipeline;
        std::vector<AnalysisInput> inputs;
        if (opt.benchmark) {
            pipeline = resolve_pipeline(cfg.pipeline, registry);
            const auto benchmark = read_jsonl<HallucinationRecord>(*opt.benchmark);
            if (cfg.input.empty()) throw ParseError("no input corpus given");
            const auto items = index_items(load_corpus(cfg.input).items);
            for (const auto& rec : benchmark) {
                auto it = items.find(rec.item_id);
                if (it == items.end()) throw ParseError("benchmark row refers to unknown item '" + rec.item_id + "'");
                AnalysisInput in;
                in.item_id = rec.item_id;
                in.question = it->second.question;
                in.ground_truth = it->second.ground_truth;
                in.responses = candidate_pool(rec, it->second, &*pipeline, cfg.analysis.pool_size,
                                              derive_seed(item_seed(cfg.seed, rec.item_id), "analysis-pool"));
                inputs.push_back(std::move(in));
            }
        } else {
            inputs = read_response_rows(*opt.responses);
        }

        const auto rule = cfg.pipeline.retain_rule;
        auto analyses = parallel_map<QuestionAnalysis>(inputs.size(), cfg.workers, [&](std::size_t i) {
            const auto& in = inputs[i];
            std::vector<bool> fooled;
            if (in.fooled) {
                fooled = *in.fooled;
            } else {
                if (judges.size() < 2) throw ParseError("fooled labels need at least two discriminators");
                const auto s = derive_seed(item_seed(cfg.seed, in.item_id), "analysis-vote");
                for (std::size_t k = 0; k < in.responses.size(); ++k)
                    fooled.push_back(retained(
                        ensemble_vote(in.question, in.responses[k], in.ground_truth, judges, derive_seed(s, k)), rule));
            }
            return analyze_question(in.item_id, in.responses, std::move(fooled), in.ground_truth, *nli, *embedder,
                                    cfg.analysis.tau_cluster);
        });

        std::vector<MemberMetrics> members;
        std::vector<bool> fooled;
        json questions = json::array();
        std::string csv = "item_id,member_index,cluster_id,fooled,cosine,euclidean,rouge1_f1\n";
        double pure_sum = 0.0;
        std::int64_t isolated = 0;
        for (const auto& qa : analyses) {
            questions.push_back(analysis_json(qa));
            pure_sum += qa.uniformity.pure_fraction;
            isolated += qa.uniformity.ground_truth_isolated ? 1 : 0;
            for (std::size_t k = 0; k < qa.members.size(); ++k) {
                members.push_back(qa.members[k]);
                fooled.push_back(qa.fooled[k]);
                std::ostringstream ss;
                ss << std::setprecision(17) << '"' << qa.item_id << "\"," << k << ',' << qa.cluster_of[k] << ','
                   << (qa.fooled[k] ? 1 : 0) << ',' << qa.members[k].cosine << ',' << qa.members[k].euclidean << ','
                   << qa.members[k].rouge1_f1 << '\n';
                csv += ss.str();
            }
        }
        const double nq = analyses.empty() ? 1.0 : static_cast<double>(analyses.size());
        json report{{"tau_cluster", cfg.analysis.tau_cluster},
                    {"pool_size", cfg.analysis.pool_size},
                    {"questions", std::move(questions)},
                    {"separation", fooled_separation_test(members, fooled)},
                    {"mean_pure_fraction", pure_sum / nq},
                    {"ground_truth_isolated_fraction", static_cast<double>(isolated) / nq}};
        write_file_atomic(cfg.output_dir / "clusters.json", report.dump(2) + "\n");
        write_file_atomic(cfg.output_dir / "members.csv", csv);
        std::cout << "analyzed " << analyses.size() << " questions, " << members.size() << " responses -> "
                  << (cfg.output_dir / "clusters.json").string() << '\n';
        return 0;
    } catch (const std::exception& e) {
        std::cerr << error_line("analyze", e.what()) << '\n';
        return 1;
    }
}

// -----------------------------------------------------------------------------
// stats
// -----------------------------------------------------------------------------

inline int cmd_stats(const fs::path& benchmark, bool as_json, std::ostream& os = std::cout) {
    try {
        const auto h = histogram(read_jsonl<HallucinationRecord>(benchmark));
        if (as_json)
            os << histogram_json(h).dump(2) << '\n';
        else
            os << render_histogram(h);
        return 0;
    } catch (const std::exception& e) {
        std::cerr << error_line("stats", e.what()) << '\n';
        return 1;
    }
}

} // namespace hallubench
