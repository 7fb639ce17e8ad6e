/// @file hallubench.cpp
/// @brief Command-line front end: generate, evaluate, analyze, stats.

#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include "hallubench/hallubench.hpp"

namespace hb = hallubench;

int main(int argc, char** argv) {
    CLI::App app{"Generate and evaluate hard hallucination benchmarks over QA corpora"};
    app.require_subcommand(1);
    std::string log_level = "warn";
    app.add_option("--log-level", log_level, "trace|debug|info|warn|error|off")->capture_default_str();

    int rc = 0;
    auto apply_log_level = [&] { spdlog::set_level(spdlog::level::from_str(log_level)); };

    hb::GenerateOptions gen;
    std::string gen_input, gen_out;
    std::uint64_t gen_seed = 0;
    std::size_t gen_workers = 0;
    auto* g = app.add_subcommand("generate", "Run the generation pipeline over a corpus");
    g->add_option("--config", gen.config, "Run config JSON")->required()->check(CLI::ExistingFile);
    auto* g_in = g->add_option("--input", gen_input, "Corpus (JSON, JSONL or PubMedQA dict)");
    auto* g_out = g->add_option("--out", gen_out, "Output directory");
    auto* g_seed = g->add_option("--seed", gen_seed, "Run seed");
    auto* g_workers = g->add_option("--workers", gen_workers, "Concurrent items")->check(CLI::PositiveNumber);
    g->callback([&] {
        if (*g_in) gen.input = gen_input;
        if (*g_out) gen.out = gen_out;
        if (*g_seed) gen.seed = gen_seed;
        if (*g_workers) gen.workers = gen_workers;
        apply_log_level();
        rc = hb::cmd_generate(gen);
    });

    hb::EvaluateOptions ev;
    std::string ev_input, ev_out, ev_detector, ev_protocol, ev_knowledge;
    std::uint64_t ev_seed = 0;
    std::size_t ev_workers = 0;
    auto* e = app.add_subcommand("evaluate", "Score a detector on a generated benchmark");
    e->add_option("--config", ev.config, "Run config JSON")->required()->check(CLI::ExistingFile);
    e->add_option("--benchmark", ev.benchmark, "Benchmark JSONL")->required()->check(CLI::ExistingFile);
    auto* e_in = e->add_option("--input", ev_input, "Source corpus");
    auto* e_out = e->add_option("--out", ev_out, "Output directory");
    auto* e_det = e->add_option("--detector", ev_detector, "Roster name of the detector");
    auto* e_proto = e->add_option("--protocol", ev_protocol, "binary|ternary")
                        ->check(CLI::IsMember({"binary", "ternary"}));
    auto* e_kn = e->add_option("--knowledge", ev_knowledge, "on|off")->check(CLI::IsMember({"on", "off"}));
    auto* e_seed = e->add_option("--seed", ev_seed, "Task-order seed");
    auto* e_workers = e->add_option("--workers", ev_workers, "Concurrent requests")->check(CLI::PositiveNumber);
    e->callback([&] {
        if (*e_in) ev.input = ev_input;
        if (*e_out) ev.out = ev_out;
        if (*e_det) ev.detector = ev_detector;
        if (*e_proto) ev.protocol = hb::prompts::parse_protocol(ev_protocol);
        if (*e_kn) ev.knowledge_shown = ev_knowledge == "on";
        if (*e_seed) ev.seed = ev_seed;
        if (*e_workers) ev.workers = ev_workers;
        apply_log_level();
        rc = hb::cmd_evaluate(ev);
    });

    hb::AnalyzeOptions an;
    std::string an_bench, an_resp, an_input, an_out;
    std::size_t an_pool = 0, an_workers = 0;
    std::uint64_t an_seed = 0;
    auto* a = app.add_subcommand("analyze", "Semantic clustering and proximity of candidate pools");
    a->add_option("--config", an.config, "Run config JSON")->required()->check(CLI::ExistingFile);
    auto* a_bench = a->add_option("--benchmark", an_bench, "Benchmark JSONL")->check(CLI::ExistingFile);
    auto* a_resp = a->add_option("--responses", an_resp, "Raw responses JSONL")->check(CLI::ExistingFile);
    a_bench->excludes(a_resp);
    auto* a_in = a->add_option("--input", an_input, "Source corpus");
    auto* a_out = a->add_option("--out", an_out, "Output directory");
    auto* a_pool = a->add_option("--pool-size", an_pool, "Responses per question")->check(CLI::PositiveNumber);
    auto* a_seed = a->add_option("--seed", an_seed, "Run seed");
    auto* a_workers = a->add_option("--workers", an_workers, "Concurrent questions")->check(CLI::PositiveNumber);
    a->callback([&] {
        if (*a_bench) an.benchmark = an_bench;
        if (*a_resp) an.responses = an_resp;
        if (*a_in) an.input = an_input;
        if (*a_out) an.out = an_out;
        if (*a_pool) an.pool_size = an_pool;
        if (*a_seed) an.seed = an_seed;
        if (*a_workers) an.workers = an_workers;
        apply_log_level();
        rc = hb::cmd_analyze(an);
    });

    std::string st_bench;
    bool st_json = false;
    auto* s = app.add_subcommand("stats", "Difficulty by category histogram of a benchmark");
    s->add_option("--benchmark", st_bench, "Benchmark JSONL")->required()->check(CLI::ExistingFile);
    s->add_flag("--json", st_json, "Emit JSON instead of a table");
    s->callback([&] {
        apply_log_level();
        rc = hb::cmd_stats(st_bench, st_json);
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& err) {
        return app.exit(err);
    } catch (const std::exception& err) {
        std::cerr << hb::error_line("cli", err.what()) << '\n';
        return 1;
    }
    return rc;
}
