/// @file detection_test.cpp
/// @brief Detector evaluation: task construction, verdict parsing, strata and rendering.

#include <gtest/gtest.h>

#include "../support/fixtures.hpp"

using namespace hallubench;

namespace {

struct Bench {
    std::vector<HallucinationRecord> records;
    std::map<std::string, QAItem> items;
};

/// `n` rows cycling through difficulties and categories; item i carries tag
/// "tag-(i % tags)".
Bench make_bench(std::size_t n, std::size_t tags = 5) {
    Bench b;
    const auto items = hbt::synthetic_corpus(n);
    for (std::size_t i = 0; i < n; ++i) {
        auto item = items[i];
        item.tags = {"tag-" + std::to_string(i % tags)};
        HallucinationRecord r;
        r.item_id = item.id;
        r.hallucinated_answer = "Fabricated answer number " + std::to_string(i) + ".";
        r.category = kAllCategories[i % 4];
        r.difficulty = kEmittedDifficulties[i % 3];
        r.attempts_made = 1;
        r.entailment = EntailmentResult::from_scores(0.1, 0.1, 0.75);
        b.records.push_back(r);
        b.items.emplace(item.id, item);
    }
    return b;
}

ProviderPtr detector(const std::string& endpoint, const Bench& b) {
    auto ctx = std::make_shared<mock::MockContext>();
    for (const auto& r : b.records) ctx->hallucinated_answers.insert(r.hallucinated_answer);
    ProviderConfig cfg{"det", ProviderKind::generate, endpoint};
    return std::make_shared<Provider>(cfg, mock::make_builtin(cfg, ctx));
}

EvaluationOptions opts(Protocol p = Protocol::binary, bool knowledge = false, std::uint64_t seed = 1) {
    EvaluationOptions o;
    o.protocol = p;
    o.knowledge_shown = knowledge;
    o.seed = seed;
    o.workers = 4;
    return o;
}

} // namespace

TEST(BuildTasks, BalancedPairs) {
    const auto b = make_bench(10);
    const auto tasks = build_tasks(b.records, b.items, Protocol::binary, false);
    ASSERT_EQ(tasks.size(), 20u);
    int gold = 0;
    for (const auto& t : tasks) gold += t.gold_label ? 1 : 0;
    EXPECT_EQ(gold, 10);
    EXPECT_EQ(tasks[1].presented_answer, b.items.at(tasks[1].item_id).ground_truth);
    auto missing = b.records;
    missing[0].item_id = "ghost";
    EXPECT_THROW(build_tasks(missing, b.items, Protocol::binary, false), ContractError);
}

TEST(DetectionPromptTask, KnowledgeOnlyWhenShown) {
    const auto b = make_bench(1);
    auto tasks = build_tasks(b.records, b.items, Protocol::ternary, true);
    EXPECT_TRUE(prompts::extract_section(build_detection_prompt(tasks[0]).user, prompts::kKnowledge));
    tasks = build_tasks(b.records, b.items, Protocol::binary, false);
    EXPECT_FALSE(prompts::extract_section(build_detection_prompt(tasks[0]).user, prompts::kKnowledge));
    auto bare = b.items;
    bare.begin()->second.knowledge.clear();
    tasks = build_tasks(b.records, bare, Protocol::binary, true);
    EXPECT_THROW(build_detection_prompt(tasks[0]), ContractError);
}

TEST(ParseVerdict, Examples) {
    EXPECT_EQ(parse_verdict("Answer: Yes", Protocol::binary)->label, DetectionLabel::yes_hallucinated);
    EXPECT_EQ(parse_verdict("no", Protocol::binary)->label, DetectionLabel::not_hallucinated);
    EXPECT_EQ(parse_verdict("not sure", Protocol::ternary)->label, DetectionLabel::not_sure);
    EXPECT_FALSE(parse_verdict("not sure", Protocol::binary));
    EXPECT_FALSE(parse_verdict("Probably yes", Protocol::binary));
    EXPECT_EQ(to_outcome(parse_verdict("not sure", Protocol::binary)), Outcome::invalid);
    EXPECT_EQ(parse_verdict("YES\nbecause reasons", Protocol::binary)->label, DetectionLabel::yes_hallucinated);
}

TEST(Evaluate, OracleIsPerfectEverywhere) {
    const auto b = make_bench(30);
    auto det = detector("mock://detector?mode=oracle", b);
    const auto res = evaluate(b.records, b.items, *det, opts());
    EXPECT_EQ(res.report.f1, 1.0);
    EXPECT_EQ(res.report.precision, 1.0);
    EXPECT_EQ(res.report.recall, 1.0);
    EXPECT_EQ(res.report.response_rate, 1.0);
    for (const auto& [name, s] : res.report.strata) EXPECT_EQ(s.f1, 1.0) << name;
}

TEST(Evaluate, AlwaysYesClosedForm) {
    const auto b = make_bench(200);
    auto det = detector("mock://detector?mode=yes", b);
    const auto r = evaluate(b.records, b.items, *det, opts()).report;
    // Oracle: a balanced set of n positives and n negatives, all predicted
    // positive: tp = n, fp = n.
    EXPECT_EQ(r.tp, 200);
    EXPECT_EQ(r.fp, 200);
    EXPECT_EQ(r.recall, 1.0);
    EXPECT_EQ(r.precision, 0.5);
    EXPECT_EQ(r.accuracy, 0.5);
}

TEST(Evaluate, UnsureUnderBinaryIsInvalidAndWrong) {
    const auto b = make_bench(10);
    auto det = detector("mock://detector?mode=unsure", b);
    const auto res = evaluate(b.records, b.items, *det, opts());
    EXPECT_EQ(res.report.invalid, 20);
    EXPECT_EQ(res.report.fn, 10);
    EXPECT_EQ(res.report.fp, 10);
    EXPECT_EQ(res.report.response_rate, 1.0);
    EXPECT_EQ(det->calls(), 40); // one re-ask per task
}

TEST(Evaluate, TernaryHedgerAbstains) {
    const auto b = make_bench(50);
    auto det = detector("mock://detector?mode=oracle&unsure_rate=0.3", b);
    const auto r = evaluate(b.records, b.items, *det, opts(Protocol::ternary)).report;
    EXPECT_GT(r.abstained, 0);
    EXPECT_LT(r.response_rate, 1.0);
    EXPECT_EQ(r.precision, 1.0);
    EXPECT_EQ(r.total(), 100);
}

TEST(Evaluate, StrataPartitionOverall) {
    const auto b = make_bench(40);
    auto det = detector("mock://detector?mode=random", b);
    const auto r = evaluate(b.records, b.items, *det, opts()).report;
    for (const std::string prefix : {"difficulty:", "category:", "tag:"}) {
        std::int64_t tp = 0, fp = 0, tn = 0, fn = 0, n = 0, groups = 0;
        for (const auto& [name, s] : r.strata) {
            if (name.rfind(prefix, 0) != 0) continue;
            ++groups;
            tp += s.tp;
            fp += s.fp;
            tn += s.tn;
            fn += s.fn;
            n += s.total();
        }
        EXPECT_EQ(tp, r.tp) << prefix;
        EXPECT_EQ(fp, r.fp) << prefix;
        EXPECT_EQ(tn, r.tn) << prefix;
        EXPECT_EQ(fn, r.fn) << prefix;
        EXPECT_EQ(n, r.total()) << prefix;
        if (prefix == "tag:") EXPECT_EQ(groups, 5);
        if (prefix == "difficulty:") EXPECT_EQ(groups, 3);
    }
}

TEST(Evaluate, TwoDifficultyStrata) {
    auto b = make_bench(4);
    b.records[0].difficulty = b.records[1].difficulty = Difficulty::easy;
    b.records[2].difficulty = b.records[3].difficulty = Difficulty::hard;
    auto det = detector("mock://detector?mode=oracle", b);
    const auto r = evaluate(b.records, b.items, *det, opts()).report;
    EXPECT_EQ(r.strata.at("difficulty:easy").total(), 4);
    EXPECT_EQ(r.strata.at("difficulty:hard").total(), 4);
    EXPECT_EQ(r.strata.count("difficulty:medium"), 0u);
}

TEST(Evaluate, UntaggedStratum) {
    auto b = make_bench(3);
    for (auto& [id, item] : b.items) item.tags.clear();
    auto det = detector("mock://detector?mode=oracle", b);
    const auto r = evaluate(b.records, b.items, *det, opts()).report;
    EXPECT_EQ(r.strata.at("tag:untagged").total(), 6);
}

TEST(Evaluate, ShuffleSeedDoesNotChangeReport) {
    const auto b = make_bench(25);
    auto det = detector("mock://detector?mode=random", b);
    const auto ref = evaluate(b.records, b.items, *det, opts(Protocol::binary, true, 1)).report;
    for (std::uint64_t s = 2; s < 6; ++s)
        EXPECT_EQ(evaluate(b.records, b.items, *det, opts(Protocol::binary, true, s)).report, ref);
}

TEST(Evaluate, ProviderFailuresCounted) {
    const auto b = make_bench(5);
    auto det = hbt::make_provider(
        "down", ProviderKind::generate,
        std::make_shared<mock::FlakyTransport>(std::make_shared<mock::MockTransport>(), 1 << 20), 0);
    const auto res = evaluate(b.records, b.items, *det, opts());
    EXPECT_EQ(res.provider_failures, 10);
    EXPECT_EQ(res.report.invalid, 10);
    EXPECT_THROW(evaluate({}, b.items, *det, opts()), ContractError);
}

TEST(Render, CsvAndTable) {
    const auto b = make_bench(6);
    auto det = detector("mock://detector?mode=oracle", b);
    const auto r = evaluate(b.records, b.items, *det, opts()).report;
    const auto csv = render_csv(r);
    EXPECT_EQ(csv.substr(0, csv.find('\n')),
              "stratum,total,tp,fp,tn,fn,abstained,invalid,precision,recall,f1,accuracy,response_rate");
    EXPECT_NE(csv.find("\"overall\",12,6,0,6,0,0,0,1,1,1,1,1"), std::string::npos);
    EXPECT_NE(render_table(r).find("difficulty:easy"), std::string::npos);
}
