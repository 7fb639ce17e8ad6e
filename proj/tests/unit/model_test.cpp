/// @file model_test.cpp
/// @brief Difficulty grading, categories and record JSON round-trips.

#include <algorithm>

#include <gtest/gtest.h>

#include "../support/fixtures.hpp"

using namespace hallubench;

namespace {

// Rule written out independently of grade_difficulty, by enumerating every
// vote vector with `count` fooled judges.
Difficulty oracle_difficulty(int count, int k) {
    std::vector<bool> votes(static_cast<std::size_t>(k), false);
    for (int i = 0; i < count; ++i) votes[static_cast<std::size_t>(i)] = true;
    const bool all = std::all_of(votes.begin(), votes.end(), [](bool b) { return b; });
    const bool none = std::none_of(votes.begin(), votes.end(), [](bool b) { return b; });
    const auto fooled = std::count(votes.begin(), votes.end(), true);
    if (none) return Difficulty::failed;
    if (all) return Difficulty::hard;
    if (fooled == 1) return Difficulty::easy;
    return Difficulty::medium;
}

HallucinationRecord sample_record() {
    HallucinationRecord r;
    r.item_id = "pmq-1";
    r.hallucinated_answer = "Statins increase risk.";
    r.category = HallucinationCategory::incomplete_information;
    r.difficulty = Difficulty::medium;
    r.attempts_made = 2;
    r.entailment = EntailmentResult::from_scores(0.4, 0.3, 0.75);
    r.feedback_log = {"too hedged"};
    CandidateAnswer c;
    c.text = "Statins do nothing.";
    c.category = HallucinationCategory::mechanism_pathway_misattribution;
    c.attempt_index = 1;
    c.sampling.seed = 77;
    c.length_ratio = 0.9;
    r.rejected_candidates = {c};
    return r;
}

} // namespace

TEST(GradeDifficulty, MatchesOracleExhaustively) {
    for (int k = 2; k <= 5; ++k)
        for (int c = 0; c <= k; ++c) EXPECT_EQ(grade_difficulty(c, k), oracle_difficulty(c, k)) << c << "/" << k;
}

TEST(GradeDifficulty, TwoJudgeEdge) {
    EXPECT_EQ(grade_difficulty(1, 2), Difficulty::easy);
    EXPECT_EQ(grade_difficulty(2, 2), Difficulty::hard);
    EXPECT_EQ(grade_difficulty(2, 3), Difficulty::medium);
}

TEST(GradeDifficulty, RejectsBadArguments) {
    EXPECT_THROW(grade_difficulty(0, 1), ContractError);
    EXPECT_THROW(grade_difficulty(-1, 3), ContractError);
    EXPECT_THROW(grade_difficulty(4, 3), ContractError);
}

TEST(Categories, TokensRoundTrip) {
    for (auto c : kAllCategories) {
        EXPECT_EQ(parse_category(to_string(c)), c);
        EXPECT_FALSE(category_info(c).display_name.empty());
        EXPECT_FALSE(category_info(c).description.empty());
    }
    EXPECT_EQ(category_info(HallucinationCategory::misinterpretation_of_question).display_name,
              "Misinterpretation of Question");
    EXPECT_THROW(parse_category("made_up"), ParseError);
}

TEST(Categories, LenientMatch) {
    EXPECT_EQ(match_category("Incomplete Information"), HallucinationCategory::incomplete_information);
    EXPECT_EQ(match_category(" mechanism_pathway_misattribution. "),
              HallucinationCategory::mechanism_pathway_misattribution);
    EXPECT_FALSE(match_category("banana").has_value());
}

TEST(QAItem, Validation) {
    QAItem q{"a", "Q?", "A.", {}, {}, "labeled"};
    EXPECT_NO_THROW(q.validate());
    q.question = "   ";
    EXPECT_THROW(q.validate(), ContractError);
    q.question = "Q?";
    q.id.clear();
    EXPECT_THROW(q.validate(), ContractError);
}

TEST(SamplingParams, Validation) {
    SamplingParams p;
    EXPECT_NO_THROW(p.validate());
    p.temperature = 1.5;
    EXPECT_THROW(p.validate(), ContractError);
    p = {};
    p.max_tokens = 0;
    EXPECT_THROW(p.validate(), ContractError);
}

TEST(QualityVerdict, FromVotes) {
    const auto v = QualityVerdict::from_votes({true, false, true});
    EXPECT_EQ(v.fooled_count, 2);
    EXPECT_EQ(v.difficulty, Difficulty::medium);
}

TEST(HallucinationRecord, ValidateInvariants) {
    auto r = sample_record();
    EXPECT_NO_THROW(r.validate(5));
    r.difficulty = Difficulty::failed;
    EXPECT_THROW(r.validate(5), ContractError);
    r = sample_record();
    r.fallback_used = true;
    EXPECT_THROW(r.validate(5), ContractError);
    r = sample_record();
    r.attempts_made = 6;
    EXPECT_THROW(r.validate(5), ContractError);
    r = sample_record();
    r.entailment = EntailmentResult::from_scores(0.9, 0.9, 0.75);
    EXPECT_THROW(r.validate(5), ContractError);
}

TEST(Serialization, RecordRoundTrip) {
    const auto r = sample_record();
    const json j = r;
    EXPECT_EQ(j.at("item_id"), "pmq-1");
    EXPECT_EQ(j.at("difficulty"), "medium");
    EXPECT_EQ(j.at("category"), "incomplete_information");
    EXPECT_EQ(j.at("rejected_candidates")[0].at("sampling").at("seed"), 77);
    EXPECT_EQ(j.get<HallucinationRecord>(), r);
    EXPECT_EQ(json::parse(j.dump()).get<HallucinationRecord>(), r);
}

TEST(Serialization, RandomRecordsRoundTrip) {
    SplitMix rng(5);
    for (int n = 0; n < 300; ++n) {
        HallucinationRecord r;
        r.item_id = "id-" + std::to_string(rng.next());
        r.hallucinated_answer = "answer " + std::to_string(rng.below(1000));
        r.category = kAllCategories[rng.below(4)];
        r.difficulty = kEmittedDifficulties[rng.below(3)];
        r.fallback_used = rng.uniform() < 0.3;
        r.attempts_made = 1 + static_cast<int>(rng.below(5));
        if (rng.uniform() < 0.7) r.entailment = EntailmentResult::from_scores(rng.uniform(), rng.uniform(), 0.75);
        for (std::uint64_t i = 0, m = rng.below(3); i < m; ++i) r.feedback_log.push_back("fb " + std::to_string(i));
        for (std::uint64_t i = 0, m = rng.below(4); i < m; ++i) {
            CandidateAnswer c;
            c.text = "cand " + std::to_string(i);
            c.category = kAllCategories[rng.below(4)];
            c.attempt_index = 1 + static_cast<int>(i);
            c.refined = rng.uniform() < 0.5;
            c.sampling.temperature = rng.uniform();
            if (rng.uniform() < 0.5) c.sampling.seed = static_cast<std::int64_t>(rng.below(1u << 30));
            c.length_ratio = rng.uniform() * 2;
            r.rejected_candidates.push_back(c);
        }
        ASSERT_EQ(json::parse(json(r).dump()).get<HallucinationRecord>(), r);
    }
}

TEST(Serialization, MetricsReportRoundTrip) {
    MetricsReport m;
    m.tp = 3;
    m.fn = 1;
    m.precision = 1.0;
    m.recall = 0.75;
    m.degenerate = {"accuracy"};
    MetricsReport sub;
    sub.tn = 2;
    m.strata["difficulty:easy"] = sub;
    EXPECT_EQ(json(m).get<MetricsReport>(), m);
}

TEST(Serialization, QAItemOptionalFields) {
    const auto q = json::parse(R"({"id":"x","question":"q?","ground_truth":"a"})").get<QAItem>();
    EXPECT_TRUE(q.knowledge.empty());
    EXPECT_TRUE(q.tags.empty());
}
