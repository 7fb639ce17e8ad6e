/// @file quality_test.cpp
/// @brief Judge ensemble voting, retention rules, entailment gate and distinctness check.

#include <gtest/gtest.h>

#include "../support/fixtures.hpp"

using namespace hallubench;
using hbt::chat_provider;

namespace {

const std::string kGt = "Statins lower the risk of atrial fibrillation.";
const std::string kCand = "Statins raise the risk of atrial fibrillation.";

std::vector<ProviderPtr> judges(const std::vector<bool>& fooled) {
    std::vector<ProviderPtr> out;
    for (std::size_t i = 0; i < fooled.size(); ++i)
        out.push_back(chat_provider("judge-" + std::to_string(i), ProviderKind::judge,
                                    mock::scripted_judge(kGt, fooled[i])));
    return out;
}

} // namespace

TEST(EnsembleVote, CountsFooledJudges) {
    const auto v = ensemble_vote("q", kCand, kGt, judges({true, false, true}), 7);
    EXPECT_EQ(v.fooled, (std::vector<bool>{true, false, true}));
    EXPECT_EQ(v.difficulty, Difficulty::medium);
    EXPECT_EQ(ensemble_vote("q", kCand, kGt, judges({true, true, true}), 7).difficulty, Difficulty::hard);
    EXPECT_EQ(ensemble_vote("q", kCand, kGt, judges({false, false, true}), 7).difficulty, Difficulty::easy);
    EXPECT_EQ(ensemble_vote("q", kCand, kGt, judges({false, false, false}), 7).difficulty, Difficulty::failed);
}

TEST(EnsembleVote, IndependentOfPlacementSeed) {
    const auto js = judges({true, false, true, false});
    const auto ref = ensemble_vote("q", kCand, kGt, js, 0);
    for (std::uint64_t seed = 1; seed < 200; ++seed) ASSERT_EQ(ensemble_vote("q", kCand, kGt, js, seed), ref);
}

TEST(EnsembleVote, PlacementVariesAcrossSeeds) {
    int first = 0;
    for (std::uint64_t seed = 0; seed < 400; ++seed) first += candidate_goes_first(seed, "judge-a") ? 1 : 0;
    EXPECT_GT(first, 150);
    EXPECT_LT(first, 250);
}

TEST(EnsembleVote, UnparseableJudgeCountsAsNotFooled) {
    auto js = judges({true, true});
    js.push_back(chat_provider("mute", ProviderKind::judge, mock::fixed_reply("no idea")));
    const auto v = ensemble_vote("q", kCand, kGt, js, 3);
    EXPECT_EQ(v.fooled, (std::vector<bool>{true, true, false}));
    EXPECT_EQ(js[2]->calls(), 2);
}

TEST(EnsembleVote, TransportFailurePropagates) {
    auto js = judges({true, true});
    auto inner = std::make_shared<mock::MockTransport>();
    js.push_back(hbt::make_provider("down", ProviderKind::judge,
                                    std::make_shared<mock::FlakyTransport>(inner, 100), 1));
    EXPECT_THROW(ensemble_vote("q", kCand, kGt, js, 3), TransportError);
}

TEST(EnsembleVote, NeedsTwoJudges) {
    EXPECT_THROW(ensemble_vote("q", kCand, kGt, judges({true}), 1), ContractError);
}

TEST(Retained, Rules) {
    const auto one = QualityVerdict::from_votes({true, false, false});
    const auto two = QualityVerdict::from_votes({true, true, false});
    const auto none = QualityVerdict::from_votes({false, false, false});
    EXPECT_TRUE(retained(one, RetainRule::any_fooled));
    EXPECT_FALSE(retained(one, RetainRule::majority_fooled));
    EXPECT_TRUE(retained(two, RetainRule::majority_fooled));
    EXPECT_FALSE(retained(none, RetainRule::any_fooled));
    const auto half = QualityVerdict::from_votes({true, true, false, false});
    EXPECT_FALSE(retained(half, RetainRule::majority_fooled));
    EXPECT_EQ(parse_retain_rule("majority_fooled"), RetainRule::majority_fooled);
    EXPECT_THROW(parse_retain_rule("all"), ParseError);
}

TEST(Retained, MonotoneInVotes) {
    // Flipping any vote to fooled never un-retains a candidate.
    for (int k = 2; k <= 5; ++k) {
        for (unsigned mask = 0; mask < (1u << k); ++mask) {
            std::vector<bool> votes;
            for (int j = 0; j < k; ++j) votes.push_back((mask >> j) & 1u);
            for (int j = 0; j < k; ++j) {
                auto more = votes;
                more[j] = true;
                for (auto rule : {RetainRule::any_fooled, RetainRule::majority_fooled})
                    if (retained(QualityVerdict::from_votes(votes), rule))
                        ASSERT_TRUE(retained(QualityVerdict::from_votes(more), rule));
            }
        }
    }
}

TEST(Entailment, ScoreIsMinAndStrictThreshold) {
    auto t = std::make_shared<mock::MockTransport>();
    t->on_nli(mock::nli_table({{{kCand, kGt}, 0.8}, {{kGt, kCand}, 0.3}}));
    auto nli = hbt::make_provider("nli", ProviderKind::nli, t);
    const auto r = bidirectional_entailment(kCand, kGt, *nli, 0.75);
    EXPECT_DOUBLE_EQ(r.forward, 0.8);
    EXPECT_DOUBLE_EQ(r.backward, 0.3);
    EXPECT_DOUBLE_EQ(r.score, 0.3);
    EXPECT_TRUE(r.passes);
    EXPECT_FALSE(EntailmentResult::from_scores(0.75, 0.9, 0.75).passes);
    EXPECT_TRUE(EntailmentResult::from_scores(0.7499, 0.9, 0.75).passes);
}

TEST(Entailment, IdenticalTextNeverPasses) {
    auto nli = hbt::make_provider("nli", ProviderKind::nli, std::make_shared<mock::MockTransport>());
    EXPECT_FALSE(bidirectional_entailment(kGt, kGt, *nli, 0.75).passes);
    EXPECT_THROW(bidirectional_entailment("", kGt, *nli, 0.75), ContractError);
}

TEST(Entailment, RandomTriplesProperty) {
    SplitMix rng(17);
    for (int i = 0; i < 10000; ++i) {
        const double f = rng.uniform(), b = rng.uniform(), tau = rng.uniform();
        const auto r = EntailmentResult::from_scores(f, b, tau);
        ASSERT_EQ(r.score, f < b ? f : b);
        ASSERT_EQ(r.passes, r.score < tau);
        const double tau2 = tau + (1.0 - tau) * rng.uniform();
        if (r.passes) ASSERT_TRUE(EntailmentResult::from_scores(f, b, tau2).passes);
    }
}

TEST(Distinctness, CheckerVerdicts) {
    auto checker = chat_provider("chk", ProviderKind::generate, mock::builtin_checker());
    EXPECT_TRUE(llm_distinctness_check(kCand, kGt, *checker));
    EXPECT_FALSE(llm_distinctness_check("statins LOWER the risk of atrial fibrillation", kGt, *checker));
    auto confused = chat_provider("c2", ProviderKind::generate, mock::fixed_reply("perhaps"));
    EXPECT_FALSE(llm_distinctness_check(kCand, kGt, *confused));
    EXPECT_EQ(confused->calls(), 2);
    EXPECT_EQ(parse_distinctness("Different."), true);
    EXPECT_EQ(parse_distinctness("same"), false);
}
