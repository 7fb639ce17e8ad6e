/// @file prompts_test.cpp
/// @brief Text helpers, hashing, prompt sections and reply parsing.

#include <gtest/gtest.h>

#include "../support/fixtures.hpp"

using namespace hallubench;
using namespace hallubench::prompts;

namespace {

QAItem item_with_knowledge() {
    return QAItem{"q1", "Does aspirin prevent stroke?", "Yes, in selected high risk patients.",
                  {"Aspirin inhibits platelet aggregation.", "Trials show benefit in secondary prevention."},
                  {"Stroke"}, "labeled"};
}

} // namespace

TEST(Text, TrimSplitCount) {
    EXPECT_EQ(text::trim("  a b \n"), "a b");
    EXPECT_EQ(text::word_count("  one two\tthree\n four "), 4u);
    EXPECT_EQ(text::word_count(""), 0u);
    EXPECT_EQ(text::normalized_tokens("The, cat. (sat)"), (std::vector<std::string>{"the", "cat", "sat"}));
    EXPECT_TRUE(text::istarts_with("ANSWER: yes", "answer:"));
}

TEST(Hashing, StableAndSeparated) {
    EXPECT_EQ(fnv1a64(""), 0xcbf29ce484222325ULL);
    EXPECT_EQ(fnv1a64("a"), 0xaf63dc4c8601ec8cULL);
    EXPECT_NE(derive_seed(1, "base"), derive_seed(1, "second"));
    EXPECT_NE(derive_seed(1, std::uint64_t{1}), derive_seed(1, std::uint64_t{2}));
    EXPECT_EQ(derive_seed(9, "x"), derive_seed(9, "x"));
    SplitMix rng(3);
    for (int i = 0; i < 1000; ++i) {
        const double u = rng.uniform();
        ASSERT_GE(u, 0.0);
        ASSERT_LT(u, 1.0);
        ASSERT_LT(rng.below(7), 7u);
    }
}

TEST(Sections, AppendAndExtract) {
    std::string p;
    append_section(p, kQuestion, "What?");
    append_section(p, kAnswer, "line one\nline two");
    append_section(p, kInstructions, "Be brief.");
    EXPECT_EQ(extract_section(p, kQuestion), "What?");
    EXPECT_EQ(extract_section(p, kAnswer), "line one\nline two");
    EXPECT_FALSE(extract_section(p, kKnowledge).has_value());
}

TEST(GenerationPrompt, ContainsSectionsAndCategories) {
    const auto item = item_with_knowledge();
    const auto p = build_generation_prompt(item);
    EXPECT_EQ(extract_section(p.user, kGroundTruth), item.ground_truth);
    EXPECT_EQ(extract_section(p.user, kQuestion), item.question);
    EXPECT_NE(extract_section(p.user, kKnowledge)->find("(2) Trials show"), std::string::npos);
    EXPECT_FALSE(extract_section(p.user, kCritique).has_value());
    for (auto c : kAllCategories) EXPECT_NE(p.system.find(to_string(c)), std::string::npos);
}

TEST(GenerationPrompt, CritiquesAppendedInOrder) {
    const auto p = build_generation_prompt(item_with_knowledge(), {"first note", "second note"});
    const auto crit = extract_section(p.user, kCritique);
    ASSERT_TRUE(crit);
    const auto a = crit->find("Critique 1:\nfirst note");
    const auto b = crit->find("Critique 2:\nsecond note");
    ASSERT_NE(a, std::string::npos);
    ASSERT_NE(b, std::string::npos);
    EXPECT_LT(a, b);
}

TEST(GenerationPrompt, RequiresKnowledge) {
    auto item = item_with_knowledge();
    item.knowledge.clear();
    EXPECT_THROW(build_generation_prompt(item), ContractError);
}

TEST(GenerationReply, Parses) {
    const auto r = parse_generation_reply("category: incomplete_information\nanswer: Penicillin kills bacteria.");
    ASSERT_TRUE(r);
    EXPECT_EQ(r->category, HallucinationCategory::incomplete_information);
    EXPECT_EQ(r->answer, "Penicillin kills bacteria.");

    const auto multi = parse_generation_reply("Category: Mechanism and Pathway Misattribution\nAnswer: one\ntwo");
    ASSERT_TRUE(multi);
    EXPECT_EQ(multi->category, HallucinationCategory::mechanism_pathway_misattribution);
    EXPECT_EQ(multi->answer, "one\ntwo");
}

TEST(GenerationReply, RejectsMalformed) {
    EXPECT_FALSE(parse_generation_reply("I cannot help with that."));
    EXPECT_FALSE(parse_generation_reply("category: nonsense\nanswer: x"));
    EXPECT_FALSE(parse_generation_reply("category: incomplete_information\nanswer:   "));
}

TEST(JudgePrompt, NeverShowsKnowledge) {
    const auto p = build_judge_prompt("Q?", "first", "second");
    EXPECT_EQ(extract_section(p.user, kAnswerA), "first");
    EXPECT_EQ(extract_section(p.user, kAnswerB), "second");
    EXPECT_FALSE(extract_section(p.user, kKnowledge).has_value());
}

TEST(DetectionPrompt, ProtocolOptions) {
    const auto item = item_with_knowledge();
    const auto bin = build_detection_prompt(item.question, "ans", nullptr, Protocol::binary);
    EXPECT_EQ(bin.system.find("Not Sure"), std::string::npos);
    EXPECT_FALSE(extract_section(bin.user, kKnowledge));
    const auto ter = build_detection_prompt(item.question, "ans", &item.knowledge, Protocol::ternary);
    EXPECT_NE(ter.system.find("Not Sure"), std::string::npos);
    EXPECT_TRUE(extract_section(ter.user, kKnowledge));
    EXPECT_EQ(extract_section(ter.user, kAnswer), "ans");

    const std::vector<std::string> none;
    EXPECT_THROW(build_detection_prompt("q", "a", &none, Protocol::binary), ContractError);
}

TEST(DetectionPrompt, NormalizeChoice) {
    EXPECT_EQ(normalize_choice("Answer: **Yes**."), "yes");
    EXPECT_EQ(normalize_choice("  \"No\" "), "no");
    EXPECT_EQ(normalize_choice("answer: Not Sure"), "not sure");
    EXPECT_EQ(parse_protocol("ternary"), Protocol::ternary);
    EXPECT_THROW(parse_protocol("quaternary"), ParseError);
}

TEST(Jsonl, ParseCollectsErrors) {
    std::vector<JsonlError> bad;
    const auto rows = parse_jsonl("{\"a\":1}\n\nnot json\n{\"b\":2}\n", bad);
    ASSERT_EQ(rows.size(), 2u);
    EXPECT_EQ(rows[1].line, 4u);
    ASSERT_EQ(bad.size(), 1u);
    EXPECT_EQ(bad[0].line, 3u);
}

TEST(Jsonl, AtomicWriteAndStrictRead) {
    hbt::TempDir dir;
    const auto items = hbt::synthetic_corpus(3);
    write_file_atomic(dir / "x.jsonl", to_jsonl(items));
    EXPECT_FALSE(fs::exists(dir / "x.jsonl.tmp"));
    EXPECT_EQ(read_jsonl<QAItem>(dir / "x.jsonl"), items);
    write_file_atomic(dir / "bad.jsonl", "{\"id\":1}\n");
    EXPECT_THROW(read_jsonl<QAItem>(dir / "bad.jsonl"), ParseError);
    EXPECT_THROW(read_file(dir / "missing.jsonl"), Error);
}
