/// @file stats_test.cpp
/// @brief Difficulty by category histogram rendering.

#include <sstream>

#include <gtest/gtest.h>

#include "../support/fixtures.hpp"

using namespace hallubench;

namespace {

using Counts = std::array<std::array<int, 3>, 4>;

std::vector<HallucinationRecord> records_for(const Counts& counts) {
    std::vector<HallucinationRecord> out;
    int n = 0;
    for (std::size_t c = 0; c < 4; ++c)
        for (std::size_t d = 0; d < 3; ++d)
            for (int k = 0; k < counts[c][d]; ++k) {
                HallucinationRecord r;
                r.item_id = "r" + std::to_string(n++);
                r.hallucinated_answer = "x";
                r.category = kAllCategories[c];
                r.difficulty = kEmittedDifficulties[d];
                r.attempts_made = 1;
                r.fallback_used = d == 0;
                out.push_back(r);
            }
    return out;
}

std::vector<std::string> lines_of(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream in(s);
    for (std::string l; std::getline(in, l);) out.push_back(l);
    return out;
}

/// Cells after the label, as "count (pct)" strings.
std::vector<std::string> cells(const std::string& line) {
    std::vector<std::string> toks;
    std::istringstream in(line);
    for (std::string t; in >> t;) toks.push_back(t);
    std::vector<std::string> out;
    for (std::size_t i = toks.size() - 8; i < toks.size(); i += 2) out.push_back(toks[i] + " " + toks[i + 1]);
    return out;
}

std::string pct_cell(int n, int total) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%d (%.1f%%)", n, total ? 100.0 * n / total : 0.0);
    return buf;
}

} // namespace

TEST(Stats, SmallExampleRowTotals) {
    Counts counts{};
    counts[0] = {1, 1, 2};
    const auto h = histogram(records_for(counts));
    EXPECT_EQ(h.row_total(HallucinationCategory::misinterpretation_of_question), 4);
    EXPECT_EQ(h.column_total(Difficulty::easy), 1);
    EXPECT_EQ(h.column_total(Difficulty::hard), 2);
}

TEST(Stats, CmdStatsReproducesCounts) {
    const Counts counts{{{3, 0, 5}, {1, 2, 0}, {0, 0, 0}, {4, 1, 7}}};
    hbt::TempDir dir;
    write_file_atomic(dir / "b.jsonl", to_jsonl(records_for(counts)));
    int total = 0;
    for (const auto& row : counts)
        for (int v : row) total += v;

    std::ostringstream table;
    ASSERT_EQ(cmd_stats(dir / "b.jsonl", false, table), 0);
    const auto ls = lines_of(table.str());
    ASSERT_EQ(ls.size(), 6u);
    EXPECT_NE(ls[0].find("easy"), std::string::npos);
    std::array<int, 3> col{};
    for (std::size_t c = 0; c < 4; ++c) {
        EXPECT_EQ(ls[c + 1].rfind(std::string(category_info(kAllCategories[c]).display_name), 0), 0u);
        const auto got = cells(ls[c + 1]);
        int row = 0;
        for (std::size_t d = 0; d < 3; ++d) {
            EXPECT_EQ(got[d], pct_cell(counts[c][d], total));
            row += counts[c][d];
            col[d] += counts[c][d];
        }
        EXPECT_EQ(got[3], pct_cell(row, total));
    }
    const auto last = cells(ls[5]);
    for (std::size_t d = 0; d < 3; ++d) EXPECT_EQ(last[d], pct_cell(col[d], total));
    EXPECT_EQ(last[3], pct_cell(total, total));

    std::ostringstream js;
    ASSERT_EQ(cmd_stats(dir / "b.jsonl", true, js), 0);
    const auto j = json::parse(js.str());
    EXPECT_EQ(j["total"], total);
    EXPECT_EQ(j["categories"]["methodological_evidence_fabrication"]["hard"], 7);
    EXPECT_EQ(j["categories"]["incomplete_information"]["total"], 3);
    EXPECT_EQ(j["difficulty_totals"]["easy"], 8);
}

TEST(Stats, BadInputIsError) {
    hbt::TempDir dir;
    std::ostringstream os;
    EXPECT_EQ(cmd_stats(dir / "missing.jsonl", false, os), 1);
}
