/// @file stats.hpp
/// @brief Category x difficulty histogram of a benchmark.
#pragma once

#include <array>
#include <cstdint>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include "hallubench/model.hpp"

namespace hallubench {

/// counts[category][difficulty] over easy/medium/hard.
struct BenchmarkHistogram {
    std::array<std::array<std::int64_t, 3>, 4> counts{};

    static std::size_t column(Difficulty d) {
        switch (d) {
        case Difficulty::easy: return 0;
        case Difficulty::medium: return 1;
        case Difficulty::hard: return 2;
        case Difficulty::failed: break;
        }
        throw ContractError("failed difficulty in a benchmark record");
    }

    void add(const HallucinationRecord& r) {
        ++counts[static_cast<std::size_t>(r.category)][column(r.difficulty)];
    }

    std::int64_t row_total(HallucinationCategory c) const {
        const auto& row = counts[static_cast<std::size_t>(c)];
        return row[0] + row[1] + row[2];
    }

    std::int64_t column_total(Difficulty d) const {
        std::int64_t s = 0;
        for (const auto& row : counts) s += row[column(d)];
        return s;
    }

    std::int64_t total() const {
        std::int64_t s = 0;
        for (auto c : kAllCategories) s += row_total(c);
        return s;
    }
};

inline BenchmarkHistogram histogram(const std::vector<HallucinationRecord>& records) {
    BenchmarkHistogram h;
    for (const auto& r : records) h.add(r);
    return h;
}

inline std::string percent(std::int64_t part, std::int64_t whole) {
    std::ostringstream ss;
    ss << std::fixed << std::setprecision(1) << (whole ? 100.0 * static_cast<double>(part) / whole : 0.0) << '%';
    return ss.str();
}

/// Rows are categories plus a total row; columns easy, medium, hard, total.
/// Each cell is "count (share of all records)".
inline std::string render_histogram(const BenchmarkHistogram& h) {
    const auto total = h.total();
    std::ostringstream ss;
    auto cell = [&](std::int64_t n) { return std::to_string(n) + " (" + percent(n, total) + ")"; };
    ss << std::left << std::setw(38) << "category" << std::right;
    for (auto d : kEmittedDifficulties) ss << std::setw(16) << to_string(d);
    ss << std::setw(16) << "total" << '\n';
    for (auto c : kAllCategories) {
        ss << std::left << std::setw(38) << category_info(c).display_name << std::right;
        for (auto d : kEmittedDifficulties)
            ss << std::setw(16) << cell(h.counts[static_cast<std::size_t>(c)][BenchmarkHistogram::column(d)]);
        ss << std::setw(16) << cell(h.row_total(c)) << '\n';
    }
    ss << std::left << std::setw(38) << "total" << std::right;
    for (auto d : kEmittedDifficulties) ss << std::setw(16) << cell(h.column_total(d));
    ss << std::setw(16) << cell(total) << '\n';
    return ss.str();
}

inline json histogram_json(const BenchmarkHistogram& h) {
    json j{{"total", h.total()}, {"categories", json::object()}, {"difficulty_totals", json::object()}};
    for (auto c : kAllCategories) {
        json row = json::object();
        for (auto d : kEmittedDifficulties)
            row[std::string(to_string(d))] = h.counts[static_cast<std::size_t>(c)][BenchmarkHistogram::column(d)];
        row["total"] = h.row_total(c);
        j["categories"][std::string(to_string(c))] = row;
    }
    for (auto d : kEmittedDifficulties) j["difficulty_totals"][std::string(to_string(d))] = h.column_total(d);
    return j;
}

} // namespace hallubench
