/// @file doclint.hpp
/// @brief Checks that the reference-value document lists every expected number
/// on a marked, non-target row.
#pragma once

#include <sstream>
#include <string>
#include <vector>

namespace hbt {

struct ExpectedRow {
    std::string label;
    std::vector<std::string> values;
};

inline const std::vector<ExpectedRow>& expected_reference_rows() {
    static const std::vector<ExpectedRow> rows{
        {"Cosine similarity", {"0.715", "0.696"}},
        {"Euclidean distance", {"0.714", "0.750"}},
        {"ROUGE-1 F1", {"0.358", "0.319"}},
        {"| off |", {"0.737"}},
        {"| on |", {"0.877"}},
    };
    return rows;
}

inline constexpr const char* kReferenceMarker = "`[reference]`";
inline constexpr const char* kNotTarget = "not a test target";

/// Empty when the document passes; otherwise one message per problem.
inline std::vector<std::string> lint_reference_doc(const std::string& doc) {
    std::vector<std::string> problems;
    std::vector<std::string> lines;
    std::istringstream in(doc);
    for (std::string l; std::getline(in, l);) lines.push_back(l);
    for (const auto& row : expected_reference_rows()) {
        const std::string* hit = nullptr;
        for (const auto& l : lines)
            if (l.find(row.label) != std::string::npos && l.rfind("|", 0) == 0) hit = &l;
        if (!hit) {
            problems.push_back("missing row '" + row.label + "'");
            continue;
        }
        for (const auto& v : row.values)
            if (hit->find("| " + v + " |") == std::string::npos)
                problems.push_back("row '" + row.label + "' lacks value " + v);
        if (hit->find(kReferenceMarker) == std::string::npos)
            problems.push_back("row '" + row.label + "' lacks the reference marker");
        if (hit->find(kNotTarget) == std::string::npos)
            problems.push_back("row '" + row.label + "' lacks the not-a-test-target note");
    }
    if (doc.find("**not a test target**") == std::string::npos)
        problems.push_back("missing the document-level not-a-test-target note");
    return problems;
}

} // namespace hbt
