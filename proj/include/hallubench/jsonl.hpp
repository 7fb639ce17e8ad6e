/// @file jsonl.hpp
/// @brief JSONL streams and crash-safe file output.
#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hallubench/errors.hpp"
#include "hallubench/text.hpp"

namespace hallubench {

namespace fs = std::filesystem;

inline std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

/// Writes `contents` to a sibling temp file, then renames it over `path`, so
/// a killed process never leaves a truncated artifact under the final name.
inline void write_file_atomic(const fs::path& path, const std::string& contents) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot write " + tmp.string());
        out << contents;
        out.flush();
        if (!out) throw Error("write failed for " + tmp.string());
    }
    fs::rename(tmp, path);
}

struct JsonlRow {
    std::size_t line = 0;
    nlohmann::json value;
};

struct JsonlError {
    std::size_t line = 0;
    std::string reason;
};

/// Parses one JSON value per non-blank line; bad lines go to `errors`.
inline std::vector<JsonlRow> parse_jsonl(const std::string& contents,
                                         std::vector<JsonlError>& errors) {
    std::vector<JsonlRow> rows;
    std::size_t line_no = 0;
    for (std::string_view line : text::split_lines(contents)) {
        ++line_no;
        if (text::trim(line).empty()) continue;
        try {
            rows.push_back({line_no, nlohmann::json::parse(line)});
        } catch (const nlohmann::json::parse_error& e) {
            errors.push_back({line_no, e.what()});
        }
    }
    return rows;
}

/// Strict reader for record streams the engine itself produced.
template <typename T>
std::vector<T> read_jsonl(const fs::path& path) {
    std::vector<JsonlError> errors;
    auto rows = parse_jsonl(read_file(path), errors);
    if (!errors.empty())
        throw ParseError(path.string() + ":" + std::to_string(errors.front().line) + ": " +
                         errors.front().reason);
    std::vector<T> out;
    out.reserve(rows.size());
    for (auto& row : rows) {
        try {
            out.push_back(row.value.template get<T>());
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(path.string() + ":" + std::to_string(row.line) + ": " + e.what());
        }
    }
    return out;
}

template <typename T>
std::string to_jsonl(const std::vector<T>& values) {
    std::string out;
    for (const auto& v : values) {
        out += nlohmann::json(v).dump();
        out += '\n';
    }
    return out;
}

} // namespace hallubench
