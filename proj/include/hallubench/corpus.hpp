/// @file corpus.hpp
/// @brief Loading QA corpora: native QAItem JSONL, or PubMedQA exports
/// (original dict-of-rows JSON, Hugging Face rows, JSONL).
#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hallubench/errors.hpp"
#include "hallubench/jsonl.hpp"
#include "hallubench/model.hpp"

namespace hallubench {

struct RowError {
    std::string where; ///< "line 3" or "key 12345"
    std::string reason;
};

inline void to_json(json& j, const RowError& e) { j = json{{"where", e.where}, {"reason", e.reason}}; }

struct CorpusLoad {
    std::vector<QAItem> items;
    std::vector<RowError> errors;
};

namespace detail {

/// Case-insensitive key lookup (PubMedQA uses QUESTION, HF uses question).
inline const json* find_ci(const json& obj, std::initializer_list<const char*> keys) {
    if (!obj.is_object()) return nullptr;
    for (const char* key : keys)
        for (auto it = obj.begin(); it != obj.end(); ++it)
            if (text::lower(it.key()) == text::lower(key)) return &it.value();
    return nullptr;
}

inline std::vector<std::string> string_list(const json* v) {
    std::vector<std::string> out;
    if (!v || v->is_null()) return out;
    if (v->is_string()) {
        out.push_back(v->get<std::string>());
        return out;
    }
    if (!v->is_array()) throw ParseError("expected a list of strings");
    for (const auto& e : *v) out.push_back(e.get<std::string>());
    return out;
}

inline bool looks_native(const json& row) { return row.is_object() && row.contains("ground_truth"); }

inline QAItem from_pubmedqa(const json& row, const std::string& fallback_id, const std::string& split) {
    QAItem item;
    if (const json* id = find_ci(row, {"pubid", "id"}))
        item.id = id->is_string() ? id->get<std::string>() : id->dump();
    else
        item.id = fallback_id;
    const json* q = find_ci(row, {"question"});
    if (!q || !q->is_string()) throw ParseError("missing question");
    item.question = q->get<std::string>();
    const json* a = find_ci(row, {"long_answer"});
    if (!a || !a->is_string()) throw ParseError("missing long_answer");
    item.ground_truth = a->get<std::string>();
    const json* ctx = find_ci(row, {"contexts", "context"});
    const json* mesh = find_ci(row, {"meshes", "mesh_terms", "mesh-terms"});
    if (ctx && ctx->is_object()) {
        if (!mesh) mesh = find_ci(*ctx, {"meshes"});
        ctx = find_ci(*ctx, {"contexts"});
    }
    item.knowledge = string_list(ctx);
    item.tags = string_list(mesh);
    if (const json* s = find_ci(row, {"split"}); s && s->is_string())
        item.split = s->get<std::string>();
    else
        item.split = split;
    return item;
}

inline QAItem parse_row(const json& row, const std::string& fallback_id, const std::string& split) {
    if (!row.is_object()) throw ParseError("row is not a JSON object");
    if (looks_native(row)) return row.get<QAItem>();
    return from_pubmedqa(row, fallback_id, split);
}

} // namespace detail

/// Malformed rows (and duplicate ids) are collected into `errors`; valid rows
/// proceed. Throws ParseError when no row is valid.
inline CorpusLoad load_corpus(const fs::path& path, const std::string& default_split = "labeled") {
    const std::string contents = read_file(path);
    CorpusLoad out;
    std::set<std::string> seen;

    auto accept = [&](const json& row, const std::string& where, const std::string& fallback_id) {
        try {
            QAItem item = detail::parse_row(row, fallback_id, default_split);
            item.validate();
            if (!seen.insert(item.id).second) throw ParseError("duplicate id '" + item.id + "'");
            out.items.push_back(std::move(item));
        } catch (const Error& e) {
            out.errors.push_back({where, e.what()});
        } catch (const json::exception& e) {
            out.errors.push_back({where, e.what()});
        }
    };

    std::optional<json> whole;
    try {
        whole = json::parse(contents);
    } catch (const json::parse_error&) {
    }

    if (whole && whole->is_array()) {
        for (std::size_t i = 0; i < whole->size(); ++i)
            accept((*whole)[i], "index " + std::to_string(i), "row" + std::to_string(i + 1));
    } else if (whole && whole->is_object() && !whole->contains("question") && !whole->contains("QUESTION") &&
               !detail::looks_native(*whole)) {
        for (auto it = whole->begin(); it != whole->end(); ++it) accept(it.value(), "key " + it.key(), it.key());
    } else {
        std::vector<JsonlError> bad;
        for (const auto& row : parse_jsonl(contents, bad))
            accept(row.value, "line " + std::to_string(row.line), "line" + std::to_string(row.line));
        for (const auto& b : bad) out.errors.push_back({"line " + std::to_string(b.line), b.reason});
    }
    if (out.items.empty())
        throw ParseError(path.string() + ": no valid QA rows (" + std::to_string(out.errors.size()) + " errors)");
    return out;
}

} // namespace hallubench
