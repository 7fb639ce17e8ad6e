/// @file model.hpp
/// @brief Domain types shared by the pipeline, the detection harness and the
/// semantic analysis, plus their JSON mappings.
///
/// JSON field names are snake_case and identical to the member names; record
/// streams (QA items, hallucination records) are one object per line.
#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "hallubench/errors.hpp"
#include "hallubench/text.hpp"

namespace hallubench {

using json = nlohmann::json;

// -----------------------------------------------------------------------------
// Hallucination categories
// -----------------------------------------------------------------------------

enum class HallucinationCategory {
    misinterpretation_of_question,
    incomplete_information,
    mechanism_pathway_misattribution,
    methodological_evidence_fabrication,
};

inline constexpr std::array<HallucinationCategory, 4> kAllCategories{
    HallucinationCategory::misinterpretation_of_question,
    HallucinationCategory::incomplete_information,
    HallucinationCategory::mechanism_pathway_misattribution,
    HallucinationCategory::methodological_evidence_fabrication,
};

struct CategoryInfo {
    std::string_view token;
    std::string_view display_name;
    std::string_view description;
    std::string_view example_question;
    std::string_view example_answer;
};

inline const CategoryInfo& category_info(HallucinationCategory c) {
    static const std::array<CategoryInfo, 4> table{{
        {"misinterpretation_of_question", "Misinterpretation of Question",
         "Misunderstanding the question, leading to an irrelevant response.",
         "Does high-dose vitamin C therapy improve survival rates in patients with sepsis?",
         "Vitamin C is water-soluble vitamin that plays a role in immune function and collagen "
         "synthesis."},
        {"incomplete_information", "Incomplete Information",
         "Stays on-topic but omits the essential details needed to fully answer the question.",
         "How does penicillin treat strep throat?", "Penicillin kills bacteria."},
        {"mechanism_pathway_misattribution", "Mechanism and Pathway Misattribution",
         "False attribution of biological mechanisms, molecular pathways, or disease processes "
         "that contradicts established medical knowledge.",
         "What is the primary mechanism of action of aspirin in reducing inflammation?",
         "Aspirin primarily reduces inflammation by blocking calcium channels in immune cells, "
         "which prevents the release of histamine and directly suppresses T-cell activation."},
        {"methodological_evidence_fabrication", "Methodological and Evidence Fabrication",
         "Inventing false research methods, statistical data, or specific clinical outcomes.",
         "What is the success rate of ACL reconstruction surgery?",
         "Recent clinical trials using quantum-guided surgical technique showed 99.7% success "
         "rate across 10,543 patients with zero complications when using gold-infused synthetic "
         "grafts."},
    }};
    return table[static_cast<std::size_t>(c)];
}

inline std::string_view to_string(HallucinationCategory c) { return category_info(c).token; }

/// Strict parse of the closed token set.
inline HallucinationCategory parse_category(std::string_view token) {
    for (auto c : kAllCategories)
        if (category_info(c).token == token) return c;
    throw ParseError("unknown hallucination category: '" + std::string(token) + "'");
}

/// Lenient parse for model replies: accepts the token or the display name in
/// any case, with spaces or hyphens in place of underscores.
inline std::optional<HallucinationCategory> match_category(std::string_view reply) {
    std::string norm;
    for (char ch : text::trim(reply)) {
        const auto c = static_cast<unsigned char>(ch);
        if (std::isalnum(c))
            norm += static_cast<char>(std::tolower(c));
        else if (!norm.empty() && norm.back() != '_')
            norm += '_';
    }
    while (!norm.empty() && norm.back() == '_') norm.pop_back();
    for (auto c : kAllCategories) {
        const auto& info = category_info(c);
        std::string display;
        for (char ch : info.display_name) {
            const auto u = static_cast<unsigned char>(ch);
            if (std::isalnum(u))
                display += static_cast<char>(std::tolower(u));
            else if (!display.empty() && display.back() != '_')
                display += '_';
        }
        if (norm == info.token || norm == display) return c;
    }
    return std::nullopt;
}

// -----------------------------------------------------------------------------
// Difficulty
// -----------------------------------------------------------------------------

enum class Difficulty { easy, medium, hard, failed };

inline constexpr std::array<Difficulty, 3> kEmittedDifficulties{
    Difficulty::easy, Difficulty::medium, Difficulty::hard};

inline std::string_view to_string(Difficulty d) {
    switch (d) {
    case Difficulty::easy: return "easy";
    case Difficulty::medium: return "medium";
    case Difficulty::hard: return "hard";
    case Difficulty::failed: return "failed";
    }
    return "failed";
}

inline Difficulty parse_difficulty(std::string_view s) {
    if (s == "easy") return Difficulty::easy;
    if (s == "medium") return Difficulty::medium;
    if (s == "hard") return Difficulty::hard;
    if (s == "failed") return Difficulty::failed;
    throw ParseError("unknown difficulty: '" + std::string(s) + "'");
}

/// Difficulty tier from how many of k discriminators were fooled:
/// all -> hard, exactly one -> easy, none -> failed, anything between -> medium.
inline Difficulty grade_difficulty(int fooled_count, int k) {
    if (k < 2 || fooled_count < 0 || fooled_count > k)
        throw ContractError("grade_difficulty: need k >= 2 and 0 <= fooled_count <= k (got " +
                            std::to_string(fooled_count) + ", " + std::to_string(k) + ")");
    if (fooled_count == 0) return Difficulty::failed;
    if (fooled_count == k) return Difficulty::hard;
    if (fooled_count == 1) return Difficulty::easy;
    return Difficulty::medium;
}

// -----------------------------------------------------------------------------
// Records
// -----------------------------------------------------------------------------

struct QAItem {
    std::string id;
    std::string question;
    std::string ground_truth;
    std::vector<std::string> knowledge;
    std::vector<std::string> tags;
    std::string split;

    bool operator==(const QAItem&) const = default;

    /// Throws ContractError when id, question or ground_truth is blank.
    void validate() const {
        if (text::trim(id).empty()) throw ContractError("QAItem: empty id");
        if (text::trim(question).empty()) throw ContractError("QAItem " + id + ": empty question");
        if (text::trim(ground_truth).empty())
            throw ContractError("QAItem " + id + ": empty ground_truth");
    }
};

struct SamplingParams {
    double temperature = 0.5;
    double top_p = 0.95;
    int max_tokens = 512;
    std::optional<std::int64_t> seed;

    bool operator==(const SamplingParams&) const = default;

    void validate() const {
        if (!(temperature >= 0.0 && temperature <= 1.0))
            throw ContractError("SamplingParams: temperature outside [0,1]");
        if (!(top_p > 0.0 && top_p <= 1.0))
            throw ContractError("SamplingParams: top_p outside (0,1]");
        if (max_tokens <= 0) throw ContractError("SamplingParams: max_tokens must be positive");
    }
};

struct CandidateAnswer {
    std::string text;
    HallucinationCategory category = HallucinationCategory::misinterpretation_of_question;
    int attempt_index = 1;
    bool refined = false;
    SamplingParams sampling;
    double length_ratio = 0.0;

    bool operator==(const CandidateAnswer&) const = default;
};

struct QualityVerdict {
    std::vector<bool> fooled;
    int fooled_count = 0;
    Difficulty difficulty = Difficulty::failed;

    bool operator==(const QualityVerdict&) const = default;

    static QualityVerdict from_votes(std::vector<bool> votes) {
        QualityVerdict v;
        v.fooled = std::move(votes);
        for (bool b : v.fooled) v.fooled_count += b ? 1 : 0;
        v.difficulty = grade_difficulty(v.fooled_count, static_cast<int>(v.fooled.size()));
        return v;
    }
};

struct EntailmentResult {
    double forward = 0.0;
    double backward = 0.0;
    double score = 0.0;
    bool passes = false;

    bool operator==(const EntailmentResult&) const = default;

    /// score = min(forward, backward); passes iff score < tau.
    static EntailmentResult from_scores(double forward, double backward, double tau) {
        EntailmentResult r;
        r.forward = forward;
        r.backward = backward;
        r.score = std::fmin(forward, backward);
        r.passes = r.score < tau;
        return r;
    }
};

struct HallucinationRecord {
    std::string item_id;
    std::string hallucinated_answer;
    HallucinationCategory category = HallucinationCategory::misinterpretation_of_question;
    Difficulty difficulty = Difficulty::easy;
    bool fallback_used = false;
    int attempts_made = 0;
    std::optional<EntailmentResult> entailment;
    std::vector<std::string> feedback_log;
    std::vector<CandidateAnswer> rejected_candidates;

    bool operator==(const HallucinationRecord&) const = default;

    void validate(int attempt_budget) const {
        if (difficulty == Difficulty::failed)
            throw ContractError("HallucinationRecord " + item_id + ": failed difficulty emitted");
        if (fallback_used && difficulty != Difficulty::easy)
            throw ContractError("HallucinationRecord " + item_id + ": fallback must be easy");
        if (!fallback_used && !(entailment && entailment->passes))
            throw ContractError("HallucinationRecord " + item_id +
                                ": accepted answer without passing entailment");
        if (attempts_made < 1 || attempts_made > attempt_budget)
            throw ContractError("HallucinationRecord " + item_id + ": attempts_made out of budget");
    }
};

enum class DetectionLabel { yes_hallucinated, not_hallucinated, not_sure };

inline std::string_view to_string(DetectionLabel l) {
    switch (l) {
    case DetectionLabel::yes_hallucinated: return "yes_hallucinated";
    case DetectionLabel::not_hallucinated: return "not_hallucinated";
    case DetectionLabel::not_sure: return "not_sure";
    }
    return "not_sure";
}

inline DetectionLabel parse_detection_label(std::string_view s) {
    if (s == "yes_hallucinated") return DetectionLabel::yes_hallucinated;
    if (s == "not_hallucinated") return DetectionLabel::not_hallucinated;
    if (s == "not_sure") return DetectionLabel::not_sure;
    throw ParseError("unknown detection label: '" + std::string(s) + "'");
}

struct DetectionVerdict {
    DetectionLabel label = DetectionLabel::not_sure;
    std::string raw;

    bool operator==(const DetectionVerdict&) const = default;
};

/// Detector evaluation result. Abstentions are excluded from the confusion
/// matrix; `invalid` counts unparseable replies, which are already folded into
/// either the confusion matrix (binary) or `abstained` (ternary).
struct MetricsReport {
    std::int64_t tp = 0, fp = 0, tn = 0, fn = 0, abstained = 0;
    std::int64_t invalid = 0;
    double precision = 0.0, recall = 0.0, f1 = 0.0, accuracy = 0.0;
    double response_rate = 0.0;
    std::vector<std::string> degenerate;
    std::map<std::string, MetricsReport> strata;

    std::int64_t answered() const { return tp + fp + tn + fn; }
    std::int64_t total() const { return answered() + abstained; }

    bool operator==(const MetricsReport&) const = default;
};

// -----------------------------------------------------------------------------
// JSON mappings
// -----------------------------------------------------------------------------

inline void to_json(json& j, HallucinationCategory c) { j = std::string(to_string(c)); }
inline void from_json(const json& j, HallucinationCategory& c) {
    c = parse_category(j.get<std::string>());
}

inline void to_json(json& j, Difficulty d) { j = std::string(to_string(d)); }
inline void from_json(const json& j, Difficulty& d) { d = parse_difficulty(j.get<std::string>()); }

inline void to_json(json& j, DetectionLabel l) { j = std::string(to_string(l)); }
inline void from_json(const json& j, DetectionLabel& l) {
    l = parse_detection_label(j.get<std::string>());
}

inline void to_json(json& j, const QAItem& q) {
    j = json{{"id", q.id},           {"question", q.question}, {"ground_truth", q.ground_truth},
             {"knowledge", q.knowledge}, {"tags", q.tags},      {"split", q.split}};
}
inline void from_json(const json& j, QAItem& q) {
    j.at("id").get_to(q.id);
    j.at("question").get_to(q.question);
    j.at("ground_truth").get_to(q.ground_truth);
    q.knowledge = j.value("knowledge", std::vector<std::string>{});
    q.tags = j.value("tags", std::vector<std::string>{});
    q.split = j.value("split", std::string{});
}

inline void to_json(json& j, const SamplingParams& p) {
    j = json{{"temperature", p.temperature},
             {"top_p", p.top_p},
             {"max_tokens", p.max_tokens},
             {"seed", p.seed ? json(*p.seed) : json(nullptr)}};
}
inline void from_json(const json& j, SamplingParams& p) {
    j.at("temperature").get_to(p.temperature);
    j.at("top_p").get_to(p.top_p);
    j.at("max_tokens").get_to(p.max_tokens);
    if (auto it = j.find("seed"); it != j.end() && !it->is_null())
        p.seed = it->get<std::int64_t>();
    else
        p.seed.reset();
}

inline void to_json(json& j, const CandidateAnswer& c) {
    j = json{{"text", c.text},       {"category", c.category}, {"attempt_index", c.attempt_index},
             {"refined", c.refined}, {"sampling", c.sampling}, {"length_ratio", c.length_ratio}};
}
inline void from_json(const json& j, CandidateAnswer& c) {
    j.at("text").get_to(c.text);
    j.at("category").get_to(c.category);
    j.at("attempt_index").get_to(c.attempt_index);
    j.at("refined").get_to(c.refined);
    j.at("sampling").get_to(c.sampling);
    j.at("length_ratio").get_to(c.length_ratio);
}

inline void to_json(json& j, const QualityVerdict& v) {
    j = json{{"fooled", v.fooled}, {"fooled_count", v.fooled_count}, {"difficulty", v.difficulty}};
}
inline void from_json(const json& j, QualityVerdict& v) {
    j.at("fooled").get_to(v.fooled);
    j.at("fooled_count").get_to(v.fooled_count);
    j.at("difficulty").get_to(v.difficulty);
}

inline void to_json(json& j, const EntailmentResult& e) {
    j = json{{"forward", e.forward}, {"backward", e.backward}, {"score", e.score},
             {"passes", e.passes}};
}
inline void from_json(const json& j, EntailmentResult& e) {
    j.at("forward").get_to(e.forward);
    j.at("backward").get_to(e.backward);
    j.at("score").get_to(e.score);
    j.at("passes").get_to(e.passes);
}

inline void to_json(json& j, const HallucinationRecord& r) {
    j = json{{"item_id", r.item_id},
             {"hallucinated_answer", r.hallucinated_answer},
             {"category", r.category},
             {"difficulty", r.difficulty},
             {"fallback_used", r.fallback_used},
             {"attempts_made", r.attempts_made},
             {"entailment", r.entailment ? json(*r.entailment) : json(nullptr)},
             {"feedback_log", r.feedback_log},
             {"rejected_candidates", r.rejected_candidates}};
}
inline void from_json(const json& j, HallucinationRecord& r) {
    j.at("item_id").get_to(r.item_id);
    j.at("hallucinated_answer").get_to(r.hallucinated_answer);
    j.at("category").get_to(r.category);
    j.at("difficulty").get_to(r.difficulty);
    j.at("fallback_used").get_to(r.fallback_used);
    j.at("attempts_made").get_to(r.attempts_made);
    if (auto it = j.find("entailment"); it != j.end() && !it->is_null())
        r.entailment = it->get<EntailmentResult>();
    else
        r.entailment.reset();
    r.feedback_log = j.value("feedback_log", std::vector<std::string>{});
    r.rejected_candidates = j.value("rejected_candidates", std::vector<CandidateAnswer>{});
}

inline void to_json(json& j, const DetectionVerdict& v) {
    j = json{{"label", v.label}, {"raw", v.raw}};
}
inline void from_json(const json& j, DetectionVerdict& v) {
    j.at("label").get_to(v.label);
    j.at("raw").get_to(v.raw);
}

inline void to_json(json& j, const MetricsReport& m) {
    j = json{{"tp", m.tp},
             {"fp", m.fp},
             {"tn", m.tn},
             {"fn", m.fn},
             {"abstained", m.abstained},
             {"invalid", m.invalid},
             {"precision", m.precision},
             {"recall", m.recall},
             {"f1", m.f1},
             {"accuracy", m.accuracy},
             {"response_rate", m.response_rate},
             {"degenerate", m.degenerate},
             {"strata", json::object()}};
    for (const auto& [key, sub] : m.strata) j["strata"][key] = sub;
}
inline void from_json(const json& j, MetricsReport& m) {
    j.at("tp").get_to(m.tp);
    j.at("fp").get_to(m.fp);
    j.at("tn").get_to(m.tn);
    j.at("fn").get_to(m.fn);
    j.at("abstained").get_to(m.abstained);
    m.invalid = j.value("invalid", std::int64_t{0});
    j.at("precision").get_to(m.precision);
    j.at("recall").get_to(m.recall);
    j.at("f1").get_to(m.f1);
    j.at("accuracy").get_to(m.accuracy);
    j.at("response_rate").get_to(m.response_rate);
    m.degenerate = j.value("degenerate", std::vector<std::string>{});
    m.strata.clear();
    if (auto it = j.find("strata"); it != j.end())
        for (const auto& [key, sub] : it->items()) m.strata[key] = sub.get<MetricsReport>();
}

} // namespace hallubench
