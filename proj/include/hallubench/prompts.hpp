/// @file prompts.hpp
/// @brief Prompt construction for generation, judging, critique, the
/// distinctness check and detection.
///
/// User prompts are laid out as bracketed sections ("[Question]" on its own
/// line, then the body). extract_section() reads them back, which is what the
/// scripted mock providers rely on.
#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "hallubench/errors.hpp"
#include "hallubench/model.hpp"
#include "hallubench/text.hpp"

namespace hallubench::prompts {

struct Prompt {
    std::string system;
    std::string user;
};

inline constexpr std::string_view kQuestion = "Question";
inline constexpr std::string_view kKnowledge = "Knowledge";
inline constexpr std::string_view kGroundTruth = "Ground Truth Answer";
inline constexpr std::string_view kCritique = "Previous Attempt Critique";
inline constexpr std::string_view kAnswer = "Answer";
inline constexpr std::string_view kAnswerA = "Answer A";
inline constexpr std::string_view kAnswerB = "Answer B";
inline constexpr std::string_view kCandidate = "Candidate Answer";
inline constexpr std::string_view kJudgeOutcome = "Judge Outcome";
inline constexpr std::string_view kInstructions = "Instructions";

inline void append_section(std::string& out, std::string_view name, std::string_view body) {
    if (!out.empty()) out += "\n\n";
    out += '[';
    out += name;
    out += "]\n";
    out += body;
}

/// Body of the section `name`, up to the next "[...]" header line.
inline std::optional<std::string> extract_section(std::string_view prompt, std::string_view name) {
    const std::string header = "[" + std::string(name) + "]";
    const auto lines = text::split_lines(prompt);
    std::size_t i = 0;
    while (i < lines.size() && lines[i] != header) ++i;
    if (i == lines.size()) return std::nullopt;
    std::string body;
    for (++i; i < lines.size(); ++i) {
        const auto line = lines[i];
        if (line.size() > 2 && line.front() == '[' && line.back() == ']' &&
            line.find('[', 1) == std::string_view::npos)
            break;
        if (!body.empty()) body += '\n';
        body += line;
    }
    return std::string(text::trim(body));
}

inline std::string knowledge_block(const std::vector<std::string>& passages) {
    std::string out;
    for (std::size_t i = 0; i < passages.size(); ++i) {
        if (i) out += '\n';
        out += "(" + std::to_string(i + 1) + ") " + passages[i];
    }
    return out;
}

// -----------------------------------------------------------------------------
// Generation
// -----------------------------------------------------------------------------

inline std::string generation_system_prompt() {
    std::string s =
        "You are building a benchmark for medical hallucination detection. Given a biomedical "
        "question, its reference knowledge and the correct answer, write one answer that sounds "
        "plausible and stays close to the correct answer in wording and style, but is factually "
        "wrong or unsupported.\n\n"
        "Choose the single hallucination category below that fits the question best.\n";
    for (auto c : kAllCategories) {
        const auto& info = category_info(c);
        s += "\n- ";
        s += info.token;
        s += " (";
        s += info.display_name;
        s += "): ";
        s += info.description;
        s += "\n  Example question: ";
        s += info.example_question;
        s += "\n  Example answer: ";
        s += info.example_answer;
    }
    s += "\n\nReply in exactly this format and nothing else:\n"
         "category: <one category token from the list>\n"
         "answer: <the hallucinated answer>";
    return s;
}

/// Prompt for one hallucination candidate. Critiques of earlier attempts are
/// appended verbatim, in order.
inline Prompt build_generation_prompt(const QAItem& item,
                                      const std::vector<std::string>& prior_feedback = {}) {
    if (item.knowledge.empty())
        throw ContractError("generation prompt for item " + item.id + " requires knowledge");
    Prompt p;
    p.system = generation_system_prompt();
    append_section(p.user, kQuestion, item.question);
    append_section(p.user, kKnowledge, knowledge_block(item.knowledge));
    append_section(p.user, kGroundTruth, item.ground_truth);
    if (!prior_feedback.empty()) {
        std::string crit;
        for (std::size_t i = 0; i < prior_feedback.size(); ++i) {
            if (i) crit += "\n\n";
            crit += "Critique " + std::to_string(i + 1) + ":\n" + prior_feedback[i];
        }
        append_section(p.user, kCritique, crit);
    }
    const auto words = text::word_count(item.ground_truth);
    append_section(p.user, kInstructions,
                   "Write a hallucinated answer of about " + std::to_string(words) +
                       " words (stay within 10% of the ground truth length). Pick one category "
                       "and follow the reply format." +
                       (prior_feedback.empty()
                            ? std::string()
                            : std::string(" Address every point raised in the critique.")));
    return p;
}

struct ParsedGeneration {
    HallucinationCategory category;
    std::string answer;
};

/// Parses "category: <token>\nanswer: <text>". The answer may span lines.
inline std::optional<ParsedGeneration> parse_generation_reply(std::string_view reply) {
    std::optional<HallucinationCategory> category;
    std::optional<std::string> answer;
    const auto lines = text::split_lines(reply);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        auto line = text::trim(lines[i]);
        if (!category && text::istarts_with(line, "category:")) {
            category = match_category(line.substr(9));
        } else if (!answer && text::istarts_with(line, "answer:")) {
            std::string body(text::trim(line.substr(7)));
            for (std::size_t k = i + 1; k < lines.size(); ++k) {
                if (text::istarts_with(text::trim(lines[k]), "category:")) break;
                body += '\n';
                body += lines[k];
            }
            answer = std::string(text::trim(body));
            break;
        }
    }
    if (!category || !answer || answer->empty()) return std::nullopt;
    return ParsedGeneration{*category, std::move(*answer)};
}

// -----------------------------------------------------------------------------
// Pairwise judging (no knowledge context is ever shown to judges)
// -----------------------------------------------------------------------------

inline Prompt build_judge_prompt(std::string_view question, std::string_view answer_a,
                                 std::string_view answer_b) {
    Prompt p;
    p.system =
        "You are a careful medical expert. You will see a question and two candidate answers. "
        "Decide which answer is more factually accurate. You have no reference material; rely on "
        "your own knowledge. Reply with a single letter: A or B.";
    append_section(p.user, kQuestion, question);
    append_section(p.user, kAnswerA, answer_a);
    append_section(p.user, kAnswerB, answer_b);
    append_section(p.user, kInstructions,
                   "Which answer is more factually accurate? Reply with exactly one letter, A or B.");
    return p;
}

inline constexpr std::string_view kJudgeReask =
    "Your reply could not be read. Reply with exactly one letter: A or B.";

// -----------------------------------------------------------------------------
// Critique (feedback for refinement)
// -----------------------------------------------------------------------------

inline Prompt build_critique_prompt(const QAItem& item, const CandidateAnswer& candidate,
                                    const QualityVerdict* verdict,
                                    const EntailmentResult* entailment) {
    Prompt p;
    p.system =
        "You review synthetic hallucinated answers for a medical detection benchmark. A good "
        "hallucinated answer is wrong but hard to tell apart from a correct one. Explain briefly "
        "why the candidate below is easy to detect. Cover two points: (1) wording and phrasing "
        "cues that give it away as fabricated, and (2) structural choices that could be changed "
        "so it reads like a natural expert answer. If it is too close in meaning to the ground "
        "truth, say what must change so that it is genuinely incorrect.";
    append_section(p.user, kQuestion, item.question);
    append_section(p.user, kGroundTruth, item.ground_truth);
    append_section(p.user, kCandidate, candidate.text);
    std::string outcome;
    if (verdict) {
        outcome += std::to_string(verdict->fooled_count) + " of " +
                   std::to_string(verdict->fooled.size()) +
                   " judges preferred the candidate over the ground truth.";
    }
    if (entailment) {
        if (!outcome.empty()) outcome += '\n';
        outcome += entailment->passes
                       ? "The candidate differs in meaning from the ground truth."
                       : "The candidate means the same as the ground truth and is not a "
                         "hallucination.";
    }
    if (!outcome.empty()) append_section(p.user, kJudgeOutcome, outcome);
    append_section(p.user, kInstructions, "Give concise, actionable feedback.");
    return p;
}

// -----------------------------------------------------------------------------
// LLM distinctness check
// -----------------------------------------------------------------------------

inline Prompt build_distinctness_prompt(std::string_view hallucinated, std::string_view ground_truth) {
    Prompt p;
    p.system =
        "You compare two answers to the same medical question. Decide whether they differ "
        "meaningfully in semantic content, ignoring differences in wording. Reply with exactly "
        "one word: different or same.";
    append_section(p.user, kAnswerA, hallucinated);
    append_section(p.user, kAnswerB, ground_truth);
    append_section(p.user, kInstructions, "Reply with exactly one word: different or same.");
    return p;
}

inline constexpr std::string_view kDistinctnessReask =
    "Your reply could not be read. Reply with exactly one word: different or same.";

// -----------------------------------------------------------------------------
// Detection
// -----------------------------------------------------------------------------

enum class Protocol { binary, ternary };

inline std::string_view to_string(Protocol p) { return p == Protocol::binary ? "binary" : "ternary"; }

inline Protocol parse_protocol(std::string_view s) {
    if (s == "binary") return Protocol::binary;
    if (s == "ternary") return Protocol::ternary;
    throw ParseError("unknown protocol: '" + std::string(s) + "'");
}

inline Prompt build_detection_prompt(std::string_view question, std::string_view answer,
                                     const std::vector<std::string>* knowledge,
                                     Protocol protocol) {
    if (knowledge && knowledge->empty())
        throw ContractError("detection prompt: knowledge requested but none available");
    Prompt p;
    p.system =
        "You are a medical expert checking answers for hallucinations. A hallucinated answer is "
        "plausible-sounding but factually incorrect, unsupported, or does not actually answer "
        "the question. Judge the answer to the question";
    p.system += knowledge ? " using the provided knowledge." : ".";
    if (protocol == Protocol::binary) {
        p.system +=
            "\n\nReply with exactly one of the following options:\n"
            "Yes - the answer is hallucinated\n"
            "No - the answer is not hallucinated\n"
            "Format: \"Answer: Yes\" or \"Answer: No\".";
    } else {
        p.system +=
            "\n\nReply with exactly one of the following options:\n"
            "Yes - the answer is hallucinated\n"
            "No - the answer is not hallucinated\n"
            "Not Sure - you are not fully confident either way\n"
            "Only give Yes or No when you are fully confident; otherwise choose Not Sure.\n"
            "Format: \"Answer: Yes\", \"Answer: No\" or \"Answer: Not Sure\".";
    }
    if (knowledge) append_section(p.user, kKnowledge, knowledge_block(*knowledge));
    append_section(p.user, kQuestion, question);
    append_section(p.user, kAnswer, answer);
    return p;
}

inline std::string detection_reask(Protocol protocol) {
    return protocol == Protocol::binary
               ? "Your reply could not be read. Reply with \"Answer: Yes\" or \"Answer: No\"."
               : "Your reply could not be read. Reply with \"Answer: Yes\", \"Answer: No\" or "
                 "\"Answer: Not Sure\".";
}

/// Lowercases, drops an "answer:" prefix, surrounding quotes/asterisks and a
/// trailing period. Used for the constrained one-token replies.
inline std::string normalize_choice(std::string_view raw) {
    std::string_view s = text::trim(raw);
    auto strip_decor = [](std::string_view v) {
        v = text::trim(v);
        while (!v.empty() && (v.front() == '*' || v.front() == '"' || v.front() == '\'')) v.remove_prefix(1);
        while (!v.empty() && (v.back() == '*' || v.back() == '"' || v.back() == '\'' || v.back() == '.'))
            v.remove_suffix(1);
        return text::trim(v);
    };
    s = strip_decor(s);
    if (text::istarts_with(s, "answer:")) s = strip_decor(s.substr(7));
    return text::lower(s);
}

} // namespace hallubench::prompts
