/// @file semantic.hpp
/// @brief Entailment clustering of candidate answers and their proximity to
/// the ground truth.
#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <boost/math/distributions/students_t.hpp>

#include "hallubench/errors.hpp"
#include "hallubench/model.hpp"
#include "hallubench/provider.hpp"
#include "hallubench/quality.hpp"
#include "hallubench/text.hpp"
#include "hallubench/vecmath.hpp"

namespace hallubench {

// -----------------------------------------------------------------------------
// Pairwise metrics
// -----------------------------------------------------------------------------

/// Unigram-overlap F1 with clipped counts over lowercase, punctuation-stripped
/// whitespace tokens. 0 when either side has no tokens.
inline double rouge1_f1(std::string_view candidate, std::string_view reference) {
    const auto cand = text::normalized_tokens(candidate);
    const auto ref = text::normalized_tokens(reference);
    if (cand.empty() || ref.empty()) return 0.0;
    std::map<std::string_view, std::int64_t> ref_counts;
    for (const auto& t : ref) ++ref_counts[t];
    std::int64_t overlap = 0;
    for (const auto& t : cand) {
        auto it = ref_counts.find(t);
        if (it != ref_counts.end() && it->second > 0) {
            --it->second;
            ++overlap;
        }
    }
    if (overlap == 0) return 0.0;
    const double p = static_cast<double>(overlap) / static_cast<double>(cand.size());
    const double r = static_cast<double>(overlap) / static_cast<double>(ref.size());
    return 2.0 * p * r / (p + r);
}

struct VectorMetrics {
    double cosine = 0.0;
    double euclidean = 0.0;
};

inline VectorMetrics vector_metrics(std::span<const double> u, std::span<const double> v) {
    return {cosine_similarity(u, v), euclidean_distance(u, v)};
}

// -----------------------------------------------------------------------------
// Clustering
// -----------------------------------------------------------------------------

struct Cluster {
    int id = 0;
    std::vector<std::size_t> member_indices;
    std::size_t representative_index = 0;
    bool contains_ground_truth = false;
    double fooled_fraction = 0.0;
};

inline void to_json(json& j, const Cluster& c) {
    j = json{{"id", c.id},
             {"member_indices", c.member_indices},
             {"representative_index", c.representative_index},
             {"contains_ground_truth", c.contains_ground_truth},
             {"fooled_fraction", c.fooled_fraction}};
}

/// Greedy representative clustering over indices [0, n): each index joins the
/// first cluster whose representative it is `equivalent` to, otherwise opens a
/// new cluster. `equivalent(i, rep)` is only asked against representatives.
inline std::vector<Cluster> cluster_greedy(std::size_t n,
                                           const std::function<bool(std::size_t, std::size_t)>& equivalent) {
    std::vector<Cluster> clusters;
    for (std::size_t i = 0; i < n; ++i) {
        bool placed = false;
        for (auto& c : clusters) {
            if (equivalent(i, c.representative_index)) {
                c.member_indices.push_back(i);
                placed = true;
                break;
            }
        }
        if (!placed) {
            Cluster c;
            c.id = static_cast<int>(clusters.size());
            c.representative_index = i;
            c.member_indices.push_back(i);
            clusters.push_back(std::move(c));
        }
    }
    return clusters;
}

/// Mutual entailment: min of both directions at or above the threshold.
inline bool mutually_entail(Provider& nli, std::string_view a, std::string_view b, double threshold) {
    return std::fmin(nli_entail(nli, a, b), nli_entail(nli, b, a)) >= threshold;
}

/// Clusters `responses` by mutual entailment, in input order, then marks the
/// first cluster whose representative mutually entails the ground truth.
inline std::vector<Cluster> cluster_by_entailment(const std::vector<std::string>& responses,
                                                  std::string_view ground_truth, Provider& nli,
                                                  double tau_cluster) {
    if (responses.empty()) throw ContractError("cluster_by_entailment: no responses");
    if (!(tau_cluster > 0.0 && tau_cluster < 1.0)) throw ContractError("tau_cluster must lie in (0,1)");
    auto clusters = cluster_greedy(responses.size(), [&](std::size_t i, std::size_t rep) {
        return mutually_entail(nli, responses[i], responses[rep], tau_cluster);
    });
    for (auto& c : clusters) {
        if (mutually_entail(nli, ground_truth, responses[c.representative_index], tau_cluster)) {
            c.contains_ground_truth = true;
            break;
        }
    }
    return clusters;
}

/// Sets each cluster's fooled_fraction from per-response labels.
inline void assign_fooled(std::vector<Cluster>& clusters, const std::vector<bool>& fooled) {
    for (auto& c : clusters) {
        std::size_t k = 0;
        for (auto i : c.member_indices) {
            if (i >= fooled.size()) throw ContractError("fooled labels shorter than response list");
            k += fooled[i] ? 1 : 0;
        }
        c.fooled_fraction = c.member_indices.empty()
                                ? 0.0
                                : static_cast<double>(k) / static_cast<double>(c.member_indices.size());
    }
}

// -----------------------------------------------------------------------------
// Proximity
// -----------------------------------------------------------------------------

/// Metrics of one response against the ground truth.
struct MemberMetrics {
    double cosine = 0.0;
    double euclidean = 0.0;
    double rouge1_f1 = 0.0;
};

struct ProximityStats {
    double mean_cosine = 0.0;
    double mean_euclidean = 0.0;
    double mean_rouge1_f1 = 0.0;
    int n = 0;
};

inline void to_json(json& j, const ProximityStats& s) {
    j = json{{"mean_cosine", s.mean_cosine},
             {"mean_euclidean", s.mean_euclidean},
             {"mean_rouge1_f1", s.mean_rouge1_f1},
             {"n", s.n}};
}

inline MemberMetrics member_metrics(std::string_view response, std::span<const double> response_embedding,
                                    std::string_view ground_truth, std::span<const double> gt_embedding) {
    const auto vm = vector_metrics(response_embedding, gt_embedding);
    return {vm.cosine, vm.euclidean, rouge1_f1(response, ground_truth)};
}

inline ProximityStats mean_proximity(const std::vector<MemberMetrics>& members) {
    ProximityStats s;
    for (const auto& m : members) {
        s.mean_cosine += m.cosine;
        s.mean_euclidean += m.euclidean;
        s.mean_rouge1_f1 += m.rouge1_f1;
    }
    s.n = static_cast<int>(members.size());
    if (s.n > 0) {
        s.mean_cosine /= s.n;
        s.mean_euclidean /= s.n;
        s.mean_rouge1_f1 /= s.n;
    }
    return s;
}

/// Mean cosine, Euclidean distance (raw embeddings) and ROUGE-1 F1 of the
/// cluster's members against the ground truth.
inline ProximityStats cluster_proximity(const Cluster& cluster, const std::vector<std::string>& responses,
                                        std::string_view ground_truth, Provider& embedder) {
    if (cluster.member_indices.empty()) throw ContractError("cluster_proximity: empty cluster");
    const auto gt = embed(embedder, ground_truth);
    std::vector<MemberMetrics> members;
    for (auto i : cluster.member_indices)
        members.push_back(member_metrics(responses.at(i), embed(embedder, responses.at(i)), ground_truth, gt));
    return mean_proximity(members);
}

// -----------------------------------------------------------------------------
// Fooled vs. not-fooled separation
// -----------------------------------------------------------------------------

struct WelchResult {
    bool computable = false;
    std::string reason;
    double mean_a = 0.0, mean_b = 0.0;
    double t = 0.0, df = 0.0, p_value = 1.0;
};

/// Two-sided Welch t-test. Needs at least two samples per group. When both
/// sample variances vanish, p is 1 for equal means and 0 otherwise.
inline WelchResult welch_t_test(const std::vector<double>& a, const std::vector<double>& b) {
    WelchResult r;
    if (a.size() < 2 || b.size() < 2) {
        r.reason = "need at least two samples per group";
        return r;
    }
    auto mean_var = [](const std::vector<double>& x) {
        double m = 0.0;
        for (double v : x) m += v;
        m /= static_cast<double>(x.size());
        double ss = 0.0;
        for (double v : x) ss += (v - m) * (v - m);
        return std::pair{m, ss / static_cast<double>(x.size() - 1)};
    };
    const auto [ma, va] = mean_var(a);
    const auto [mb, vb] = mean_var(b);
    r.computable = true;
    r.mean_a = ma;
    r.mean_b = mb;
    const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
    const double se2 = va / na + vb / nb;
    constexpr double kEps = 1e-300;
    if (se2 <= kEps) {
        const bool equal = std::fabs(ma - mb) <= 1e-12 * std::fmax(1.0, std::fabs(ma));
        r.t = equal ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), ma - mb);
        r.df = na + nb - 2.0;
        r.p_value = equal ? 1.0 : 0.0;
        return r;
    }
    r.t = (ma - mb) / std::sqrt(se2);
    r.df = se2 * se2 / ((va / na) * (va / na) / (na - 1.0) + (vb / nb) * (vb / nb) / (nb - 1.0));
    const boost::math::students_t dist(r.df);
    r.p_value = 2.0 * boost::math::cdf(boost::math::complement(dist, std::fabs(r.t)));
    r.p_value = std::fmin(1.0, r.p_value);
    return r;
}

struct SeparationResult {
    std::string metric;
    WelchResult test; ///< mean_a = fooled, mean_b = not fooled
    std::size_t n_fooled = 0, n_not_fooled = 0;
};

inline void to_json(json& j, const SeparationResult& s) {
    j = json{{"metric", s.metric},
             {"computable", s.test.computable},
             {"n_fooled", s.n_fooled},
             {"n_not_fooled", s.n_not_fooled}};
    if (s.test.computable) {
        j["mean_fooled"] = s.test.mean_a;
        j["mean_not_fooled"] = s.test.mean_b;
        j["t"] = std::isfinite(s.test.t) ? json(s.test.t) : json(s.test.t > 0 ? "inf" : "-inf");
        j["df"] = s.test.df;
        j["p_value"] = s.test.p_value;
    } else {
        j["reason"] = s.test.reason;
    }
}

/// Welch tests of cosine, Euclidean and ROUGE-1 between members whose ensemble
/// vote retained them and members it did not.
inline std::vector<SeparationResult> fooled_separation_test(const std::vector<MemberMetrics>& members,
                                                            const std::vector<bool>& fooled) {
    if (members.size() != fooled.size()) throw ContractError("one fooled label per member required");
    std::vector<SeparationResult> out;
    using Getter = double (*)(const MemberMetrics&);
    const std::pair<const char*, Getter> metrics[] = {
        {"cosine", [](const MemberMetrics& m) { return m.cosine; }},
        {"euclidean", [](const MemberMetrics& m) { return m.euclidean; }},
        {"rouge1_f1", [](const MemberMetrics& m) { return m.rouge1_f1; }},
    };
    for (const auto& [name, get] : metrics) {
        std::vector<double> yes, no;
        for (std::size_t i = 0; i < members.size(); ++i) (fooled[i] ? yes : no).push_back(get(members[i]));
        SeparationResult s;
        s.metric = name;
        s.n_fooled = yes.size();
        s.n_not_fooled = no.size();
        s.test = welch_t_test(yes, no);
        out.push_back(std::move(s));
    }
    return out;
}

// -----------------------------------------------------------------------------
// Uniformity and ground-truth isolation
// -----------------------------------------------------------------------------

struct UniformityReport {
    std::vector<double> fooled_fractions;
    double pure_fraction = 1.0;
    /// True when no hallucination shares the ground truth's cluster.
    bool ground_truth_isolated = true;
};

inline void to_json(json& j, const UniformityReport& u) {
    j = json{{"fooled_fractions", u.fooled_fractions},
             {"pure_fraction", u.pure_fraction},
             {"ground_truth_isolated", u.ground_truth_isolated}};
}

inline UniformityReport uniformity_report(const std::vector<Cluster>& clusters) {
    UniformityReport u;
    std::size_t pure = 0;
    for (const auto& c : clusters) {
        u.fooled_fractions.push_back(c.fooled_fraction);
        if (c.fooled_fraction == 0.0 || c.fooled_fraction == 1.0) ++pure;
        if (c.contains_ground_truth) u.ground_truth_isolated = false;
    }
    u.pure_fraction = clusters.empty() ? 1.0 : static_cast<double>(pure) / static_cast<double>(clusters.size());
    return u;
}

// -----------------------------------------------------------------------------
// Per-question analysis
// -----------------------------------------------------------------------------

struct QuestionAnalysis {
    std::string item_id;
    std::vector<std::string> responses;
    std::vector<bool> fooled;
    std::vector<Cluster> clusters;
    std::vector<ProximityStats> proximity; ///< parallel to clusters
    std::vector<MemberMetrics> members;    ///< parallel to responses
    std::vector<int> cluster_of;           ///< parallel to responses
    UniformityReport uniformity;
};

inline QuestionAnalysis analyze_question(std::string item_id, std::vector<std::string> responses,
                                         std::vector<bool> fooled, std::string_view ground_truth, Provider& nli,
                                         Provider& embedder, double tau_cluster) {
    if (fooled.size() != responses.size()) throw ContractError("one fooled label per response required");
    QuestionAnalysis qa;
    qa.item_id = std::move(item_id);
    qa.responses = std::move(responses);
    qa.fooled = std::move(fooled);
    qa.clusters = cluster_by_entailment(qa.responses, ground_truth, nli, tau_cluster);
    assign_fooled(qa.clusters, qa.fooled);

    const auto gt = embed(embedder, ground_truth);
    qa.members.reserve(qa.responses.size());
    for (const auto& r : qa.responses) qa.members.push_back(member_metrics(r, embed(embedder, r), ground_truth, gt));

    qa.cluster_of.assign(qa.responses.size(), -1);
    for (const auto& c : qa.clusters) {
        std::vector<MemberMetrics> ms;
        for (auto i : c.member_indices) {
            ms.push_back(qa.members[i]);
            qa.cluster_of[i] = c.id;
        }
        qa.proximity.push_back(mean_proximity(ms));
    }
    qa.uniformity = uniformity_report(qa.clusters);
    return qa;
}

} // namespace hallubench
