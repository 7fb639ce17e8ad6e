/// @file vecmath.hpp
/// @brief Cosine similarity and Euclidean distance over embeddings.
#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>

#include "hallubench/errors.hpp"

namespace hallubench {

inline void require_same_dimension(std::span<const double> u, std::span<const double> v) {
    if (u.size() != v.size())
        throw DimensionError("vector dimensions differ: " + std::to_string(u.size()) + " vs " +
                             std::to_string(v.size()));
}

inline double euclidean_distance(std::span<const double> u, std::span<const double> v) {
    require_same_dimension(u, v);
    double sum = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        const double d = u[i] - v[i];
        sum += d * d;
    }
    return std::sqrt(sum);
}

/// Throws ContractError on a zero-norm input.
inline double cosine_similarity(std::span<const double> u, std::span<const double> v) {
    require_same_dimension(u, v);
    double dot = 0.0, uu = 0.0, vv = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        dot += u[i] * v[i];
        uu += u[i] * u[i];
        vv += v[i] * v[i];
    }
    if (uu == 0.0 || vv == 0.0) throw ContractError("cosine similarity of a zero vector");
    const double c = dot / (std::sqrt(uu) * std::sqrt(vv));
    return std::fmax(-1.0, std::fmin(1.0, c));
}

} // namespace hallubench
