#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <vector>

#include "reintel/error.hpp"

namespace reintel {

struct EvalResult {
    double auc = 0.0;
    std::size_t n_pos = 0;
    std::size_t n_neg = 0;
};

/// Exact ROC-AUC as the Mann-Whitney statistic with half credit for ties,
/// computed from average ranks in O(n log n).
inline EvalResult roc_auc(std::span<const double> scores, std::span<const int> labels) {
    if (scores.size() != labels.size())
        throw Error("metrics", ErrorKind::LengthMismatch,
                    "scores has " + std::to_string(scores.size()) + " entries, labels has " +
                        std::to_string(labels.size()));
    EvalResult r;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (!std::isfinite(scores[i]))
            throw Error("metrics", ErrorKind::NonFiniteValue, "score " + std::to_string(i) + " is not finite");
        if (labels[i] == 1) {
            ++r.n_pos;
        } else if (labels[i] == 0) {
            ++r.n_neg;
        } else {
            throw Error("metrics", ErrorKind::InvalidConfig, "label " + std::to_string(i) + " is not 0 or 1");
        }
    }
    if (r.n_pos == 0 || r.n_neg == 0)
        throw Error("metrics", ErrorKind::SingleClass, "ROC-AUC needs both classes present");

    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

    // Sum of 1-based average ranks of the positives.
    double pos_rank_sum = 0.0;
    for (std::size_t i = 0; i < order.size();) {
        std::size_t j = i;
        while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
        const double avg_rank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
        for (std::size_t k = i; k < j; ++k) {
            if (labels[order[k]] == 1) pos_rank_sum += avg_rank;
        }
        i = j;
    }
    const double np = static_cast<double>(r.n_pos);
    const double nn = static_cast<double>(r.n_neg);
    const double u = pos_rank_sum - np * (np + 1.0) / 2.0;
    r.auc = u / (np * nn);
    return r;
}

inline EvalResult roc_auc(const std::vector<double>& scores, const std::vector<int>& labels) {
    return roc_auc(std::span<const double>(scores), std::span<const int>(labels));
}

} // namespace reintel
