#pragma once

// Independent reference computations used to derive expected values. None of
// these call into the library code paths they check.

#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

namespace oracle {

/// All-pairs Mann-Whitney credit: 1 for a positive scored above a negative,
/// 0.5 for a tie.
inline double brute_force_auc(const std::vector<double>& scores, const std::vector<int>& labels) {
    double credit = 0.0;
    double pairs = 0.0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (labels[i] != 1) continue;
        for (std::size_t j = 0; j < scores.size(); ++j) {
            if (labels[j] != 0) continue;
            pairs += 1.0;
            if (scores[i] > scores[j]) credit += 1.0;
            else if (scores[i] == scores[j]) credit += 0.5;
        }
    }
    return credit / pairs;
}

/// FNV-1a 64 with the prime multiply spelled out as shifts:
/// 0x100000001b3 = 2^40 + 2^8 + 0xb3.
inline std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char b : bytes) {
        h ^= b;
        h = (h << 40) + (h << 8) + h * 0xb3ULL;
    }
    return h;
}

inline bool is_leap(int y) { return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0; }

/// Days from 2020-01-01 to y-m-d by counting month lengths (y >= 2020).
inline long days_since_2020(int y, int m, int d) {
    static const int month_len[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    long days = 0;
    for (int yy = 2020; yy < y; ++yy) days += is_leap(yy) ? 366 : 365;
    for (int mm = 1; mm < m; ++mm) days += month_len[mm - 1] + ((mm == 2 && is_leap(y)) ? 1 : 0);
    return days + (d - 1);
}

/// Binary cross-entropy of a logistic unit written directly in terms of the
/// parameters, without clamping.
inline double logistic_loss(const std::vector<double>& w, double b, const std::vector<double>& x, int y) {
    double z = b;
    for (std::size_t i = 0; i < x.size(); ++i) z += w[i] * x[i];
    // log(1 + e^z) - y z, stable form
    const double softplus = z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
    return softplus - y * z;
}

/// Central finite differences of `f` at `params`.
inline std::vector<double> central_difference(const std::function<double(const std::vector<double>&)>& f,
                                              std::vector<double> params, double h) {
    std::vector<double> g(params.size());
    for (std::size_t i = 0; i < params.size(); ++i) {
        const double orig = params[i];
        params[i] = orig + h;
        const double up = f(params);
        params[i] = orig - h;
        const double down = f(params);
        params[i] = orig;
        g[i] = (up - down) / (2.0 * h);
    }
    return g;
}

} // namespace oracle
