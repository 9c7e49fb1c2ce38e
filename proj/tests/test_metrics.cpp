#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "reintel/metrics.hpp"

using reintel::Error;
using reintel::ErrorKind;
using reintel::roc_auc;

TEST(RocAuc, Examples) {
    EXPECT_EQ(roc_auc({0.2, 0.8}, {0, 1}).auc, 1.0);
    EXPECT_EQ(roc_auc({0.8, 0.2}, {0, 1}).auc, 0.0);
    EXPECT_EQ(roc_auc({0.5, 0.5}, {0, 1}).auc, 0.5);
    EXPECT_EQ(roc_auc({0.1, 0.4, 0.35, 0.8}, {0, 0, 1, 1}).auc, 0.75);
    const auto r = roc_auc({0.1, 0.2, 0.3}, {1, 0, 0});
    EXPECT_EQ(r.n_pos, 1u);
    EXPECT_EQ(r.n_neg, 2u);
}

TEST(RocAuc, MatchesBruteForceWithTies) {
    std::mt19937_64 rng(83);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 2 + rng() % 200;
        const int levels = 1 + static_cast<int>(rng() % 20);
        std::vector<double> s(n);
        std::vector<int> y(n);
        for (std::size_t i = 0; i < n; ++i) {
            s[i] = static_cast<double>(rng() % static_cast<unsigned>(levels)) / levels;
            y[i] = static_cast<int>(rng() % 2);
        }
        y[0] = 0;
        y[1] = 1;
        EXPECT_NEAR(roc_auc(s, y).auc, oracle::brute_force_auc(s, y), 1e-12);
    }
}

TEST(RocAuc, Errors) {
    auto kind = [](std::vector<double> s, std::vector<int> y) {
        try {
            roc_auc(s, y);
        } catch (const Error& e) {
            return e.kind();
        }
        return ErrorKind::Io;
    };
    EXPECT_EQ(kind({0.1, 0.2}, {1, 1}), ErrorKind::SingleClass);
    EXPECT_EQ(kind({0.1}, {0, 1}), ErrorKind::LengthMismatch);
    EXPECT_EQ(kind({0.1, NAN}, {0, 1}), ErrorKind::NonFiniteValue);
    EXPECT_EQ(kind({0.1, 0.2}, {0, 2}), ErrorKind::InvalidConfig);
    EXPECT_EQ(kind({}, {}), ErrorKind::SingleClass);
}

TEST(RocAuc, InvariantUnderMonotoneTransform) {
    std::mt19937_64 rng(89);
    std::normal_distribution<double> g;
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> s(100), t(100);
        std::vector<int> y(100);
        for (std::size_t i = 0; i < 100; ++i) {
            s[i] = g(rng);
            t[i] = std::exp(2.0 * s[i]) + 3.0;
            y[i] = static_cast<int>(i % 2);
        }
        EXPECT_DOUBLE_EQ(roc_auc(s, y).auc, roc_auc(t, y).auc);
    }
}

TEST(RocAuc, ComplementSymmetry) {
    std::mt19937_64 rng(97);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> s(60);
        std::vector<int> y(60), flipped(60);
        for (std::size_t i = 0; i < 60; ++i) {
            s[i] = static_cast<double>(rng() % 10);
            y[i] = static_cast<int>((i + rng() % 2) % 2);
            flipped[i] = 1 - y[i];
        }
        y[0] = 0;
        y[1] = 1;
        flipped[0] = 1;
        flipped[1] = 0;
        EXPECT_NEAR(roc_auc(s, y).auc + roc_auc(s, flipped).auc, 1.0, 1e-12);
    }
}
