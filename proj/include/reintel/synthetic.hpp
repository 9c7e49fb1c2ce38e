#pragma once

// Synthetic SNS corpus with a planted signal, for demos and end-to-end tests.
//
// Unreliable posts draw more words from their own vocabulary, carry all-caps
// title runs more often, attach images more often, and have fewer likes and
// more shares. Counts, timestamps and some cells are deliberately missing or
// invalid.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "reintel/corpus.hpp"
#include "reintel/unicode.hpp"

namespace reintel::synthetic {

struct GeneratorConfig {
    std::size_t n_records = 2000;
    std::uint64_t seed = 2020;
    double positive_rate = 0.35;
    double class_word_rate = 0.18;
    double missing_rate = 0.05;
    std::string id_prefix = "syn";
};

namespace detail {

// Raw 64-bit draws only; no standard-library distributions.
class Source {
public:
    explicit Source(std::uint64_t seed) : rng_(seed) {}
    double uniform() { return static_cast<double>(rng_() >> 11) * 0x1.0p-53; }
    std::size_t index(std::size_t n) { return static_cast<std::size_t>(uniform() * static_cast<double>(n)); }
    bool chance(double p) { return uniform() < p; }

private:
    std::mt19937_64 rng_;
};

inline std::vector<std::string> syllables() {
    static constexpr std::array<std::string_view, 18> onsets = {"b", "c", "d", "đ", "g", "h", "k", "l", "m",
                                                                "n", "ng", "nh", "ph", "qu", "s", "t", "th", "tr"};
    static constexpr std::array<std::string_view, 24> rhymes = {
        "a",   "à",  "ả",  "ạ",   "ăn", "ân", "e",   "ê",   "i",   "ính", "o",   "ô",
        "ơi",  "u",  "ư",  "ươi", "ay", "ao", "ong", "ương", "iết", "uyên", "ợp", "ữa"};
    std::vector<std::string> out;
    out.reserve(onsets.size() * rhymes.size());
    for (auto r : rhymes) {
        for (auto o : onsets) out.push_back(std::string(o) + std::string(r));
    }
    return out;
}

} // namespace detail

struct Vocabulary {
    std::vector<std::string> shared;
    std::vector<std::string> reliable;
    std::vector<std::string> unreliable;
};

/// Fixed partition of the syllable inventory (independent of the seed).
inline Vocabulary vocabulary() {
    auto all = detail::syllables();
    detail::Source shuffle_src(0x5EED);
    for (std::size_t i = all.size(); i > 1; --i) std::swap(all[i - 1], all[shuffle_src.index(i)]);
    Vocabulary v;
    for (std::size_t i = 0; i < all.size(); ++i) {
        if (i < 60) v.reliable.push_back(all[i]);
        else if (i < 120) v.unreliable.push_back(all[i]);
        else v.shared.push_back(all[i]);
    }
    return v;
}

inline std::vector<PostRecord> generate(const GeneratorConfig& cfg) {
    const Vocabulary vocab = vocabulary();
    detail::Source src(cfg.seed);
    std::vector<PostRecord> out;
    out.reserve(cfg.n_records);
    const std::size_t n_users = std::max<std::size_t>(1, cfg.n_records / 2);

    for (std::size_t i = 0; i < cfg.n_records; ++i) {
        PostRecord r;
        r.id = cfg.id_prefix + std::to_string(i);
        const int y = src.chance(cfg.positive_rate) ? 1 : 0;
        r.label = y;
        r.user_name = "u" + std::to_string(src.index(n_users));

        const auto& own = y ? vocab.unreliable : vocab.reliable;
        std::string msg;
        auto append = [&](const std::string& tok) {
            if (!msg.empty()) msg.push_back(' ');
            msg += tok;
        };
        if (src.chance(y ? 0.5 : 0.08)) {
            const std::size_t run = 4 + src.index(4);
            for (std::size_t t = 0; t < run; ++t) {
                std::string tok = src.chance(cfg.class_word_rate) ? own[src.index(own.size())]
                                                                   : vocab.shared[src.index(vocab.shared.size())];
                std::u32string cps = unicode::decode(tok);
                for (auto& c : cps) c = unicode::to_upper(c);
                append(unicode::encode(cps));
            }
            msg += src.chance(0.5) ? "!" : "?...";
        }
        const std::size_t len = 15 + src.index(26);
        for (std::size_t t = 0; t < len; ++t) {
            if (src.chance(0.02)) {
                append(src.chance(0.5) ? "<URL>" : "<PHONE>");
            } else if (src.chance(cfg.class_word_rate)) {
                append(own[src.index(own.size())]);
            } else {
                append(vocab.shared[src.index(vocab.shared.size())]);
            }
            if (src.chance(0.08)) msg += src.chance(0.5) ? "," : ".";
        }
        if (!out.empty() && src.chance(0.02)) {
            const auto& prev = out[src.index(out.size())];
            if (prev.label == r.label) msg = prev.post_message;
        }
        r.post_message = std::move(msg);

        auto count = [&](double lo, double span) -> std::optional<double> {
            if (src.chance(cfg.missing_rate)) return std::nullopt;
            return std::floor(std::exp(lo + span * src.uniform()));
        };
        r.num_like_post = y ? count(0.5, 4.0) : count(2.0, 5.0);
        r.num_comment_post = y ? count(0.5, 4.0) : count(1.0, 4.0);
        r.num_share_post = y ? count(1.5, 5.0) : count(0.0, 4.0);
        if (!src.chance(cfg.missing_rate)) {
            const double day = y ? 40.0 + 260.0 * src.uniform() : 300.0 * src.uniform();
            r.timestamp_post = 1577836800 + static_cast<std::int64_t>(day * 86400.0);
        }
        if (src.chance(y ? 0.45 : 0.2)) {
            const std::size_t n_img = 1 + src.index(3);
            for (std::size_t k = 0; k < n_img; ++k)
                r.images.push_back("https://img.example.org/" + r.id + "_" + std::to_string(k) + ".jpg");
        }
        out.push_back(std::move(r));
    }
    return out;
}

} // namespace reintel::synthetic
