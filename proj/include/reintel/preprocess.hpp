#pragma once

// Metadata feature engineering: mean imputation + min-max scaling of the
// count/day attributes, all-caps title detection and lowering, day offset
// from 2020-01-01, training-set deduplication, and the six-element metadata
// vector.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <tuple>
#include <utility>
#include <vector>

#include "reintel/corpus.hpp"
#include "reintel/error.hpp"
#include "reintel/io.hpp"
#include "reintel/unicode.hpp"

namespace reintel {

enum class Attribute : std::size_t { NumLike = 0, NumComment = 1, NumShare = 2, DayInYear = 3 };
inline constexpr std::size_t kNumScaledAttributes = 4;
inline constexpr std::array<std::string_view, kNumScaledAttributes> kAttributeNames = {
    "num_like_post", "num_comment_post", "num_share_post", "day_in_year"};

enum class FitScope { AllSplits, TrainOnly };

inline std::string_view to_string(FitScope s) { return s == FitScope::AllSplits ? "all-splits" : "train-only"; }

inline FitScope parse_fit_scope(std::string_view s) {
    if (s == "all-splits") return FitScope::AllSplits;
    if (s == "train-only") return FitScope::TrainOnly;
    throw Error("preprocess", ErrorKind::BadConfig, "unknown fit scope '" + std::string(s) + "'");
}

struct AttributeScaler {
    double mean = 0.0;
    double min = 0.0;
    double max = 0.0;

    [[nodiscard]] bool degenerate() const noexcept { return min == max; }

    /// Missing -> mean, then (x - min) / (max - min); a constant attribute maps to 0.
    [[nodiscard]] double apply(std::optional<double> x) const noexcept {
        const double v = x.value_or(mean);
        if (degenerate()) return 0.0;
        return (v - min) / (max - min);
    }

    friend bool operator==(const AttributeScaler&, const AttributeScaler&) = default;
};

struct ScalerState {
    std::array<AttributeScaler, kNumScaledAttributes> attributes{};
    FitScope scope = FitScope::AllSplits;

    [[nodiscard]] const AttributeScaler& operator[](Attribute a) const {
        return attributes[static_cast<std::size_t>(a)];
    }
    AttributeScaler& operator[](Attribute a) { return attributes[static_cast<std::size_t>(a)]; }

    friend bool operator==(const ScalerState&, const ScalerState&) = default;
};

struct ScaledAttributes {
    double num_like = 0.0;
    double num_comment = 0.0;
    double num_share = 0.0;
    double day_in_year = 0.0;
};

// Feature order: num_like_post, num_comment_post, num_share_post, has_images,
// include_a_title, day_in_year.
inline constexpr std::size_t kMetadataDim = 6;

struct MetadataVector {
    std::array<double, kMetadataDim> values{};

    friend bool operator==(const MetadataVector&, const MetadataVector&) = default;
};

struct TitleScan {
    bool has_title = false;
    std::vector<std::pair<std::size_t, std::size_t>> spans; // [start, end) in code points
    std::string lowered_message;
};

inline constexpr std::int64_t kEpoch2020 = 1577836800; // 2020-01-01T00:00:00Z

/// Whole days from 2020-01-01T00:00:00Z, floored; negative before 2020.
inline std::int64_t day_in_year(std::int64_t timestamp) {
    using namespace std::chrono;
    const sys_seconds t{seconds{timestamp}};
    const auto origin = sys_days{year{2020} / January / 1};
    return floor<days>(t - origin).count();
}

namespace detail {

inline std::optional<double> attribute_value(const PostRecord& r, Attribute a) {
    switch (a) {
    case Attribute::NumLike: return r.num_like_post;
    case Attribute::NumComment: return r.num_comment_post;
    case Attribute::NumShare: return r.num_share_post;
    case Attribute::DayInYear:
        if (!r.timestamp_post) return std::nullopt;
        return static_cast<double>(day_in_year(*r.timestamp_post));
    }
    return std::nullopt;
}

} // namespace detail

/// `corpora[0]` is the training split. With `FitScope::TrainOnly` only it is
/// scanned; otherwise every split contributes.
inline ScalerState fit_scaler(std::span<const std::vector<PostRecord>> corpora, FitScope scope) {
    ScalerState state;
    state.scope = scope;
    const std::size_t n_splits = scope == FitScope::TrainOnly ? std::min<std::size_t>(1, corpora.size())
                                                              : corpora.size();
    for (std::size_t a = 0; a < kNumScaledAttributes; ++a) {
        const auto attr = static_cast<Attribute>(a);
        // Sorted summation: the mean is independent of record order.
        std::vector<double> valid;
        for (std::size_t s = 0; s < n_splits; ++s) {
            for (const auto& r : corpora[s]) {
                if (auto v = detail::attribute_value(r, attr)) valid.push_back(*v);
            }
        }
        if (valid.empty())
            throw Error("preprocess", ErrorKind::NoValidValues,
                        "attribute '" + std::string(kAttributeNames[a]) + "' has no valid values in fit scope");
        std::sort(valid.begin(), valid.end());
        double sum = 0.0;
        for (double v : valid) sum += v;
        auto& sc = state.attributes[a];
        sc.mean = std::clamp(sum / static_cast<double>(valid.size()), valid.front(), valid.back());
        sc.min = valid.front();
        sc.max = valid.back();
    }
    return state;
}

inline ScalerState fit_scaler(const std::vector<PostRecord>& corpus, FitScope scope = FitScope::AllSplits) {
    return fit_scaler(std::span<const std::vector<PostRecord>>(&corpus, 1), scope);
}

inline ScaledAttributes apply_scaler(const PostRecord& record, const ScalerState& state) {
    auto get = [&](Attribute a) { return state[a].apply(detail::attribute_value(record, a)); };
    return {get(Attribute::NumLike), get(Attribute::NumComment), get(Attribute::NumShare),
            get(Attribute::DayInYear)};
}

namespace detail {

inline bool is_title_token(std::u32string_view tok) {
    bool any_upper = false;
    for (char32_t c : tok) {
        if (unicode::is_lower(c)) return false;
        if (unicode::is_upper(c)) any_upper = true;
    }
    return any_upper;
}

} // namespace detail

/// A title is a maximal run of at least `min_tokens` whitespace-separated
/// tokens in which every cased letter is uppercase (and at least one cased
/// letter exists). Digits and punctuation are ignored by the case test.
inline TitleScan detect_title(std::string_view message, std::size_t min_tokens = 4) {
    std::vector<std::size_t> offsets;
    const std::u32string cps = unicode::decode(message, &offsets);
    TitleScan scan;

    struct Token {
        std::size_t start, end;
        bool title;
    };
    std::vector<Token> tokens;
    for (std::size_t i = 0; i < cps.size();) {
        if (unicode::is_space(cps[i])) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j < cps.size() && !unicode::is_space(cps[j])) ++j;
        tokens.push_back({i, j, detail::is_title_token(std::u32string_view(cps).substr(i, j - i))});
        i = j;
    }

    for (std::size_t t = 0; t < tokens.size();) {
        if (!tokens[t].title) {
            ++t;
            continue;
        }
        std::size_t u = t;
        while (u < tokens.size() && tokens[u].title) ++u;
        if (u - t >= std::max<std::size_t>(min_tokens, 1)) scan.spans.emplace_back(tokens[t].start, tokens[u - 1].end);
        t = u;
    }
    scan.has_title = !scan.spans.empty();

    if (!scan.has_title) {
        scan.lowered_message = std::string(message);
        return scan;
    }
    // Bytes outside the spans are copied verbatim.
    std::string& out = scan.lowered_message;
    out.reserve(message.size());
    std::size_t copied = 0;
    for (const auto& [b, e] : scan.spans) {
        out.append(message.substr(copied, offsets[b] - copied));
        for (std::size_t k = b; k < e; ++k) {
            const char32_t lc = unicode::to_lower(cps[k]);
            if (lc == cps[k]) {
                out.append(message.substr(offsets[k], offsets[k + 1] - offsets[k]));
            } else {
                unicode::append_utf8(out, lc);
            }
        }
        copied = offsets[e];
    }
    out.append(message.substr(copied));
    return scan;
}

struct DedupResult {
    std::vector<PostRecord> kept;
    std::size_t removed = 0;
};

/// Drops later records equal on (message, likes, comments, shares, label).
/// A missing count equals only another missing count.
inline DedupResult dedup_training(const std::vector<PostRecord>& records) {
    using Key = std::tuple<std::string, std::optional<double>, std::optional<double>, std::optional<double>, int>;
    std::set<Key> seen;
    DedupResult out;
    out.kept.reserve(records.size());
    for (const auto& r : records) {
        if (!r.label)
            throw Error("preprocess", ErrorKind::UnlabeledRecord,
                        "record '" + r.id + "' has no label; training dedup needs labels");
        Key key{r.post_message, r.num_like_post, r.num_comment_post, r.num_share_post, *r.label};
        if (seen.insert(std::move(key)).second) {
            out.kept.push_back(r);
        } else {
            ++out.removed;
        }
    }
    return out;
}

struct MetadataResult {
    MetadataVector xi;
    std::string lowered_message;
};

/// Elements are clamped to [0, 1]; values outside the fitted range only occur
/// for splits the scaler was not fitted on.
inline MetadataResult build_metadata(const PostRecord& record, const ScalerState& state,
                                     std::size_t title_min_tokens = 4) {
    const auto scaled = apply_scaler(record, state);
    auto title = detect_title(record.post_message, title_min_tokens);
    auto unit = [](double v) { return std::clamp(v, 0.0, 1.0); };
    MetadataResult out;
    out.xi.values = {unit(scaled.num_like),
                     unit(scaled.num_comment),
                     unit(scaled.num_share),
                     record.images.empty() ? 0.0 : 1.0,
                     title.has_title ? 1.0 : 0.0,
                     unit(scaled.day_in_year)};
    out.lowered_message = std::move(title.lowered_message);
    return out;
}

// ScalerState text format: key=value lines, 17 significant digits.

inline std::string write_scaler_state(const ScalerState& state) {
    std::ostringstream os;
    os << "# reintel scaler state\n";
    os << "format=1\n";
    os << "fit_scope=" << to_string(state.scope) << '\n';
    for (std::size_t a = 0; a < kNumScaledAttributes; ++a) {
        const auto& sc = state.attributes[a];
        os << kAttributeNames[a] << ".mean=" << io::format_double(sc.mean) << '\n';
        os << kAttributeNames[a] << ".min=" << io::format_double(sc.min) << '\n';
        os << kAttributeNames[a] << ".max=" << io::format_double(sc.max) << '\n';
    }
    return os.str();
}

inline ScalerState read_scaler_state(std::string_view text) {
    const auto kv = io::parse_key_values(text, "preprocess");
    auto need = [&](const std::string& key) -> const std::string& {
        auto it = kv.find(key);
        if (it == kv.end()) throw Error("preprocess", ErrorKind::BadConfig, "scaler state lacks '" + key + "'");
        return it->second;
    };
    auto number = [&](const std::string& key) {
        auto v = io::parse_double(need(key));
        if (!v || !std::isfinite(*v))
            throw Error("preprocess", ErrorKind::BadConfig, "scaler state value '" + key + "' is not a finite number");
        return *v;
    };
    if (need("format") != "1") throw Error("preprocess", ErrorKind::BadConfig, "unsupported scaler state format");
    ScalerState state;
    state.scope = parse_fit_scope(need("fit_scope"));
    for (std::size_t a = 0; a < kNumScaledAttributes; ++a) {
        const std::string base(kAttributeNames[a]);
        auto& sc = state.attributes[a];
        sc.mean = number(base + ".mean");
        sc.min = number(base + ".min");
        sc.max = number(base + ".max");
        if (sc.min > sc.max)
            throw Error("preprocess", ErrorKind::BadConfig, "scaler state for '" + base + "' has min > max");
    }
    return state;
}

} // namespace reintel
