#pragma once

// Feature fusion (encoder vectors concatenated with the metadata vector) and
// the trainable sigmoid head. Encoders stay frozen; only (w, b) are learned.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "reintel/encoders.hpp"
#include "reintel/error.hpp"
#include "reintel/io.hpp"
#include "reintel/metrics.hpp"
#include "reintel/preprocess.hpp"

namespace reintel {

struct EncoderSlot {
    std::string name;
    std::uint32_t dim = 0;

    friend bool operator==(const EncoderSlot&, const EncoderSlot&) = default;
};

/// Ordered encoder slots followed by the metadata block.
struct FusionLayout {
    std::vector<EncoderSlot> encoders;
    std::size_t metadata_dim = kMetadataDim;

    [[nodiscard]] std::size_t total_dim() const noexcept {
        std::size_t d = metadata_dim;
        for (const auto& e : encoders) d += e.dim;
        return d;
    }

    /// "name:dim,name:dim"
    [[nodiscard]] std::string encoders_string() const {
        std::string s;
        for (std::size_t i = 0; i < encoders.size(); ++i) {
            if (i) s.push_back(',');
            s += encoders[i].name + ":" + std::to_string(encoders[i].dim);
        }
        return s;
    }

    static std::vector<EncoderSlot> parse_encoders(std::string_view s) {
        std::vector<EncoderSlot> out;
        if (io::trim(s).empty()) return out;
        for (const auto& item : io::split(s, ',')) {
            const auto colon = item.rfind(':');
            auto dim = colon == std::string::npos ? std::nullopt : io::parse_int(std::string_view(item).substr(colon + 1));
            if (!dim || *dim <= 0 || *dim > std::numeric_limits<std::uint32_t>::max())
                throw Error("fusion", ErrorKind::BadCheckpoint, "bad encoder slot '" + item + "'");
            out.push_back({item.substr(0, colon), static_cast<std::uint32_t>(*dim)});
        }
        return out;
    }

    friend bool operator==(const FusionLayout&, const FusionLayout&) = default;
};

struct FusedFeature {
    std::vector<double> values;
};

inline FusedFeature fuse(std::span<const EmbeddingVector> embeddings, std::span<const double> metadata,
                         const FusionLayout& layout) {
    if (layout.metadata_dim == 0)
        throw Error("fusion", ErrorKind::DimMismatch, "metadata block must be non-empty");
    if (embeddings.size() != layout.encoders.size())
        throw Error("fusion", ErrorKind::DimMismatch,
                    "got " + std::to_string(embeddings.size()) + " encoder vectors, layout has " +
                        std::to_string(layout.encoders.size()));
    if (metadata.size() != layout.metadata_dim)
        throw Error("fusion", ErrorKind::DimMismatch,
                    "metadata length " + std::to_string(metadata.size()) + " != " +
                        std::to_string(layout.metadata_dim));
    FusedFeature out;
    out.values.reserve(layout.total_dim());
    for (std::size_t i = 0; i < embeddings.size(); ++i) {
        const auto& slot = layout.encoders[i];
        const auto& e = embeddings[i];
        if (e.values.size() != slot.dim || (!e.encoder_name.empty() && e.encoder_name != slot.name))
            throw Error("fusion", ErrorKind::DimMismatch,
                        "encoder vector " + std::to_string(i) + " ('" + e.encoder_name + "', dim " +
                            std::to_string(e.values.size()) + ") does not match slot '" + slot.name + "' dim " +
                            std::to_string(slot.dim));
        for (float v : e.values) out.values.push_back(static_cast<double>(v));
    }
    out.values.insert(out.values.end(), metadata.begin(), metadata.end());
    for (double v : out.values) {
        if (!std::isfinite(v)) throw Error("fusion", ErrorKind::NonFiniteValue, "fused feature has a non-finite value");
    }
    return out;
}

inline FusedFeature fuse(std::span<const EmbeddingVector> embeddings, const MetadataVector& xi,
                         const FusionLayout& layout) {
    return fuse(embeddings, std::span<const double>(xi.values), layout);
}

struct ClassifierHead {
    std::vector<double> weights;
    double bias = 0.0;

    [[nodiscard]] std::size_t dim() const noexcept { return weights.size(); }

    friend bool operator==(const ClassifierHead&, const ClassifierHead&) = default;
};

/// 1 / (1 + e^-t); neither branch overflows.
inline double sigmoid(double t) noexcept {
    if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
    const double e = std::exp(t);
    return e / (1.0 + e);
}

inline double logit(const ClassifierHead& head, std::span<const double> x) {
    if (x.size() != head.dim())
        throw Error("fusion", ErrorKind::DimMismatch,
                    "feature length " + std::to_string(x.size()) + " != head dim " + std::to_string(head.dim()));
    double z = head.bias;
    for (std::size_t i = 0; i < x.size(); ++i) z += head.weights[i] * x[i];
    return z;
}

inline double predict(const ClassifierHead& head, std::span<const double> x) { return sigmoid(logit(head, x)); }

inline double predict(const ClassifierHead& head, const FusedFeature& x) {
    return predict(head, std::span<const double>(x.values));
}

inline constexpr double kBceEpsilon = 1e-12;

/// -[y ln p + (1 - y) ln(1 - p)] with p clamped to [eps, 1 - eps].
inline double bce_loss(double y_hat, int y) {
    const double p = std::clamp(y_hat, kBceEpsilon, 1.0 - kBceEpsilon);
    return -(y * std::log(p) + (1 - y) * std::log(1.0 - p));
}

struct BceGradient {
    double loss = 0.0;
    std::vector<double> weights; // (y_hat - y) * x
    double bias = 0.0;           // (y_hat - y)
};

inline BceGradient bce_gradient(const ClassifierHead& head, std::span<const double> x, int y) {
    const double y_hat = predict(head, x);
    BceGradient g;
    g.loss = bce_loss(y_hat, y);
    const double r = y_hat - static_cast<double>(y);
    g.weights.resize(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) g.weights[i] = r * x[i];
    g.bias = r;
    return g;
}

struct TrainingConfig {
    std::size_t batch_size = 16;
    double learning_rate = 3e-5;
    std::size_t max_epochs = 5;
    std::size_t early_stopping_patience = 1;
    std::uint64_t seed = 0;
    // Replaces learning_rate when set.
    std::optional<double> lr_override;

    [[nodiscard]] double effective_lr() const noexcept { return lr_override.value_or(learning_rate); }

    void validate() const {
        if (batch_size < 1) throw Error("fusion", ErrorKind::InvalidConfig, "batch_size must be >= 1");
        if (!(learning_rate > 0.0) || !std::isfinite(learning_rate))
            throw Error("fusion", ErrorKind::InvalidConfig, "learning_rate must be > 0");
        if (lr_override && (!(*lr_override > 0.0) || !std::isfinite(*lr_override)))
            throw Error("fusion", ErrorKind::InvalidConfig, "lr_override must be > 0");
        if (max_epochs < 1) throw Error("fusion", ErrorKind::InvalidConfig, "max_epochs must be >= 1");
        if (early_stopping_patience < 1)
            throw Error("fusion", ErrorKind::InvalidConfig, "early_stopping_patience must be >= 1");
    }
};

struct LabeledFeatures {
    std::vector<FusedFeature> x;
    std::vector<int> y;

    [[nodiscard]] std::size_t size() const noexcept { return x.size(); }
};

inline std::vector<double> predict_all(const ClassifierHead& head, std::span<const FusedFeature> xs) {
    std::vector<double> out;
    out.reserve(xs.size());
    for (const auto& x : xs) out.push_back(predict(head, x));
    return out;
}

/// Mean BCE over the rows selected by `rows`.
inline double mean_loss(const ClassifierHead& head, const LabeledFeatures& data, std::span<const std::size_t> rows) {
    double total = 0.0;
    for (std::size_t r : rows) total += bce_loss(predict(head, data.x[r]), data.y[r]);
    return rows.empty() ? 0.0 : total / static_cast<double>(rows.size());
}

/// One gradient step on the mean BCE gradient of the selected rows.
inline void sgd_step(ClassifierHead& head, const LabeledFeatures& data, std::span<const std::size_t> rows, double lr) {
    if (rows.empty()) return;
    const std::size_t dim = head.dim();
    std::vector<double> grad_w(dim, 0.0);
    double grad_b = 0.0;
    for (std::size_t r : rows) {
        const auto& x = data.x[r].values;
        const double residual = predict(head, std::span<const double>(x)) - static_cast<double>(data.y[r]);
        for (std::size_t i = 0; i < dim; ++i) grad_w[i] += residual * x[i];
        grad_b += residual;
    }
    const double step = lr / static_cast<double>(rows.size());
    for (std::size_t i = 0; i < dim; ++i) head.weights[i] -= step * grad_w[i];
    head.bias -= step * grad_b;
}

struct TrainResult {
    ClassifierHead head;
    double best_valid_auc = 0.0;
    std::size_t best_epoch = 0; // 1-based
    std::size_t epochs_run = 0;
};

/// Mini-batch SGD on the mean BCE gradient from a zero head. After every
/// epoch the validation AUC is measured; the best snapshot is returned and
/// training stops after `early_stopping_patience` epochs without a gain.
inline TrainResult train_head(const LabeledFeatures& train, const LabeledFeatures& valid, const TrainingConfig& cfg) {
    cfg.validate();
    if (train.size() == 0 || valid.size() == 0)
        throw Error("fusion", ErrorKind::InvalidConfig, "training and validation sets must be non-empty");
    if (train.x.size() != train.y.size() || valid.x.size() != valid.y.size())
        throw Error("fusion", ErrorKind::LengthMismatch, "feature and label counts differ");
    const auto has_both = [](const std::vector<int>& y) {
        return std::find(y.begin(), y.end(), 0) != y.end() && std::find(y.begin(), y.end(), 1) != y.end();
    };
    if (!has_both(valid.y))
        throw Error("fusion", ErrorKind::SingleClass, "validation set must contain both classes");

    const std::size_t dim = train.x.front().values.size();
    for (const auto* set : {&train, &valid}) {
        for (const auto& f : set->x) {
            if (f.values.size() != dim) throw Error("fusion", ErrorKind::DimMismatch, "inconsistent feature length");
        }
    }

    ClassifierHead head{std::vector<double>(dim, 0.0), 0.0};
    TrainResult best{head, -1.0, 0, 0};
    const double lr = cfg.effective_lr();
    std::mt19937_64 rng(cfg.seed);
    std::vector<std::size_t> order(train.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::size_t stale = 0;

    for (std::size_t epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
            const std::size_t stop = std::min(order.size(), start + cfg.batch_size);
            sgd_step(head, train, std::span<const std::size_t>(order).subspan(start, stop - start), lr);
        }
        best.epochs_run = epoch;
        const double auc = roc_auc(predict_all(head, valid.x), valid.y).auc;
        if (auc > best.best_valid_auc) {
            best.head = head;
            best.best_valid_auc = auc;
            best.best_epoch = epoch;
            stale = 0;
        } else if (++stale >= cfg.early_stopping_patience) {
            break;
        }
    }
    return best;
}

// Head checkpoint: text header terminated by "end\n", then (dim + 1)
// little-endian f64 values: the weights followed by the bias.

struct HeadCheckpoint {
    ClassifierHead head;
    FusionLayout layout;
    std::uint64_t seed = 0;
    std::size_t epoch = 0;
    double valid_auc = 0.0;
};

inline std::string serialize_checkpoint(const HeadCheckpoint& ck) {
    if (ck.head.dim() != ck.layout.total_dim())
        throw Error("fusion", ErrorKind::DimMismatch, "head dim does not match fusion layout");
    std::ostringstream os;
    os << "REINTEL-HEAD\n"
       << "format=1\n"
       << "fused_dim=" << ck.head.dim() << '\n'
       << "encoders=" << ck.layout.encoders_string() << '\n'
       << "metadata_dim=" << ck.layout.metadata_dim << '\n'
       << "seed=" << ck.seed << '\n'
       << "epoch=" << ck.epoch << '\n'
       << "valid_auc=" << io::format_double(ck.valid_auc) << '\n'
       << "payload=f64le\n"
       << "end\n";
    std::string out = std::move(os).str();
    for (double w : ck.head.weights) io::put_le<double>(out, w);
    io::put_le<double>(out, ck.head.bias);
    return out;
}

inline HeadCheckpoint deserialize_checkpoint(std::string_view bytes) {
    auto bad = [](const std::string& msg) { return Error("fusion", ErrorKind::BadCheckpoint, msg); };
    constexpr std::string_view kMagic = "REINTEL-HEAD\n";
    if (!bytes.starts_with(kMagic)) throw bad("not a head checkpoint");
    const auto end = bytes.find("\nend\n");
    if (end == std::string_view::npos) throw bad("checkpoint header is not terminated");
    const auto kv = io::parse_key_values(bytes.substr(kMagic.size(), end + 1 - kMagic.size()), "fusion");
    auto need = [&](const std::string& k) -> const std::string& {
        auto it = kv.find(k);
        if (it == kv.end()) throw bad("checkpoint header lacks '" + k + "'");
        return it->second;
    };
    auto integer = [&](const std::string& k) {
        auto v = io::parse_uint(need(k));
        if (!v) throw bad("checkpoint field '" + k + "' is not a non-negative integer");
        return *v;
    };
    if (need("format") != "1" || need("payload") != "f64le") throw bad("unsupported checkpoint format");

    HeadCheckpoint ck;
    const std::size_t dim = integer("fused_dim");
    ck.layout.encoders = FusionLayout::parse_encoders(need("encoders"));
    ck.layout.metadata_dim = integer("metadata_dim");
    ck.seed = integer("seed");
    ck.epoch = integer("epoch");
    auto auc = io::parse_double(need("valid_auc"));
    if (!auc) throw bad("checkpoint valid_auc is not a number");
    ck.valid_auc = *auc;
    if (ck.layout.total_dim() != dim) throw bad("fused_dim does not match the encoder layout");

    io::ByteReader in(bytes.substr(end + 5));
    if (in.remaining() != (dim + 1) * sizeof(double))
        throw Error("fusion", ErrorKind::Truncated, "checkpoint payload has the wrong size");
    ck.head.weights.resize(dim);
    for (auto& w : ck.head.weights) w = *in.take<double>();
    ck.head.bias = *in.take<double>();
    return ck;
}

inline void write_checkpoint(const HeadCheckpoint& ck, const std::filesystem::path& path) {
    io::atomic_write(path, serialize_checkpoint(ck));
}

inline HeadCheckpoint read_checkpoint(const std::filesystem::path& path) {
    return deserialize_checkpoint(io::read_file(path, "fusion"));
}

} // namespace reintel
