#pragma once

// Frozen message encoders. Two kinds share one interface: a deterministic
// feature-hashing encoder and a file-backed store of precomputed vectors
// (for example [CLS] states exported from a transformer).

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "reintel/corpus.hpp"
#include "reintel/error.hpp"
#include "reintel/io.hpp"
#include "reintel/unicode.hpp"

namespace reintel {

enum class EncoderKind { Hashing, FileBacked };

struct EncoderSpec {
    std::string name;
    std::uint32_t dim = 256;
    EncoderKind kind = EncoderKind::Hashing;
    std::size_t max_tokens = 256; // hashing only

    friend bool operator==(const EncoderSpec&, const EncoderSpec&) = default;
};

struct EmbeddingVector {
    std::string encoder_name;
    std::vector<float> values;

    friend bool operator==(const EmbeddingVector&, const EmbeddingVector&) = default;
};

inline constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ULL;
inline constexpr std::uint64_t kFnvPrime = 0x100000001b3ULL;

constexpr std::uint64_t fnv1a64(std::string_view bytes) noexcept {
    std::uint64_t h = kFnvOffset;
    for (char c : bytes) {
        h ^= static_cast<std::uint8_t>(c);
        h *= kFnvPrime;
    }
    return h;
}

/// Signed feature hashing over lowercased unigrams and bigrams of the first
/// `max_tokens` whitespace tokens, L2-normalized. Bigrams are hashed as
/// "first second" (single space).
inline EmbeddingVector hash_encode(std::string_view message, std::uint32_t dim = 256, std::size_t max_tokens = 256,
                                   std::string encoder_name = "hash") {
    if (dim == 0) throw Error("encoders", ErrorKind::InvalidConfig, "hashing encoder dim must be >= 1");
    auto tokens = unicode::split_whitespace(unicode::lower(message));
    if (tokens.size() > max_tokens) tokens.resize(max_tokens);

    std::vector<double> acc(dim, 0.0);
    auto add = [&](std::string_view feature) {
        const std::uint64_t h = fnv1a64(feature);
        const double sign = (h >> 63) ? -1.0 : 1.0;
        acc[h % dim] += sign;
    };
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        add(tokens[i]);
        if (i + 1 < tokens.size()) add(tokens[i] + " " + tokens[i + 1]);
    }
    double norm2 = 0.0;
    for (double v : acc) norm2 += v * v;
    EmbeddingVector out{std::move(encoder_name), std::vector<float>(dim, 0.0f)};
    if (norm2 > 0.0) {
        const double inv = 1.0 / std::sqrt(norm2);
        for (std::size_t i = 0; i < dim; ++i) out.values[i] = static_cast<float>(acc[i] * inv);
    }
    return out;
}

/// Precomputed vectors keyed by record id; insertion order is preserved so
/// serialization is byte-stable.
class EmbeddingStore {
public:
    EmbeddingStore() = default;
    EmbeddingStore(std::string encoder_name, std::uint32_t dim) : name_(std::move(encoder_name)), dim_(dim) {
        if (dim_ == 0) throw Error("encoders", ErrorKind::DimMismatch, "store dim must be >= 1");
    }

    void add(std::string id, std::vector<float> values) {
        if (values.size() != dim_)
            throw Error("encoders", ErrorKind::DimMismatch,
                        "vector for '" + id + "' has length " + std::to_string(values.size()) + ", store dim is " +
                            std::to_string(dim_));
        for (float v : values) {
            if (!std::isfinite(v))
                throw Error("encoders", ErrorKind::NonFiniteValue, "vector for '" + id + "' has a non-finite value");
        }
        if (index_.contains(id)) throw Error("encoders", ErrorKind::DuplicateId, "duplicate id '" + id + "' in store");
        index_.emplace(id, entries_.size());
        entries_.emplace_back(std::move(id), std::move(values));
    }

    [[nodiscard]] const std::vector<float>* find(const std::string& id) const {
        auto it = index_.find(id);
        return it == index_.end() ? nullptr : &entries_[it->second].second;
    }

    [[nodiscard]] const std::string& name() const noexcept { return name_; }
    [[nodiscard]] std::uint32_t dim() const noexcept { return dim_; }
    [[nodiscard]] std::size_t size() const noexcept { return entries_.size(); }
    [[nodiscard]] const std::vector<std::pair<std::string, std::vector<float>>>& entries() const noexcept {
        return entries_;
    }

    friend bool operator==(const EmbeddingStore& a, const EmbeddingStore& b) {
        return a.name_ == b.name_ && a.dim_ == b.dim_ && a.entries_ == b.entries_;
    }

private:
    std::string name_;
    std::uint32_t dim_ = 1;
    std::vector<std::pair<std::string, std::vector<float>>> entries_;
    std::unordered_map<std::string, std::size_t> index_;
};

// REMB layout, all integers little-endian:
//   "REMB" | u16 version=1 | u16 name_len | name | u32 dim | u64 count
//   count x ( u16 id_len | id | dim x f32 )
inline constexpr std::string_view kRembMagic = "REMB";
inline constexpr std::uint16_t kRembVersion = 1;

inline std::string serialize_store(const EmbeddingStore& store) {
    constexpr auto max16 = std::numeric_limits<std::uint16_t>::max();
    if (store.name().size() > max16)
        throw Error("encoders", ErrorKind::InvalidConfig, "encoder name longer than 65535 bytes");
    std::string out;
    out.reserve(20 + store.name().size() + store.size() * (2 + 16 + 4 * std::size_t{store.dim()}));
    out.append(kRembMagic);
    io::put_le<std::uint16_t>(out, kRembVersion);
    io::put_le<std::uint16_t>(out, static_cast<std::uint16_t>(store.name().size()));
    out.append(store.name());
    io::put_le<std::uint32_t>(out, store.dim());
    io::put_le<std::uint64_t>(out, store.size());
    for (const auto& [id, values] : store.entries()) {
        if (id.size() > max16) throw Error("encoders", ErrorKind::InvalidConfig, "id longer than 65535 bytes");
        io::put_le<std::uint16_t>(out, static_cast<std::uint16_t>(id.size()));
        out.append(id);
        for (float v : values) io::put_le<float>(out, v);
    }
    return out;
}

/// `expected_dim`, when set, must match the header.
inline EmbeddingStore deserialize_store(std::string_view bytes, std::optional<std::uint32_t> expected_dim = {}) {
    io::ByteReader in(bytes);
    auto truncated = [&](std::string_view what) {
        return Error("encoders", ErrorKind::Truncated,
                     "embedding file truncated while reading " + std::string(what) + " at byte " +
                         std::to_string(in.position()));
    };
    auto magic = in.take_bytes(4);
    if (!magic) {
        if (bytes.size() < 4 && kRembMagic.starts_with(bytes)) throw truncated("magic");
        throw Error("encoders", ErrorKind::MagicMismatch, "not an embedding file (bad magic)");
    }
    if (*magic != kRembMagic) throw Error("encoders", ErrorKind::MagicMismatch, "not an embedding file (bad magic)");
    auto version = in.take<std::uint16_t>();
    if (!version) throw truncated("version");
    if (*version != kRembVersion)
        throw Error("encoders", ErrorKind::UnsupportedVersion, "unsupported embedding file version " +
                                                                   std::to_string(*version));
    auto name_len = in.take<std::uint16_t>();
    if (!name_len) throw truncated("name length");
    auto name = in.take_bytes(*name_len);
    if (!name) throw truncated("name");
    auto dim = in.take<std::uint32_t>();
    if (!dim) throw truncated("dim");
    if (*dim == 0) throw Error("encoders", ErrorKind::DimMismatch, "embedding file declares dim 0");
    if (expected_dim && *expected_dim != *dim)
        throw Error("encoders", ErrorKind::DimMismatch,
                    "embedding file dim " + std::to_string(*dim) + " != expected " + std::to_string(*expected_dim));
    auto count = in.take<std::uint64_t>();
    if (!count) throw truncated("count");

    EmbeddingStore store(std::string(*name), *dim);
    for (std::uint64_t r = 0; r < *count; ++r) {
        auto id_len = in.take<std::uint16_t>();
        if (!id_len) throw truncated("record " + std::to_string(r));
        auto id = in.take_bytes(*id_len);
        if (!id) throw truncated("record " + std::to_string(r));
        if (in.remaining() < std::size_t{*dim} * 4) throw truncated("record " + std::to_string(r));
        std::vector<float> values(*dim);
        for (auto& v : values) v = *in.take<float>();
        store.add(std::string(*id), std::move(values));
    }
    if (in.remaining() != 0)
        throw Error("encoders", ErrorKind::TrailingData,
                    std::to_string(in.remaining()) + " trailing bytes after the last record");
    return store;
}

inline void write_store(const EmbeddingStore& store, const std::filesystem::path& path) {
    io::atomic_write(path, serialize_store(store));
}

inline EmbeddingStore read_store(const std::filesystem::path& path, std::optional<std::uint32_t> expected_dim = {}) {
    return deserialize_store(io::read_file(path, "encoders"), expected_dim);
}

/// Hashing specs encode the message; file-backed specs return the stored
/// vector unmodified.
inline EmbeddingVector encode_record(const PostRecord& record, const EncoderSpec& spec,
                                     const EmbeddingStore* store = nullptr) {
    if (spec.kind == EncoderKind::Hashing) return hash_encode(record.post_message, spec.dim, spec.max_tokens, spec.name);
    if (store == nullptr)
        throw Error("encoders", ErrorKind::MissingEmbedding, "file-backed encoder '" + spec.name + "' has no store");
    if (store->dim() != spec.dim)
        throw Error("encoders", ErrorKind::DimMismatch,
                    "store for '" + spec.name + "' has dim " + std::to_string(store->dim()) + ", expected " +
                        std::to_string(spec.dim));
    const auto* v = store->find(record.id);
    if (v == nullptr)
        throw Error("encoders", ErrorKind::MissingEmbedding,
                    "no embedding for id '" + record.id + "' in store '" + spec.name + "'");
    return {spec.name, *v};
}

} // namespace reintel
