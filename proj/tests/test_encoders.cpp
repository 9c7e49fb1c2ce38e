#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <random>

#include "oracles.hpp"
#include "reintel/encoders.hpp"

using namespace reintel;

namespace {

ErrorKind deserialize_kind(std::string_view bytes, std::optional<std::uint32_t> dim = {}) {
    try {
        deserialize_store(bytes, dim);
    } catch (const Error& e) {
        return e.kind();
    }
    ADD_FAILURE() << "deserialize accepted corrupt input";
    return ErrorKind::Io;
}

double norm(const std::vector<float>& v) {
    double s = 0.0;
    for (float x : v) s += static_cast<double>(x) * x;
    return std::sqrt(s);
}

EmbeddingStore random_store(std::mt19937_64& rng, std::uint32_t dim, std::size_t n) {
    EmbeddingStore s("enc" + std::to_string(dim), dim);
    std::normal_distribution<float> g(0.0f, 3.0f);
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<float> v(dim);
        for (auto& x : v) x = g(rng);
        s.add("id-" + std::to_string(i) + "-ế", std::move(v));
    }
    return s;
}

} // namespace

TEST(Fnv, MatchesIndependentOracle) {
    EXPECT_EQ(fnv1a64(""), 0xcbf29ce484222325ULL);
    EXPECT_EQ(fnv1a64("a"), 0xaf63dc4c8601ec8cULL);
    for (std::string s : {"", "a", "xin chào", "<URL>", "nếu lỡ", "a b"}) EXPECT_EQ(fnv1a64(s), oracle::fnv1a64(s)) << s;
    static_assert(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
}

TEST(HashEncode, SingleTokenBucketAndSign) {
    const std::uint64_t h = oracle::fnv1a64("a");
    ASSERT_EQ(h % 256, 140u);
    ASSERT_EQ(h >> 63, 1u);
    const auto e = hash_encode("a", 256);
    for (std::size_t i = 0; i < 256; ++i) EXPECT_EQ(e.values[i], i == 140 ? -1.0f : 0.0f) << i;
    EXPECT_EQ(hash_encode("A", 256), e); // lowercased before hashing
}

TEST(HashEncode, EmptyMessageIsZero) {
    const auto e = hash_encode("", 64);
    EXPECT_EQ(e.values, std::vector<float>(64, 0.0f));
    EXPECT_EQ(hash_encode("   \t", 64).values, e.values);
}

TEST(HashEncode, OrderMattersThroughBigrams) {
    EXPECT_NE(hash_encode("a b", 256), hash_encode("b a", 256));
}

TEST(HashEncode, MatchesOracleVector) {
    // Reference: accumulate signed buckets for unigrams and bigrams, normalize.
    const std::vector<std::string> toks = {"xin", "chào", "<url>", "xin"};
    std::vector<double> acc(32, 0.0);
    auto add = [&](const std::string& f) {
        const auto h = oracle::fnv1a64(f);
        acc[h % 32] += (h >> 63) ? -1.0 : 1.0;
    };
    for (std::size_t i = 0; i < toks.size(); ++i) {
        add(toks[i]);
        if (i + 1 < toks.size()) add(toks[i] + " " + toks[i + 1]);
    }
    double n = 0.0;
    for (double v : acc) n += v * v;
    const auto e = hash_encode("Xin  chào <URL>\nxin", 32);
    for (std::size_t i = 0; i < 32; ++i) EXPECT_FLOAT_EQ(e.values[i], static_cast<float>(acc[i] / std::sqrt(n)));
}

TEST(HashEncode, TruncatesToMaxTokens) {
    EXPECT_EQ(hash_encode("a b c d", 128, 2), hash_encode("a b", 128, 2));
    EXPECT_NE(hash_encode("a b c d", 128, 3), hash_encode("a b", 128, 3));
}

TEST(HashEncode, DeterministicUnitNormProperty) {
    std::mt19937_64 rng(21);
    const std::vector<std::string> words = {"a", "bạn", "NÊN", "làm", "gì", "<URL>", "<PHONE>", "😀", "?"};
    for (int trial = 0; trial < 200; ++trial) {
        std::string msg;
        for (int i = 0; i < static_cast<int>(rng() % 20); ++i) msg += words[rng() % words.size()] + " ";
        const std::uint32_t dim = 1 + static_cast<std::uint32_t>(rng() % 300);
        const auto e = hash_encode(msg, dim);
        EXPECT_EQ(e, hash_encode(msg, dim));
        ASSERT_EQ(e.values.size(), dim);
        const double n = norm(e.values);
        EXPECT_TRUE(n == 0.0 || std::abs(n - 1.0) < 1e-6) << n;
    }
}

TEST(HashEncode, ZeroDimRejected) {
    EXPECT_THROW(hash_encode("a", 0), Error);
}

TEST(Remb, GoldenBytes) {
    EmbeddingStore s("h", 2);
    s.add("a", {1.0f, -2.0f});
    const std::string expected("REMB\x01\x00\x01\x00h\x02\x00\x00\x00"
                               "\x01\x00\x00\x00\x00\x00\x00\x00"
                               "\x01\x00"
                               "a\x00\x00\x80\x3f\x00\x00\x00\xc0",
                               32);
    EXPECT_EQ(serialize_store(s), expected);
    EXPECT_EQ(deserialize_store(expected), s);
}

TEST(Remb, RoundTrips) {
    std::mt19937_64 rng(23);
    EXPECT_EQ(deserialize_store(serialize_store(EmbeddingStore("empty", 8))), EmbeddingStore("empty", 8));
    EmbeddingStore one("x", 2);
    one.add("r1", {1.0f, 2.0f});
    EXPECT_EQ(deserialize_store(serialize_store(one)), one);
    for (int trial = 0; trial < 20; ++trial) {
        const auto s = random_store(rng, 1 + static_cast<std::uint32_t>(rng() % 64), rng() % 40);
        const auto bytes = serialize_store(s);
        const auto back = deserialize_store(bytes, s.dim());
        EXPECT_EQ(back, s);
        EXPECT_EQ(serialize_store(back), bytes);
    }
}

TEST(Remb, FileRoundTrip) {
    std::mt19937_64 rng(29);
    const auto s = random_store(rng, 16, 10);
    const auto path = std::filesystem::temp_directory_path() / "reintel_test.remb";
    write_store(s, path);
    EXPECT_EQ(read_store(path), s);
    std::filesystem::remove(path);
    EXPECT_THROW(read_store(path), Error);
}

TEST(Remb, EveryStrictPrefixIsTruncated) {
    std::mt19937_64 rng(31);
    for (const auto& s : {random_store(rng, 3, 4), EmbeddingStore("e", 5)}) {
        const auto bytes = serialize_store(s);
        for (std::size_t len = 0; len < bytes.size(); ++len)
            EXPECT_EQ(deserialize_kind(std::string_view(bytes).substr(0, len)), ErrorKind::Truncated) << len;
    }
}

TEST(Remb, CorruptionErrors) {
    std::mt19937_64 rng(37);
    const auto bytes = serialize_store(random_store(rng, 4, 3));

    auto bad_magic = bytes;
    bad_magic[0] = 'X';
    EXPECT_EQ(deserialize_kind(bad_magic), ErrorKind::MagicMismatch);
    EXPECT_EQ(deserialize_kind("XY"), ErrorKind::MagicMismatch);

    auto bad_version = bytes;
    bad_version[4] = 2;
    EXPECT_EQ(deserialize_kind(bad_version), ErrorKind::UnsupportedVersion);

    EXPECT_EQ(deserialize_kind(bytes, 5u), ErrorKind::DimMismatch);
    EXPECT_EQ(deserialize_kind(bytes + "z"), ErrorKind::TrailingData);

    EmbeddingStore dup("d", 1);
    dup.add("a", {1.0f});
    dup.add("b", {2.0f});
    auto dup_bytes = serialize_store(dup);
    dup_bytes[dup_bytes.size() - 5] = 'a'; // second id byte
    EXPECT_EQ(deserialize_kind(dup_bytes), ErrorKind::DuplicateId);

    EmbeddingStore nan_store("n", 1);
    nan_store.add("a", {1.0f});
    auto nan_bytes = serialize_store(nan_store);
    nan_bytes.replace(nan_bytes.size() - 4, 4, std::string("\x00\x00\xc0\x7f", 4));
    EXPECT_EQ(deserialize_kind(nan_bytes), ErrorKind::NonFiniteValue);
}

TEST(EmbeddingStore, AddValidates) {
    EmbeddingStore s("x", 2);
    EXPECT_THROW(s.add("a", {1.0f}), Error);
    EXPECT_THROW(s.add("a", {1.0f, INFINITY}), Error);
    s.add("a", {1.0f, 2.0f});
    EXPECT_THROW(s.add("a", {1.0f, 2.0f}), Error);
    EXPECT_EQ(s.size(), 1u);
    EXPECT_THROW(EmbeddingStore("z", 0), Error);
}

TEST(EncodeRecord, Kinds) {
    PostRecord r;
    r.id = "p1";
    r.post_message = "xin chào";
    EncoderSpec hashing{.name = "h", .dim = 16};
    EXPECT_EQ(encode_record(r, hashing), hash_encode("xin chào", 16, 256, "h"));

    EncoderSpec file{.name = "bert", .dim = 2, .kind = EncoderKind::FileBacked};
    EmbeddingStore store("bert", 2);
    store.add("p1", {0.25f, -1.5f});
    EXPECT_EQ(encode_record(r, file, &store).values, (std::vector<float>{0.25f, -1.5f}));

    auto kind = [&](const EncoderSpec& spec, const EmbeddingStore* st) {
        try {
            encode_record(r, spec, st);
        } catch (const Error& e) {
            return e.kind();
        }
        return ErrorKind::Io;
    };
    EXPECT_EQ(kind(file, nullptr), ErrorKind::MissingEmbedding);
    r.id = "p2";
    EXPECT_EQ(kind(file, &store), ErrorKind::MissingEmbedding);
    file.dim = 3;
    EXPECT_EQ(kind(file, &store), ErrorKind::DimMismatch);
}
