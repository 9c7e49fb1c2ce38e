#include <gtest/gtest.h>

#include <filesystem>

#include "reintel/pipeline.hpp"
#include "reintel/synthetic.hpp"

using namespace reintel;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
    const auto dir = fs::temp_directory_path() / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

PipelineConfig small_config() {
    PipelineConfig cfg;
    cfg.encoders = {parse_encoder_config("hashing:hash:64")};
    cfg.k = 4;
    cfg.fold_seed = 3;
    cfg.training.seed = 5;
    cfg.training.lr_override = 1.0;
    return cfg;
}

} // namespace

TEST(EncoderConfig, Parses) {
    auto h = parse_encoder_config("hashing:h");
    EXPECT_EQ(h.spec.name, "h");
    EXPECT_EQ(h.spec.dim, 256u);
    h = parse_encoder_config("hashing:h:32:8");
    EXPECT_EQ(h.spec.dim, 32u);
    EXPECT_EQ(h.spec.max_tokens, 8u);
    const auto f = parse_encoder_config("file:bert:/tmp/x.remb");
    EXPECT_EQ(f.spec.kind, EncoderKind::FileBacked);
    EXPECT_EQ(f.store_path, fs::path("/tmp/x.remb"));
    for (auto bad : {"", "hashing", "hashing:", "hashing:h:0", "hashing:h:1:2:3", "file:bert", "file::p", "x:y",
                     "hashing:a,b"}) {
        EXPECT_THROW(parse_encoder_config(bad), Error) << bad;
    }
}

TEST(Pipeline, EnsembleDirRoundTripReproducesPredictions) {
    const auto records = synthetic::generate({.n_records = 200, .seed = 1});
    const std::vector<PostRecord> train(records.begin(), records.begin() + 150);
    const std::vector<PostRecord> test(records.begin() + 150, records.end());
    const auto cfg = small_config();
    const auto trained = train_pipeline(train, {test}, cfg);
    EXPECT_EQ(trained.model.heads.size(), 4u);

    const auto dir = fresh_dir("reintel_pipeline_test");
    write_ensemble_dir(trained, cfg, dir);
    const auto loaded = read_ensemble_dir(dir);
    EXPECT_EQ(loaded.scaler, trained.scaler);
    EXPECT_EQ(loaded.model.heads, trained.model.heads);
    EXPECT_EQ(loaded.manifest.at("k"), "4");
    EXPECT_EQ(loaded.manifest.at("encoders"), "hash:hashing:64:256");

    FeatureBuilder fb(cfg.encoders, {std::nullopt}, trained.scaler, cfg.title_min_tokens);
    const auto direct = predict_ensemble(trained.model, fb.build_all(test));
    const auto via_dir = predict_pipeline(loaded, test, {});
    ASSERT_EQ(via_dir.size(), direct.size());
    for (std::size_t i = 0; i < direct.size(); ++i) EXPECT_EQ(via_dir[i].probability, direct[i]);

    const auto text = format_predictions(via_dir);
    EXPECT_EQ(text.rfind("id,probability\n", 0), 0u);
    fs::remove_all(dir);
}

TEST(Pipeline, Deterministic) {
    const auto records = synthetic::generate({.n_records = 120, .seed = 2});
    const auto a = train_pipeline(records, {}, small_config());
    const auto b = train_pipeline(records, {}, small_config());
    EXPECT_EQ(a.model.heads, b.model.heads);
    EXPECT_EQ(ensemble_manifest(a, small_config()), ensemble_manifest(b, small_config()));
}

TEST(Pipeline, FileBackedEncoder) {
    const auto records = synthetic::generate({.n_records = 100, .seed = 4});
    const auto dir = fresh_dir("reintel_pipeline_store");
    EmbeddingStore store("ext", 8);
    for (const auto& r : records) store.add(r.id, hash_encode(r.post_message, 8).values);
    write_store(store, dir / "ext.remb");

    auto cfg = small_config();
    cfg.encoders.push_back(parse_encoder_config("file:ext:" + (dir / "ext.remb").string()));
    const auto trained = train_pipeline(records, {}, cfg);
    EXPECT_EQ(trained.model.layout.total_dim(), 64u + 8u + kMetadataDim);
    write_ensemble_dir(trained, cfg, dir / "model");
    const auto loaded = read_ensemble_dir(dir / "model");

    EXPECT_THROW(predict_pipeline(loaded, records, {}), Error);
    const auto preds = predict_pipeline(loaded, records, {{"ext", dir / "ext.remb"}});
    EXPECT_EQ(preds.size(), records.size());

    EmbeddingStore wrong("ext", 4);
    for (const auto& r : records) wrong.add(r.id, std::vector<float>(4, 0.0f));
    write_store(wrong, dir / "wrong.remb");
    EXPECT_THROW(predict_pipeline(loaded, records, {{"ext", dir / "wrong.remb"}}), Error);
    fs::remove_all(dir);
}

TEST(Pipeline, MissingModelDir) {
    try {
        read_ensemble_dir("/nonexistent/model");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::MissingFile);
    }
}

TEST(Synthetic, DeterministicAndLabeled) {
    const auto a = synthetic::generate({.n_records = 300, .seed = 9});
    EXPECT_EQ(a, synthetic::generate({.n_records = 300, .seed = 9}));
    EXPECT_NE(a, synthetic::generate({.n_records = 300, .seed = 10}));
    std::size_t pos = 0;
    for (const auto& r : a) {
        ASSERT_TRUE(r.label.has_value());
        pos += static_cast<std::size_t>(*r.label);
    }
    EXPECT_GT(pos, 50u);
    EXPECT_LT(pos, 250u);
}
