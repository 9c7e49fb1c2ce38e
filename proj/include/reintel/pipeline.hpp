#pragma once

// End-to-end wiring: records -> metadata + encoder vectors -> fused features
// -> k-fold ensemble, plus the on-disk ensemble directory.

#include <cstdint>
#include <filesystem>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "reintel/corpus.hpp"
#include "reintel/cv_ensemble.hpp"
#include "reintel/encoders.hpp"
#include "reintel/error.hpp"
#include "reintel/fusion.hpp"
#include "reintel/io.hpp"
#include "reintel/preprocess.hpp"

namespace reintel {

inline constexpr std::string_view kVersion = "0.1.0";

struct EncoderConfig {
    EncoderSpec spec;
    std::filesystem::path store_path; // file-backed only
};

/// "hashing:<name>[:<dim>[:<max_tokens>]]" or "file:<name>:<path>".
inline EncoderConfig parse_encoder_config(std::string_view text) {
    auto bad = [&] { return Error("cli", ErrorKind::BadConfig, "bad encoder spec '" + std::string(text) + "'"); };
    const auto first = text.find(':');
    if (first == std::string_view::npos) throw bad();
    const auto kind = text.substr(0, first);
    auto rest = text.substr(first + 1);
    EncoderConfig ec;
    if (kind == "hashing") {
        auto parts = io::split(rest, ':');
        if (parts.empty() || parts.size() > 3 || parts[0].empty()) throw bad();
        ec.spec.name = parts[0];
        ec.spec.kind = EncoderKind::Hashing;
        if (parts.size() >= 2) {
            auto d = io::parse_int(parts[1]);
            if (!d || *d < 1 || *d > std::numeric_limits<std::uint32_t>::max()) throw bad();
            ec.spec.dim = static_cast<std::uint32_t>(*d);
        }
        if (parts.size() == 3) {
            auto m = io::parse_int(parts[2]);
            if (!m || *m < 1) throw bad();
            ec.spec.max_tokens = static_cast<std::size_t>(*m);
        }
    } else if (kind == "file") {
        const auto colon = rest.find(':');
        if (colon == std::string_view::npos || colon == 0 || colon + 1 == rest.size()) throw bad();
        ec.spec.name = std::string(rest.substr(0, colon));
        ec.spec.kind = EncoderKind::FileBacked;
        ec.spec.dim = 0; // taken from the store header
        ec.store_path = std::string(rest.substr(colon + 1));
    } else {
        throw bad();
    }
    if (ec.spec.name.find_first_of(",=\n") != std::string::npos) throw bad();
    return ec;
}

struct PipelineConfig {
    Schema schema;
    std::vector<EncoderConfig> encoders{EncoderConfig{EncoderSpec{"hash", 256, EncoderKind::Hashing, 256}, {}}};
    std::size_t title_min_tokens = 4;
    FitScope fit_scope = FitScope::AllSplits;
    TrainingConfig training;
    std::size_t k = 12;
    std::uint64_t fold_seed = 0;
    bool dedup = true;
    unsigned threads = 1;
    std::size_t max_reseeds = 64;
};

/// Loads file-backed stores and fixes their dims. Entries for hashing
/// encoders stay empty.
inline std::vector<std::optional<EmbeddingStore>> load_stores(std::vector<EncoderConfig>& encoders) {
    std::vector<std::optional<EmbeddingStore>> stores(encoders.size());
    std::map<std::string, int> names;
    for (std::size_t i = 0; i < encoders.size(); ++i) {
        auto& ec = encoders[i];
        if (++names[ec.spec.name] > 1)
            throw Error("cli", ErrorKind::BadConfig, "encoder name '" + ec.spec.name + "' used twice");
        if (ec.spec.kind != EncoderKind::FileBacked) continue;
        auto store = read_store(ec.store_path);
        ec.spec.dim = store.dim();
        stores[i] = std::move(store);
    }
    return stores;
}

inline FusionLayout layout_for(const std::vector<EncoderConfig>& encoders) {
    FusionLayout layout;
    for (const auto& ec : encoders) layout.encoders.push_back({ec.spec.name, ec.spec.dim});
    return layout;
}

class FeatureBuilder {
public:
    FeatureBuilder(std::vector<EncoderConfig> encoders, std::vector<std::optional<EmbeddingStore>> stores,
                   ScalerState scaler, std::size_t title_min_tokens)
        : encoders_(std::move(encoders)),
          stores_(std::move(stores)),
          scaler_(std::move(scaler)),
          layout_(layout_for(encoders_)),
          title_min_tokens_(title_min_tokens) {}

    [[nodiscard]] FusedFeature build(const PostRecord& record) const {
        auto meta = build_metadata(record, scaler_, title_min_tokens_);
        PostRecord lowered = record;
        lowered.post_message = std::move(meta.lowered_message);
        std::vector<EmbeddingVector> vecs;
        vecs.reserve(encoders_.size());
        for (std::size_t i = 0; i < encoders_.size(); ++i) {
            vecs.push_back(encode_record(lowered, encoders_[i].spec, stores_[i] ? &*stores_[i] : nullptr));
        }
        return fuse(vecs, meta.xi, layout_);
    }

    [[nodiscard]] std::vector<FusedFeature> build_all(const std::vector<PostRecord>& records) const {
        std::vector<FusedFeature> out;
        out.reserve(records.size());
        for (const auto& r : records) out.push_back(build(r));
        return out;
    }

    [[nodiscard]] const FusionLayout& layout() const noexcept { return layout_; }
    [[nodiscard]] const ScalerState& scaler() const noexcept { return scaler_; }

private:
    std::vector<EncoderConfig> encoders_;
    std::vector<std::optional<EmbeddingStore>> stores_;
    ScalerState scaler_;
    FusionLayout layout_;
    std::size_t title_min_tokens_;
};

struct TrainedPipeline {
    EnsembleModel model;
    ScalerState scaler;
    FoldPlan plan;
    std::size_t dedup_removed = 0;
    std::size_t n_train = 0;
};

inline LabeledFeatures labeled(const FeatureBuilder& fb, const std::vector<PostRecord>& records) {
    LabeledFeatures out;
    out.x = fb.build_all(records);
    out.y.reserve(records.size());
    for (const auto& r : records) {
        if (!r.label) throw Error("cli", ErrorKind::BadLabel, "record '" + r.id + "' has no label");
        out.y.push_back(*r.label);
    }
    return out;
}

/// `extra_splits` only feed the scaler, and only under all-splits fitting.
/// A fold plan that yields a single-class validation slice is re-seeded
/// (seed + 1, seed + 2, ...) up to `max_reseeds` times.
inline TrainedPipeline train_pipeline(const std::vector<PostRecord>& train_records,
                                      const std::vector<std::vector<PostRecord>>& extra_splits, PipelineConfig cfg) {
    TrainedPipeline out;
    std::vector<PostRecord> kept = train_records;
    if (cfg.dedup) {
        auto d = dedup_training(train_records);
        kept = std::move(d.kept);
        out.dedup_removed = d.removed;
    }
    out.n_train = kept.size();
    std::vector<std::vector<PostRecord>> splits{kept};
    splits.insert(splits.end(), extra_splits.begin(), extra_splits.end());
    out.scaler = fit_scaler(splits, cfg.fit_scope);

    auto stores = load_stores(cfg.encoders);
    FeatureBuilder fb(cfg.encoders, std::move(stores), out.scaler, cfg.title_min_tokens);
    const auto data = labeled(fb, kept);

    std::vector<std::string> ids;
    ids.reserve(kept.size());
    for (const auto& r : kept) ids.push_back(r.id);

    for (std::size_t attempt = 0;; ++attempt) {
        out.plan = make_folds(ids, cfg.k, cfg.fold_seed + attempt);
        try {
            out.model = train_ensemble(data, out.plan, cfg.training, fb.layout(), cfg.threads);
            break;
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::DegenerateFold || attempt + 1 >= cfg.max_reseeds) throw;
        }
    }
    return out;
}

// Ensemble directory: manifest.txt, scaler.txt, fold_NN.head.

inline std::string encoder_manifest_entry(const EncoderSpec& s) {
    return s.name + ":" + (s.kind == EncoderKind::Hashing ? "hashing" : "file") + ":" + std::to_string(s.dim) + ":" +
           std::to_string(s.max_tokens);
}

inline std::string ensemble_manifest(const TrainedPipeline& t, const PipelineConfig& cfg) {
    std::ostringstream os;
    os << "# reintel ensemble manifest\n"
       << "format=1\n"
       << "version=reintel " << kVersion << '\n'
       << "k=" << t.plan.k << '\n'
       << "fold_seed=" << t.plan.seed << '\n'
       << "train_seed=" << cfg.training.seed << '\n';
    for (std::size_t f = 0; f < t.model.fold_seeds.size(); ++f)
        os << "fold_shuffle_seed." << f << '=' << t.model.fold_seeds[f] << '\n';
    std::string encs;
    for (std::size_t i = 0; i < cfg.encoders.size(); ++i) {
        if (i) encs.push_back(',');
        auto spec = cfg.encoders[i].spec;
        if (spec.kind == EncoderKind::FileBacked) spec.dim = t.model.layout.encoders[i].dim;
        encs += encoder_manifest_entry(spec);
    }
    os << "encoders=" << encs << '\n'
       << "fusion=" << t.model.layout.encoders_string() << '\n'
       << "metadata_dim=" << t.model.layout.metadata_dim << '\n'
       << "title_min_tokens=" << cfg.title_min_tokens << '\n'
       << "fit_scope=" << to_string(cfg.fit_scope) << '\n'
       << "batch_size=" << cfg.training.batch_size << '\n'
       << "learning_rate=" << io::format_double(cfg.training.learning_rate) << '\n'
       << "lr_override=" << (cfg.training.lr_override ? io::format_double(*cfg.training.lr_override) : "") << '\n'
       << "max_epochs=" << cfg.training.max_epochs << '\n'
       << "early_stopping_patience=" << cfg.training.early_stopping_patience << '\n'
       << "dedup=" << (cfg.dedup ? "true" : "false") << '\n'
       << "dedup_removed=" << t.dedup_removed << '\n'
       << "n_train=" << t.n_train << '\n';
    for (std::size_t f = 0; f < t.model.fold_aucs.size(); ++f)
        os << "fold_auc." << f << '=' << io::format_double(t.model.fold_aucs[f]) << '\n';
    return os.str();
}

inline void write_ensemble_dir(const TrainedPipeline& t, const PipelineConfig& cfg, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    write_fold_checkpoints(t.model, dir);
    io::atomic_write(dir / "scaler.txt", write_scaler_state(t.scaler));
    io::atomic_write(dir / "manifest.txt", ensemble_manifest(t, cfg));
}

struct LoadedEnsemble {
    EnsembleModel model;
    ScalerState scaler;
    std::vector<EncoderSpec> encoders;
    std::size_t title_min_tokens = 4;
    std::map<std::string, std::string> manifest;
};

inline LoadedEnsemble read_ensemble_dir(const std::filesystem::path& dir) {
    if (!std::filesystem::is_directory(dir))
        throw Error("cv_ensemble", ErrorKind::MissingFile, "ensemble directory '" + dir.string() + "' does not exist");
    LoadedEnsemble out;
    out.manifest = io::parse_key_values(io::read_file(dir / "manifest.txt", "cv_ensemble"), "cv_ensemble");
    auto need = [&](const std::string& key) -> const std::string& {
        auto it = out.manifest.find(key);
        if (it == out.manifest.end())
            throw Error("cv_ensemble", ErrorKind::BadConfig, "ensemble manifest lacks '" + key + "'");
        return it->second;
    };
    auto k = io::parse_int(need("k"));
    auto tmt = io::parse_int(need("title_min_tokens"));
    if (!k || *k < 1 || !tmt || *tmt < 1)
        throw Error("cv_ensemble", ErrorKind::BadConfig, "ensemble manifest has a bad k or title_min_tokens");
    out.title_min_tokens = static_cast<std::size_t>(*tmt);
    for (const auto& entry : io::split(need("encoders"), ',')) {
        auto parts = io::split(entry, ':');
        if (parts.size() != 4)
            throw Error("cv_ensemble", ErrorKind::BadConfig, "bad encoder entry '" + entry + "' in manifest");
        EncoderSpec s;
        s.name = parts[0];
        s.kind = parts[1] == "hashing" ? EncoderKind::Hashing : EncoderKind::FileBacked;
        auto dim = io::parse_int(parts[2]);
        auto mt = io::parse_int(parts[3]);
        if (!dim || *dim < 1 || !mt || *mt < 1 || (parts[1] != "hashing" && parts[1] != "file"))
            throw Error("cv_ensemble", ErrorKind::BadConfig, "bad encoder entry '" + entry + "' in manifest");
        s.dim = static_cast<std::uint32_t>(*dim);
        s.max_tokens = static_cast<std::size_t>(*mt);
        out.encoders.push_back(std::move(s));
    }
    out.scaler = read_scaler_state(io::read_file(dir / "scaler.txt", "cv_ensemble"));
    out.model = read_fold_checkpoints(dir, static_cast<std::size_t>(*k));
    return out;
}

/// File-backed encoders need a store path for every record scored;
/// `store_paths` maps encoder name to store file.
inline std::vector<Prediction> predict_pipeline(const LoadedEnsemble& ens, const std::vector<PostRecord>& records,
                                                const std::map<std::string, std::filesystem::path>& store_paths) {
    std::vector<EncoderConfig> encoders;
    for (const auto& s : ens.encoders) {
        EncoderConfig ec{s, {}};
        if (s.kind == EncoderKind::FileBacked) {
            auto it = store_paths.find(s.name);
            if (it == store_paths.end())
                throw Error("cli", ErrorKind::BadConfig, "no store given for file-backed encoder '" + s.name + "'");
            ec.store_path = it->second;
        }
        encoders.push_back(std::move(ec));
    }
    auto stores = load_stores(encoders);
    for (std::size_t i = 0; i < encoders.size(); ++i) {
        if (encoders[i].spec.dim != ens.encoders[i].dim)
            throw Error("encoders", ErrorKind::DimMismatch, "store for '" + encoders[i].spec.name +
                                                                "' does not match the trained dim");
    }
    FeatureBuilder fb(std::move(encoders), std::move(stores), ens.scaler, ens.title_min_tokens);
    if (!(fb.layout() == ens.model.layout))
        throw Error("cv_ensemble", ErrorKind::DimMismatch, "encoder layout does not match the ensemble");
    std::vector<std::string> ids;
    for (const auto& r : records) ids.push_back(r.id);
    return predict_ensemble(ens.model, ids, fb.build_all(records));
}

inline std::string format_predictions(const std::vector<Prediction>& preds) {
    std::string out = "id,probability\n";
    for (const auto& p : preds) out += csv::quote(p.id, ',') + "," + io::format_fixed(p.probability, 6) + "\n";
    return out;
}

} // namespace reintel
