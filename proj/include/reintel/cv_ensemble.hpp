#pragma once

// k-fold training driver and the average-voting merger over fold heads.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <future>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <unordered_map>
#include <vector>

#include "reintel/error.hpp"
#include "reintel/fusion.hpp"
#include "reintel/io.hpp"

namespace reintel {

struct FoldPlan {
    std::size_t k = 12;
    std::uint64_t seed = 0;
    std::vector<std::string> ids;
    std::vector<std::size_t> fold_of; // parallel to ids

    [[nodiscard]] std::vector<std::size_t> fold_sizes() const {
        std::vector<std::size_t> sizes(k, 0);
        for (std::size_t f : fold_of) ++sizes[f];
        return sizes;
    }

    [[nodiscard]] std::size_t fold_for(const std::string& id) const {
        auto it = std::find(ids.begin(), ids.end(), id);
        if (it == ids.end()) throw Error("cv_ensemble", ErrorKind::InvalidConfig, "id '" + id + "' not in fold plan");
        return fold_of[static_cast<std::size_t>(it - ids.begin())];
    }
};

/// Seeded shuffle of positions, then round-robin fold assignment.
inline FoldPlan make_folds(std::vector<std::string> ids, std::size_t k, std::uint64_t seed) {
    if (k < 2) throw Error("cv_ensemble", ErrorKind::InvalidConfig, "k must be >= 2");
    if (ids.size() < k)
        throw Error("cv_ensemble", ErrorKind::InvalidConfig,
                    "k = " + std::to_string(k) + " exceeds the number of records (" + std::to_string(ids.size()) + ")");
    FoldPlan plan;
    plan.k = k;
    plan.seed = seed;
    std::vector<std::size_t> order(ids.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::mt19937_64 rng(seed);
    std::shuffle(order.begin(), order.end(), rng);
    plan.fold_of.assign(ids.size(), 0);
    for (std::size_t pos = 0; pos < order.size(); ++pos) plan.fold_of[order[pos]] = pos % k;
    plan.ids = std::move(ids);
    return plan;
}

struct EnsembleModel {
    FusionLayout layout;
    std::vector<ClassifierHead> heads;
    std::vector<double> fold_aucs;
    std::vector<std::uint64_t> fold_seeds;
    std::vector<std::size_t> fold_epochs;
};

/// Shuffle seed for fold `fold` given the training seed.
inline std::uint64_t fold_seed(std::uint64_t base, std::size_t fold) noexcept {
    return base + 0x9E3779B97F4A7C15ULL * (static_cast<std::uint64_t>(fold) + 1);
}

/// `threads` > 1 trains folds concurrently; results do not depend on it.
inline EnsembleModel train_ensemble(const LabeledFeatures& corpus, const FoldPlan& plan, const TrainingConfig& cfg,
                                    const FusionLayout& layout, unsigned threads = 1) {
    if (corpus.size() != plan.fold_of.size())
        throw Error("cv_ensemble", ErrorKind::LengthMismatch, "fold plan size does not match the corpus");
    for (const auto& f : corpus.x) {
        if (f.values.size() != layout.total_dim())
            throw Error("cv_ensemble", ErrorKind::DimMismatch, "feature length does not match the fusion layout");
    }
    std::vector<LabeledFeatures> train(plan.k), valid(plan.k);
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        for (std::size_t f = 0; f < plan.k; ++f) {
            auto& dst = plan.fold_of[i] == f ? valid[f] : train[f];
            dst.x.push_back(corpus.x[i]);
            dst.y.push_back(corpus.y[i]);
        }
    }
    for (std::size_t f = 0; f < plan.k; ++f) {
        const auto& y = valid[f].y;
        const auto pos = std::count(y.begin(), y.end(), 1);
        if (pos == 0 || pos == static_cast<std::ptrdiff_t>(y.size()))
            throw Error("cv_ensemble", ErrorKind::DegenerateFold,
                        "fold " + std::to_string(f) + " validation slice has a single class; re-seed the plan");
    }

    EnsembleModel model;
    model.layout = layout;
    model.heads.resize(plan.k);
    model.fold_aucs.resize(plan.k);
    model.fold_seeds.resize(plan.k);
    model.fold_epochs.resize(plan.k);

    auto run_fold = [&](std::size_t f) {
        TrainingConfig fold_cfg = cfg;
        fold_cfg.seed = fold_seed(cfg.seed, f);
        auto res = train_head(train[f], valid[f], fold_cfg);
        model.heads[f] = std::move(res.head);
        model.fold_aucs[f] = res.best_valid_auc;
        model.fold_seeds[f] = fold_cfg.seed;
        model.fold_epochs[f] = res.best_epoch;
    };

    if (threads <= 1) {
        for (std::size_t f = 0; f < plan.k; ++f) run_fold(f);
    } else {
        std::vector<std::future<void>> jobs;
        for (std::size_t next = 0; next < plan.k;) {
            jobs.clear();
            for (unsigned t = 0; t < threads && next < plan.k; ++t, ++next) {
                jobs.push_back(std::async(std::launch::async, run_fold, next));
            }
            for (auto& j : jobs) j.get();
        }
    }
    return model;
}

/// Mean of the fold heads' probabilities.
inline std::vector<double> predict_ensemble(const EnsembleModel& model, std::span<const FusedFeature> records) {
    if (model.heads.empty()) throw Error("cv_ensemble", ErrorKind::InvalidConfig, "ensemble has no heads");
    std::vector<double> out(records.size(), 0.0);
    for (const auto& head : model.heads) {
        if (head.dim() != model.layout.total_dim())
            throw Error("cv_ensemble", ErrorKind::DimMismatch, "head dim does not match the ensemble layout");
        for (std::size_t i = 0; i < records.size(); ++i) out[i] += predict(head, records[i]);
    }
    const double k = static_cast<double>(model.heads.size());
    for (double& p : out) p /= k;
    return out;
}

struct Prediction {
    std::string id;
    double probability = 0.0;
};

inline std::vector<Prediction> predict_ensemble(const EnsembleModel& model, const std::vector<std::string>& ids,
                                                std::span<const FusedFeature> records) {
    if (ids.size() != records.size())
        throw Error("cv_ensemble", ErrorKind::LengthMismatch, "id and feature counts differ");
    auto probs = predict_ensemble(model, records);
    std::vector<Prediction> out;
    out.reserve(ids.size());
    for (std::size_t i = 0; i < ids.size(); ++i) out.push_back({ids[i], probs[i]});
    return out;
}

inline std::string fold_checkpoint_name(std::size_t fold) {
    std::string n = std::to_string(fold);
    if (n.size() < 2) n.insert(0, 2 - n.size(), '0');
    return "fold_" + n + ".head";
}

/// Writes one checkpoint per fold. The manifest is written by the caller,
/// which knows the full pipeline configuration.
inline void write_fold_checkpoints(const EnsembleModel& model, const std::filesystem::path& dir) {
    for (std::size_t f = 0; f < model.heads.size(); ++f) {
        write_checkpoint({model.heads[f], model.layout, model.fold_seeds[f], model.fold_epochs[f], model.fold_aucs[f]},
                         dir / fold_checkpoint_name(f));
    }
}

inline EnsembleModel read_fold_checkpoints(const std::filesystem::path& dir, std::size_t k) {
    EnsembleModel model;
    for (std::size_t f = 0; f < k; ++f) {
        const auto path = dir / fold_checkpoint_name(f);
        if (!std::filesystem::is_regular_file(path))
            throw Error("cv_ensemble", ErrorKind::MissingFile, "missing checkpoint '" + path.string() + "'");
        auto ck = read_checkpoint(path);
        if (f == 0) {
            model.layout = ck.layout;
        } else if (!(ck.layout == model.layout)) {
            throw Error("cv_ensemble", ErrorKind::DimMismatch, "fold checkpoints disagree on the fusion layout");
        }
        model.heads.push_back(std::move(ck.head));
        model.fold_aucs.push_back(ck.valid_auc);
        model.fold_seeds.push_back(ck.seed);
        model.fold_epochs.push_back(ck.epoch);
    }
    return model;
}

} // namespace reintel
