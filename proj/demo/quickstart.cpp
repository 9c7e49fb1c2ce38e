// Trains a 12-fold ensemble on a synthetic corpus and scores a held-out split.

#include <iostream>

#include "reintel/reintel.hpp"

int main() {
    using namespace reintel;

    const auto records = synthetic::generate({.n_records = 2000, .seed = 2020});
    const std::vector<PostRecord> train(records.begin(), records.end() - 500);
    std::vector<PostRecord> test(records.end() - 500, records.end());
    std::vector<int> gold;
    for (auto& r : test) {
        gold.push_back(*r.label);
        r.label.reset();
    }

    PipelineConfig cfg;
    cfg.training.lr_override = 2.0;
    cfg.training.seed = 7;
    cfg.fold_seed = 11;

    const auto trained = train_pipeline(train, {test}, cfg);
    std::cout << "dedup removed " << trained.dedup_removed << " of " << train.size() << " training records\n";
    for (std::size_t f = 0; f < trained.model.fold_aucs.size(); ++f)
        std::cout << "fold " << f << " valid AUC " << io::format_fixed(trained.model.fold_aucs[f], 4) << '\n';

    FeatureBuilder features(cfg.encoders, {std::nullopt}, trained.scaler, cfg.title_min_tokens);
    const auto probs = predict_ensemble(trained.model, features.build_all(test));
    std::cout << "held-out AUC " << io::format_fixed(roc_auc(probs, gold).auc, 4) << '\n';
}
