// reintel: command-line driver for the reliability classification pipeline.
//
// Exit codes: 0 success, 1 usage, 2 data error, 3 internal error.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <unordered_map>
#include <vector>

#include <CLI11.hpp>

#include "reintel/reintel.hpp"

namespace fs = std::filesystem;
using namespace reintel;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitInternal = 3;

struct SchemaOptions {
    Schema schema;
    std::string delimiter = ",";

    Schema resolve() const {
        Schema s = schema;
        if (delimiter == "tab" || delimiter == "\\t") {
            s.delimiter = '\t';
        } else if (delimiter.size() == 1) {
            s.delimiter = delimiter[0];
        } else {
            throw Error("cli", ErrorKind::BadConfig, "delimiter must be a single character or 'tab'");
        }
        return s;
    }
};

void add_schema_options(CLI::App& app, SchemaOptions& o) {
    auto& s = o.schema;
    app.add_option("--delimiter", o.delimiter, "Field delimiter (single character or 'tab')")->capture_default_str();
    app.add_option("--col-id", s.id, "Column holding the record id")->capture_default_str();
    app.add_option("--col-user_name", s.user_name, "Column holding the anonymized user")->capture_default_str();
    app.add_option("--col-post_message", s.post_message, "Column holding the message text")->capture_default_str();
    app.add_option("--col-timestamp_post", s.timestamp_post, "Column holding Unix seconds")->capture_default_str();
    app.add_option("--col-num_like_post", s.num_like_post, "Column holding like counts")->capture_default_str();
    app.add_option("--col-num_comment_post", s.num_comment_post, "Column holding comment counts")
        ->capture_default_str();
    app.add_option("--col-num_share_post", s.num_share_post, "Column holding share counts")->capture_default_str();
    app.add_option("--col-images", s.images, "Column holding image links (empty: none)")->capture_default_str();
    app.add_option("--col-label", s.label, "Column holding the 0/1 label")->capture_default_str();
}

std::string run_manifest(const CLI::App& root, std::string_view command) {
    std::string out = "# reintel run manifest\n";
    out += "# version: reintel " + std::string(kVersion) + "\n";
    out += "# command: " + std::string(command) + "\n";
    // Root options plus the invoked subcommand; empty lists are omitted.
    const std::string prefix = std::string(command) + ".";
    const CLI::App* sub = root.get_subcommand_no_throw(std::string(command));
    std::istringstream lines(root.config_to_str(true, false));
    for (std::string line; std::getline(lines, line);) {
        const auto eq = line.find('=');
        const auto key = line.substr(0, eq);
        const bool scoped = key.find('.') != std::string::npos;
        if (scoped && key.rfind(prefix, 0) != 0) continue;
        if (eq != std::string::npos && line.substr(eq + 1) == "\"\"") {
            const CLI::App* owner = scoped ? sub : &root;
            const CLI::Option* opt =
                owner ? owner->get_option_no_throw("--" + (scoped ? key.substr(prefix.size()) : key)) : nullptr;
            if (opt && opt->get_items_expected_max() > 1) continue;
        }
        out += line + "\n";
    }
    return out;
}

fs::path sibling_manifest(const fs::path& output) {
    fs::path p = output;
    p += ".manifest.txt";
    return p;
}

std::vector<std::vector<PostRecord>> load_splits(const std::vector<std::string>& paths, const Schema& schema) {
    std::vector<std::vector<PostRecord>> out;
    for (const auto& p : paths) out.push_back(load_corpus(p, schema, false));
    return out;
}

// stats -----------------------------------------------------------------

struct StatsCmd {
    std::string file;
    bool labeled = false;

    void attach(CLI::App& sub) {
        sub.add_option("file", file, "Corpus file")->required();
        sub.add_flag("--labeled", labeled, "Require and validate the label column");
    }

    int run(const Schema& schema) const {
        const auto records = load_corpus(file, schema, labeled);
        const auto s = compute_stats(records);
        std::cout << format_stats_table(s) << '\n' << format_stats_kv(s);
        return 0;
    }
};

// preprocess ------------------------------------------------------------

struct PreprocessCmd {
    std::string train;
    std::vector<std::string> splits;
    std::string fit_scope = "all-splits";
    bool no_dedup = false;
    std::size_t title_min_tokens = 4;
    std::string out_dir;

    void attach(CLI::App& sub) {
        sub.add_option("--train", train, "Labeled training corpus")->required();
        sub.add_option("--split", splits, "Additional unlabeled split(s)");
        sub.add_option("--fit-scope", fit_scope, "all-splits | train-only")->capture_default_str();
        sub.add_flag("--no-dedup", no_dedup, "Keep duplicated training examples");
        sub.add_option("--title-min-tokens", title_min_tokens, "Minimum all-caps run length")
            ->capture_default_str()
            ->check(CLI::PositiveNumber);
        sub.add_option("--out-dir", out_dir, "Output directory")->required();
    }

    static std::string processed_csv(const std::vector<PostRecord>& records, const ScalerState& state,
                                     std::size_t min_tokens, bool with_labels) {
        std::string out = "id";
        if (with_labels) out += ",label";
        out += ",post_message";
        for (std::string_view name : {"num_like_post", "num_comment_post", "num_share_post", "has_images",
                                      "include_a_title", "day_in_year"}) {
            out += ",";
            out += name;
        }
        out += "\n";
        for (const auto& r : records) {
            auto meta = build_metadata(r, state, min_tokens);
            out += csv::quote(r.id, ',');
            if (with_labels) out += "," + std::to_string(*r.label);
            out += "," + csv::quote(meta.lowered_message, ',');
            for (double v : meta.xi.values) out += "," + io::format_double(v);
            out += "\n";
        }
        return out;
    }

    int run(const Schema& schema, const CLI::App& root) const {
        auto train_records = load_corpus(train, schema, true);
        std::size_t removed = 0;
        if (!no_dedup) {
            auto d = dedup_training(train_records);
            train_records = std::move(d.kept);
            removed = d.removed;
        }
        std::vector<std::vector<PostRecord>> all{train_records};
        auto extra = load_splits(splits, schema);
        all.insert(all.end(), extra.begin(), extra.end());
        const auto state = fit_scaler(all, parse_fit_scope(fit_scope));

        const fs::path dir(out_dir);
        io::atomic_write(dir / "scaler.txt", write_scaler_state(state));
        io::atomic_write(dir / (fs::path(train).stem().string() + ".processed.csv"),
                         processed_csv(train_records, state, title_min_tokens, true));
        for (std::size_t i = 0; i < extra.size(); ++i) {
            io::atomic_write(dir / (fs::path(splits[i]).stem().string() + ".processed.csv"),
                             processed_csv(extra[i], state, title_min_tokens, false));
        }
        io::atomic_write(dir / "manifest.txt",
                         run_manifest(root, "preprocess") + "dedup_removed=" + std::to_string(removed) + "\n");
        std::cout << "kept " << train_records.size() << " training records (" << removed << " duplicates removed)\n";
        return 0;
    }
};

// encode ----------------------------------------------------------------

struct EncodeCmd {
    std::string file;
    std::string out;
    std::string name = "hash";
    std::uint32_t dim = 256;
    std::size_t max_tokens = 256;
    std::size_t title_min_tokens = 4;

    void attach(CLI::App& sub) {
        sub.add_option("file", file, "Corpus file")->required();
        sub.add_option("--out", out, "Output embedding store (.remb)")->required();
        sub.add_option("--name", name, "Encoder name stored in the header")->capture_default_str();
        sub.add_option("--dim", dim, "Hashing dimension")->capture_default_str()->check(CLI::PositiveNumber);
        sub.add_option("--max-tokens", max_tokens, "Tokens kept per message")
            ->capture_default_str()
            ->check(CLI::PositiveNumber);
        sub.add_option("--title-min-tokens", title_min_tokens, "Minimum all-caps run length")
            ->capture_default_str()
            ->check(CLI::PositiveNumber);
    }

    int run(const Schema& schema, const CLI::App& root) const {
        const auto records = load_corpus(file, schema, false);
        EmbeddingStore store(name, dim);
        const EncoderSpec spec{name, dim, EncoderKind::Hashing, max_tokens};
        for (const auto& r : records) {
            PostRecord lowered = r;
            lowered.post_message = detect_title(r.post_message, title_min_tokens).lowered_message;
            store.add(r.id, encode_record(lowered, spec).values);
        }
        write_store(store, out);
        io::atomic_write(sibling_manifest(out), run_manifest(root, "encode"));
        std::cout << "wrote " << store.size() << " vectors of dim " << dim << " to " << out << '\n';
        return 0;
    }
};

// train -----------------------------------------------------------------

struct TrainCmd {
    std::string train;
    std::vector<std::string> splits;
    std::vector<std::string> encoders{"hashing:hash:256:256"};
    std::size_t k = 12;
    std::uint64_t fold_seed = 0;
    std::uint64_t seed = 0;
    std::size_t batch_size = 16;
    double lr = 3e-5;
    std::optional<double> lr_override;
    std::size_t epochs = 5;
    std::size_t patience = 1;
    std::string fit_scope = "all-splits";
    bool no_dedup = false;
    std::size_t title_min_tokens = 4;
    unsigned threads = 1;
    std::string out;

    void attach(CLI::App& sub) {
        sub.add_option("--train", train, "Labeled training corpus")->required();
        sub.add_option("--split", splits, "Unlabeled split(s) that also feed the scaler");
        sub.add_option("--encoder", encoders, "hashing:<name>[:<dim>[:<max_tokens>]] or file:<name>:<path>")
            ->capture_default_str();
        sub.add_option("--k", k, "Number of folds")->capture_default_str()->check(CLI::Range(2, 1000));
        sub.add_option("--fold-seed", fold_seed, "Seed of the fold assignment")->capture_default_str();
        sub.add_option("--seed", seed, "Seed of the per-epoch shuffles")->capture_default_str();
        sub.add_option("--batch-size", batch_size, "Mini-batch size")->capture_default_str()->check(CLI::PositiveNumber);
        sub.add_option("--lr", lr, "Learning rate")->capture_default_str();
        sub.add_option("--lr-override", lr_override, "Learning rate used instead of --lr for head-only training");
        sub.add_option("--epochs", epochs, "Maximum epochs per fold")->capture_default_str()->check(CLI::PositiveNumber);
        sub.add_option("--patience", patience, "Epochs without validation-AUC gain before stopping")
            ->capture_default_str()
            ->check(CLI::PositiveNumber);
        sub.add_option("--fit-scope", fit_scope, "all-splits | train-only")->capture_default_str();
        sub.add_flag("--no-dedup", no_dedup, "Keep duplicated training examples");
        sub.add_option("--title-min-tokens", title_min_tokens, "Minimum all-caps run length")
            ->capture_default_str()
            ->check(CLI::PositiveNumber);
        sub.add_option("--threads", threads, "Folds trained concurrently")->capture_default_str();
        sub.add_option("--out", out, "Ensemble output directory")->required();
    }

    int run(const Schema& schema, const CLI::App& root) const {
        PipelineConfig cfg;
        cfg.schema = schema;
        cfg.encoders.clear();
        for (const auto& e : encoders) cfg.encoders.push_back(parse_encoder_config(e));
        cfg.k = k;
        cfg.fold_seed = fold_seed;
        cfg.training.seed = seed;
        cfg.training.batch_size = batch_size;
        cfg.training.learning_rate = lr;
        cfg.training.lr_override = lr_override;
        cfg.training.max_epochs = epochs;
        cfg.training.early_stopping_patience = patience;
        cfg.fit_scope = parse_fit_scope(fit_scope);
        cfg.dedup = !no_dedup;
        cfg.title_min_tokens = title_min_tokens;
        cfg.threads = threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : threads;
        cfg.training.validate();

        const auto train_records = load_corpus(train, schema, true);
        const auto extra = load_splits(splits, schema);
        const auto trained = train_pipeline(train_records, extra, cfg);
        write_ensemble_dir(trained, cfg, out);
        io::atomic_write(fs::path(out) / "run.txt", run_manifest(root, "train"));

        std::cout << "trained " << trained.model.heads.size() << " fold heads on " << trained.n_train
                  << " records (" << trained.dedup_removed << " duplicates removed)\n";
        for (std::size_t f = 0; f < trained.model.fold_aucs.size(); ++f) {
            std::cout << "  fold " << f << ": valid AUC " << io::format_fixed(trained.model.fold_aucs[f], 4)
                      << " (epoch " << trained.model.fold_epochs[f] << ")\n";
        }
        return 0;
    }
};

// predict ---------------------------------------------------------------

struct PredictCmd {
    std::string file;
    std::string model;
    std::vector<std::string> stores;
    std::string out;

    void attach(CLI::App& sub) {
        sub.add_option("file", file, "Corpus to score")->required();
        sub.add_option("--model", model, "Ensemble directory written by 'train'")->required();
        sub.add_option("--store", stores, "name=path for each file-backed encoder");
        sub.add_option("--out", out, "Prediction CSV (id,probability)")->required();
    }

    int run(const Schema& schema, const CLI::App& root) const {
        std::map<std::string, fs::path> store_paths;
        for (const auto& s : stores) {
            const auto eq = s.find('=');
            if (eq == std::string::npos || eq == 0)
                throw Error("cli", ErrorKind::BadConfig, "--store expects name=path, got '" + s + "'");
            store_paths[s.substr(0, eq)] = s.substr(eq + 1);
        }
        const auto ensemble = read_ensemble_dir(model);
        const auto records = load_corpus(file, schema, false);
        const auto preds = predict_pipeline(ensemble, records, store_paths);
        io::atomic_write(out, format_predictions(preds));
        io::atomic_write(sibling_manifest(out), run_manifest(root, "predict"));
        std::cout << "wrote " << preds.size() << " predictions to " << out << '\n';
        return 0;
    }
};

// evaluate --------------------------------------------------------------

struct EvaluateCmd {
    std::string pred;
    std::string gold;

    void attach(CLI::App& sub) {
        sub.add_option("--pred", pred, "Prediction CSV (id,probability)")->required();
        sub.add_option("--gold", gold, "Corpus file with id and label columns")->required();
    }

    static std::size_t column(const csv::Row& header, const std::string& name, const std::string& file) {
        for (std::size_t i = 0; i < header.fields.size(); ++i) {
            if (io::trim(header.fields[i]) == name) return i;
        }
        throw Error("metrics", ErrorKind::MissingColumn, file + ": no column '" + name + "'");
    }

    int run(const Schema& schema) const {
        if (!fs::is_regular_file(pred)) throw Error("metrics", ErrorKind::MissingFile, "no prediction file '" + pred + "'");
        if (!fs::is_regular_file(gold)) throw Error("metrics", ErrorKind::MissingFile, "no gold file '" + gold + "'");
        const auto pred_rows = csv::parse(io::read_file(pred, "metrics"), ',');
        const auto gold_rows = csv::parse(io::read_file(gold, "metrics"), schema.delimiter);
        if (pred_rows.empty() || gold_rows.empty())
            throw Error("metrics", ErrorKind::MalformedCsv, "prediction and gold files need a header row");

        const auto p_id = column(pred_rows[0], "id", pred);
        const auto p_prob = column(pred_rows[0], "probability", pred);
        std::unordered_map<std::string, double> scores;
        for (std::size_t r = 1; r < pred_rows.size(); ++r) {
            const auto& f = pred_rows[r].fields;
            if (f.size() <= std::max(p_id, p_prob))
                throw Error("metrics", ErrorKind::MalformedCsv, pred + ": short row " + std::to_string(r));
            auto v = io::parse_double(f[p_prob]);
            if (!v) throw Error("metrics", ErrorKind::NonFiniteValue, pred + ": bad probability in row " + std::to_string(r));
            if (!scores.emplace(std::string(io::trim(f[p_id])), *v).second)
                throw Error("metrics", ErrorKind::DuplicateId, pred + ": duplicate id in row " + std::to_string(r));
        }

        const auto g_id = column(gold_rows[0], schema.id, gold);
        const auto g_label = column(gold_rows[0], schema.label, gold);
        std::vector<double> s;
        std::vector<int> y;
        for (std::size_t r = 1; r < gold_rows.size(); ++r) {
            const auto& f = gold_rows[r].fields;
            if (f.size() <= std::max(g_id, g_label))
                throw Error("metrics", ErrorKind::MalformedCsv, gold + ": short row " + std::to_string(r));
            const std::string id(io::trim(f[g_id]));
            auto label = io::parse_double(f[g_label]);
            if (!label || (*label != 0.0 && *label != 1.0))
                throw Error("metrics", ErrorKind::BadLabel, gold + ": bad label in row " + std::to_string(r));
            auto it = scores.find(id);
            if (it == scores.end()) throw Error("metrics", ErrorKind::LengthMismatch, "no prediction for id '" + id + "'");
            s.push_back(it->second);
            y.push_back(static_cast<int>(*label));
            scores.erase(it);
        }
        if (!scores.empty())
            throw Error("metrics", ErrorKind::LengthMismatch,
                        std::to_string(scores.size()) + " predicted ids have no gold label");
        const auto r = roc_auc(s, y);
        std::cout << "AUC " << io::format_fixed(r.auc, 4) << " (n_pos=" << r.n_pos << ", n_neg=" << r.n_neg << ")\n";
        return 0;
    }
};

// generate --------------------------------------------------------------

struct GenerateCmd {
    synthetic::GeneratorConfig cfg;
    std::string out;
    bool unlabeled = false;

    void attach(CLI::App& sub) {
        sub.add_option("--out", out, "Output corpus file")->required();
        sub.add_option("--n", cfg.n_records, "Number of records")->capture_default_str();
        sub.add_option("--seed", cfg.seed, "Generator seed")->capture_default_str();
        sub.add_option("--id-prefix", cfg.id_prefix, "Prefix of generated ids")->capture_default_str();
        sub.add_flag("--unlabeled", unlabeled, "Omit the label column");
    }

    int run(const Schema& schema, const CLI::App& root) const {
        const auto records = synthetic::generate(cfg);
        io::atomic_write(out, write_corpus(records, schema, !unlabeled));
        io::atomic_write(sibling_manifest(out), run_manifest(root, "generate"));
        std::cout << "wrote " << records.size() << " records to " << out << '\n';
        return 0;
    }
};

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Reliability classification of SNS posts: metadata + frozen text encoders, k-fold sigmoid heads"};
    app.set_version_flag("--version", "reintel " + std::string(kVersion));
    app.set_config("--config", "", "key=value configuration file; command-line flags override it");
    app.require_subcommand(1);

    SchemaOptions schema_opts;
    add_schema_options(app, schema_opts);

    StatsCmd stats;
    PreprocessCmd preprocess;
    EncodeCmd encode;
    TrainCmd train;
    PredictCmd predict;
    EvaluateCmd evaluate;
    GenerateCmd generate;
    auto* s_stats = app.add_subcommand("stats", "Print corpus statistics");
    auto* s_pre = app.add_subcommand("preprocess", "Dedup, impute, scale and write processed corpora");
    auto* s_enc = app.add_subcommand("encode", "Build a hashing-encoder embedding store");
    auto* s_train = app.add_subcommand("train", "Train the k-fold ensemble");
    auto* s_pred = app.add_subcommand("predict", "Score a corpus with a trained ensemble");
    auto* s_eval = app.add_subcommand("evaluate", "ROC-AUC of predictions against gold labels");
    auto* s_gen = app.add_subcommand("generate", "Write a synthetic corpus with a planted signal");
    stats.attach(*s_stats);
    preprocess.attach(*s_pre);
    encode.attach(*s_enc);
    train.attach(*s_train);
    predict.attach(*s_pred);
    evaluate.attach(*s_eval);
    generate.attach(*s_gen);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }

    try {
        const Schema schema = schema_opts.resolve();
        if (*s_stats) return stats.run(schema);
        if (*s_pre) return preprocess.run(schema, app);
        if (*s_enc) return encode.run(schema, app);
        if (*s_train) return train.run(schema, app);
        if (*s_pred) return predict.run(schema, app);
        if (*s_eval) return evaluate.run(schema);
        if (*s_gen) return generate.run(schema, app);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return e.kind() == ErrorKind::BadConfig ? kExitUsage : kExitData;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return kExitInternal;
    }
    return kExitUsage;
}
