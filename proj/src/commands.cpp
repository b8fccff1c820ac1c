#include "glr/commands.hpp"

#include "glr/dataset_io.hpp"
#include "glr/ensemble.hpp"
#include "glr/error.hpp"
#include "glr/knn.hpp"
#include "glr/recipe.hpp"
#include "glr/rng.hpp"
#include "glr/synthetic.hpp"
#include "glr/trainer.hpp"

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <unordered_map>

namespace glr::cli {
namespace {

namespace fs = std::filesystem;

std::string sample_id(std::size_t pool_index) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "s%06zu", pool_index);
    return buf;
}

enum class Assign : std::uint8_t { train, val, query, index };

}  // namespace

void run_gen(const GenOptions& opt) {
    if (opt.min_class_samples == 0)
        fail(Errc::bad_argument, "gen: --min-class-samples must be >= 1");
    if (opt.out_dir.empty()) fail(Errc::bad_argument, "gen: missing output directory");

    SyntheticOptions sopt;
    sopt.num_classes = opt.classes;
    sopt.dim = opt.dim_in;
    sopt.samples_min = opt.samples_min;
    sopt.samples_max = opt.samples_max;
    sopt.noise_sigma = opt.noise_sigma;
    sopt.label_noise = opt.label_noise;
    sopt.seed = opt.seed;
    const SyntheticData syn = gen_synthetic(sopt);
    const std::size_t n = syn.samples.size();

    // Per-class sample indices, in generation order.
    std::vector<std::vector<std::size_t>> by_class(opt.classes);
    for (std::size_t i = 0; i < n; ++i) by_class[syn.true_labels[i]].push_back(i);

    // One validation sample per sufficiently populated class, then one query
    // and two index samples when enough remain; everything else trains.
    std::vector<Assign> assign(n, Assign::train);
    for (std::size_t c = 0; c < opt.classes; ++c) {
        const auto& members = by_class[c];
        std::size_t next = 0;
        if (members.size() >= opt.min_class_samples) assign[members[next++]] = Assign::val;
        if (members.size() - next >= 4) {
            assign[members[next++]] = Assign::query;
            assign[members[next++]] = Assign::index;
            assign[members[next++]] = Assign::index;
        }
    }

    EmbeddingSet train_set, val_set, query_set, index_set;
    for (EmbeddingSet* s : {&train_set, &val_set, &query_set, &index_set}) s->dim = opt.dim_in;
    std::vector<LabelRow> train_labels, val_labels;
    GroundTruth truth;
    std::vector<std::size_t> query_rows;

    for (std::size_t i = 0; i < n; ++i) {
        const std::string id = sample_id(i);
        const auto row = syn.samples.feature_row(i);
        switch (assign[i]) {
            case Assign::train:
                train_set.ids.push_back(id);
                train_set.data.insert(train_set.data.end(), row.begin(), row.end());
                train_labels.push_back(
                    {id, syn.samples.labels[i], syn.true_labels[i], syn.samples.tags[i]});
                break;
            case Assign::val:
                // Validation mirrors a verified subset: true labels, clean tag.
                val_set.ids.push_back(id);
                val_set.data.insert(val_set.data.end(), row.begin(), row.end());
                val_labels.push_back({id, syn.true_labels[i], syn.true_labels[i], SplitTag::clean});
                break;
            case Assign::query:
                query_set.ids.push_back(id);
                query_set.data.insert(query_set.data.end(), row.begin(), row.end());
                query_rows.push_back(i);
                break;
            case Assign::index:
                index_set.ids.push_back(id);
                index_set.data.insert(index_set.data.end(), row.begin(), row.end());
                break;
        }
    }

    for (const std::size_t q : query_rows) {
        std::set<std::string> relevant;
        for (const std::size_t i : by_class[syn.true_labels[q]])
            if (assign[i] == Assign::index) relevant.insert(sample_id(i));
        truth.relevant.emplace(sample_id(q), std::move(relevant));
    }

    std::error_code ec;
    fs::create_directories(opt.out_dir, ec);
    if (ec) fail(Errc::io_failure, "gen: cannot create '" + opt.out_dir + "': " + ec.message());
    const fs::path root(opt.out_dir);

    DatasetMeta meta;
    meta.classes = opt.classes;
    meta.dim_in = opt.dim_in;
    meta.samples_min = opt.samples_min;
    meta.samples_max = opt.samples_max;
    meta.min_class_samples = opt.min_class_samples;
    meta.noise_sigma = opt.noise_sigma;
    meta.label_noise = opt.label_noise;
    meta.seed = opt.seed;

    write_meta_json((root / "meta.json").string(), meta);
    save_embeddings_file(train_set, (root / "train.glre").string());
    write_labels_csv((root / "train_labels.csv").string(), train_labels);
    save_embeddings_file(val_set, (root / "val.glre").string());
    write_labels_csv((root / "val_labels.csv").string(), val_labels);
    save_embeddings_file(query_set, (root / "query.glre").string());
    save_embeddings_file(index_set, (root / "index.glre").string());
    write_truth_csv((root / "truth.csv").string(), truth);
}

namespace {

std::string default_trace_path(const std::string& ckpt_path) {
    fs::path p(ckpt_path);
    p.replace_extension("");
    return p.string() + ".trace.csv";
}

}  // namespace

void run_train(const TrainOptions& opt) {
    const TrainDataset ds = load_train_dataset(opt.data_dir);
    const DatasetView view = parse_view(opt.view);
    const LabeledEmbeddings data = assemble_view(ds, view, opt.clean_weight);
    const LabeledEmbeddings val = assemble_val(ds);

    CosineHead head;
    if (!opt.init_ckpt.empty()) {
        head = load_head_file(opt.init_ckpt);
        if (head.input_dim != ds.meta.dim_in)
            fail(Errc::dimension_mismatch, "train: checkpoint input dim " +
                                               std::to_string(head.input_dim) +
                                               " does not match dataset dim " +
                                               std::to_string(ds.meta.dim_in));
        if (opt.emb_dim_given && opt.emb_dim != head.emb_dim)
            fail(Errc::bad_argument, "train: --emb-dim conflicts with checkpoint embedding dim");
        if (opt.reinit)
            head = reinit_classifier(head, ds.meta.classes, derive_seed(opt.seed, 17));
        else if (head.num_classes != ds.meta.classes)
            fail(Errc::bad_argument,
                 "train: checkpoint class count does not match dataset; pass --reinit-classifier");
    } else {
        if (opt.reinit)
            fail(Errc::bad_argument, "train: --reinit-classifier requires --init");
        head = make_head(ds.meta.dim_in, opt.emb_dim, ds.meta.classes, derive_seed(opt.seed, 11));
    }

    TrainConfig cfg;
    cfg.learning_rate = opt.lr;
    cfg.momentum = opt.momentum;
    cfg.weight_decay = opt.weight_decay;
    cfg.batch_size = opt.batch;
    cfg.epochs = opt.epochs;
    cfg.seed = derive_seed(opt.seed, 13);

    const TrainTrace trace = train(head, data, val, cfg);
    save_head_file(head, opt.out_ckpt);
    write_trace_csv(opt.trace_path.empty() ? default_trace_path(opt.out_ckpt) : opt.trace_path,
                    trace);
}

void run_recipe(const RecipeOptions& opt) {
    const std::vector<RecipeStage> stages = read_stages_csv(opt.stages_path);
    const TrainDataset ds = load_train_dataset(opt.data_dir);

    std::error_code ec;
    fs::create_directories(opt.out_dir, ec);
    if (ec) fail(Errc::io_failure, "recipe: cannot create '" + opt.out_dir + "': " + ec.message());
    const fs::path root(opt.out_dir);

    TrainConfig base;
    base.learning_rate = opt.lr;
    base.momentum = opt.momentum;
    base.weight_decay = opt.weight_decay;
    base.batch_size = opt.batch;
    base.seed = opt.seed;

    const std::vector<StageResult> results = run_stages(ds, stages, base, opt.emb_dim);
    for (std::size_t s = 0; s < results.size(); ++s) {
        const std::string tag = "stage" + std::to_string(s + 1);
        save_head_file(results[s].head, (root / (tag + ".glrh")).string());
        write_trace_csv((root / (tag + "_trace.csv")).string(), results[s].trace);
    }
}

void run_embed(const EmbedOptions& opt) {
    const CosineHead head = load_head_file(opt.ckpt);
    const EmbeddingSet features = load_embeddings_file(opt.features);
    if (features.dim != head.input_dim)
        fail(Errc::dimension_mismatch, "embed: feature dim " + std::to_string(features.dim) +
                                           " does not match head input dim " +
                                           std::to_string(head.input_dim));

    EmbeddingSet out;
    if (opt.ids.empty()) {
        out = extract_embeddings(head, features.data, features.ids);
    } else {
        const std::vector<std::string> wanted = read_id_list(opt.ids);
        std::unordered_map<std::string_view, std::size_t> rows;
        rows.reserve(features.size());
        for (std::size_t i = 0; i < features.size(); ++i) rows.emplace(features.ids[i], i);
        std::vector<float> selected;
        selected.reserve(wanted.size() * features.dim);
        for (const std::string& id : wanted) {
            const auto it = rows.find(id);
            if (it == rows.end())
                fail(Errc::unknown_id, "embed: id '" + id + "' not present in '" + opt.features + "'");
            const auto row = features.row(it->second);
            selected.insert(selected.end(), row.begin(), row.end());
        }
        out = extract_embeddings(head, selected, wanted);
    }
    save_embeddings_file(out, opt.out);
}

void run_knn(const KnnOptions& opt) {
    const EmbeddingSet queries = load_embeddings_file(opt.query);
    const EmbeddingSet index = load_embeddings_file(opt.index);
    const std::vector<NeighborList> lists = top_k_search(queries, index, opt.k, opt.threads);
    write_predictions_csv(opt.out, lists);
}

double run_eval(const EvalOptions& opt) {
    const RankedPredictions preds = read_predictions_csv(opt.pred, opt.k);
    const GroundTruth truth = read_truth_csv(opt.truth);
    return mean_ap_at_k(preds, truth, opt.k);
}

std::pair<std::string, double> parse_member_arg(const std::string& arg) {
    const std::size_t colon = arg.rfind(':');
    if (colon == std::string::npos || colon == 0 || colon + 1 == arg.size())
        fail(Errc::bad_argument, "ensemble: expected PATH:WEIGHT, got '" + arg + "'");
    const std::string path = arg.substr(0, colon);
    const std::string wtext = arg.substr(colon + 1);
    double weight = 0.0;
    const auto [ptr, ec] = std::from_chars(wtext.data(), wtext.data() + wtext.size(), weight);
    if (ec != std::errc{} || ptr != wtext.data() + wtext.size())
        fail(Errc::bad_argument, "ensemble: bad weight '" + wtext + "' in '" + arg + "'");
    if (!(weight > 0.0) || !std::isfinite(weight))
        fail(Errc::bad_argument, "ensemble: weight must be positive and finite in '" + arg + "'");
    return {path, weight};
}

void run_ensemble(const EnsembleOptions& opt) {
    if (opt.inputs.empty()) fail(Errc::bad_argument, "ensemble: no --in members");
    EnsembleSpec spec;
    for (const std::string& arg : opt.inputs) {
        const auto [path, weight] = parse_member_arg(arg);
        spec.members.push_back({load_embeddings_file(path), weight});
    }
    save_embeddings_file(concat_weighted(spec), opt.out);
}

}  // namespace glr::cli
