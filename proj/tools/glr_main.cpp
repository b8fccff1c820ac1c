#include "glr/commands.hpp"
#include "glr/error.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <exception>

int main(int argc, char** argv) {
    CLI::App app{
        "glr - cosine-softmax metric learning, exact kNN retrieval and mAP@100 evaluation"};
    app.require_subcommand(1);

    glr::cli::GenOptions gen;
    auto* cmd_gen = app.add_subcommand("gen", "Generate a synthetic dataset directory");
    cmd_gen->add_option("--classes", gen.classes, "Number of classes")->capture_default_str();
    cmd_gen->add_option("--dim-in", gen.dim_in, "Raw feature dimension")->capture_default_str();
    cmd_gen->add_option("--samples-min", gen.samples_min, "Min samples per class")
        ->capture_default_str();
    cmd_gen->add_option("--samples-max", gen.samples_max, "Max samples per class")
        ->capture_default_str();
    cmd_gen->add_option("--noise-sigma", gen.noise_sigma, "Per-coordinate feature noise")
        ->capture_default_str();
    cmd_gen->add_option("--label-noise", gen.label_noise, "Fraction of relabeled samples")
        ->capture_default_str();
    cmd_gen->add_option("--min-class-samples", gen.min_class_samples,
                        "Classes below this size contribute no validation sample")
        ->capture_default_str();
    cmd_gen->add_option("--seed", gen.seed, "RNG seed")->capture_default_str();
    cmd_gen->add_option("--out", gen.out_dir, "Output directory")->required();
    cmd_gen->callback([&] { glr::cli::run_gen(gen); });

    glr::cli::TrainOptions tr;
    auto* cmd_train = app.add_subcommand("train", "Train one stage and write a checkpoint");
    cmd_train->add_option("--data", tr.data_dir, "Dataset directory from gen")->required();
    cmd_train->add_option("--epochs", tr.epochs, "Epochs")->capture_default_str();
    cmd_train->add_option("--lr", tr.lr, "Learning rate")->capture_default_str();
    cmd_train->add_option("--momentum", tr.momentum, "SGD momentum")->capture_default_str();
    cmd_train->add_option("--weight-decay", tr.weight_decay, "L2 weight decay")
        ->capture_default_str();
    cmd_train->add_option("--batch", tr.batch, "Batch size")->capture_default_str();
    auto* emb_opt =
        cmd_train->add_option("--emb-dim", tr.emb_dim, "Embedding dimension")->capture_default_str();
    cmd_train->add_option("--seed", tr.seed, "RNG seed")->capture_default_str();
    cmd_train->add_option("--view", tr.view, "Dataset view: clean|full")->capture_default_str();
    cmd_train->add_option("--clean-weight", tr.clean_weight, "Loss weight for clean samples")
        ->capture_default_str();
    cmd_train->add_option("--init", tr.init_ckpt, "Warm-start checkpoint");
    cmd_train->add_flag("--reinit-classifier", tr.reinit,
                        "Keep the projection, re-draw prototypes for the dataset class count");
    cmd_train->add_option("--out", tr.out_ckpt, "Output checkpoint (.glrh)")->required();
    cmd_train->add_option("--trace", tr.trace_path, "Loss trace CSV path");
    cmd_train->callback([&] {
        tr.emb_dim_given = emb_opt->count() > 0;
        glr::cli::run_train(tr);
    });

    glr::cli::RecipeOptions rc;
    auto* cmd_recipe = app.add_subcommand("recipe", "Run a staged training recipe");
    cmd_recipe->add_option("--data", rc.data_dir, "Dataset directory from gen")->required();
    cmd_recipe->add_option("--stages", rc.stages_path, "stages.csv")->required();
    cmd_recipe->add_option("--out", rc.out_dir, "Output directory for stage checkpoints")
        ->required();
    cmd_recipe->add_option("--lr", rc.lr, "Learning rate")->capture_default_str();
    cmd_recipe->add_option("--momentum", rc.momentum, "SGD momentum")->capture_default_str();
    cmd_recipe->add_option("--weight-decay", rc.weight_decay, "L2 weight decay")
        ->capture_default_str();
    cmd_recipe->add_option("--batch", rc.batch, "Batch size")->capture_default_str();
    cmd_recipe->add_option("--emb-dim", rc.emb_dim, "Embedding dimension")->capture_default_str();
    cmd_recipe->add_option("--seed", rc.seed, "RNG seed")->capture_default_str();
    cmd_recipe->callback([&] { glr::cli::run_recipe(rc); });

    glr::cli::EmbedOptions em;
    auto* cmd_embed = app.add_subcommand("embed", "Extract embeddings from a checkpoint");
    cmd_embed->add_option("--ckpt", em.ckpt, "Checkpoint (.glrh)")->required();
    cmd_embed->add_option("--features", em.features, "Raw feature GLRE file")->required();
    cmd_embed->add_option("--ids", em.ids, "Optional id list selecting a subset, one per line");
    cmd_embed->add_option("--out", em.out, "Output GLRE file")->required();
    cmd_embed->callback([&] { glr::cli::run_embed(em); });

    glr::cli::KnnOptions kn;
    auto* cmd_knn = app.add_subcommand("knn", "Exact top-k lookup of queries against an index");
    cmd_knn->add_option("--query", kn.query, "Query GLRE file")->required();
    cmd_knn->add_option("--index", kn.index, "Index GLRE file")->required();
    cmd_knn->add_option("--k", kn.k, "Neighbors per query")->capture_default_str();
    cmd_knn->add_option("--threads", kn.threads, "Worker threads (output is thread-invariant)")
        ->capture_default_str();
    cmd_knn->add_option("--out", kn.out, "Predictions CSV")->required();
    cmd_knn->callback([&] { glr::cli::run_knn(kn); });

    glr::cli::EvalOptions ev;
    auto* cmd_eval = app.add_subcommand("eval", "Score predictions with mean AP at k");
    cmd_eval->add_option("--pred", ev.pred, "Predictions CSV")->required();
    cmd_eval->add_option("--truth", ev.truth, "Ground truth CSV")->required();
    cmd_eval->add_option("--k", ev.k, "Rank cut-off")->capture_default_str();
    cmd_eval->callback([&] { std::printf("%.6f\n", glr::cli::run_eval(ev)); });

    glr::cli::EnsembleOptions en;
    auto* cmd_ens = app.add_subcommand("ensemble", "Weighted concatenation of embedding sets");
    cmd_ens->add_option("--in", en.inputs, "Member as PATH:WEIGHT (repeatable)")->required();
    cmd_ens->add_option("--out", en.out, "Output GLRE file")->required();
    cmd_ens->callback([&] { glr::cli::run_ensemble(en); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const glr::Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
