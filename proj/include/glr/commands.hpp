#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace glr::cli {

struct GenOptions {
    std::size_t classes = 50;
    std::size_t dim_in = 32;
    std::size_t samples_min = 10;
    std::size_t samples_max = 30;
    double noise_sigma = 0.05;
    double label_noise = 0.0;
    std::size_t min_class_samples = 4;
    std::uint64_t seed = 1;
    std::string out_dir;
};

/// Writes meta.json, train/val features and labels, the held-out query/index
/// feature sets and truth.csv into out_dir. Per class, one sample goes to
/// validation when the class has at least min_class_samples samples, then one
/// query and two index samples are held out when at least four remain.
void run_gen(const GenOptions& opt);

struct TrainOptions {
    std::string data_dir;
    std::size_t epochs = 30;
    double lr = 1e-3;
    double momentum = 0.9;
    double weight_decay = 1e-5;
    std::size_t batch = 64;
    std::size_t emb_dim = 512;
    bool emb_dim_given = false;  // set by the CLI when --emb-dim was passed
    std::uint64_t seed = 1;
    std::string view = "clean";
    double clean_weight = 1.0;
    std::string init_ckpt;  // optional warm start
    bool reinit = false;    // re-draw prototypes from the warm start
    std::string out_ckpt;
    std::string trace_path;  // defaults to out_ckpt with a .trace.csv suffix
};

void run_train(const TrainOptions& opt);

struct RecipeOptions {
    std::string data_dir;
    std::string stages_path;
    std::string out_dir;
    double lr = 1e-3;
    double momentum = 0.9;
    double weight_decay = 1e-5;
    std::size_t batch = 64;
    std::size_t emb_dim = 512;
    std::uint64_t seed = 1;
};

/// Runs the staged recipe; stage N writes out_dir/stageN.glrh and
/// out_dir/stageN_trace.csv.
void run_recipe(const RecipeOptions& opt);

struct EmbedOptions {
    std::string ckpt;
    std::string features;  // GLRE file of raw input features
    std::string ids;       // optional id list selecting a subset, in list order
    std::string out;
};

void run_embed(const EmbedOptions& opt);

struct KnnOptions {
    std::string query;
    std::string index;
    std::size_t k = 100;
    unsigned threads = 1;
    std::string out;
};

void run_knn(const KnnOptions& opt);

struct EvalOptions {
    std::string pred;
    std::string truth;
    std::size_t k = 100;
};

/// Returns mean AP at k; the CLI prints it with six decimals.
double run_eval(const EvalOptions& opt);

struct EnsembleOptions {
    std::vector<std::string> inputs;  // "path.glre:weight"
    std::string out;
};

/// Splits "path:weight" at the last colon; the weight must parse fully as a
/// positive finite float.
std::pair<std::string, double> parse_member_arg(const std::string& arg);

void run_ensemble(const EnsembleOptions& opt);

}  // namespace glr::cli
