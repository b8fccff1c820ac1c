#pragma once

#include "glr/dataset.hpp"
#include "glr/embedding_set.hpp"
#include "glr/knn.hpp"
#include "glr/metrics.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace glr {

// All CSV files are UTF-8 with LF newlines. Ranking files follow the
// submission convention: header "id,images", images a space-separated ranked
// id list. Ground truth uses the same shape with images as the relevant set.

struct LabelRow {
    std::string id;
    std::uint32_t label = 0;       // observed label
    std::uint32_t true_label = 0;  // pre-noise label, kept for evaluation
    SplitTag tag = SplitTag::clean;
};

void write_labels_csv(const std::string& path, std::span<const LabelRow> rows);
std::vector<LabelRow> read_labels_csv(const std::string& path);

void write_predictions_csv(const std::string& path, std::span<const NeighborList> lists);

/// Loads a ranking file, truncating each list to max_rank entries. Truncation
/// never changes a score at cut-off max_rank, so overlong submissions remain
/// scoreable. Duplicate ids within one list are an error.
RankedPredictions read_predictions_csv(const std::string& path, std::size_t max_rank);

void write_truth_csv(const std::string& path, const GroundTruth& truth);
GroundTruth read_truth_csv(const std::string& path);

/// One id per line, in file order.
std::vector<std::string> read_id_list(const std::string& path);

struct DatasetMeta {
    std::size_t classes = 0;
    std::size_t dim_in = 0;
    std::size_t samples_min = 0;
    std::size_t samples_max = 0;
    std::size_t min_class_samples = 0;
    double noise_sigma = 0.0;
    double label_noise = 0.0;
    std::uint64_t seed = 0;
};

void write_meta_json(const std::string& path, const DatasetMeta& meta);
DatasetMeta read_meta_json(const std::string& path);

/// A generated dataset directory: meta.json, train/val features plus label
/// tables, and the held-out query/index split with its ground truth.
struct TrainDataset {
    DatasetMeta meta;
    EmbeddingSet train_features;
    std::vector<LabelRow> train_labels;
    EmbeddingSet val_features;
    std::vector<LabelRow> val_labels;
};

TrainDataset load_train_dataset(const std::string& dir);

enum class DatasetView : std::uint8_t { clean_only, full_noisy };

DatasetView parse_view(const std::string& token);

/// Training samples for one view in feature-file order. Clean-tagged samples
/// get clean_sample_weight, noisy ones weight 1.
LabeledEmbeddings assemble_view(const TrainDataset& ds, DatasetView view,
                                double clean_sample_weight);

/// Validation samples with unit weights.
LabeledEmbeddings assemble_val(const TrainDataset& ds);

struct EpochStats;
struct TrainTrace;
void write_trace_csv(const std::string& path, const TrainTrace& trace);

}  // namespace glr
