#pragma once

#include "glr/dataset_io.hpp"
#include "glr/head.hpp"
#include "glr/trainer.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace glr {

/// One training stage of a staged recipe: which dataset view to train on, the
/// loss-weight multiplier for clean-tagged samples, whether to re-draw the
/// classifier prototypes before the stage, and the epoch budget.
struct RecipeStage {
    DatasetView view = DatasetView::clean_only;
    double clean_sample_weight = 1.0;
    bool reinit_classifier = false;
    std::size_t epochs = 1;
};

/// stages.csv: header "dataset_view,clean_sample_weight,reinit_classifier,epochs".
/// dataset_view is "clean"/"clean-only" or "full"/"full-noisy"; reinit is
/// 0/1/true/false; epochs must be >= 1 and the weight positive.
std::vector<RecipeStage> read_stages_csv(const std::string& path);

struct StageResult {
    CosineHead head;      // parameters after the stage
    TrainTrace trace;
    CosineHead initial;   // parameters the stage started from
};

/// Runs the stages in order, carrying the head across stages. Stage 1 starts
/// from a fresh head; later stages either continue the whole head or keep the
/// projection and re-draw prototypes when reinit_classifier is set. Stage
/// sub-seeds derive from base.seed, so the run is a pure function of inputs.
std::vector<StageResult> run_stages(const TrainDataset& ds, std::span<const RecipeStage> stages,
                                    const TrainConfig& base, std::size_t emb_dim);

}  // namespace glr
