#include "glr/recipe.hpp"

#include "glr/error.hpp"
#include "glr/rng.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace glr {
namespace {

std::vector<std::string> split_lines(const std::string& text) {
    std::vector<std::string> lines;
    std::size_t start = 0;
    while (start < text.size()) {
        std::size_t end = text.find('\n', start);
        if (end == std::string::npos) end = text.size();
        std::string line = text.substr(start, end - start);
        if (!line.empty() && line.back() == '\r') line.pop_back();
        lines.push_back(std::move(line));
        start = end + 1;
    }
    return lines;
}

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string::npos) {
            fields.push_back(line.substr(start));
            break;
        }
        fields.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
    return fields;
}

}  // namespace

std::vector<RecipeStage> read_stages_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(Errc::io_failure, "stages: cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    const auto lines = split_lines(ss.str());
    if (lines.empty() || lines.front() != "dataset_view,clean_sample_weight,reinit_classifier,epochs")
        fail(Errc::bad_format,
             "'" + path + "': expected header 'dataset_view,clean_sample_weight,reinit_classifier,epochs'");

    std::vector<RecipeStage> stages;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        if (lines[i].empty()) continue;
        const auto fields = split_fields(lines[i]);
        if (fields.size() != 4)
            fail(Errc::bad_format,
                 "'" + path + "' line " + std::to_string(i + 1) + ": expected 4 fields");
        RecipeStage stage;
        stage.view = parse_view(fields[0]);

        double weight = 0.0;
        auto [wp, wec] = std::from_chars(fields[1].data(), fields[1].data() + fields[1].size(), weight);
        if (wec != std::errc{} || wp != fields[1].data() + fields[1].size() || !(weight > 0.0))
            fail(Errc::bad_format,
                 "'" + path + "': clean_sample_weight must be a positive number, got '" + fields[1] + "'");
        stage.clean_sample_weight = weight;

        if (fields[2] == "1" || fields[2] == "true")
            stage.reinit_classifier = true;
        else if (fields[2] == "0" || fields[2] == "false")
            stage.reinit_classifier = false;
        else
            fail(Errc::bad_format, "'" + path + "': bad reinit_classifier '" + fields[2] + "'");

        std::size_t epochs = 0;
        auto [ep, eec] = std::from_chars(fields[3].data(), fields[3].data() + fields[3].size(), epochs);
        if (eec != std::errc{} || ep != fields[3].data() + fields[3].size() || epochs == 0)
            fail(Errc::bad_format, "'" + path + "': epochs must be >= 1, got '" + fields[3] + "'");
        stage.epochs = epochs;

        stages.push_back(stage);
    }
    if (stages.empty()) fail(Errc::empty_input, "'" + path + "': no stages");
    return stages;
}

std::vector<StageResult> run_stages(const TrainDataset& ds, std::span<const RecipeStage> stages,
                                    const TrainConfig& base, std::size_t emb_dim) {
    if (stages.empty()) fail(Errc::empty_input, "run_stages: no stages");
    const LabeledEmbeddings val = assemble_val(ds);

    std::vector<StageResult> results;
    results.reserve(stages.size());
    CosineHead head;
    for (std::size_t s = 0; s < stages.size(); ++s) {
        const RecipeStage& stage = stages[s];
        if (s == 0)
            head = make_head(ds.meta.dim_in, emb_dim, ds.meta.classes, derive_seed(base.seed, 100));
        else if (stage.reinit_classifier)
            head = reinit_classifier(head, ds.meta.classes, derive_seed(base.seed, 100 + s));

        const LabeledEmbeddings data =
            assemble_view(ds, stage.view, stage.clean_sample_weight);

        TrainConfig cfg = base;
        cfg.epochs = stage.epochs;
        cfg.seed = derive_seed(base.seed, 200 + s);

        StageResult result;
        result.initial = head;
        result.trace = train(head, data, val, cfg);
        result.head = head;
        results.push_back(std::move(result));
    }
    return results;
}

}  // namespace glr
