#include "glr/dataset_io.hpp"

#include "glr/error.hpp"
#include "glr/trainer.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace glr {
namespace {

namespace fs = std::filesystem;

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(Errc::io_failure, "cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) fail(Errc::io_failure, "cannot open '" + path + "' for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) fail(Errc::io_failure, "write failed for '" + path + "'");
}

// Lines split on LF; a trailing CR is tolerated on input, never written.
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

std::vector<std::string> split_csv_fields(const std::string& line) {
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

std::vector<std::string> split_spaces(const std::string& text) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start < text.size()) {
        const std::size_t end = text.find(' ', start);
        if (end == std::string::npos) {
            if (start < text.size()) out.push_back(text.substr(start));
            break;
        }
        if (end > start) out.push_back(text.substr(start, end - start));
        start = end + 1;
    }
    return out;
}

void check_plain_id(const std::string& id) {
    if (id.empty()) fail(Errc::bad_format, "csv: empty id");
    if (id.find(',') != std::string::npos || id.find(' ') != std::string::npos ||
        id.find('\n') != std::string::npos)
        fail(Errc::bad_format, "csv: id '" + id + "' contains a delimiter");
}

std::uint64_t parse_u64(const std::string& text, const char* what) {
    std::uint64_t value = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size())
        fail(Errc::bad_format, std::string("csv: bad ") + what + " '" + text + "'");
    return value;
}

void expect_header(const std::vector<std::string>& lines, const std::string& header,
                   const std::string& path) {
    if (lines.empty() || lines.front() != header)
        fail(Errc::bad_format, "'" + path + "': expected header '" + header + "'");
}

}  // namespace

void write_labels_csv(const std::string& path, std::span<const LabelRow> rows) {
    std::string out = "id,label,true_label,tag\n";
    for (const LabelRow& r : rows) {
        check_plain_id(r.id);
        out += r.id;
        out += ',';
        out += std::to_string(r.label);
        out += ',';
        out += std::to_string(r.true_label);
        out += ',';
        out += (r.tag == SplitTag::clean ? "clean" : "noisy");
        out += '\n';
    }
    write_file(path, out);
}

std::vector<LabelRow> read_labels_csv(const std::string& path) {
    const auto lines = split_lines(read_file(path));
    expect_header(lines, "id,label,true_label,tag", path);
    std::vector<LabelRow> rows;
    std::unordered_set<std::string> seen;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        if (lines[i].empty()) continue;
        const auto fields = split_csv_fields(lines[i]);
        if (fields.size() != 4)
            fail(Errc::bad_format, "'" + path + "' line " + std::to_string(i + 1) +
                                       ": expected 4 fields");
        LabelRow row;
        row.id = fields[0];
        check_plain_id(row.id);
        if (!seen.insert(row.id).second)
            fail(Errc::duplicate_id, "'" + path + "': duplicate id '" + row.id + "'");
        row.label = static_cast<std::uint32_t>(parse_u64(fields[1], "label"));
        row.true_label = static_cast<std::uint32_t>(parse_u64(fields[2], "true label"));
        if (fields[3] == "clean")
            row.tag = SplitTag::clean;
        else if (fields[3] == "noisy")
            row.tag = SplitTag::noisy;
        else
            fail(Errc::bad_format, "'" + path + "': bad tag '" + fields[3] + "'");
        rows.push_back(std::move(row));
    }
    return rows;
}

void write_predictions_csv(const std::string& path, std::span<const NeighborList> lists) {
    std::string out = "id,images\n";
    for (const NeighborList& list : lists) {
        check_plain_id(list.query_id);
        out += list.query_id;
        out += ',';
        for (std::size_t i = 0; i < list.neighbors.size(); ++i) {
            check_plain_id(list.neighbors[i].index_id);
            if (i > 0) out += ' ';
            out += list.neighbors[i].index_id;
        }
        out += '\n';
    }
    write_file(path, out);
}

RankedPredictions read_predictions_csv(const std::string& path, std::size_t max_rank) {
    const auto lines = split_lines(read_file(path));
    expect_header(lines, "id,images", path);
    RankedPredictions preds;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        if (lines[i].empty()) continue;
        const std::size_t comma = lines[i].find(',');
        if (comma == std::string::npos)
            fail(Errc::bad_format,
                 "'" + path + "' line " + std::to_string(i + 1) + ": expected 'id,images'");
        const std::string id = lines[i].substr(0, comma);
        check_plain_id(id);
        if (preds.ranking.count(id))
            fail(Errc::duplicate_id, "'" + path + "': duplicate query '" + id + "'");
        std::vector<std::string> images = split_spaces(lines[i].substr(comma + 1));
        std::unordered_set<std::string_view> seen;
        for (const std::string& img : images)
            if (!seen.insert(img).second)
                fail(Errc::duplicate_id,
                     "'" + path + "': duplicate prediction '" + img + "' for query '" + id + "'");
        if (images.size() > max_rank) images.resize(max_rank);
        preds.ranking.emplace(id, std::move(images));
    }
    return preds;
}

void write_truth_csv(const std::string& path, const GroundTruth& truth) {
    std::string out = "id,images\n";
    for (const auto& [query, relevant] : truth.relevant) {
        check_plain_id(query);
        out += query;
        out += ',';
        bool first = true;
        for (const std::string& id : relevant) {
            check_plain_id(id);
            if (!first) out += ' ';
            out += id;
            first = false;
        }
        out += '\n';
    }
    write_file(path, out);
}

GroundTruth read_truth_csv(const std::string& path) {
    const auto lines = split_lines(read_file(path));
    expect_header(lines, "id,images", path);
    GroundTruth truth;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        if (lines[i].empty()) continue;
        const std::size_t comma = lines[i].find(',');
        if (comma == std::string::npos)
            fail(Errc::bad_format,
                 "'" + path + "' line " + std::to_string(i + 1) + ": expected 'id,images'");
        const std::string id = lines[i].substr(0, comma);
        check_plain_id(id);
        if (truth.relevant.count(id))
            fail(Errc::duplicate_id, "'" + path + "': duplicate query '" + id + "'");
        const auto images = split_spaces(lines[i].substr(comma + 1));
        truth.relevant.emplace(id, std::set<std::string>(images.begin(), images.end()));
    }
    return truth;
}

std::vector<std::string> read_id_list(const std::string& path) {
    const auto lines = split_lines(read_file(path));
    std::vector<std::string> ids;
    for (const std::string& line : lines) {
        if (line.empty()) continue;
        ids.push_back(line);
    }
    return ids;
}

void write_meta_json(const std::string& path, const DatasetMeta& meta) {
    nlohmann::json j;
    j["classes"] = meta.classes;
    j["dim_in"] = meta.dim_in;
    j["samples_min"] = meta.samples_min;
    j["samples_max"] = meta.samples_max;
    j["min_class_samples"] = meta.min_class_samples;
    j["noise_sigma"] = meta.noise_sigma;
    j["label_noise"] = meta.label_noise;
    j["seed"] = meta.seed;
    write_file(path, j.dump(2) + "\n");
}

DatasetMeta read_meta_json(const std::string& path) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_file(path));
    } catch (const nlohmann::json::exception& e) {
        fail(Errc::bad_format, "'" + path + "': " + e.what());
    }
    DatasetMeta meta;
    try {
        meta.classes = j.at("classes").get<std::size_t>();
        meta.dim_in = j.at("dim_in").get<std::size_t>();
        meta.samples_min = j.at("samples_min").get<std::size_t>();
        meta.samples_max = j.at("samples_max").get<std::size_t>();
        meta.min_class_samples = j.at("min_class_samples").get<std::size_t>();
        meta.noise_sigma = j.at("noise_sigma").get<double>();
        meta.label_noise = j.at("label_noise").get<double>();
        meta.seed = j.at("seed").get<std::uint64_t>();
    } catch (const nlohmann::json::exception& e) {
        fail(Errc::bad_format, "'" + path + "': " + e.what());
    }
    return meta;
}

TrainDataset load_train_dataset(const std::string& dir) {
    const fs::path root(dir);
    TrainDataset ds;
    ds.meta = read_meta_json((root / "meta.json").string());
    ds.train_features = load_embeddings_file((root / "train.glre").string());
    ds.train_labels = read_labels_csv((root / "train_labels.csv").string());
    ds.val_features = load_embeddings_file((root / "val.glre").string());
    ds.val_labels = read_labels_csv((root / "val_labels.csv").string());

    if (ds.train_features.dim != ds.meta.dim_in || ds.val_features.dim != ds.meta.dim_in)
        fail(Errc::dimension_mismatch, "dataset '" + dir + "': feature dim disagrees with meta");
    if (ds.train_features.size() != ds.train_labels.size() ||
        ds.val_features.size() != ds.val_labels.size())
        fail(Errc::shape_mismatch, "dataset '" + dir + "': feature/label row counts disagree");
    for (const LabelRow& r : ds.train_labels)
        if (r.label >= ds.meta.classes || r.true_label >= ds.meta.classes)
            fail(Errc::bad_format, "dataset '" + dir + "': label out of range for '" + r.id + "'");
    for (const LabelRow& r : ds.val_labels)
        if (r.label >= ds.meta.classes || r.true_label >= ds.meta.classes)
            fail(Errc::bad_format, "dataset '" + dir + "': label out of range for '" + r.id + "'");
    return ds;
}

DatasetView parse_view(const std::string& token) {
    if (token == "clean" || token == "clean-only") return DatasetView::clean_only;
    if (token == "full" || token == "full-noisy") return DatasetView::full_noisy;
    fail(Errc::bad_argument, "unknown dataset view '" + token + "' (use clean|full)");
}

namespace {

LabeledEmbeddings assemble(const EmbeddingSet& features, std::span<const LabelRow> labels,
                           bool clean_only, double clean_sample_weight, bool use_true_labels) {
    if (!(clean_sample_weight > 0.0))
        fail(Errc::bad_argument, "assemble_view: clean sample weight must be positive");
    std::unordered_map<std::string_view, const LabelRow*> by_id;
    by_id.reserve(labels.size());
    for (const LabelRow& r : labels) by_id.emplace(r.id, &r);

    LabeledEmbeddings out;
    out.dim = features.dim;
    for (std::size_t i = 0; i < features.size(); ++i) {
        const auto it = by_id.find(features.ids[i]);
        if (it == by_id.end())
            fail(Errc::missing_id, "assemble_view: no label row for id '" + features.ids[i] + "'");
        const LabelRow& r = *it->second;
        if (clean_only && r.tag != SplitTag::clean) continue;
        const auto row = features.row(i);
        out.features.insert(out.features.end(), row.begin(), row.end());
        out.labels.push_back(use_true_labels ? r.true_label : r.label);
        out.tags.push_back(r.tag);
        out.sample_weights.push_back(r.tag == SplitTag::clean ? clean_sample_weight : 1.0);
    }
    if (out.size() == 0) fail(Errc::empty_input, "assemble_view: view selects no samples");
    return out;
}

}  // namespace

LabeledEmbeddings assemble_view(const TrainDataset& ds, DatasetView view,
                                double clean_sample_weight) {
    return assemble(ds.train_features, ds.train_labels, view == DatasetView::clean_only,
                    clean_sample_weight, /*use_true_labels=*/false);
}

LabeledEmbeddings assemble_val(const TrainDataset& ds) {
    return assemble(ds.val_features, ds.val_labels, /*clean_only=*/false,
                    /*clean_sample_weight=*/1.0, /*use_true_labels=*/false);
}

void write_trace_csv(const std::string& path, const TrainTrace& trace) {
    std::string out = "epoch,train_loss,val_loss\n";
    char buf[64];
    for (std::size_t i = 0; i < trace.epochs.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%zu,%.12g,%.12g\n", i + 1, trace.epochs[i].train_loss,
                      trace.epochs[i].val_loss);
        out += buf;
    }
    write_file(path, out);
}

}  // namespace glr
