#pragma once

// Stage-wise pipeline over explicit on-disk artifacts: pretrain the
// selection model, generate and serialize counterfactual views, train,
// evaluate, export embeddings. Stages are resumable; every artifact gets a
// manifest entry with its checksum, and each stage draws its seed from the
// master seed by name.

#include <cstdint>
#include <filesystem>
#include <string>

#include "clbr/eval.hpp"
#include "clbr/graph.hpp"
#include "clbr/trainer.hpp"

namespace clbr {

struct PipelineConfig {
    std::filesystem::path dataset_ub;
    std::filesystem::path dataset_ui;
    std::filesystem::path dataset_bi;
    // 0 means infer each count from the maximum id in the edge lists.
    NodeId num_users = 0;
    NodeId num_items = 0;
    NodeId num_bundles = 0;
    std::filesystem::path output_dir = "out";
    std::uint64_t master_seed = 42;
    int threads = 1;
    TrainConfig train;
    SplitSpec split;
    SampleComplexityQuery sample_complexity;

    void validate() const;
};

// Parses the flat key=value config format; unset keys keep their
// defaults, unknown keys or invariant violations raise a ConfigError
// naming the key.
PipelineConfig load_config(const std::filesystem::path& path);

void write_config_snapshot(const std::filesystem::path& path, const PipelineConfig& cfg);

enum class Stage { Pretrain, Augment, Train, Eval, ExportEmb, SampleComplexity };

const char* stage_name(Stage stage);
Stage parse_stage(const std::string& name);

// Artifact names under the output directory.
namespace artifact {
inline constexpr const char* kManifest = "manifest.txt";
inline constexpr const char* kSelectionEmbeddings = "selection_embeddings.tsv";
inline constexpr const char* kViewsDir = "views";
inline constexpr const char* kCheckpoint = "checkpoint_embeddings.tsv";
inline constexpr const char* kConfigSnapshot = "config_snapshot.ini";
inline constexpr const char* kTrainLog = "train_log.csv";
inline constexpr const char* kMetricsCsv = "metrics.csv";
inline constexpr const char* kMetricsSummary = "metrics_summary.txt";
inline constexpr const char* kSampleComplexity = "sample_complexity.txt";
}  // namespace artifact

std::filesystem::path view_path(const std::filesystem::path& out_dir, int index);

// Loads the edge lists and builds the factual graph.
TripartiteGraph load_dataset(const PipelineConfig& cfg);

// The deterministic train/validation/test split all stages share.
SplitResult make_split(const PipelineConfig& cfg, const TripartiteGraph& graph);

// Runs one stage; throws MissingArtifactError when an upstream stage has
// not produced its outputs yet.
void run_stage(Stage stage, const PipelineConfig& cfg);

}  // namespace clbr
