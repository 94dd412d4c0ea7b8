#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "f2gan/classify.hpp"
#include "f2gan/dataset.hpp"
#include "f2gan/fdi.hpp"
#include "f2gan/gan.hpp"
#include "f2gan/metrics.hpp"
#include "f2gan/types.hpp"

namespace f2gan {

inline constexpr const char* kPipelineVersion = "0.1.0";

// ----------------------------------------------------------------------------
// Experiment configuration.

/// Scale presets: `Paper` trains at the published epoch count, `Desk` shortens
/// training so a full run finishes on a laptop. Everything else is identical.
enum class Profile { Paper, Desk };

Profile profile_from_string(const std::string& name);
const char* to_string(Profile profile);

/// Everything one experiment needs. Architecture and optimizer defaults follow
/// the published hyperparameter table; the rest are documented decisions.
struct ExperimentConfig {
    SyntheticConfig dataset;
    double split_ratio = 0.8;
    GanArchitecture cgan = GanArchitecture::conventional_default();
    GanArchitecture f2gan = GanArchitecture::feature_feedback_default();
    double lambda = 1.0;  // feature-feedback weight
    TrainConfig train;    // seed field is ignored; training seeds derive from `seed`
    FdiSpec fdi;
    double threshold = 0.5;
    StageTwoConfig stage_two;
    std::uint64_t seed = 42;
    std::string out_dir = "out";

    void validate() const;  // every sub-config validates; architectures are 16-wide
};

/// Overwrites the scale-dependent fields (train.epochs, train.batch_size)
/// with the profile's values.
void apply_profile(ExperimentConfig& config, Profile profile);

/// FNV-1a 64 hex digest of the canonical JSON form with out_dir excluded, so
/// the hash identifies the experiment rather than where it lands on disk.
std::string config_hash(const ExperimentConfig& config);

/// JSON round-trip. Unknown keys are rejected at every nesting level; absent
/// keys keep their defaults, except that a present `cgan`/`f2gan` object must
/// be a complete architecture.
void save_experiment_config(const ExperimentConfig& config, const std::string& path);
ExperimentConfig load_experiment_config(const std::string& path);

// ----------------------------------------------------------------------------
// Run manifest.

struct StageRecord {
    std::string stage;                   // "gen_data", "train_f2gan", ...
    std::vector<std::string> artifacts;  // paths relative to out_dir
    double seconds = 0.0;                // wall clock (excluded from byte-identity claims)
};

struct RunManifest {
    std::string config_hash;
    std::uint64_t seed = 0;
    std::string version = kPipelineVersion;
    std::string config_file;  // relative path of the config snapshot
    std::vector<StageRecord> stages;
};

void save_manifest(const RunManifest& manifest, const std::string& path);
RunManifest load_manifest(const std::string& path);

// ----------------------------------------------------------------------------
// Stage result tables (CSV).

/// One detection verdict row. `has_truth` is false when the source CSV had no
/// truth column (detection over unlabeled data).
struct DetectionRow {
    Index sample = 0;  // 0-based row index into the detection test set
    double score = 0.0;
    Verdict verdict = Verdict::Anomaly;
    bool has_truth = false;
    Verdict truth = Verdict::Anomaly;
};

/// Header "sample,score,verdict,truth"; the truth column is dropped entirely
/// when any row lacks it.
void save_detection_rows(const std::vector<DetectionRow>& rows, const std::string& path);
std::vector<DetectionRow> load_detection_rows(const std::string& path);

/// One Stage-2 prediction row. `truth` is the detection-set label: a fault
/// class name, or "FDI" for an attack row that slipped past Stage 1.
struct PredictionRow {
    Index sample = 0;  // detection-set row index
    std::string truth;
    ClassificationReport prediction;
};

/// Header "sample,truth,knn,dt,svm,ann,consensus"; consensus renders as the
/// class name or "Undecided".
void save_prediction_rows(const std::vector<PredictionRow>& rows, const std::string& path);
std::vector<PredictionRow> load_prediction_rows(const std::string& path);

// ----------------------------------------------------------------------------
// Pipeline stages. Each command validates the config, creates out_dir, writes
// its artifacts plus a config snapshot, and merges its stage record into
// manifest.json (the manifest resets when config hash or seed changed).

/// Synthesizes the dataset, the stratified split, the FDI anomaly set, the
/// mixed detection test set, and a state-estimation attack demonstration.
/// Artifacts: data.csv, train.csv, test.csv, fdi.csv, detection.csv,
/// attack_scenario.json.
void cmd_gen_data(const ExperimentConfig& config);

/// Trains one GAN variant on the normalized training split. Artifacts:
/// model_{cgan,f2gan}.json, history_{cgan,f2gan}.csv.
void cmd_train(const ExperimentConfig& config, GanVariantKind variant);

/// Scores the detection test set with a trained variant. Artifact:
/// detect_{cgan,f2gan}.csv.
void cmd_detect(const ExperimentConfig& config, GanVariantKind variant);

/// Classifies the fault-verdict rows of the feature-feedback detection pass.
/// With `models_dir` empty, trains Stage 2 on the training split and saves it
/// to <out>/stage2; otherwise loads the models from `models_dir`. Artifacts:
/// stage2/{knn,dt,svm,ann}.json (when training), predictions.csv.
void cmd_classify(const ExperimentConfig& config, const std::string& models_dir = "");

/// Evaluates both detection passes and the Stage-2 predictions. Artifacts:
/// evaluation_{cgan,f2gan}.json, roc_{cgan,f2gan}.csv, roc.svg,
/// score_summary.csv, report.md.
void cmd_evaluate(const ExperimentConfig& config);

/// The whole pipeline under one seed: gen_data, both trainings, both
/// detection passes, classification, evaluation.
void cmd_repro(const ExperimentConfig& config);

}  // namespace f2gan
