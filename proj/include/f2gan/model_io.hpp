#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "f2gan/classify.hpp"
#include "f2gan/dataset.hpp"
#include "f2gan/fdi.hpp"
#include "f2gan/gan.hpp"
#include "f2gan/metrics.hpp"
#include "f2gan/neural.hpp"
#include "f2gan/types.hpp"

namespace f2gan {

/// Format version stamped into (and checked against) every JSON artifact.
inline constexpr int kModelFormatVersion = 1;

/// Versioned JSON network file: per-layer dims, activation, leaky slope,
/// dropout rate, and parameters as row-major nested arrays. Doubles print in
/// shortest round-trip decimal form, so load(save(net)) is bit-exact and
/// save(load(path)) reproduces the file byte for byte.
void save_mlp(const Mlp& net, const std::string& path);
Mlp load_mlp(const std::string& path);

/// Everything Stage-1 inference needs in one file: both nets plus the sidecar
/// metadata — architecture, variant (with lambda), training seed, and the
/// normalization params the training data was mapped with. Training history
/// travels separately as CSV (save_history_csv).
struct GanBundle {
    TrainedGan gan;  // history not persisted here
    NormalizationParams normalization;
    std::uint64_t seed = 0;

    void validate() const;  // nets match the architecture; params validate
};

void save_gan_bundle(const GanBundle& bundle, const std::string& path);
GanBundle load_gan_bundle(const std::string& path);

/// CSV with header "epoch,L_D,L_G_fool,L_FM,mean_D_real,mean_D_fake";
/// epochs are numbered from 1. Values round-trip exactly.
void save_history_csv(const std::vector<EpochStats>& history, const std::string& path);
std::vector<EpochStats> load_history_csv(const std::string& path);

/// One reproducible attack scenario: the measurement model (H, sigma), the
/// attack construction (stealthy c, or the naive norm), and the seed.
struct AttackScenario {
    Matrix h;
    double noise_std = 0.05;
    AttackKind kind = AttackKind::Stealthy;
    Vector c;           // stealthy: a = H c
    double norm = 1.0;  // naive: target ||a||
    std::uint64_t seed = 0;

    void validate() const;  // H full column rank; c sized n / norm > 0
};

void save_attack_scenario(const AttackScenario& scenario, const std::string& path);
AttackScenario load_attack_scenario(const std::string& path);

/// How knn.json refers to its training data: a dataset CSV (relative paths
/// resolve against the JSON file's directory), the training row indices
/// within it, and the normalization applied after loading. The KNN model is
/// stored by reference, not by value.
struct KnnReference {
    std::string dataset_path;
    std::vector<Index> rows;
    NormalizationParams normalization;
};

/// Writes knn.json, dt.json, svm.json, ann.json into dir (created if
/// missing). Verifies that the KNN reference reproduces models.knn exactly
/// before writing anything.
void save_stage_two(const StageTwoModels& models, const KnnReference& knn_ref,
                    const std::string& dir);

/// Loads the four model files; missing files are reported by name. The KNN
/// training rows are re-read from the referenced dataset CSV.
StageTwoModels load_stage_two(const std::string& dir);

/// Detection evaluation report as JSON; same input bytes in, same bytes out.
void save_evaluation_report(const EvaluationReport& report, const std::string& path);
EvaluationReport load_evaluation_report(const std::string& path);

}  // namespace f2gan
