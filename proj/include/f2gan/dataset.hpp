#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "f2gan/rng.hpp"
#include "f2gan/types.hpp"

namespace f2gan {

/// Feature schema v1: the 16 per-case signal aggregates, in column order.
inline constexpr Index kFeatureCount = 16;
extern const std::array<const char*, kFeatureCount> kFeatureNames;

/// Voltage/current feature slots eligible for FDI injection (rms, thd,
/// dc offset, unbalance — excludes frequency, powers, and the mode flag).
extern const std::array<Index, 12> kInjectableSlots;

/// The 12 switch-fault classes: six single-switch faults plus six fixed
/// two-switch combinations. Encoding is the enum value, 0-11.
enum class FaultClass : int {
    S1 = 0,
    S2,
    S3,
    S4,
    S5,
    S6,
    S1S4,
    S2S5,
    S3S6,
    S1S2,
    S3S4,
    S5S6,
};

inline constexpr int kClassCount = 12;

const char* to_string(FaultClass c);
FaultClass fault_class_from_string(const std::string& name);
FaultClass fault_class_from_index(int index);
inline int class_index(FaultClass c) { return static_cast<int>(c); }

struct LabeledDataset {
    Matrix samples;                  // rows x kFeatureCount
    std::vector<FaultClass> labels;  // one per row
    std::string provenance;          // "synthetic(seed=...)" or a file path

    Index size() const { return samples.rows(); }
    void validate() const;  // label count matches rows; finite; 16 columns
};

/// Knobs for the parametric generator. Class signatures are built in; the
/// config scales sample count, measurement jitter, and operating conditions
/// (load level, islanded-mode probability).
struct SyntheticConfig {
    Index total = 1097;
    double jitter = 1.0;        // multiplies the per-feature noise stds
    double load_min = 0.7;      // per-unit load range
    double load_max = 1.0;
    double islanded_prob = 0.2; // P(mode_flag = 1)

    void validate() const;
};

/// Class mean vector at a fixed operating point (no jitter applied).
Vector class_signature(FaultClass c, double load, bool islanded);

/// total rows split near-evenly across the 12 classes (91 or 92 each at the
/// default 1097), deterministic in rng.
LabeledDataset generate_synthetic_dataset(const SyntheticConfig& config, RngStream& rng);

/// CSV schema v1: header with the 16 feature names + "label", '.' decimal
/// separator, values printed exactly (round-trip to the bit).
void save_csv(const LabeledDataset& dataset, const std::string& path);
LabeledDataset load_csv(const std::string& path);

/// Anomaly feature rows in the same CSV schema, every label set to "FDI".
void save_fdi_csv(const Matrix& features, const std::string& path);
Matrix load_fdi_csv(const std::string& path);

struct NormalizationParams {
    Vector min;  // per feature, from the training split
    Vector max;

    void validate() const;  // max > min per feature
};

/// Range cap for normalized values; out-of-range inputs are clamped here.
inline constexpr double kNormalizedClamp = 1.5;

/// Per-feature min/max over the given samples. Constant features rejected.
NormalizationParams fit_normalizer(const Matrix& train_samples);

/// Affine map to [-1, 1] (train min -> -1, max -> +1). Values outside are
/// clamped to +-kNormalizedClamp; the clamp count is reported if asked for.
Matrix apply_normalizer(const NormalizationParams& params, const Matrix& samples,
                        long* clamped = nullptr);

/// Inverse of apply_normalizer for unclamped values.
Matrix invert_normalizer(const NormalizationParams& params, const Matrix& normalized);

struct SplitResult {
    LabeledDataset train;
    LabeledDataset test;
};

/// Stratified split: the test set receives round((1-ratio)*total) samples,
/// apportioned per class by largest remainder, so per-class proportions hold
/// within one sample. Shuffling within classes comes from rng.
SplitResult stratified_split(const LabeledDataset& dataset, double ratio, RngStream& rng);

struct DetectionTestSet {
    Matrix samples;                   // raw feature space, rows x 16
    std::vector<Verdict> truth;       // InternalFault for faults, Anomaly for FDI
    std::vector<std::string> labels;  // fault class name, or "FDI"

    Index size() const { return samples.rows(); }
    void validate() const;  // sizes agree; labels parse and match the truth
};

/// Held-out real faults + synthesized FDI rows, shuffled together.
DetectionTestSet build_detection_test_set(const LabeledDataset& fault_test,
                                          const Matrix& fdi_features, RngStream& rng);

/// Schema-v1 CSV whose label column mixes fault class names with "FDI".
void save_detection_csv(const DetectionTestSet& set, const std::string& path);
DetectionTestSet load_detection_csv(const std::string& path);

}  // namespace f2gan
