#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <vector>

#include "f2gan/dataset.hpp"
#include "f2gan/neural.hpp"
#include "f2gan/types.hpp"

namespace f2gan {

// ----------------------------------------------------------------------------
// K-nearest neighbors (brute force, Euclidean on normalized features).

struct KnnModel {
    Index k = 5;
    Matrix samples;                  // training rows
    std::vector<FaultClass> labels;  // one per row

    void validate() const;  // 1 <= k <= rows, labels match rows
};

KnnModel train_knn(const LabeledDataset& train, Index k = 5);

/// Majority label among the k nearest neighbors. Equal distances are ordered
/// by training-row index; vote ties go to the smallest class index.
FaultClass predict_knn(const KnnModel& model, const Vector& s);

// ----------------------------------------------------------------------------
// Decision tree on Gini impurity.

/// Sum_i p_i (1 - p_i) over the histogram. Zero iff the node is pure;
/// upper bound 1 - 1/|classes| at the uniform histogram.
double gini(const std::array<long, kClassCount>& counts);

struct DtConfig {
    Index max_depth = 12;
    Index min_leaf = 2;

    void validate() const;
};

/// Binary tree node: internal nodes route on x[feature] <= threshold,
/// leaves predict their majority class. Every node keeps its training
/// histogram; leaf histograms are never empty.
struct DtNode {
    int feature = -1;  // < 0 marks a leaf
    double threshold = 0.0;
    FaultClass prediction = FaultClass::S1;
    std::array<long, kClassCount> histogram{};
    std::unique_ptr<DtNode> left;   // x[feature] <= threshold
    std::unique_ptr<DtNode> right;  // x[feature] >  threshold

    bool is_leaf() const { return feature < 0; }
};

/// Greedy CART growth: candidate thresholds are midpoints between consecutive
/// distinct sorted feature values; the (feature, threshold) pair minimizing
/// the weighted child Gini wins, ties resolved toward the smaller feature
/// index and threshold. Growth stops at max_depth, min_leaf, or purity.
std::unique_ptr<DtNode> train_dt(const LabeledDataset& train, const DtConfig& config = DtConfig{});

FaultClass predict_dt(const DtNode& root, const Vector& s);

// ----------------------------------------------------------------------------
// One-vs-rest linear SVM (hinge loss + L2, subgradient descent).

struct SvmConfig {
    double regularization = 1e-4;
    Index epochs = 300;
    double learning_rate = 0.05;
    std::uint64_t seed = 7;

    void validate() const;
};

struct SvmModel {
    Matrix weights;  // kClassCount x kFeatureCount, one hyperplane per class
    Vector bias;     // kClassCount
    SvmConfig config;

    void validate() const;
};

SvmModel train_svm(const LabeledDataset& train, const SvmConfig& config = SvmConfig{});

/// Per-class margins w_c . s + b_c, the argmax of which is the prediction.
Vector svm_margins(const SvmModel& model, const Vector& s);

/// Argmax-margin class; ties go to the smallest class index.
FaultClass predict_svm(const SvmModel& model, const Vector& s);

// ----------------------------------------------------------------------------
// Softmax ANN (16-64-32-12, ReLU hiddens) trained with cross-entropy.

struct AnnConfig {
    std::vector<Index> hidden = {64, 32};
    Index epochs = 200;
    Index batch_size = 64;
    double learning_rate = 1e-3;
    std::uint64_t seed = 11;

    void validate() const;
};

struct AnnModel {
    Mlp net;
    AnnConfig config;
};

AnnModel train_ann(const LabeledDataset& train, const AnnConfig& config = AnnConfig{});

/// Softmax class distribution for one sample; rows sum to 1 within 1e-9.
Vector ann_probabilities(const AnnModel& model, const Vector& s);

/// Argmax-probability class; ties go to the smallest class index.
FaultClass predict_ann(const AnnModel& model, const Vector& s);

// ----------------------------------------------------------------------------
// Stage-2 ensemble.

struct StageTwoConfig {
    Index knn_k = 5;
    DtConfig dt;
    SvmConfig svm;
    AnnConfig ann;

    void validate() const;
};

struct StageTwoModels {
    KnnModel knn;
    std::unique_ptr<DtNode> dt;
    SvmModel svm;
    AnnModel ann;
};

StageTwoModels train_stage_two(const LabeledDataset& train,
                               const StageTwoConfig& config = StageTwoConfig{});

/// Per-model predictions plus the consensus: a strict majority (>= 3 of 4
/// votes) decides; anything weaker is reported as undecided.
struct ClassificationReport {
    FaultClass knn = FaultClass::S1;
    FaultClass dt = FaultClass::S1;
    FaultClass svm = FaultClass::S1;
    FaultClass ann = FaultClass::S1;
    bool decided = false;
    FaultClass consensus = FaultClass::S1;  // meaningful only when decided
};

ClassificationReport classify_fault(const StageTwoModels& models, const Vector& s);

/// Consensus column text: the class name, or "Undecided".
std::string consensus_label(const ClassificationReport& report);

}  // namespace f2gan
