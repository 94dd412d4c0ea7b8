#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "f2gan/dataset.hpp"
#include "f2gan/types.hpp"

namespace f2gan {

using CountMatrix = Eigen::Matrix<long, Eigen::Dynamic, Eigen::Dynamic>;

/// Square prediction counts; row = truth, column = prediction. The binary
/// detection layout puts the positive class (InternalFault) at index 0.
struct ConfusionMatrix {
    CountMatrix counts;

    long total() const { return counts.sum(); }
    void validate() const;  // square, nonempty, entries >= 0, total > 0
};

ConfusionMatrix confusion(const std::vector<int>& truths, const std::vector<int>& preds,
                          int num_classes);
ConfusionMatrix confusion(const std::vector<FaultClass>& truths,
                          const std::vector<FaultClass>& preds);
ConfusionMatrix confusion(const std::vector<Verdict>& truths, const std::vector<Verdict>& preds);

enum class Averaging { Binary, Macro };

struct Prf1 {
    double accuracy = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    bool zero_denominator = false;  // some term fell back to 0 for lack of support
};

/// Binary: TP/FP/FN formulas on the positive class (index 0); Macro:
/// unweighted means of per-class precision, recall, and per-class F1.
/// Zero-denominator classes contribute 0 and raise the flag.
Prf1 prf1(const ConfusionMatrix& cm, Averaging averaging);

struct RocPoint {
    double fpr = 0.0;
    double tpr = 0.0;
};

/// Threshold sweep over the distinct scores, ties grouped into single steps;
/// starts at (0,0), ends at (1,1), both coordinates non-decreasing.
struct RocCurve {
    std::vector<RocPoint> points;
    double auc = 0.0;
};

/// Positive class = InternalFault; higher scores rank more fault-like.
/// AUC by the trapezoid rule, which equals the Mann-Whitney pair count
/// (concordant + 0.5 ties) / (n+ * n-).
RocCurve roc_auc(const std::vector<double>& scores, const std::vector<Verdict>& truths);

struct ScoreDistributionStats {
    std::string group;
    double mean = 0.0;
    double stddev = 0.0;  // population std
    Index count = 0;
};

ScoreDistributionStats score_stats(const std::vector<double>& scores, const std::string& group);

/// Smoothed fixed-grid histogram KL: both samples land on the same `bins`
/// cells over [0, 1], every cell gains `smoothing` mass, both renormalize,
/// result is sum p ln(p/q). Non-negative; zero for identical samples.
double kl_divergence(const std::vector<double>& p_scores, const std::vector<double>& q_scores,
                     int bins = 50, double smoothing = 1e-6);

/// One detection-stage evaluation: the statistical comparison row set
/// (accuracy through KL) for a single GAN variant.
struct EvaluationReport {
    double accuracy = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    double auc = 0.0;
    ScoreDistributionStats fault_scores;  // group "inverter_faults"
    ScoreDistributionStats fdi_scores;    // group "fdi_attacks"
    double kl = 0.0;
    std::uint64_t seed = 0;
    std::string config_hash;

    void validate() const;  // rates in [0,1], kl >= 0, stds >= 0
};

/// Scores + binary truth at a verdict threshold (strict >) to a full report.
EvaluationReport evaluate_detection(const std::vector<double>& scores,
                                    const std::vector<Verdict>& truths, double threshold,
                                    std::uint64_t seed, const std::string& config_hash);

struct StageTwoEvaluation {
    std::string model;  // "KNN", "Decision Tree", "SVM", "ANN", ...
    double accuracy = 0.0;
    double precision = 0.0;  // macro
    double recall = 0.0;     // macro
    double f1 = 0.0;         // macro
};

/// Markdown table of the CGAN-vs-F2GAN detection comparison (metric rows,
/// one column per variant).
std::string render_detection_markdown(const EvaluationReport& cgan,
                                      const EvaluationReport& f2gan);

/// Markdown table of the Stage-2 classifiers (model rows x 4 metric columns).
std::string render_stage_two_markdown(const std::vector<StageTwoEvaluation>& rows);

void save_roc_csv(const RocCurve& curve, const std::string& path);

/// Standalone SVG plot with one labeled polyline per named curve.
void save_roc_svg(const std::vector<std::pair<std::string, RocCurve>>& curves,
                  const std::string& path);

}  // namespace f2gan
