#include "f2gan/metrics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include "f2gan/diag.hpp"

namespace f2gan {

namespace {

int verdict_index(Verdict v) { return v == Verdict::InternalFault ? 0 : 1; }

std::string format4(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", v);
    return buf;
}

std::string format_exact(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

void ConfusionMatrix::validate() const {
    if (counts.rows() == 0 || counts.rows() != counts.cols())
        throw ShapeError("confusion matrix must be square and nonempty, got " +
                         std::to_string(counts.rows()) + "x" + std::to_string(counts.cols()));
    if ((counts.array() < 0).any()) throw ConfigError("confusion matrix has negative counts");
    if (total() == 0) throw ConfigError("confusion matrix is empty (zero total)");
}

ConfusionMatrix confusion(const std::vector<int>& truths, const std::vector<int>& preds,
                          int num_classes) {
    if (truths.size() != preds.size())
        throw ShapeError("confusion: " + std::to_string(truths.size()) + " truths vs " +
                         std::to_string(preds.size()) + " predictions");
    if (truths.empty()) throw ConfigError("confusion: empty input");
    if (num_classes < 1) throw ConfigError("confusion: num_classes must be >= 1");

    ConfusionMatrix cm;
    cm.counts = CountMatrix::Zero(num_classes, num_classes);
    for (std::size_t i = 0; i < truths.size(); ++i) {
        int t = truths[i], p = preds[i];
        if (t < 0 || t >= num_classes || p < 0 || p >= num_classes)
            throw ConfigError("confusion: label out of range at sample " + std::to_string(i));
        ++cm.counts(t, p);
    }
    cm.validate();
    return cm;
}

ConfusionMatrix confusion(const std::vector<FaultClass>& truths,
                          const std::vector<FaultClass>& preds) {
    std::vector<int> t(truths.size()), p(preds.size());
    std::transform(truths.begin(), truths.end(), t.begin(), class_index);
    std::transform(preds.begin(), preds.end(), p.begin(), class_index);
    return confusion(t, p, kClassCount);
}

ConfusionMatrix confusion(const std::vector<Verdict>& truths, const std::vector<Verdict>& preds) {
    std::vector<int> t(truths.size()), p(preds.size());
    std::transform(truths.begin(), truths.end(), t.begin(), verdict_index);
    std::transform(preds.begin(), preds.end(), p.begin(), verdict_index);
    return confusion(t, p, 2);
}

Prf1 prf1(const ConfusionMatrix& cm, Averaging averaging) {
    cm.validate();
    const Index k = cm.counts.rows();
    const double total = static_cast<double>(cm.total());

    Prf1 out;
    out.accuracy = static_cast<double>(cm.counts.diagonal().sum()) / total;

    if (averaging == Averaging::Binary) {
        if (k != 2) throw ShapeError("binary averaging needs a 2x2 matrix");
        double tp = static_cast<double>(cm.counts(0, 0));
        double fp = static_cast<double>(cm.counts(1, 0));
        double fn = static_cast<double>(cm.counts(0, 1));
        if (tp + fp > 0.0) {
            out.precision = tp / (tp + fp);
        } else {
            out.zero_denominator = true;
        }
        if (tp + fn > 0.0) {
            out.recall = tp / (tp + fn);
        } else {
            out.zero_denominator = true;
        }
        if (out.precision + out.recall > 0.0)
            out.f1 = 2.0 * out.precision * out.recall / (out.precision + out.recall);
        else
            out.zero_denominator = true;
        return out;
    }

    double precision_sum = 0.0, recall_sum = 0.0, f1_sum = 0.0;
    for (Index c = 0; c < k; ++c) {
        double tp = static_cast<double>(cm.counts(c, c));
        double col = static_cast<double>(cm.counts.col(c).sum());
        double row = static_cast<double>(cm.counts.row(c).sum());
        double p = 0.0, r = 0.0;
        if (col > 0.0) {
            p = tp / col;
        } else {
            out.zero_denominator = true;
        }
        if (row > 0.0) {
            r = tp / row;
        } else {
            out.zero_denominator = true;
        }
        precision_sum += p;
        recall_sum += r;
        if (p + r > 0.0)
            f1_sum += 2.0 * p * r / (p + r);
        else
            out.zero_denominator = true;
    }
    out.precision = precision_sum / static_cast<double>(k);
    out.recall = recall_sum / static_cast<double>(k);
    out.f1 = f1_sum / static_cast<double>(k);
    if (out.zero_denominator)
        diag(1, "prf1: some classes lack support; their terms contribute 0");
    return out;
}

RocCurve roc_auc(const std::vector<double>& scores, const std::vector<Verdict>& truths) {
    if (scores.size() != truths.size())
        throw ShapeError("roc_auc: " + std::to_string(scores.size()) + " scores vs " +
                         std::to_string(truths.size()) + " truths");
    if (scores.empty()) throw ConfigError("roc_auc: empty input");
    long n_pos = 0, n_neg = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (!std::isfinite(scores[i]))
            throw NumericError("roc_auc: non-finite score at sample " + std::to_string(i));
        (truths[i] == Verdict::InternalFault ? n_pos : n_neg) += 1;
    }
    if (n_pos == 0 || n_neg == 0)
        throw ConfigError("roc_auc: both classes required, got " + std::to_string(n_pos) +
                          " positives / " + std::to_string(n_neg) + " negatives");

    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return scores[a] > scores[b];  // descending: most fault-like first
    });

    RocCurve curve;
    curve.points.push_back({0.0, 0.0});
    long tp = 0, fp = 0;
    double auc2 = 0.0;  // accumulated in integer-exact halves of trapezoids
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        long tp_step = 0, fp_step = 0;
        while (j < order.size() && scores[order[j]] == scores[order[i]]) {
            (truths[order[j]] == Verdict::InternalFault ? tp_step : fp_step) += 1;
            ++j;
        }
        // One step per distinct score; equal scores move diagonally at once.
        double tpr_before = static_cast<double>(tp) / static_cast<double>(n_pos);
        tp += tp_step;
        fp += fp_step;
        double tpr_after = static_cast<double>(tp) / static_cast<double>(n_pos);
        double fpr_after = static_cast<double>(fp) / static_cast<double>(n_neg);
        auc2 += static_cast<double>(fp_step) / static_cast<double>(n_neg) *
                (tpr_before + tpr_after);
        curve.points.push_back({fpr_after, tpr_after});
        i = j;
    }
    curve.auc = auc2 / 2.0;
    return curve;
}

ScoreDistributionStats score_stats(const std::vector<double>& scores, const std::string& group) {
    if (scores.empty()) throw ConfigError("score_stats: empty input for group " + group);
    ScoreDistributionStats stats;
    stats.group = group;
    stats.count = static_cast<Index>(scores.size());
    double n = static_cast<double>(scores.size());
    stats.mean = std::accumulate(scores.begin(), scores.end(), 0.0) / n;
    double ss = 0.0;
    for (double s : scores) {
        if (!std::isfinite(s)) throw NumericError("score_stats: non-finite score");
        ss += (s - stats.mean) * (s - stats.mean);
    }
    stats.stddev = std::sqrt(ss / n);  // population std
    return stats;
}

double kl_divergence(const std::vector<double>& p_scores, const std::vector<double>& q_scores,
                     int bins, double smoothing) {
    if (p_scores.empty() || q_scores.empty()) throw ConfigError("kl_divergence: empty input");
    if (bins < 1) throw ConfigError("kl_divergence: bins must be >= 1");
    if (!(smoothing > 0.0)) throw ConfigError("kl_divergence: smoothing must be > 0");

    auto histogram = [bins](const std::vector<double>& scores) {
        std::vector<double> h(static_cast<std::size_t>(bins), 0.0);
        for (double s : scores) {
            if (!(s >= 0.0 && s <= 1.0))
                throw ConfigError("kl_divergence: score " + format_exact(s) +
                                  " outside [0, 1]");
            int b = std::min(bins - 1, static_cast<int>(s * bins));
            h[static_cast<std::size_t>(b)] += 1.0;
        }
        return h;
    };
    std::vector<double> p = histogram(p_scores);
    std::vector<double> q = histogram(q_scores);
    double p_total = static_cast<double>(p_scores.size()) + bins * smoothing;
    double q_total = static_cast<double>(q_scores.size()) + bins * smoothing;

    double kl = 0.0;
    for (int b = 0; b < bins; ++b) {
        double pb = (p[static_cast<std::size_t>(b)] + smoothing) / p_total;
        double qb = (q[static_cast<std::size_t>(b)] + smoothing) / q_total;
        kl += pb * std::log(pb / qb);
    }
    return kl;
}

void EvaluationReport::validate() const {
    auto in_unit = [](double v, const char* name) {
        if (!(v >= 0.0 && v <= 1.0))
            throw NumericError(std::string("evaluation ") + name + " outside [0, 1]: " +
                               format_exact(v));
    };
    in_unit(accuracy, "accuracy");
    in_unit(precision, "precision");
    in_unit(recall, "recall");
    in_unit(f1, "f1");
    in_unit(auc, "auc");
    if (!(kl >= 0.0)) throw NumericError("evaluation kl must be >= 0");
    if (fault_scores.stddev < 0.0 || fdi_scores.stddev < 0.0)
        throw NumericError("evaluation score std must be >= 0");
}

EvaluationReport evaluate_detection(const std::vector<double>& scores,
                                    const std::vector<Verdict>& truths, double threshold,
                                    std::uint64_t seed, const std::string& config_hash) {
    if (scores.size() != truths.size())
        throw ShapeError("evaluate_detection: scores and truths differ in length");
    if (scores.empty()) throw ConfigError("evaluate_detection: empty input");

    std::vector<Verdict> verdicts(scores.size());
    std::vector<double> fault_group, fdi_group;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        verdicts[i] = scores[i] > threshold ? Verdict::InternalFault : Verdict::Anomaly;
        (truths[i] == Verdict::InternalFault ? fault_group : fdi_group).push_back(scores[i]);
    }

    EvaluationReport report;
    Prf1 rates = prf1(confusion(truths, verdicts), Averaging::Binary);
    report.accuracy = rates.accuracy;
    report.precision = rates.precision;
    report.recall = rates.recall;
    report.f1 = rates.f1;
    report.auc = roc_auc(scores, truths).auc;
    report.fault_scores = score_stats(fault_group, "inverter_faults");
    report.fdi_scores = score_stats(fdi_group, "fdi_attacks");
    report.kl = kl_divergence(fault_group, fdi_group);
    report.seed = seed;
    report.config_hash = config_hash;
    report.validate();
    return report;
}

std::string render_detection_markdown(const EvaluationReport& cgan,
                                      const EvaluationReport& f2gan) {
    std::ostringstream out;
    out << "| Metric | Conventional GAN | F2GAN |\n";
    out << "| --- | --- | --- |\n";
    auto row = [&](const char* name, double a, double b) {
        out << "| " << name << " | " << format4(a) << " | " << format4(b) << " |\n";
    };
    row("Accuracy", cgan.accuracy, f2gan.accuracy);
    row("Precision", cgan.precision, f2gan.precision);
    row("Recall", cgan.recall, f2gan.recall);
    row("F1 Score", cgan.f1, f2gan.f1);
    row("AUC (ROC)", cgan.auc, f2gan.auc);
    row("Mean (Inverter Faults)", cgan.fault_scores.mean, f2gan.fault_scores.mean);
    row("Std (Inverter Faults)", cgan.fault_scores.stddev, f2gan.fault_scores.stddev);
    row("Mean (FDI Attacks)", cgan.fdi_scores.mean, f2gan.fdi_scores.mean);
    row("Std (FDI Attacks)", cgan.fdi_scores.stddev, f2gan.fdi_scores.stddev);
    row("KL Divergence (Real vs. FDI)", cgan.kl, f2gan.kl);
    return out.str();
}

std::string render_stage_two_markdown(const std::vector<StageTwoEvaluation>& rows) {
    std::ostringstream out;
    out << "| Model | Accuracy | Precision | Recall | F1 Score |\n";
    out << "| --- | --- | --- | --- | --- |\n";
    for (const StageTwoEvaluation& r : rows)
        out << "| " << r.model << " | " << format4(r.accuracy) << " | " << format4(r.precision)
            << " | " << format4(r.recall) << " | " << format4(r.f1) << " |\n";
    return out.str();
}

void save_roc_csv(const RocCurve& curve, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot open for writing: " + path);
    out << "fpr,tpr\n";
    for (const RocPoint& p : curve.points)
        out << format_exact(p.fpr) << ',' << format_exact(p.tpr) << '\n';
    if (!out) throw ConfigError("write failed: " + path);
}

void save_roc_svg(const std::vector<std::pair<std::string, RocCurve>>& curves,
                  const std::string& path) {
    if (curves.empty()) throw ConfigError("save_roc_svg: no curves");
    const int size = 480, margin = 48;
    const double span = static_cast<double>(size - 2 * margin);
    auto sx = [&](double fpr) { return margin + fpr * span; };
    auto sy = [&](double tpr) { return size - margin - tpr * span; };
    const std::array<const char*, 4> palette = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728"};

    std::ofstream out(path);
    if (!out) throw ConfigError("cannot open for writing: " + path);
    out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << size << "\" height=\"" << size
        << "\" viewBox=\"0 0 " << size << ' ' << size << "\">\n";
    out << "  <rect width=\"" << size << "\" height=\"" << size << "\" fill=\"white\"/>\n";
    out << "  <line x1=\"" << sx(0) << "\" y1=\"" << sy(0) << "\" x2=\"" << sx(1) << "\" y2=\""
        << sy(0) << "\" stroke=\"black\"/>\n";
    out << "  <line x1=\"" << sx(0) << "\" y1=\"" << sy(0) << "\" x2=\"" << sx(0) << "\" y2=\""
        << sy(1) << "\" stroke=\"black\"/>\n";
    out << "  <line x1=\"" << sx(0) << "\" y1=\"" << sy(0) << "\" x2=\"" << sx(1) << "\" y2=\""
        << sy(1) << "\" stroke=\"#bbbbbb\" stroke-dasharray=\"4 4\"/>\n";
    out << "  <text x=\"" << size / 2 << "\" y=\"" << size - 12
        << "\" text-anchor=\"middle\" font-size=\"13\">false positive rate</text>\n";
    out << "  <text x=\"14\" y=\"" << size / 2 << "\" text-anchor=\"middle\" font-size=\"13\""
        << " transform=\"rotate(-90 14 " << size / 2 << ")\">true positive rate</text>\n";

    for (std::size_t c = 0; c < curves.size(); ++c) {
        const char* color = palette[c % palette.size()];
        out << "  <polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
        for (const RocPoint& p : curves[c].second.points)
            out << format4(sx(p.fpr)) << ',' << format4(sy(p.tpr)) << ' ';
        out << "\"/>\n";
        out << "  <text x=\"" << margin + 10 << "\" y=\"" << margin + 18 + 18 * c
            << "\" font-size=\"13\" fill=\"" << color << "\">" << curves[c].first
            << " (AUC " << format4(curves[c].second.auc) << ")</text>\n";
    }
    out << "</svg>\n";
    if (!out) throw ConfigError("write failed: " + path);
}

}  // namespace f2gan
