#include "f2gan/classify.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <utility>

#include "f2gan/diag.hpp"

namespace f2gan {

namespace {

FaultClass majority_class(const std::array<long, kClassCount>& hist) {
    int best = 0;
    for (int c = 1; c < kClassCount; ++c)
        if (hist[static_cast<std::size_t>(c)] > hist[static_cast<std::size_t>(best)]) best = c;
    return fault_class_from_index(best);  // ties keep the smallest index
}

void require_sample_width(const Vector& s, const char* who) {
    if (s.size() != kFeatureCount)
        throw ShapeError(std::string(who) + ": sample has " + std::to_string(s.size()) +
                         " features, expected " + std::to_string(kFeatureCount));
    require_finite(s, who);
}

}  // namespace

// ----------------------------------------------------------------------------
// KNN

void KnnModel::validate() const {
    if (k < 1) throw ConfigError("knn k must be >= 1, got " + std::to_string(k));
    if (k > samples.rows())
        throw ConfigError("knn k = " + std::to_string(k) + " exceeds training size " +
                          std::to_string(samples.rows()));
    if (static_cast<Index>(labels.size()) != samples.rows())
        throw ShapeError("knn labels do not match training rows");
    require_dims(samples.cols(), kFeatureCount, "knn feature columns");
    require_finite(samples, "knn training samples");
}

KnnModel train_knn(const LabeledDataset& train, Index k) {
    train.validate();
    KnnModel model;
    model.k = k;
    model.samples = train.samples;
    model.labels = train.labels;
    model.validate();
    return model;
}

FaultClass predict_knn(const KnnModel& model, const Vector& s) {
    model.validate();
    require_sample_width(s, "predict_knn");

    const Index n = model.samples.rows();
    std::vector<std::pair<double, Index>> dist(static_cast<std::size_t>(n));
    for (Index r = 0; r < n; ++r)
        dist[static_cast<std::size_t>(r)] = {
            (model.samples.row(r).transpose() - s).squaredNorm(), r};
    std::partial_sort(dist.begin(), dist.begin() + model.k, dist.end());

    std::array<long, kClassCount> votes{};
    for (Index i = 0; i < model.k; ++i) {
        Index row = dist[static_cast<std::size_t>(i)].second;
        ++votes[static_cast<std::size_t>(class_index(model.labels[static_cast<std::size_t>(row)]))];
    }
    return majority_class(votes);
}

// ----------------------------------------------------------------------------
// Decision tree

double gini(const std::array<long, kClassCount>& counts) {
    long total = 0;
    for (long c : counts) {
        if (c < 0) throw ConfigError("gini: negative class count");
        total += c;
    }
    if (total == 0) throw ConfigError("gini: empty histogram");
    double g = 0.0;
    for (long c : counts) {
        double p = static_cast<double>(c) / static_cast<double>(total);
        g += p * (1.0 - p);
    }
    return g;
}

void DtConfig::validate() const {
    if (max_depth < 1) throw ConfigError("dt max_depth must be >= 1");
    if (min_leaf < 1) throw ConfigError("dt min_leaf must be >= 1");
}

namespace {

struct SplitChoice {
    bool found = false;
    int feature = -1;
    double threshold = 0.0;
    double weighted_gini = 0.0;
};

SplitChoice best_split(const Matrix& x, const std::vector<FaultClass>& y,
                       const std::vector<Index>& rows, Index min_leaf) {
    const Index n = static_cast<Index>(rows.size());
    SplitChoice best;
    std::vector<std::pair<double, int>> vals(rows.size());
    for (Index f = 0; f < kFeatureCount; ++f) {
        for (std::size_t i = 0; i < rows.size(); ++i)
            vals[i] = {x(rows[i], f), class_index(y[static_cast<std::size_t>(rows[i])])};
        std::sort(vals.begin(), vals.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });

        std::array<long, kClassCount> left{}, right{};
        for (const auto& v : vals) ++right[static_cast<std::size_t>(v.second)];

        for (Index i = 0; i + 1 < n; ++i) {
            std::size_t cls = static_cast<std::size_t>(vals[static_cast<std::size_t>(i)].second);
            ++left[cls];
            --right[cls];
            double lo = vals[static_cast<std::size_t>(i)].first;
            double hi = vals[static_cast<std::size_t>(i) + 1].first;
            if (!(hi > lo)) continue;  // candidates sit only between distinct values
            Index n_l = i + 1, n_r = n - n_l;
            if (n_l < min_leaf || n_r < min_leaf) continue;
            double threshold = (lo + hi) / 2.0;
            if (!(lo < threshold && threshold < hi)) continue;  // adjacent doubles
            double weighted = (static_cast<double>(n_l) * gini(left) +
                               static_cast<double>(n_r) * gini(right)) /
                              static_cast<double>(n);
            if (!best.found || weighted < best.weighted_gini)
                best = {true, static_cast<int>(f), threshold, weighted};
        }
    }
    return best;
}

std::unique_ptr<DtNode> grow(const Matrix& x, const std::vector<FaultClass>& y,
                             const std::vector<Index>& rows, Index depth, const DtConfig& cfg) {
    auto node = std::make_unique<DtNode>();
    for (Index r : rows)
        ++node->histogram[static_cast<std::size_t>(
            class_index(y[static_cast<std::size_t>(r)]))];
    node->prediction = majority_class(node->histogram);

    if (depth >= cfg.max_depth || static_cast<Index>(rows.size()) < 2 * cfg.min_leaf ||
        gini(node->histogram) == 0.0)
        return node;

    SplitChoice choice = best_split(x, y, rows, cfg.min_leaf);
    if (!choice.found) return node;

    std::vector<Index> left_rows, right_rows;
    for (Index r : rows)
        (x(r, choice.feature) <= choice.threshold ? left_rows : right_rows).push_back(r);

    node->feature = choice.feature;
    node->threshold = choice.threshold;
    node->left = grow(x, y, left_rows, depth + 1, cfg);
    node->right = grow(x, y, right_rows, depth + 1, cfg);
    return node;
}

}  // namespace

std::unique_ptr<DtNode> train_dt(const LabeledDataset& train, const DtConfig& config) {
    config.validate();
    train.validate();
    if (train.size() == 0) throw ConfigError("train_dt: empty training set");
    std::vector<Index> rows(static_cast<std::size_t>(train.size()));
    std::iota(rows.begin(), rows.end(), Index{0});
    return grow(train.samples, train.labels, rows, 0, config);
}

FaultClass predict_dt(const DtNode& root, const Vector& s) {
    require_sample_width(s, "predict_dt");
    const DtNode* node = &root;
    while (!node->is_leaf())
        node = s[node->feature] <= node->threshold ? node->left.get() : node->right.get();
    return node->prediction;
}

// ----------------------------------------------------------------------------
// One-vs-rest linear SVM

void SvmConfig::validate() const {
    if (!(regularization >= 0.0)) throw ConfigError("svm regularization must be >= 0");
    if (epochs < 1) throw ConfigError("svm epochs must be >= 1");
    if (!(learning_rate > 0.0)) throw ConfigError("svm learning_rate must be > 0");
}

void SvmModel::validate() const {
    require_dims(weights.rows(), kClassCount, "svm class count");
    require_dims(weights.cols(), kFeatureCount, "svm feature width");
    require_dims(bias.size(), kClassCount, "svm bias length");
    require_finite(weights, "svm weights");
    require_finite(bias, "svm bias");
}

SvmModel train_svm(const LabeledDataset& train, const SvmConfig& config) {
    config.validate();
    train.validate();
    if (train.size() == 0) throw ConfigError("train_svm: empty training set");

    SvmModel model;
    model.config = config;
    model.weights = Matrix::Zero(kClassCount, kFeatureCount);
    model.bias = Vector::Zero(kClassCount);

    RngStream rng(config.seed);
    std::vector<Index> order(static_cast<std::size_t>(train.size()));
    std::iota(order.begin(), order.end(), Index{0});
    const double lr = config.learning_rate;
    const double shrink = 1.0 - lr * config.regularization;

    for (Index epoch = 0; epoch < config.epochs; ++epoch) {
        rng.shuffle(order);
        for (Index idx : order) {
            auto x = train.samples.row(idx);
            int truth = class_index(train.labels[static_cast<std::size_t>(idx)]);
            Vector response = model.weights * x.transpose() + model.bias;
            model.weights *= shrink;
            for (int c = 0; c < kClassCount; ++c) {
                double y = c == truth ? 1.0 : -1.0;
                if (y * response[c] < 1.0) {  // inside the margin: hinge is active
                    model.weights.row(c) += lr * y * x;
                    model.bias[c] += lr * y;
                }
            }
        }
        if (!model.weights.allFinite() || !model.bias.allFinite())
            throw NumericError("train_svm: non-finite parameters after epoch " +
                               std::to_string(epoch));
    }
    return model;
}

Vector svm_margins(const SvmModel& model, const Vector& s) {
    model.validate();
    require_sample_width(s, "svm_margins");
    return model.weights * s + model.bias;
}

FaultClass predict_svm(const SvmModel& model, const Vector& s) {
    Vector response = svm_margins(model, s);
    int best = 0;
    for (int c = 1; c < kClassCount; ++c)
        if (response[c] > response[best]) best = c;  // ties keep the smallest index
    return fault_class_from_index(best);
}

// ----------------------------------------------------------------------------
// Softmax ANN

void AnnConfig::validate() const {
    if (hidden.empty()) throw ConfigError("ann needs at least one hidden layer");
    for (Index h : hidden)
        if (h < 1) throw ConfigError("ann hidden widths must be >= 1");
    if (epochs < 1) throw ConfigError("ann epochs must be >= 1");
    if (batch_size < 1) throw ConfigError("ann batch_size must be >= 1");
    if (!(learning_rate > 0.0)) throw ConfigError("ann learning_rate must be > 0");
}

AnnModel train_ann(const LabeledDataset& train, const AnnConfig& config) {
    config.validate();
    train.validate();
    if (train.size() == 0) throw ConfigError("train_ann: empty training set");

    RngStream root(config.seed);
    RngStream init = root.substream("init");
    RngStream shuffle = root.substream("shuffle");

    std::vector<LayerSpec> specs;
    for (Index h : config.hidden) specs.push_back({h, Activation::ReLU, 0.0, 0.2});
    specs.push_back({kClassCount, Activation::Softmax, 0.0, 0.2});

    AnnModel model{Mlp::build(kFeatureCount, specs, init), config};
    AdamConfig adam_cfg;
    adam_cfg.lr = config.learning_rate;
    adam_cfg.beta1 = 0.9;  // plain classification, no GAN damping
    AdamState adam(model.net, adam_cfg);

    std::vector<Index> order(static_cast<std::size_t>(train.size()));
    std::iota(order.begin(), order.end(), Index{0});

    for (Index epoch = 0; epoch < config.epochs; ++epoch) {
        shuffle.shuffle(order);
        for (std::size_t start = 0; start < order.size();
             start += static_cast<std::size_t>(config.batch_size)) {
            std::size_t stop =
                std::min(order.size(), start + static_cast<std::size_t>(config.batch_size));
            const Index b = static_cast<Index>(stop - start);
            Matrix batch(b, kFeatureCount);
            std::vector<int> truth(static_cast<std::size_t>(b));
            for (Index i = 0; i < b; ++i) {
                Index row = order[start + static_cast<std::size_t>(i)];
                batch.row(i) = train.samples.row(row);
                truth[static_cast<std::size_t>(i)] =
                    class_index(train.labels[static_cast<std::size_t>(row)]);
            }

            ForwardResult fwd = forward(model.net, batch);
            const double inv_b = 1.0 / static_cast<double>(b);
            Matrix grad = Matrix::Zero(b, kClassCount);
            double loss = 0.0;
            for (Index i = 0; i < b; ++i) {
                double p = std::max(fwd.output(i, truth[static_cast<std::size_t>(i)]), 1e-12);
                loss -= std::log(p) * inv_b;
                grad(i, truth[static_cast<std::size_t>(i)]) = -inv_b / p;
            }
            if (!std::isfinite(loss))
                throw NumericError("train_ann: non-finite loss at epoch " +
                                   std::to_string(epoch));
            adam_step(model.net, backward(model.net, fwd.trace, grad), adam);
        }
    }
    return model;
}

Vector ann_probabilities(const AnnModel& model, const Vector& s) {
    require_sample_width(s, "ann_probabilities");
    return forward(model.net, s.transpose()).output.row(0).transpose();
}

FaultClass predict_ann(const AnnModel& model, const Vector& s) {
    Vector p = ann_probabilities(model, s);
    int best = 0;
    for (int c = 1; c < kClassCount; ++c)
        if (p[c] > p[best]) best = c;  // ties keep the smallest index
    return fault_class_from_index(best);
}

// ----------------------------------------------------------------------------
// Stage-2 ensemble

void StageTwoConfig::validate() const {
    if (knn_k < 1) throw ConfigError("knn k must be >= 1");
    dt.validate();
    svm.validate();
    ann.validate();
}

StageTwoModels train_stage_two(const LabeledDataset& train, const StageTwoConfig& config) {
    config.validate();
    StageTwoModels models;
    models.knn = train_knn(train, config.knn_k);
    models.dt = train_dt(train, config.dt);
    models.svm = train_svm(train, config.svm);
    models.ann = train_ann(train, config.ann);
    return models;
}

ClassificationReport classify_fault(const StageTwoModels& models, const Vector& s) {
    if (!models.dt) throw ConfigError("classify_fault: decision tree missing");
    ClassificationReport report;
    report.knn = predict_knn(models.knn, s);
    report.dt = predict_dt(*models.dt, s);
    report.svm = predict_svm(models.svm, s);
    report.ann = predict_ann(models.ann, s);

    std::array<int, kClassCount> votes{};
    for (FaultClass c : {report.knn, report.dt, report.svm, report.ann})
        ++votes[static_cast<std::size_t>(class_index(c))];
    for (int c = 0; c < kClassCount; ++c)
        if (votes[static_cast<std::size_t>(c)] >= 3) {  // strict majority of the 4 models
            report.decided = true;
            report.consensus = fault_class_from_index(c);
            break;
        }
    return report;
}

std::string consensus_label(const ClassificationReport& report) {
    return report.decided ? to_string(report.consensus) : "Undecided";
}

}  // namespace f2gan
