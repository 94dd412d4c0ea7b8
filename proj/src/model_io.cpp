#include "f2gan/model_io.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "io_util.hpp"

namespace f2gan {

namespace fs = std::filesystem;

namespace jsonio {

void write_json_file(const json& j, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot open for writing: " + path);
    out << j.dump(2) << '\n';
    if (!out) throw ConfigError("write failed: " + path);
}

json read_json_file(const std::string& path, const std::string& expected_kind) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open: " + path);
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        throw ConfigError(path + ": invalid JSON: " + e.what());
    }
    if (!j.is_object()) throw ConfigError(path + ": expected a JSON object");
    if (!j.contains("format_version") || !j["format_version"].is_number_integer() ||
        j["format_version"].get<int>() != kModelFormatVersion)
        throw ConfigError(path + ": unsupported format_version (expected " +
                          std::to_string(kModelFormatVersion) + ")");
    std::string kind = j.value("kind", "");
    if (kind != expected_kind)
        throw ConfigError(path + ": expected kind '" + expected_kind + "', got '" + kind + "'");
    return j;
}

json stamped(const char* kind) {
    json j;
    j["format_version"] = kModelFormatVersion;
    j["kind"] = kind;
    return j;
}

json matrix_to_json(const Matrix& m) {
    json rows = json::array();
    for (Index r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        rows.push_back(std::move(row));
    }
    return rows;
}

Matrix matrix_from_json(const json& j, const std::string& what) {
    if (!j.is_array() || j.empty()) throw ConfigError(what + ": expected a non-empty 2-d array");
    const Index rows = static_cast<Index>(j.size());
    const Index cols = static_cast<Index>(j[0].size());
    Matrix m(rows, cols);
    for (Index r = 0; r < rows; ++r) {
        const json& row = j[static_cast<std::size_t>(r)];
        if (!row.is_array() || static_cast<Index>(row.size()) != cols)
            throw ConfigError(what + ": ragged rows at row " + std::to_string(r));
        for (Index c = 0; c < cols; ++c)
            m(r, c) = row[static_cast<std::size_t>(c)].get<double>();
    }
    return m;
}

json vector_to_json(const Vector& v) {
    json out = json::array();
    for (Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
    return out;
}

Vector vector_from_json(const json& j, const std::string& what) {
    if (!j.is_array()) throw ConfigError(what + ": expected an array");
    Vector v(static_cast<Index>(j.size()));
    for (Index i = 0; i < v.size(); ++i) v[i] = j[static_cast<std::size_t>(i)].get<double>();
    return v;
}

void check_keys(const json& j, std::initializer_list<const char*> allowed,
                const std::string& where) {
    for (const auto& item : j.items()) {
        bool known = false;
        for (const char* key : allowed)
            if (item.key() == key) {
                known = true;
                break;
            }
        if (!known) throw ConfigError(where + ": unknown field '" + item.key() + "'");
    }
}

GanVariantKind variant_kind_from_string(const std::string& s) {
    if (s == to_string(GanVariantKind::Conventional)) return GanVariantKind::Conventional;
    if (s == to_string(GanVariantKind::FeatureFeedback)) return GanVariantKind::FeatureFeedback;
    throw ConfigError("unknown GAN variant: " + s);
}

AttackKind attack_kind_from_string(const std::string& s) {
    if (s == to_string(AttackKind::Stealthy)) return AttackKind::Stealthy;
    if (s == to_string(AttackKind::Naive)) return AttackKind::Naive;
    throw ConfigError("unknown attack kind: " + s);
}

json architecture_to_json(const GanArchitecture& a) {
    json j;
    j["input_dim"] = static_cast<long long>(a.input_dim);
    j["latent_dim"] = static_cast<long long>(a.latent_dim);
    j["generator_hidden"] = index_list_to_json(a.generator_hidden);
    j["generator_hidden_activation"] = to_string(a.generator_hidden_activation);
    j["generator_leaky_slope"] = a.generator_leaky_slope;
    j["discriminator_hidden"] = index_list_to_json(a.discriminator_hidden);
    j["discriminator_hidden_activation"] = to_string(a.discriminator_hidden_activation);
    j["discriminator_leaky_slope"] = a.discriminator_leaky_slope;
    j["discriminator_dropout"] = a.discriminator_dropout;
    j["dropout_layers"] = index_list_to_json(a.dropout_layers);
    j["feature_layer_index"] = static_cast<long long>(a.feature_layer_index);
    return j;
}

GanArchitecture architecture_from_json(const json& j) {
    check_keys(j,
               {"input_dim", "latent_dim", "generator_hidden", "generator_hidden_activation",
                "generator_leaky_slope", "discriminator_hidden",
                "discriminator_hidden_activation", "discriminator_leaky_slope",
                "discriminator_dropout", "dropout_layers", "feature_layer_index"},
               "architecture");
    GanArchitecture a;
    a.input_dim = j.at("input_dim").get<Index>();
    a.latent_dim = j.at("latent_dim").get<Index>();
    a.generator_hidden = index_list_from_json<Index>(j.at("generator_hidden"), "generator_hidden");
    a.generator_hidden_activation =
        activation_from_string(j.at("generator_hidden_activation").get<std::string>());
    a.generator_leaky_slope = j.at("generator_leaky_slope").get<double>();
    a.discriminator_hidden =
        index_list_from_json<Index>(j.at("discriminator_hidden"), "discriminator_hidden");
    a.discriminator_hidden_activation =
        activation_from_string(j.at("discriminator_hidden_activation").get<std::string>());
    a.discriminator_leaky_slope = j.at("discriminator_leaky_slope").get<double>();
    a.discriminator_dropout = j.at("discriminator_dropout").get<double>();
    a.dropout_layers = index_list_from_json<std::size_t>(j.at("dropout_layers"), "dropout_layers");
    a.feature_layer_index = j.at("feature_layer_index").get<std::size_t>();
    return a;
}

json normalization_to_json(const NormalizationParams& p) {
    json j;
    j["min"] = vector_to_json(p.min);
    j["max"] = vector_to_json(p.max);
    return j;
}

NormalizationParams normalization_from_json(const json& j) {
    NormalizationParams p;
    p.min = vector_from_json(j.at("min"), "normalization min");
    p.max = vector_from_json(j.at("max"), "normalization max");
    p.validate();
    return p;
}

json svm_config_to_json(const SvmConfig& c) {
    json j;
    j["regularization"] = c.regularization;
    j["epochs"] = static_cast<long long>(c.epochs);
    j["learning_rate"] = c.learning_rate;
    j["seed"] = c.seed;
    return j;
}

SvmConfig svm_config_from_json(const json& j) {
    check_keys(j, {"regularization", "epochs", "learning_rate", "seed"}, "svm config");
    SvmConfig c;
    c.regularization = j.at("regularization").get<double>();
    c.epochs = j.at("epochs").get<Index>();
    c.learning_rate = j.at("learning_rate").get<double>();
    c.seed = j.at("seed").get<std::uint64_t>();
    c.validate();
    return c;
}

json ann_config_to_json(const AnnConfig& c) {
    json j;
    j["hidden"] = index_list_to_json(c.hidden);
    j["epochs"] = static_cast<long long>(c.epochs);
    j["batch_size"] = static_cast<long long>(c.batch_size);
    j["learning_rate"] = c.learning_rate;
    j["seed"] = c.seed;
    return j;
}

AnnConfig ann_config_from_json(const json& j) {
    check_keys(j, {"hidden", "epochs", "batch_size", "learning_rate", "seed"}, "ann config");
    AnnConfig c;
    c.hidden = index_list_from_json<Index>(j.at("hidden"), "ann hidden");
    c.epochs = j.at("epochs").get<Index>();
    c.batch_size = j.at("batch_size").get<Index>();
    c.learning_rate = j.at("learning_rate").get<double>();
    c.seed = j.at("seed").get<std::uint64_t>();
    c.validate();
    return c;
}

}  // namespace jsonio

using namespace jsonio;

namespace {

// ----------------------------------------------------------------------------
// Mlp JSON form.

json mlp_to_json(const Mlp& net) {
    json j = stamped("mlp");
    json layers = json::array();
    for (const DenseLayer& l : net.layers()) {
        l.validate();
        require_finite(l.weights, "layer weights");
        require_finite(l.bias, "layer bias");
        json jl;
        jl["in_dim"] = static_cast<long long>(l.in_dim());
        jl["out_dim"] = static_cast<long long>(l.out_dim());
        jl["activation"] = to_string(l.activation);
        jl["leaky_slope"] = l.leaky_slope;
        jl["dropout_rate"] = l.dropout_rate;
        jl["weights"] = matrix_to_json(l.weights);
        jl["bias"] = vector_to_json(l.bias);
        layers.push_back(std::move(jl));
    }
    j["layers"] = std::move(layers);
    return j;
}

Mlp mlp_from_json(const json& j, const std::string& where) {
    std::vector<DenseLayer> layers;
    for (const json& jl : j.at("layers")) {
        DenseLayer l;
        l.activation = activation_from_string(jl.at("activation").get<std::string>());
        l.leaky_slope = jl.at("leaky_slope").get<double>();
        l.dropout_rate = jl.at("dropout_rate").get<double>();
        l.weights = matrix_from_json(jl.at("weights"), where + ": layer weights");
        l.bias = vector_from_json(jl.at("bias"), where + ": layer bias");
        if (l.in_dim() != jl.at("in_dim").get<Index>() ||
            l.out_dim() != jl.at("out_dim").get<Index>())
            throw ConfigError(where + ": layer dims disagree with the parameter shapes");
        layers.push_back(std::move(l));
    }
    return Mlp(std::move(layers));
}

// ----------------------------------------------------------------------------
// Stage-2 model pieces.

json dt_node_to_json(const DtNode& node) {
    json j;
    j["prediction"] = to_string(node.prediction);
    json hist = json::array();
    for (long c : node.histogram) hist.push_back(c);
    j["histogram"] = std::move(hist);
    if (!node.is_leaf()) {
        j["feature"] = node.feature;
        j["threshold"] = node.threshold;
        j["left"] = dt_node_to_json(*node.left);
        j["right"] = dt_node_to_json(*node.right);
    }
    return j;
}

std::unique_ptr<DtNode> dt_node_from_json(const json& j, const std::string& where) {
    auto node = std::make_unique<DtNode>();
    node->prediction = fault_class_from_string(j.at("prediction").get<std::string>());
    const json& hist = j.at("histogram");
    if (!hist.is_array() || hist.size() != static_cast<std::size_t>(kClassCount))
        throw ConfigError(where + ": histogram must have " + std::to_string(kClassCount) +
                          " entries");
    for (int c = 0; c < kClassCount; ++c)
        node->histogram[static_cast<std::size_t>(c)] =
            hist[static_cast<std::size_t>(c)].get<long>();
    if (j.contains("feature")) {
        node->feature = j.at("feature").get<int>();
        if (node->feature < 0 || node->feature >= kFeatureCount)
            throw ConfigError(where + ": split feature out of range");
        node->threshold = j.at("threshold").get<double>();
        node->left = dt_node_from_json(j.at("left"), where);
        node->right = dt_node_from_json(j.at("right"), where);
    }
    return node;
}

std::string resolve_against(const std::string& dir, const std::string& path) {
    fs::path p(path);
    if (p.is_relative()) p = fs::path(dir) / p;
    return p.string();
}

/// Rebuilds the KNN training matrix a knn.json reference describes: load the
/// dataset, take the listed rows, normalize. Shared by save (to verify the
/// reference) and load (to materialize the model).
KnnModel knn_from_reference(const KnnReference& ref, const std::string& dir, Index k) {
    LabeledDataset data = load_csv(resolve_against(dir, ref.dataset_path));
    Matrix raw(static_cast<Index>(ref.rows.size()), kFeatureCount);
    std::vector<FaultClass> labels;
    labels.reserve(ref.rows.size());
    for (std::size_t i = 0; i < ref.rows.size(); ++i) {
        Index r = ref.rows[i];
        if (r < 0 || r >= data.size())
            throw ConfigError("knn row " + std::to_string(r) + " out of range for " +
                              ref.dataset_path + " (" + std::to_string(data.size()) + " rows)");
        raw.row(static_cast<Index>(i)) = data.samples.row(r);
        labels.push_back(data.labels[static_cast<std::size_t>(r)]);
    }
    KnnModel model;
    model.k = k;
    model.samples = apply_normalizer(ref.normalization, raw);
    model.labels = std::move(labels);
    model.validate();
    return model;
}

std::string model_file(const std::string& dir, const char* name) {
    return (fs::path(dir) / name).string();
}

json read_model_file(const std::string& dir, const char* name, const char* kind) {
    std::string path = model_file(dir, name);
    if (!fs::exists(path)) throw ConfigError("missing model file: " + path);
    return read_json_file(path, kind);
}

json score_stats_to_json(const ScoreDistributionStats& s) {
    json j;
    j["group"] = s.group;
    j["mean"] = s.mean;
    j["stddev"] = s.stddev;
    j["count"] = static_cast<long long>(s.count);
    return j;
}

ScoreDistributionStats score_stats_from_json(const json& j) {
    ScoreDistributionStats s;
    s.group = j.at("group").get<std::string>();
    s.mean = j.at("mean").get<double>();
    s.stddev = j.at("stddev").get<double>();
    s.count = j.at("count").get<Index>();
    return s;
}

}  // namespace

// ----------------------------------------------------------------------------
// Mlp files.

void save_mlp(const Mlp& net, const std::string& path) {
    if (net.depth() == 0) throw ConfigError("cannot save an empty network");
    write_json_file(mlp_to_json(net), path);
}

Mlp load_mlp(const std::string& path) {
    json j = read_json_file(path, "mlp");
    return with_context(path, [&] { return mlp_from_json(j, path); });
}

// ----------------------------------------------------------------------------
// GAN bundles.

void GanBundle::validate() const {
    gan.architecture.validate();
    gan.variant.validate();
    normalization.validate();
    require_dims(gan.generator.input_dim(), gan.architecture.latent_dim, "generator input");
    require_dims(gan.generator.output_dim(), gan.architecture.input_dim, "generator output");
    require_dims(gan.discriminator.input_dim(), gan.architecture.input_dim,
                 "discriminator input");
    require_dims(gan.discriminator.output_dim(), 1, "discriminator output");
    require_dims(normalization.min.size(), gan.architecture.input_dim, "normalization width");
}

void save_gan_bundle(const GanBundle& bundle, const std::string& path) {
    bundle.validate();
    json j = stamped("gan_bundle");
    json variant;
    variant["kind"] = to_string(bundle.gan.variant.kind);
    variant["lambda"] = bundle.gan.variant.lambda;
    j["variant"] = std::move(variant);
    j["architecture"] = architecture_to_json(bundle.gan.architecture);
    j["seed"] = bundle.seed;
    j["normalization"] = normalization_to_json(bundle.normalization);
    j["generator"] = mlp_to_json(bundle.gan.generator);
    j["discriminator"] = mlp_to_json(bundle.gan.discriminator);
    write_json_file(j, path);
}

GanBundle load_gan_bundle(const std::string& path) {
    json j = read_json_file(path, "gan_bundle");
    return with_context(path, [&] {
        GanBundle b;
        b.gan.variant.kind =
            variant_kind_from_string(j.at("variant").at("kind").get<std::string>());
        b.gan.variant.lambda = j.at("variant").at("lambda").get<double>();
        b.gan.architecture = architecture_from_json(j.at("architecture"));
        b.seed = j.at("seed").get<std::uint64_t>();
        b.normalization = normalization_from_json(j.at("normalization"));
        b.gan.generator = mlp_from_json(j.at("generator"), path + ": generator");
        b.gan.discriminator = mlp_from_json(j.at("discriminator"), path + ": discriminator");
        b.validate();
        return b;
    });
}

// ----------------------------------------------------------------------------
// Training history CSV.

void save_history_csv(const std::vector<EpochStats>& history, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot open for writing: " + path);
    out << "epoch,L_D,L_G_fool,L_FM,mean_D_real,mean_D_fake\n";
    for (std::size_t i = 0; i < history.size(); ++i) {
        const EpochStats& e = history[i];
        out << (i + 1) << ',' << format_value(e.loss_d) << ',' << format_value(e.loss_g_fool)
            << ',' << format_value(e.loss_fm) << ',' << format_value(e.mean_d_real) << ','
            << format_value(e.mean_d_fake) << '\n';
    }
    if (!out) throw ConfigError("write failed: " + path);
}

std::vector<EpochStats> load_history_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open: " + path);
    std::string line;
    if (!std::getline(in, line)) throw ConfigError(path + ": empty file, header required");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "epoch,L_D,L_G_fool,L_FM,mean_D_real,mean_D_fake")
        throw ConfigError(path + ": unexpected history header '" + line + "'");

    std::vector<EpochStats> history;
    long row_no = 0;
    while (std::getline(in, line)) {
        ++row_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::string cell;
        std::stringstream ss(line);
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (cells.size() != 6)
            throw ConfigError(path + ": row " + std::to_string(row_no) +
                              ": expected 6 fields, got " + std::to_string(cells.size()));
        const std::string where = path + ": row " + std::to_string(row_no);
        if (cells[0] != std::to_string(history.size() + 1))
            throw ConfigError(where + ": epochs must count from 1 without gaps, got '" +
                              cells[0] + "'");
        EpochStats e;
        e.loss_d = parse_double(cells[1], where);
        e.loss_g_fool = parse_double(cells[2], where);
        e.loss_fm = parse_double(cells[3], where);
        e.mean_d_real = parse_double(cells[4], where);
        e.mean_d_fake = parse_double(cells[5], where);
        history.push_back(e);
    }
    return history;
}

// ----------------------------------------------------------------------------
// Attack scenarios.

void AttackScenario::validate() const {
    MeasurementModel model(h, noise_std);  // checks shape, rank, sigma
    if (kind == AttackKind::Stealthy) {
        require_dims(c.size(), model.n(), "stealthy c length");
        require_finite(c, "stealthy c");
    } else if (!(norm > 0.0)) {
        throw ConfigError("naive attack norm must be > 0, got " + std::to_string(norm));
    }
}

void save_attack_scenario(const AttackScenario& scenario, const std::string& path) {
    scenario.validate();
    json j = stamped("attack_scenario");
    j["h"] = matrix_to_json(scenario.h);
    j["noise_std"] = scenario.noise_std;
    j["attack"] = to_string(scenario.kind);
    if (scenario.kind == AttackKind::Stealthy)
        j["c"] = vector_to_json(scenario.c);
    else
        j["norm"] = scenario.norm;
    j["seed"] = scenario.seed;
    write_json_file(j, path);
}

AttackScenario load_attack_scenario(const std::string& path) {
    json j = read_json_file(path, "attack_scenario");
    return with_context(path, [&] {
        AttackScenario s;
        s.h = matrix_from_json(j.at("h"), path + ": h");
        s.noise_std = j.at("noise_std").get<double>();
        s.kind = attack_kind_from_string(j.at("attack").get<std::string>());
        if (s.kind == AttackKind::Stealthy)
            s.c = vector_from_json(j.at("c"), path + ": c");
        else
            s.norm = j.at("norm").get<double>();
        s.seed = j.at("seed").get<std::uint64_t>();
        s.validate();
        return s;
    });
}

// ----------------------------------------------------------------------------
// Stage-2 model directory.

void save_stage_two(const StageTwoModels& models, const KnnReference& knn_ref,
                    const std::string& dir) {
    if (!models.dt) throw ConfigError("stage-2 models lack a decision tree");
    models.knn.validate();
    models.svm.validate();
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw ConfigError("cannot create model directory: " + dir);

    KnnModel rebuilt = knn_from_reference(knn_ref, dir, models.knn.k);
    if (rebuilt.samples.rows() != models.knn.samples.rows() ||
        !(rebuilt.samples.array() == models.knn.samples.array()).all() ||
        rebuilt.labels != models.knn.labels)
        throw ConfigError("knn reference does not reproduce the trained model: " +
                          knn_ref.dataset_path);

    json knn = stamped("knn");
    knn["k"] = static_cast<long long>(models.knn.k);
    knn["dataset"] = knn_ref.dataset_path;
    knn["rows"] = index_list_to_json(knn_ref.rows);
    knn["normalization"] = normalization_to_json(knn_ref.normalization);
    write_json_file(knn, model_file(dir, "knn.json"));

    json dt = stamped("dt");
    dt["tree"] = dt_node_to_json(*models.dt);
    write_json_file(dt, model_file(dir, "dt.json"));

    json svm = stamped("svm");
    svm["weights"] = matrix_to_json(models.svm.weights);
    svm["bias"] = vector_to_json(models.svm.bias);
    svm["config"] = svm_config_to_json(models.svm.config);
    write_json_file(svm, model_file(dir, "svm.json"));

    json ann = stamped("ann");
    ann["net"] = mlp_to_json(models.ann.net);
    ann["config"] = ann_config_to_json(models.ann.config);
    write_json_file(ann, model_file(dir, "ann.json"));
}

StageTwoModels load_stage_two(const std::string& dir) {
    StageTwoModels models;

    json knn = read_model_file(dir, "knn.json", "knn");
    with_context(model_file(dir, "knn.json"), [&] {
        KnnReference ref;
        ref.dataset_path = knn.at("dataset").get<std::string>();
        ref.rows = index_list_from_json<Index>(knn.at("rows"), "knn rows");
        ref.normalization = normalization_from_json(knn.at("normalization"));
        models.knn = knn_from_reference(ref, dir, knn.at("k").get<Index>());
        return 0;
    });

    json dt = read_model_file(dir, "dt.json", "dt");
    models.dt = with_context(model_file(dir, "dt.json"), [&] {
        return dt_node_from_json(dt.at("tree"), model_file(dir, "dt.json"));
    });

    json svm = read_model_file(dir, "svm.json", "svm");
    with_context(model_file(dir, "svm.json"), [&] {
        models.svm.weights = matrix_from_json(svm.at("weights"), "svm weights");
        models.svm.bias = vector_from_json(svm.at("bias"), "svm bias");
        models.svm.config = svm_config_from_json(svm.at("config"));
        models.svm.validate();
        return 0;
    });

    json ann = read_model_file(dir, "ann.json", "ann");
    with_context(model_file(dir, "ann.json"), [&] {
        models.ann.net = mlp_from_json(ann.at("net"), model_file(dir, "ann.json"));
        models.ann.config = ann_config_from_json(ann.at("config"));
        return 0;
    });

    return models;
}

// ----------------------------------------------------------------------------
// Evaluation reports.

void save_evaluation_report(const EvaluationReport& report, const std::string& path) {
    report.validate();
    json j = stamped("evaluation_report");
    j["accuracy"] = report.accuracy;
    j["precision"] = report.precision;
    j["recall"] = report.recall;
    j["f1"] = report.f1;
    j["auc"] = report.auc;
    j["fault_scores"] = score_stats_to_json(report.fault_scores);
    j["fdi_scores"] = score_stats_to_json(report.fdi_scores);
    j["kl"] = report.kl;
    j["seed"] = report.seed;
    j["config_hash"] = report.config_hash;
    write_json_file(j, path);
}

EvaluationReport load_evaluation_report(const std::string& path) {
    json j = read_json_file(path, "evaluation_report");
    return with_context(path, [&] {
        EvaluationReport r;
        r.accuracy = j.at("accuracy").get<double>();
        r.precision = j.at("precision").get<double>();
        r.recall = j.at("recall").get<double>();
        r.f1 = j.at("f1").get<double>();
        r.auc = j.at("auc").get<double>();
        r.fault_scores = score_stats_from_json(j.at("fault_scores"));
        r.fdi_scores = score_stats_from_json(j.at("fdi_scores"));
        r.kl = j.at("kl").get<double>();
        r.seed = j.at("seed").get<std::uint64_t>();
        r.config_hash = j.at("config_hash").get<std::string>();
        r.validate();
        return r;
    });
}

}  // namespace f2gan
