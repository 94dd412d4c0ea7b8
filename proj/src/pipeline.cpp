#include "f2gan/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "f2gan/diag.hpp"
#include "f2gan/model_io.hpp"
#include "f2gan/rng.hpp"
#include "io_util.hpp"

namespace f2gan {

namespace fs = std::filesystem;
using namespace jsonio;

namespace {

class StageTimer {
  public:
    StageTimer() : start_(std::chrono::steady_clock::now()) {}
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

  private:
    std::chrono::steady_clock::time_point start_;
};

std::string art(const ExperimentConfig& config, const char* name) {
    return (fs::path(config.out_dir) / name).string();
}

void ensure_out_dir(const ExperimentConfig& config) {
    std::error_code ec;
    fs::create_directories(config.out_dir, ec);
    if (ec)
        throw ConfigError("cannot create output directory: " + config.out_dir + " (" +
                          ec.message() + ")");
}

const char* variant_slug(GanVariantKind kind) {
    return kind == GanVariantKind::Conventional ? "cgan" : "f2gan";
}

const char* to_string(LatentPrior prior) {
    return prior == LatentPrior::Gaussian ? "gaussian" : "uniform";
}

LatentPrior latent_prior_from_string(const std::string& s) {
    if (s == "gaussian") return LatentPrior::Gaussian;
    if (s == "uniform") return LatentPrior::Uniform;
    throw ConfigError("unknown latent prior: " + s);
}

std::string fnv1a64_hex(const std::string& bytes) {
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

template <class T>
T field_or(const json& j, const char* key, T fallback) {
    return j.contains(key) ? j.at(key).get<T>() : fallback;
}

// ----------------------------------------------------------------------------
// Experiment-config JSON. Sub-objects read partially (absent keys keep their
// defaults) but reject unknown keys, so typos cannot silently fall back.

json dataset_to_json(const SyntheticConfig& c) {
    json j;
    j["total"] = static_cast<long long>(c.total);
    j["jitter"] = c.jitter;
    j["load_min"] = c.load_min;
    j["load_max"] = c.load_max;
    j["islanded_prob"] = c.islanded_prob;
    return j;
}

SyntheticConfig dataset_from_json(const json& j) {
    check_keys(j, {"total", "jitter", "load_min", "load_max", "islanded_prob"}, "dataset");
    SyntheticConfig c;
    c.total = field_or<Index>(j, "total", c.total);
    c.jitter = field_or(j, "jitter", c.jitter);
    c.load_min = field_or(j, "load_min", c.load_min);
    c.load_max = field_or(j, "load_max", c.load_max);
    c.islanded_prob = field_or(j, "islanded_prob", c.islanded_prob);
    return c;
}

json train_to_json(const TrainConfig& c) {
    json j;
    j["epochs"] = c.epochs;
    j["batch_size"] = static_cast<long long>(c.batch_size);
    j["prior"] = to_string(c.prior);
    json opt;
    opt["learning_rate"] = c.optimizer.lr;
    opt["beta1"] = c.optimizer.beta1;
    opt["beta2"] = c.optimizer.beta2;
    opt["epsilon"] = c.optimizer.epsilon;
    j["optimizer"] = std::move(opt);
    return j;
}

TrainConfig train_from_json(const json& j) {
    check_keys(j, {"epochs", "batch_size", "prior", "optimizer"}, "train");
    TrainConfig c;
    c.epochs = field_or(j, "epochs", c.epochs);
    c.batch_size = field_or<Index>(j, "batch_size", c.batch_size);
    if (j.contains("prior")) c.prior = latent_prior_from_string(j.at("prior").get<std::string>());
    if (j.contains("optimizer")) {
        const json& opt = j.at("optimizer");
        check_keys(opt, {"learning_rate", "beta1", "beta2", "epsilon"}, "train.optimizer");
        c.optimizer.lr = field_or(opt, "learning_rate", c.optimizer.lr);
        c.optimizer.beta1 = field_or(opt, "beta1", c.optimizer.beta1);
        c.optimizer.beta2 = field_or(opt, "beta2", c.optimizer.beta2);
        c.optimizer.epsilon = field_or(opt, "epsilon", c.optimizer.epsilon);
    }
    return c;
}

json fdi_to_json(const FdiSpec& c) {
    json j;
    j["intensity"] = c.intensity;
    j["count"] = static_cast<long long>(c.count);
    j["min_slots"] = static_cast<long long>(c.min_slots);
    j["max_slots"] = static_cast<long long>(c.max_slots);
    return j;
}

FdiSpec fdi_from_json(const json& j) {
    check_keys(j, {"intensity", "count", "min_slots", "max_slots"}, "fdi");
    FdiSpec c;
    c.intensity = field_or(j, "intensity", c.intensity);
    c.count = field_or<Index>(j, "count", c.count);
    c.min_slots = field_or<Index>(j, "min_slots", c.min_slots);
    c.max_slots = field_or<Index>(j, "max_slots", c.max_slots);
    return c;
}

json stage_two_to_json(const StageTwoConfig& c) {
    json j;
    j["knn_k"] = static_cast<long long>(c.knn_k);
    json dt;
    dt["max_depth"] = static_cast<long long>(c.dt.max_depth);
    dt["min_leaf"] = static_cast<long long>(c.dt.min_leaf);
    j["dt"] = std::move(dt);
    j["svm"] = svm_config_to_json(c.svm);
    j["ann"] = ann_config_to_json(c.ann);
    return j;
}

StageTwoConfig stage_two_from_json(const json& j) {
    check_keys(j, {"knn_k", "dt", "svm", "ann"}, "stage_two");
    StageTwoConfig c;
    c.knn_k = field_or<Index>(j, "knn_k", c.knn_k);
    if (j.contains("dt")) {
        const json& dt = j.at("dt");
        check_keys(dt, {"max_depth", "min_leaf"}, "stage_two.dt");
        c.dt.max_depth = field_or<Index>(dt, "max_depth", c.dt.max_depth);
        c.dt.min_leaf = field_or<Index>(dt, "min_leaf", c.dt.min_leaf);
    }
    if (j.contains("svm")) {
        const json& svm = j.at("svm");
        check_keys(svm, {"regularization", "epochs", "learning_rate", "seed"}, "stage_two.svm");
        c.svm.regularization = field_or(svm, "regularization", c.svm.regularization);
        c.svm.epochs = field_or<Index>(svm, "epochs", c.svm.epochs);
        c.svm.learning_rate = field_or(svm, "learning_rate", c.svm.learning_rate);
        c.svm.seed = field_or(svm, "seed", c.svm.seed);
    }
    if (j.contains("ann")) {
        const json& ann = j.at("ann");
        check_keys(ann, {"hidden", "epochs", "batch_size", "learning_rate", "seed"},
                   "stage_two.ann");
        if (ann.contains("hidden"))
            c.ann.hidden = index_list_from_json<Index>(ann.at("hidden"), "stage_two.ann.hidden");
        c.ann.epochs = field_or<Index>(ann, "epochs", c.ann.epochs);
        c.ann.batch_size = field_or<Index>(ann, "batch_size", c.ann.batch_size);
        c.ann.learning_rate = field_or(ann, "learning_rate", c.ann.learning_rate);
        c.ann.seed = field_or(ann, "seed", c.ann.seed);
    }
    return c;
}

json config_to_json(const ExperimentConfig& config, bool with_out_dir) {
    json j = stamped("experiment_config");
    j["seed"] = config.seed;
    if (with_out_dir) j["out_dir"] = config.out_dir;
    j["split_ratio"] = config.split_ratio;
    j["lambda"] = config.lambda;
    j["threshold"] = config.threshold;
    j["dataset"] = dataset_to_json(config.dataset);
    j["train"] = train_to_json(config.train);
    j["fdi"] = fdi_to_json(config.fdi);
    j["stage_two"] = stage_two_to_json(config.stage_two);
    j["cgan"] = architecture_to_json(config.cgan);
    j["f2gan"] = architecture_to_json(config.f2gan);
    return j;
}

// ----------------------------------------------------------------------------
// Manifest plumbing.

constexpr const char* kStageOrder[] = {"gen_data",      "train_cgan", "train_f2gan",
                                       "detect_cgan",   "detect_f2gan", "classify",
                                       "evaluate"};

std::size_t stage_rank(const std::string& stage) {
    for (std::size_t i = 0; i < std::size(kStageOrder); ++i)
        if (stage == kStageOrder[i]) return i;
    return std::size(kStageOrder);
}

/// Snapshots the config and merges one stage record into manifest.json.
/// A manifest written under a different config hash or seed is discarded:
/// its stage list describes artifacts this run will not reproduce.
void record_stage(const ExperimentConfig& config, StageRecord record) {
    save_experiment_config(config, art(config, "config.json"));
    const std::string path = art(config, "manifest.json");
    const std::string hash = config_hash(config);

    RunManifest manifest;
    if (fs::exists(path)) {
        RunManifest previous = load_manifest(path);
        if (previous.config_hash == hash && previous.seed == config.seed)
            manifest = std::move(previous);
        else
            diag(1, "manifest: config or seed changed, starting a fresh stage list");
    }
    manifest.config_hash = hash;
    manifest.seed = config.seed;
    manifest.version = kPipelineVersion;
    manifest.config_file = "config.json";

    std::erase_if(manifest.stages,
                  [&](const StageRecord& s) { return s.stage == record.stage; });
    manifest.stages.push_back(std::move(record));
    std::stable_sort(manifest.stages.begin(), manifest.stages.end(),
                     [](const StageRecord& a, const StageRecord& b) {
                         return stage_rank(a.stage) < stage_rank(b.stage);
                     });
    save_manifest(manifest, path);
}

// ----------------------------------------------------------------------------
// Stage input loading with actionable errors.

LabeledDataset load_split(const ExperimentConfig& config, const char* name, const char* hint) {
    std::string path = art(config, name);
    if (!fs::exists(path))
        throw ConfigError("missing dataset file: " + path + " (" + hint + ")");
    return load_csv(path);
}

GanBundle load_bundle(const ExperimentConfig& config, GanVariantKind variant) {
    std::string path =
        art(config, variant == GanVariantKind::Conventional ? "model_cgan.json"
                                                            : "model_f2gan.json");
    if (!fs::exists(path))
        throw ConfigError("missing model file: " + path + " (run train first)");
    return load_gan_bundle(path);
}

/// The strict >=3-of-4 majority rule `classify_fault` applies, reproduced for
/// integrity checks when prediction rows come back from disk.
std::pair<bool, FaultClass> majority_vote(const ClassificationReport& r) {
    const FaultClass votes[4] = {r.knn, r.dt, r.svm, r.ann};
    for (FaultClass candidate : votes) {
        int count = 0;
        for (FaultClass v : votes)
            if (v == candidate) ++count;
        if (count >= 3) return {true, candidate};
    }
    return {false, FaultClass::S1};
}

}  // namespace

// ----------------------------------------------------------------------------
// Profiles.

Profile profile_from_string(const std::string& name) {
    if (name == "paper") return Profile::Paper;
    if (name == "desk") return Profile::Desk;
    throw ConfigError("unknown profile: " + name + " (expected 'paper' or 'desk')");
}

const char* to_string(Profile profile) {
    return profile == Profile::Paper ? "paper" : "desk";
}

void apply_profile(ExperimentConfig& config, Profile profile) {
    config.train.epochs = profile == Profile::Paper ? 5000 : 500;
    config.train.batch_size = 64;
}

// ----------------------------------------------------------------------------
// ExperimentConfig.

void ExperimentConfig::validate() const {
    dataset.validate();
    if (!(split_ratio > 0.0 && split_ratio < 1.0))
        throw ConfigError("split_ratio must lie in (0, 1), got " + std::to_string(split_ratio));
    cgan.validate();
    f2gan.validate();
    if (cgan.input_dim != kFeatureCount)
        throw ConfigError("cgan.input_dim must equal " + std::to_string(kFeatureCount) +
                          ", got " + std::to_string(cgan.input_dim));
    if (f2gan.input_dim != kFeatureCount)
        throw ConfigError("f2gan.input_dim must equal " + std::to_string(kFeatureCount) +
                          ", got " + std::to_string(f2gan.input_dim));
    if (lambda < 0.0) throw ConfigError("lambda must be >= 0, got " + std::to_string(lambda));
    train.validate();
    fdi.validate();
    if (!(threshold >= 0.0 && threshold <= 1.0))
        throw ConfigError("threshold must lie in [0, 1], got " + std::to_string(threshold));
    stage_two.validate();
    if (out_dir.empty()) throw ConfigError("out_dir must not be empty");
}

std::string config_hash(const ExperimentConfig& config) {
    return fnv1a64_hex(config_to_json(config, /*with_out_dir=*/false).dump(2));
}

void save_experiment_config(const ExperimentConfig& config, const std::string& path) {
    config.validate();
    write_json_file(config_to_json(config, /*with_out_dir=*/true), path);
}

ExperimentConfig load_experiment_config(const std::string& path) {
    json j = read_json_file(path, "experiment_config");
    return with_context(path, [&] {
        check_keys(j,
                   {"format_version", "kind", "seed", "out_dir", "split_ratio", "lambda",
                    "threshold", "dataset", "train", "fdi", "stage_two", "cgan", "f2gan"},
                   "experiment config");
        ExperimentConfig c;
        c.seed = field_or(j, "seed", c.seed);
        c.out_dir = field_or(j, "out_dir", c.out_dir);
        c.split_ratio = field_or(j, "split_ratio", c.split_ratio);
        c.lambda = field_or(j, "lambda", c.lambda);
        c.threshold = field_or(j, "threshold", c.threshold);
        if (j.contains("dataset")) c.dataset = dataset_from_json(j.at("dataset"));
        if (j.contains("train")) c.train = train_from_json(j.at("train"));
        if (j.contains("fdi")) c.fdi = fdi_from_json(j.at("fdi"));
        if (j.contains("stage_two")) c.stage_two = stage_two_from_json(j.at("stage_two"));
        if (j.contains("cgan")) c.cgan = architecture_from_json(j.at("cgan"));
        if (j.contains("f2gan")) c.f2gan = architecture_from_json(j.at("f2gan"));
        c.validate();
        return c;
    });
}

// ----------------------------------------------------------------------------
// Manifest.

void save_manifest(const RunManifest& manifest, const std::string& path) {
    json j = stamped("run_manifest");
    j["config_hash"] = manifest.config_hash;
    j["seed"] = manifest.seed;
    j["version"] = manifest.version;
    j["config_file"] = manifest.config_file;
    json stages = json::array();
    for (const StageRecord& s : manifest.stages) {
        json js;
        js["stage"] = s.stage;
        json files = json::array();
        for (const std::string& a : s.artifacts) files.push_back(a);
        js["artifacts"] = std::move(files);
        js["seconds"] = s.seconds;
        stages.push_back(std::move(js));
    }
    j["stages"] = std::move(stages);
    write_json_file(j, path);
}

RunManifest load_manifest(const std::string& path) {
    json j = read_json_file(path, "run_manifest");
    return with_context(path, [&] {
        RunManifest m;
        m.config_hash = j.at("config_hash").get<std::string>();
        m.seed = j.at("seed").get<std::uint64_t>();
        m.version = j.at("version").get<std::string>();
        m.config_file = j.at("config_file").get<std::string>();
        for (const json& js : j.at("stages")) {
            StageRecord s;
            s.stage = js.at("stage").get<std::string>();
            for (const json& a : js.at("artifacts")) s.artifacts.push_back(a.get<std::string>());
            s.seconds = js.at("seconds").get<double>();
            m.stages.push_back(std::move(s));
        }
        return m;
    });
}

// ----------------------------------------------------------------------------
// Detection rows CSV.

void save_detection_rows(const std::vector<DetectionRow>& rows, const std::string& path) {
    const bool with_truth =
        std::all_of(rows.begin(), rows.end(), [](const DetectionRow& r) { return r.has_truth; });
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot open for writing: " + path);
    out << (with_truth ? "sample,score,verdict,truth\n" : "sample,score,verdict\n");
    for (const DetectionRow& r : rows) {
        out << r.sample << ',' << format_value(r.score) << ',' << to_string(r.verdict);
        if (with_truth) out << ',' << to_string(r.truth);
        out << '\n';
    }
    if (!out) throw ConfigError("write failed: " + path);
}

std::vector<DetectionRow> load_detection_rows(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open: " + path);
    std::string line;
    if (!std::getline(in, line)) throw ConfigError(path + ": empty file, header required");
    if (!line.empty() && line.back() == '\r') line.pop_back();

    bool with_truth = false;
    if (line == "sample,score,verdict,truth")
        with_truth = true;
    else if (line != "sample,score,verdict")
        throw ConfigError(path + ": unexpected detection header '" + line + "'");

    std::vector<DetectionRow> rows;
    long row_no = 0;
    while (std::getline(in, line)) {
        ++row_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::string cell;
        std::stringstream ss(line);
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        const std::size_t want = with_truth ? 4 : 3;
        const std::string where = path + ": row " + std::to_string(row_no);
        if (cells.size() != want)
            throw ConfigError(where + ": expected " + std::to_string(want) + " fields, got " +
                              std::to_string(cells.size()));
        if (cells[0] != std::to_string(rows.size()))
            throw ConfigError(where + ": samples must count from 0 without gaps, got '" +
                              cells[0] + "'");
        DetectionRow r;
        r.sample = static_cast<Index>(rows.size());
        r.score = parse_double(cells[1], where);
        if (!(r.score >= 0.0 && r.score <= 1.0))
            throw ConfigError(where + ": score must lie in [0, 1], got " + cells[1]);
        r.verdict = with_context(where, [&] { return verdict_from_string(cells[2]); });
        if (with_truth) {
            r.has_truth = true;
            r.truth = with_context(where, [&] { return verdict_from_string(cells[3]); });
        }
        rows.push_back(r);
    }
    return rows;
}

// ----------------------------------------------------------------------------
// Prediction rows CSV.

void save_prediction_rows(const std::vector<PredictionRow>& rows, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot open for writing: " + path);
    out << "sample,truth,knn,dt,svm,ann,consensus\n";
    for (const PredictionRow& r : rows) {
        const ClassificationReport& p = r.prediction;
        out << r.sample << ',' << r.truth << ',' << to_string(p.knn) << ',' << to_string(p.dt)
            << ',' << to_string(p.svm) << ',' << to_string(p.ann) << ','
            << consensus_label(p) << '\n';
    }
    if (!out) throw ConfigError("write failed: " + path);
}

std::vector<PredictionRow> load_prediction_rows(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open: " + path);
    std::string line;
    if (!std::getline(in, line)) throw ConfigError(path + ": empty file, header required");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "sample,truth,knn,dt,svm,ann,consensus")
        throw ConfigError(path + ": unexpected prediction header '" + line + "'");

    std::vector<PredictionRow> rows;
    long row_no = 0;
    long last_sample = -1;
    while (std::getline(in, line)) {
        ++row_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::string cell;
        std::stringstream ss(line);
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        const std::string where = path + ": row " + std::to_string(row_no);
        if (cells.size() != 7)
            throw ConfigError(where + ": expected 7 fields, got " +
                              std::to_string(cells.size()));

        PredictionRow r;
        try {
            r.sample = static_cast<Index>(std::stol(cells[0]));
        } catch (const std::exception&) {
            throw ConfigError(where + ": bad sample id '" + cells[0] + "'");
        }
        if (r.sample <= last_sample)
            throw ConfigError(where + ": sample ids must increase strictly, got " + cells[0]);
        last_sample = r.sample;

        r.truth = cells[1];
        if (r.truth != "FDI")
            with_context(where + ", column truth", [&] { return fault_class_from_string(r.truth); });
        ClassificationReport& p = r.prediction;
        p.knn = with_context(where, [&] { return fault_class_from_string(cells[2]); });
        p.dt = with_context(where, [&] { return fault_class_from_string(cells[3]); });
        p.svm = with_context(where, [&] { return fault_class_from_string(cells[4]); });
        p.ann = with_context(where, [&] { return fault_class_from_string(cells[5]); });
        auto [decided, consensus] = majority_vote(p);
        p.decided = decided;
        p.consensus = consensus;
        const std::string expect = consensus_label(p);
        if (cells[6] != expect)
            throw ConfigError(where + ": consensus '" + cells[6] +
                              "' disagrees with the recorded votes (expected '" + expect + "')");
        rows.push_back(std::move(r));
    }
    return rows;
}

// ----------------------------------------------------------------------------
// Stages.

void cmd_gen_data(const ExperimentConfig& config) {
    config.validate();
    StageTimer timer;
    ensure_out_dir(config);
    RngStream root(config.seed);

    RngStream data_rng = root.substream("data");
    LabeledDataset dataset = generate_synthetic_dataset(config.dataset, data_rng);
    save_csv(dataset, art(config, "data.csv"));

    RngStream shuffle_rng = root.substream("shuffle");
    SplitResult split = stratified_split(dataset, config.split_ratio, shuffle_rng);
    save_csv(split.train, art(config, "train.csv"));
    save_csv(split.test, art(config, "test.csv"));

    RngStream attack_rng = root.substream("attack");
    FeatureStats stats = compute_feature_stats(split.train.samples);
    Matrix fdi = synthesize_fdi_features(stats, config.fdi, attack_rng);
    save_fdi_csv(fdi, art(config, "fdi.csv"));

    // A concrete stealthy attack in the state-estimation world, verified
    // unobservable before anything is written: the grounding for why the
    // feature-space anomalies above evade residual tests.
    MeasurementModel model = random_measurement_model(12, 4, 0.05, attack_rng);
    Vector c(model.n());
    for (Index i = 0; i < c.size(); ++i) c[i] = attack_rng.normal();
    AttackVector attack = craft_stealthy_attack(model, c);
    Vector x(model.n());
    for (Index i = 0; i < x.size(); ++i) x[i] = attack_rng.normal();
    Vector z = measure(model, x, attack_rng);
    UnobservabilityReport unobs = verify_unobservability(model, z, attack);
    diag(1, "gen_data: stealthy attack residual delta " + std::to_string(unobs.delta));
    AttackScenario scenario;
    scenario.h = model.H;
    scenario.noise_std = model.noise_std;
    scenario.kind = AttackKind::Stealthy;
    scenario.c = c;
    scenario.seed = config.seed;
    save_attack_scenario(scenario, art(config, "attack_scenario.json"));

    DetectionTestSet detection = build_detection_test_set(split.test, fdi, shuffle_rng);
    save_detection_csv(detection, art(config, "detection.csv"));

    record_stage(config, {"gen_data",
                          {"data.csv", "train.csv", "test.csv", "fdi.csv",
                           "attack_scenario.json", "detection.csv"},
                          timer.seconds()});
}

void cmd_train(const ExperimentConfig& config, GanVariantKind variant) {
    config.validate();
    StageTimer timer;
    ensure_out_dir(config);
    LabeledDataset train = load_split(config, "train.csv", "run gen-data first");

    GanBundle bundle;
    bundle.normalization = fit_normalizer(train.samples);
    Matrix normalized = apply_normalizer(bundle.normalization, train.samples);

    const bool feedback = variant == GanVariantKind::FeatureFeedback;
    const GanArchitecture& arch = feedback ? config.f2gan : config.cgan;
    GanVariant gan_variant = feedback ? GanVariant::feature_feedback(config.lambda)
                                      : GanVariant::conventional();
    TrainConfig train_config = config.train;
    train_config.seed =
        RngStream(config.seed).substream(feedback ? "train/f2gan" : "train/cgan").seed();

    bundle.gan = train_gan(normalized, arch, gan_variant, train_config);
    bundle.seed = train_config.seed;

    const std::string slug = variant_slug(variant);
    const std::string model_name = "model_" + slug + ".json";
    const std::string history_name = "history_" + slug + ".csv";
    save_gan_bundle(bundle, art(config, model_name.c_str()));
    save_history_csv(bundle.gan.history, art(config, history_name.c_str()));

    record_stage(config, {"train_" + slug, {model_name, history_name}, timer.seconds()});
}

void cmd_detect(const ExperimentConfig& config, GanVariantKind variant) {
    config.validate();
    StageTimer timer;
    ensure_out_dir(config);
    GanBundle bundle = load_bundle(config, variant);

    const std::string detection_path = art(config, "detection.csv");
    if (!fs::exists(detection_path))
        throw ConfigError("missing dataset file: " + detection_path + " (run gen-data first)");
    DetectionTestSet detection = load_detection_csv(detection_path);

    Matrix normalized = apply_normalizer(bundle.normalization, detection.samples);
    std::vector<DetectionRow> rows;
    rows.reserve(static_cast<std::size_t>(detection.size()));
    for (Index i = 0; i < detection.size(); ++i) {
        DetectionOutcome outcome =
            detect(bundle.gan, normalized.row(i).transpose(), config.threshold);
        DetectionRow r;
        r.sample = i;
        r.score = outcome.score;
        r.verdict = outcome.verdict;
        r.has_truth = true;
        r.truth = detection.truth[static_cast<std::size_t>(i)];
        rows.push_back(r);
    }

    const std::string slug = variant_slug(variant);
    const std::string name = "detect_" + slug + ".csv";
    save_detection_rows(rows, art(config, name.c_str()));
    record_stage(config, {"detect_" + slug, {name}, timer.seconds()});
}

void cmd_classify(const ExperimentConfig& config, const std::string& models_dir) {
    config.validate();
    StageTimer timer;
    ensure_out_dir(config);

    const std::string detect_path = art(config, "detect_f2gan.csv");
    if (!fs::exists(detect_path))
        throw ConfigError("missing detection results: " + detect_path + " (run detect first)");
    std::vector<DetectionRow> verdicts = load_detection_rows(detect_path);

    const std::string detection_path = art(config, "detection.csv");
    if (!fs::exists(detection_path))
        throw ConfigError("missing dataset file: " + detection_path + " (run gen-data first)");
    DetectionTestSet detection = load_detection_csv(detection_path);
    if (static_cast<Index>(verdicts.size()) != detection.size())
        throw ConfigError(detect_path + ": " + std::to_string(verdicts.size()) +
                          " rows but the detection set has " + std::to_string(detection.size()));

    LabeledDataset train = load_split(config, "train.csv", "run gen-data first");
    NormalizationParams normalization = fit_normalizer(train.samples);

    std::vector<std::string> artifacts;
    StageTwoModels models;
    if (models_dir.empty()) {
        LabeledDataset normalized_train{apply_normalizer(normalization, train.samples),
                                        train.labels, train.provenance};
        models = train_stage_two(normalized_train, config.stage_two);
        KnnReference reference;
        reference.dataset_path = "../train.csv";
        reference.rows.resize(static_cast<std::size_t>(train.size()));
        for (Index i = 0; i < train.size(); ++i)
            reference.rows[static_cast<std::size_t>(i)] = i;
        reference.normalization = normalization;
        save_stage_two(models, reference, art(config, "stage2"));
        artifacts = {"stage2/knn.json", "stage2/dt.json", "stage2/svm.json", "stage2/ann.json"};
    } else {
        models = load_stage_two(models_dir);
    }

    Matrix normalized = apply_normalizer(normalization, detection.samples);
    std::vector<PredictionRow> predictions;
    for (const DetectionRow& v : verdicts) {
        if (v.verdict != Verdict::InternalFault) continue;
        PredictionRow r;
        r.sample = v.sample;
        r.truth = detection.labels[static_cast<std::size_t>(v.sample)];
        r.prediction = classify_fault(models, normalized.row(v.sample).transpose());
        predictions.push_back(std::move(r));
    }
    if (predictions.empty())
        diag(0, "classify: every verdict is Anomaly, nothing to classify");

    save_prediction_rows(predictions, art(config, "predictions.csv"));
    artifacts.push_back("predictions.csv");
    record_stage(config, {"classify", std::move(artifacts), timer.seconds()});
}

void cmd_evaluate(const ExperimentConfig& config) {
    config.validate();
    StageTimer timer;
    ensure_out_dir(config);
    const std::string hash = config_hash(config);

    EvaluationReport reports[2];
    RocCurve curves[2];
    const GanVariantKind variants[2] = {GanVariantKind::Conventional,
                                        GanVariantKind::FeatureFeedback};
    for (int i = 0; i < 2; ++i) {
        const std::string slug = variant_slug(variants[i]);
        const std::string path = art(config, ("detect_" + slug + ".csv").c_str());
        if (!fs::exists(path))
            throw ConfigError("missing detection results: " + path + " (run detect first)");
        std::vector<DetectionRow> rows = load_detection_rows(path);
        if (rows.empty()) throw ConfigError(path + ": no detection rows to evaluate");
        std::vector<double> scores;
        std::vector<Verdict> truths;
        for (const DetectionRow& r : rows) {
            if (!r.has_truth)
                throw ConfigError(path + ": no truth column; evaluation refused");
            scores.push_back(r.score);
            truths.push_back(r.truth);
        }
        reports[i] = evaluate_detection(scores, truths, config.threshold, config.seed, hash);
        curves[i] = roc_auc(scores, truths);
        save_evaluation_report(reports[i], art(config, ("evaluation_" + slug + ".json").c_str()));
        save_roc_csv(curves[i], art(config, ("roc_" + slug + ".csv").c_str()));
    }
    save_roc_svg({{"CGAN", curves[0]}, {"F2GAN", curves[1]}}, art(config, "roc.svg"));

    {
        std::ofstream out(art(config, "score_summary.csv"));
        if (!out) throw ConfigError("cannot open for writing: score_summary.csv");
        out << "variant,group,mean,stddev,count\n";
        for (int i = 0; i < 2; ++i)
            for (const ScoreDistributionStats* s : {&reports[i].fault_scores,
                                                    &reports[i].fdi_scores})
                out << variant_slug(variants[i]) << ',' << s->group << ','
                    << format_value(s->mean) << ',' << format_value(s->stddev) << ','
                    << s->count << '\n';
        if (!out) throw ConfigError("write failed: score_summary.csv");
    }

    const std::string predictions_path = art(config, "predictions.csv");
    if (!fs::exists(predictions_path))
        throw ConfigError("missing predictions: " + predictions_path + " (run classify first)");
    std::vector<PredictionRow> predictions = load_prediction_rows(predictions_path);

    std::vector<FaultClass> truths;
    std::vector<FaultClass> by_model[4];
    for (const PredictionRow& r : predictions) {
        if (r.truth == "FDI") continue;  // attack rows that slipped past Stage 1
        truths.push_back(fault_class_from_string(r.truth));
        by_model[0].push_back(r.prediction.knn);
        by_model[1].push_back(r.prediction.dt);
        by_model[2].push_back(r.prediction.svm);
        by_model[3].push_back(r.prediction.ann);
    }
    std::vector<StageTwoEvaluation> stage_two;
    if (truths.empty()) {
        diag(0, "evaluate: no fault-truth predictions, skipping the Stage-2 table");
    } else {
        const char* names[4] = {"KNN", "Decision Tree", "SVM", "ANN"};
        for (int m = 0; m < 4; ++m) {
            Prf1 scores = prf1(confusion(truths, by_model[m]), Averaging::Macro);
            stage_two.push_back(
                {names[m], scores.accuracy, scores.precision, scores.recall, scores.f1});
        }
    }

    std::ostringstream report;
    report << "# Two-stage diagnosis report\n\n";
    report << "- seed: " << config.seed << "\n";
    report << "- config hash: " << hash << "\n";
    report << "- detection threshold: " << format_value(config.threshold) << "\n";
    report << "- detection samples: "
           << (reports[0].fault_scores.count + reports[0].fdi_scores.count) << "\n\n";
    report << "## Stage 1: anomaly detection (CGAN vs F2GAN)\n\n";
    report << render_detection_markdown(reports[0], reports[1]) << "\n";
    report << "## Stage 2: switch-fault classification\n\n";
    if (stage_two.empty())
        report << "No fault-verdict samples reached Stage 2.\n";
    else
        report << render_stage_two_markdown(stage_two);
    const std::string report_path = art(config, "report.md");
    std::ofstream out(report_path);
    if (!out) throw ConfigError("cannot open for writing: " + report_path);
    out << report.str();
    if (!out) throw ConfigError("write failed: " + report_path);

    record_stage(config, {"evaluate",
                          {"evaluation_cgan.json", "evaluation_f2gan.json", "roc_cgan.csv",
                           "roc_f2gan.csv", "roc.svg", "score_summary.csv", "report.md"},
                          timer.seconds()});
}

void cmd_repro(const ExperimentConfig& config) {
    cmd_gen_data(config);
    cmd_train(config, GanVariantKind::Conventional);
    cmd_train(config, GanVariantKind::FeatureFeedback);
    cmd_detect(config, GanVariantKind::Conventional);
    cmd_detect(config, GanVariantKind::FeatureFeedback);
    cmd_classify(config);
    cmd_evaluate(config);
}

}  // namespace f2gan
