#include "f2gan/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include "f2gan/diag.hpp"

namespace f2gan {

const std::array<const char*, kFeatureCount> kFeatureNames = {
    "v_rms_a", "v_rms_b", "v_rms_c", "i_rms_a",      "i_rms_b",     "i_rms_c",
    "frequency", "v_thd", "i_thd",   "v_dc_offset",  "i_dc_offset", "v_unbalance",
    "i_unbalance", "p_active", "q_reactive", "mode_flag"};

const std::array<Index, 12> kInjectableSlots = {0, 1, 2, 3, 4, 5, 7, 8, 9, 10, 11, 12};

namespace {

const std::array<const char*, kClassCount> kClassNames = {
    "S1", "S2", "S3", "S4", "S5", "S6", "S1S4", "S2S5", "S3S6", "S1S2", "S3S4", "S5S6"};

// Switches faulted by each class. Switch k sits on leg (k-1) % 3; k <= 3 is
// an upper device, k >= 4 the lower device of the same leg.
const std::array<std::array<int, 2>, kClassCount> kFaultedSwitches = {{
    {1, 0}, {2, 0}, {3, 0}, {4, 0}, {5, 0}, {6, 0},
    {1, 4}, {2, 5}, {3, 6}, {1, 2}, {3, 4}, {5, 6},
}};

// Per-feature measurement noise stds at jitter = 1. The mode flag carries a
// small dither like every other telemetry channel: an exactly two-point
// feature would sit at the extremes of the normalized range, which a
// Tanh-output generator can approach but never reach, leaving the adversary
// an inexhaustible channel to separate on.
const std::array<double, kFeatureCount> kNoiseStd = {
    0.015, 0.015, 0.015,  // v_rms
    0.02,  0.02,  0.02,   // i_rms
    0.05,                 // frequency
    0.004, 0.008,         // thd
    0.006, 0.02,          // dc offsets
    0.004, 0.012,         // unbalance
    0.02,  0.015,         // p, q
    0.05,                 // mode_flag
};

void apply_switch_fault(Vector& s, int switch_id) {
    int leg = (switch_id - 1) % 3;
    bool upper = switch_id <= 3;
    s[0 + leg] *= 0.92;                  // leg voltage sag
    s[3 + leg] *= 0.65;                  // missing half-cycle depresses phase current
    s[7] += 0.08;                        // v_thd
    s[8] += 0.25;                        // i_thd
    s[9] += upper ? -0.03 : 0.03;        // v_dc_offset
    s[10] += upper ? -0.15 : 0.15;       // i_dc_offset skew from the lost half
    s[11] += 0.06;                       // v_unbalance
    s[12] += 0.20;                       // i_unbalance
    s[13] *= 0.88;                       // delivered active power drops
}

}  // namespace

const char* to_string(FaultClass c) { return kClassNames[static_cast<std::size_t>(c)]; }

FaultClass fault_class_from_string(const std::string& name) {
    for (int i = 0; i < kClassCount; ++i)
        if (name == kClassNames[static_cast<std::size_t>(i)]) return fault_class_from_index(i);
    throw ConfigError("unknown fault class: " + name);
}

FaultClass fault_class_from_index(int index) {
    if (index < 0 || index >= kClassCount)
        throw ConfigError("fault class index out of range: " + std::to_string(index));
    return static_cast<FaultClass>(index);
}

void LabeledDataset::validate() const {
    if (static_cast<Index>(labels.size()) != samples.rows())
        throw ShapeError("dataset has " + std::to_string(samples.rows()) + " rows but " +
                         std::to_string(labels.size()) + " labels");
    require_dims(samples.cols(), kFeatureCount, "dataset feature columns");
    require_finite(samples, "dataset samples");
}

void SyntheticConfig::validate() const {
    if (total < kClassCount)
        throw ConfigError("total must cover all " + std::to_string(kClassCount) +
                          " classes, got " + std::to_string(total));
    if (jitter < 0.0) throw ConfigError("jitter must be >= 0");
    if (load_min <= 0.0 || load_max < load_min)
        throw ConfigError("load range must satisfy 0 < load_min <= load_max");
    if (islanded_prob < 0.0 || islanded_prob > 1.0)
        throw ConfigError("islanded_prob must be in [0, 1]");

    // Signature collision guard: every class must have a distinct mean.
    for (int i = 0; i < kClassCount; ++i) {
        Vector a = class_signature(fault_class_from_index(i), 1.0, false);
        for (int j = i + 1; j < kClassCount; ++j) {
            Vector b = class_signature(fault_class_from_index(j), 1.0, false);
            if ((a - b).cwiseAbs().maxCoeff() < 1e-9)
                throw ConfigError(std::string("class signatures collide: ") +
                                  kClassNames[i] + " vs " + kClassNames[j]);
        }
    }
}

Vector class_signature(FaultClass c, double load, bool islanded) {
    Vector s(kFeatureCount);
    s[0] = s[1] = s[2] = 1.0;          // v_rms per phase (per unit)
    s[3] = s[4] = s[5] = load;         // i_rms tracks load
    s[6] = islanded ? 59.8 : 60.0;     // islanded droop pulls frequency down
    s[7] = 0.02;                       // v_thd
    s[8] = 0.03;                       // i_thd
    s[9] = 0.0;                        // v_dc_offset
    s[10] = 0.0;                       // i_dc_offset
    s[11] = 0.01;                      // v_unbalance
    s[12] = 0.01;                      // i_unbalance
    s[13] = load;                      // p_active
    s[14] = islanded ? 0.05 : 0.15;    // q_reactive setpoint differs by mode
    s[15] = islanded ? 1.0 : 0.0;      // mode_flag

    for (int sw : kFaultedSwitches[static_cast<std::size_t>(c)])
        if (sw != 0) apply_switch_fault(s, sw);
    return s;
}

LabeledDataset generate_synthetic_dataset(const SyntheticConfig& config, RngStream& rng) {
    config.validate();
    const Index base = config.total / kClassCount;
    const Index rem = config.total % kClassCount;

    LabeledDataset d;
    d.samples.resize(config.total, kFeatureCount);
    d.labels.reserve(static_cast<std::size_t>(config.total));
    d.provenance = "synthetic(seed=" + std::to_string(rng.seed()) + ")";

    Index row = 0;
    for (int ci = 0; ci < kClassCount; ++ci) {
        FaultClass cls = fault_class_from_index(ci);
        Index count = base + (ci < rem ? 1 : 0);
        for (Index k = 0; k < count; ++k, ++row) {
            double load = rng.uniform(config.load_min, config.load_max);
            bool islanded = rng.uniform() < config.islanded_prob;
            Vector s = class_signature(cls, load, islanded);
            for (Index f = 0; f < kFeatureCount; ++f)
                d.samples(row, f) =
                    s[f] + config.jitter * kNoiseStd[static_cast<std::size_t>(f)] *
                               rng.normal();
            d.labels.push_back(cls);
        }
    }
    d.validate();
    return d;
}

namespace {

std::string format_value(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    if (!line.empty() && line.back() == ',') out.push_back("");
    return out;
}

void write_schema_header(std::ostream& out) {
    for (Index f = 0; f < kFeatureCount; ++f)
        out << kFeatureNames[static_cast<std::size_t>(f)] << ',';
    out << "label\n";
}

/// Schema-v1 rows with labels kept as raw strings; row_numbers are 1-based
/// data-line positions in the file, for error messages about labels.
struct RawCsv {
    Matrix features;
    std::vector<std::string> labels;
    std::vector<long> row_numbers;
};

RawCsv read_schema_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open: " + path);

    std::string line;
    if (!std::getline(in, line)) throw ConfigError(path + ": empty file, header required");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::vector<std::string> header = split_line(line);
    for (Index f = 0; f < kFeatureCount; ++f) {
        const char* want = kFeatureNames[static_cast<std::size_t>(f)];
        if (static_cast<Index>(header.size()) <= f || header[static_cast<std::size_t>(f)] != want)
            throw ConfigError(path + ": header column " + std::to_string(f + 1) +
                              " must be '" + want + "'");
    }
    if (header.size() != kFeatureCount + 1 || header.back() != "label")
        throw ConfigError(path + ": header must end with 'label' after " +
                          std::to_string(kFeatureCount) + " feature columns");

    std::vector<std::array<double, kFeatureCount>> rows;
    RawCsv raw;
    long row_no = 0;
    while (std::getline(in, line)) {
        ++row_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> cells = split_line(line);
        if (cells.size() != kFeatureCount + 1)
            throw ConfigError(path + ": row " + std::to_string(row_no) + ": expected " +
                              std::to_string(kFeatureCount + 1) + " fields, got " +
                              std::to_string(cells.size()));
        std::array<double, kFeatureCount> vals{};
        for (Index f = 0; f < kFeatureCount; ++f) {
            const std::string& cell = cells[static_cast<std::size_t>(f)];
            double v = 0.0;
            auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
            if (ec != std::errc() || ptr != cell.data() + cell.size() || !std::isfinite(v))
                throw ConfigError(path + ": row " + std::to_string(row_no) + ", column " +
                                  kFeatureNames[static_cast<std::size_t>(f)] +
                                  ": bad numeric value '" + cell + "'");
            vals[static_cast<std::size_t>(f)] = v;
        }
        raw.labels.push_back(cells.back());
        raw.row_numbers.push_back(row_no);
        rows.push_back(vals);
    }

    raw.features.resize(static_cast<Index>(rows.size()), kFeatureCount);
    for (std::size_t r = 0; r < rows.size(); ++r)
        for (Index f = 0; f < kFeatureCount; ++f)
            raw.features(static_cast<Index>(r), f) = rows[r][static_cast<std::size_t>(f)];
    return raw;
}

}  // namespace

void save_csv(const LabeledDataset& dataset, const std::string& path) {
    dataset.validate();
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot open for writing: " + path);
    write_schema_header(out);
    for (Index r = 0; r < dataset.samples.rows(); ++r) {
        for (Index f = 0; f < kFeatureCount; ++f)
            out << format_value(dataset.samples(r, f)) << ',';
        out << to_string(dataset.labels[static_cast<std::size_t>(r)]) << '\n';
    }
    if (!out) throw ConfigError("write failed: " + path);
}

LabeledDataset load_csv(const std::string& path) {
    RawCsv raw = read_schema_csv(path);
    LabeledDataset d;
    d.samples = std::move(raw.features);
    d.labels.reserve(raw.labels.size());
    for (std::size_t r = 0; r < raw.labels.size(); ++r) {
        try {
            d.labels.push_back(fault_class_from_string(raw.labels[r]));
        } catch (const ConfigError&) {
            throw ConfigError(path + ": row " + std::to_string(raw.row_numbers[r]) +
                              ", column label: unknown fault class '" + raw.labels[r] + "'");
        }
    }
    d.provenance = path;
    d.validate();
    return d;
}

void save_fdi_csv(const Matrix& features, const std::string& path) {
    require_dims(features.cols(), kFeatureCount, "FDI feature columns");
    require_finite(features, "FDI features");
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot open for writing: " + path);
    write_schema_header(out);
    for (Index r = 0; r < features.rows(); ++r) {
        for (Index f = 0; f < kFeatureCount; ++f)
            out << format_value(features(r, f)) << ',';
        out << "FDI\n";
    }
    if (!out) throw ConfigError("write failed: " + path);
}

Matrix load_fdi_csv(const std::string& path) {
    RawCsv raw = read_schema_csv(path);
    for (std::size_t r = 0; r < raw.labels.size(); ++r)
        if (raw.labels[r] != "FDI")
            throw ConfigError(path + ": row " + std::to_string(raw.row_numbers[r]) +
                              ", column label: expected 'FDI', got '" + raw.labels[r] + "'");
    require_finite(raw.features, "FDI features");
    return raw.features;
}

void NormalizationParams::validate() const {
    require_dims(max.size(), min.size(), "normalization min/max length");
    for (Index f = 0; f < min.size(); ++f)
        if (!(max[f] > min[f])) {
            std::string name = f < kFeatureCount ? kFeatureNames[static_cast<std::size_t>(f)]
                                                 : std::to_string(f);
            throw ConfigError("constant feature cannot be normalized: " + name);
        }
}

NormalizationParams fit_normalizer(const Matrix& train_samples) {
    if (train_samples.rows() == 0) throw ShapeError("fit_normalizer: empty training set");
    NormalizationParams p;
    p.min = train_samples.colwise().minCoeff();
    p.max = train_samples.colwise().maxCoeff();
    p.validate();
    return p;
}

Matrix apply_normalizer(const NormalizationParams& params, const Matrix& samples,
                        long* clamped) {
    params.validate();
    require_dims(samples.cols(), params.min.size(), "apply_normalizer feature width");
    Matrix out(samples.rows(), samples.cols());
    long clamp_count = 0;
    for (Index f = 0; f < samples.cols(); ++f) {
        double lo = params.min[f], span = params.max[f] - params.min[f];
        for (Index r = 0; r < samples.rows(); ++r) {
            double y = -1.0 + 2.0 * (samples(r, f) - lo) / span;
            if (y < -kNormalizedClamp || y > kNormalizedClamp) {
                y = std::clamp(y, -kNormalizedClamp, kNormalizedClamp);
                ++clamp_count;
            }
            out(r, f) = y;
        }
    }
    if (clamp_count > 0)
        diag(1, "apply_normalizer: clamped " + std::to_string(clamp_count) +
                    " values to +-" + format_value(kNormalizedClamp));
    if (clamped) *clamped = clamp_count;
    return out;
}

Matrix invert_normalizer(const NormalizationParams& params, const Matrix& normalized) {
    params.validate();
    require_dims(normalized.cols(), params.min.size(), "invert_normalizer feature width");
    Matrix out(normalized.rows(), normalized.cols());
    for (Index f = 0; f < normalized.cols(); ++f) {
        double lo = params.min[f], span = params.max[f] - params.min[f];
        for (Index r = 0; r < normalized.rows(); ++r)
            out(r, f) = lo + (normalized(r, f) + 1.0) * 0.5 * span;
    }
    return out;
}

SplitResult stratified_split(const LabeledDataset& dataset, double ratio, RngStream& rng) {
    dataset.validate();
    if (!(ratio > 0.0 && ratio < 1.0))
        throw ConfigError("split ratio must be in (0, 1), got " + std::to_string(ratio));

    const Index n = dataset.size();
    std::array<std::vector<Index>, kClassCount> by_class;
    for (Index r = 0; r < n; ++r)
        by_class[static_cast<std::size_t>(dataset.labels[static_cast<std::size_t>(r)])]
            .push_back(r);
    for (int c = 0; c < kClassCount; ++c)
        if (!by_class[static_cast<std::size_t>(c)].empty() &&
            by_class[static_cast<std::size_t>(c)].size() < 2)
            throw ConfigError(std::string("class ") + kClassNames[static_cast<std::size_t>(c)] +
                              " has fewer than 2 members");

    // Test total from the global ratio; per-class apportionment by largest
    // remainder keeps class proportions within one sample.
    const Index test_total = n - static_cast<Index>(std::llround(ratio * static_cast<double>(n)));
    std::array<Index, kClassCount> test_count{};
    std::array<double, kClassCount> remainder{};
    Index assigned = 0;
    for (int c = 0; c < kClassCount; ++c) {
        double quota = static_cast<double>(test_total) *
                       static_cast<double>(by_class[static_cast<std::size_t>(c)].size()) /
                       static_cast<double>(n);
        test_count[static_cast<std::size_t>(c)] = static_cast<Index>(std::floor(quota));
        remainder[static_cast<std::size_t>(c)] = quota - std::floor(quota);
        assigned += test_count[static_cast<std::size_t>(c)];
    }
    std::vector<int> order(kClassCount);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return remainder[static_cast<std::size_t>(a)] > remainder[static_cast<std::size_t>(b)];
    });
    for (Index i = 0; i < test_total - assigned; ++i)
        ++test_count[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])];

    SplitResult result;
    auto append = [](LabeledDataset& d, const LabeledDataset& src, const std::vector<Index>& rows,
                     std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i) {
            d.samples.row(d.labels.size()) = src.samples.row(rows[i]);
            d.labels.push_back(src.labels[static_cast<std::size_t>(rows[i])]);
        }
    };
    result.test.samples.resize(test_total, kFeatureCount);
    result.train.samples.resize(n - test_total, kFeatureCount);
    result.train.provenance = dataset.provenance + "/train";
    result.test.provenance = dataset.provenance + "/test";

    for (int c = 0; c < kClassCount; ++c) {
        std::vector<Index>& rows = by_class[static_cast<std::size_t>(c)];
        rng.shuffle(rows);
        std::size_t tc = static_cast<std::size_t>(test_count[static_cast<std::size_t>(c)]);
        if (tc > rows.size())
            throw ConfigError(std::string("class ") + kClassNames[static_cast<std::size_t>(c)] +
                              " too small for the requested split");
        append(result.test, dataset, rows, 0, tc);
        append(result.train, dataset, rows, tc, rows.size());
    }
    result.train.validate();
    result.test.validate();
    return result;
}

void DetectionTestSet::validate() const {
    require_dims(samples.cols(), kFeatureCount, "detection set feature columns");
    require_finite(samples, "detection set samples");
    if (static_cast<Index>(truth.size()) != samples.rows() ||
        static_cast<Index>(labels.size()) != samples.rows())
        throw ShapeError("detection set has " + std::to_string(samples.rows()) +
                         " rows but " + std::to_string(truth.size()) + " truths and " +
                         std::to_string(labels.size()) + " labels");
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] == "FDI") {
            if (truth[i] != Verdict::Anomaly)
                throw ConfigError("detection set row " + std::to_string(i + 1) +
                                  ": label FDI must carry an Anomaly truth");
        } else {
            fault_class_from_string(labels[i]);  // throws on unknown names
            if (truth[i] != Verdict::InternalFault)
                throw ConfigError("detection set row " + std::to_string(i + 1) + ": label " +
                                  labels[i] + " must carry an InternalFault truth");
        }
    }
}

DetectionTestSet build_detection_test_set(const LabeledDataset& fault_test,
                                          const Matrix& fdi_features, RngStream& rng) {
    fault_test.validate();
    if (fault_test.size() == 0) throw ConfigError("detection test set needs fault samples");
    if (fdi_features.rows() == 0) throw ConfigError("detection test set needs FDI samples");
    require_dims(fdi_features.cols(), kFeatureCount, "FDI feature columns");
    require_finite(fdi_features, "FDI features");

    const Index nf = fault_test.size(), na = fdi_features.rows();
    std::vector<Index> order(static_cast<std::size_t>(nf + na));
    std::iota(order.begin(), order.end(), Index{0});
    rng.shuffle(order);

    DetectionTestSet set;
    set.samples.resize(nf + na, kFeatureCount);
    set.truth.resize(static_cast<std::size_t>(nf + na));
    set.labels.resize(static_cast<std::size_t>(nf + na));
    for (Index i = 0; i < nf + na; ++i) {
        Index src = order[static_cast<std::size_t>(i)];
        if (src < nf) {
            set.samples.row(i) = fault_test.samples.row(src);
            set.truth[static_cast<std::size_t>(i)] = Verdict::InternalFault;
            set.labels[static_cast<std::size_t>(i)] =
                to_string(fault_test.labels[static_cast<std::size_t>(src)]);
        } else {
            set.samples.row(i) = fdi_features.row(src - nf);
            set.truth[static_cast<std::size_t>(i)] = Verdict::Anomaly;
            set.labels[static_cast<std::size_t>(i)] = "FDI";
        }
    }
    set.validate();
    return set;
}

void save_detection_csv(const DetectionTestSet& set, const std::string& path) {
    set.validate();
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot open for writing: " + path);
    write_schema_header(out);
    for (Index r = 0; r < set.samples.rows(); ++r) {
        for (Index f = 0; f < kFeatureCount; ++f)
            out << format_value(set.samples(r, f)) << ',';
        out << set.labels[static_cast<std::size_t>(r)] << '\n';
    }
    if (!out) throw ConfigError("write failed: " + path);
}

DetectionTestSet load_detection_csv(const std::string& path) {
    RawCsv raw = read_schema_csv(path);
    DetectionTestSet set;
    set.samples = std::move(raw.features);
    set.labels = std::move(raw.labels);
    set.truth.reserve(set.labels.size());
    for (std::size_t i = 0; i < set.labels.size(); ++i) {
        if (set.labels[i] == "FDI") {
            set.truth.push_back(Verdict::Anomaly);
            continue;
        }
        try {
            fault_class_from_string(set.labels[i]);
        } catch (const ConfigError&) {
            throw ConfigError(path + ": row " + std::to_string(raw.row_numbers[i]) +
                              ", column label: expected a fault class or 'FDI', got '" +
                              set.labels[i] + "'");
        }
        set.truth.push_back(Verdict::InternalFault);
    }
    set.validate();
    return set;
}

}  // namespace f2gan
