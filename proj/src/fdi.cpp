#include "f2gan/fdi.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/QR>

#include "f2gan/diag.hpp"

namespace f2gan {

namespace {

constexpr double kRankPivotTol = 1e-10;

bool has_full_column_rank(const Matrix& h) {
    Eigen::ColPivHouseholderQR<Matrix> qr(h);
    qr.setThreshold(kRankPivotTol);
    return qr.rank() == h.cols();
}

}  // namespace

MeasurementModel::MeasurementModel(Matrix h, double sigma) : H(std::move(h)), noise_std(sigma) {
    if (H.rows() < H.cols())
        throw ShapeError("measurement matrix needs m >= n, got " + std::to_string(H.rows()) +
                         "x" + std::to_string(H.cols()));
    if (!(noise_std >= 0.0)) throw ConfigError("noise_std must be >= 0");
    require_finite(H, "measurement matrix");
    if (!has_full_column_rank(H))
        throw ConfigError("measurement matrix is column-rank-deficient (pivot tolerance " +
                          std::to_string(kRankPivotTol) + ")");
}

MeasurementModel random_measurement_model(Index m, Index n, double noise_std, RngStream& rng) {
    for (int attempt = 0; attempt < 64; ++attempt) {
        Matrix h(m, n);
        for (Index r = 0; r < m; ++r)
            for (Index c = 0; c < n; ++c) h(r, c) = rng.normal();
        if (has_full_column_rank(h)) return MeasurementModel(std::move(h), noise_std);
    }
    // Gaussian matrices with m >= n are rank-deficient with probability zero.
    throw NumericError("could not draw a full-column-rank measurement matrix");
}

const char* to_string(AttackKind k) { return k == AttackKind::Stealthy ? "stealthy" : "naive"; }

Vector measure(const MeasurementModel& model, const Vector& x, RngStream& rng) {
    require_dims(x.size(), model.n(), "state length");
    Vector z = model.H * x;
    if (model.noise_std > 0.0)
        for (Index i = 0; i < z.size(); ++i) z[i] += model.noise_std * rng.normal();
    return z;
}

ResidualReport estimate_state(const MeasurementModel& model, const Vector& z) {
    require_dims(z.size(), model.m(), "measurement length");
    ResidualReport report;
    report.estimate = model.H.colPivHouseholderQr().solve(z);
    report.residual_norm = (z - model.H * report.estimate).norm();
    return report;
}

AttackVector craft_stealthy_attack(const MeasurementModel& model, const Vector& c) {
    require_dims(c.size(), model.n(), "attack state-shift length");
    AttackVector attack;
    attack.a = model.H * c;
    attack.kind = AttackKind::Stealthy;
    attack.c = c;
    return attack;
}

AttackVector craft_naive_attack(const MeasurementModel& model, double norm, RngStream& rng) {
    if (!(norm > 0.0)) throw ConfigError("naive attack norm must be > 0");
    AttackVector attack;
    attack.kind = AttackKind::Naive;
    attack.a.resize(model.m());
    do {
        for (Index i = 0; i < model.m(); ++i) attack.a[i] = rng.normal();
    } while (attack.a.norm() == 0.0);
    attack.a *= norm / attack.a.norm();
    return attack;
}

Vector apply_attack(const Vector& z, const AttackVector& attack) {
    require_dims(attack.a.size(), z.size(), "attack vector length");
    return z + attack.a;
}

UnobservabilityReport verify_unobservability(const MeasurementModel& model, const Vector& z,
                                             const AttackVector& attack) {
    if (attack.kind != AttackKind::Stealthy)
        throw ConfigError("verify_unobservability requires a stealthy attack; naive attacks "
                          "inflate the residual by design");
    ResidualReport clean = estimate_state(model, z);
    ResidualReport attacked = estimate_state(model, apply_attack(z, attack));
    UnobservabilityReport report;
    report.residual_clean = clean.residual_norm;
    report.residual_attacked = attacked.residual_norm;
    report.delta = std::abs(clean.residual_norm - attacked.residual_norm);
    return report;
}

void FeatureStats::validate() const {
    require_dims(mean.size(), kFeatureCount, "feature stats mean length");
    require_dims(stddev.size(), kFeatureCount, "feature stats std length");
    if ((stddev.array() < 0.0).any()) throw NumericError("negative feature std");
}

FeatureStats compute_feature_stats(const Matrix& samples) {
    if (samples.rows() == 0) throw ShapeError("compute_feature_stats: empty sample set");
    require_dims(samples.cols(), kFeatureCount, "feature stats width");
    FeatureStats stats;
    stats.mean = samples.colwise().mean();
    Matrix centered = samples.rowwise() - stats.mean.transpose();
    stats.stddev =
        (centered.array().square().colwise().sum() / static_cast<double>(samples.rows()))
            .sqrt()
            .matrix();
    stats.validate();
    return stats;
}

void FdiSpec::validate() const {
    if (!(intensity > 0.0))
        throw ConfigError("FDI intensity must be > 0, got " + std::to_string(intensity));
    if (count < 1) throw ConfigError("FDI count must be >= 1");
    if (min_slots < 1 || min_slots > max_slots ||
        max_slots > static_cast<Index>(kInjectableSlots.size()))
        throw ConfigError("FDI slot range must satisfy 1 <= min_slots <= max_slots <= " +
                          std::to_string(kInjectableSlots.size()));
}

Matrix synthesize_fdi_features(const FeatureStats& stats, const FdiSpec& spec, RngStream& rng) {
    spec.validate();
    stats.validate();

    Matrix out(spec.count, kFeatureCount);
    std::vector<Index> slots(kInjectableSlots.begin(), kInjectableSlots.end());
    for (Index r = 0; r < spec.count; ++r) {
        // Fault-like base: per-feature Gaussian around the training moments.
        for (Index f = 0; f < kFeatureCount; ++f)
            out(r, f) = stats.mean[f] + stats.stddev[f] * rng.normal();

        // Coordinated injection: one sign for the whole sample, a random
        // subset of voltage/current slots shifted by intensity stds.
        double sign = rng.uniform() < 0.5 ? -1.0 : 1.0;
        Index k = spec.min_slots +
                  static_cast<Index>(rng.index(static_cast<std::size_t>(
                      spec.max_slots - spec.min_slots + 1)));
        rng.shuffle(slots);
        for (Index j = 0; j < k; ++j) {
            Index f = slots[static_cast<std::size_t>(j)];
            out(r, f) += sign * spec.intensity * stats.stddev[f];
        }
    }
    require_finite(out, "synthesized FDI features");
    return out;
}

}  // namespace f2gan
