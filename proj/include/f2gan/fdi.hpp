#pragma once

#include "f2gan/dataset.hpp"
#include "f2gan/rng.hpp"
#include "f2gan/types.hpp"

namespace f2gan {

/// Linearized measurement model z = Hx + e with e ~ N(0, sigma^2 I).
/// Construction verifies full column rank (pivoted QR, pivot tolerance 1e-10),
/// so rank-deficient estimation problems cannot exist downstream.
struct MeasurementModel {
    Matrix H;          // m x n, m >= n
    double noise_std;  // sigma >= 0

    MeasurementModel(Matrix h, double sigma);

    Index m() const { return H.rows(); }
    Index n() const { return H.cols(); }
};

/// Random Gaussian H resampled until the rank condition holds. Defaults per
/// the desk-scale scenario: m = 12, n = 4, sigma = 0.05.
MeasurementModel random_measurement_model(Index m, Index n, double noise_std, RngStream& rng);

enum class AttackKind { Stealthy, Naive };

const char* to_string(AttackKind k);

struct AttackVector {
    Vector a;         // length m
    AttackKind kind = AttackKind::Naive;
    Vector c;         // length n, only for Stealthy (a = H*c by construction)
};

/// z = H*x + e. Noise is i.i.d. Gaussian with the model's sigma.
Vector measure(const MeasurementModel& model, const Vector& x, RngStream& rng);

struct ResidualReport {
    Vector estimate;       // least-squares x-hat
    double residual_norm;  // ||z - H*x-hat||_2
};

/// Least squares via orthogonal decomposition (QR), never normal equations.
ResidualReport estimate_state(const MeasurementModel& model, const Vector& z);

/// The unobservable attack a = H*c of the stealthy construction.
AttackVector craft_stealthy_attack(const MeasurementModel& model, const Vector& c);

/// A random direction of the given norm, with no column-space structure —
/// detectable by the residual test almost surely.
AttackVector craft_naive_attack(const MeasurementModel& model, double norm, RngStream& rng);

Vector apply_attack(const Vector& z, const AttackVector& attack);

struct UnobservabilityReport {
    double residual_clean;     // r  = ||z   - H*x-hat||
    double residual_attacked;  // r_a = ||z_a - H*x-hat_a||
    double delta;              // |r - r_a|
};

/// Compares the residual norms with and without the attack. Only Stealthy
/// attacks qualify; the invariance claim does not hold for Naive ones.
UnobservabilityReport verify_unobservability(const MeasurementModel& model, const Vector& z,
                                             const AttackVector& attack);

/// Per-feature first and second moments of real fault training samples.
struct FeatureStats {
    Vector mean;    // length kFeatureCount
    Vector stddev;  // population std, length kFeatureCount

    void validate() const;
};

FeatureStats compute_feature_stats(const Matrix& samples);

/// Synthesis knobs for feature-space FDI anomalies: each sample is a
/// fault-like Gaussian base vector with 3-8 voltage/current slots shifted by
/// intensity * (per-feature std), one coherent sign per sample.
struct FdiSpec {
    double intensity = 2.0;
    Index count = 219;
    Index min_slots = 3;
    Index max_slots = 8;

    void validate() const;
};

/// count x 16 raw-feature-space anomaly rows (ground truth: Anomaly).
Matrix synthesize_fdi_features(const FeatureStats& stats, const FdiSpec& spec, RngStream& rng);

}  // namespace f2gan
