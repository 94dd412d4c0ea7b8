#pragma once

#include <cstdint>
#include <vector>

#include "f2gan/neural.hpp"
#include "f2gan/rng.hpp"
#include "f2gan/types.hpp"

namespace f2gan {

enum class LatentPrior { Gaussian, Uniform };

enum class GanVariantKind { Conventional, FeatureFeedback };

struct GanVariant {
    GanVariantKind kind = GanVariantKind::Conventional;
    double lambda = 1.0;  // feature feedback weight, >= 0

    static GanVariant conventional() { return {GanVariantKind::Conventional, 0.0}; }
    static GanVariant feature_feedback(double lambda = 1.0) {
        return {GanVariantKind::FeatureFeedback, lambda};
    }
    void validate() const;
};

const char* to_string(GanVariantKind k);

/// Layer stacks for generator and discriminator. Output layers are fixed by
/// construction: generator ends in Tanh at input_dim width, discriminator in
/// a single Sigmoid unit.
struct GanArchitecture {
    Index input_dim = 16;
    Index latent_dim = 64;
    std::vector<Index> generator_hidden;
    Activation generator_hidden_activation = Activation::LeakyReLU;
    double generator_leaky_slope = 0.2;
    std::vector<Index> discriminator_hidden;
    Activation discriminator_hidden_activation = Activation::LeakyReLU;
    double discriminator_leaky_slope = 0.2;
    double discriminator_dropout = 0.0;
    std::vector<std::size_t> dropout_layers;  // indices into discriminator_hidden
    std::size_t feature_layer_index = 0;      // index into discriminator_hidden

    /// Baseline stack: latent 32, generator 64-128, discriminator 128-64,
    /// ReLU hidden activations, no dropout, features from the last hidden layer.
    static GanArchitecture conventional_default();
    /// Proposed stack: latent 64, generator 256-512-1024, discriminator
    /// 1024-512-256-128, LeakyReLU(0.2), dropout 0.3 on the two widest
    /// discriminator layers, features from the last hidden layer.
    static GanArchitecture feature_feedback_default();

    void validate() const;
    Mlp build_generator(RngStream& rng) const;
    Mlp build_discriminator(RngStream& rng) const;
};

struct TrainConfig {
    long epochs = 5000;
    Index batch_size = 64;
    std::uint64_t seed = 0;
    AdamConfig optimizer;  // lr 2e-4, beta1 0.5, beta2 0.999
    LatentPrior prior = LatentPrior::Gaussian;

    void validate() const;  // batch_size >= 2, epochs >= 1
};

/// Per-epoch training record. loss_d, loss_g_fool, and the score means are
/// averages over the epoch's minibatches; loss_fm is the epoch-level feature
/// gap ||avg over batches of (mean f(x) - mean f(G(z)))||^2, which estimates
/// the same quantity as the optimized per-batch loss without its minibatch
/// variance floor.
struct EpochStats {
    double loss_d = 0.0;
    double loss_g_fool = 0.0;
    double loss_fm = 0.0;
    double mean_d_real = 0.0;
    double mean_d_fake = 0.0;
};

struct TrainedGan {
    Mlp generator;
    Mlp discriminator;
    GanArchitecture architecture;
    GanVariant variant;
    std::vector<EpochStats> history;  // one entry per epoch

    /// Discriminator layer index holding the feature representation f(.).
    std::size_t feature_layer() const { return architecture.feature_layer_index; }
};

struct DiscriminationResult {
    double score = 0.0;   // D(x) in (0, 1)
    Vector features;      // f(x), designated hidden layer's post-activation
    bool out_of_range = false;  // some input component beyond +-1.5
};

struct DetectionOutcome {
    double score = 0.0;
    Vector features;
    Verdict verdict = Verdict::Anomaly;
};

/// Log arguments inside the losses are floored at kScoreClamp, so scores of
/// exactly 0 or 1 still give finite losses and gradients.
inline constexpr double kScoreClamp = 1e-7;

/// n x latent_dim draws from the latent prior.
Matrix sample_latent(Index n, Index latent_dim, LatentPrior prior, RngStream& rng);

/// L_D = -mean(log D(x)) - mean(log(1 - D(G(z)))).
double discriminator_loss(const Vector& d_real, const Vector& d_fake);

/// mean(log(1 - D(G(z)))), the generator's fooling loss.
double generator_fool_loss(const Vector& d_fake);

/// Squared L2 distance between the batch means of real and fake features.
double feature_matching_loss(const Matrix& f_real, const Matrix& f_fake);

/// Conventional: fooling loss alone. FeatureFeedback: fool + lambda * fm.
double total_generator_loss(double fool, double fm, const GanVariant& variant);

/// Alternating one-discriminator-step / one-generator-step training over
/// shuffled minibatches. train_data rows must already be normalized to [-1, 1].
TrainedGan train_gan(const Matrix& train_data, const GanArchitecture& arch,
                     const GanVariant& variant, const TrainConfig& cfg);

/// Inference-mode discriminator pass for one normalized sample.
DiscriminationResult discriminate(const TrainedGan& gan, const Vector& sample);

/// Score above the threshold (strictly) means internal fault; otherwise anomaly.
DetectionOutcome detect(const TrainedGan& gan, const Vector& sample, double threshold = 0.5);

}  // namespace f2gan
