#include "f2gan/gan.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "f2gan/diag.hpp"

namespace f2gan {

void GanVariant::validate() const {
    if (lambda < 0.0) throw ConfigError("lambda must be >= 0, got " + std::to_string(lambda));
}

const char* to_string(GanVariantKind k) {
    return k == GanVariantKind::Conventional ? "cgan" : "f2gan";
}

GanArchitecture GanArchitecture::conventional_default() {
    GanArchitecture a;
    a.input_dim = 16;
    a.latent_dim = 32;
    a.generator_hidden = {64, 128};
    a.generator_hidden_activation = Activation::ReLU;
    a.discriminator_hidden = {128, 64};
    a.discriminator_hidden_activation = Activation::ReLU;
    a.discriminator_dropout = 0.0;
    a.dropout_layers = {};
    a.feature_layer_index = 1;  // last hidden, width 64
    return a;
}

GanArchitecture GanArchitecture::feature_feedback_default() {
    GanArchitecture a;
    a.input_dim = 16;
    a.latent_dim = 64;
    a.generator_hidden = {256, 512, 1024};
    a.generator_hidden_activation = Activation::LeakyReLU;
    a.discriminator_hidden = {1024, 512, 256, 128};
    a.discriminator_hidden_activation = Activation::LeakyReLU;
    a.discriminator_dropout = 0.3;
    a.dropout_layers = {0, 1};  // the two widest hidden layers
    a.feature_layer_index = 3;  // last hidden, width 128
    return a;
}

void GanArchitecture::validate() const {
    if (input_dim <= 0) throw ConfigError("input_dim must be positive");
    if (latent_dim <= 0) throw ConfigError("latent_dim must be positive");
    if (generator_hidden.empty() || discriminator_hidden.empty())
        throw ConfigError("generator and discriminator need at least one hidden layer");
    if (feature_layer_index >= discriminator_hidden.size())
        throw ConfigError("feature_layer_index " + std::to_string(feature_layer_index) +
                          " must address a hidden layer (count " +
                          std::to_string(discriminator_hidden.size()) + ")");
    if (discriminator_dropout < 0.0 || discriminator_dropout >= 1.0)
        throw ConfigError("discriminator_dropout must be in [0, 1)");
    for (std::size_t i : dropout_layers)
        if (i >= discriminator_hidden.size())
            throw ConfigError("dropout layer index " + std::to_string(i) + " out of range");
}

Mlp GanArchitecture::build_generator(RngStream& rng) const {
    std::vector<LayerSpec> specs;
    for (Index w : generator_hidden)
        specs.push_back({w, generator_hidden_activation, 0.0, generator_leaky_slope});
    specs.push_back({input_dim, Activation::Tanh, 0.0, 0.2});
    return Mlp::build(latent_dim, specs, rng);
}

Mlp GanArchitecture::build_discriminator(RngStream& rng) const {
    std::vector<LayerSpec> specs;
    for (std::size_t i = 0; i < discriminator_hidden.size(); ++i) {
        bool dropped = std::find(dropout_layers.begin(), dropout_layers.end(), i) !=
                       dropout_layers.end();
        specs.push_back({discriminator_hidden[i], discriminator_hidden_activation,
                         dropped ? discriminator_dropout : 0.0, discriminator_leaky_slope});
    }
    specs.push_back({1, Activation::Sigmoid, 0.0, 0.2});
    return Mlp::build(input_dim, specs, rng);
}

void TrainConfig::validate() const {
    if (epochs < 1) throw ConfigError("epochs must be >= 1");
    if (batch_size < 2)
        throw ConfigError("batch_size must be >= 2 (batch-mean feature matching), got " +
                          std::to_string(batch_size));
}

Matrix sample_latent(Index n, Index latent_dim, LatentPrior prior, RngStream& rng) {
    Matrix z(n, latent_dim);
    for (Index r = 0; r < n; ++r)
        for (Index c = 0; c < latent_dim; ++c)
            z(r, c) = prior == LatentPrior::Gaussian ? rng.normal() : rng.uniform(-1.0, 1.0);
    return z;
}

namespace {

// Floors the argument of each log so scores of exactly 0 or 1 stay finite.
inline double floored(double p) { return std::max(p, kScoreClamp); }

}  // namespace

double discriminator_loss(const Vector& d_real, const Vector& d_fake) {
    if (d_real.size() == 0 || d_fake.size() == 0)
        throw ShapeError("discriminator_loss: empty score batch");
    double real_term = 0.0, fake_term = 0.0;
    for (Index i = 0; i < d_real.size(); ++i) real_term += std::log(floored(d_real(i)));
    for (Index i = 0; i < d_fake.size(); ++i)
        fake_term += std::log(floored(1.0 - d_fake(i)));
    return -real_term / static_cast<double>(d_real.size()) -
           fake_term / static_cast<double>(d_fake.size());
}

double generator_fool_loss(const Vector& d_fake) {
    if (d_fake.size() == 0) throw ShapeError("generator_fool_loss: empty score batch");
    double sum = 0.0;
    for (Index i = 0; i < d_fake.size(); ++i) sum += std::log(floored(1.0 - d_fake(i)));
    return sum / static_cast<double>(d_fake.size());
}

double feature_matching_loss(const Matrix& f_real, const Matrix& f_fake) {
    if (f_real.rows() == 0 || f_fake.rows() == 0)
        throw ShapeError("feature_matching_loss: empty feature batch");
    require_dims(f_fake.cols(), f_real.cols(), "feature_matching_loss width");
    return (f_real.colwise().mean() - f_fake.colwise().mean()).squaredNorm();
}

double total_generator_loss(double fool, double fm, const GanVariant& variant) {
    return variant.kind == GanVariantKind::Conventional ? fool : fool + variant.lambda * fm;
}

namespace {

void check_loss(double value, const char* name, long epoch, long batch) {
    if (!std::isfinite(value))
        throw NumericError(std::string(name) + " non-finite at epoch " + std::to_string(epoch) +
                           ", batch " + std::to_string(batch));
}

}  // namespace

TrainedGan train_gan(const Matrix& train_data, const GanArchitecture& arch,
                     const GanVariant& variant, const TrainConfig& cfg) {
    arch.validate();
    variant.validate();
    cfg.validate();
    require_dims(train_data.cols(), arch.input_dim, "train_gan feature width");
    if (train_data.rows() < cfg.batch_size)
        throw ShapeError("train_gan: " + std::to_string(train_data.rows()) +
                         " rows < batch_size " + std::to_string(cfg.batch_size));

    RngStream root(cfg.seed);
    RngStream init_rng = root.substream("init");
    RngStream loop_rng = root.substream("train");
    RngStream shuffle_rng = root.substream("shuffle");

    TrainedGan gan;
    gan.architecture = arch;
    gan.variant = variant;
    gan.generator = arch.build_generator(init_rng);
    gan.discriminator = arch.build_discriminator(init_rng);
    gan.history.reserve(static_cast<std::size_t>(cfg.epochs));

    AdamState adam_g(gan.generator, cfg.optimizer);
    AdamState adam_d(gan.discriminator, cfg.optimizer);

    const Index n = train_data.rows();
    const std::size_t feat = arch.feature_layer_index;
    std::vector<Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Index{0});

    for (long epoch = 0; epoch < cfg.epochs; ++epoch) {
        shuffle_rng.shuffle(order);
        EpochStats stats;
        long batches = 0;
        Eigen::RowVectorXd fm_mean_acc =
            Eigen::RowVectorXd::Zero(arch.discriminator_hidden[feat]);

        for (Index start = 0; start + 1 < n; start += cfg.batch_size) {
            const Index b = std::min<Index>(cfg.batch_size, n - start);
            Matrix real(b, arch.input_dim);
            for (Index i = 0; i < b; ++i) real.row(i) = train_data.row(order[start + i]);

            // --- discriminator step ---
            Matrix z = sample_latent(b, arch.latent_dim, cfg.prior, loop_rng);
            auto g_fwd = forward(gan.generator, z, RunMode::Train, loop_rng);
            const Matrix& fake = g_fwd.output;

            Matrix stacked(2 * b, arch.input_dim);
            stacked.topRows(b) = real;
            stacked.bottomRows(b) = fake;
            auto d_pass = forward(gan.discriminator, stacked, RunMode::Train, loop_rng);
            Vector d_real = d_pass.output.topRows(b).col(0);
            Vector d_fake = d_pass.output.bottomRows(b).col(0);

            double loss_d = discriminator_loss(d_real, d_fake);
            check_loss(loss_d, "loss_d", epoch, batches);

            Matrix d_grad(2 * b, 1);
            double inv_b = 1.0 / static_cast<double>(b);
            for (Index i = 0; i < b; ++i) d_grad(i, 0) = -inv_b / floored(d_real(i));
            for (Index i = 0; i < b; ++i)
                d_grad(b + i, 0) = inv_b / floored(1.0 - d_fake(i));
            adam_step(gan.discriminator, backward(gan.discriminator, d_pass.trace, d_grad),
                      adam_d);

            // --- generator step (same z and real minibatch, updated D) ---
            auto g_pass = forward(gan.discriminator, stacked, RunMode::Train, loop_rng);
            Vector g_fake_scores = g_pass.output.bottomRows(b).col(0);
            const Matrix& feat_full = g_pass.trace.output_of(feat);
            Matrix f_real = feat_full.topRows(b);
            Matrix f_fake = feat_full.bottomRows(b);

            Eigen::RowVectorXd mean_diff = f_real.colwise().mean() - f_fake.colwise().mean();
            fm_mean_acc += mean_diff;

            double loss_fool = generator_fool_loss(g_fake_scores);
            double loss_fm = feature_matching_loss(f_real, f_fake);
            check_loss(loss_fool, "loss_g_fool", epoch, batches);
            check_loss(loss_fm, "loss_fm", epoch, batches);

            Matrix fool_grad = Matrix::Zero(2 * b, 1);
            for (Index i = 0; i < b; ++i)
                fool_grad(b + i, 0) = -inv_b / floored(1.0 - g_fake_scores(i));
            Matrix input_grad = input_gradient_from_layer(
                gan.discriminator, g_pass.trace, gan.discriminator.depth() - 1, fool_grad);

            if (variant.kind == GanVariantKind::FeatureFeedback && variant.lambda > 0.0) {
                Matrix fm_grad = Matrix::Zero(2 * b, feat_full.cols());
                Eigen::RowVectorXd per_row = (-2.0 * variant.lambda * inv_b) * mean_diff;
                for (Index i = 0; i < b; ++i) fm_grad.row(b + i) = per_row;
                input_grad +=
                    input_gradient_from_layer(gan.discriminator, g_pass.trace, feat, fm_grad);
            }

            adam_step(gan.generator,
                      backward(gan.generator, g_fwd.trace, input_grad.bottomRows(b)), adam_g);

            stats.loss_d += loss_d;
            stats.loss_g_fool += loss_fool;
            stats.mean_d_real += d_real.mean();
            stats.mean_d_fake += d_fake.mean();
            ++batches;
        }

        stats.loss_d /= batches;
        stats.loss_g_fool /= batches;
        // Epoch-level gap: averaging the per-batch mean differences before
        // taking the norm cancels minibatch sampling noise that would
        // otherwise put a variance floor under the recorded curve.
        stats.loss_fm = (fm_mean_acc / static_cast<double>(batches)).squaredNorm();
        stats.mean_d_real /= batches;
        stats.mean_d_fake /= batches;
        gan.history.push_back(stats);
        if (epoch % 100 == 0 || epoch + 1 == cfg.epochs)
            diag(2, std::string(to_string(variant.kind)) + " epoch " + std::to_string(epoch) +
                        ": L_D=" + std::to_string(stats.loss_d) +
                        " L_FM=" + std::to_string(stats.loss_fm) +
                        " D(x)=" + std::to_string(stats.mean_d_real) +
                        " D(G(z))=" + std::to_string(stats.mean_d_fake));
    }
    return gan;
}

DiscriminationResult discriminate(const TrainedGan& gan, const Vector& sample) {
    require_dims(sample.size(), gan.architecture.input_dim, "discriminate sample width");
    DiscriminationResult r;
    r.out_of_range = (sample.array().abs() > 1.5).any();
    if (r.out_of_range)
        diag(1, "discriminate: input component beyond +-1.5; was it normalized?");
    auto pass = forward(gan.discriminator, sample.transpose());
    r.score = pass.output(0, 0);
    r.features = pass.trace.output_of(gan.feature_layer()).row(0).transpose();
    return r;
}

DetectionOutcome detect(const TrainedGan& gan, const Vector& sample, double threshold) {
    DiscriminationResult d = discriminate(gan, sample);
    DetectionOutcome outcome;
    outcome.score = d.score;
    outcome.features = std::move(d.features);
    outcome.verdict = d.score > threshold ? Verdict::InternalFault : Verdict::Anomaly;
    return outcome;
}

}  // namespace f2gan
