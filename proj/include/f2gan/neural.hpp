#pragma once

#include <functional>
#include <utility>
#include <vector>

#include "f2gan/rng.hpp"
#include "f2gan/types.hpp"

namespace f2gan {

enum class Activation { Identity, ReLU, LeakyReLU, Tanh, Sigmoid, Softmax };

const char* to_string(Activation a);
Activation activation_from_string(const std::string& name);

struct DenseLayer {
    Matrix weights;  // out x in
    Vector bias;     // out
    Activation activation = Activation::Identity;
    double leaky_slope = 0.2;   // only read by LeakyReLU, must be in (0, 1)
    double dropout_rate = 0.0;  // [0, 1)

    Index in_dim() const { return weights.cols(); }
    Index out_dim() const { return weights.rows(); }
    void validate() const;
};

struct LayerSpec {
    Index width = 0;
    Activation activation = Activation::Identity;
    double dropout_rate = 0.0;
    double leaky_slope = 0.2;
};

/// Ordered dense layers with chained dimensions. Construction validates the
/// chain, so a shape-inconsistent network cannot exist.
class Mlp {
  public:
    Mlp() = default;
    explicit Mlp(std::vector<DenseLayer> layers);

    /// Builds with Glorot-uniform weights (+-sqrt(6/(fan_in+fan_out))) and zero biases.
    static Mlp build(Index input_dim, const std::vector<LayerSpec>& specs, RngStream& rng);

    std::size_t depth() const { return layers_.size(); }
    Index input_dim() const { return layers_.empty() ? 0 : layers_.front().in_dim(); }
    Index output_dim() const { return layers_.empty() ? 0 : layers_.back().out_dim(); }

    const DenseLayer& layer(std::size_t i) const { return layers_.at(i); }
    DenseLayer& layer(std::size_t i) { return layers_.at(i); }
    const std::vector<DenseLayer>& layers() const { return layers_; }

    std::size_t parameter_count() const;

  private:
    std::vector<DenseLayer> layers_;
};

enum class RunMode { Train, Infer };

/// Per-layer record of one forward pass. `post` (activation after the dropout
/// mask) is stored only for layers that actually dropped; `output_of` returns
/// the value that fed the next layer either way.
struct ForwardTrace {
    Matrix input;
    std::vector<Matrix> pre;   // n x out, before activation
    std::vector<Matrix> act;   // n x out, after activation, before dropout
    std::vector<Matrix> post;  // n x out, after dropout; empty when no mask
    std::vector<Matrix> mask;  // keep-mask scaled by 1/(1-p); empty when no dropout
    RunMode mode = RunMode::Infer;

    std::size_t depth() const { return pre.size(); }
    const Matrix& output_of(std::size_t layer) const {
        return mask[layer].size() > 0 ? post[layer] : act[layer];
    }
};

struct ForwardResult {
    Matrix output;  // last layer's post-activation
    ForwardTrace trace;
};

/// Runs the batch (rows = samples) through the net. Train mode draws inverted
/// dropout masks from rng; Infer mode never touches rng.
ForwardResult forward(const Mlp& net, const Matrix& batch, RunMode mode, RngStream& rng);

/// Inference-mode forward without a stream (dropout disabled by mode).
ForwardResult forward(const Mlp& net, const Matrix& batch);

struct Gradients {
    std::vector<Matrix> weights;
    std::vector<Vector> bias;
    Matrix input;  // gradient wrt the batch
};

/// Exact analytic gradients for every parameter and the input, honoring the
/// trace's dropout masks. output_grad is dLoss/dOutput of the last layer.
Gradients backward(const Mlp& net, const ForwardTrace& trace, const Matrix& output_grad);

/// Backpropagates a gradient injected at an intermediate layer's output
/// (post-dropout) down to the input. Used for feature-level losses.
Matrix input_gradient_from_layer(const Mlp& net, const ForwardTrace& trace, std::size_t layer,
                                 const Matrix& grad_at_output);

struct AdamConfig {
    double lr = 2e-4;
    double beta1 = 0.5;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

class AdamState {
  public:
    AdamState() = default;
    AdamState(const Mlp& net, AdamConfig cfg);

    const AdamConfig& config() const { return cfg_; }
    long step_count() const { return step_; }

    friend void adam_step(Mlp& net, const Gradients& grads, AdamState& state);

  private:
    AdamConfig cfg_;
    long step_ = 0;
    std::vector<Matrix> m_w_, v_w_;
    std::vector<Vector> m_b_, v_b_;
};

/// Standard bias-corrected Adam update, in place.
void adam_step(Mlp& net, const Gradients& grads, AdamState& state);

/// Loss functional for grad_check: maps net output to (loss, dLoss/dOutput).
using LossFn = std::function<std::pair<double, Matrix>(const Matrix&)>;

struct GradCheckReport {
    double max_rel_error = 0.0;
    bool kink = false;  // some ReLU/LeakyReLU pre-activation sat within tolerance of 0
};

/// Central-difference check of every parameter gradient, inference mode.
/// Relative error uses max(|analytic|, |numeric|, 1e-8) as denominator.
GradCheckReport grad_check(const Mlp& net, const Matrix& batch, const LossFn& loss,
                           double h = 1e-5);

}  // namespace f2gan
