#include "f2gan/neural.hpp"

#include <cmath>
#include <string>

namespace f2gan {

const char* to_string(Activation a) {
    switch (a) {
        case Activation::Identity: return "identity";
        case Activation::ReLU: return "relu";
        case Activation::LeakyReLU: return "leaky_relu";
        case Activation::Tanh: return "tanh";
        case Activation::Sigmoid: return "sigmoid";
        case Activation::Softmax: return "softmax";
    }
    return "identity";
}

Activation activation_from_string(const std::string& name) {
    if (name == "identity") return Activation::Identity;
    if (name == "relu") return Activation::ReLU;
    if (name == "leaky_relu") return Activation::LeakyReLU;
    if (name == "tanh") return Activation::Tanh;
    if (name == "sigmoid") return Activation::Sigmoid;
    if (name == "softmax") return Activation::Softmax;
    throw ConfigError("unknown activation: " + name);
}

void DenseLayer::validate() const {
    if (bias.size() != weights.rows())
        throw ShapeError("bias length " + std::to_string(bias.size()) +
                         " does not match weight rows " + std::to_string(weights.rows()));
    if (dropout_rate < 0.0 || dropout_rate >= 1.0)
        throw ConfigError("dropout_rate must be in [0, 1), got " + std::to_string(dropout_rate));
    if (activation == Activation::LeakyReLU && (leaky_slope <= 0.0 || leaky_slope >= 1.0))
        throw ConfigError("leaky_slope must be in (0, 1), got " + std::to_string(leaky_slope));
}

Mlp::Mlp(std::vector<DenseLayer> layers) : layers_(std::move(layers)) {
    for (std::size_t i = 0; i < layers_.size(); ++i) {
        layers_[i].validate();
        if (i > 0 && layers_[i].in_dim() != layers_[i - 1].out_dim())
            throw ShapeError("layer " + std::to_string(i) + " expects input width " +
                             std::to_string(layers_[i].in_dim()) + " but layer " +
                             std::to_string(i - 1) + " produces " +
                             std::to_string(layers_[i - 1].out_dim()));
    }
}

Mlp Mlp::build(Index input_dim, const std::vector<LayerSpec>& specs, RngStream& rng) {
    std::vector<DenseLayer> layers;
    layers.reserve(specs.size());
    Index in = input_dim;
    for (const auto& spec : specs) {
        if (spec.width <= 0) throw ConfigError("layer width must be positive");
        DenseLayer layer;
        layer.weights.resize(spec.width, in);
        double bound = std::sqrt(6.0 / static_cast<double>(in + spec.width));
        for (Index r = 0; r < spec.width; ++r)
            for (Index c = 0; c < in; ++c) layer.weights(r, c) = rng.uniform(-bound, bound);
        layer.bias = Vector::Zero(spec.width);
        layer.activation = spec.activation;
        layer.leaky_slope = spec.leaky_slope;
        layer.dropout_rate = spec.dropout_rate;
        layers.push_back(std::move(layer));
        in = spec.width;
    }
    return Mlp(std::move(layers));
}

std::size_t Mlp::parameter_count() const {
    std::size_t n = 0;
    for (const auto& l : layers_) n += static_cast<std::size_t>(l.weights.size() + l.bias.size());
    return n;
}

namespace {

Matrix apply_activation(const DenseLayer& layer, const Matrix& pre) {
    switch (layer.activation) {
        case Activation::Identity: return pre;
        case Activation::ReLU: return pre.cwiseMax(0.0);
        case Activation::LeakyReLU: {
            double s = layer.leaky_slope;
            return pre.unaryExpr([s](double v) { return v > 0.0 ? v : s * v; });
        }
        case Activation::Tanh: return pre.array().tanh().matrix();
        case Activation::Sigmoid:
            // 0.5 * (1 + tanh(x/2)) is exact and overflow-free
            return (0.5 * (1.0 + (0.5 * pre).array().tanh())).matrix();
        case Activation::Softmax: {
            Matrix out(pre.rows(), pre.cols());
            for (Index r = 0; r < pre.rows(); ++r) {
                double mx = pre.row(r).maxCoeff();
                Eigen::ArrayXd e = (pre.row(r).array() - mx).exp();
                out.row(r) = (e / e.sum()).matrix();
            }
            return out;
        }
    }
    return pre;
}

// dLoss/dPre from dLoss/dAct. `act` is the activation output before dropout.
Matrix activation_backward(const DenseLayer& layer, const Matrix& pre, const Matrix& act,
                           const Matrix& grad_act) {
    switch (layer.activation) {
        case Activation::Identity: return grad_act;
        case Activation::ReLU:
            return grad_act.cwiseProduct(
                pre.unaryExpr([](double v) { return v > 0.0 ? 1.0 : 0.0; }));
        case Activation::LeakyReLU: {
            double s = layer.leaky_slope;
            return grad_act.cwiseProduct(
                pre.unaryExpr([s](double v) { return v > 0.0 ? 1.0 : s; }));
        }
        case Activation::Tanh:
            return (grad_act.array() * (1.0 - act.array().square())).matrix();
        case Activation::Sigmoid:
            return (grad_act.array() * act.array() * (1.0 - act.array())).matrix();
        case Activation::Softmax: {
            // dL/dpre_k = p_k * (g_k - sum_i g_i p_i), row-wise
            Matrix out(pre.rows(), pre.cols());
            for (Index r = 0; r < pre.rows(); ++r) {
                double dot = grad_act.row(r).dot(act.row(r));
                out.row(r) = act.row(r).cwiseProduct(
                    (grad_act.row(r).array() - dot).matrix());
            }
            return out;
        }
    }
    return grad_act;
}

void check_trace(const Mlp& net, const ForwardTrace& trace) {
    if (trace.depth() != net.depth())
        throw ShapeError("trace depth " + std::to_string(trace.depth()) +
                         " does not match network depth " + std::to_string(net.depth()));
    require_dims(trace.input.cols(), net.input_dim(), "trace input width");
    Index rows = trace.input.rows();
    for (std::size_t l = 0; l < net.depth(); ++l) {
        if (trace.pre[l].rows() != rows || trace.pre[l].cols() != net.layer(l).out_dim())
            throw ShapeError("trace layer " + std::to_string(l) + " is " +
                             std::to_string(trace.pre[l].rows()) + "x" +
                             std::to_string(trace.pre[l].cols()) + ", network expects " +
                             std::to_string(rows) + "x" +
                             std::to_string(net.layer(l).out_dim()));
    }
}

}  // namespace

ForwardResult forward(const Mlp& net, const Matrix& batch, RunMode mode, RngStream& rng) {
    if (net.depth() == 0) throw ConfigError("forward on empty network");
    require_dims(batch.cols(), net.input_dim(), "forward input width");

    ForwardTrace trace;
    trace.mode = mode;
    trace.input = batch;
    trace.pre.resize(net.depth());
    trace.act.resize(net.depth());
    trace.post.resize(net.depth());
    trace.mask.resize(net.depth());

    const Matrix* current = &trace.input;
    for (std::size_t l = 0; l < net.depth(); ++l) {
        const DenseLayer& layer = net.layer(l);
        trace.pre[l].noalias() = (*current) * layer.weights.transpose();
        trace.pre[l].rowwise() += layer.bias.transpose();
        trace.act[l] = apply_activation(layer, trace.pre[l]);
        if (mode == RunMode::Train && layer.dropout_rate > 0.0) {
            double keep = 1.0 - layer.dropout_rate;
            Matrix& m = trace.mask[l];
            m.resize(trace.act[l].rows(), trace.act[l].cols());
            for (Index r = 0; r < m.rows(); ++r)
                for (Index c = 0; c < m.cols(); ++c)
                    m(r, c) = rng.uniform() < layer.dropout_rate ? 0.0 : 1.0 / keep;
            trace.post[l] = trace.act[l].cwiseProduct(m);
        }
        current = &trace.output_of(l);
    }
    require_finite(*current, "forward output");
    return ForwardResult{*current, std::move(trace)};
}

ForwardResult forward(const Mlp& net, const Matrix& batch) {
    RngStream unused(0);
    return forward(net, batch, RunMode::Infer, unused);
}

namespace {

// Shared backprop loop from layer `start` down to the input. `grad` is
// dLoss/dOutput(start) where output means the post-dropout value. Parameter
// gradients are accumulated when `out` is non-null.
Matrix backward_impl(const Mlp& net, const ForwardTrace& trace, std::size_t start, Matrix grad,
                     Gradients* out) {
    for (std::size_t l = start + 1; l-- > 0;) {
        const DenseLayer& layer = net.layer(l);
        if (trace.mask[l].size() > 0) grad = grad.cwiseProduct(trace.mask[l]);
        Matrix grad_pre = activation_backward(layer, trace.pre[l], trace.act[l], grad);
        if (out) {
            const Matrix& in = l == 0 ? trace.input : trace.output_of(l - 1);
            out->weights[l].noalias() += grad_pre.transpose() * in;
            out->bias[l] += grad_pre.colwise().sum().transpose();
        }
        grad.noalias() = grad_pre * layer.weights;
    }
    return grad;
}

}  // namespace

Gradients backward(const Mlp& net, const ForwardTrace& trace, const Matrix& output_grad) {
    check_trace(net, trace);
    std::size_t last = net.depth() - 1;
    if (output_grad.rows() != trace.pre[last].rows() ||
        output_grad.cols() != trace.pre[last].cols())
        throw ShapeError("output_grad is " + std::to_string(output_grad.rows()) + "x" +
                         std::to_string(output_grad.cols()) + ", output is " +
                         std::to_string(trace.pre[last].rows()) + "x" +
                         std::to_string(trace.pre[last].cols()));

    Gradients g;
    g.weights.resize(net.depth());
    g.bias.resize(net.depth());
    for (std::size_t l = 0; l < net.depth(); ++l) {
        g.weights[l] = Matrix::Zero(net.layer(l).out_dim(), net.layer(l).in_dim());
        g.bias[l] = Vector::Zero(net.layer(l).out_dim());
    }
    g.input = backward_impl(net, trace, last, output_grad, &g);
    require_finite(g.input, "backward input gradient");
    return g;
}

Matrix input_gradient_from_layer(const Mlp& net, const ForwardTrace& trace, std::size_t layer,
                                 const Matrix& grad_at_output) {
    check_trace(net, trace);
    if (layer >= net.depth()) throw ShapeError("layer index out of range");
    if (grad_at_output.rows() != trace.pre[layer].rows() ||
        grad_at_output.cols() != trace.pre[layer].cols())
        throw ShapeError("gradient is " + std::to_string(grad_at_output.rows()) + "x" +
                         std::to_string(grad_at_output.cols()) + ", layer output is " +
                         std::to_string(trace.pre[layer].rows()) + "x" +
                         std::to_string(trace.pre[layer].cols()));
    return backward_impl(net, trace, layer, grad_at_output, nullptr);
}

AdamState::AdamState(const Mlp& net, AdamConfig cfg) : cfg_(cfg) {
    m_w_.reserve(net.depth());
    for (std::size_t l = 0; l < net.depth(); ++l) {
        m_w_.push_back(Matrix::Zero(net.layer(l).out_dim(), net.layer(l).in_dim()));
        v_w_.push_back(Matrix::Zero(net.layer(l).out_dim(), net.layer(l).in_dim()));
        m_b_.push_back(Vector::Zero(net.layer(l).out_dim()));
        v_b_.push_back(Vector::Zero(net.layer(l).out_dim()));
    }
}

void adam_step(Mlp& net, const Gradients& grads, AdamState& state) {
    if (state.m_w_.size() != net.depth() || grads.weights.size() != net.depth())
        throw ShapeError("adam state / gradients do not match network depth");
    state.step_ += 1;
    const AdamConfig& c = state.cfg_;
    double corr1 = 1.0 - std::pow(c.beta1, static_cast<double>(state.step_));
    double corr2 = 1.0 - std::pow(c.beta2, static_cast<double>(state.step_));

    for (std::size_t l = 0; l < net.depth(); ++l) {
        DenseLayer& layer = net.layer(l);
        const Matrix& gw = grads.weights[l];
        const Vector& gb = grads.bias[l];
        if (gw.rows() != layer.weights.rows() || gw.cols() != layer.weights.cols())
            throw ShapeError("gradient shape mismatch at layer " + std::to_string(l));

        Matrix& mw = state.m_w_[l];
        Matrix& vw = state.v_w_[l];
        mw = c.beta1 * mw + (1.0 - c.beta1) * gw;
        vw = c.beta2 * vw + (1.0 - c.beta2) * gw.cwiseProduct(gw);
        layer.weights.array() -=
            c.lr * (mw.array() / corr1) / ((vw.array() / corr2).sqrt() + c.epsilon);

        Vector& mb = state.m_b_[l];
        Vector& vb = state.v_b_[l];
        mb = c.beta1 * mb + (1.0 - c.beta1) * gb;
        vb = c.beta2 * vb + (1.0 - c.beta2) * gb.cwiseProduct(gb);
        layer.bias.array() -=
            c.lr * (mb.array() / corr1) / ((vb.array() / corr2).sqrt() + c.epsilon);

        require_finite(layer.weights, "adam_step weights at layer " + std::to_string(l));
    }
}

GradCheckReport grad_check(const Mlp& net, const Matrix& batch, const LossFn& loss, double h) {
    GradCheckReport report;

    auto result = forward(net, batch);
    auto [base_loss, out_grad] = loss(result.output);
    (void)base_loss;
    Gradients analytic = backward(net, result.trace, out_grad);

    // Flag evaluation at (or numerically near) a ReLU-family kink, where the
    // central difference straddles the non-differentiable point.
    double kink_tol = 10.0 * h;
    for (std::size_t l = 0; l < net.depth(); ++l) {
        Activation a = net.layer(l).activation;
        if (a == Activation::ReLU || a == Activation::LeakyReLU) {
            if ((result.trace.pre[l].array().abs() < kink_tol).any()) report.kink = true;
        }
    }

    Mlp probe = net;  // value copy; perturbed in place
    auto eval = [&]() {
        auto r = forward(probe, batch);
        return loss(r.output).first;
    };
    for (std::size_t l = 0; l < net.depth(); ++l) {
        auto check_one = [&](double& param, double analytic_grad) {
            double saved = param;
            param = saved + h;
            double up = eval();
            param = saved - h;
            double down = eval();
            param = saved;
            double numeric = (up - down) / (2.0 * h);
            double denom = std::max({std::abs(analytic_grad), std::abs(numeric), 1e-8});
            double rel = std::abs(analytic_grad - numeric) / denom;
            report.max_rel_error = std::max(report.max_rel_error, rel);
        };
        DenseLayer& layer = probe.layer(l);
        for (Index r = 0; r < layer.weights.rows(); ++r)
            for (Index c = 0; c < layer.weights.cols(); ++c)
                check_one(layer.weights(r, c), analytic.weights[l](r, c));
        for (Index r = 0; r < layer.bias.size(); ++r)
            check_one(layer.bias(r), analytic.bias[l](r));
    }
    return report;
}

}  // namespace f2gan
