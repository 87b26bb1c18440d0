#include "dcda/nn.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "dcda/kernels.hpp"

namespace dcda {

std::string_view to_string(Activation a) {
    switch (a) {
        case Activation::identity: return "identity";
        case Activation::relu: return "relu";
        case Activation::softmax: return "softmax";
    }
    return "identity";
}

Activation activation_from_string(std::string_view s) {
    if (s == "identity") return Activation::identity;
    if (s == "relu") return Activation::relu;
    if (s == "softmax") return Activation::softmax;
    throw std::invalid_argument("unknown activation '" + std::string(s) + "'");
}

LayerStack::LayerStack(std::vector<Layer> layers) : layers_(std::move(layers)) { validate(); }

void LayerStack::validate() const {
    for (std::size_t i = 0; i < layers_.size(); ++i) {
        const Layer& l = layers_[i];
        if (l.bias.size() != l.out_dim()) {
            throw std::invalid_argument("layer " + std::to_string(i) + ": bias length " +
                                        std::to_string(l.bias.size()) + " does not match weight " +
                                        l.weight.shape_string());
        }
        if (i + 1 < layers_.size() && l.out_dim() != layers_[i + 1].in_dim()) {
            throw std::invalid_argument("layer " + std::to_string(i) + " outputs " + std::to_string(l.out_dim()) +
                                        " but layer " + std::to_string(i + 1) + " expects " +
                                        std::to_string(layers_[i + 1].in_dim()));
        }
        if (l.activation == Activation::softmax && i + 1 != layers_.size()) {
            throw std::invalid_argument("layer " + std::to_string(i) + ": softmax is only allowed on the last layer");
        }
    }
}

LayerStack LayerStack::glorot(std::span<const std::size_t> dims, std::span<const Activation> activations,
                              std::mt19937_64& rng) {
    if (dims.size() != activations.size() + 1 || activations.empty()) {
        throw std::invalid_argument("glorot: need dims.size() == activations.size() + 1 >= 2");
    }
    std::vector<Layer> layers;
    for (std::size_t i = 0; i < activations.size(); ++i) {
        const std::size_t in = dims[i];
        const std::size_t out = dims[i + 1];
        const double limit = std::sqrt(6.0 / static_cast<double>(in + out));
        std::uniform_real_distribution<double> dist(-limit, limit);
        Layer l{Matrix(in, out), std::vector<double>(out, 0.0), activations[i]};
        for (double& w : l.weight.values()) w = dist(rng);
        layers.push_back(std::move(l));
    }
    return LayerStack(std::move(layers));
}

std::size_t LayerStack::in_dim() const { return layers_.empty() ? 0 : layers_.front().in_dim(); }
std::size_t LayerStack::out_dim() const { return layers_.empty() ? 0 : layers_.back().out_dim(); }

std::vector<std::span<double>> LayerStack::parameter_blocks() {
    std::vector<std::span<double>> blocks;
    for (Layer& l : layers_) {
        blocks.emplace_back(l.weight.values());
        blocks.emplace_back(l.bias);
    }
    return blocks;
}

std::vector<std::span<const double>> LayerStack::parameter_blocks() const {
    std::vector<std::span<const double>> blocks;
    for (const Layer& l : layers_) {
        blocks.emplace_back(l.weight.values());
        blocks.emplace_back(l.bias);
    }
    return blocks;
}

std::vector<std::span<const double>> BackwardResult::blocks() const {
    std::vector<std::span<const double>> out;
    for (const LayerGrads& g : layers) {
        out.emplace_back(g.weight.values());
        out.emplace_back(g.bias);
    }
    return out;
}

Matrix softmax_rows(const Matrix& logits) {
    Matrix out(logits.rows(), logits.cols());
    for (std::size_t r = 0; r < logits.rows(); ++r) {
        auto in = logits.row(r);
        auto o = out.row(r);
        const double mx = *std::max_element(in.begin(), in.end());
        double sum = 0.0;
        for (std::size_t c = 0; c < in.size(); ++c) {
            o[c] = std::exp(in[c] - mx);
            sum += o[c];
        }
        for (double& v : o) v /= sum;
    }
    return out;
}

ForwardResult forward(const LayerStack& stack, const Matrix& input) {
    if (stack.depth() == 0) throw std::invalid_argument("forward: empty layer stack");
    if (input.cols() != stack.in_dim()) {
        throw std::invalid_argument("forward: input is " + input.shape_string() + " but the stack expects " +
                                    std::to_string(stack.in_dim()) + " columns");
    }
    const auto& k = kernels::active();
    ForwardResult res;
    res.tape.input = input;
    const Matrix* current = &res.tape.input;
    for (const Layer& l : stack.layers()) {
        Matrix pre(current->rows(), l.out_dim());
        k.gemm_nn(current->data(), l.weight.data(), pre.data(), current->rows(), l.in_dim(), l.out_dim());
        k.add_bias(pre.data(), l.bias.data(), pre.rows(), pre.cols());
        Matrix post;
        switch (l.activation) {
            case Activation::identity: post = pre; break;
            case Activation::relu:
                post = Matrix(pre.rows(), pre.cols());
                k.relu(pre.data(), post.data(), pre.size());
                break;
            case Activation::softmax: post = softmax_rows(pre); break;
        }
        res.tape.pre.push_back(std::move(pre));
        res.tape.post.push_back(std::move(post));
        current = &res.tape.post.back();
    }
    res.output = res.tape.post.back();
    return res;
}

BackwardResult backward(const LayerStack& stack, const Tape& tape, const Matrix& output_grad) {
    const std::size_t depth = stack.depth();
    if (tape.pre.size() != depth || tape.post.size() != depth) {
        throw std::invalid_argument("backward: tape holds " + std::to_string(tape.pre.size()) +
                                    " layers, stack has " + std::to_string(depth));
    }
    for (std::size_t i = 0; i < depth; ++i) {
        if (tape.pre[i].cols() != stack.layers()[i].out_dim() || tape.pre[i].rows() != tape.input.rows()) {
            throw std::invalid_argument("backward: tape layer " + std::to_string(i) + " does not match the stack");
        }
    }
    if (!output_grad.same_shape(tape.post.back())) {
        throw std::invalid_argument("backward: output gradient is " + output_grad.shape_string() +
                                    ", forward output was " + tape.post.back().shape_string());
    }

    const auto& k = kernels::active();
    BackwardResult res;
    res.layers.resize(depth);
    Matrix grad = output_grad;  // d loss / d post of the current layer
    for (std::size_t idx = depth; idx-- > 0;) {
        const Layer& l = stack.layers()[idx];
        const Matrix& pre = tape.pre[idx];
        const Matrix& post = tape.post[idx];
        Matrix dpre(pre.rows(), pre.cols());
        switch (l.activation) {
            case Activation::identity: dpre = grad; break;
            case Activation::relu: k.relu_backward(pre.data(), grad.data(), dpre.data(), pre.size()); break;
            case Activation::softmax:
                for (std::size_t r = 0; r < post.rows(); ++r) {
                    auto p = post.row(r);
                    auto g = grad.row(r);
                    double dot = 0.0;
                    for (std::size_t c = 0; c < p.size(); ++c) dot += g[c] * p[c];
                    for (std::size_t c = 0; c < p.size(); ++c) dpre(r, c) = p[c] * (g[c] - dot);
                }
                break;
        }
        const Matrix& layer_in = idx == 0 ? tape.input : tape.post[idx - 1];

        LayerGrads& lg = res.layers[idx];
        lg.weight = Matrix(l.in_dim(), l.out_dim());
        k.gemm_tn(layer_in.data(), dpre.data(), lg.weight.data(), dpre.rows(), l.in_dim(), l.out_dim());
        lg.bias.assign(l.out_dim(), 0.0);
        for (std::size_t r = 0; r < dpre.rows(); ++r) {
            for (std::size_t c = 0; c < dpre.cols(); ++c) lg.bias[c] += dpre(r, c);
        }

        const Matrix wt = l.weight.transposed();
        Matrix dinput(dpre.rows(), l.in_dim());
        k.gemm_nn(dpre.data(), wt.data(), dinput.data(), dpre.rows(), l.out_dim(), l.in_dim());
        grad = std::move(dinput);
    }
    res.input_grad = std::move(grad);
    return res;
}

Matrix grad_reverse(const Matrix& upstream_grad, double lambda) {
    Matrix out(upstream_grad.rows(), upstream_grad.cols());
    kernels::active().scale(upstream_grad.data(), -lambda, out.data(), upstream_grad.size());
    return out;
}

void sgd_step(std::span<double> params, std::span<const double> grads, double lr, double momentum,
              std::span<double> velocity, std::string_view source) {
    if (params.size() != grads.size() || params.size() != velocity.size()) {
        throw std::invalid_argument("sgd_step: parameter, gradient and velocity sizes differ (" +
                                    std::to_string(params.size()) + ", " + std::to_string(grads.size()) + ", " +
                                    std::to_string(velocity.size()) + ")");
    }
    for (std::size_t i = 0; i < grads.size(); ++i) {
        if (!std::isfinite(grads[i])) {
            throw std::runtime_error("sgd_step: non-finite gradient from " + std::string(source) + " at index " +
                                     std::to_string(i));
        }
    }
    kernels::active().momentum_step(params.data(), velocity.data(), grads.data(), lr, momentum, params.size());
}

SgdMomentum::SgdMomentum(double lr, double momentum) : lr_(lr), momentum_(momentum) {
    if (!(lr > 0.0)) throw std::invalid_argument("sgd: learning rate must be > 0");
    if (!(momentum >= 0.0 && momentum < 1.0)) throw std::invalid_argument("sgd: momentum must be in [0, 1)");
}

void SgdMomentum::step(std::span<const std::span<double>> params, std::span<const std::span<const double>> grads,
                       std::string_view source) {
    if (params.size() != grads.size()) {
        throw std::invalid_argument("sgd: " + std::to_string(params.size()) + " parameter blocks but " +
                                    std::to_string(grads.size()) + " gradient blocks");
    }
    if (velocity_.empty()) {
        for (const auto& p : params) velocity_.emplace_back(p.size(), 0.0);
    }
    if (velocity_.size() != params.size()) throw std::invalid_argument("sgd: parameter block count changed");
    // Validate everything first so a rejected step leaves all blocks untouched.
    for (std::size_t b = 0; b < grads.size(); ++b) {
        for (double g : grads[b]) {
            if (!std::isfinite(g)) {
                throw std::runtime_error("sgd: non-finite gradient from " + std::string(source) + " in block " +
                                         std::to_string(b));
            }
        }
    }
    for (std::size_t b = 0; b < params.size(); ++b) {
        sgd_step(params[b], grads[b], lr_, momentum_, velocity_[b], source);
    }
}

}  // namespace dcda
