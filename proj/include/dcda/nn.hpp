#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dcda/matrix.hpp"

namespace dcda {

// Floor applied to every probability before taking its log.
inline constexpr double kLogFloor = 1e-12;

enum class Activation { identity, relu, softmax };

std::string_view to_string(Activation a);
Activation activation_from_string(std::string_view s);

struct Layer {
    Matrix weight;             // in x out
    std::vector<double> bias;  // out
    Activation activation = Activation::identity;

    std::size_t in_dim() const { return weight.rows(); }
    std::size_t out_dim() const { return weight.cols(); }

    friend bool operator==(const Layer&, const Layer&) = default;
};

// Static stack of fully connected layers. Dimensions chain and softmax may
// only terminate the stack; both are checked on construction.
class LayerStack {
public:
    LayerStack() = default;
    explicit LayerStack(std::vector<Layer> layers);

    // Glorot-uniform weights in +-sqrt(6/(in+out)), zero biases.
    // dims has one more entry than activations.
    static LayerStack glorot(std::span<const std::size_t> dims, std::span<const Activation> activations,
                             std::mt19937_64& rng);

    const std::vector<Layer>& layers() const { return layers_; }
    std::vector<Layer>& layers() { return layers_; }
    std::size_t depth() const { return layers_.size(); }
    std::size_t in_dim() const;
    std::size_t out_dim() const;

    // Flat views over every parameter block: weight then bias, layer by layer.
    std::vector<std::span<double>> parameter_blocks();
    std::vector<std::span<const double>> parameter_blocks() const;

    friend bool operator==(const LayerStack&, const LayerStack&) = default;

private:
    void validate() const;
    std::vector<Layer> layers_;
};

// Forward intermediates for one batch.
struct Tape {
    Matrix input;
    std::vector<Matrix> pre;   // per layer, before activation
    std::vector<Matrix> post;  // per layer, after activation
};

struct ForwardResult {
    Matrix output;
    Tape tape;
};

struct LayerGrads {
    Matrix weight;
    std::vector<double> bias;
};

struct BackwardResult {
    std::vector<LayerGrads> layers;
    Matrix input_grad;

    // Same block order as LayerStack::parameter_blocks.
    std::vector<std::span<const double>> blocks() const;
};

ForwardResult forward(const LayerStack& stack, const Matrix& input);

// output_grad is dLoss/d(output). For a softmax head this is the gradient
// with respect to the probabilities; the softmax Jacobian is applied here.
BackwardResult backward(const LayerStack& stack, const Tape& tape, const Matrix& output_grad);

// Backward pass of the gradient reverse layer: -lambda * upstream.
// The forward pass of the layer is the identity and needs no function.
Matrix grad_reverse(const Matrix& upstream_grad, double lambda);

// Row-wise softmax with max subtraction.
Matrix softmax_rows(const Matrix& logits);

// v <- momentum * v + grads; params <- params - lr * v.
// Rejects non-finite gradients, naming `source` in the error.
void sgd_step(std::span<double> params, std::span<const double> grads, double lr, double momentum,
              std::span<double> velocity, std::string_view source = "gradient");

// Momentum buffers shaped like a list of parameter blocks.
class SgdMomentum {
public:
    SgdMomentum() = default;
    SgdMomentum(double lr, double momentum);

    void step(std::span<const std::span<double>> params, std::span<const std::span<const double>> grads,
              std::string_view source);

    double lr() const { return lr_; }
    double momentum() const { return momentum_; }

private:
    double lr_ = 0.01;
    double momentum_ = 0.9;
    std::vector<std::vector<double>> velocity_;
};

}  // namespace dcda
