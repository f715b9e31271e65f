#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dmsynth/rng.hpp"

namespace dmsynth {

enum class Activation { SiLU, Identity };
enum class FinalActivation { Identity, Softmax };

struct NetSpec {
    int input_dim = 1;
    std::vector<int> hidden_dims;
    int output_dim = 1;
    Activation activation = Activation::SiLU;
    FinalActivation final_activation = FinalActivation::Identity;

    // throws std::invalid_argument on zero/negative dimensions
    void validate() const;

    int num_layers() const { return static_cast<int>(hidden_dims.size()) + 1; }

    // (fan_in, fan_out) per layer
    std::vector<std::pair<int, int>> layer_shapes() const;

    bool operator==(const NetSpec&) const = default;
};

struct DenseNet {
    NetSpec spec;
    std::vector<Eigen::MatrixXd> weights; // out x in, per layer
    std::vector<Eigen::VectorXd> biases;

    std::int64_t parameter_count() const;
};

// Fan-in scaled zero-mean init, biases zero. Deterministic given seed.
DenseNet net_init(const NetSpec& spec, std::uint64_t seed);

// Test hook: all parameters zero.
DenseNet net_init_zero(const NetSpec& spec);

// Activation record sufficient for exact gradient replay.
struct Tape {
    const DenseNet* net = nullptr;
    Eigen::VectorXd input;
    std::vector<Eigen::VectorXd> pre;  // pre-activation per layer
    std::vector<Eigen::VectorXd> post; // post-activation per layer; back() is the output
};

Eigen::VectorXd net_forward(const DenseNet& net, const Eigen::VectorXd& input,
                            Tape* tape = nullptr);

struct ParamGrads {
    std::vector<Eigen::MatrixXd> weights;
    std::vector<Eigen::VectorXd> biases;
    Eigen::VectorXd input; // gradient with respect to the network input

    static ParamGrads zeros_like(const DenseNet& net);
    void add(const ParamGrads& other); // accumulate (input grad excluded)
    void scale(double s);
};

ParamGrads net_backward(const DenseNet& net, const Tape& tape,
                        const Eigen::VectorXd& output_grad);

struct OptimizerConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    bool sgd = false; // plain SGD toggle; moments unused when set
};

struct OptimizerState {
    OptimizerConfig cfg;
    std::int64_t step = 0;
    std::vector<Eigen::MatrixXd> m_w, v_w;
    std::vector<Eigen::VectorXd> m_b, v_b;

    static OptimizerState init(const DenseNet& net, const OptimizerConfig& cfg = {});
};

// Adaptive-moment (or SGD) update in place; throws on non-finite gradients,
// naming the offending layer.
void optimizer_step(DenseNet& net, const ParamGrads& grads, OptimizerState& state);

// Sinusoidal features at geometrically spaced frequencies; dim must be even,
// 1 <= t <= horizon. Every entry lies in [-1, 1].
Eigen::VectorXd time_embedding(int t, int dim, int horizon);

} // namespace dmsynth
