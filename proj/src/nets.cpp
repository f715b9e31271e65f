#include "dmsynth/nets.hpp"

#include <cmath>
#include <stdexcept>

namespace dmsynth {

void NetSpec::validate() const {
    if (input_dim < 1) throw std::invalid_argument("NetSpec: input_dim must be >= 1");
    if (output_dim < 1) throw std::invalid_argument("NetSpec: output_dim must be >= 1");
    for (int h : hidden_dims) {
        if (h < 1) throw std::invalid_argument("NetSpec: hidden dims must be >= 1");
    }
}

std::vector<std::pair<int, int>> NetSpec::layer_shapes() const {
    std::vector<std::pair<int, int>> shapes;
    int prev = input_dim;
    for (int h : hidden_dims) {
        shapes.emplace_back(prev, h);
        prev = h;
    }
    shapes.emplace_back(prev, output_dim);
    return shapes;
}

std::int64_t DenseNet::parameter_count() const {
    std::int64_t n = 0;
    for (std::size_t l = 0; l < weights.size(); ++l) {
        n += weights[l].size() + biases[l].size();
    }
    return n;
}

DenseNet net_init(const NetSpec& spec, std::uint64_t seed) {
    spec.validate();
    DenseNet net;
    net.spec = spec;
    Rng rng(seed);
    for (auto [fan_in, fan_out] : spec.layer_shapes()) {
        double scale = 1.0 / std::sqrt(static_cast<double>(fan_in));
        Eigen::MatrixXd w(fan_out, fan_in);
        for (int i = 0; i < fan_out; ++i) {
            for (int j = 0; j < fan_in; ++j) {
                w(i, j) = scale * rng.normal();
            }
        }
        net.weights.push_back(std::move(w));
        net.biases.push_back(Eigen::VectorXd::Zero(fan_out));
    }
    return net;
}

DenseNet net_init_zero(const NetSpec& spec) {
    spec.validate();
    DenseNet net;
    net.spec = spec;
    for (auto [fan_in, fan_out] : spec.layer_shapes()) {
        net.weights.push_back(Eigen::MatrixXd::Zero(fan_out, fan_in));
        net.biases.push_back(Eigen::VectorXd::Zero(fan_out));
    }
    return net;
}

namespace {

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

Eigen::VectorXd apply_activation(const Eigen::VectorXd& z, Activation act) {
    if (act == Activation::Identity) return z;
    Eigen::VectorXd out(z.size());
    for (Eigen::Index i = 0; i < z.size(); ++i) out[i] = z[i] * sigmoid(z[i]);
    return out;
}

Eigen::VectorXd activation_grad(const Eigen::VectorXd& z, const Eigen::VectorXd& upstream,
                                Activation act) {
    if (act == Activation::Identity) return upstream;
    Eigen::VectorXd out(z.size());
    for (Eigen::Index i = 0; i < z.size(); ++i) {
        double s = sigmoid(z[i]);
        out[i] = upstream[i] * s * (1.0 + z[i] * (1.0 - s));
    }
    return out;
}

Eigen::VectorXd softmax(const Eigen::VectorXd& z) {
    Eigen::VectorXd shifted = z.array() - z.maxCoeff();
    Eigen::VectorXd e = shifted.array().exp();
    return e / e.sum();
}

} // namespace

Eigen::VectorXd net_forward(const DenseNet& net, const Eigen::VectorXd& input, Tape* tape) {
    if (input.size() != net.spec.input_dim) {
        throw std::invalid_argument("net_forward: input dimension mismatch");
    }
    if (tape) {
        tape->net = &net;
        tape->input = input;
        tape->pre.clear();
        tape->post.clear();
    }
    Eigen::VectorXd h = input;
    const int L = net.spec.num_layers();
    for (int l = 0; l < L; ++l) {
        Eigen::VectorXd z = net.weights[l] * h + net.biases[l];
        Eigen::VectorXd a;
        if (l + 1 < L) {
            a = apply_activation(z, net.spec.activation);
        } else if (net.spec.final_activation == FinalActivation::Softmax) {
            a = softmax(z);
        } else {
            a = z;
        }
        if (tape) {
            tape->pre.push_back(z);
            tape->post.push_back(a);
        }
        h = std::move(a);
    }
    return h;
}

ParamGrads ParamGrads::zeros_like(const DenseNet& net) {
    ParamGrads g;
    for (std::size_t l = 0; l < net.weights.size(); ++l) {
        g.weights.push_back(Eigen::MatrixXd::Zero(net.weights[l].rows(), net.weights[l].cols()));
        g.biases.push_back(Eigen::VectorXd::Zero(net.biases[l].size()));
    }
    g.input = Eigen::VectorXd::Zero(net.spec.input_dim);
    return g;
}

void ParamGrads::add(const ParamGrads& other) {
    for (std::size_t l = 0; l < weights.size(); ++l) {
        weights[l] += other.weights[l];
        biases[l] += other.biases[l];
    }
}

void ParamGrads::scale(double s) {
    for (std::size_t l = 0; l < weights.size(); ++l) {
        weights[l] *= s;
        biases[l] *= s;
    }
    input *= s;
}

ParamGrads net_backward(const DenseNet& net, const Tape& tape,
                        const Eigen::VectorXd& output_grad) {
    const int L = net.spec.num_layers();
    if (tape.net != &net || static_cast<int>(tape.pre.size()) != L) {
        throw std::invalid_argument("net_backward: tape does not match this network");
    }
    if (output_grad.size() != net.spec.output_dim) {
        throw std::invalid_argument("net_backward: output_grad dimension mismatch");
    }

    ParamGrads g;
    g.weights.resize(L);
    g.biases.resize(L);

    Eigen::VectorXd delta; // dL/dz of current layer
    if (net.spec.final_activation == FinalActivation::Softmax) {
        const Eigen::VectorXd& y = tape.post[L - 1];
        double dot = output_grad.dot(y);
        delta = y.array() * (output_grad.array() - dot);
    } else {
        delta = output_grad;
    }

    for (int l = L - 1; l >= 0; --l) {
        const Eigen::VectorXd& layer_in = (l == 0) ? tape.input : tape.post[l - 1];
        g.weights[l] = delta * layer_in.transpose();
        g.biases[l] = delta;
        Eigen::VectorXd upstream = net.weights[l].transpose() * delta;
        if (l > 0) {
            delta = activation_grad(tape.pre[l - 1], upstream, net.spec.activation);
        } else {
            g.input = upstream;
        }
    }
    return g;
}

OptimizerState OptimizerState::init(const DenseNet& net, const OptimizerConfig& cfg) {
    OptimizerState s;
    s.cfg = cfg;
    for (std::size_t l = 0; l < net.weights.size(); ++l) {
        s.m_w.push_back(Eigen::MatrixXd::Zero(net.weights[l].rows(), net.weights[l].cols()));
        s.v_w.push_back(Eigen::MatrixXd::Zero(net.weights[l].rows(), net.weights[l].cols()));
        s.m_b.push_back(Eigen::VectorXd::Zero(net.biases[l].size()));
        s.v_b.push_back(Eigen::VectorXd::Zero(net.biases[l].size()));
    }
    return s;
}

void optimizer_step(DenseNet& net, const ParamGrads& grads, OptimizerState& state) {
    const int L = net.spec.num_layers();
    for (int l = 0; l < L; ++l) {
        if (!grads.weights[l].allFinite() || !grads.biases[l].allFinite()) {
            throw std::runtime_error("optimizer_step: non-finite gradient in layer " +
                                     std::to_string(l));
        }
    }
    state.step += 1;
    const auto& cfg = state.cfg;
    if (cfg.sgd) {
        for (int l = 0; l < L; ++l) {
            net.weights[l] -= cfg.lr * grads.weights[l];
            net.biases[l] -= cfg.lr * grads.biases[l];
        }
        return;
    }
    double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step));
    double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step));
    for (int l = 0; l < L; ++l) {
        state.m_w[l] = cfg.beta1 * state.m_w[l] + (1.0 - cfg.beta1) * grads.weights[l];
        state.v_w[l] = cfg.beta2 * state.v_w[l].array() +
                       (1.0 - cfg.beta2) * grads.weights[l].array().square();
        state.m_b[l] = cfg.beta1 * state.m_b[l] + (1.0 - cfg.beta1) * grads.biases[l];
        state.v_b[l] = cfg.beta2 * state.v_b[l].array() +
                       (1.0 - cfg.beta2) * grads.biases[l].array().square();

        net.weights[l].array() -= cfg.lr * (state.m_w[l].array() / bc1) /
                                  ((state.v_w[l].array() / bc2).sqrt() + cfg.eps);
        net.biases[l].array() -= cfg.lr * (state.m_b[l].array() / bc1) /
                                 ((state.v_b[l].array() / bc2).sqrt() + cfg.eps);
    }
}

Eigen::VectorXd time_embedding(int t, int dim, int horizon) {
    if (dim < 2 || dim % 2 != 0) {
        throw std::invalid_argument("time_embedding: dim must be even and >= 2");
    }
    if (t < 1 || t > horizon) {
        throw std::invalid_argument("time_embedding: t out of [1, horizon]");
    }
    const int half = dim / 2;
    Eigen::VectorXd emb(dim);
    // frequencies span [1, 1/10000) geometrically, scaled to the horizon
    for (int i = 0; i < half; ++i) {
        double freq = std::exp(-std::log(10000.0) * static_cast<double>(i) / half);
        double phase = static_cast<double>(t) * freq;
        emb[2 * i] = std::sin(phase);
        emb[2 * i + 1] = std::cos(phase);
    }
    return emb;
}

} // namespace dmsynth
