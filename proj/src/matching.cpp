#include "dmsynth/matching.hpp"

#include <cmath>
#include <stdexcept>

#include "dmsynth/dataset.hpp"

namespace dmsynth {

FeatureBatch FeatureBatch::from_dataset(const LabeledDataset& data, const FeatureFn& psi,
                                        BatchSource source) {
    FeatureBatch batch;
    batch.source = source;
    batch.features.reserve(data.size());
    for (const auto& xi : data.x) batch.features.push_back(psi(xi));
    return batch;
}

namespace {

void check_batches(const FeatureBatch& a, const FeatureBatch& b) {
    if (a.features.empty() || b.features.empty()) {
        throw std::invalid_argument("mmd: empty feature batch");
    }
    if (a.features.front().size() != b.features.front().size()) {
        throw std::invalid_argument("mmd: feature dimension mismatch");
    }
}

Eigen::VectorXd batch_mean(const FeatureBatch& b) {
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(b.features.front().size());
    for (const auto& f : b.features) mean += f;
    return mean / static_cast<double>(b.features.size());
}

} // namespace

double mmd_sq_linear(const FeatureBatch& a, const FeatureBatch& b) {
    check_batches(a, b);
    return (batch_mean(a) - batch_mean(b)).squaredNorm();
}

double mmd_sq_rbf(const FeatureBatch& a, const FeatureBatch& b, double bandwidth) {
    check_batches(a, b);
    if (!(bandwidth > 0.0)) throw std::invalid_argument("mmd_sq_rbf: bandwidth must be > 0");
    const double inv = 1.0 / (2.0 * bandwidth * bandwidth);
    auto kernel_sum = [inv](const std::vector<Eigen::VectorXd>& u,
                            const std::vector<Eigen::VectorXd>& v) {
        double s = 0.0;
        for (const auto& ui : u) {
            for (const auto& vj : v) {
                s += std::exp(-(ui - vj).squaredNorm() * inv);
            }
        }
        return s;
    };
    const double n = static_cast<double>(a.features.size());
    const double m = static_cast<double>(b.features.size());
    return kernel_sum(a.features, a.features) / (n * n) +
           kernel_sum(b.features, b.features) / (m * m) -
           2.0 * kernel_sum(a.features, b.features) / (n * m);
}

double batch_mmd_loss(const std::vector<Eigen::VectorXd>& residuals) {
    if (residuals.empty()) throw std::invalid_argument("batch_mmd_loss: empty residuals");
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(residuals.front().size());
    for (const auto& r : residuals) {
        if (r.size() != mean.size()) {
            throw std::invalid_argument("batch_mmd_loss: residual dimension mismatch");
        }
        mean += r;
    }
    mean /= static_cast<double>(residuals.size());
    return mean.squaredNorm();
}

CombinedLossResult combined_loss(const DenseNet& denoiser, int time_dim,
                                 const NoiseSchedule& sched,
                                 const std::vector<LossBatchItem>& batch,
                                 const LossConfig& cfg, Rng& rng, ParamGrads* grads,
                                 ConditionTableGrads* cond_grads) {
    if (batch.empty()) throw std::invalid_argument("combined_loss: empty batch");
    const int n = static_cast<int>(batch.size());
    const int d = static_cast<int>(batch.front().x0.size());
    NetPredictor predictor(denoiser, time_dim, sched.T);

    std::vector<Tape> tapes(grads ? n : 0);
    std::vector<Eigen::VectorXd> inputs;
    if (grads) inputs.resize(n);

    CombinedLossResult result;
    result.residuals.reserve(n);
    std::vector<int> ts(n);
    std::vector<double> weights(n, 1.0);
    Eigen::VectorXd mean_r = Eigen::VectorXd::Zero(d);

    for (int i = 0; i < n; ++i) {
        const auto& item = batch[i];
        int t = 1 + static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(sched.T)));
        ts[i] = t;
        Eigen::VectorXd eps = rng.normal_vector(d);
        Eigen::VectorXd x_t = forward_marginal_sample(sched, item.x0, t, eps);
        Eigen::VectorXd in = predictor.make_input(x_t, t, item.cond);
        Eigen::VectorXd pred =
            grads ? net_forward(denoiser, in, &tapes[i]) : net_forward(denoiser, in);
        if (!pred.allFinite()) throw std::runtime_error("combined_loss: non-finite denoiser output");
        if (grads) inputs[i] = std::move(in);
        Eigen::VectorXd r = eps - pred;
        if (cfg.weighting == LossWeighting::SnrWeighted && t > 1) {
            double beta = sched.beta_at(t);
            double sig2 = sched.sigma_at(t) * sched.sigma_at(t);
            weights[i] = beta * beta /
                         (2.0 * sig2 * sched.alpha_at(t) * (1.0 - sched.alpha_bar_at(t)));
        }
        result.simple += weights[i] * r.squaredNorm();
        mean_r += r;
        result.residuals.push_back(std::move(r));
    }
    result.simple /= n;
    mean_r /= n;
    result.mmd = mean_r.squaredNorm();
    result.total = result.simple + cfg.gamma * result.mmd;

    if (grads) {
        for (int i = 0; i < n; ++i) {
            // d total / d pred_i = -(2/n) (w_i r_i + gamma * mean_r)
            Eigen::VectorXd out_grad =
                (-2.0 / n) * (weights[i] * result.residuals[i] + cfg.gamma * mean_r);
            ParamGrads g = net_backward(denoiser, tapes[i], out_grad);
            if (cond_grads) {
                const auto& cond = batch[i].cond;
                int offset = d + time_dim;
                cond_grads->accumulate(cond,
                                       g.input.segment(offset, cond.class_part.size()));
            }
            grads->add(g);
        }
    }
    return result;
}

ObjectiveReport synthesis_objective_report(const LabeledDataset& real,
                                           const LabeledDataset& synthetic,
                                           const FeatureFn& psi, const DenseNet& probe,
                                           double lambda) {
    real.validate();
    synthetic.validate();
    if (real.num_classes != synthetic.num_classes) {
        throw std::invalid_argument("synthesis_objective_report: class-label mismatch");
    }
    ObjectiveReport report;
    report.lambda = lambda;
    report.mmd_sq =
        mmd_sq_linear(FeatureBatch::from_dataset(real, psi, BatchSource::Real),
                      FeatureBatch::from_dataset(synthetic, psi, BatchSource::Synthetic));

    double ce = 0.0;
    for (std::size_t i = 0; i < synthetic.size(); ++i) {
        Eigen::VectorXd p = net_forward(probe, synthetic.x[i]);
        double py = std::max(p[synthetic.y[i]], 1e-12);
        ce += -std::log(py);
    }
    report.conditional_divergence = ce / static_cast<double>(synthetic.size());
    report.cardinality_term = lambda * static_cast<double>(synthetic.size());
    report.combined = report.mmd_sq + report.conditional_divergence - report.cardinality_term;
    return report;
}

} // namespace dmsynth
