#pragma once

#include <vector>

#include <Eigen/Dense>

#include "dmsynth/conditioning.hpp"
#include "dmsynth/dataset.hpp"
#include "dmsynth/diffusion.hpp"
#include "dmsynth/nets.hpp"

namespace dmsynth {

enum class BatchSource { Real, Synthetic };

struct FeatureBatch {
    std::vector<Eigen::VectorXd> features;
    BatchSource source = BatchSource::Real;

    static FeatureBatch from_dataset(const LabeledDataset& data, const FeatureFn& psi,
                                     BatchSource source);
};

// Squared Euclidean norm of the mean-embedding difference (linear kernel).
double mmd_sq_linear(const FeatureBatch& a, const FeatureBatch& b);

// Biased V-statistic with the Gaussian kernel exp(-||u - v||^2 / (2 h^2)).
double mmd_sq_rbf(const FeatureBatch& a, const FeatureBatch& b, double bandwidth);

// Squared norm of the mean residual over a batch; lower-bounded by zero and
// upper-bounded by the mean per-sample squared norm (Jensen).
double batch_mmd_loss(const std::vector<Eigen::VectorXd>& residuals);

enum class LossWeighting { Simple, SnrWeighted };

struct LossConfig {
    double gamma = 0.05;
    LossWeighting weighting = LossWeighting::Simple;
};

struct CombinedLossResult {
    double total = 0.0;
    double simple = 0.0;
    double mmd = 0.0;
    std::vector<Eigen::VectorXd> residuals;
};

// L = L_simple + gamma * L_mmd with one shared (t, eps) draw per sample
// across both terms. When grads is non-null, parameter gradients for the
// denoiser (and optionally the condition table) are accumulated.
CombinedLossResult combined_loss(const DenseNet& denoiser, int time_dim,
                                 const NoiseSchedule& sched,
                                 const std::vector<LossBatchItem>& batch,
                                 const LossConfig& cfg, Rng& rng,
                                 ParamGrads* grads = nullptr,
                                 ConditionTableGrads* cond_grads = nullptr);

struct ObjectiveReport {
    double mmd_sq = 0.0;
    double conditional_divergence = 0.0;
    double cardinality_term = 0.0; // lambda * |S|
    double lambda = 0.0;
    double combined = 0.0; // mmd_sq + conditional_divergence - lambda * |S|
};

// Data term: linear MMD over psi-features. Conditional term: mean
// cross-entropy of the probe's predictive distribution (trained on real
// data) against the synthetic one-hot label. Cardinality term: lambda * |S|.
ObjectiveReport synthesis_objective_report(const LabeledDataset& real,
                                           const LabeledDataset& synthetic,
                                           const FeatureFn& psi, const DenseNet& probe,
                                           double lambda);

} // namespace dmsynth
