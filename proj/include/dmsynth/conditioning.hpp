#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "dmsynth/rng.hpp"

namespace dmsynth {

// Feature map used for visual guidance and evaluation MMD. Identity or a
// trained encoder wrapped via encoder_fn().
using FeatureFn = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

FeatureFn identity_feature_fn();

// Class-token table learned jointly with the denoiser. The null embedding is
// a separate learned row used for classifier-free guidance.
struct ConditionTable {
    Eigen::MatrixXd class_embeddings; // num_classes x embed_dim
    Eigen::VectorXd null_embedding;   // embed_dim
    int visual_dim = 0;

    int num_classes() const { return static_cast<int>(class_embeddings.rows()); }
    int embed_dim() const { return static_cast<int>(class_embeddings.cols()); }
    int condition_dim() const { return embed_dim() + visual_dim; }

    static ConditionTable init(int num_classes, int embed_dim, int visual_dim,
                               std::uint64_t seed);
};

struct Condition {
    Eigen::VectorXd class_part;
    Eigen::VectorXd visual_part; // zeros when no visual guidance requested
    bool is_null = false;
    int label = -1; // -1 for the null condition

    Eigen::VectorXd concat() const;
};

// Mean encoder feature over min(m, |class_samples|) samples drawn without
// replacement.
Eigen::VectorXd visual_guidance(const FeatureFn& psi,
                                const std::vector<Eigen::VectorXd>& class_samples,
                                int m, Rng& rng);

Condition build_condition(const ConditionTable& table, int label,
                          const std::optional<Eigen::VectorXd>& visual = std::nullopt);

Condition null_condition(const ConditionTable& table);

// With probability p returns the null condition, else cond unchanged.
Condition drop_condition(const Condition& cond, const ConditionTable& table, double p,
                         Rng& rng);

// Adaptive-moment state for the embedding table (trained jointly with the
// denoiser; gradients arrive as input-gradient slices from the denoiser).
struct ConditionTableOptimizer {
    double lr = 1e-3, beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
    std::int64_t step = 0;
    Eigen::MatrixXd m_class, v_class;
    Eigen::VectorXd m_null, v_null;

    static ConditionTableOptimizer init(const ConditionTable& table, double lr);
};

struct ConditionTableGrads {
    Eigen::MatrixXd class_embeddings;
    Eigen::VectorXd null_embedding;

    static ConditionTableGrads zeros_like(const ConditionTable& table);
    // Route a class_part gradient to the row the condition came from.
    void accumulate(const Condition& cond, const Eigen::VectorXd& class_part_grad);
};

void condition_table_step(ConditionTable& table, const ConditionTableGrads& grads,
                          ConditionTableOptimizer& opt);

} // namespace dmsynth
