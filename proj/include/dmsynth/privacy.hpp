#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "dmsynth/taskbench.hpp"

namespace dmsynth {

// log(p / (1 - p)) with p clamped to [1e-6, 1 - 1e-6]; rejects p outside [0, 1].
double logit_confidence(double prob);

enum class LiraVariant { Online, Offline, FixedVariance };

// Per-target-example confidence lists from shadow models that did (IN) and
// did not (OUT) train on the example.
struct ShadowEnsemble {
    int num_shadows = 0;
    std::vector<std::vector<double>> in_confs;
    std::vector<std::vector<double>> out_confs;

    std::size_t size() const { return in_confs.size(); }
    void validate() const; // every example needs >= 1 IN and >= 1 OUT entry
};

struct GaussianPair {
    double mu_in = 0.0;
    double sigma_in = 0.0;
    double mu_out = 0.0;
    double sigma_out = 0.0;
};

// Sample means with population (divide-by-n) standard deviations, floored at
// 1e-3. FixedVariance replaces every sigma with one value pooled across all
// examples and both groups.
std::vector<GaussianPair> fit_lira(const ShadowEnsemble& ensemble, LiraVariant variant);

// Higher score means more likely member. Online and FixedVariance use the
// Gaussian log-density difference; Offline standardizes against the OUT
// distribution only.
double lira_score(double target_conf, const GaussianPair& fit, LiraVariant variant);

struct RocCurve {
    std::vector<std::pair<double, double>> points; // (fpr, tpr), monotone to (1, 1)

    // TPR at the largest threshold whose FPR is <= the given level
    double tpr_at_fpr(double fpr) const;
};

RocCurve roc_low_fpr(const std::vector<double>& scores, const std::vector<int>& membership);

enum class MiaArm { Direct, Synthetic };

struct MiaConfig {
    int num_shadows = 8; // even, >= 4
    MiaArm arm = MiaArm::Direct;
    int pool_size = 500;        // privacy pool drawn from the task train split
    int overfit_epochs_mult = 10; // classifier epochs multiplier, both arms
    LiraVariant variant = LiraVariant::Online;
};

struct MiaReport {
    std::vector<double> scores;
    std::vector<int> membership;
    RocCurve roc;
    double tpr_at_low_fpr = 0.0;          // FPR = 0.001
    double shuffled_tpr_at_low_fpr = 0.0; // permutation control at the same level
};

// Splits a privacy pool into member and non-member halves, trains the target
// model on the members (directly, or on data synthesized by a member-trained
// generator), calibrates LiRA with shadow models holding each example IN for
// exactly half the shadows, and reports the low-FPR operating point.
MiaReport run_mia_experiment(const Task& task, const MiaConfig& cfg,
                             const PipelineToggles& toggles, const TrainConfig& tcfg,
                             const SamplerConfig& sampler, std::uint64_t seed);

} // namespace dmsynth
