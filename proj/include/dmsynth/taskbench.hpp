#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dmsynth/dataset.hpp"
#include "dmsynth/diffusion.hpp"
#include "dmsynth/matching.hpp"

namespace dmsynth {

enum class TaskFamily { GaussianMixture, RingMixture };

struct OodShift {
    Eigen::VectorXd mean_shift;
    double scale = 1.0;
};

struct TaskSpec {
    int num_classes = 3;
    int dim = 2;
    TaskFamily family = TaskFamily::GaussianMixture;
    int components_per_class = 2;
    double separation = 4.0;
    int train_size = 3000;
    int test_size = 2000;
    std::optional<OodShift> ood_shift;

    void validate() const;

    // 3 classes, dim 2, 2 components per class, separation 4, 3000/2000
    // train/test, OOD mean shift of 0.5 * separation on the first axis
    static TaskSpec default_task();
};

struct Task {
    TaskSpec spec;
    LabeledDataset train;
    LabeledDataset test;
    std::optional<LabeledDataset> ood_test;
    LabeledDataset pretrain_pool;
};

// Deterministic class-conditional mixture task. The pretrain pool is drawn
// from a widened variant of every class component (means jittered by
// 0.5 * separation, covariance scaled x2).
Task make_task(const TaskSpec& spec, std::uint64_t seed);

struct PipelineToggles {
    bool finetune = false;
    bool latent_prior = false;
    bool visual_guidance = false;
    bool mmd_loss = false;

    // mmd_loss or visual_guidance requires finetune
    void validate() const;

    bool operator==(const PipelineToggles&) const = default;
};

struct TrainConfig {
    int T = 200;
    double beta_start = 1e-4;
    double beta_end = 0.02;

    int time_dim = 16;
    int embed_dim = 16;
    std::vector<int> denoiser_hidden = {128, 128};

    std::vector<int> encoder_hidden = {64, 64};
    int encoder_feature_dim = 8; // also the width of the visual-guidance slot
    int encoder_epochs = 30;

    int pretrain_steps = 2500;
    int finetune_steps = 1500;
    int batch = 64;
    double lr = 1e-3;
    double cond_drop = 0.1;
    double gamma = 0.05;
    LossWeighting weighting = LossWeighting::Simple;
    int visual_m = 32;

    std::vector<int> classifier_hidden = {64};
    int classifier_epochs = 200;
    int classifier_batch = 64;
    double classifier_lr = 1e-3;
};

struct CurvePoint {
    int step = 0;
    double total = 0.0;
    double simple = 0.0;
    double mmd = 0.0;
    std::string phase; // "pretrain" or "finetune"
};

struct GeneratorCheckpoint {
    DenseNet denoiser;
    ConditionTable table;
    DenseNet encoder; // classifier whose last hidden layer provides psi
    NoiseSchedule sched;
    TrainConfig cfg;
    PipelineToggles toggles;
    std::vector<CurvePoint> curve;
};

// Thrown when the training loss goes non-finite; carries the curve recorded
// up to the failing step so callers can dump it.
struct TrainingDiverged : std::runtime_error {
    std::vector<CurvePoint> curve;
    TrainingDiverged(const std::string& what, std::vector<CurvePoint> c)
        : std::runtime_error(what), curve(std::move(c)) {}
};

// Pretrains on the pool, then optionally finetunes on the target train split
// per the toggles. Deterministic given (task, toggles, cfg, seed).
GeneratorCheckpoint train_generator(const Task& task, const PipelineToggles& toggles,
                                    const TrainConfig& cfg, std::uint64_t seed);

// Feature map: post-activation of the encoder's last hidden layer.
FeatureFn encoder_feature_fn(const DenseNet& encoder);

// Class-balanced synthesis (counts differ by at most 1). With latent_prior
// the reverse chain starts from a partially noised same-class member of
// real_pool; labels come from the conditioning class.
LabeledDataset synthesize_dataset(const GeneratorCheckpoint& gen, int n,
                                  const PipelineToggles& toggles,
                                  const LabeledDataset& real_pool,
                                  const SamplerConfig& sampler, std::uint64_t seed);

DenseNet train_classifier(const LabeledDataset& data, const NetSpec& spec, int epochs,
                          int batch, double lr, std::uint64_t seed);

double classifier_accuracy(const DenseNet& clf, const LabeledDataset& data);

// Fixed-budget classifier; top-1 accuracy per test set.
std::vector<double> train_and_eval_classifier(const LabeledDataset& train,
                                              const std::vector<const LabeledDataset*>& tests,
                                              const TrainConfig& cfg, std::uint64_t seed);

struct ArmStats {
    std::vector<double> per_seed;
    double mean = 0.0;
    double stddev = 0.0; // population convention

    static ArmStats from(std::vector<double> per_seed);
};

struct ExperimentResult {
    ArmStats real_only;
    ArmStats synthetic_only;
    ArmStats combined;
    ArmStats eval_mmd; // linear MMD between psi-features of test and synthetic
};

ExperimentResult run_replace_augment(const Task& task, const PipelineToggles& toggles,
                                     const TrainConfig& cfg, const SamplerConfig& sampler,
                                     const std::vector<std::uint64_t>& seeds);

struct ScalePoint {
    double k = 0.0;
    ArmStats accuracy;
    ArmStats ood_accuracy; // empty when the task has no OOD split
};

std::vector<ScalePoint> run_scale_sweep(const Task& task, const PipelineToggles& toggles,
                                        const TrainConfig& cfg, const SamplerConfig& sampler,
                                        const std::vector<double>& k_list,
                                        const std::vector<std::uint64_t>& seeds);

double spearman_rho(const std::vector<double>& xs, const std::vector<double>& ys);

struct AblationRow {
    PipelineToggles toggles;
    ArmStats accuracy; // synthetic-only arm
};

// The fixed ten-row toggle grid: baseline, the four finetune variants, then
// the same five with the latent prior on.
std::vector<PipelineToggles> ablation_toggle_rows();

std::vector<AblationRow> run_ablation_grid(const Task& task, const TrainConfig& cfg,
                                           const SamplerConfig& sampler,
                                           const std::vector<std::uint64_t>& seeds);

} // namespace dmsynth
