#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "dmsynth/conditioning.hpp"
#include "dmsynth/nets.hpp"
#include "dmsynth/rng.hpp"

namespace dmsynth {

// beta/alpha/alpha_bar/sigma arrays indexed by timestep t in 1..T
// (stored 0-based: beta[t-1] is the value at timestep t).
struct NoiseSchedule {
    int T = 0;
    Eigen::VectorXd beta;
    Eigen::VectorXd alpha;
    Eigen::VectorXd alpha_bar;
    Eigen::VectorXd sigma; // sigma_t^2 = beta_t, with sigma_1 = 0

    double beta_at(int t) const { return beta[t - 1]; }
    double alpha_at(int t) const { return alpha[t - 1]; }
    double alpha_bar_at(int t) const { return alpha_bar[t - 1]; }
    double sigma_at(int t) const { return sigma[t - 1]; }
};

NoiseSchedule make_schedule(int T, double beta_start, double beta_end);

enum class PriorKind { Gaussian, Latent };

struct SamplerConfig {
    double guidance_scale = 2.0;
    int num_steps = 30;
    PriorKind prior = PriorKind::Gaussian;
    double strength = 0.75; // latent prior only, in (0, 1]
    std::uint64_t seed = 0;
};

// x_t = sqrt(alpha_bar_t) x0 + sqrt(1 - alpha_bar_t) eps
Eigen::VectorXd forward_marginal_sample(const NoiseSchedule& sched,
                                        const Eigen::VectorXd& x0, int t,
                                        const Eigen::VectorXd& eps);

// Noise-prediction interface; lets tests substitute analytic stubs for the
// network-backed predictor.
class NoisePredictor {
public:
    virtual ~NoisePredictor() = default;
    virtual Eigen::VectorXd predict(const Eigen::VectorXd& x_t, int t,
                                    const Condition& cond) const = 0;
    virtual int data_dim() const = 0;
};

// Dense-net denoiser: input is [x_t | time_embedding | class_part | visual_part].
class NetPredictor : public NoisePredictor {
public:
    NetPredictor(const DenseNet& net, int time_dim, int horizon)
        : net_(&net), time_dim_(time_dim), horizon_(horizon) {}

    Eigen::VectorXd predict(const Eigen::VectorXd& x_t, int t,
                            const Condition& cond) const override;

    Eigen::VectorXd make_input(const Eigen::VectorXd& x_t, int t,
                               const Condition& cond) const;
    int data_dim() const override { return net_->spec.output_dim; }
    int time_dim() const { return time_dim_; }
    const DenseNet& net() const { return *net_; }

private:
    const DenseNet* net_;
    int time_dim_;
    int horizon_;
};

struct LossBatchItem {
    Eigen::VectorXd x0;
    Condition cond;
};

struct DiffusionLossResult {
    double loss = 0.0;
    std::vector<Eigen::VectorXd> residuals; // eps_i - eps_theta(x_t_i, t_i, cond_i)
    std::vector<int> timesteps;
};

// Mean per-sample squared residual norm over one uniform (t, eps) draw per
// sample. snr_weighted applies the beta^2 / (2 sigma^2 alpha (1 - alpha_bar))
// factor; the unweighted form is the default.
DiffusionLossResult diffusion_loss(const NoisePredictor& denoiser,
                                   const NoiseSchedule& sched,
                                   const std::vector<LossBatchItem>& batch, Rng& rng,
                                   bool snr_weighted = false);

struct GuidedNoise {
    Eigen::VectorXd eps_hat;
    // conditional score difference (eps_cond - eps_uncond) / sqrt(1 - alpha_bar_t)
    Eigen::VectorXd score_diff;
};

GuidedNoise guided_noise(const NoisePredictor& denoiser, const NoiseSchedule& sched,
                         const Eigen::VectorXd& x_t, int t, const Condition& cond,
                         const Condition& null_cond, double w);

// One reverse step from timestep t_hi down to t_lo (t_lo = t_hi - 1 for the
// plain chain; larger gaps implement the strided sampler). t_lo = 0 produces
// x0 with no injected noise.
Eigen::VectorXd ancestral_step_between(const NoisePredictor& denoiser,
                                       const NoiseSchedule& sched,
                                       const Eigen::VectorXd& x_t, int t_hi, int t_lo,
                                       const Condition& cond, const Condition& null_cond,
                                       double w, Rng& rng);

Eigen::VectorXd ancestral_step(const NoisePredictor& denoiser, const NoiseSchedule& sched,
                               const Eigen::VectorXd& x_t, int t, const Condition& cond,
                               const Condition& null_cond, double w, Rng& rng);

struct LatentInit {
    Eigen::VectorXd x_t0;
    int t0 = 0;
};

// t0 = round(strength * T) clamped to [1, T]; x_t0 is the forward marginal of
// the real sample at t0.
LatentInit latent_prior_init(const NoiseSchedule& sched, const Eigen::VectorXd& x_real,
                             double strength, Rng& rng);

// Guided reverse chain over an evenly strided subset of timesteps from the
// configured prior. prior_sample is required when cfg.prior is Latent.
Eigen::VectorXd sample(const NoisePredictor& denoiser, const NoiseSchedule& sched,
                       const SamplerConfig& cfg, const Condition& cond,
                       const Condition& null_cond,
                       const std::optional<Eigen::VectorXd>& prior_sample = std::nullopt);

// Evenly strided decreasing timestep ladder from t_start, num_steps entries.
std::vector<int> strided_timesteps(int t_start, int num_steps);

} // namespace dmsynth
