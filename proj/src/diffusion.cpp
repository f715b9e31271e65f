#include "dmsynth/diffusion.hpp"

#include <cmath>
#include <stdexcept>

namespace dmsynth {

NoiseSchedule make_schedule(int T, double beta_start, double beta_end) {
    if (T < 1) throw std::invalid_argument("make_schedule: T must be >= 1");
    if (!(beta_start > 0.0) || !(beta_start <= beta_end) || !(beta_end < 1.0)) {
        throw std::invalid_argument("make_schedule: require 0 < beta_start <= beta_end < 1");
    }
    NoiseSchedule s;
    s.T = T;
    s.beta.resize(T);
    s.alpha.resize(T);
    s.alpha_bar.resize(T);
    s.sigma.resize(T);
    double cum = 1.0;
    for (int t = 1; t <= T; ++t) {
        double frac = (T == 1) ? 0.0 : static_cast<double>(t - 1) / (T - 1);
        double beta = beta_start + (beta_end - beta_start) * frac;
        s.beta[t - 1] = beta;
        s.alpha[t - 1] = 1.0 - beta;
        cum *= s.alpha[t - 1];
        s.alpha_bar[t - 1] = cum;
        s.sigma[t - 1] = (t == 1) ? 0.0 : std::sqrt(beta);
    }
    return s;
}

Eigen::VectorXd forward_marginal_sample(const NoiseSchedule& sched,
                                        const Eigen::VectorXd& x0, int t,
                                        const Eigen::VectorXd& eps) {
    if (t < 1 || t > sched.T) throw std::invalid_argument("forward_marginal_sample: t out of range");
    if (eps.size() != x0.size()) {
        throw std::invalid_argument("forward_marginal_sample: eps dimension mismatch");
    }
    double ab = sched.alpha_bar_at(t);
    return std::sqrt(ab) * x0 + std::sqrt(1.0 - ab) * eps;
}

Eigen::VectorXd NetPredictor::make_input(const Eigen::VectorXd& x_t, int t,
                                         const Condition& cond) const {
    Eigen::VectorXd temb = time_embedding(t, time_dim_, horizon_);
    Eigen::VectorXd in(x_t.size() + temb.size() + cond.class_part.size() +
                       cond.visual_part.size());
    in << x_t, temb, cond.class_part, cond.visual_part;
    return in;
}

Eigen::VectorXd NetPredictor::predict(const Eigen::VectorXd& x_t, int t,
                                      const Condition& cond) const {
    return net_forward(*net_, make_input(x_t, t, cond));
}

DiffusionLossResult diffusion_loss(const NoisePredictor& denoiser,
                                   const NoiseSchedule& sched,
                                   const std::vector<LossBatchItem>& batch, Rng& rng,
                                   bool snr_weighted) {
    if (batch.empty()) throw std::invalid_argument("diffusion_loss: empty batch");
    DiffusionLossResult result;
    double acc = 0.0;
    for (const auto& item : batch) {
        int t = 1 + static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(sched.T)));
        Eigen::VectorXd eps = rng.normal_vector(static_cast<int>(item.x0.size()));
        Eigen::VectorXd x_t = forward_marginal_sample(sched, item.x0, t, eps);
        Eigen::VectorXd pred = denoiser.predict(x_t, t, item.cond);
        if (!pred.allFinite()) throw std::runtime_error("diffusion_loss: non-finite denoiser output");
        Eigen::VectorXd r = eps - pred;
        double term = r.squaredNorm();
        if (snr_weighted && t > 1) {
            double beta = sched.beta_at(t);
            double sig2 = sched.sigma_at(t) * sched.sigma_at(t);
            term *= beta * beta / (2.0 * sig2 * sched.alpha_at(t) * (1.0 - sched.alpha_bar_at(t)));
        }
        acc += term;
        result.residuals.push_back(std::move(r));
        result.timesteps.push_back(t);
    }
    result.loss = acc / static_cast<double>(batch.size());
    return result;
}

GuidedNoise guided_noise(const NoisePredictor& denoiser, const NoiseSchedule& sched,
                         const Eigen::VectorXd& x_t, int t, const Condition& cond,
                         const Condition& null_cond, double w) {
    Eigen::VectorXd eps_cond = denoiser.predict(x_t, t, cond);
    Eigen::VectorXd eps_uncond = denoiser.predict(x_t, t, null_cond);
    GuidedNoise g;
    // (1 - w) u + w c rather than u + w (c - u): identical algebra, but the
    // w = 0 and w = 1 reductions are then exact in floating point
    g.eps_hat = (1.0 - w) * eps_uncond + w * eps_cond;
    g.score_diff = (eps_cond - eps_uncond) / std::sqrt(1.0 - sched.alpha_bar_at(t));
    return g;
}

Eigen::VectorXd ancestral_step_between(const NoisePredictor& denoiser,
                                       const NoiseSchedule& sched,
                                       const Eigen::VectorXd& x_t, int t_hi, int t_lo,
                                       const Condition& cond, const Condition& null_cond,
                                       double w, Rng& rng) {
    if (t_hi < 1 || t_hi > sched.T || t_lo < 0 || t_lo >= t_hi) {
        throw std::invalid_argument("ancestral_step_between: bad timestep pair");
    }
    if (!x_t.allFinite()) throw std::runtime_error("ancestral_step_between: non-finite state");

    GuidedNoise g = guided_noise(denoiser, sched, x_t, t_hi, cond, null_cond, w);

    double ab_hi = sched.alpha_bar_at(t_hi);
    double ab_lo = (t_lo == 0) ? 1.0 : sched.alpha_bar_at(t_lo);
    double alpha_eff = ab_hi / ab_lo;
    double beta_eff = 1.0 - alpha_eff;

    Eigen::VectorXd mean =
        (x_t - (beta_eff / std::sqrt(1.0 - ab_hi)) * g.eps_hat) / std::sqrt(alpha_eff);
    if (t_lo == 0) return mean; // final step is deterministic

    Eigen::VectorXd z = rng.normal_vector(static_cast<int>(x_t.size()));
    Eigen::VectorXd out = mean + std::sqrt(beta_eff) * z;
    if (!out.allFinite()) throw std::runtime_error("ancestral_step_between: diverged");
    return out;
}

Eigen::VectorXd ancestral_step(const NoisePredictor& denoiser, const NoiseSchedule& sched,
                               const Eigen::VectorXd& x_t, int t, const Condition& cond,
                               const Condition& null_cond, double w, Rng& rng) {
    return ancestral_step_between(denoiser, sched, x_t, t, t - 1, cond, null_cond, w, rng);
}

LatentInit latent_prior_init(const NoiseSchedule& sched, const Eigen::VectorXd& x_real,
                             double strength, Rng& rng) {
    if (!(strength > 0.0) || strength > 1.0) {
        throw std::invalid_argument("latent_prior_init: strength out of (0, 1]");
    }
    int t0 = static_cast<int>(std::lround(strength * sched.T));
    t0 = std::max(1, std::min(sched.T, t0));
    LatentInit init;
    init.t0 = t0;
    Eigen::VectorXd eps = rng.normal_vector(static_cast<int>(x_real.size()));
    init.x_t0 = forward_marginal_sample(sched, x_real, t0, eps);
    return init;
}

std::vector<int> strided_timesteps(int t_start, int num_steps) {
    if (t_start < 1) throw std::invalid_argument("strided_timesteps: t_start must be >= 1");
    if (num_steps < 1) throw std::invalid_argument("strided_timesteps: num_steps must be >= 1");
    num_steps = std::min(num_steps, t_start);
    std::vector<int> ladder;
    ladder.reserve(num_steps);
    if (num_steps == 1) {
        ladder.push_back(t_start);
        return ladder;
    }
    int prev = -1;
    for (int i = 0; i < num_steps; ++i) {
        double frac = static_cast<double>(num_steps - 1 - i) / (num_steps - 1);
        int t = 1 + static_cast<int>(std::lround(frac * (t_start - 1)));
        if (t != prev) ladder.push_back(t);
        prev = t;
    }
    return ladder; // strictly decreasing, starts at t_start, ends at 1
}

Eigen::VectorXd sample(const NoisePredictor& denoiser, const NoiseSchedule& sched,
                       const SamplerConfig& cfg, const Condition& cond,
                       const Condition& null_cond,
                       const std::optional<Eigen::VectorXd>& prior_sample) {
    if (cfg.num_steps < 1 || cfg.num_steps > sched.T) {
        throw std::invalid_argument("sample: num_steps out of [1, T]");
    }
    Rng rng(cfg.seed);

    Eigen::VectorXd x;
    int t_start;
    if (cfg.prior == PriorKind::Latent) {
        if (!prior_sample) throw std::invalid_argument("sample: latent prior needs a real sample");
        LatentInit init = latent_prior_init(sched, *prior_sample, cfg.strength, rng);
        x = init.x_t0;
        t_start = init.t0;
    } else {
        x = rng.normal_vector(denoiser.data_dim());
        t_start = sched.T;
    }

    std::vector<int> ladder = strided_timesteps(t_start, cfg.num_steps);
    for (std::size_t i = 0; i < ladder.size(); ++i) {
        int t_hi = ladder[i];
        int t_lo = (i + 1 < ladder.size()) ? ladder[i + 1] : 0;
        x = ancestral_step_between(denoiser, sched, x, t_hi, t_lo, cond, null_cond,
                                   cfg.guidance_scale, rng);
    }
    return x;
}

} // namespace dmsynth
