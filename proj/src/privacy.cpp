#include "dmsynth/privacy.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace dmsynth {

namespace {

std::uint64_t subseed(std::uint64_t seed, std::uint64_t stream) {
    Rng r(seed);
    return r.split(stream).next_u64();
}

} // namespace

double logit_confidence(double prob) {
    if (!(prob >= 0.0) || !(prob <= 1.0)) {
        throw std::invalid_argument("logit_confidence: probability out of [0, 1]");
    }
    double p = std::min(1.0 - 1e-6, std::max(1e-6, prob));
    return std::log(p / (1.0 - p));
}

void ShadowEnsemble::validate() const {
    if (in_confs.size() != out_confs.size()) {
        throw std::invalid_argument("ShadowEnsemble: IN/OUT list count mismatch");
    }
    for (std::size_t i = 0; i < in_confs.size(); ++i) {
        if (in_confs[i].empty() || out_confs[i].empty()) {
            throw std::invalid_argument("ShadowEnsemble: example " + std::to_string(i) +
                                        " lacks IN or OUT confidences");
        }
        for (double c : in_confs[i]) {
            if (!std::isfinite(c)) {
                throw std::invalid_argument("ShadowEnsemble: non-finite confidence");
            }
        }
        for (double c : out_confs[i]) {
            if (!std::isfinite(c)) {
                throw std::invalid_argument("ShadowEnsemble: non-finite confidence");
            }
        }
    }
}

namespace {

constexpr double kSigmaFloor = 1e-3;

std::pair<double, double> mean_and_population_sd(const std::vector<double>& xs) {
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= static_cast<double>(xs.size());
    double var = 0.0;
    for (double x : xs) var += (x - mean) * (x - mean);
    var /= static_cast<double>(xs.size());
    return {mean, std::sqrt(var)};
}

} // namespace

std::vector<GaussianPair> fit_lira(const ShadowEnsemble& ensemble, LiraVariant variant) {
    ensemble.validate();
    std::vector<GaussianPair> fits(ensemble.size());
    for (std::size_t i = 0; i < ensemble.size(); ++i) {
        auto [mi, si] = mean_and_population_sd(ensemble.in_confs[i]);
        auto [mo, so] = mean_and_population_sd(ensemble.out_confs[i]);
        fits[i] = {mi, std::max(si, kSigmaFloor), mo, std::max(so, kSigmaFloor)};
    }
    if (variant == LiraVariant::FixedVariance) {
        double ss = 0.0;
        double count = 0.0;
        for (std::size_t i = 0; i < ensemble.size(); ++i) {
            for (double c : ensemble.in_confs[i]) {
                ss += (c - fits[i].mu_in) * (c - fits[i].mu_in);
            }
            for (double c : ensemble.out_confs[i]) {
                ss += (c - fits[i].mu_out) * (c - fits[i].mu_out);
            }
            count += static_cast<double>(ensemble.in_confs[i].size() +
                                         ensemble.out_confs[i].size());
        }
        double pooled = std::max(std::sqrt(ss / count), kSigmaFloor);
        for (GaussianPair& f : fits) {
            f.sigma_in = pooled;
            f.sigma_out = pooled;
        }
    }
    return fits;
}

double lira_score(double target_conf, const GaussianPair& fit, LiraVariant variant) {
    if (variant == LiraVariant::Offline) {
        return (target_conf - fit.mu_out) / fit.sigma_out;
    }
    double zi = (target_conf - fit.mu_in) / fit.sigma_in;
    double zo = (target_conf - fit.mu_out) / fit.sigma_out;
    return -std::log(fit.sigma_in) - 0.5 * zi * zi + std::log(fit.sigma_out) +
           0.5 * zo * zo;
}

RocCurve roc_low_fpr(const std::vector<double>& scores,
                     const std::vector<int>& membership) {
    if (scores.size() != membership.size() || scores.empty()) {
        throw std::invalid_argument("roc_low_fpr: size mismatch or empty input");
    }
    std::size_t pos = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (!std::isfinite(scores[i])) {
            throw std::invalid_argument("roc_low_fpr: non-finite score");
        }
        if (membership[i]) ++pos;
    }
    std::size_t neg = scores.size() - pos;
    if (pos == 0 || neg == 0) {
        throw std::invalid_argument("roc_low_fpr: both classes must be present");
    }

    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0u);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

    RocCurve curve;
    curve.points.emplace_back(0.0, 0.0);
    std::size_t tp = 0, fp = 0, i = 0;
    while (i < order.size()) {
        // group tied scores: a threshold either admits all of them or none
        std::size_t j = i;
        while (j < order.size() && scores[order[j]] == scores[order[i]]) {
            if (membership[order[j]]) {
                ++tp;
            } else {
                ++fp;
            }
            ++j;
        }
        curve.points.emplace_back(static_cast<double>(fp) / static_cast<double>(neg),
                                  static_cast<double>(tp) / static_cast<double>(pos));
        i = j;
    }
    return curve;
}

double RocCurve::tpr_at_fpr(double fpr) const {
    double best = 0.0;
    for (const auto& [f, t] : points) {
        if (f <= fpr) best = std::max(best, t);
    }
    return best;
}

namespace {

LabeledDataset subset(const LabeledDataset& data, const std::vector<int>& idx,
                      const std::string& tag) {
    LabeledDataset out;
    out.num_classes = data.num_classes;
    out.dim = data.dim;
    out.split = tag;
    out.x.reserve(idx.size());
    out.y.reserve(idx.size());
    for (int i : idx) {
        out.x.push_back(data.x[i]);
        out.y.push_back(data.y[i]);
    }
    return out;
}

DenseNet train_target_model(const Task& task, const LabeledDataset& members,
                            const MiaConfig& cfg, const PipelineToggles& toggles,
                            const TrainConfig& tcfg, const SamplerConfig& sampler,
                            std::uint64_t seed) {
    NetSpec spec;
    spec.input_dim = members.dim;
    spec.hidden_dims = tcfg.classifier_hidden;
    spec.output_dim = members.num_classes;
    spec.final_activation = FinalActivation::Softmax;
    int epochs = tcfg.classifier_epochs * cfg.overfit_epochs_mult;

    if (cfg.arm == MiaArm::Direct) {
        return train_classifier(members, spec, epochs, tcfg.classifier_batch,
                                tcfg.classifier_lr, subseed(seed, 0));
    }
    Task member_task;
    member_task.spec = task.spec;
    member_task.train = members;
    member_task.test = members;
    member_task.pretrain_pool = task.pretrain_pool;
    GeneratorCheckpoint gen =
        train_generator(member_task, toggles, tcfg, subseed(seed, 1));
    LabeledDataset syn = synthesize_dataset(gen, static_cast<int>(members.size()),
                                            toggles, members, sampler, subseed(seed, 2));
    return train_classifier(syn, spec, epochs, tcfg.classifier_batch, tcfg.classifier_lr,
                            subseed(seed, 0));
}

double model_confidence(const DenseNet& clf, const Eigen::VectorXd& x, int y) {
    return logit_confidence(net_forward(clf, x)[y]);
}

} // namespace

MiaReport run_mia_experiment(const Task& task, const MiaConfig& cfg,
                             const PipelineToggles& toggles, const TrainConfig& tcfg,
                             const SamplerConfig& sampler, std::uint64_t seed) {
    toggles.validate();
    if (cfg.num_shadows < 4 || cfg.num_shadows % 2 != 0) {
        throw std::invalid_argument("run_mia_experiment: num_shadows must be even, >= 4");
    }
    int pool_size = std::min<int>(cfg.pool_size, static_cast<int>(task.train.size()));
    if (pool_size < 4 * task.train.num_classes) {
        throw std::invalid_argument("run_mia_experiment: privacy pool too small");
    }
    if (pool_size % 2 != 0) --pool_size;

    // the train split cycles classes, so a prefix pool stays balanced
    std::vector<int> pool(pool_size);
    std::iota(pool.begin(), pool.end(), 0);

    Rng root(seed);
    Rng split_rng = root.split(0);
    std::vector<int> perm = pool;
    for (int i = pool_size - 1; i > 0; --i) {
        int j = static_cast<int>(split_rng.uniform_int(static_cast<std::uint64_t>(i) + 1));
        std::swap(perm[i], perm[j]);
    }
    std::vector<int> member_flag(pool_size, 0);
    std::vector<int> member_idx;
    for (int r = 0; r < pool_size / 2; ++r) {
        member_flag[perm[r]] = 1;
        member_idx.push_back(perm[r]);
    }
    std::sort(member_idx.begin(), member_idx.end());
    LabeledDataset members = subset(task.train, member_idx, "members");

    // each pool example is IN for exactly half of the shadows
    const int S = cfg.num_shadows;
    Rng assign_rng = root.split(1);
    std::vector<std::vector<char>> in_shadow(pool_size, std::vector<char>(S, 0));
    std::vector<int> shadow_ids(S);
    for (int i = 0; i < pool_size; ++i) {
        std::iota(shadow_ids.begin(), shadow_ids.end(), 0);
        for (int r = 0; r < S / 2; ++r) {
            int j = r + static_cast<int>(assign_rng.uniform_int(
                            static_cast<std::uint64_t>(S - r)));
            std::swap(shadow_ids[r], shadow_ids[j]);
            in_shadow[i][shadow_ids[r]] = 1;
        }
    }

    ShadowEnsemble ensemble;
    ensemble.num_shadows = S;
    ensemble.in_confs.resize(pool_size);
    ensemble.out_confs.resize(pool_size);
    for (int s = 0; s < S; ++s) {
        std::vector<int> idx;
        for (int i = 0; i < pool_size; ++i) {
            if (in_shadow[i][s]) idx.push_back(pool[i]);
        }
        LabeledDataset shadow_data = subset(task.train, idx, "shadow");
        DenseNet shadow = train_target_model(task, shadow_data, cfg, toggles, tcfg,
                                             sampler, subseed(seed, 100 + s));
        for (int i = 0; i < pool_size; ++i) {
            double conf =
                model_confidence(shadow, task.train.x[pool[i]], task.train.y[pool[i]]);
            if (in_shadow[i][s]) {
                ensemble.in_confs[i].push_back(conf);
            } else {
                ensemble.out_confs[i].push_back(conf);
            }
        }
    }

    DenseNet target =
        train_target_model(task, members, cfg, toggles, tcfg, sampler, subseed(seed, 2));

    std::vector<GaussianPair> fits = fit_lira(ensemble, cfg.variant);
    MiaReport report;
    report.scores.resize(pool_size);
    report.membership = member_flag;
    for (int i = 0; i < pool_size; ++i) {
        double conf =
            model_confidence(target, task.train.x[pool[i]], task.train.y[pool[i]]);
        report.scores[i] = lira_score(conf, fits[i], cfg.variant);
    }
    report.roc = roc_low_fpr(report.scores, report.membership);
    report.tpr_at_low_fpr = report.roc.tpr_at_fpr(0.001);

    Rng shuffle_rng = root.split(2);
    std::vector<int> shuffled = member_flag;
    for (int i = pool_size - 1; i > 0; --i) {
        int j = static_cast<int>(shuffle_rng.uniform_int(static_cast<std::uint64_t>(i) + 1));
        std::swap(shuffled[i], shuffled[j]);
    }
    report.shuffled_tpr_at_low_fpr =
        roc_low_fpr(report.scores, shuffled).tpr_at_fpr(0.001);
    return report;
}

} // namespace dmsynth
