#include "dmsynth/taskbench.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>

#include "dmsynth/parallel.hpp"

namespace dmsynth {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

std::uint64_t subseed(std::uint64_t seed, std::uint64_t stream) {
    Rng r(seed);
    return r.split(stream).next_u64();
}

struct Component {
    Eigen::VectorXd mean;
    double stddev = 1.0;
};

// One entry per (class, component); deterministic in the spec alone.
std::vector<std::vector<Component>> component_layout(const TaskSpec& spec) {
    const int C = spec.num_classes;
    const int K = spec.components_per_class;
    std::vector<std::vector<Component>> layout(C);
    for (int c = 0; c < C; ++c) {
        for (int j = 0; j < K; ++j) {
            Component comp;
            comp.mean = Eigen::VectorXd::Zero(spec.dim);
            if (spec.family == TaskFamily::GaussianMixture) {
                comp.stddev = 1.0;
                if (spec.dim == 1) {
                    double center = spec.separation * (c - 0.5 * (C - 1));
                    double offset =
                        (K > 1) ? spec.separation / 4.0 * (j - 0.5 * (K - 1)) / (K - 1) : 0.0;
                    comp.mean[0] = center + offset;
                } else {
                    double ca = kTwoPi * c / C;
                    comp.mean[0] = spec.separation * std::cos(ca);
                    comp.mean[1] = spec.separation * std::sin(ca);
                    if (K > 1) {
                        double ja = kTwoPi * (static_cast<double>(j) / K +
                                              static_cast<double>(c) / (K * C));
                        comp.mean[0] += 0.25 * spec.separation * std::cos(ja);
                        comp.mean[1] += 0.25 * spec.separation * std::sin(ja);
                    }
                }
            } else {
                // concentric rings: class c's components spread around the
                // circle of radius (c + 1) * separation / 2
                comp.stddev = spec.separation / 8.0;
                double radius = 0.5 * spec.separation * (c + 1);
                if (spec.dim == 1) {
                    comp.mean[0] = (j % 2 == 0) ? radius : -radius;
                } else {
                    double ja =
                        kTwoPi * (static_cast<double>(j) + static_cast<double>(c) / C) / K;
                    comp.mean[0] = radius * std::cos(ja);
                    comp.mean[1] = radius * std::sin(ja);
                }
            }
            layout[c].push_back(std::move(comp));
        }
    }
    return layout;
}

LabeledDataset sample_split(const std::vector<std::vector<Component>>& layout,
                            const TaskSpec& spec, int n, const std::string& tag, Rng rng,
                            const OodShift* shift = nullptr) {
    LabeledDataset data;
    data.num_classes = spec.num_classes;
    data.dim = spec.dim;
    data.split = tag;
    data.x.reserve(n);
    data.y.reserve(n);
    for (int i = 0; i < n; ++i) {
        int c = i % spec.num_classes;
        const auto& comps = layout[c];
        const Component& comp = comps[rng.uniform_int(comps.size())];
        Eigen::VectorXd x = comp.mean + comp.stddev * rng.normal_vector(spec.dim);
        if (shift) {
            x = comp.mean + shift->scale * (x - comp.mean) + shift->mean_shift;
        }
        data.x.push_back(std::move(x));
        data.y.push_back(c);
    }
    return data;
}

std::vector<std::vector<Eigen::VectorXd>> per_class_points(const LabeledDataset& data) {
    std::vector<std::vector<Eigen::VectorXd>> out(data.num_classes);
    for (std::size_t i = 0; i < data.size(); ++i) out[data.y[i]].push_back(data.x[i]);
    return out;
}

} // namespace

void TaskSpec::validate() const {
    if (num_classes < 2) throw std::invalid_argument("TaskSpec: num_classes must be >= 2");
    if (dim < 1) throw std::invalid_argument("TaskSpec: dim must be >= 1");
    if (components_per_class < 1) {
        throw std::invalid_argument("TaskSpec: components_per_class must be >= 1");
    }
    if (!(separation > 0.0)) throw std::invalid_argument("TaskSpec: separation must be > 0");
    if (train_size < num_classes || test_size < num_classes) {
        throw std::invalid_argument("TaskSpec: split sizes must be >= num_classes");
    }
    if (ood_shift && ood_shift->mean_shift.size() != dim) {
        throw std::invalid_argument("TaskSpec: ood_shift mean_shift dimension mismatch");
    }
}

TaskSpec TaskSpec::default_task() {
    TaskSpec spec;
    spec.num_classes = 3;
    spec.dim = 2;
    spec.family = TaskFamily::GaussianMixture;
    spec.components_per_class = 2;
    spec.separation = 4.0;
    spec.train_size = 3000;
    spec.test_size = 2000;
    OodShift shift;
    shift.mean_shift = Eigen::VectorXd::Zero(2);
    shift.mean_shift[0] = 0.5 * spec.separation;
    shift.scale = 1.0;
    spec.ood_shift = shift;
    return spec;
}

Task make_task(const TaskSpec& spec, std::uint64_t seed) {
    spec.validate();
    auto layout = component_layout(spec);

    Task task;
    task.spec = spec;
    Rng root(seed);
    task.train = sample_split(layout, spec, spec.train_size, "train", root.split(0));
    task.test = sample_split(layout, spec, spec.test_size, "test", root.split(1));
    if (spec.ood_shift) {
        task.ood_test = sample_split(layout, spec, spec.test_size, "ood", root.split(2),
                                     &*spec.ood_shift);
    }

    // widened pool: jitter each component mean by 0.5 * separation in a random
    // direction and scale its covariance x2
    auto widened = layout;
    Rng jitter = root.split(3);
    for (auto& comps : widened) {
        for (auto& comp : comps) {
            Eigen::VectorXd dir = jitter.normal_vector(spec.dim);
            double norm = dir.norm();
            if (norm > 0.0) dir /= norm;
            comp.mean += 0.5 * spec.separation * dir;
            comp.stddev *= std::sqrt(2.0);
        }
    }
    task.pretrain_pool =
        sample_split(widened, spec, spec.train_size, "pretrain", root.split(4));
    return task;
}

void PipelineToggles::validate() const {
    if ((mmd_loss || visual_guidance) && !finetune) {
        throw std::invalid_argument(
            "PipelineToggles: mmd_loss and visual_guidance require finetune");
    }
}

FeatureFn encoder_feature_fn(const DenseNet& encoder) {
    if (encoder.spec.hidden_dims.empty()) {
        throw std::invalid_argument("encoder_feature_fn: encoder has no hidden layer");
    }
    auto net = std::make_shared<DenseNet>(encoder);
    std::size_t layer = net->spec.hidden_dims.size() - 1;
    return [net, layer](const Eigen::VectorXd& x) {
        Tape tape;
        net_forward(*net, x, &tape);
        return tape.post[layer];
    };
}

DenseNet train_classifier(const LabeledDataset& data, const NetSpec& spec, int epochs,
                          int batch, double lr, std::uint64_t seed) {
    data.validate();
    spec.validate();
    if (data.size() == 0) throw std::invalid_argument("train_classifier: empty dataset");
    if (batch < 1 || epochs < 0) {
        throw std::invalid_argument("train_classifier: bad epoch/batch budget");
    }

    Rng rng(seed);
    DenseNet net = net_init(spec, rng.next_u64());
    OptimizerConfig ocfg;
    ocfg.lr = lr;
    OptimizerState opt = OptimizerState::init(net, ocfg);

    const int n = static_cast<int>(data.size());
    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);

    for (int epoch = 0; epoch < epochs; ++epoch) {
        for (int i = n - 1; i > 0; --i) {
            int j = static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(i) + 1));
            std::swap(perm[i], perm[j]);
        }
        for (int start = 0; start < n; start += batch) {
            int end = std::min(n, start + batch);
            ParamGrads acc = ParamGrads::zeros_like(net);
            for (int b = start; b < end; ++b) {
                int idx = perm[b];
                Tape tape;
                Eigen::VectorXd p = net_forward(net, data.x[idx], &tape);
                double py = std::max(p[data.y[idx]], 1e-300);
                Eigen::VectorXd ograd = Eigen::VectorXd::Zero(p.size());
                ograd[data.y[idx]] = -1.0 / py;
                acc.add(net_backward(net, tape, ograd));
            }
            acc.scale(1.0 / (end - start));
            optimizer_step(net, acc, opt);
        }
    }
    return net;
}

double classifier_accuracy(const DenseNet& clf, const LabeledDataset& data) {
    if (data.size() == 0) throw std::invalid_argument("classifier_accuracy: empty dataset");
    std::size_t hits = 0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        Eigen::Index argmax;
        net_forward(clf, data.x[i]).maxCoeff(&argmax);
        if (static_cast<int>(argmax) == data.y[i]) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(data.size());
}

std::vector<double> train_and_eval_classifier(const LabeledDataset& train,
                                              const std::vector<const LabeledDataset*>& tests,
                                              const TrainConfig& cfg, std::uint64_t seed) {
    for (int c = 0; c < train.num_classes; ++c) {
        if (train.class_indices(c).empty()) {
            throw std::invalid_argument("train_and_eval_classifier: class " +
                                        std::to_string(c) + " missing from train split");
        }
    }
    NetSpec spec;
    spec.input_dim = train.dim;
    spec.hidden_dims = cfg.classifier_hidden;
    spec.output_dim = train.num_classes;
    spec.final_activation = FinalActivation::Softmax;
    DenseNet clf = train_classifier(train, spec, cfg.classifier_epochs, cfg.classifier_batch,
                                    cfg.classifier_lr, seed);
    std::vector<double> accs;
    accs.reserve(tests.size());
    for (const LabeledDataset* t : tests) accs.push_back(classifier_accuracy(clf, *t));
    return accs;
}

namespace {

void train_phase(DenseNet& denoiser, ConditionTable& table, OptimizerState& opt,
                 ConditionTableOptimizer& copt, const LabeledDataset& data,
                 const TrainConfig& cfg, const NoiseSchedule& sched, double gamma,
                 bool use_visual, const FeatureFn& psi, int steps, const char* phase,
                 Rng& rng, std::vector<CurvePoint>& curve) {
    auto class_points = per_class_points(data);
    LossConfig lcfg;
    lcfg.gamma = gamma;
    lcfg.weighting = cfg.weighting;

    for (int step = 0; step < steps; ++step) {
        std::vector<int> idx(cfg.batch);
        for (int b = 0; b < cfg.batch; ++b) {
            idx[b] = static_cast<int>(rng.uniform_int(data.size()));
        }

        // one visual-guidance vector per class per step, shared by the batch
        std::vector<std::optional<Eigen::VectorXd>> vis(data.num_classes);
        if (use_visual) {
            for (int b = 0; b < cfg.batch; ++b) {
                int c = data.y[idx[b]];
                if (!vis[c]) {
                    vis[c] = visual_guidance(psi, class_points[c], cfg.visual_m, rng);
                }
            }
        }

        std::vector<LossBatchItem> batch;
        batch.reserve(cfg.batch);
        for (int b = 0; b < cfg.batch; ++b) {
            int c = data.y[idx[b]];
            Condition cond = build_condition(table, c, use_visual ? vis[c] : std::nullopt);
            cond = drop_condition(cond, table, cfg.cond_drop, rng);
            batch.push_back({data.x[idx[b]], std::move(cond)});
        }

        ParamGrads grads = ParamGrads::zeros_like(denoiser);
        ConditionTableGrads cgrads = ConditionTableGrads::zeros_like(table);
        CombinedLossResult res;
        try {
            res = combined_loss(denoiser, cfg.time_dim, sched, batch, lcfg, rng, &grads,
                                &cgrads);
        } catch (const std::runtime_error& e) {
            throw TrainingDiverged(std::string("train_generator: ") + e.what(), curve);
        }

        int global_step = static_cast<int>(curve.size());
        curve.push_back({global_step, res.total, res.simple, res.mmd, phase});

        if (!std::isfinite(res.total)) {
            throw TrainingDiverged("train_generator: non-finite loss at step " +
                                       std::to_string(global_step),
                                   curve);
        }
        try {
            optimizer_step(denoiser, grads, opt);
            condition_table_step(table, cgrads, copt);
        } catch (const std::runtime_error& e) {
            throw TrainingDiverged(std::string("train_generator: ") + e.what(), curve);
        }
    }
}

} // namespace

GeneratorCheckpoint train_generator(const Task& task, const PipelineToggles& toggles,
                                    const TrainConfig& cfg, std::uint64_t seed) {
    toggles.validate();
    if (task.train.size() == 0 || task.pretrain_pool.size() == 0) {
        throw std::invalid_argument("train_generator: empty training data");
    }

    GeneratorCheckpoint gen;
    gen.cfg = cfg;
    gen.toggles = toggles;
    gen.sched = make_schedule(cfg.T, cfg.beta_start, cfg.beta_end);

    NetSpec enc_spec;
    enc_spec.input_dim = task.train.dim;
    enc_spec.hidden_dims = cfg.encoder_hidden;
    enc_spec.hidden_dims.push_back(cfg.encoder_feature_dim);
    enc_spec.output_dim = task.train.num_classes;
    enc_spec.final_activation = FinalActivation::Softmax;
    gen.encoder = train_classifier(task.pretrain_pool, enc_spec, cfg.encoder_epochs,
                                   cfg.batch, cfg.lr, subseed(seed, 0));
    FeatureFn psi = encoder_feature_fn(gen.encoder);

    NetSpec dspec;
    dspec.input_dim = task.train.dim + cfg.time_dim + cfg.embed_dim + cfg.encoder_feature_dim;
    dspec.hidden_dims = cfg.denoiser_hidden;
    dspec.output_dim = task.train.dim;
    gen.denoiser = net_init(dspec, subseed(seed, 1));
    gen.table = ConditionTable::init(task.train.num_classes, cfg.embed_dim, cfg.encoder_feature_dim,
                                     subseed(seed, 2));

    OptimizerConfig ocfg;
    ocfg.lr = cfg.lr;
    OptimizerState opt = OptimizerState::init(gen.denoiser, ocfg);
    ConditionTableOptimizer copt = ConditionTableOptimizer::init(gen.table, cfg.lr);

    Rng pre_rng(subseed(seed, 3));
    train_phase(gen.denoiser, gen.table, opt, copt, task.pretrain_pool, cfg, gen.sched,
                0.0, toggles.visual_guidance, psi, cfg.pretrain_steps, "pretrain", pre_rng,
                gen.curve);

    if (toggles.finetune) {
        Rng ft_rng(subseed(seed, 4));
        double gamma = toggles.mmd_loss ? cfg.gamma : 0.0;
        train_phase(gen.denoiser, gen.table, opt, copt, task.train, cfg, gen.sched, gamma,
                    toggles.visual_guidance, psi, cfg.finetune_steps, "finetune", ft_rng,
                    gen.curve);
    }
    return gen;
}

LabeledDataset synthesize_dataset(const GeneratorCheckpoint& gen, int n,
                                  const PipelineToggles& toggles,
                                  const LabeledDataset& real_pool,
                                  const SamplerConfig& sampler, std::uint64_t seed) {
    const int C = gen.table.num_classes();
    if (n < C) throw std::invalid_argument("synthesize_dataset: n must be >= num_classes");

    std::vector<std::vector<Eigen::VectorXd>> class_points;
    if (toggles.latent_prior || toggles.visual_guidance) {
        if (real_pool.size() == 0) {
            throw std::invalid_argument("synthesize_dataset: empty real pool");
        }
        if (real_pool.num_classes != C) {
            throw std::invalid_argument("synthesize_dataset: real pool class mismatch");
        }
        class_points = per_class_points(real_pool);
        for (int c = 0; c < C; ++c) {
            if (class_points[c].empty()) {
                throw std::invalid_argument("synthesize_dataset: class " +
                                            std::to_string(c) + " missing from real pool");
            }
        }
    }

    FeatureFn psi;
    if (toggles.visual_guidance) psi = encoder_feature_fn(gen.encoder);

    Rng root(seed);
    std::vector<std::uint64_t> cond_seeds(n), chain_seeds(n);
    for (int i = 0; i < n; ++i) {
        cond_seeds[i] = root.next_u64();
        chain_seeds[i] = root.next_u64();
    }

    NetPredictor pred(gen.denoiser, gen.cfg.time_dim, gen.cfg.T);
    Condition null = null_condition(gen.table);

    LabeledDataset out;
    out.num_classes = C;
    out.dim = pred.data_dim();
    out.split = "synthetic";
    out.x.resize(n);
    out.y.resize(n);

    parallel_for(n, [&](int i) {
        int c = i % C;
        Rng crng(cond_seeds[i]);
        std::optional<Eigen::VectorXd> vis;
        if (toggles.visual_guidance) {
            vis = visual_guidance(psi, class_points[c], gen.cfg.visual_m, crng);
        }
        Condition cond = build_condition(gen.table, c, vis);

        SamplerConfig sc = sampler;
        sc.seed = chain_seeds[i];
        sc.prior = toggles.latent_prior ? PriorKind::Latent : PriorKind::Gaussian;
        std::optional<Eigen::VectorXd> prior;
        if (toggles.latent_prior) {
            prior = class_points[c][crng.uniform_int(class_points[c].size())];
        }
        out.x[i] = sample(pred, gen.sched, sc, cond, null, prior);
        out.y[i] = c;
    });
    out.validate();
    return out;
}

ArmStats ArmStats::from(std::vector<double> per_seed) {
    ArmStats s;
    s.per_seed = std::move(per_seed);
    if (s.per_seed.empty()) return s;
    double n = static_cast<double>(s.per_seed.size());
    s.mean = std::accumulate(s.per_seed.begin(), s.per_seed.end(), 0.0) / n;
    double var = 0.0;
    for (double v : s.per_seed) var += (v - s.mean) * (v - s.mean);
    s.stddev = std::sqrt(var / n);
    return s;
}

ExperimentResult run_replace_augment(const Task& task, const PipelineToggles& toggles,
                                     const TrainConfig& cfg, const SamplerConfig& sampler,
                                     const std::vector<std::uint64_t>& seeds) {
    toggles.validate();
    if (seeds.empty()) throw std::invalid_argument("run_replace_augment: no seeds");

    std::vector<double> real, syn_only, comb, mmds;
    for (std::uint64_t s : seeds) {
        GeneratorCheckpoint gen = train_generator(task, toggles, cfg, subseed(s, 0));
        LabeledDataset syn =
            synthesize_dataset(gen, static_cast<int>(task.train.size()), toggles,
                               task.train, sampler, subseed(s, 1));

        real.push_back(
            train_and_eval_classifier(task.train, {&task.test}, cfg, subseed(s, 2))[0]);
        syn_only.push_back(
            train_and_eval_classifier(syn, {&task.test}, cfg, subseed(s, 3))[0]);

        LabeledDataset combined = task.train;
        combined.split = "combined";
        combined.x.insert(combined.x.end(), syn.x.begin(), syn.x.end());
        combined.y.insert(combined.y.end(), syn.y.begin(), syn.y.end());
        comb.push_back(
            train_and_eval_classifier(combined, {&task.test}, cfg, subseed(s, 4))[0]);

        FeatureFn psi = encoder_feature_fn(gen.encoder);
        mmds.push_back(mmd_sq_linear(
            FeatureBatch::from_dataset(task.test, psi, BatchSource::Real),
            FeatureBatch::from_dataset(syn, psi, BatchSource::Synthetic)));
    }

    ExperimentResult res;
    res.real_only = ArmStats::from(std::move(real));
    res.synthetic_only = ArmStats::from(std::move(syn_only));
    res.combined = ArmStats::from(std::move(comb));
    res.eval_mmd = ArmStats::from(std::move(mmds));
    return res;
}

std::vector<ScalePoint> run_scale_sweep(const Task& task, const PipelineToggles& toggles,
                                        const TrainConfig& cfg, const SamplerConfig& sampler,
                                        const std::vector<double>& k_list,
                                        const std::vector<std::uint64_t>& seeds) {
    toggles.validate();
    if (k_list.empty()) throw std::invalid_argument("run_scale_sweep: empty k list");
    if (seeds.empty()) throw std::invalid_argument("run_scale_sweep: no seeds");
    for (double k : k_list) {
        if (!(k > 0.0)) throw std::invalid_argument("run_scale_sweep: k must be > 0");
    }

    std::vector<std::vector<double>> acc(k_list.size()), ood(k_list.size());
    for (std::uint64_t s : seeds) {
        GeneratorCheckpoint gen = train_generator(task, toggles, cfg, subseed(s, 0));
        for (std::size_t ki = 0; ki < k_list.size(); ++ki) {
            int n = static_cast<int>(std::lround(k_list[ki] * task.train.size()));
            LabeledDataset syn =
                synthesize_dataset(gen, n, toggles, task.train, sampler, subseed(s, 1));
            std::vector<const LabeledDataset*> tests = {&task.test};
            if (task.ood_test) tests.push_back(&*task.ood_test);
            std::vector<double> accs =
                train_and_eval_classifier(syn, tests, cfg, subseed(s, 3));
            acc[ki].push_back(accs[0]);
            if (task.ood_test) ood[ki].push_back(accs[1]);
        }
    }

    std::vector<ScalePoint> curve;
    for (std::size_t ki = 0; ki < k_list.size(); ++ki) {
        ScalePoint p;
        p.k = k_list[ki];
        p.accuracy = ArmStats::from(std::move(acc[ki]));
        p.ood_accuracy = ArmStats::from(std::move(ood[ki]));
        curve.push_back(std::move(p));
    }
    return curve;
}

namespace {

std::vector<double> average_ranks(const std::vector<double>& xs) {
    std::size_t n = xs.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0u);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return xs[a] < xs[b]; });
    std::vector<double> ranks(n);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && xs[order[j + 1]] == xs[order[i]]) ++j;
        double avg = 0.5 * (static_cast<double>(i) + static_cast<double>(j)) + 1.0;
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
        i = j + 1;
    }
    return ranks;
}

} // namespace

double spearman_rho(const std::vector<double>& xs, const std::vector<double>& ys) {
    if (xs.size() != ys.size() || xs.size() < 2) {
        throw std::invalid_argument("spearman_rho: need two equal-length series");
    }
    std::vector<double> rx = average_ranks(xs);
    std::vector<double> ry = average_ranks(ys);
    double n = static_cast<double>(xs.size());
    double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
    double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < rx.size(); ++i) {
        sxy += (rx[i] - mx) * (ry[i] - my);
        sxx += (rx[i] - mx) * (rx[i] - mx);
        syy += (ry[i] - my) * (ry[i] - my);
    }
    if (sxx == 0.0 || syy == 0.0) {
        throw std::invalid_argument("spearman_rho: constant series");
    }
    return sxy / std::sqrt(sxx * syy);
}

std::vector<PipelineToggles> ablation_toggle_rows() {
    // columns: latent prior, visual guidance, distribution matching, finetune
    const bool rows[10][4] = {
        {false, false, false, false}, {false, false, false, true},
        {false, true, false, true},   {false, false, true, true},
        {false, true, true, true},    {true, false, false, false},
        {true, false, false, true},   {true, true, false, true},
        {true, false, true, true},    {true, true, true, true},
    };
    std::vector<PipelineToggles> out;
    for (const auto& r : rows) {
        PipelineToggles t;
        t.latent_prior = r[0];
        t.visual_guidance = r[1];
        t.mmd_loss = r[2];
        t.finetune = r[3];
        out.push_back(t);
    }
    return out;
}

std::vector<AblationRow> run_ablation_grid(const Task& task, const TrainConfig& cfg,
                                           const SamplerConfig& sampler,
                                           const std::vector<std::uint64_t>& seeds) {
    if (seeds.empty()) throw std::invalid_argument("run_ablation_grid: no seeds");
    std::vector<AblationRow> table;
    for (const PipelineToggles& toggles : ablation_toggle_rows()) {
        std::vector<double> accs;
        for (std::uint64_t s : seeds) {
            GeneratorCheckpoint gen = train_generator(task, toggles, cfg, subseed(s, 0));
            LabeledDataset syn =
                synthesize_dataset(gen, static_cast<int>(task.train.size()), toggles,
                                   task.train, sampler, subseed(s, 1));
            accs.push_back(
                train_and_eval_classifier(syn, {&task.test}, cfg, subseed(s, 3))[0]);
        }
        AblationRow row;
        row.toggles = toggles;
        row.accuracy = ArmStats::from(std::move(accs));
        table.push_back(std::move(row));
    }
    return table;
}

} // namespace dmsynth
