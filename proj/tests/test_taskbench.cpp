#include <doctest.h>

#include <cmath>
#include <map>

#include "dmsynth/taskbench.hpp"

using namespace dmsynth;

namespace {

TaskSpec small_spec() {
    TaskSpec spec;
    spec.num_classes = 3;
    spec.dim = 2;
    spec.components_per_class = 2;
    spec.separation = 5.0;
    spec.train_size = 300;
    spec.test_size = 300;
    OodShift shift;
    shift.mean_shift = Eigen::VectorXd::Zero(2);
    shift.mean_shift[0] = 2.5;
    spec.ood_shift = shift;
    return spec;
}

TrainConfig small_cfg() {
    TrainConfig cfg;
    cfg.T = 40;
    cfg.time_dim = 8;
    cfg.embed_dim = 8;
    cfg.denoiser_hidden = {48, 48};
    cfg.encoder_hidden = {32};
    cfg.encoder_feature_dim = 6;
    cfg.encoder_epochs = 10;
    cfg.pretrain_steps = 200;
    cfg.finetune_steps = 120;
    cfg.batch = 32;
    cfg.visual_m = 16;
    cfg.classifier_hidden = {32};
    cfg.classifier_epochs = 50;
    cfg.classifier_batch = 32;
    return cfg;
}

SamplerConfig small_sampler() {
    SamplerConfig sc;
    sc.num_steps = 12;
    return sc;
}

bool datasets_equal(const LabeledDataset& a, const LabeledDataset& b) {
    if (a.size() != b.size() || a.y != b.y) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a.x[i] != b.x[i]) return false;
    }
    return true;
}

bool nets_equal(const DenseNet& a, const DenseNet& b) {
    if (a.spec != b.spec) return false;
    for (std::size_t l = 0; l < a.weights.size(); ++l) {
        if (a.weights[l] != b.weights[l] || a.biases[l] != b.biases[l]) return false;
    }
    return true;
}

} // namespace

TEST_CASE("make_task determinism and validation") {
    TaskSpec spec = small_spec();
    Task a = make_task(spec, 5);
    Task b = make_task(spec, 5);
    CHECK(datasets_equal(a.train, b.train));
    CHECK(datasets_equal(a.test, b.test));
    CHECK(datasets_equal(a.pretrain_pool, b.pretrain_pool));
    REQUIRE(a.ood_test.has_value());
    CHECK(datasets_equal(*a.ood_test, *b.ood_test));

    Task c = make_task(spec, 6);
    CHECK(!datasets_equal(a.train, c.train));

    a.train.validate();
    a.test.validate();
    a.pretrain_pool.validate();

    TaskSpec bad = spec;
    bad.num_classes = 1;
    CHECK_THROWS_AS(make_task(bad, 1), std::invalid_argument);
    bad = spec;
    bad.separation = 0.0;
    CHECK_THROWS_AS(make_task(bad, 1), std::invalid_argument);
    bad = spec;
    bad.train_size = 2;
    CHECK_THROWS_AS(make_task(bad, 1), std::invalid_argument);
    bad = spec;
    bad.ood_shift->mean_shift = Eigen::VectorXd::Zero(3);
    CHECK_THROWS_AS(make_task(bad, 1), std::invalid_argument);
}

TEST_CASE("well-separated two-class task is linearly probeable") {
    TaskSpec spec;
    spec.num_classes = 2;
    spec.dim = 2;
    spec.components_per_class = 2;
    spec.separation = 6.0;
    spec.train_size = 1000;
    spec.test_size = 1000;
    Task task = make_task(spec, 11);

    NetSpec probe;
    probe.input_dim = 2;
    probe.output_dim = 2;
    probe.final_activation = FinalActivation::Softmax;
    DenseNet clf = train_classifier(task.train, probe, 80, 64, 1e-2, 3);
    CHECK(classifier_accuracy(clf, task.test) >= 0.99);
}

TEST_CASE("null OOD shift matches the test split in distribution") {
    TaskSpec spec = small_spec();
    spec.test_size = 4000;
    spec.ood_shift->mean_shift.setZero();
    spec.ood_shift->scale = 1.0;
    Task task = make_task(spec, 17);
    REQUIRE(task.ood_test.has_value());

    // two-sample mean comparison per coordinate, 4 sigma
    for (int d = 0; d < spec.dim; ++d) {
        double m1 = 0.0, m2 = 0.0, v1 = 0.0, v2 = 0.0;
        double n1 = static_cast<double>(task.test.size());
        double n2 = static_cast<double>(task.ood_test->size());
        for (const auto& x : task.test.x) m1 += x[d] / n1;
        for (const auto& x : task.ood_test->x) m2 += x[d] / n2;
        for (const auto& x : task.test.x) v1 += (x[d] - m1) * (x[d] - m1) / n1;
        for (const auto& x : task.ood_test->x) v2 += (x[d] - m2) * (x[d] - m2) / n2;
        double se = std::sqrt(v1 / n1 + v2 / n2);
        CHECK(std::abs(m1 - m2) < 4.0 * se);
    }
}

TEST_CASE("nonzero OOD shift moves the mean") {
    TaskSpec spec = small_spec();
    spec.test_size = 2000;
    Task task = make_task(spec, 19);
    double m_test = 0.0, m_ood = 0.0;
    for (const auto& x : task.test.x) m_test += x[0] / task.test.size();
    for (const auto& x : task.ood_test->x) m_ood += x[0] / task.ood_test->size();
    CHECK(m_ood - m_test > 2.0);
}

TEST_CASE("ring family produces concentric classes") {
    TaskSpec spec = small_spec();
    spec.family = TaskFamily::RingMixture;
    spec.components_per_class = 8;
    spec.ood_shift.reset();
    Task task = make_task(spec, 23);
    // mean radius per class orders with the class index
    std::vector<double> radius(spec.num_classes, 0.0);
    std::vector<int> count(spec.num_classes, 0);
    for (std::size_t i = 0; i < task.train.size(); ++i) {
        radius[task.train.y[i]] += task.train.x[i].norm();
        count[task.train.y[i]] += 1;
    }
    for (int c = 0; c < spec.num_classes; ++c) radius[c] /= count[c];
    CHECK(radius[0] < radius[1]);
    CHECK(radius[1] < radius[2]);
}

TEST_CASE("toggle invariant rejects orphan loss/guidance flags") {
    PipelineToggles t;
    t.mmd_loss = true;
    CHECK_THROWS_AS(t.validate(), std::invalid_argument);
    t = {};
    t.visual_guidance = true;
    CHECK_THROWS_AS(t.validate(), std::invalid_argument);
    t = {};
    t.latent_prior = true; // latent prior alone is a valid row
    t.validate();
    t.finetune = true;
    t.mmd_loss = true;
    t.visual_guidance = true;
    t.validate();
}

TEST_CASE("train_generator determinism, baseline identity, and loss ordering") {
    Task task = make_task(small_spec(), 29);
    TrainConfig cfg = small_cfg();

    PipelineToggles off;
    GeneratorCheckpoint g1 = train_generator(task, off, cfg, 41);
    GeneratorCheckpoint g2 = train_generator(task, off, cfg, 41);
    CHECK(nets_equal(g1.denoiser, g2.denoiser));
    CHECK(g1.table.class_embeddings == g2.table.class_embeddings);
    CHECK(g1.curve.size() == g2.curve.size());
    CHECK(g1.curve.size() == static_cast<std::size_t>(cfg.pretrain_steps));
    for (const CurvePoint& p : g1.curve) CHECK(p.phase == "pretrain");

    // without finetune the checkpoint is the pretrained model untouched:
    // the latent-prior-only row trains identically
    PipelineToggles lp;
    lp.latent_prior = true;
    GeneratorCheckpoint g3 = train_generator(task, lp, cfg, 41);
    CHECK(nets_equal(g1.denoiser, g3.denoiser));

    PipelineToggles full;
    full.finetune = true;
    full.latent_prior = true;
    full.visual_guidance = true;
    full.mmd_loss = true;
    GeneratorCheckpoint g4 = train_generator(task, full, cfg, 41);
    CHECK(g4.curve.size() == static_cast<std::size_t>(cfg.pretrain_steps + cfg.finetune_steps));
    bool saw_finetune = false;
    for (const CurvePoint& p : g4.curve) {
        CHECK(p.mmd <= p.simple + 1e-9);
        if (p.phase == "finetune") saw_finetune = true;
        CHECK(std::isfinite(p.total));
    }
    CHECK(saw_finetune);
}

TEST_CASE("train_generator aborts on divergence with the curve attached") {
    Task task = make_task(small_spec(), 31);
    TrainConfig cfg = small_cfg();
    cfg.lr = 1e80;
    cfg.pretrain_steps = 25;
    bool thrown = false;
    try {
        train_generator(task, PipelineToggles{}, cfg, 1);
    } catch (const TrainingDiverged& e) {
        thrown = true;
        CHECK(!e.curve.empty());
    }
    CHECK(thrown);
}

TEST_CASE("synthesize_dataset balance, determinism, and latent-prior errors") {
    Task task = make_task(small_spec(), 37);
    TrainConfig cfg = small_cfg();
    cfg.pretrain_steps = 100;
    PipelineToggles off;
    GeneratorCheckpoint gen = train_generator(task, off, cfg, 43);
    SamplerConfig sc = small_sampler();

    LabeledDataset one = synthesize_dataset(gen, 3, off, task.train, sc, 7);
    std::map<int, int> counts;
    for (int y : one.y) counts[y]++;
    CHECK(counts.size() == 3);
    for (auto& [c, n] : counts) CHECK(n == 1);

    LabeledDataset ten = synthesize_dataset(gen, 10, off, task.train, sc, 7);
    counts.clear();
    for (int y : ten.y) counts[y]++;
    int lo = 1000, hi = 0;
    for (auto& [c, n] : counts) {
        lo = std::min(lo, n);
        hi = std::max(hi, n);
    }
    CHECK(hi - lo <= 1);

    LabeledDataset again = synthesize_dataset(gen, 10, off, task.train, sc, 7);
    CHECK(datasets_equal(ten, again));
    LabeledDataset other = synthesize_dataset(gen, 10, off, task.train, sc, 8);
    CHECK(!datasets_equal(ten, other));

    CHECK_THROWS_AS(synthesize_dataset(gen, 2, off, task.train, sc, 7),
                    std::invalid_argument);

    PipelineToggles lp;
    lp.latent_prior = true;
    LabeledDataset empty;
    empty.num_classes = 3;
    empty.dim = 2;
    CHECK_THROWS_AS(synthesize_dataset(gen, 9, lp, empty, sc, 7), std::invalid_argument);
}

TEST_CASE("latent prior at minimal strength stays near its source points") {
    TrainConfig cfg = small_cfg();
    cfg.T = 60;
    NoiseSchedule sched = make_schedule(cfg.T, cfg.beta_start, cfg.beta_end);

    GeneratorCheckpoint gen;
    gen.cfg = cfg;
    gen.sched = sched;
    NetSpec dspec;
    dspec.input_dim = 2 + cfg.time_dim + cfg.embed_dim + cfg.encoder_feature_dim;
    dspec.hidden_dims = {16};
    dspec.output_dim = 2;
    gen.denoiser = net_init_zero(dspec); // predicts zero noise exactly
    gen.table = ConditionTable::init(3, cfg.embed_dim, cfg.encoder_feature_dim, 1);

    LabeledDataset pool;
    pool.num_classes = 3;
    pool.dim = 2;
    for (int c = 0; c < 3; ++c) {
        Eigen::VectorXd x(2);
        x << 4.0 * c, -2.0 * c;
        pool.x.push_back(x);
        pool.y.push_back(c);
    }

    PipelineToggles lp;
    lp.latent_prior = true;
    SamplerConfig sc = small_sampler();
    sc.strength = 1.0 / cfg.T; // t0 = 1: a single deterministic denoise step
    LabeledDataset syn = synthesize_dataset(gen, 300, lp, pool, sc, 51);

    double mean_disp = 0.0;
    for (std::size_t i = 0; i < syn.size(); ++i) {
        mean_disp += (syn.x[i] - pool.x[syn.y[i]]).norm() / syn.size();
    }
    double bound = 3.0 * std::sqrt(1.0 - sched.alpha_bar_at(1)) * std::sqrt(2.0);
    CHECK(mean_disp < bound);
}

TEST_CASE("train_and_eval_classifier memorizes, is chance on random labels, repeats") {
    TaskSpec spec = small_spec();
    spec.separation = 6.0;
    spec.test_size = 900;
    Task task = make_task(spec, 53);
    TrainConfig cfg = small_cfg();

    // memorization sanity: evaluate on the training split itself
    std::vector<double> self = train_and_eval_classifier(task.train, {&task.train}, cfg, 3);
    CHECK(self[0] >= 0.95);

    std::vector<double> a = train_and_eval_classifier(task.train, {&task.test}, cfg, 3);
    std::vector<double> b = train_and_eval_classifier(task.train, {&task.test}, cfg, 3);
    CHECK(a[0] == b[0]);

    // random labels: chance-level generalization
    LabeledDataset shuffled = task.train;
    Rng rng(71);
    for (auto& y : shuffled.y) y = static_cast<int>(rng.uniform_int(3));
    double chance = train_and_eval_classifier(shuffled, {&task.test}, cfg, 3)[0];
    double sigma = std::sqrt((1.0 / 3.0) * (2.0 / 3.0) / task.test.size());
    CHECK(std::abs(chance - 1.0 / 3.0) < 3.0 * sigma);

    LabeledDataset missing = task.train;
    for (auto& y : missing.y) y = std::min(y, 1);
    CHECK_THROWS_AS(train_and_eval_classifier(missing, {&task.test}, cfg, 3),
                    std::invalid_argument);
}

TEST_CASE("replace/augment bookkeeping and arm isolation") {
    TaskSpec spec = small_spec();
    Task task = make_task(spec, 59);
    TrainConfig cfg = small_cfg();
    cfg.pretrain_steps = 120;
    cfg.finetune_steps = 80;
    cfg.classifier_epochs = 40;
    SamplerConfig sc = small_sampler();
    std::vector<std::uint64_t> seeds = {1, 2};

    PipelineToggles off;
    ExperimentResult base = run_replace_augment(task, off, cfg, sc, seeds);
    CHECK(base.real_only.per_seed.size() == seeds.size());
    CHECK(base.synthetic_only.per_seed.size() == seeds.size());
    CHECK(base.combined.per_seed.size() == seeds.size());
    CHECK(base.eval_mmd.per_seed.size() == seeds.size());

    // means recomputed from per-seed values exactly
    double m = 0.0;
    for (double v : base.real_only.per_seed) m += v;
    m /= seeds.size();
    CHECK(base.real_only.mean == m);

    // the real-only arm never sees the toggles
    PipelineToggles full;
    full.finetune = true;
    full.latent_prior = true;
    full.visual_guidance = true;
    full.mmd_loss = true;
    ExperimentResult rich = run_replace_augment(task, full, cfg, sc, seeds);
    CHECK(rich.real_only.per_seed == base.real_only.per_seed);

    CHECK_THROWS_AS(run_replace_augment(task, off, cfg, sc, {}), std::invalid_argument);
}

TEST_CASE("scale sweep at k = 1 reduces to the replace synthetic arm") {
    TaskSpec spec = small_spec();
    Task task = make_task(spec, 61);
    TrainConfig cfg = small_cfg();
    cfg.pretrain_steps = 120;
    cfg.finetune_steps = 80;
    cfg.classifier_epochs = 40;
    SamplerConfig sc = small_sampler();
    std::vector<std::uint64_t> seeds = {5};

    PipelineToggles lp;
    lp.latent_prior = true;
    ExperimentResult rep = run_replace_augment(task, lp, cfg, sc, seeds);
    std::vector<ScalePoint> sweep = run_scale_sweep(task, lp, cfg, sc, {1.0}, seeds);
    REQUIRE(sweep.size() == 1);
    CHECK(sweep[0].accuracy.per_seed == rep.synthetic_only.per_seed);
    CHECK(sweep[0].ood_accuracy.per_seed.size() == 1);

    CHECK_THROWS_AS(run_scale_sweep(task, lp, cfg, sc, {}, seeds), std::invalid_argument);
    CHECK_THROWS_AS(run_scale_sweep(task, lp, cfg, sc, {-1.0}, seeds),
                    std::invalid_argument);
}

TEST_CASE("spearman_rho hand values") {
    CHECK(spearman_rho({1, 2, 3, 4}, {10, 20, 30, 40}) == doctest::Approx(1.0));
    CHECK(spearman_rho({1, 2, 3, 4}, {9, 7, 5, 3}) == doctest::Approx(-1.0));
    // ties: ranks average; x {1,2,3}, y {5,5,9} -> rho = sqrt(3)/2
    CHECK(spearman_rho({1, 2, 3}, {5, 5, 9}) ==
          doctest::Approx(std::sqrt(3.0) / 2.0).epsilon(1e-12));
    CHECK_THROWS_AS(spearman_rho({1, 1}, {2, 3}), std::invalid_argument);
    CHECK_THROWS_AS(spearman_rho({1}, {2}), std::invalid_argument);
}

TEST_CASE("ablation grid rows follow the fixed ten-row pattern") {
    std::vector<PipelineToggles> rows = ablation_toggle_rows();
    REQUIRE(rows.size() == 10);
    for (const PipelineToggles& t : rows) t.validate();

    // (latent prior, visual guidance, distribution matching, finetune)
    const bool expect[10][4] = {
        {false, false, false, false}, {false, false, false, true},
        {false, true, false, true},   {false, false, true, true},
        {false, true, true, true},    {true, false, false, false},
        {true, false, false, true},   {true, true, false, true},
        {true, false, true, true},    {true, true, true, true},
    };
    for (int i = 0; i < 10; ++i) {
        CHECK(rows[i].latent_prior == expect[i][0]);
        CHECK(rows[i].visual_guidance == expect[i][1]);
        CHECK(rows[i].mmd_loss == expect[i][2]);
        CHECK(rows[i].finetune == expect[i][3]);
    }
    CHECK(rows[0] == PipelineToggles{});
}
