#include "dmsynth/cli.hpp"

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "dmsynth/checkpoint.hpp"
#include "dmsynth/matching.hpp"
#include "dmsynth/privacy.hpp"
#include "dmsynth/taskbench.hpp"
#include "dmsynth/theory.hpp"

namespace dmsynth {

namespace {

std::uint64_t subseed(std::uint64_t seed, std::uint64_t stream) {
    Rng r(seed);
    return r.split(stream).next_u64();
}

// Accumulates the files written into one run directory so the manifest can
// cover exactly what the command produced.
struct Record {
    std::filesystem::path dir;
    std::vector<std::string> files;

    std::filesystem::path path(const std::string& name) {
        files.push_back(name);
        return dir / name;
    }

    void finish() const { write_manifest(dir, files); }
};

void write_snapshot(const RunConfig& cfg, Record& rec) {
    std::ofstream out(rec.path("config.json"), std::ios::binary);
    if (!out) throw std::runtime_error("cannot write config.json");
    out << config_snapshot(cfg);
}

void write_curve_csv(const std::vector<CurvePoint>& curve,
                     const std::filesystem::path& path) {
    std::vector<std::vector<std::string>> rows;
    rows.reserve(curve.size());
    for (const CurvePoint& p : curve) {
        rows.push_back({std::to_string(p.step), p.phase, format_number(p.total),
                        format_number(p.simple), format_number(p.mmd)});
    }
    write_csv({"step", "phase", "total", "simple", "mmd"}, rows, path);
}

void write_embeddings_json(const ConditionTable& table,
                           const std::filesystem::path& path) {
    nlohmann::json j;
    std::vector<std::vector<double>> rows(table.num_classes());
    for (int c = 0; c < table.num_classes(); ++c) {
        rows[c].assign(table.class_embeddings.row(c).begin(),
                       table.class_embeddings.row(c).end());
    }
    j["class_embeddings"] = rows;
    j["null_embedding"] = std::vector<double>(
        table.null_embedding.data(), table.null_embedding.data() + table.null_embedding.size());
    j["visual_dim"] = table.visual_dim;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << j.dump(2) << '\n';
}

NetSpec classifier_spec(const Task& task, const TrainConfig& train) {
    NetSpec spec;
    spec.input_dim = task.spec.dim;
    spec.hidden_dims = train.classifier_hidden;
    spec.output_dim = task.spec.num_classes;
    spec.final_activation = FinalActivation::Softmax;
    return spec;
}

int synthetic_count(const RunConfig& cfg, const Task& task) {
    return cfg.experiment.synthetic_n > 0 ? cfg.experiment.synthetic_n
                                          : static_cast<int>(task.train.size());
}

void cmd_gen_task(const RunConfig& cfg, std::uint64_t seed, Record& rec) {
    Task task = make_task(cfg.task, seed);
    write_dataset_csv(task.train, rec.path("train.csv"));
    write_dataset_csv(task.test, rec.path("test.csv"));
    if (task.ood_test) write_dataset_csv(*task.ood_test, rec.path("ood.csv"));
    write_dataset_csv(task.pretrain_pool, rec.path("pretrain.csv"));
}

void cmd_train_gen(const RunConfig& cfg, std::uint64_t seed, Record& rec) {
    Task task = make_task(cfg.task, cfg.experiment.task_seed);
    GeneratorCheckpoint gen = train_generator(task, cfg.toggles, cfg.train, seed);
    save_checkpoint(gen.denoiser, seed, rec.path("denoiser.ckpt"));
    save_checkpoint(gen.encoder, seed, rec.path("encoder.ckpt"));
    write_embeddings_json(gen.table, rec.path("embeddings.json"));
    write_curve_csv(gen.curve, rec.path("curve.csv"));

    Plot plot;
    plot.title = "training loss";
    plot.x_label = "step";
    plot.y_label = "loss";
    plot.log_y = true;
    PlotSeries total{"total", {}}, simple{"simple", {}};
    for (const CurvePoint& p : gen.curve) {
        total.points.emplace_back(p.step, p.total);
        simple.points.emplace_back(p.step, p.simple);
    }
    plot.series = {total, simple};
    write_svg(plot, rec.path("curve.svg"));
}

void cmd_synth(const RunConfig& cfg, std::uint64_t seed, Record& rec) {
    Task task = make_task(cfg.task, cfg.experiment.task_seed);
    GeneratorCheckpoint gen =
        train_generator(task, cfg.toggles, cfg.train, subseed(seed, 0));
    LabeledDataset syn =
        synthesize_dataset(gen, synthetic_count(cfg, task), cfg.toggles, task.train,
                           cfg.sampler, subseed(seed, 1));
    write_dataset_csv(syn, rec.path("synthetic.csv"));
}

void cmd_eval_mmd(const RunConfig& cfg, std::uint64_t seed, Record& rec) {
    Task task = make_task(cfg.task, cfg.experiment.task_seed);
    GeneratorCheckpoint gen =
        train_generator(task, cfg.toggles, cfg.train, subseed(seed, 0));
    LabeledDataset syn =
        synthesize_dataset(gen, synthetic_count(cfg, task), cfg.toggles, task.train,
                           cfg.sampler, subseed(seed, 1));
    DenseNet probe = train_classifier(task.train, classifier_spec(task, cfg.train),
                                      cfg.train.classifier_epochs,
                                      cfg.train.classifier_batch,
                                      cfg.train.classifier_lr, subseed(seed, 2));
    ObjectiveReport rep = synthesis_objective_report(
        task.test, syn, encoder_feature_fn(gen.encoder), probe, cfg.experiment.eval_lambda);
    write_csv({"mmd_sq", "conditional_divergence", "cardinality_term", "lambda",
               "combined"},
              {{format_number(rep.mmd_sq), format_number(rep.conditional_divergence),
                format_number(rep.cardinality_term), format_number(rep.lambda),
                format_number(rep.combined)}},
              rec.path("metrics.csv"));
}

void cmd_train_clf(const RunConfig& cfg, std::uint64_t seed, Record& rec) {
    Task task = make_task(cfg.task, cfg.experiment.task_seed);
    DenseNet clf = train_classifier(task.train, classifier_spec(task, cfg.train),
                                    cfg.train.classifier_epochs,
                                    cfg.train.classifier_batch, cfg.train.classifier_lr,
                                    seed);
    save_checkpoint(clf, seed, rec.path("classifier.ckpt"));
    std::string ood = task.ood_test
                          ? format_number(classifier_accuracy(clf, *task.ood_test))
                          : std::string();
    write_csv({"train_accuracy", "test_accuracy", "ood_accuracy"},
              {{format_number(classifier_accuracy(clf, task.train)),
                format_number(classifier_accuracy(clf, task.test)), ood}},
              rec.path("metrics.csv"));
}

void cmd_replace_augment(const RunConfig& cfg, std::uint64_t seed, Record& rec) {
    Task task = make_task(cfg.task, cfg.experiment.task_seed);
    std::vector<std::uint64_t> seeds = cfg.experiment.seeds;
    for (std::uint64_t& s : seeds) s += seed; // --seed offsets the seed list
    ExperimentResult res =
        run_replace_augment(task, cfg.toggles, cfg.train, cfg.sampler, seeds);

    auto row = [](const char* arm, const ArmStats& s) {
        return std::vector<std::string>{arm, format_number(s.mean),
                                        format_number(s.stddev)};
    };
    write_csv({"arm", "mean", "stddev"},
              {row("real_only", res.real_only), row("synthetic_only", res.synthetic_only),
               row("combined", res.combined), row("eval_mmd", res.eval_mmd)},
              rec.path("metrics.csv"));

    std::vector<std::vector<std::string>> per_seed;
    auto add = [&](const char* arm, const ArmStats& s) {
        for (std::size_t i = 0; i < s.per_seed.size(); ++i) {
            per_seed.push_back(
                {arm, std::to_string(seeds[i]), format_number(s.per_seed[i])});
        }
    };
    add("real_only", res.real_only);
    add("synthetic_only", res.synthetic_only);
    add("combined", res.combined);
    add("eval_mmd", res.eval_mmd);
    write_csv({"arm", "seed", "value"}, per_seed, rec.path("per_seed.csv"));
}

void cmd_scale_sweep(const RunConfig& cfg, std::uint64_t seed, Record& rec) {
    Task task = make_task(cfg.task, cfg.experiment.task_seed);
    std::vector<std::uint64_t> seeds = cfg.experiment.seeds;
    for (std::uint64_t& s : seeds) s += seed;
    std::vector<ScalePoint> points =
        run_scale_sweep(task, cfg.toggles, cfg.train, cfg.sampler,
                        cfg.experiment.scale_k, seeds);

    std::vector<std::vector<std::string>> rows;
    for (const ScalePoint& p : points) {
        bool has_ood = !p.ood_accuracy.per_seed.empty();
        rows.push_back({format_number(p.k), format_number(p.accuracy.mean),
                        format_number(p.accuracy.stddev),
                        has_ood ? format_number(p.ood_accuracy.mean) : std::string(),
                        has_ood ? format_number(p.ood_accuracy.stddev) : std::string()});
    }
    write_csv({"k", "accuracy_mean", "accuracy_stddev", "ood_accuracy_mean",
               "ood_accuracy_stddev"},
              rows, rec.path("metrics.csv"));

    Plot plot;
    plot.title = "accuracy vs synthetic scale";
    plot.x_label = "scale multiplier k";
    plot.y_label = "accuracy";
    plot.log_x = true;
    PlotSeries acc{"synthetic-only", {}}, ood{"ood", {}};
    for (const ScalePoint& p : points) {
        acc.points.emplace_back(p.k, p.accuracy.mean);
        if (!p.ood_accuracy.per_seed.empty()) {
            ood.points.emplace_back(p.k, p.ood_accuracy.mean);
        }
    }
    plot.series = {acc};
    if (!ood.points.empty()) plot.series.push_back(ood);
    write_svg(plot, rec.path("scale.svg"));
}

void cmd_ablate(const RunConfig& cfg, std::uint64_t seed, Record& rec) {
    Task task = make_task(cfg.task, cfg.experiment.task_seed);
    std::vector<std::uint64_t> seeds = cfg.experiment.seeds;
    for (std::uint64_t& s : seeds) s += seed;
    std::vector<AblationRow> grid =
        run_ablation_grid(task, cfg.train, cfg.sampler, seeds);

    std::vector<std::vector<std::string>> rows;
    for (const AblationRow& r : grid) {
        rows.push_back({r.toggles.latent_prior ? "1" : "0",
                        r.toggles.visual_guidance ? "1" : "0",
                        r.toggles.mmd_loss ? "1" : "0", r.toggles.finetune ? "1" : "0",
                        format_number(r.accuracy.mean),
                        format_number(r.accuracy.stddev)});
    }
    write_csv({"latent_prior", "visual_guidance", "mmd_loss", "finetune",
               "accuracy_mean", "accuracy_stddev"},
              rows, rec.path("metrics.csv"));
}

void cmd_bound(const RunConfig& cfg, std::uint64_t seed, Record& rec) {
    double bound = gen_bound(cfg.bound.params);
    std::cout << format_number(bound) << '\n';
    FiniteClassExperiment exp =
        FiniteClassExperiment::default_experiment(cfg.bound.num_hypotheses);
    ViolationEstimate mc =
        bound_violation_mc(exp, static_cast<int>(cfg.bound.params.sample_size),
                           cfg.bound.threshold, cfg.bound.trials, seed);
    write_csv({"log_cardinality", "delta", "sample_size", "gen_bound", "threshold",
               "trials", "empirical_rate", "analytic_cap"},
              {{format_number(cfg.bound.params.log_cardinality),
                format_number(cfg.bound.params.delta),
                std::to_string(cfg.bound.params.sample_size), format_number(bound),
                format_number(cfg.bound.threshold), std::to_string(cfg.bound.trials),
                format_number(mc.empirical_rate), format_number(mc.analytic_cap)}},
              rec.path("metrics.csv"));
}

void cmd_mia(const RunConfig& cfg, std::uint64_t seed, Record& rec) {
    Task task = make_task(cfg.task, cfg.experiment.task_seed);
    MiaReport rep = run_mia_experiment(task, cfg.mia, cfg.toggles, cfg.train,
                                       cfg.sampler, seed);
    const char* arm = cfg.mia.arm == MiaArm::Direct ? "direct" : "synthetic";
    write_csv({"arm", "tpr_at_fpr_0.001", "shuffled_tpr_at_fpr_0.001"},
              {{arm, format_number(rep.tpr_at_low_fpr),
                format_number(rep.shuffled_tpr_at_low_fpr)}},
              rec.path("metrics.csv"));

    std::vector<std::vector<std::string>> score_rows;
    for (std::size_t i = 0; i < rep.scores.size(); ++i) {
        score_rows.push_back(
            {format_number(rep.scores[i]), std::to_string(rep.membership[i])});
    }
    write_csv({"score", "member"}, score_rows, rec.path("scores.csv"));

    std::vector<std::vector<std::string>> roc_rows;
    for (const auto& [f, t] : rep.roc.points) {
        roc_rows.push_back({format_number(f), format_number(t)});
    }
    write_csv({"fpr", "tpr"}, roc_rows, rec.path("roc.csv"));
    write_svg(roc_plot(rep.roc), rec.path("roc.svg"));
}

} // namespace

Plot roc_plot(const RocCurve& roc) {
    Plot plot;
    plot.title = "membership inference ROC";
    plot.x_label = "false positive rate";
    plot.y_label = "true positive rate";
    plot.log_x = true;
    plot.log_y = true;
    PlotSeries attack{"attack", roc.points};
    PlotSeries chance{"chance", {{plot.log_floor, plot.log_floor}, {1.0, 1.0}}};
    plot.series = {attack, chance};
    return plot;
}

int run_cli(const std::vector<std::string>& args) {
    CLI::App app{"distribution-matching synthesis workbench"};
    app.require_subcommand(1);

    std::string config_path;
    std::uint64_t seed = 1;
    std::string out_dir;

    using Command = void (*)(const RunConfig&, std::uint64_t, Record&);
    const std::vector<std::pair<std::string, Command>> commands = {
        {"gen-task", cmd_gen_task},         {"train-gen", cmd_train_gen},
        {"synth", cmd_synth},               {"eval-mmd", cmd_eval_mmd},
        {"train-clf", cmd_train_clf},       {"replace-augment", cmd_replace_augment},
        {"scale-sweep", cmd_scale_sweep},   {"ablate", cmd_ablate},
        {"bound", cmd_bound},               {"mia", cmd_mia}};

    for (const auto& [name, fn] : commands) {
        CLI::App* sub = app.add_subcommand(name);
        sub->add_option("--config", config_path, "JSON config file (omit for defaults)");
        sub->add_option("--seed", seed, "run seed");
        sub->add_option("--out", out_dir, "output directory")->required();
    }

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    Record rec;
    try {
        RunConfig cfg;
        if (!config_path.empty()) {
            cfg = parse_config(config_path);
        } else {
            cfg.validate();
        }
        rec.dir = out_dir;
        std::filesystem::create_directories(rec.dir);
        write_snapshot(cfg, rec);
        for (const auto& [name, fn] : commands) {
            if (app.get_subcommand(name)->parsed()) {
                fn(cfg, seed, rec);
                break;
            }
        }
        rec.finish();
        return 0;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const TrainingDiverged& e) {
        std::cerr << "error: " << e.what() << '\n';
        if (!rec.dir.empty()) {
            write_curve_csv(e.curve, rec.path("curve.csv"));
        }
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
}

} // namespace dmsynth
