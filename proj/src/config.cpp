#include "dmsynth/config.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

namespace dmsynth {

namespace {

using nlohmann::json;

std::string family_name(TaskFamily f) {
    return f == TaskFamily::GaussianMixture ? "gaussian_mixture" : "ring_mixture";
}

std::string weighting_name(LossWeighting w) {
    return w == LossWeighting::Simple ? "simple" : "snr";
}

std::string prior_name(PriorKind p) {
    return p == PriorKind::Gaussian ? "gaussian" : "latent";
}

std::string arm_name(MiaArm a) { return a == MiaArm::Direct ? "direct" : "synthetic"; }

std::string variant_name(LiraVariant v) {
    switch (v) {
        case LiraVariant::Online: return "online";
        case LiraVariant::Offline: return "offline";
        default: return "fixed_variance";
    }
}

// Locates a key (or any literal) in the raw config text for diagnostics.
int line_of(const std::string& raw, const std::string& needle) {
    std::size_t pos = raw.find('"' + needle + '"');
    if (pos == std::string::npos) pos = raw.find(needle);
    if (pos == std::string::npos) return 0;
    int line = 1;
    for (std::size_t i = 0; i < pos; ++i) {
        if (raw[i] == '\n') ++line;
    }
    return line;
}

[[noreturn]] void fail(const std::string& raw, const std::string& field,
                       const std::string& msg) {
    std::ostringstream os;
    os << "config: " << field << ": " << msg;
    int line = line_of(raw, field.substr(field.rfind('.') + 1));
    if (line > 0) os << " (line " << line << ")";
    throw std::invalid_argument(os.str());
}

struct Reader {
    const std::string& raw;

    void check_keys(const json& obj, const std::string& prefix,
                    std::initializer_list<const char*> allowed) const {
        if (!obj.is_object()) {
            fail(raw, prefix, "expected an object");
        }
        for (const auto& item : obj.items()) {
            bool known = false;
            for (const char* k : allowed) {
                if (item.key() == k) {
                    known = true;
                    break;
                }
            }
            if (!known) {
                std::string field = prefix.empty() ? item.key() : prefix + "." + item.key();
                fail(raw, field, "unknown key");
            }
        }
    }

    template <typename T>
    void get(const json& obj, const char* key, const std::string& prefix, T& target) const {
        if (!obj.contains(key)) return;
        try {
            target = obj.at(key).get<T>();
        } catch (const json::exception&) {
            fail(raw, prefix.empty() ? key : prefix + "." + key, "type mismatch");
        }
    }

    template <typename Enum>
    void get_enum(const json& obj, const char* key, const std::string& prefix,
                  Enum& target,
                  std::initializer_list<std::pair<const char*, Enum>> names) const {
        if (!obj.contains(key)) return;
        std::string field = prefix.empty() ? key : prefix + "." + key;
        std::string value;
        try {
            value = obj.at(key).get<std::string>();
        } catch (const json::exception&) {
            fail(raw, field, "type mismatch");
        }
        for (const auto& [name, e] : names) {
            if (value == name) {
                target = e;
                return;
            }
        }
        fail(raw, field, "unrecognized value \"" + value + "\"");
    }
};

void parse_task(const Reader& r, const json& obj, TaskSpec& spec) {
    r.check_keys(obj, "task",
                 {"num_classes", "dim", "family", "components_per_class", "separation",
                  "train_size", "test_size", "ood"});
    r.get(obj, "num_classes", "task", spec.num_classes);
    r.get(obj, "dim", "task", spec.dim);
    r.get_enum(obj, "family", "task", spec.family,
               {{"gaussian_mixture", TaskFamily::GaussianMixture},
                {"ring_mixture", TaskFamily::RingMixture}});
    r.get(obj, "components_per_class", "task", spec.components_per_class);
    r.get(obj, "separation", "task", spec.separation);
    r.get(obj, "train_size", "task", spec.train_size);
    r.get(obj, "test_size", "task", spec.test_size);
    if (obj.contains("ood")) {
        if (obj.at("ood").is_null()) {
            spec.ood_shift.reset();
        } else {
            const json& ood = obj.at("ood");
            r.check_keys(ood, "task.ood", {"mean_shift", "scale"});
            OodShift shift;
            if (spec.ood_shift) shift = *spec.ood_shift;
            std::vector<double> mean(shift.mean_shift.data(),
                                     shift.mean_shift.data() + shift.mean_shift.size());
            r.get(ood, "mean_shift", "task.ood", mean);
            shift.mean_shift =
                Eigen::Map<const Eigen::VectorXd>(mean.data(), static_cast<int>(mean.size()));
            r.get(ood, "scale", "task.ood", shift.scale);
            spec.ood_shift = shift;
        }
    }
}

void parse_train(const Reader& r, const json& obj, TrainConfig& t) {
    r.check_keys(obj, "train",
                 {"T", "beta_start", "beta_end", "time_dim", "embed_dim",
                  "denoiser_hidden", "encoder_hidden", "encoder_feature_dim",
                  "encoder_epochs", "pretrain_steps", "finetune_steps", "batch", "lr",
                  "cond_drop", "gamma", "weighting", "visual_m", "classifier_hidden",
                  "classifier_epochs", "classifier_batch", "classifier_lr"});
    r.get(obj, "T", "train", t.T);
    r.get(obj, "beta_start", "train", t.beta_start);
    r.get(obj, "beta_end", "train", t.beta_end);
    r.get(obj, "time_dim", "train", t.time_dim);
    r.get(obj, "embed_dim", "train", t.embed_dim);
    r.get(obj, "denoiser_hidden", "train", t.denoiser_hidden);
    r.get(obj, "encoder_hidden", "train", t.encoder_hidden);
    r.get(obj, "encoder_feature_dim", "train", t.encoder_feature_dim);
    r.get(obj, "encoder_epochs", "train", t.encoder_epochs);
    r.get(obj, "pretrain_steps", "train", t.pretrain_steps);
    r.get(obj, "finetune_steps", "train", t.finetune_steps);
    r.get(obj, "batch", "train", t.batch);
    r.get(obj, "lr", "train", t.lr);
    r.get(obj, "cond_drop", "train", t.cond_drop);
    r.get(obj, "gamma", "train", t.gamma);
    r.get_enum(obj, "weighting", "train", t.weighting,
               {{"simple", LossWeighting::Simple}, {"snr", LossWeighting::SnrWeighted}});
    r.get(obj, "visual_m", "train", t.visual_m);
    r.get(obj, "classifier_hidden", "train", t.classifier_hidden);
    r.get(obj, "classifier_epochs", "train", t.classifier_epochs);
    r.get(obj, "classifier_batch", "train", t.classifier_batch);
    r.get(obj, "classifier_lr", "train", t.classifier_lr);
}

void parse_toggles(const Reader& r, const json& obj, PipelineToggles& t) {
    r.check_keys(obj, "toggles", {"finetune", "latent_prior", "visual_guidance", "mmd_loss"});
    r.get(obj, "finetune", "toggles", t.finetune);
    r.get(obj, "latent_prior", "toggles", t.latent_prior);
    r.get(obj, "visual_guidance", "toggles", t.visual_guidance);
    r.get(obj, "mmd_loss", "toggles", t.mmd_loss);
}

void parse_sampler(const Reader& r, const json& obj, SamplerConfig& s) {
    r.check_keys(obj, "sampler", {"guidance_scale", "num_steps", "prior", "strength"});
    r.get(obj, "guidance_scale", "sampler", s.guidance_scale);
    r.get(obj, "num_steps", "sampler", s.num_steps);
    r.get_enum(obj, "prior", "sampler", s.prior,
               {{"gaussian", PriorKind::Gaussian}, {"latent", PriorKind::Latent}});
    r.get(obj, "strength", "sampler", s.strength);
}

void parse_bound(const Reader& r, const json& obj, BoundConfig& b) {
    r.check_keys(obj, "bound",
                 {"log_cardinality", "delta", "sample_size", "num_hypotheses",
                  "threshold", "trials"});
    r.get(obj, "log_cardinality", "bound", b.params.log_cardinality);
    r.get(obj, "delta", "bound", b.params.delta);
    r.get(obj, "sample_size", "bound", b.params.sample_size);
    r.get(obj, "num_hypotheses", "bound", b.num_hypotheses);
    r.get(obj, "threshold", "bound", b.threshold);
    r.get(obj, "trials", "bound", b.trials);
}

void parse_mia(const Reader& r, const json& obj, MiaConfig& m) {
    r.check_keys(obj, "mia",
                 {"num_shadows", "arm", "pool_size", "overfit_epochs_mult", "variant"});
    r.get(obj, "num_shadows", "mia", m.num_shadows);
    r.get_enum(obj, "arm", "mia", m.arm,
               {{"direct", MiaArm::Direct}, {"synthetic", MiaArm::Synthetic}});
    r.get(obj, "pool_size", "mia", m.pool_size);
    r.get(obj, "overfit_epochs_mult", "mia", m.overfit_epochs_mult);
    r.get_enum(obj, "variant", "mia", m.variant,
               {{"online", LiraVariant::Online},
                {"offline", LiraVariant::Offline},
                {"fixed_variance", LiraVariant::FixedVariance}});
}

void parse_experiment(const Reader& r, const json& obj, ExperimentConfig& e) {
    r.check_keys(obj, "experiment",
                 {"seeds", "scale_k", "synthetic_n", "eval_lambda", "task_seed"});
    r.get(obj, "seeds", "experiment", e.seeds);
    r.get(obj, "scale_k", "experiment", e.scale_k);
    r.get(obj, "synthetic_n", "experiment", e.synthetic_n);
    r.get(obj, "eval_lambda", "experiment", e.eval_lambda);
    r.get(obj, "task_seed", "experiment", e.task_seed);
}

[[noreturn]] void invariant(const std::string& field, const std::string& msg) {
    throw std::invalid_argument("config: " + field + ": " + msg);
}

} // namespace

void RunConfig::validate() const {
    try {
        task.validate();
    } catch (const std::invalid_argument& e) {
        invariant("task", e.what());
    }
    try {
        toggles.validate();
    } catch (const std::invalid_argument& e) {
        invariant("toggles", e.what());
    }
    if (train.T < 1) invariant("train.T", "must be >= 1");
    if (!(train.beta_start > 0.0) || !(train.beta_end > train.beta_start) ||
        !(train.beta_end < 1.0)) {
        invariant("train.beta_start", "need 0 < beta_start < beta_end < 1");
    }
    if (train.time_dim < 2 || train.time_dim % 2 != 0) {
        invariant("train.time_dim", "must be a positive even number");
    }
    if (train.embed_dim < 1) invariant("train.embed_dim", "must be >= 1");
    if (train.encoder_feature_dim < 1) {
        invariant("train.encoder_feature_dim", "must be >= 1");
    }
    for (int h : train.denoiser_hidden) {
        if (h < 1) invariant("train.denoiser_hidden", "widths must be >= 1");
    }
    for (int h : train.encoder_hidden) {
        if (h < 1) invariant("train.encoder_hidden", "widths must be >= 1");
    }
    for (int h : train.classifier_hidden) {
        if (h < 1) invariant("train.classifier_hidden", "widths must be >= 1");
    }
    if (train.encoder_epochs < 1) invariant("train.encoder_epochs", "must be >= 1");
    if (train.pretrain_steps < 0) invariant("train.pretrain_steps", "must be >= 0");
    if (train.finetune_steps < 0) invariant("train.finetune_steps", "must be >= 0");
    if (train.batch < 1) invariant("train.batch", "must be >= 1");
    if (!(train.lr > 0.0)) invariant("train.lr", "must be > 0");
    if (!(train.cond_drop >= 0.0 && train.cond_drop <= 1.0)) {
        invariant("train.cond_drop", "must be in [0, 1]");
    }
    if (!(train.gamma >= 0.0)) invariant("train.gamma", "must be >= 0");
    if (train.visual_m < 1) invariant("train.visual_m", "must be >= 1");
    if (train.classifier_epochs < 1) invariant("train.classifier_epochs", "must be >= 1");
    if (train.classifier_batch < 1) invariant("train.classifier_batch", "must be >= 1");
    if (!(train.classifier_lr > 0.0)) invariant("train.classifier_lr", "must be > 0");

    if (!std::isfinite(sampler.guidance_scale)) {
        invariant("sampler.guidance_scale", "must be finite");
    }
    if (sampler.num_steps < 1) invariant("sampler.num_steps", "must be >= 1");
    if (!(sampler.strength > 0.0 && sampler.strength <= 1.0)) {
        invariant("sampler.strength", "must be in (0, 1]");
    }

    try {
        bound.params.validate();
    } catch (const std::invalid_argument& e) {
        invariant("bound", e.what());
    }
    if (bound.num_hypotheses < 1) invariant("bound.num_hypotheses", "must be >= 1");
    if (!(bound.threshold > 0.0)) invariant("bound.threshold", "must be > 0");
    if (bound.trials < 1) invariant("bound.trials", "must be >= 1");

    if (mia.num_shadows < 4 || mia.num_shadows % 2 != 0) {
        invariant("mia.num_shadows", "must be even and >= 4");
    }
    if (mia.pool_size < 4) invariant("mia.pool_size", "must be >= 4");
    if (mia.overfit_epochs_mult < 1) invariant("mia.overfit_epochs_mult", "must be >= 1");

    if (experiment.seeds.empty()) invariant("experiment.seeds", "must be non-empty");
    if (experiment.scale_k.empty()) invariant("experiment.scale_k", "must be non-empty");
    for (double k : experiment.scale_k) {
        if (!(k > 0.0)) invariant("experiment.scale_k", "multipliers must be > 0");
    }
    if (experiment.synthetic_n < 0) invariant("experiment.synthetic_n", "must be >= 0");
    if (!(experiment.eval_lambda >= 0.0)) {
        invariant("experiment.eval_lambda", "must be >= 0");
    }
}

std::string config_snapshot(const RunConfig& cfg) {
    json j;
    json task;
    task["num_classes"] = cfg.task.num_classes;
    task["dim"] = cfg.task.dim;
    task["family"] = family_name(cfg.task.family);
    task["components_per_class"] = cfg.task.components_per_class;
    task["separation"] = cfg.task.separation;
    task["train_size"] = cfg.task.train_size;
    task["test_size"] = cfg.task.test_size;
    if (cfg.task.ood_shift) {
        json ood;
        std::vector<double> mean(
            cfg.task.ood_shift->mean_shift.data(),
            cfg.task.ood_shift->mean_shift.data() + cfg.task.ood_shift->mean_shift.size());
        ood["mean_shift"] = mean;
        ood["scale"] = cfg.task.ood_shift->scale;
        task["ood"] = ood;
    } else {
        task["ood"] = nullptr;
    }
    j["task"] = task;

    json train;
    train["T"] = cfg.train.T;
    train["beta_start"] = cfg.train.beta_start;
    train["beta_end"] = cfg.train.beta_end;
    train["time_dim"] = cfg.train.time_dim;
    train["embed_dim"] = cfg.train.embed_dim;
    train["denoiser_hidden"] = cfg.train.denoiser_hidden;
    train["encoder_hidden"] = cfg.train.encoder_hidden;
    train["encoder_feature_dim"] = cfg.train.encoder_feature_dim;
    train["encoder_epochs"] = cfg.train.encoder_epochs;
    train["pretrain_steps"] = cfg.train.pretrain_steps;
    train["finetune_steps"] = cfg.train.finetune_steps;
    train["batch"] = cfg.train.batch;
    train["lr"] = cfg.train.lr;
    train["cond_drop"] = cfg.train.cond_drop;
    train["gamma"] = cfg.train.gamma;
    train["weighting"] = weighting_name(cfg.train.weighting);
    train["visual_m"] = cfg.train.visual_m;
    train["classifier_hidden"] = cfg.train.classifier_hidden;
    train["classifier_epochs"] = cfg.train.classifier_epochs;
    train["classifier_batch"] = cfg.train.classifier_batch;
    train["classifier_lr"] = cfg.train.classifier_lr;
    j["train"] = train;

    json toggles;
    toggles["finetune"] = cfg.toggles.finetune;
    toggles["latent_prior"] = cfg.toggles.latent_prior;
    toggles["visual_guidance"] = cfg.toggles.visual_guidance;
    toggles["mmd_loss"] = cfg.toggles.mmd_loss;
    j["toggles"] = toggles;

    json sampler;
    sampler["guidance_scale"] = cfg.sampler.guidance_scale;
    sampler["num_steps"] = cfg.sampler.num_steps;
    sampler["prior"] = prior_name(cfg.sampler.prior);
    sampler["strength"] = cfg.sampler.strength;
    j["sampler"] = sampler;

    json bound;
    bound["log_cardinality"] = cfg.bound.params.log_cardinality;
    bound["delta"] = cfg.bound.params.delta;
    bound["sample_size"] = cfg.bound.params.sample_size;
    bound["num_hypotheses"] = cfg.bound.num_hypotheses;
    bound["threshold"] = cfg.bound.threshold;
    bound["trials"] = cfg.bound.trials;
    j["bound"] = bound;

    json mia;
    mia["num_shadows"] = cfg.mia.num_shadows;
    mia["arm"] = arm_name(cfg.mia.arm);
    mia["pool_size"] = cfg.mia.pool_size;
    mia["overfit_epochs_mult"] = cfg.mia.overfit_epochs_mult;
    mia["variant"] = variant_name(cfg.mia.variant);
    j["mia"] = mia;

    json experiment;
    experiment["seeds"] = cfg.experiment.seeds;
    experiment["scale_k"] = cfg.experiment.scale_k;
    experiment["synthetic_n"] = cfg.experiment.synthetic_n;
    experiment["eval_lambda"] = cfg.experiment.eval_lambda;
    experiment["task_seed"] = cfg.experiment.task_seed;
    j["experiment"] = experiment;

    return j.dump(2) + "\n";
}

RunConfig parse_config_text(const std::string& text) {
    RunConfig cfg;
    bool blank = true;
    for (char c : text) {
        if (!std::isspace(static_cast<unsigned char>(c))) {
            blank = false;
            break;
        }
    }
    if (blank) {
        cfg.validate();
        return cfg;
    }

    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        int line = 1;
        for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
            if (text[i] == '\n') ++line;
        }
        throw std::invalid_argument("config: JSON parse error at line " +
                                    std::to_string(line) + ": " + e.what());
    }

    Reader r{text};
    r.check_keys(root, "",
                 {"task", "train", "toggles", "sampler", "bound", "mia", "experiment"});
    if (root.contains("task")) parse_task(r, root.at("task"), cfg.task);
    if (root.contains("train")) parse_train(r, root.at("train"), cfg.train);
    if (root.contains("toggles")) parse_toggles(r, root.at("toggles"), cfg.toggles);
    if (root.contains("sampler")) parse_sampler(r, root.at("sampler"), cfg.sampler);
    if (root.contains("bound")) parse_bound(r, root.at("bound"), cfg.bound);
    if (root.contains("mia")) parse_mia(r, root.at("mia"), cfg.mia);
    if (root.contains("experiment")) {
        parse_experiment(r, root.at("experiment"), cfg.experiment);
    }
    try {
        cfg.validate();
    } catch (const std::invalid_argument& e) {
        // anchor the invariant message to the offending key when it appears
        // in the file (message shape: "config: a.b: reason")
        std::string msg = e.what();
        std::string field;
        std::size_t start = msg.find(": ");
        if (start != std::string::npos) {
            std::size_t end = msg.find(':', start + 2);
            if (end != std::string::npos) field = msg.substr(start + 2, end - start - 2);
        }
        int line = field.empty() ? 0 : line_of(text, field.substr(field.rfind('.') + 1));
        if (line > 0) msg += " (line " + std::to_string(line) + ")";
        throw std::invalid_argument(msg);
    }
    return cfg;
}

RunConfig parse_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::invalid_argument("config: cannot open " + path.string());
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str());
}

} // namespace dmsynth
