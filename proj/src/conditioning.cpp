#include "dmsynth/conditioning.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace dmsynth {

FeatureFn identity_feature_fn() {
    return [](const Eigen::VectorXd& x) { return x; };
}

ConditionTable ConditionTable::init(int num_classes, int embed_dim, int visual_dim,
                                    std::uint64_t seed) {
    if (num_classes < 1 || embed_dim < 1 || visual_dim < 0) {
        throw std::invalid_argument("ConditionTable: invalid dimensions");
    }
    ConditionTable table;
    Rng rng(seed);
    double scale = 1.0 / std::sqrt(static_cast<double>(embed_dim));
    table.class_embeddings.resize(num_classes, embed_dim);
    for (int c = 0; c < num_classes; ++c) {
        for (int j = 0; j < embed_dim; ++j) table.class_embeddings(c, j) = scale * rng.normal();
    }
    table.null_embedding.resize(embed_dim);
    for (int j = 0; j < embed_dim; ++j) table.null_embedding[j] = scale * rng.normal();
    table.visual_dim = visual_dim;
    return table;
}

Eigen::VectorXd Condition::concat() const {
    Eigen::VectorXd out(class_part.size() + visual_part.size());
    out << class_part, visual_part;
    return out;
}

Eigen::VectorXd visual_guidance(const FeatureFn& psi,
                                const std::vector<Eigen::VectorXd>& class_samples,
                                int m, Rng& rng) {
    if (class_samples.empty()) throw std::invalid_argument("visual_guidance: empty class");
    if (m < 1) throw std::invalid_argument("visual_guidance: m must be >= 1");
    const int n = static_cast<int>(class_samples.size());
    const int take = std::min(m, n);

    // partial Fisher-Yates for a without-replacement draw
    std::vector<int> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    for (int i = 0; i < take; ++i) {
        int j = i + static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(n - i)));
        std::swap(idx[i], idx[j]);
    }
    // fixed summation order over chosen positions keeps the full-mean case
    // order-independent
    std::vector<int> chosen(idx.begin(), idx.begin() + take);
    std::sort(chosen.begin(), chosen.end());

    Eigen::VectorXd sum = psi(class_samples[chosen[0]]);
    for (int i = 1; i < take; ++i) sum += psi(class_samples[chosen[i]]);
    return sum / static_cast<double>(take);
}

Condition build_condition(const ConditionTable& table, int label,
                          const std::optional<Eigen::VectorXd>& visual) {
    if (label < 0 || label >= table.num_classes()) {
        throw std::invalid_argument("build_condition: label out of range");
    }
    Condition cond;
    cond.class_part = table.class_embeddings.row(label).transpose();
    if (visual) {
        if (visual->size() != table.visual_dim) {
            throw std::invalid_argument("build_condition: visual dimension mismatch");
        }
        cond.visual_part = *visual;
    } else {
        cond.visual_part = Eigen::VectorXd::Zero(table.visual_dim);
    }
    cond.is_null = false;
    cond.label = label;
    return cond;
}

Condition null_condition(const ConditionTable& table) {
    Condition cond;
    cond.class_part = table.null_embedding;
    cond.visual_part = Eigen::VectorXd::Zero(table.visual_dim);
    cond.is_null = true;
    cond.label = -1;
    return cond;
}

Condition drop_condition(const Condition& cond, const ConditionTable& table, double p,
                         Rng& rng) {
    if (p < 0.0 || p > 1.0) throw std::invalid_argument("drop_condition: p out of [0,1]");
    if (rng.uniform() < p) return null_condition(table);
    return cond;
}

ConditionTableOptimizer ConditionTableOptimizer::init(const ConditionTable& table, double lr) {
    ConditionTableOptimizer opt;
    opt.lr = lr;
    opt.m_class = Eigen::MatrixXd::Zero(table.num_classes(), table.embed_dim());
    opt.v_class = opt.m_class;
    opt.m_null = Eigen::VectorXd::Zero(table.embed_dim());
    opt.v_null = opt.m_null;
    return opt;
}

ConditionTableGrads ConditionTableGrads::zeros_like(const ConditionTable& table) {
    ConditionTableGrads g;
    g.class_embeddings = Eigen::MatrixXd::Zero(table.num_classes(), table.embed_dim());
    g.null_embedding = Eigen::VectorXd::Zero(table.embed_dim());
    return g;
}

void ConditionTableGrads::accumulate(const Condition& cond,
                                     const Eigen::VectorXd& class_part_grad) {
    if (cond.is_null) {
        null_embedding += class_part_grad;
    } else {
        class_embeddings.row(cond.label) += class_part_grad.transpose();
    }
}

void condition_table_step(ConditionTable& table, const ConditionTableGrads& grads,
                          ConditionTableOptimizer& opt) {
    if (!grads.class_embeddings.allFinite() || !grads.null_embedding.allFinite()) {
        throw std::runtime_error("condition_table_step: non-finite gradient");
    }
    opt.step += 1;
    double bc1 = 1.0 - std::pow(opt.beta1, static_cast<double>(opt.step));
    double bc2 = 1.0 - std::pow(opt.beta2, static_cast<double>(opt.step));

    opt.m_class = opt.beta1 * opt.m_class + (1.0 - opt.beta1) * grads.class_embeddings;
    opt.v_class = opt.beta2 * opt.v_class.array() +
                  (1.0 - opt.beta2) * grads.class_embeddings.array().square();
    table.class_embeddings.array() -= opt.lr * (opt.m_class.array() / bc1) /
                                      ((opt.v_class.array() / bc2).sqrt() + opt.eps);

    opt.m_null = opt.beta1 * opt.m_null + (1.0 - opt.beta1) * grads.null_embedding;
    opt.v_null = opt.beta2 * opt.v_null.array() +
                 (1.0 - opt.beta2) * grads.null_embedding.array().square();
    table.null_embedding.array() -= opt.lr * (opt.m_null.array() / bc1) /
                                    ((opt.v_null.array() / bc2).sqrt() + opt.eps);
}

} // namespace dmsynth
