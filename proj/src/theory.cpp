#include "dmsynth/theory.hpp"

#include <cmath>
#include <stdexcept>

#include "dmsynth/rng.hpp"

namespace dmsynth {

void BoundParams::validate() const {
    if (!(log_cardinality >= 0.0) || !std::isfinite(log_cardinality)) {
        throw std::invalid_argument("BoundParams: log_cardinality must be finite and >= 0");
    }
    if (!(delta > 0.0) || !(delta < 1.0)) {
        throw std::invalid_argument("BoundParams: delta must be in (0, 1)");
    }
    if (sample_size < 1) throw std::invalid_argument("BoundParams: sample_size must be >= 1");
}

double gen_bound(const BoundParams& p) {
    p.validate();
    return std::sqrt((p.log_cardinality + std::log(1.0 / p.delta)) /
                     static_cast<double>(p.sample_size));
}

double hoeffding_tail(double t, const std::vector<std::pair<double, double>>& ranges) {
    if (!(t > 0.0)) throw std::invalid_argument("hoeffding_tail: t must be > 0");
    if (ranges.empty()) throw std::invalid_argument("hoeffding_tail: no ranges");
    double denom = 0.0;
    for (auto [a, b] : ranges) {
        if (!(b > a)) throw std::invalid_argument("hoeffding_tail: degenerate range");
        denom += (b - a) * (b - a);
    }
    return std::exp(-2.0 * t * t / denom);
}

FiniteClassExperiment FiniteClassExperiment::default_experiment(int num_hypotheses) {
    FiniteClassExperiment exp;
    // thresholds on an even grid spanning both class components
    double lo = -3.0, hi = exp.class_gap + 3.0;
    for (int i = 0; i < num_hypotheses; ++i) {
        double frac = (num_hypotheses == 1) ? 0.5
                                            : static_cast<double>(i) / (num_hypotheses - 1);
        exp.thresholds.push_back(lo + frac * (hi - lo));
    }
    return exp;
}

namespace {

struct Sample {
    double x;
    int y;
};

Sample draw(const FiniteClassExperiment& exp, Rng& rng) {
    Sample s;
    s.y = rng.uniform() < 0.5 ? 0 : 1;
    s.x = (s.y == 1 ? exp.class_gap : 0.0) + rng.normal();
    if (rng.uniform() < exp.label_noise) s.y = 1 - s.y;
    return s;
}

// 0/1 loss of every threshold classifier on one sample, accumulated
void accumulate_losses(const FiniteClassExperiment& exp, const Sample& s,
                       std::vector<double>& loss_sums) {
    for (std::size_t f = 0; f < exp.thresholds.size(); ++f) {
        int pred = s.x > exp.thresholds[f] ? 1 : 0;
        if (pred != s.y) loss_sums[f] += 1.0;
    }
}

} // namespace

ViolationEstimate bound_violation_mc(const FiniteClassExperiment& exp, int sample_size,
                                     double t, int trials, std::uint64_t seed) {
    if (trials < 1) throw std::invalid_argument("bound_violation_mc: trials must be >= 1");
    if (sample_size < 1) throw std::invalid_argument("bound_violation_mc: sample_size must be >= 1");
    const std::size_t F = exp.thresholds.size();
    if (F == 0) throw std::invalid_argument("bound_violation_mc: no hypotheses");

    Rng base(seed);

    // Test_D on a fixed evaluation sample as the distribution proxy.
    std::vector<double> test_loss(F, 0.0);
    {
        Rng eval_rng = base.split(0);
        for (int i = 0; i < exp.eval_size; ++i) {
            accumulate_losses(exp, draw(exp, eval_rng), test_loss);
        }
        for (auto& v : test_loss) v /= exp.eval_size;
    }

    int sup_violations = 0;
    std::vector<double> per_hyp(F, 0.0);
    for (int trial = 0; trial < trials; ++trial) {
        Rng trial_rng = base.split(1 + static_cast<std::uint64_t>(trial));
        std::vector<double> train_loss(F, 0.0);
        for (int i = 0; i < sample_size; ++i) {
            accumulate_losses(exp, draw(exp, trial_rng), train_loss);
        }
        bool any = false;
        for (std::size_t f = 0; f < F; ++f) {
            double gap = test_loss[f] - train_loss[f] / sample_size;
            if (gap >= t) {
                any = true;
                per_hyp[f] += 1.0;
            }
        }
        if (any) ++sup_violations;
    }

    ViolationEstimate est;
    est.empirical_rate = static_cast<double>(sup_violations) / trials;
    est.analytic_cap = static_cast<double>(F) *
                       std::exp(-2.0 * static_cast<double>(sample_size) * t * t);
    for (auto& v : per_hyp) v /= trials;
    est.per_hypothesis_rate = std::move(per_hyp);
    return est;
}

} // namespace dmsynth
