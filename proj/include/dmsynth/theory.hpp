#pragma once

#include <cstdint>
#include <utility>
#include <vector>

namespace dmsynth {

struct BoundParams {
    double log_cardinality = 0.0; // log |F|, >= 0
    double delta = 0.05;          // in (0, 1)
    std::int64_t sample_size = 1; // |S| >= 1

    void validate() const;
};

// sqrt((log|F| + log 1/delta) / |S|)
double gen_bound(const BoundParams& p);

// exp(-2 t^2 / sum (b_i - a_i)^2) for the sum deviation of independent
// bounded variables.
double hoeffding_tail(double t, const std::vector<std::pair<double, double>>& ranges);

// Finite hypothesis class of 1-D threshold classifiers f_c(x) = 1[x > c]
// over a two-component Gaussian task with label noise; 0/1 loss.
struct FiniteClassExperiment {
    std::vector<double> thresholds;
    double class_gap = 2.0;   // label-1 component mean minus label-0 mean
    double label_noise = 0.1; // flip probability
    int eval_size = 100000;   // fixed evaluation set standing in for D

    static FiniteClassExperiment default_experiment(int num_hypotheses = 50);
};

struct ViolationEstimate {
    double empirical_rate = 0.0;
    double analytic_cap = 0.0; // |F| exp(-2 |S| t^2)
    std::vector<double> per_hypothesis_rate;
};

// Estimates Pr[sup_f (Test_D(f) - Train_S(f)) >= t] over independent draws
// of S and compares against the union-bound cap.
ViolationEstimate bound_violation_mc(const FiniteClassExperiment& exp, int sample_size,
                                     double t, int trials, std::uint64_t seed);

} // namespace dmsynth
