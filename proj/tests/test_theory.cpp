#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "dmsynth/theory.hpp"

using namespace dmsynth;

TEST_CASE("gen_bound arithmetic") {
    BoundParams p;
    p.log_cardinality = 1.0;
    p.delta = std::exp(-1.0);
    p.sample_size = 2;
    CHECK(gen_bound(p) == doctest::Approx(1.0).epsilon(1e-14));

    p.log_cardinality = 0.0;
    p.delta = 1.0 - 1e-15;
    p.sample_size = 7;
    CHECK(gen_bound(p) < 1e-7);
}

TEST_CASE("gen_bound matches a pinned high-precision value") {
    // sqrt((20 ln 2 + ln 20) / 1e4) evaluated with mpmath at 50 digits:
    // 0.041059317925110369740792210432839583927...
    BoundParams p;
    p.log_cardinality = 20.0 * std::log(2.0);
    p.delta = 0.05;
    p.sample_size = 10000;
    CHECK(std::abs(gen_bound(p) - 0.04105931792511037) < 1e-10);
}

TEST_CASE("gen_bound monotonicity on grids") {
    for (int ls = 1; ls <= 5; ++ls) {
        for (int d = 1; d <= 5; ++d) {
            for (int n = 1; n <= 5; ++n) {
                BoundParams p;
                p.log_cardinality = ls;
                p.delta = d * 0.15;
                p.sample_size = 100 * n;
                double base = gen_bound(p);

                BoundParams larger_s = p;
                larger_s.sample_size *= 2;
                CHECK(gen_bound(larger_s) < base);

                BoundParams larger_f = p;
                larger_f.log_cardinality += 0.5;
                CHECK(gen_bound(larger_f) > base);

                BoundParams smaller_delta = p;
                smaller_delta.delta = p.delta / 2.0;
                CHECK(gen_bound(smaller_delta) > base);
            }
        }
    }
}

TEST_CASE("gen_bound parameter validation") {
    BoundParams p;
    p.delta = 0.0;
    CHECK_THROWS_AS(gen_bound(p), std::invalid_argument);
    p.delta = 0.5;
    p.sample_size = 0;
    CHECK_THROWS_AS(gen_bound(p), std::invalid_argument);
    p.sample_size = 1;
    p.log_cardinality = -1.0;
    CHECK_THROWS_AS(gen_bound(p), std::invalid_argument);
}

TEST_CASE("hoeffding_tail values and algebra") {
    // one unit range, t = 0.5: exp(-0.5); e^{-0.5} pinned independently
    double v = hoeffding_tail(0.5, {{0.0, 1.0}});
    CHECK(v == doctest::Approx(0.60653065971263342).epsilon(1e-12));

    // t -> 0+ pushes the bound to 1
    CHECK(hoeffding_tail(1e-12, {{0.0, 1.0}}) == doctest::Approx(1.0).epsilon(1e-12));

    // doubling every range width divides the exponent by 4 exactly
    std::vector<std::pair<double, double>> ranges = {{0.0, 1.0}, {-1.0, 0.5}};
    std::vector<std::pair<double, double>> wide = {{0.0, 2.0}, {-2.0, 1.0}};
    double narrow = hoeffding_tail(0.7, ranges);
    double wider = hoeffding_tail(0.7, wide);
    CHECK(std::log(wider) == doctest::Approx(std::log(narrow) / 4.0).epsilon(1e-12));
    CHECK(wider > narrow);

    std::vector<std::pair<double, double>> degenerate = {{1.0, 1.0}};
    std::vector<std::pair<double, double>> unit = {{0.0, 1.0}};
    CHECK_THROWS_AS(hoeffding_tail(0.5, degenerate), std::invalid_argument);
    CHECK_THROWS_AS(hoeffding_tail(0.0, unit), std::invalid_argument);
}

TEST_CASE("constant-loss single hypothesis never violates") {
    FiniteClassExperiment exp;
    exp.class_gap = 1000.0; // components so far apart the midpoint threshold
    exp.thresholds = {500.0}; // classifies perfectly: loss identically 0
    exp.label_noise = 0.0;
    exp.eval_size = 20000;
    ViolationEstimate est = bound_violation_mc(exp, 100, 0.01, 200, 7);
    CHECK(est.empirical_rate == 0.0);
}

TEST_CASE("large-t regime stays under the analytic cap with binomial slack") {
    FiniteClassExperiment exp = FiniteClassExperiment::default_experiment(20);
    exp.eval_size = 50000;
    const int trials = 500;
    double t = 0.15; // cap = 20 exp(-2 * 500 * 0.0225) ~ 3e-9 << 1/trials
    ViolationEstimate est = bound_violation_mc(exp, 500, t, trials, 11);
    CHECK(est.analytic_cap < 1.0 / trials);
    CHECK(est.empirical_rate <=
          est.analytic_cap + 3.0 * std::sqrt(std::max(est.analytic_cap, 1e-12) / trials));
}

TEST_CASE("default experiment satisfies the bound and union-bound consistency") {
    FiniteClassExperiment exp = FiniteClassExperiment::default_experiment(50);
    ViolationEstimate est = bound_violation_mc(exp, 500, 0.1, 1000, 13);
    CHECK(est.empirical_rate <= est.analytic_cap);

    double per_hyp_sum = 0.0;
    for (double r : est.per_hypothesis_rate) per_hyp_sum += r;
    CHECK(est.empirical_rate <= per_hyp_sum + 1e-12);
}
