#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

namespace dmsynth {

// Labeled vectors; the empirical stand-in for both the target distribution
// and synthesized training sets.
struct LabeledDataset {
    std::vector<Eigen::VectorXd> x;
    std::vector<int> y;
    int num_classes = 0;
    int dim = 0;
    std::string split; // "train", "test", "ood", "pretrain", "synthetic", ...

    std::size_t size() const { return x.size(); }

    // throws std::invalid_argument on label range, dimension, or finiteness
    // violations
    void validate() const;

    std::vector<int> class_indices(int label) const;
};

} // namespace dmsynth
