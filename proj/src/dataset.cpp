#include "dmsynth/dataset.hpp"

#include <stdexcept>

namespace dmsynth {

void LabeledDataset::validate() const {
    if (x.size() != y.size()) throw std::invalid_argument("LabeledDataset: x/y size mismatch");
    if (x.empty()) throw std::invalid_argument("LabeledDataset: empty dataset");
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (static_cast<int>(x[i].size()) != dim) {
            throw std::invalid_argument("LabeledDataset: nonuniform dimension");
        }
        if (!x[i].allFinite()) throw std::invalid_argument("LabeledDataset: non-finite point");
        if (y[i] < 0 || y[i] >= num_classes) {
            throw std::invalid_argument("LabeledDataset: label out of range");
        }
    }
}

std::vector<int> LabeledDataset::class_indices(int label) const {
    std::vector<int> idx;
    for (std::size_t i = 0; i < y.size(); ++i) {
        if (y[i] == label) idx.push_back(static_cast<int>(i));
    }
    return idx;
}

} // namespace dmsynth
