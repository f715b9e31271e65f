#pragma once

#include <string>
#include <vector>

#include "dmsynth/config.hpp"
#include "dmsynth/report.hpp"

namespace dmsynth {

// Command dispatcher behind the dmsynth binary; args exclude the program
// name. Returns the process exit code: 0 success, 1 validation error,
// 2 runtime failure.
int run_cli(const std::vector<std::string>& args);

// Log-log ROC figure as emitted by the mia command; exposed so rendering can
// be checked against the same construction.
Plot roc_plot(const RocCurve& roc);

} // namespace dmsynth
