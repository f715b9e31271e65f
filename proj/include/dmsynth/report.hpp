#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "dmsynth/dataset.hpp"

namespace dmsynth {

// 9 significant digits, '.' decimal separator, locale-independent.
std::string format_number(double v);

void write_csv(const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows,
               const std::filesystem::path& path);

// Labeled-point dump: a two-line preamble (column names, then the dim and
// class-count values) followed by x_1,...,x_d,y rows.
void write_dataset_csv(const LabeledDataset& data, const std::filesystem::path& path);

struct PlotSeries {
    std::string name;
    std::vector<std::pair<double, double>> points;
};

struct Plot {
    std::string title;
    std::string x_label;
    std::string y_label;
    bool log_x = false;
    bool log_y = false;
    double log_floor = 1e-4; // replaces nonpositive values on log axes
    std::vector<PlotSeries> series;
};

std::string svg_string(const Plot& plot);
void write_svg(const Plot& plot, const std::filesystem::path& path);

// Pixel position of a data point under the plot's axis mapping; exposed so
// rendering can be checked geometrically.
std::pair<double, double> svg_point_px(const Plot& plot, double x, double y);

// FNV-1a over the raw bytes.
std::uint64_t fnv1a_file_hash(const std::filesystem::path& path);

// Writes dir/manifest.json mapping each file name to its content hash.
void write_manifest(const std::filesystem::path& dir,
                    const std::vector<std::string>& files);

} // namespace dmsynth
