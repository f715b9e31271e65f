#include "dmsynth/report.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace dmsynth {

std::string format_number(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 9);
    if (res.ec != std::errc{}) throw std::runtime_error("format_number: conversion failed");
    return std::string(buf, res.ptr);
}

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
    return out;
}

} // namespace

void write_csv(const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows,
               const std::filesystem::path& path) {
    std::ofstream out = open_out(path);
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (i) out << ',';
        out << header[i];
    }
    out << '\n';
    for (const auto& row : rows) {
        if (row.size() != header.size()) {
            throw std::invalid_argument("write_csv: row width differs from header");
        }
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out << ',';
            out << row[i];
        }
        out << '\n';
    }
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

void write_dataset_csv(const LabeledDataset& data, const std::filesystem::path& path) {
    data.validate();
    std::ofstream out = open_out(path);
    out << "dim,num_classes\n" << data.dim << ',' << data.num_classes << '\n';
    for (std::size_t i = 0; i < data.size(); ++i) {
        for (int d = 0; d < data.dim; ++d) out << format_number(data.x[i][d]) << ',';
        out << data.y[i] << '\n';
    }
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

namespace {

constexpr double kWidth = 640.0, kHeight = 480.0;
constexpr double kLeft = 70.0, kRight = 20.0, kTop = 40.0, kBottom = 50.0;

struct AxisRange {
    double x_lo = 0.0, x_hi = 1.0, y_lo = 0.0, y_hi = 1.0;
};

double axis_value(double v, bool log_axis, double floor) {
    if (!log_axis) return v;
    return std::log10(std::max(v, floor));
}

AxisRange plot_range(const Plot& plot) {
    AxisRange r;
    bool first = true;
    for (const PlotSeries& s : plot.series) {
        for (auto [x, y] : s.points) {
            double ax = axis_value(x, plot.log_x, plot.log_floor);
            double ay = axis_value(y, plot.log_y, plot.log_floor);
            if (first) {
                r.x_lo = r.x_hi = ax;
                r.y_lo = r.y_hi = ay;
                first = false;
            } else {
                r.x_lo = std::min(r.x_lo, ax);
                r.x_hi = std::max(r.x_hi, ax);
                r.y_lo = std::min(r.y_lo, ay);
                r.y_hi = std::max(r.y_hi, ay);
            }
        }
    }
    if (r.x_hi - r.x_lo < 1e-12) {
        r.x_lo -= 1.0;
        r.x_hi += 1.0;
    }
    if (r.y_hi - r.y_lo < 1e-12) {
        r.y_lo -= 1.0;
        r.y_hi += 1.0;
    }
    double xpad = 0.05 * (r.x_hi - r.x_lo);
    double ypad = 0.05 * (r.y_hi - r.y_lo);
    r.x_lo -= xpad;
    r.x_hi += xpad;
    r.y_lo -= ypad;
    r.y_hi += ypad;
    return r;
}

std::pair<double, double> map_px(const Plot& plot, const AxisRange& r, double x, double y) {
    double ax = axis_value(x, plot.log_x, plot.log_floor);
    double ay = axis_value(y, plot.log_y, plot.log_floor);
    double px = kLeft + (ax - r.x_lo) / (r.x_hi - r.x_lo) * (kWidth - kLeft - kRight);
    double py = kHeight - kBottom -
                (ay - r.y_lo) / (r.y_hi - r.y_lo) * (kHeight - kTop - kBottom);
    return {px, py};
}

std::string px_str(double v) {
    std::ostringstream os;
    os.precision(2);
    os << std::fixed << v;
    return os.str();
}

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
                          "#8c564b"};

} // namespace

std::pair<double, double> svg_point_px(const Plot& plot, double x, double y) {
    return map_px(plot, plot_range(plot), x, y);
}

std::string svg_string(const Plot& plot) {
    if (plot.series.empty()) throw std::invalid_argument("svg_string: no series");
    AxisRange r = plot_range(plot);
    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth
        << "\" height=\"" << kHeight << "\">\n";
    svg << "<rect width=\"" << kWidth << "\" height=\"" << kHeight
        << "\" fill=\"white\"/>\n";
    svg << "<text x=\"" << kWidth / 2 << "\" y=\"24\" text-anchor=\"middle\" "
        << "font-size=\"15\">" << plot.title << "</text>\n";

    // axes
    svg << "<line x1=\"" << kLeft << "\" y1=\"" << kHeight - kBottom << "\" x2=\""
        << kWidth - kRight << "\" y2=\"" << kHeight - kBottom
        << "\" stroke=\"black\"/>\n";
    svg << "<line x1=\"" << kLeft << "\" y1=\"" << kTop << "\" x2=\"" << kLeft
        << "\" y2=\"" << kHeight - kBottom << "\" stroke=\"black\"/>\n";

    // ticks: 5 per axis in axis (possibly log) space
    for (int i = 0; i <= 4; ++i) {
        double fx = r.x_lo + (r.x_hi - r.x_lo) * i / 4.0;
        double fy = r.y_lo + (r.y_hi - r.y_lo) * i / 4.0;
        double vx = plot.log_x ? std::pow(10.0, fx) : fx;
        double vy = plot.log_y ? std::pow(10.0, fy) : fy;
        double px = kLeft + (kWidth - kLeft - kRight) * i / 4.0;
        double py = kHeight - kBottom - (kHeight - kTop - kBottom) * i / 4.0;
        svg << "<line x1=\"" << px_str(px) << "\" y1=\"" << kHeight - kBottom
            << "\" x2=\"" << px_str(px) << "\" y2=\"" << kHeight - kBottom + 5
            << "\" stroke=\"black\"/>\n";
        svg << "<text x=\"" << px_str(px) << "\" y=\"" << kHeight - kBottom + 18
            << "\" text-anchor=\"middle\" font-size=\"10\">" << format_number(vx)
            << "</text>\n";
        svg << "<line x1=\"" << kLeft - 5 << "\" y1=\"" << px_str(py) << "\" x2=\""
            << kLeft << "\" y2=\"" << px_str(py) << "\" stroke=\"black\"/>\n";
        svg << "<text x=\"" << kLeft - 8 << "\" y=\"" << px_str(py + 3)
            << "\" text-anchor=\"end\" font-size=\"10\">" << format_number(vy)
            << "</text>\n";
    }
    svg << "<text x=\"" << (kLeft + kWidth - kRight) / 2 << "\" y=\"" << kHeight - 10
        << "\" text-anchor=\"middle\" font-size=\"12\">" << plot.x_label << "</text>\n";
    svg << "<text x=\"16\" y=\"" << (kTop + kHeight - kBottom) / 2
        << "\" text-anchor=\"middle\" font-size=\"12\" transform=\"rotate(-90 16 "
        << (kTop + kHeight - kBottom) / 2 << ")\">" << plot.y_label << "</text>\n";

    for (std::size_t si = 0; si < plot.series.size(); ++si) {
        const PlotSeries& s = plot.series[si];
        const char* color = kPalette[si % 6];
        svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" "
            << "points=\"";
        for (auto [x, y] : s.points) {
            auto [px, py] = map_px(plot, r, x, y);
            svg << px_str(px) << ',' << px_str(py) << ' ';
        }
        svg << "\"/>\n";
        for (auto [x, y] : s.points) {
            auto [px, py] = map_px(plot, r, x, y);
            svg << "<circle cx=\"" << px_str(px) << "\" cy=\"" << px_str(py)
                << "\" r=\"2.5\" fill=\"" << color << "\"/>\n";
        }
        // legend
        double ly = kTop + 14.0 * static_cast<double>(si);
        svg << "<rect x=\"" << kWidth - kRight - 130 << "\" y=\"" << ly
            << "\" width=\"10\" height=\"10\" fill=\"" << color << "\"/>\n";
        svg << "<text x=\"" << kWidth - kRight - 115 << "\" y=\"" << ly + 9
            << "\" font-size=\"11\">" << s.name << "</text>\n";
    }
    svg << "</svg>\n";
    return svg.str();
}

void write_svg(const Plot& plot, const std::filesystem::path& path) {
    std::ofstream out = open_out(path);
    out << svg_string(plot);
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

std::uint64_t fnv1a_file_hash(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open for hashing: " + path.string());
    std::uint64_t h = 0xcbf29ce484222325ull;
    char buf[4096];
    while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
        for (std::streamsize i = 0; i < in.gcount(); ++i) {
            h ^= static_cast<unsigned char>(buf[i]);
            h *= 0x100000001b3ull;
        }
    }
    return h;
}

void write_manifest(const std::filesystem::path& dir,
                    const std::vector<std::string>& files) {
    nlohmann::json entries = nlohmann::json::object();
    for (const std::string& f : files) {
        std::ostringstream hex;
        hex << std::hex << fnv1a_file_hash(dir / f);
        entries[f] = hex.str();
    }
    nlohmann::json manifest;
    manifest["hash"] = "fnv1a64";
    manifest["files"] = entries;
    std::ofstream out = open_out(dir / "manifest.json");
    out << manifest.dump(2) << '\n';
    if (!out) throw std::runtime_error("write failed: manifest.json");
}

} // namespace dmsynth
