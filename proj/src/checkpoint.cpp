#include "dmsynth/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <vector>

#include <json.hpp>

namespace dmsynth {

namespace {

static_assert(std::endian::native == std::endian::little,
              "checkpoint writer assumes a little-endian host");

const char* activation_name(Activation a) {
    return a == Activation::SiLU ? "silu" : "identity";
}
const char* final_activation_name(FinalActivation a) {
    return a == FinalActivation::Softmax ? "softmax" : "identity";
}

Activation parse_activation(const std::string& s) {
    if (s == "silu") return Activation::SiLU;
    if (s == "identity") return Activation::Identity;
    throw std::runtime_error("checkpoint: unknown activation '" + s + "'");
}
FinalActivation parse_final_activation(const std::string& s) {
    if (s == "softmax") return FinalActivation::Softmax;
    if (s == "identity") return FinalActivation::Identity;
    throw std::runtime_error("checkpoint: unknown final activation '" + s + "'");
}

} // namespace

void save_checkpoint(const DenseNet& net, std::uint64_t seed,
                     const std::filesystem::path& path) {
    nlohmann::json header;
    header["format_version"] = kCheckpointFormatVersion;
    header["seed"] = seed;
    header["spec"] = {
        {"input_dim", net.spec.input_dim},
        {"hidden_dims", net.spec.hidden_dims},
        {"output_dim", net.spec.output_dim},
        {"activation", activation_name(net.spec.activation)},
        {"final_activation", final_activation_name(net.spec.final_activation)},
    };
    nlohmann::json shapes = nlohmann::json::array();
    for (const auto& w : net.weights) {
        shapes.push_back({w.rows(), w.cols()});
    }
    header["shapes"] = shapes;

    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("save_checkpoint: cannot open " + path.string());
    out << header.dump() << '\n';

    std::vector<float> buf;
    for (std::size_t l = 0; l < net.weights.size(); ++l) {
        const auto& w = net.weights[l];
        for (Eigen::Index r = 0; r < w.rows(); ++r) {
            for (Eigen::Index c = 0; c < w.cols(); ++c) {
                buf.push_back(static_cast<float>(w(r, c)));
            }
        }
        const auto& b = net.biases[l];
        for (Eigen::Index i = 0; i < b.size(); ++i) {
            buf.push_back(static_cast<float>(b[i]));
        }
    }
    out.write(reinterpret_cast<const char*>(buf.data()),
              static_cast<std::streamsize>(buf.size() * sizeof(float)));
    if (!out) throw std::runtime_error("save_checkpoint: write failed for " + path.string());
}

LoadedCheckpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("load_checkpoint: cannot open " + path.string());
    std::string header_line;
    if (!std::getline(in, header_line)) {
        throw std::runtime_error("load_checkpoint: missing header in " + path.string());
    }
    nlohmann::json header = nlohmann::json::parse(header_line);
    if (header.at("format_version").get<int>() != kCheckpointFormatVersion) {
        throw std::runtime_error("load_checkpoint: unsupported format version");
    }

    NetSpec spec;
    const auto& js = header.at("spec");
    spec.input_dim = js.at("input_dim").get<int>();
    spec.hidden_dims = js.at("hidden_dims").get<std::vector<int>>();
    spec.output_dim = js.at("output_dim").get<int>();
    spec.activation = parse_activation(js.at("activation").get<std::string>());
    spec.final_activation = parse_final_activation(js.at("final_activation").get<std::string>());
    spec.validate();

    LoadedCheckpoint result;
    result.seed = header.at("seed").get<std::uint64_t>();
    result.net.spec = spec;

    auto shapes = spec.layer_shapes();
    for (std::size_t l = 0; l < shapes.size(); ++l) {
        auto [fan_in, fan_out] = shapes[l];
        const auto& hs = header.at("shapes").at(l);
        if (hs.at(0).get<int>() != fan_out || hs.at(1).get<int>() != fan_in) {
            throw std::runtime_error("load_checkpoint: shape table disagrees with spec");
        }
        std::vector<float> buf(static_cast<std::size_t>(fan_out) * fan_in + fan_out);
        in.read(reinterpret_cast<char*>(buf.data()),
                static_cast<std::streamsize>(buf.size() * sizeof(float)));
        if (!in) throw std::runtime_error("load_checkpoint: truncated parameter block");
        Eigen::MatrixXd w(fan_out, fan_in);
        std::size_t k = 0;
        for (int r = 0; r < fan_out; ++r) {
            for (int c = 0; c < fan_in; ++c) w(r, c) = buf[k++];
        }
        Eigen::VectorXd b(fan_out);
        for (int i = 0; i < fan_out; ++i) b[i] = buf[k++];
        result.net.weights.push_back(std::move(w));
        result.net.biases.push_back(std::move(b));
    }
    if (in.peek() != EOF) {
        throw std::runtime_error("load_checkpoint: trailing bytes in " + path.string());
    }
    return result;
}

} // namespace dmsynth
