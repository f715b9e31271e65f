#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "dmsynth/checkpoint.hpp"

using namespace dmsynth;
namespace fs = std::filesystem;

namespace {

std::string read_bytes(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), {});
}

} // namespace

TEST_CASE("checkpoint save/load/save round-trips bit-exactly") {
    NetSpec s;
    s.input_dim = 4;
    s.hidden_dims = {8, 8};
    s.output_dim = 3;
    s.final_activation = FinalActivation::Softmax;
    DenseNet net = net_init(s, 99);

    fs::path dir = fs::temp_directory_path() / "dmsynth_ckpt_test";
    fs::create_directories(dir);
    fs::path p1 = dir / "a.ckpt";
    fs::path p2 = dir / "b.ckpt";

    save_checkpoint(net, 99, p1);
    LoadedCheckpoint loaded = load_checkpoint(p1);
    CHECK(loaded.seed == 99);
    CHECK(loaded.net.spec == s);
    save_checkpoint(loaded.net, loaded.seed, p2);
    CHECK(read_bytes(p1) == read_bytes(p2));

    // loaded parameters equal the saved ones at float32 precision
    for (std::size_t l = 0; l < net.weights.size(); ++l) {
        for (Eigen::Index r = 0; r < net.weights[l].rows(); ++r) {
            for (Eigen::Index c = 0; c < net.weights[l].cols(); ++c) {
                CHECK(static_cast<float>(net.weights[l](r, c)) ==
                      static_cast<float>(loaded.net.weights[l](r, c)));
            }
        }
    }
    fs::remove_all(dir);
}

TEST_CASE("truncated checkpoint is rejected") {
    NetSpec s;
    s.input_dim = 2;
    s.output_dim = 2;
    DenseNet net = net_init(s, 1);
    fs::path dir = fs::temp_directory_path() / "dmsynth_ckpt_test2";
    fs::create_directories(dir);
    fs::path p = dir / "t.ckpt";
    save_checkpoint(net, 1, p);
    std::string bytes = read_bytes(p);
    std::ofstream out(p, std::ios::binary);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size() - 5));
    out.close();
    CHECK_THROWS_AS(load_checkpoint(p), std::runtime_error);
    fs::remove_all(dir);
}
