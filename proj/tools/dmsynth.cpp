#include <string>
#include <vector>

#include "dmsynth/cli.hpp"

int main(int argc, char** argv) {
    return dmsynth::run_cli(std::vector<std::string>(argv + 1, argv + argc));
}
