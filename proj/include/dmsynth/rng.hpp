#pragma once

#include <cstdint>
#include <cmath>
#include <Eigen/Dense>

namespace dmsynth {

// Deterministic RNG with an explicit normal transform so that streams are
// reproducible independent of the standard library's distribution internals.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(splitmix(seed ^ 0x9e3779b97f4a7c15ull)) {}

    std::uint64_t next_u64() {
        // xorshift64* over a splitmix-initialized state
        std::uint64_t x = state_;
        x ^= x >> 12;
        x ^= x << 25;
        x ^= x >> 27;
        state_ = x;
        return x * 0x2545f4914f6cdd1dull;
    }

    // uniform in [0, 1)
    double uniform() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // uniform integer in [0, n)
    std::uint64_t uniform_int(std::uint64_t n) {
        // modulo bias is negligible for n << 2^64 but reject anyway
        std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t x;
        do {
            x = next_u64();
        } while (x >= limit);
        return x % n;
    }

    // standard normal via Box-Muller (no cached spare, keeps the stream simple)
    double normal() {
        double u1 = uniform();
        double u2 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
    }

    Eigen::VectorXd normal_vector(int dim) {
        Eigen::VectorXd v(dim);
        for (int i = 0; i < dim; ++i) v[i] = normal();
        return v;
    }

    // Derive an independent child stream; stable under reordering of draws
    // from the parent.
    Rng split(std::uint64_t stream_id) const {
        return Rng(splitmix(state_ ^ splitmix(stream_id + 0x632be59bd9b4e019ull)));
    }

private:
    static std::uint64_t splitmix(std::uint64_t x) {
        x += 0x9e3779b97f4a7c15ull;
        x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
        x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
        return x ^ (x >> 31);
    }

    std::uint64_t state_;
};

} // namespace dmsynth
