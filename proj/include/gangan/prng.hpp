#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <utility>
#include <vector>

namespace gangan {

// splitmix64 finalizer. Conditions raw seeds before they reach the engine
// and derives independent sub-stream seeds.
constexpr std::uint64_t splitmix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Deterministic random source for the whole pipeline.
//
// The engine is std::mt19937_64, whose output sequence the C++ standard pins
// down bit for bit, so identical seeds give identical streams on every
// platform. All floating-point transforms are implemented here rather than
// taken from <random>, whose distributions are implementation-defined:
// uniforms use the top 53 bits of one engine draw, normals use Box-Muller
// with the second variate of each pair cached, integers in a range use
// rejection sampling, and shuffling is Fisher-Yates.
class Prng {
public:
    explicit Prng(std::uint64_t seed) : engine_(splitmix64(seed)) {}

    // Independent stream for (base_seed, stream_id): the stream id is mixed
    // through splitmix64 and xor-ed into the base seed. One stream per GAN
    // makes fleet results independent of scheduling and worker count.
    static Prng for_stream(std::uint64_t base_seed, std::uint64_t stream_id) {
        return Prng(base_seed ^ splitmix64(stream_id));
    }

    std::uint64_t next_u64() { return engine_(); }

    // Uniform double in the open interval (0, 1).
    double next_double() {
        return (double(engine_() >> 11) + 0.5) * 0x1.0p-53;
    }

    // Uniform double in the open interval (lo, hi).
    double uniform(double lo, double hi) {
        return lo + (hi - lo) * next_double();
    }

    // Standard normal draw, Box-Muller. Each pair of uniforms yields two
    // variates; the sine variate is cached and returned by the next call.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double u1 = next_double();
        const double u2 = next_double();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * kPi * u2;
        spare_ = r * std::sin(theta);
        has_spare_ = true;
        return r * std::cos(theta);
    }

    // n i.i.d. draws from N(0, 1).
    std::vector<float> standard_normal(std::size_t n) {
        std::vector<float> out(n);
        for (auto& x : out) x = float(normal());
        return out;
    }

    // Uniform integer in [0, n), n >= 1. Rejection sampling, no modulo bias.
    std::uint64_t bounded(std::uint64_t n) {
        if (n <= 1) return 0;
        const std::uint64_t threshold = (0 - n) % n;  // 2^64 mod n
        std::uint64_t x = engine_();
        while (x < threshold) x = engine_();
        return x % n;
    }

    // In-place Fisher-Yates shuffle.
    template <typename T>
    void shuffle(std::span<T> items) {
        for (std::size_t i = items.size(); i > 1; --i) {
            std::swap(items[i - 1], items[bounded(i)]);
        }
    }

private:
    static constexpr double kPi = 3.14159265358979323846;

    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace gangan
