#pragma once

#include <cstdint>
#include <random>

namespace smmpc {

// Every random draw comes from a stream addressed by (master_seed, run_index,
// role). Streams are disjoint, so toggling one noise source never perturbs
// the realization drawn from another.
enum class StreamRole : std::uint64_t {
    DataInput = 1,   // offline excitation u^d
    DataNoise = 2,   // offline output noise w^d
    OnlineNoise = 3  // online measurement noise w_p
};

// splitmix64 finalizer, applied to the packed (seed, run, role) triple.
inline std::uint64_t mix_seed(std::uint64_t master_seed, std::uint64_t run_index,
                              StreamRole role) {
    std::uint64_t z = master_seed;
    z += 0x9e3779b97f4a7c15ULL * (2 * run_index + 1);
    z += 0xbf58476d1ce4e5b9ULL * static_cast<std::uint64_t>(role);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Standard-normal stream. mt19937_64 is bit-exact per the C++ standard and
// the uniform/polar transform below is spelled out here, so the sequence is
// reproducible across standard-library implementations.
class NormalStream {
  public:
    NormalStream(std::uint64_t master_seed, std::uint64_t run_index, StreamRole role)
        : engine_(mix_seed(master_seed, run_index, role)) {}

    // One N(0,1) draw (polar Box-Muller, caching the second variate).
    double next() {
        if (has_cached_) {
            has_cached_ = false;
            return cached_;
        }
        double v1 = 0.0, v2 = 0.0, s = 0.0;
        do {
            v1 = 2.0 * uniform() - 1.0;
            v2 = 2.0 * uniform() - 1.0;
            s = v1 * v1 + v2 * v2;
        } while (s >= 1.0 || s == 0.0);
        const double scale = std::sqrt(-2.0 * std::log(s) / s);
        cached_ = v2 * scale;
        has_cached_ = true;
        return v1 * scale;
    }

  private:
    // (0,1) from the top 53 bits; never returns 0 or 1.
    double uniform() {
        const std::uint64_t bits = engine_() >> 11;
        return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
    }

    std::mt19937_64 engine_;
    double cached_ = 0.0;
    bool has_cached_ = false;
};

}  // namespace smmpc
