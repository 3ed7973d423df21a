#pragma once

#include <cstdint>
#include <random>

namespace binquant {

namespace detail {

// splitmix64 finalizer; used to turn (master seed, stream index) pairs into
// well-separated engine seeds.
inline std::uint64_t mix64(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xbf58476d1ce4e5b9ULL;
    z ^= z >> 27;
    z *= 0x94d049bb133111ebULL;
    z ^= z >> 31;
    return z;
}

}  // namespace detail

/// Deterministic pseudo-random stream. Every Monte Carlo trial owns a stream
/// derived from (master_seed, stream_index), so trials can run concurrently
/// and still reproduce bit-identically in any schedule.
class RngStream {
public:
    explicit RngStream(std::uint64_t seed) : engine_(seed) {}

    RngStream(std::uint64_t master_seed, std::uint64_t stream_index)
        : engine_(derive_seed(master_seed, stream_index)) {}

    static std::uint64_t derive_seed(std::uint64_t master_seed,
                                     std::uint64_t stream_index) {
        std::uint64_t h = detail::mix64(master_seed + 0x9e3779b97f4a7c15ULL);
        return detail::mix64(h ^ (0xd1342543de82ef95ULL * (stream_index + 1)));
    }

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform on [0, 1) with 53-bit resolution, engine-exact on every platform.
    double uniform01() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    /// Uniform on the open interval (0, 1); safe as a log() argument.
    double uniform_open01() {
        return (static_cast<double>(engine_() >> 12) + 0.5) * 0x1.0p-52;
    }

    double uniform(double lo, double hi) {
        return lo + (hi - lo) * uniform01();
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace binquant
