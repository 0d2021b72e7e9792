#pragma once

#include <cstdint>
#include <random>

namespace driftlab {

/**
 * Deterministic random stream keyed by (master_seed, stream_id).
 *
 * Every replication of an experiment owns one stream, so results never
 * depend on which thread ran which replication. Move-only: copying would
 * silently duplicate the draw sequence.
 */
class RngStream {
public:
    RngStream(std::uint64_t master_seed, std::uint64_t stream_id)
        : master_seed_(master_seed), stream_id_(stream_id), engine_(make_engine(master_seed, stream_id)) {}

    RngStream(const RngStream&) = delete;
    RngStream& operator=(const RngStream&) = delete;
    RngStream(RngStream&&) = default;
    RngStream& operator=(RngStream&&) = default;

    std::uint64_t master_seed() const noexcept { return master_seed_; }
    std::uint64_t stream_id() const noexcept { return stream_id_; }

    double normal() { return normal_(engine_); }

private:
    static std::uint64_t splitmix64(std::uint64_t& state) noexcept {
        std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    static std::mt19937_64 make_engine(std::uint64_t master, std::uint64_t stream) {
        std::uint64_t state = master ^ splitmix64(stream);
        std::uint32_t words[8];
        for (int k = 0; k < 4; ++k) {
            const std::uint64_t w = splitmix64(state);
            words[2 * k] = static_cast<std::uint32_t>(w);
            words[2 * k + 1] = static_cast<std::uint32_t>(w >> 32);
        }
        std::seed_seq seeded(std::begin(words), std::end(words));
        return std::mt19937_64(seeded);
    }

    std::uint64_t master_seed_;
    std::uint64_t stream_id_;
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace driftlab
