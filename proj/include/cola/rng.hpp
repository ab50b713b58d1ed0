#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace cola {

// Mixes (base_seed, stream_id) into an independent engine seed. Used to give
// every node, the partitioner, and the dropout sampler their own streams so
// results do not depend on worker scheduling.
std::uint64_t derive_stream_seed(std::uint64_t base_seed, std::uint64_t stream_id);

// Deterministic random source. Wraps std::mt19937_64 (output sequence fixed
// by the standard) and implements bounded ints, doubles, gaussians, and
// shuffling by hand: the std <random> distributions are implementation
// defined and would break trace reproducibility across toolchains.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    // Uniform on [0, 1) with 53 random bits.
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // Uniform on [0, bound); rejection sampling keeps it exactly unbiased.
    std::uint64_t next_below(std::uint64_t bound);

    // Standard normal via the Marsaglia polar method. Avoids sin/cos whose
    // libm rounding differs across platforms more often than sqrt/log.
    double next_gaussian();

    // Fisher-Yates; the loop order is part of the determinism contract.
    template <typename T>
    void shuffle(std::vector<T>& items) {
        if (items.size() < 2) return;
        for (std::size_t i = items.size() - 1; i > 0; --i) {
            std::size_t j = static_cast<std::size_t>(next_below(i + 1));
            std::swap(items[i], items[j]);
        }
    }

  private:
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace cola
