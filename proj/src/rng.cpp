#include "cola/rng.hpp"

#include <cmath>

namespace cola {

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace

std::uint64_t derive_stream_seed(std::uint64_t base_seed, std::uint64_t stream_id) {
    std::uint64_t state = base_seed;
    std::uint64_t mixed = splitmix64(state);
    state = mixed ^ (stream_id + 0x632be59bd9b4e019ULL);
    return splitmix64(state);
}

std::uint64_t Rng::next_below(std::uint64_t bound) {
    if (bound < 2) return 0;
    std::uint64_t threshold = (0 - bound) % bound;
    for (;;) {
        std::uint64_t x = next_u64();
        if (x >= threshold) return x % bound;
    }
}

double Rng::next_gaussian() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    double u, v, s;
    do {
        u = 2.0 * next_double() - 1.0;
        v = 2.0 * next_double() - 1.0;
        s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    double m = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * m;
    has_spare_ = true;
    return u * m;
}

}  // namespace cola
