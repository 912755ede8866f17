#pragma once

#include <cstdint>
#include <random>

namespace taskaug {

// splitmix64 finalizer; used to derive well-separated stream seeds from a
// base seed plus stream/tag indices so that independent RNG streams
// (data order, augmentation, noise, init) never alias.
inline std::uint64_t mix_seed(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b = 0,
                                 std::uint64_t c = 0) {
    std::uint64_t s = mix_seed(base);
    s = mix_seed(s ^ (a + 0x632be59bd9b4e019ULL));
    s = mix_seed(s ^ (b + 0x9e3779b97f4a7c15ULL));
    s = mix_seed(s ^ (c + 0xd1b54a32d192ed03ULL));
    return s;
}

using Rng = std::mt19937_64;

inline Rng make_rng(std::uint64_t seed) { return Rng(seed); }

}  // namespace taskaug
