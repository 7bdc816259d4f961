#ifndef CK_RNG_HPP
#define CK_RNG_HPP

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <random>
#include <string_view>

namespace ck {

using Engine = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// FNV-1a, used to turn canonical text keys into stream identifiers.
inline std::uint64_t hash_string(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

// Derives an independent stream seed from a master seed and a list of integer keys
// (trial index, matrix role, chunk index, ...). Order of keys matters.
inline std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> keys) {
    std::uint64_t h = splitmix64(master);
    for (auto k : keys) h = splitmix64(h ^ splitmix64(k + 0x632be59bd9b4e019ULL));
    return h;
}

inline Engine make_engine(std::uint64_t master, std::initializer_list<std::uint64_t> keys) {
    return Engine(derive_seed(master, keys));
}

// Uniform on the open interval (0, 1) with 53 random bits.
inline double uniform_open(Engine& rng) {
    return (static_cast<double>(rng() >> 11) + 0.5) * (1.0 / 9007199254740992.0);
}

inline double standard_exponential(Engine& rng) { return -std::log(uniform_open(rng)); }

// Box-Muller; written out so that streams are identical across standard libraries.
inline double standard_normal(Engine& rng) {
    const double u1 = uniform_open(rng);
    const double u2 = uniform_open(rng);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
}

// Knuth's multiplication method; fine for the small means used here.
inline int poisson(Engine& rng, double mean) {
    const double limit = std::exp(-mean);
    int k = 0;
    double prod = uniform_open(rng);
    while (prod > limit) {
        ++k;
        prod *= uniform_open(rng);
    }
    return k;
}

}  // namespace ck

#endif
