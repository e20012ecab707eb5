#include "sabc/rng.hpp"

#include <cmath>

namespace sabc {

std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index, std::uint64_t domain) {
    return mix64(mix64(mix64(seed) ^ domain) + index);
}

DrawStream::DrawStream(std::uint64_t seed, std::uint64_t index, std::uint64_t domain)
    : engine_(derive_seed(seed, index, domain)) {}

double DrawStream::uniform() {
    // libstdc++ can round generate_canonical up to exactly 1.0.
    const double u = unit_(engine_);
    return u < 1.0 ? u : std::nextafter(1.0, 0.0);
}

double DrawStream::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

double DrawStream::normal() { return gauss_(engine_); }

double DrawStream::normal(double mean, double sd) { return mean + sd * normal(); }

}  // namespace sabc
