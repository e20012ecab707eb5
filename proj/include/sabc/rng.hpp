#pragma once

#include <cstdint>
#include <random>

namespace sabc {

/// SplitMix64 finalizer; a bijective 64-bit mixer.
std::uint64_t mix64(std::uint64_t x);

/// Derives an independent child seed from (seed, index, domain). Used for
/// per-draw streams, per-stage seeds and per-replicate seeds alike.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index, std::uint64_t domain = 0);

/// Random stream owned by a single simulation draw. Its state is a function of
/// (seed, index, domain) only, so draw m is identical no matter which thread
/// produces it or how large the batch is.
class DrawStream {
public:
    DrawStream(std::uint64_t seed, std::uint64_t index, std::uint64_t domain = 0);

    double uniform();                         ///< [0, 1)
    double uniform(double lo, double hi);
    double normal();                          ///< standard normal
    double normal(double mean, double sd);

    std::mt19937_64& engine() { return engine_; }

private:
    std::mt19937_64 engine_;
    std::uniform_real_distribution<double> unit_{0.0, 1.0};
    std::normal_distribution<double> gauss_{0.0, 1.0};
};

/// Domain tags keeping streams of different purposes disjoint.
namespace stream_domain {
inline constexpr std::uint64_t kDraw = 0;
inline constexpr std::uint64_t kTruncationProbe = 0x7472756e63ULL;
inline constexpr std::uint64_t kStage = 0x7374616765ULL;
inline constexpr std::uint64_t kReplicate = 0x7265706cULL;
inline constexpr std::uint64_t kResample = 0x726573616dULL;
inline constexpr std::uint64_t kMarginal = 0x6d617267ULL;
inline constexpr std::uint64_t kObserved = 0x6f6273ULL;
}  // namespace stream_domain

}  // namespace sabc
