#pragma once

#include "sabc/mat_core.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace sabc {

/// Axis-aligned box of per-coordinate [lo, hi] intervals.
struct TruncationRegion {
    std::vector<double> lo;
    std::vector<double> hi;

    std::size_t dim() const { return lo.size(); }
    bool contains(const Vector& theta) const;
    void validate() const;  ///< lo ≤ hi per coordinate, equal lengths

    friend bool operator==(const TruncationRegion&, const TruncationRegion&) = default;
};

/// M paired draws (θ⁽ᵐ⁾, s⁽ᵐ⁾); row m of thetas generated row m of stats.
struct SimulationBatch {
    Matrix thetas;  ///< M×p
    Matrix stats;   ///< M×d
    std::uint64_t seed = 0;
    std::string model_name;
    std::string prior_hash;

    std::size_t size() const { return static_cast<std::size_t>(thetas.rows()); }
    std::size_t param_dim() const { return static_cast<std::size_t>(thetas.cols()); }
    std::size_t stat_dim() const { return static_cast<std::size_t>(stats.cols()); }
};

struct AcceptanceInfo {
    double epsilon = 0.0;                ///< largest accepted distance (or the ε used)
    std::vector<double> distances;       ///< per accepted draw, same order as rows
    std::vector<std::size_t> indices;    ///< batch draw index of each accepted row
    std::size_t candidates = 0;          ///< batch size the acceptance ran over
};

struct Provenance {
    std::uint64_t seed = 0;
    std::string projector_id;
    std::string stage;
    std::optional<double> condition_number;
    std::vector<double> vifs;
    std::vector<std::string> notes;
};

/// Accepted parameter draws with normalized weights.
struct WeightedPosterior {
    Matrix thetas;   ///< N×p
    Vector weights;  ///< nonnegative, sums to 1
    AcceptanceInfo acceptance;
    Provenance provenance;

    std::size_t size() const { return static_cast<std::size_t>(thetas.rows()); }
    std::size_t param_dim() const { return static_cast<std::size_t>(thetas.cols()); }
    bool has_uniform_weights() const;
    void validate() const;

    /// Weighted mean of each coordinate.
    Vector mean() const;
};

}  // namespace sabc
