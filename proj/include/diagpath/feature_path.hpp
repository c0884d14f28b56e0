#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace diagpath {

enum class Provenance : std::uint8_t {
    kMoment = 0,
    kCrockerColumn = 1,
    kBettiSignature = 2,
    kRaw = 3,
};

/// Discrete path of fixed-dimension real vectors, stored row-major [time][feature].
struct FeaturePath {
    std::vector<double> times;
    std::size_t dim = 0;
    std::vector<double> values;
    Provenance provenance = Provenance::kRaw;

    FeaturePath() = default;
    FeaturePath(std::size_t length, std::size_t dimension, Provenance tag = Provenance::kRaw)
        : times(length), dim(dimension), values(length * dimension, 0.0), provenance(tag) {
        for (std::size_t t = 0; t < length; ++t) times[t] = static_cast<double>(t);
    }

    /// Builds a path from rows; all rows must share one dimension.
    static FeaturePath from_rows(const std::vector<std::vector<double>>& rows,
                                 Provenance tag = Provenance::kRaw);

    std::size_t length() const { return times.size(); }
    std::span<const double> row(std::size_t t) const { return {values.data() + t * dim, dim}; }
    std::span<double> row(std::size_t t) { return {values.data() + t * dim, dim}; }

    /// Throws DataError unless every row has dimension `dim` and finite entries.
    void validate() const;
};

}  // namespace diagpath
