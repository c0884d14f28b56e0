#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "diagpath/swarm.hpp"

namespace diagpath::persistence {

using swarm::Cloud;
using swarm::Point3;

struct DiagramPoint {
    double birth = 0;
    double lifetime = 0;
    double death() const { return birth + lifetime; }
    friend bool operator==(const DiagramPoint&, const DiagramPoint&) = default;
};

/// Bounded persistence diagram in birth/lifetime coordinates. Every stored
/// point has 0 <= birth, lifetime > 0 and birth + lifetime <= bound.
/// `weight` is the mass carried by each point (1 for an ordinary diagram);
/// rescaled diagrams use it to act as measures.
struct PersistenceDiagram {
    int homology_dim = 0;
    std::vector<DiagramPoint> points;
    double bound = 1.0;
    double weight = 1.0;

    /// Adds (birth, lifetime); zero-lifetime points are dropped.
    void add(double birth, double lifetime);
    std::size_t size() const { return points.size(); }
    bool empty() const { return points.empty(); }
    /// Throws DataError if an invariant is violated.
    void validate() const;
};

using DiagramTriple = std::array<PersistenceDiagram, 3>;

struct Simplex {
    std::array<std::uint32_t, 4> vertices{};  // sorted; unused slots are kNoVertex
    int dim = 0;
    double value = 0;
};

inline constexpr std::uint32_t kNoVertex = 0xffffffffu;

/// Rips filtration sorted by (value, dim, lexicographic vertices).
struct FilteredComplex {
    std::vector<Simplex> simplices;
    std::size_t n_vertices = 0;
    int max_dim = 0;  // homology dimension the complex was built for
    double threshold = 0;

    std::size_t count(int dim) const;
};

inline constexpr std::size_t kDefaultSimplexLimit = 20'000'000;

/// All simplices up to dimension max_dim + 1 with diameter <= threshold.
/// Throws SizeError (carrying an estimate) when more than max_simplices would be generated.
FilteredComplex rips_filtration(const Cloud& cloud, int max_dim, double threshold,
                                std::size_t max_simplices = kDefaultSimplexLimit);

/// Mod-2 persistence of the complex: union-find with the elder rule for H0,
/// column reduction with clearing for H1 and H2. Essential classes die at T.
DiagramTriple persistence_diagrams(const FilteredComplex& complex, double T);

/// Smallest r such that some point is within r of all others.
double enclosing_radius(const Cloud& cloud);

/// Number of points with birth < eps < birth + lifetime.
std::size_t betti_curve(const PersistenceDiagram& diagram, double eps);
/// betti_curve scaled by the diagram's point weight.
double weighted_betti(const PersistenceDiagram& diagram, double eps);

struct PersistOptions {
    int max_dim = 2;
    /// Rips threshold; <= 0 selects the enclosing radius of each cloud.
    double threshold = 0;
    /// Common bound T of every frame; <= 0 selects the largest threshold used.
    double cap = 0;
    std::size_t max_simplices = kDefaultSimplexLimit;
};

/// Time-indexed diagram triples of one simulation, sharing one bound T.
struct DiagramPath {
    std::vector<double> times;
    std::vector<DiagramTriple> frames;
    std::uint64_t sim_id = 0;
    std::string scheme = "full";
    double bound = 1.0;
};

DiagramTriple cloud_diagrams(const Cloud& cloud, int max_dim, double threshold, double T,
                             std::size_t max_simplices = kDefaultSimplexLimit);

/// Per-frame diagrams of a point-cloud series (frames processed in parallel).
DiagramPath diagram_path(const swarm::PointCloudSeries& series, const PersistOptions& opts,
                         std::uint64_t sim_id = 0, std::string scheme = "full");

/// Multiset comparison helper: points sorted by (birth, lifetime).
std::vector<DiagramPoint> sorted_points(const PersistenceDiagram& d);

}  // namespace diagpath::persistence
