#include "diagpath/persistence.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "diagpath/errors.hpp"
#include "diagpath/parallel.hpp"
#include "diagpath/union_find.hpp"

namespace diagpath::persistence {

void PersistenceDiagram::add(double birth, double lifetime) {
    if (!(lifetime > 0)) return;
    points.push_back({birth, lifetime});
}

void PersistenceDiagram::validate() const {
    if (homology_dim < 0 || homology_dim > 2) throw DataError("diagram: homology dimension out of range");
    if (!(bound > 0)) throw DataError("diagram: bound must be positive");
    const double slack = 1e-12 * bound;
    for (const auto& p : points) {
        if (!(p.birth >= 0) || !(p.lifetime > 0) || p.birth + p.lifetime > bound + slack)
            throw DataError("diagram: point outside the bounded region");
    }
}

std::size_t FilteredComplex::count(int dim) const {
    return static_cast<std::size_t>(std::count_if(simplices.begin(), simplices.end(),
                                                  [dim](const Simplex& s) { return s.dim == dim; }));
}

namespace {

double distance(const Point3& a, const Point3& b) {
    const double d0 = a[0] - b[0], d1 = a[1] - b[1], d2 = a[2] - b[2];
    return std::sqrt(d0 * d0 + d1 * d1 + d2 * d2);
}

bool filtration_less(const Simplex& a, const Simplex& b) {
    if (a.value != b.value) return a.value < b.value;
    if (a.dim != b.dim) return a.dim < b.dim;
    return a.vertices < b.vertices;
}

// Combinatorial number system: a unique key per sorted vertex tuple of a fixed size.
class SimplexKeys {
public:
    explicit SimplexKeys(std::size_t n) : n_(n + 1), table_(5 * (n + 1), 0) {
        for (std::size_t v = 0; v <= n; ++v) {
            binom(v, 0) = 1;
            for (std::size_t k = 1; k <= 4; ++k)
                binom(v, k) = v == 0 ? 0 : binom(v - 1, k - 1) + binom(v - 1, k);
        }
    }

    std::uint64_t key(const std::uint32_t* v, int size) const {
        std::uint64_t k = 0;
        for (int i = 0; i < size; ++i) k += table_[(i + 1) * n_ + v[i]];
        return k;
    }

private:
    std::uint64_t& binom(std::size_t v, std::size_t k) { return table_[k * n_ + v]; }
    std::size_t n_;
    std::vector<std::uint64_t> table_;  // table_[k * n_ + v] = C(v, k)
};

void xor_into(std::vector<std::uint32_t>& col, const std::vector<std::uint32_t>& other,
              std::vector<std::uint32_t>& scratch) {
    scratch.clear();
    std::set_symmetric_difference(col.begin(), col.end(), other.begin(), other.end(),
                                  std::back_inserter(scratch));
    col.swap(scratch);
}

}  // namespace

double enclosing_radius(const Cloud& cloud) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        double far = 0;
        for (std::size_t j = 0; j < cloud.size(); ++j) far = std::max(far, distance(cloud[i], cloud[j]));
        best = std::min(best, far);
    }
    return cloud.empty() ? 0.0 : best;
}

FilteredComplex rips_filtration(const Cloud& cloud, int max_dim, double threshold,
                                std::size_t max_simplices) {
    if (cloud.empty()) throw ArgumentError("rips: point cloud is empty");
    if (max_dim < 0 || max_dim > 2) throw ArgumentError("rips: max_dim must be 0, 1 or 2");
    if (!(threshold > 0)) throw ArgumentError("rips: threshold must be positive");
    const std::size_t n = cloud.size();
    if (n >= kNoVertex) throw SizeError("rips: too many points", static_cast<double>(n));

    FilteredComplex cx;
    cx.n_vertices = n;
    cx.max_dim = max_dim;
    cx.threshold = threshold;
    auto& out = cx.simplices;

    auto push = [&](Simplex s, std::size_t progress) {
        if (out.size() >= max_simplices) {
            const double est = static_cast<double>(out.size()) * static_cast<double>(n) /
                               static_cast<double>(std::max<std::size_t>(progress, 1));
            std::ostringstream msg;
            msg << "rips: more than " << max_simplices << " simplices (estimated " << est
                << "); lower the threshold or max_dim";
            throw SizeError(msg.str(), est);
        }
        out.push_back(s);
    };

    std::vector<double> dist(n * n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) dist[i * n + j] = distance(cloud[i], cloud[j]);
    std::vector<char> adj(n * n, 0);
    std::vector<std::vector<std::uint32_t>> up(n);
    for (std::uint32_t i = 0; i < n; ++i) {
        push({{i, kNoVertex, kNoVertex, kNoVertex}, 0, 0.0}, i + 1);
    }
    for (std::uint32_t i = 0; i < n; ++i)
        for (std::uint32_t j = i + 1; j < n; ++j)
            if (dist[i * n + j] <= threshold) {
                adj[i * n + j] = adj[j * n + i] = 1;
                up[i].push_back(j);
                push({{i, j, kNoVertex, kNoVertex}, 1, dist[i * n + j]}, i + 1);
            }
    if (max_dim >= 1) {
        for (std::uint32_t i = 0; i < n; ++i)
            for (std::uint32_t j : up[i])
                for (std::uint32_t k : up[j]) {
                    if (!adj[i * n + k]) continue;
                    const double v = std::max({dist[i * n + j], dist[i * n + k], dist[j * n + k]});
                    push({{i, j, k, kNoVertex}, 2, v}, i + 1);
                    if (max_dim >= 2) {
                        for (std::uint32_t l : up[k]) {
                            if (!adj[i * n + l] || !adj[j * n + l]) continue;
                            const double w = std::max({v, dist[i * n + l], dist[j * n + l], dist[k * n + l]});
                            push({{i, j, k, l}, 3, w}, i + 1);
                        }
                    }
                }
    }
    std::sort(out.begin(), out.end(), filtration_less);
    return cx;
}

DiagramTriple persistence_diagrams(const FilteredComplex& cx, double T) {
    if (!(T > 0)) throw ArgumentError("persistence: bound T must be positive");
    if (T < cx.threshold) throw ArgumentError("persistence: bound T must be >= the Rips threshold");

    DiagramTriple dgms;
    for (int d = 0; d < 3; ++d) {
        dgms[d].homology_dim = d;
        dgms[d].bound = T;
    }
    const auto& sx = cx.simplices;
    const std::size_t total = sx.size();
    const int top = std::min(cx.max_dim + 1, 3);

    // Filtration index lookup per dimension.
    SimplexKeys keys(cx.n_vertices);
    std::array<std::vector<std::pair<std::uint64_t, std::uint32_t>>, 4> lookup;
    for (std::uint32_t i = 0; i < total; ++i)
        lookup[sx[i].dim].push_back({keys.key(sx[i].vertices.data(), sx[i].dim + 1), i});
    for (auto& l : lookup) std::sort(l.begin(), l.end());
    auto index_of = [&](const std::uint32_t* v, int dim) -> std::uint32_t {
        const std::uint64_t k = keys.key(v, dim + 1);
        const auto& l = lookup[dim];
        auto it = std::lower_bound(l.begin(), l.end(), std::make_pair(k, std::uint32_t{0}));
        return it->second;
    };

    constexpr std::uint32_t kNone = 0xffffffffu;
    std::vector<std::uint32_t> pivot_owner(total, kNone);
    std::vector<char> cleared(total, 0);
    std::vector<std::vector<std::uint32_t>> reduced(total);
    std::vector<std::uint32_t> col, scratch;
    std::array<std::uint32_t, 3> face{};

    for (int k = top; k >= 2; --k) {
        for (std::uint32_t j = 0; j < total; ++j) {
            const Simplex& s = sx[j];
            if (s.dim != k || cleared[j]) continue;
            col.clear();
            for (int drop = 0; drop <= k; ++drop) {
                int w = 0;
                for (int v = 0; v <= k; ++v)
                    if (v != drop) face[w++] = s.vertices[v];
                col.push_back(index_of(face.data(), k - 1));
            }
            std::sort(col.begin(), col.end());
            while (!col.empty() && pivot_owner[col.back()] != kNone)
                xor_into(col, reduced[pivot_owner[col.back()]], scratch);
            if (!col.empty()) {
                const std::uint32_t low = col.back();
                pivot_owner[low] = j;
                cleared[low] = 1;
                dgms[k - 1].add(sx[low].value, s.value - sx[low].value);
                reduced[j] = col;
            } else if (k <= cx.max_dim) {
                dgms[k].add(s.value, T - s.value);
            }
        }
    }

    // H0 by union-find (elder rule: all vertices are born at 0). Edges that do
    // not merge components are H1 births; unpaired ones are essential.
    UnionFind uf(cx.n_vertices);
    std::size_t components = cx.n_vertices;
    for (std::uint32_t j = 0; j < total; ++j) {
        const Simplex& s = sx[j];
        if (s.dim != 1) continue;
        if (uf.unite(s.vertices[0], s.vertices[1])) {
            --components;
            dgms[0].add(0.0, s.value);
        } else if (cx.max_dim >= 1 && !cleared[j]) {
            dgms[1].add(s.value, T - s.value);
        }
    }
    for (std::size_t c = 0; c < components; ++c) dgms[0].add(0.0, T);
    return dgms;
}

std::size_t betti_curve(const PersistenceDiagram& diagram, double eps) {
    std::size_t n = 0;
    for (const auto& p : diagram.points)
        if (p.birth < eps && eps < p.birth + p.lifetime) ++n;
    return n;
}

double weighted_betti(const PersistenceDiagram& diagram, double eps) {
    return diagram.weight * static_cast<double>(betti_curve(diagram, eps));
}

DiagramTriple cloud_diagrams(const Cloud& cloud, int max_dim, double threshold, double T,
                             std::size_t max_simplices) {
    return persistence_diagrams(rips_filtration(cloud, max_dim, threshold, max_simplices), T);
}

DiagramPath diagram_path(const swarm::PointCloudSeries& series, const PersistOptions& opts,
                         std::uint64_t sim_id, std::string scheme) {
    const std::size_t n = series.clouds.size();
    if (series.times.size() != n) throw DataError("persist: times and clouds differ in length");
    std::vector<double> thresholds(n);
    for (std::size_t t = 0; t < n; ++t) {
        if (series.clouds[t].empty()) throw DataError("persist: empty point cloud");
        double thr = opts.threshold > 0 ? opts.threshold : enclosing_radius(series.clouds[t]);
        // A single point (or only duplicates) has radius 0; any positive threshold works.
        if (!(thr > 0)) thr = std::numeric_limits<double>::min();
        thresholds[t] = thr;
    }
    double T = opts.cap;
    if (!(T > 0)) {
        T = thresholds.empty() ? 1.0 : *std::max_element(thresholds.begin(), thresholds.end());
        if (T <= std::numeric_limits<double>::min()) T = 1.0;
    }

    DiagramPath path;
    path.times = series.times;
    path.sim_id = sim_id;
    path.scheme = std::move(scheme);
    path.bound = T;
    path.frames.resize(n);
    parallel_for(n, [&](std::size_t t) {
        path.frames[t] =
            cloud_diagrams(series.clouds[t], opts.max_dim, std::min(thresholds[t], T), T, opts.max_simplices);
    });
    return path;
}

std::vector<DiagramPoint> sorted_points(const PersistenceDiagram& d) {
    std::vector<DiagramPoint> pts = d.points;
    std::sort(pts.begin(), pts.end(), [](const DiagramPoint& a, const DiagramPoint& b) {
        return a.birth != b.birth ? a.birth < b.birth : a.lifetime < b.lifetime;
    });
    return pts;
}

}  // namespace diagpath::persistence
