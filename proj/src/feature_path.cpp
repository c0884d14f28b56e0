#include "diagpath/feature_path.hpp"

#include <algorithm>
#include <cmath>

#include "diagpath/errors.hpp"

namespace diagpath {

FeaturePath FeaturePath::from_rows(const std::vector<std::vector<double>>& rows, Provenance tag) {
    const std::size_t d = rows.empty() ? 0 : rows.front().size();
    FeaturePath p(rows.size(), d, tag);
    for (std::size_t t = 0; t < rows.size(); ++t) {
        if (rows[t].size() != d) throw ArgumentError("feature path: rows differ in dimension");
        std::copy(rows[t].begin(), rows[t].end(), p.row(t).begin());
    }
    return p;
}

void FeaturePath::validate() const {
    if (values.size() != times.size() * dim) throw DataError("feature path: shape mismatch");
    if (!std::all_of(values.begin(), values.end(), [](double v) { return std::isfinite(v); }))
        throw DataError("feature path: non-finite entry");
}

}  // namespace diagpath
