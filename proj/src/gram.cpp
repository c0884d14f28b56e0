#include "diagpath/gram.hpp"

#include "diagpath/errors.hpp"
#include "diagpath/parallel.hpp"

namespace diagpath::signature {

Route parse_route(const std::string& name) {
    if (name == "explicit") return Route::kExplicit;
    if (name == "kernel-trick" || name == "dp") return Route::kKernelTrick;
    if (name == "linear") return Route::kLinear;
    throw ArgumentError("unknown kernel route '" + name + "' (explicit, kernel-trick, linear)");
}

std::string route_name(Route r) {
    switch (r) {
        case Route::kExplicit: return "explicit";
        case Route::kKernelTrick: return "kernel-trick";
        case Route::kLinear: return "linear";
    }
    return "?";
}

namespace {

// Upper-triangle-or-full fill with each entry computed independently.
template <class Entry>
Eigen::MatrixXd fill(std::size_t n_rows, std::size_t n_cols, bool symmetric, Entry&& entry) {
    Eigen::MatrixXd G(n_rows, n_cols);
    std::vector<std::pair<std::size_t, std::size_t>> cells;
    cells.reserve(symmetric ? n_rows * (n_rows + 1) / 2 : n_rows * n_cols);
    for (std::size_t i = 0; i < n_rows; ++i)
        for (std::size_t j = symmetric ? i : 0; j < n_cols; ++j) cells.emplace_back(i, j);
    parallel_for(cells.size(), [&](std::size_t c) {
        const auto [i, j] = cells[c];
        G(i, j) = entry(i, j);
    });
    if (symmetric)
        for (std::size_t i = 0; i < n_rows; ++i)
            for (std::size_t j = 0; j < i; ++j) G(i, j) = G(j, i);
    return G;
}

double scaled_sum(const std::vector<double>& levels, double scale) {
    double s = 0, f = 1;
    for (double v : levels) {
        s += f * v;
        f *= scale;
    }
    return s;
}

}  // namespace

Eigen::MatrixXd signature_gram(const std::vector<FeaturePath>& rows,
                               const std::vector<FeaturePath>& cols, const KernelOptions& opts,
                               bool symmetric) {
    if (symmetric && rows.size() != cols.size())
        throw ArgumentError("gram: symmetric fill needs identical row and column sets");
    const std::size_t nr = rows.size(), nc = cols.size();

    if (opts.route == Route::kLinear) {
        return fill(nr, nc, symmetric, [&](std::size_t i, std::size_t j) {
            const auto& a = rows[i].values;
            const auto& b = cols[j].values;
            if (a.size() != b.size()) throw ArgumentError("gram: linear route needs equal shapes");
            double s = 0;
            for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
            return s;
        });
    }

    auto window = [&](const std::vector<FeaturePath>& in) {
        std::vector<FeaturePath> out(in.size());
        parallel_for(in.size(), [&](std::size_t i) { out[i] = sliding_window(in[i], opts.lags, opts.tau); });
        return out;
    };
    const std::vector<FeaturePath> wr = window(rows);
    const std::vector<FeaturePath> wc = symmetric ? std::vector<FeaturePath>{} : window(cols);
    const std::vector<FeaturePath>& wcols = symmetric ? wr : wc;

    if (opts.route == Route::kExplicit) {
        auto sigs = [&](const std::vector<FeaturePath>& in) {
            std::vector<TruncatedTensor> out(in.size());
            parallel_for(in.size(), [&](std::size_t i) {
                out[i] = discrete_signature(in[i], opts.level, opts.memory_budget);
                if (opts.normalize) out[i] = tensor_normalize(out[i]).tensor;
            });
            return out;
        };
        const std::vector<TruncatedTensor> sr = sigs(wr);
        const std::vector<TruncatedTensor> sc = symmetric ? std::vector<TruncatedTensor>{} : sigs(wcols);
        const auto& scols = symmetric ? sr : sc;
        return fill(nr, nc, symmetric, [&](std::size_t i, std::size_t j) { return inner(sr[i], scols[j]); });
    }

    std::vector<double> row_lambda(nr, 1.0), col_lambda(nc, 1.0);
    if (opts.normalize) {
        parallel_for(nr, [&](std::size_t i) {
            row_lambda[i] = normalization_lambda(signature_kernel_levels(increment_gram(wr[i], wr[i]), opts.level));
        });
        if (symmetric) {
            col_lambda = row_lambda;
        } else {
            parallel_for(nc, [&](std::size_t j) {
                col_lambda[j] =
                    normalization_lambda(signature_kernel_levels(increment_gram(wcols[j], wcols[j]), opts.level));
            });
        }
    }
    // Increment grams come straight from the features rather than from
    // differencing a linear state kernel, which would cancel digits.
    return fill(nr, nc, symmetric, [&](std::size_t i, std::size_t j) {
        const auto levels = signature_kernel_levels(increment_gram(wr[i], wcols[j]), opts.level);
        return scaled_sum(levels, row_lambda[i] * col_lambda[j]);
    });
}

Eigen::MatrixXd signature_gram(const std::vector<FeaturePath>& paths, const KernelOptions& opts) {
    return signature_gram(paths, paths, opts, true);
}

Eigen::MatrixXd state_kernel_gram(const StateKernelSource& src, int level, bool normalize,
                                  bool symmetric) {
    std::vector<double> row_lambda(src.n_rows, 1.0), col_lambda(src.n_cols, 1.0);
    if (normalize) {
        parallel_for(src.n_rows, [&](std::size_t i) {
            row_lambda[i] = normalization_lambda(
                signature_kernel_levels(increment_gram_from_kernel(src.row_self(i)), level));
        });
        if (symmetric) {
            col_lambda = row_lambda;
        } else {
            parallel_for(src.n_cols, [&](std::size_t j) {
                col_lambda[j] = normalization_lambda(
                    signature_kernel_levels(increment_gram_from_kernel(src.col_self(j)), level));
            });
        }
    }
    return fill(src.n_rows, src.n_cols, symmetric, [&](std::size_t i, std::size_t j) {
        const auto levels = signature_kernel_levels(increment_gram_from_kernel(src.cross(i, j)), level);
        return scaled_sum(levels, row_lambda[i] * col_lambda[j]);
    });
}

}  // namespace diagpath::signature
