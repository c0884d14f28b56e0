// Command-line driver: one subcommand per pipeline stage plus the end-to-end run.

#include <algorithm>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "diagpath/errors.hpp"
#include "diagpath/features.hpp"
#include "diagpath/gram.hpp"
#include "diagpath/io.hpp"
#include "diagpath/parallel.hpp"
#include "diagpath/pipeline.hpp"
#include "diagpath/regression.hpp"
#include "diagpath/wasserstein.hpp"

namespace fs = std::filesystem;
using namespace diagpath;

namespace {

std::vector<fs::path> files_with_extension(const fs::path& dir, const std::string& ext) {
    if (!fs::is_directory(dir)) throw DataError(dir.string() + " is not a directory");
    std::vector<fs::path> out;
    for (const auto& e : fs::directory_iterator(dir))
        if (e.is_regular_file() && e.path().extension() == ext) out.push_back(e.path());
    std::sort(out.begin(), out.end());
    return out;
}

std::string sim_name(std::uint64_t id) {
    std::string s = std::to_string(id);
    return "sim_" + std::string(s.size() < 5 ? 5 - s.size() : 0, '0') + s;
}

void parse_range(const std::string& text, double& lo, double& hi) {
    const auto colon = text.find(':');
    if (colon == std::string::npos) throw ArgumentError("range '" + text + "': expected lo:hi");
    try {
        lo = io::parse_double(text.substr(0, colon));
        hi = io::parse_double(text.substr(colon + 1));
    } catch (const DataError&) {
        throw ArgumentError("range '" + text + "': bad number");
    }
}

double parse_auto(const std::string& text) {
    if (text == "auto") return 0;
    try {
        return io::parse_double(text);
    } catch (const DataError&) {
        throw ArgumentError("expected a number or 'auto', got '" + text + "'");
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Persistence-diagram paths, signature kernels and swarm parameter regression"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_path, out_dir = ".";
    std::uint64_t seed = 0;
    unsigned threads = 0;
    auto* seed_opt = app.add_option("--seed", seed, "Master seed");
    app.add_option("--config", config_path, "JSON experiment config");
    app.add_option("--threads", threads, "Worker threads (0: all cores)");
    app.add_option("--out-dir", out_dir, "Output directory");

    // simulate
    auto* sim = app.add_subcommand("simulate", "Simulate a corpus of bounded swarm trajectories");
    std::size_t n_sims = 0, n_agents = 0, n_steps = 0;
    double t_end = 0;
    std::string c_range, l_range, subsample_src;
    sim->add_option("--n-sims", n_sims);
    sim->add_option("--n-agents", n_agents);
    sim->add_option("--t-end", t_end);
    sim->add_option("--n-steps", n_steps);
    sim->add_option("--c-range", c_range, "lo:hi");
    sim->add_option("--l-range", l_range, "lo:hi");
    double softening = -1;
    sim->add_option("--softening", softening, "Pair-force softening length (0: exact model)");
    sim->add_option("--subsample", subsample_src, "Also write point-cloud series: fixed:N or random:LO:HI");

    // persist
    auto* per = app.add_subcommand("persist", "Persistence diagrams of every trajectory in a directory");
    std::string in_dir, per_out = "diagrams.csv", threshold = "auto", source = "full";
    int max_dim = -1;
    double cap = -1;
    per->add_option("--in-dir", in_dir)->required();
    per->add_option("--out", per_out);
    per->add_option("--max-dim", max_dim);
    per->add_option("--threshold", threshold, "auto or a value");
    per->add_option("--cap", cap, "Common bound T (0: auto)");
    per->add_option("--source", source, "full, fixed:N or random:LO:HI (ignored for .pcld inputs)");

    // featurize
    auto* fea = app.add_subcommand("featurize", "Feature path per simulation");
    std::string diagrams_file, mode, eps_grid;
    int degree = 0, inner_level = 0;
    std::size_t stride = 0;
    fea->add_option("--diagrams", diagrams_file)->required();
    fea->add_option("--mode", mode)->check(CLI::IsMember({"moments", "crocker", "betti-path"}));
    fea->add_option("--degree", degree);
    fea->add_option("--eps-grid", eps_grid, "lo:hi:count:log");
    fea->add_option("--time-stride", stride);
    fea->add_option("--inner-level", inner_level);
    int fea_max_dim = -1;
    fea->add_option("--max-dim", fea_max_dim, "Highest homology dimension in the moment features");

    // kernel
    auto* ker = app.add_subcommand("kernel", "Signature Gram matrix between feature directories");
    std::string feat_dir, cross_dir, route, gram_out = "gram.bin";
    int level = 0;
    bool normalize = false;
    std::size_t lags = 0, tau = 0;
    ker->add_option("--features-dir", feat_dir)->required();
    ker->add_option("--cross-dir", cross_dir, "Row paths for a cross Gram (columns stay --features-dir)");
    ker->add_option("--level", level);
    ker->add_option("--route", route)->check(CLI::IsMember({"explicit", "kernel-trick", "linear"}));
    auto* norm_flag = ker->add_flag("--normalize", normalize);
    ker->add_option("--lags", lags);
    ker->add_option("--tau", tau);
    ker->add_option("--out", gram_out);

    // train
    auto* tr = app.add_subcommand("train", "Cross-validated SVR on a Gram matrix");
    std::string gram_file, targets_file, column = "C", grid_l, grid_e, model_out = "model.txt", cv_out = "cv.csv";
    int folds = 0;
    tr->add_option("--gram", gram_file)->required();
    tr->add_option("--targets", targets_file)->required();
    tr->add_option("--column", column, "Target column (C or ell)");
    tr->add_option("--grid-lambda", grid_l, "lo:hi:n:log");
    tr->add_option("--grid-eps", grid_e, "lo:hi:n:log");
    tr->add_option("--folds", folds);
    tr->add_option("--out", model_out);
    tr->add_option("--cv-out", cv_out);

    // evaluate
    auto* ev = app.add_subcommand("evaluate", "Predict with a trained model and report the MSE");
    std::string model_file, cross_file, truth_file, pred_out;
    ev->add_option("--model", model_file)->required();
    ev->add_option("--cross-gram", cross_file)->required();
    ev->add_option("--truth", truth_file)->required();
    ev->add_option("--column", column);
    ev->add_option("--out", pred_out, "Write predictions CSV");

    // pipeline
    auto* pip = app.add_subcommand("pipeline", "Run the full experiment from a config");

    // w1
    auto* w1 = app.add_subcommand("w1", "Partial 1-Wasserstein distance between two diagrams");
    std::string fa, fb;
    std::uint64_t sim_a = 0, sim_b = 0;
    std::size_t time_a = 0, time_b = 0;
    int dim = 1;
    bool plan = false;
    w1->add_option("--a", fa)->required();
    w1->add_option("--b", fb)->required();
    w1->add_option("--sim-a", sim_a);
    w1->add_option("--sim-b", sim_b);
    w1->add_option("--time-a", time_a);
    w1->add_option("--time-b", time_b);
    w1->add_option("--dim", dim);
    w1->add_flag("--plan", plan, "Print the optimal plan as CSV");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : static_cast<int>(ExitCode::kConfigError);
    }

    try {
        set_thread_count(threads);
        pipeline::ExperimentConfig cfg = config_path.empty() ? pipeline::ExperimentConfig{}
                                                            : pipeline::load_config(config_path);
        if (seed_opt->count()) {
            cfg.simulation.seed = seed;
            cfg.trials.seed = seed;
        }
        const fs::path out(out_dir);

        if (*sim) {
            auto& s = cfg.simulation;
            if (n_sims) s.n_sims = n_sims;
            if (n_agents) s.n_agents = n_agents;
            if (t_end > 0) s.t_end = t_end;
            if (n_steps) s.n_steps = n_steps;
            if (!c_range.empty()) parse_range(c_range, s.c_lo, s.c_hi);
            if (!l_range.empty()) parse_range(l_range, s.l_lo, s.l_hi);
            if (softening >= 0) s.softening = softening;
            pipeline::CorpusStats stats;
            const auto corpus = pipeline::build_corpus(s, &stats);
            std::string targets = "sim_id,seed,C,ell\n";
            for (const auto& m : corpus) {
                io::write_trajectory(out / (sim_name(m.sim_id) + ".swrm"), m.traj);
                if (!subsample_src.empty())
                    io::write_series(out / (sim_name(m.sim_id) + ".pcld"),
                                     pipeline::source_series(m, subsample_src, m.seed));
                targets += std::to_string(m.sim_id) + ',' + std::to_string(m.seed) + ',' + io::format_double(m.C) +
                           ',' + io::format_double(m.ell) + '\n';
            }
            io::atomic_write(out / "targets.csv", targets);
            std::cout << corpus.size() << " simulations kept of " << stats.attempts << " attempts ("
                      << stats.rejected_unbounded << " unbounded, " << stats.rejected_integration
                      << " integration failures)\n";
        } else if (*per) {
            if (max_dim >= 0) cfg.persistence.max_dim = max_dim;
            cfg.persistence.threshold = parse_auto(threshold);
            if (cap >= 0) cfg.persistence.cap = cap;
            cfg.validate();
            std::vector<persistence::DiagramPath> paths;
            auto pcld = files_with_extension(in_dir, ".pcld");
            if (!pcld.empty()) {
                for (std::size_t k = 0; k < pcld.size(); ++k) {
                    const auto series = io::read_series(pcld[k]);
                    paths.push_back(pipeline::series_diagrams(series, cfg, k, "subsampled"));
                }
            } else {
                const auto swrm = files_with_extension(in_dir, ".swrm");
                if (swrm.empty()) throw DataError("no .swrm or .pcld files in " + in_dir + "; run `simulate` first");
                for (std::size_t k = 0; k < swrm.size(); ++k) {
                    pipeline::Simulation m;
                    m.sim_id = k;
                    m.traj = io::read_trajectory(swrm[k]);
                    m.seed = m.traj.seed;
                    paths.push_back(pipeline::series_diagrams(pipeline::source_series(m, source, m.seed), cfg, k, source));
                }
            }
            const fs::path target = fs::path(per_out).is_absolute() ? fs::path(per_out) : out / per_out;
            io::write_diagrams(target, paths);
            std::cout << "wrote " << paths.size() << " diagram paths to " << target.string() << "\n";
        } else if (*fea) {
            if (!mode.empty()) cfg.features.mode = mode;
            if (degree) cfg.features.degree = degree;
            if (!eps_grid.empty()) cfg.features.eps_grid = pipeline::GridSpec::parse(eps_grid);
            if (stride) cfg.features.time_stride = stride;
            if (inner_level) cfg.features.inner_level = inner_level;
            const auto paths = io::read_diagrams(diagrams_file);
            if (fea_max_dim >= 0) cfg.persistence.max_dim = fea_max_dim;
            cfg.validate();
            for (const auto& p : paths)
                io::write_features(out / (sim_name(p.sim_id) + ".feat"), pipeline::featurize(p, cfg));
            std::cout << "wrote " << paths.size() << " feature paths\n";
        } else if (*ker) {
            if (level) cfg.kernel.level = level;
            if (!route.empty()) cfg.kernel.route = route;
            if (norm_flag->count()) cfg.kernel.normalize = normalize;
            if (ker->get_option("--lags")->count()) cfg.kernel.lags = lags;
            if (tau) cfg.kernel.tau = tau;
            auto load = [](const std::string& dir) {
                std::vector<FeaturePath> v;
                for (const auto& f : files_with_extension(dir, ".feat")) v.push_back(io::read_features(f));
                if (v.empty()) throw DataError("no .feat files in " + dir + "; run `featurize` first");
                return v;
            };
            const auto cols = load(feat_dir);
            const bool symmetric = cross_dir.empty();
            const auto rows = symmetric ? cols : load(cross_dir);
            if (cfg.features.mode == "crocker" || cols.front().provenance == Provenance::kCrockerColumn)
                cfg.features.mode = "crocker";
            io::GramFile g;
            g.matrix = pipeline::gram(rows, cols, cfg, symmetric);
            g.level = cfg.kernel.level;
            g.normalized = cfg.kernel.normalize;
            g.route = cfg.features.mode == "crocker" ? signature::Route::kLinear : signature::parse_route(cfg.kernel.route);
            const fs::path target = fs::path(gram_out).is_absolute() ? fs::path(gram_out) : out / gram_out;
            io::write_gram(target, g);
            std::cout << "wrote " << g.matrix.rows() << "x" << g.matrix.cols() << " gram to " << target.string() << "\n";
        } else if (*tr) {
            if (!grid_l.empty()) cfg.regression.lambda_grid = pipeline::GridSpec::parse(grid_l);
            if (!grid_e.empty()) cfg.regression.epsilon_grid = pipeline::GridSpec::parse(grid_e);
            if (folds) cfg.regression.folds = folds;
            const auto g = io::read_gram(gram_file);
            const auto y = io::read_csv_column(targets_file, column);
            regression::SvrOptions so;
            so.tolerance = cfg.regression.tolerance;
            so.max_updates = cfg.regression.max_updates;
            const auto cv = regression::grid_search_cv(g.matrix, y, cfg.regression.lambda_grid.values(),
                                                       cfg.regression.epsilon_grid.values(), cfg.regression.folds,
                                                       cfg.trials.seed, so);
            const auto model = regression::svr_train(g.matrix, y, cv.best_lambda, cv.best_epsilon, so);
            io::write_model(out / model_out, model);
            io::write_cv_report(out / cv_out, cv);
            std::cout << "lambda " << io::format_double(cv.best_lambda) << " epsilon "
                      << io::format_double(cv.best_epsilon) << " cv_mse " << io::format_double(cv.best_mse)
                      << (model.converged ? "" : " (solver hit the update limit)") << "\n";
        } else if (*ev) {
            const auto model = io::read_model(model_file);
            const auto g = io::read_gram(cross_file);
            const auto truth = io::read_csv_column(truth_file, column);
            const auto pred = regression::svr_predict(model, g.matrix);
            if (!pred_out.empty()) {
                std::string csv = "prediction,truth\n";
                for (std::size_t i = 0; i < pred.size() && i < truth.size(); ++i)
                    csv += io::format_double(pred[i]) + ',' + io::format_double(truth[i]) + '\n';
                io::atomic_write(out / pred_out, csv);
            }
            std::cout << "mse " << io::format_double(regression::mse(pred, truth)) << "\n";
        } else if (*pip) {
            const auto res = pipeline::run_pipeline(cfg, out);
            std::cout << res.trials.size() << " trials written to " << out.string() << "\n";
        } else if (*w1) {
            auto pick = [dim](const std::string& file, std::uint64_t sim, std::size_t t) {
                for (const auto& p : io::read_diagrams(file))
                    if (p.sim_id == sim) {
                        if (t >= p.frames.size()) throw DataError(file + ": time index out of range");
                        return p.frames[t][dim];
                    }
                throw DataError(file + ": no simulation " + std::to_string(sim));
            };
            if (dim < 0 || dim > 2) throw ArgumentError("--dim must be 0, 1 or 2");
            const auto X = pick(fa, sim_a, time_a), Y = pick(fb, sim_b, time_b);
            const auto [d, pl] = metrics::w1_partial(X, Y);
            std::cout << io::format_double(d) << "\n";
            if (plan) {
                std::cout << "x,y,cost\n";
                for (const auto& m : pl.matches)
                    std::cout << m.x << ',' << m.y << ',' << io::format_double(m.cost) << "\n";
            }
        }
        return 0;
    } catch (const ArgumentError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return static_cast<int>(ExitCode::kConfigError);
    } catch (const SizeError& e) {
        std::cerr << "error: " << e.what() << " (estimate " << e.estimate() << ")\n";
        return static_cast<int>(ExitCode::kConfigError);
    } catch (const NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return static_cast<int>(ExitCode::kNumericalFailure);
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return static_cast<int>(ExitCode::kDataError);
    } catch (const fs::filesystem_error& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return static_cast<int>(ExitCode::kDataError);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return static_cast<int>(ExitCode::kDataError);
    }
}
