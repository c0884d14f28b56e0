#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "diagpath/feature_path.hpp"
#include "diagpath/persistence.hpp"
#include "diagpath/swarm.hpp"

namespace diagpath::pipeline {

/// "lo:hi:count:log" or "lo:hi:count:lin".
struct GridSpec {
    double lo = 0;
    double hi = 1;
    std::size_t count = 1;
    bool log = true;

    static GridSpec parse(const std::string& text);
    std::string str() const;
    std::vector<double> values() const;
};

struct SimulationConfig {
    std::size_t n_sims = 500;
    std::size_t n_agents = 200;
    double t_end = 400;
    std::size_t n_steps = 400;
    double c_lo = 0.1, c_hi = 2.0;
    double l_lo = 0.1, l_hi = 2.0;
    double mass = 1.0, alpha = 1.0, beta = 0.5;
    std::uint64_t seed = 0;
    double reject_displacement = 40;
    double reject_before = 200;
    std::size_t max_attempts = 0;  // 0: 20 * n_sims
    double softening = 0;          // see swarm::SimulateOptions; 0 is the exact model
    std::size_t max_steps = 0;     // integrator step budget per run (0: integrator default); overruns are rejected
};

struct PersistenceConfig {
    int max_dim = 2;
    double threshold = 0;  // <= 0: enclosing radius per cloud
    double cap = 0;        // <= 0: largest threshold of the path
    std::size_t max_simplices = persistence::kDefaultSimplexLimit;
};

struct FeatureConfig {
    std::string mode = "moments";  // moments | crocker | betti-path
    int degree = 6;
    GridSpec eps_grid{1e-4, 1.0, 200, true};
    std::size_t time_stride = 20;
    int inner_level = 6;
    bool count_normalize = false;  // scale clouds by N^(1/3) and diagrams by 1/N
};

struct KernelConfig {
    int level = 8;
    std::string route = "kernel-trick";
    bool normalize = false;
    std::size_t lags = 0;
    std::size_t tau = 1;
};

struct RegressionConfig {
    GridSpec lambda_grid{1e-3, 1e3, 13, true};
    GridSpec epsilon_grid{1e-5, 1e1, 13, true};
    int folds = 4;
    double tolerance = 1e-3;
    std::size_t max_updates = 1000000;
};

/// Data source tag: "full", "fixed:N" or "random:LO:HI".
struct Regime {
    std::string name = "full";
    std::string train_source = "full";
    std::string test_source = "full";
};

struct TrialConfig {
    std::size_t n_trials = 1000;
    std::size_t n_train = 400;
    std::size_t n_test = 100;
    std::uint64_t seed = 0;
    std::vector<Regime> regimes{Regime{}};
};

struct ExperimentConfig {
    SimulationConfig simulation;
    PersistenceConfig persistence;
    FeatureConfig features;
    KernelConfig kernel;
    RegressionConfig regression;
    TrialConfig trials;

    /// Throws ArgumentError on inconsistent settings.
    void validate() const;
    std::string feature_map_name() const;
};

/// Reads a JSON config; missing keys keep their defaults, unknown keys are errors.
ExperimentConfig load_config(const std::filesystem::path& path);
ExperimentConfig parse_config(const std::string& json_text);
std::string dump_config(const ExperimentConfig& cfg);

struct Simulation {
    std::uint64_t sim_id = 0;
    std::uint64_t seed = 0;
    double C = 0;
    double ell = 0;
    swarm::SwarmTrajectory traj;
};

struct CorpusStats {
    std::size_t attempts = 0;
    std::size_t rejected_unbounded = 0;
    std::size_t rejected_integration = 0;
};

/// Draws (C, ell) and initial conditions per attempt and keeps the first
/// n_sims bounded runs in attempt order, resampling until the target is met.
std::vector<Simulation> build_corpus(const SimulationConfig& cfg, CorpusStats* stats = nullptr);

swarm::SubsampleScheme parse_source(const std::string& tag, bool* is_full);

/// Point clouds the features of one simulation are computed from.
swarm::PointCloudSeries source_series(const Simulation& sim, const std::string& source, std::uint64_t seed);

/// Diagram path of a series, count-normalized when the config asks for it.
persistence::DiagramPath series_diagrams(const swarm::PointCloudSeries& series, const ExperimentConfig& cfg,
                                         std::uint64_t sim_id, const std::string& scheme);

FeaturePath featurize(const persistence::DiagramPath& path, const ExperimentConfig& cfg);

/// Gram between feature paths under the configured kernel.
Eigen::MatrixXd gram(const std::vector<FeaturePath>& rows, const std::vector<FeaturePath>& cols,
                     const ExperimentConfig& cfg, bool symmetric);

struct ParameterResult {
    std::string parameter;  // "C" or "ell"
    double lambda = 0;
    double epsilon = 0;
    double mse = 0;
    double target_variance = 0;  // population variance of the test targets
    bool converged = true;
};

struct TrialResult {
    std::string regime;
    std::string feature_map;
    std::size_t trial = 0;
    std::vector<ParameterResult> params;
    double seconds = 0;
};

struct PipelineResult {
    std::vector<TrialResult> trials;
    CorpusStats corpus;
    std::vector<Simulation> simulations;
};

/// Features per source, Gram matrices and trials on an existing corpus.
std::vector<TrialResult> run_experiment(const ExperimentConfig& cfg, const std::vector<Simulation>& sims);

/// Full experiment: corpus, features per source, Gram matrices, then trials
/// of cross-validated selection, training and held-out prediction.
/// Writes targets.csv, results.csv, timing.csv and box-plot files when out_dir is nonempty.
PipelineResult run_pipeline(const ExperimentConfig& cfg, const std::filesystem::path& out_dir = {});

/// Trials on precomputed Grams: gram_train (n x n, train source) and
/// gram_cross (n x n, rows from the test source, columns from the train source).
std::vector<TrialResult> run_trials(const Eigen::MatrixXd& gram_train, const Eigen::MatrixXd& gram_cross,
                                    const std::vector<double>& C, const std::vector<double>& ell,
                                    const ExperimentConfig& cfg, const Regime& regime);

std::string results_csv(const std::vector<TrialResult>& results);

struct Quartiles {
    double min = 0, q1 = 0, median = 0, q3 = 0, max = 0;
};
/// Linear interpolation between order statistics at position p * (n - 1).
Quartiles quartiles(std::vector<double> values);

struct BoxplotData {
    std::string long_csv;
    std::string summary_csv;
    std::vector<std::string> warnings;
};

/// Long-format rows (regime, feature_map, parameter, trial, mse) plus a quartile
/// summary per group. With a nonempty `groups` list ("regime/feature_map"),
/// only those groups are emitted; requested groups without results are
/// omitted with a warning.
BoxplotData emit_boxplot_data(const std::vector<TrialResult>& results,
                              const std::vector<std::string>& groups = {});

}  // namespace diagpath::pipeline
