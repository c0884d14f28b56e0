#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "diagpath/feature_path.hpp"
#include "diagpath/gram.hpp"
#include "diagpath/persistence.hpp"
#include "diagpath/regression.hpp"
#include "diagpath/swarm.hpp"

namespace diagpath::io {

namespace fs = std::filesystem;

/// Shortest decimal that parses back to the same double.
std::string format_double(double v);
double parse_double(const std::string& s);

/// Writes to a sibling temporary file, then renames over the target.
void atomic_write(const fs::path& path, const std::string& bytes);
std::string read_file(const fs::path& path);

// SWRM1: header, positions, velocities, then the sample times.
void write_trajectory(const fs::path& path, const swarm::SwarmTrajectory& traj);
swarm::SwarmTrajectory read_trajectory(const fs::path& path);

// PCLD1: header, per-time counts, times, then the points.
void write_series(const fs::path& path, const swarm::PointCloudSeries& series);
swarm::PointCloudSeries read_series(const fs::path& path);

/// Diagram CSV `sim_id,time_index,homology_dim,birth,lifetime` plus a
/// `<file>.meta.json` sidecar with the per-simulation times, bound and scheme.
void write_diagrams(const fs::path& path, const std::vector<persistence::DiagramPath>& paths);
std::vector<persistence::DiagramPath> read_diagrams(const fs::path& path);

void write_features(const fs::path& path, const FeaturePath& fp);
FeaturePath read_features(const fs::path& path);

struct GramFile {
    Eigen::MatrixXd matrix;
    int level = 0;
    bool normalized = false;
    signature::Route route = signature::Route::kKernelTrick;
};
void write_gram(const fs::path& path, const GramFile& g);
GramFile read_gram(const fs::path& path);

void write_model(const fs::path& path, const regression::SvrModel& m);
regression::SvrModel read_model(const fs::path& path);

void write_cv_report(const fs::path& path, const regression::CvReport& r);

/// Column of a headed CSV, selected by name.
std::vector<double> read_csv_column(const fs::path& path, const std::string& column);

}  // namespace diagpath::io
