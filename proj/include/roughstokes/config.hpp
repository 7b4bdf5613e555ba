#pragma once

#include "roughstokes/adaptivity.hpp"

#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace roughstokes {

class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

std::string_view to_string(RefinementMode mode);
RefinementMode parse_mode(std::string_view name);

/// Settings of one convergence study.
///
/// `datum` is a built-in name (cavity, linear, parabolic-normal), `custom`
/// for the `piece` entries below, or the path of a file holding `piece`
/// lines. A piece reads `segment begin end ; gx ; gy` with gx, gy
/// expressions in x, y and the segment parameter t.
struct RunConfig {
    std::string datum = "cavity";
    std::vector<std::string> pieces;
    Regularizer regularizer = Regularizer::ModifiedLagrange;
    JumpPolicy jump_policy = JumpPolicy::LowerSegment;
    Method method = Method::Mini;
    RefinementMode mode = RefinementMode::Uniform;
    EstimatorEdges estimator_edges = EstimatorEdges::Interior;
    std::optional<double> theta;
    std::optional<int> n;
    std::string mesh_file;
    int levels = 5;
    int max_dofs = 70000;
    int max_iters = 25;
    std::string csv;
    std::string vtk_dir;

    bool operator==(const RunConfig&) const = default;
};

/// Keys accepted by apply_setting, in serialization order.
const std::vector<std::string>& config_keys();

/// Sets one key from its text value. `piece` appends.
void apply_setting(RunConfig& config, std::string_view key, std::string_view value);

/// Flat `key = value` lines; blank lines and `#` comments are skipped.
RunConfig parse_config(std::istream& in);
RunConfig parse_config(std::string_view text);
RunConfig load_config(const std::string& path);
std::string serialize(const RunConfig& config);

/// Consistency of the settings alone (no file system access).
void validate(const RunConfig& config);
/// Output locations can be created and written.
void validate_paths(const RunConfig& config);

/// Structured size used when neither `n` nor `mesh_file` is given: uniform
/// runs start one level below the first recorded mesh with 289 velocity
/// nodes; adaptive runs start on the 6 x 6 mesh.
int default_initial_n(const RunConfig& config);

MeshPtr build_initial_mesh(const RunConfig& config);
BoundaryDatum build_datum(const RunConfig& config, const std::vector<Segment>& segments);
StudyConfig make_study(const RunConfig& config);

/// Runs the study described by the configuration.
ConvergenceRecord run_study(const RunConfig& config, LevelObserver observer = {});

}  // namespace roughstokes
