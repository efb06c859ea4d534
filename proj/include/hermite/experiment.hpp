#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hermite/mesh.hpp"

namespace hermite {

/// Invalid run configuration (exit status 1).
class usage_error : public std::invalid_argument
{
  public:
    using std::invalid_argument::invalid_argument;
};

/// Constant-coefficient problem with a manufactured sine solution.
struct CustomProblemConfig
{
    Box domain;
    Eigen::Matrix2d A = Eigen::Matrix2d::Identity();
    Eigen::Vector2d b = Eigen::Vector2d::Zero();
    double c = 0.0;
    double epsilon = 1.0;
    double lambda = 0.0;
};

struct RunConfig
{
    std::string experiment = "exp1"; ///< exp1, exp2, exp3, exp4 or custom
    int degree = 3;
    /// Subdivisions per side of the uniform meshes; empty selects the defaults.
    std::vector<int> levels;
    /// Graded sequence for exp4 (level 0 is the coarse mesh).
    int graded_levels = 14;
    double grading = 120.0;
    /// Newton increment tolerance; unset selects default_tolerance(experiment).
    std::optional<double> tol;
    int max_iter = 50;
    std::filesystem::path out = ".";
    std::optional<double> eps_tilde;
    std::optional<CustomProblemConfig> custom;
};

enum ExitStatus
{
    exit_success = 0,
    exit_usage = 1,
    exit_solver_failure = 2,
    exit_invariant_violation = 3
};

/// 1e-8 in the lambda-norm, except exp4: there the increments stall between
/// 1e-8 and 2e-7 on the finest graded meshes (round-off, |u_h| is about 171),
/// so the default is 1e-6.
double default_tolerance(const std::string& experiment);

/// Uniform subdivisions used when `levels` is empty.
std::vector<int> default_levels(const std::string& experiment, int degree);

/// Throws usage_error describing the first problem found.
void validate(const RunConfig& config);

/**
 * Reads a JSON config. Keys: experiment, degree, levels, graded_levels,
 * grading, tol, max_iter, out, eps_tilde, and for custom runs
 *   "problem": {"domain": [xmin, xmax, ymin, ymax], "A": [[a11, a12], [a21, a22]],
 *               "b": [b1, b2], "c": c, "epsilon": e, "lambda": l}.
 * Missing keys keep the values of `base`. Throws usage_error on malformed input.
 */
RunConfig read_config(std::istream& is, RunConfig base = {});

/**
 * Runs every level and writes errors.csv, meshinfo.csv and (HJB runs)
 * newton_<level>.csv into config.out. Progress and errors go to `log`.
 * Nothing is written when validation fails.
 */
int run_experiment(const RunConfig& config, std::ostream& log);

} // namespace hermite
