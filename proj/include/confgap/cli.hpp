#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "confgap/assembly.hpp"
#include "confgap/eigensolver.hpp"

namespace confgap {

enum class Command { Solve, Gap, Concavity, Sweep, HoroconvexVerify, HoroconvexThresholds, Torsion };

std::string to_string(Command c);

inline constexpr int kExitSuccess = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitNumerical = 2;
inline constexpr int kExitVerification = 3;

struct RunConfig {
    Command command = Command::Solve;
    std::string problem_path;
    std::string domain_path;
    /// Connection for concavity and sweep: a chart JSON file, or "model[:R]" with model one of
    /// euclidean, poincare, sphere. Empty means the chart of the problem's domain.
    std::string connection;
    double h = 0.02;
    int eigenpairs = 2;
    std::vector<double> t_grid{0.0, 0.25, 0.5, 0.75, 1.0};
    double beta = 1.0;
    std::optional<double> R;
    std::optional<double> margin;
    std::string b = "0";
    int levels = 10;
    std::string output_dir = ".";
    bool write_fields = false;
    SolverOptions solver;
    MeshOptions mesh;
    double concavity_tolerance_scale = 1e-3;
};

/// Parses argv-style arguments (program name excluded). Returns the exit code
/// to use when parsing ends the run (help, usage error), nothing otherwise.
std::optional<int> parse_command_line(const std::vector<std::string>& args, RunConfig& config, std::ostream& out,
                                      std::ostream& err);

/// Executes one command, writes report.json (and the CSV outputs) into the
/// output directory, and returns the exit code: 0 success, 1 usage or
/// configuration error, 2 numerical failure, 3 verification failure.
int run(const RunConfig& config, std::ostream& out, std::ostream& err);

/// parse_command_line followed by run.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace confgap
