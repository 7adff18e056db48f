#pragma once

#include "rrde/paths.hpp"

#include <optional>
#include <string>
#include <vector>

namespace rrde {

/// One window [first, last] (node indices, inclusive) on which the local fixed-point
/// problem was solved. The step last -> last+1 is handled by the jump formula.
struct WindowRecord {
    std::size_t first = 0;
    std::size_t last = 0;
    /// Driver/barrier norm that admitted the window.
    double admission_norm = 0.0;
    std::size_t iterations = 0;
    /// Distances between successive iterates, in the solver's metric.
    std::vector<double> distances;
    /// distances[k] / distances[k-1].
    std::vector<double> ratios;
    double max_ratio = 0.0;
    /// Number of times the window was shortened before being accepted.
    std::size_t shrinks = 0;
    /// Damping used for the accepted run (1 for plain Picard).
    double damping = 1.0;
};

/// Reflection applied across a window boundary at `node`.
struct JumpRecord {
    std::size_t node = 0;
    /// Value before reflection: Y_{t-} plus the driver jump contribution.
    Vector unreflected;
    Vector delta_k;
    /// Y at the node; components that were pushed sit exactly on the barrier.
    Vector value;
};

enum class FailureKind { NonContraction, MaxIterations };

struct SolveFailure {
    FailureKind kind = FailureKind::MaxIterations;
    std::size_t window_first = 0;
    std::size_t window_last = 0;
    std::vector<double> distances;
    std::vector<double> ratios;
    std::string message;
};

struct SolveReport {
    bool converged = false;
    std::size_t total_iterations = 0;
    std::vector<WindowRecord> windows;
    std::vector<JumpRecord> jumps;
    /// Window start nodes; the partition used.
    std::vector<std::size_t> partition;
    /// Max node defect of the discrete equation.
    double residual = 0.0;
    double max_contraction_ratio = 0.0;
    /// Set for multidimensional rough equations outside the lower-triangular class.
    bool non_unique_risk = false;
    std::optional<SolveFailure> failure;
};

const char* to_string(FailureKind kind);

/// Initial guess for the fixed-point iteration on each window.
enum class PicardStart {
    Constant,     ///< Y == Y_s on the window
    Zero,         ///< Y == 0 on the window
    Unreflected,  ///< explicit solution of the equation without reflection
};

const char* to_string(PicardStart start);
PicardStart picard_start_from_string(const std::string& s);

}  // namespace rrde
