#pragma once

#include <Eigen/Dense>

#include "sindykf/feature_library.hpp"

namespace sindykf {

// Snapshot matrix X of states plus the matching derivative matrix Xdot,
// sampled at `times`. Multi-trajectory sets are formed by row-wise
// concatenation (regression is pointwise, so boundaries carry no constraint);
// strictly increasing times are only required where derivatives are computed
// numerically.
struct SnapshotSet {
    Eigen::VectorXd times;        // T
    Eigen::MatrixXd states;       // T x n
    Eigen::MatrixXd derivatives;  // T x n
};

SnapshotSet concat_snapshots(const std::vector<SnapshotSet>& parts);

struct StlsqSettings {
    double ridge_strength = 0.05;
    double threshold = 5e-4;
    int max_iterations = 20;
};

// Theta(X): row j is the library evaluated at (states[j], times[j]).
Eigen::MatrixXd assemble_regression(const FeatureLibrary& library, const SnapshotSet& data);

// Sequentially thresholded least squares with l2 regularisation. Per column:
// ridge solve, zero entries below the threshold, re-solve on the surviving
// support, repeat until the support is stable (or max_iterations). Entries
// off-support are exact zeros.
Eigen::MatrixXd stlsq(const Eigen::MatrixXd& theta, const Eigen::MatrixXd& xdot,
                      const StlsqSettings& settings);

// Same algorithm operating on precomputed normal equations
// gram = Theta^T Theta (p x p), rhs = Theta^T Xdot (p x n). Large training
// sets accumulate these in chunks instead of materialising Theta.
Eigen::MatrixXd stlsq_normal(const Eigen::MatrixXd& gram, const Eigen::MatrixXd& rhs,
                             const StlsqSettings& settings);

// Second-order finite differences: central in the interior, one-sided at the
// ends. Supports non-uniform strictly increasing grids; requires T >= 3.
Eigen::MatrixXd differentiate_snapshots(const Eigen::VectorXd& times,
                                        const Eigen::MatrixXd& states);

}  // namespace sindykf
