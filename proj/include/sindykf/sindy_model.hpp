#pragma once

#include <Eigen/Dense>
#include <utility>
#include <vector>

#include "sindykf/feature_library.hpp"

namespace sindykf {

// Boolean selection of which coefficients the filter may evolve. The flattened
// order of the active entries defines the layout of xi_tilde inside the
// augmented state: state-major, i.e. all active terms of equation 1 first (in
// term-index order), then equation 2, and so on. FilterConfig diagonals for
// the coefficient block follow this order.
struct AdaptivityMask {
    Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> mask;  // p x n

    static AdaptivityMask none(int p, int n);

    int active_count() const;
    std::vector<std::pair<int, int>> active_entries() const;  // (term, state)
};

// Adaptive SINDy model: coefficient matrix Xi over `library`, with `mask`
// selecting the entries that join the augmented state. The complement of the
// mask is the fixed part and never changes during filtering.
struct SindyModel {
    FeatureLibrary library;
    Eigen::MatrixXd xi;  // p x n
    AdaptivityMask mask;

    int state_dim() const { return static_cast<int>(xi.cols()); }
    int term_count() const { return static_cast<int>(xi.rows()); }
    int adaptive_count() const { return mask.active_count(); }

    // masked entries of Xi in the documented flattening order
    Eigen::VectorXd pack_adaptive() const;
    // new model with masked entries replaced; unmasked entries untouched
    SindyModel unpack_adaptive(const Eigen::VectorXd& xi_tilde) const;

    // f(x, t) = Xi^T Theta^T(x, t)
    Eigen::VectorXd eval_f(const Eigen::VectorXd& x, double t) const;

    // (n+rho)x(n+rho) Jacobian of the augmented dynamics [x; xi_tilde]:
    // top-left Xi^T dTheta/dx, top-right the sensitivities theta_i(x,t)
    // placed at (state k, masked entry j), zero rows for the coefficients.
    // Note masked entries with coefficient exactly 0 still get a nonzero
    // sensitivity column; only a vanishing theta_i value removes it.
    Eigen::MatrixXd augmented_jacobian(const Eigen::VectorXd& x, double t) const;
};

void save_model_csv(const SindyModel& model, const std::string& model_path,
                    const std::string& mask_path);
SindyModel load_model_csv(const std::string& model_path, const std::string& mask_path);

}  // namespace sindykf
