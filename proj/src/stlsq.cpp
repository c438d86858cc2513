#include "sindykf/stlsq.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace sindykf {

SnapshotSet concat_snapshots(const std::vector<SnapshotSet>& parts) {
    if (parts.empty()) throw std::invalid_argument("concat_snapshots: empty input");
    Eigen::Index total = 0;
    const Eigen::Index n = parts.front().states.cols();
    for (const auto& p : parts) {
        if (p.states.cols() != n) throw std::invalid_argument("concat_snapshots: mixed state dims");
        total += p.times.size();
    }
    SnapshotSet out;
    out.times.resize(total);
    out.states.resize(total, n);
    out.derivatives.resize(total, n);
    Eigen::Index row = 0;
    for (const auto& p : parts) {
        const Eigen::Index T = p.times.size();
        out.times.segment(row, T) = p.times;
        out.states.middleRows(row, T) = p.states;
        out.derivatives.middleRows(row, T) = p.derivatives;
        row += T;
    }
    return out;
}

Eigen::MatrixXd assemble_regression(const FeatureLibrary& library, const SnapshotSet& data) {
    if (library.state_dim() != data.states.cols()) {
        throw std::invalid_argument("assemble_regression: library state_dim " +
                                    std::to_string(library.state_dim()) + " vs data dim " +
                                    std::to_string(data.states.cols()));
    }
    const Eigen::Index T = data.times.size();
    Eigen::MatrixXd theta(T, library.size());
    for (Eigen::Index j = 0; j < T; ++j)
        theta.row(j) = library.evaluate(data.states.row(j), data.times[j]).transpose();
    return theta;
}

namespace {

Eigen::VectorXd ridge_solve(const Eigen::MatrixXd& gram, const Eigen::VectorXd& rhs,
                            const std::vector<int>& support, double ridge, int column) {
    const int m = static_cast<int>(support.size());
    Eigen::MatrixXd a(m, m);
    Eigen::VectorXd b(m);
    for (int r = 0; r < m; ++r) {
        b[r] = rhs[support[r]];
        for (int c = 0; c < m; ++c) a(r, c) = gram(support[r], support[c]);
        a(r, r) += ridge;
    }
    Eigen::LDLT<Eigen::MatrixXd> ldlt(a);
    Eigen::VectorXd sol = ldlt.solve(b);
    if (ldlt.info() != Eigen::Success || !sol.allFinite()) {
        std::string terms;
        for (int idx : support) terms += (terms.empty() ? "" : ",") + std::to_string(idx);
        throw std::runtime_error("stlsq: singular normal equations for column " +
                                 std::to_string(column) + " on support {" + terms + "}");
    }
    return sol;
}

}  // namespace

Eigen::MatrixXd stlsq_normal(const Eigen::MatrixXd& gram, const Eigen::MatrixXd& rhs,
                             const StlsqSettings& settings) {
    if (gram.rows() != gram.cols() || gram.rows() != rhs.rows())
        throw std::invalid_argument("stlsq_normal: shape mismatch");
    if (settings.ridge_strength < 0 || settings.threshold < 0 || settings.max_iterations < 1)
        throw std::invalid_argument("stlsq: invalid settings");

    const int p = static_cast<int>(gram.rows());
    const int n = static_cast<int>(rhs.cols());
    Eigen::MatrixXd xi = Eigen::MatrixXd::Zero(p, n);

    std::vector<int> support, next;
    for (int col = 0; col < n; ++col) {
        support.resize(p);
        for (int i = 0; i < p; ++i) support[i] = i;
        Eigen::VectorXd coef = ridge_solve(gram, rhs.col(col), support, settings.ridge_strength, col);

        for (int it = 0; it < settings.max_iterations; ++it) {
            next.clear();
            for (int r = 0; r < static_cast<int>(support.size()); ++r)
                if (std::abs(coef[r]) >= settings.threshold) next.push_back(support[r]);
            if (next.empty()) {
                support.clear();
                coef.resize(0);
                break;
            }
            const bool stable = (next.size() == support.size() && it > 0);
            support.swap(next);
            if (stable) break;
            coef = ridge_solve(gram, rhs.col(col), support, settings.ridge_strength, col);
        }
        for (int r = 0; r < static_cast<int>(support.size()); ++r)
            xi(support[r], col) = coef[r];
    }
    return xi;
}

Eigen::MatrixXd stlsq(const Eigen::MatrixXd& theta, const Eigen::MatrixXd& xdot,
                      const StlsqSettings& settings) {
    if (theta.rows() != xdot.rows())
        throw std::invalid_argument("stlsq: theta rows " + std::to_string(theta.rows()) +
                                    " vs xdot rows " + std::to_string(xdot.rows()));
    const Eigen::MatrixXd gram = theta.transpose() * theta;
    const Eigen::MatrixXd rhs = theta.transpose() * xdot;
    return stlsq_normal(gram, rhs, settings);
}

Eigen::MatrixXd differentiate_snapshots(const Eigen::VectorXd& times,
                                        const Eigen::MatrixXd& states) {
    const Eigen::Index T = times.size();
    if (T < 3) throw std::invalid_argument("differentiate_snapshots: need at least 3 samples");
    if (states.rows() != T)
        throw std::invalid_argument("differentiate_snapshots: times/states length mismatch");
    for (Eigen::Index j = 1; j < T; ++j)
        if (!(times[j] > times[j - 1]))
            throw std::invalid_argument("differentiate_snapshots: times must be strictly increasing");

    Eigen::MatrixXd d(T, states.cols());
    // 3-point stencils valid on non-uniform grids, second order throughout
    for (Eigen::Index j = 0; j < T; ++j) {
        const Eigen::Index i = std::min(std::max<Eigen::Index>(j, 1), T - 2);
        const double t0 = times[i - 1], t1 = times[i], t2 = times[i + 1];
        const double t = times[j];
        const double w0 = (2 * t - t1 - t2) / ((t0 - t1) * (t0 - t2));
        const double w1 = (2 * t - t0 - t2) / ((t1 - t0) * (t1 - t2));
        const double w2 = (2 * t - t0 - t1) / ((t2 - t0) * (t2 - t1));
        d.row(j) = w0 * states.row(i - 1) + w1 * states.row(i) + w2 * states.row(i + 1);
    }
    return d;
}

}  // namespace sindykf
