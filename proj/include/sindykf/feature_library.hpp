#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace sindykf {

// One candidate function theta_i. Either a monomial in the state variables or
// a time-explicit cosine forcing term B*cos(omega * t / time_scale).
struct MonomialTerm {
    Eigen::VectorXi exponents;  // length n, nonnegative
};

struct ForcingTerm {
    double amplitude = 0.0;
    double frequency = 0.0;
    double time_scale = 1.0;
};

struct FeatureTerm {
    std::variant<MonomialTerm, ForcingTerm> kind;

    bool is_forcing() const { return std::holds_alternative<ForcingTerm>(kind); }
    double value(const Eigen::VectorXd& x, double t) const;
    // d theta / d x_axis, analytic
    double state_derivative(const Eigen::VectorXd& x, double t, int axis) const;
    std::string name() const;
};

struct ForcingSpec {
    double amplitude = 0.0;
    double frequency = 0.0;
    double time_scale = 1.0;
};

// Candidate-function library Theta(x, t). Term order is fixed at construction:
// monomials in graded-lexicographic order (constant first), then the forcing
// term if present. evaluate() and jacobian() index identically.
class FeatureLibrary {
  public:
    // placeholder constant-only library; real instances come from
    // build_polynomial_library
    FeatureLibrary();
    FeatureLibrary(int state_dim, int max_degree, std::vector<FeatureTerm> terms,
                   std::optional<ForcingSpec> forcing);

    int state_dim() const { return state_dim_; }
    int max_degree() const { return max_degree_; }
    int size() const { return static_cast<int>(terms_.size()); }
    const std::vector<FeatureTerm>& terms() const { return terms_; }
    const std::optional<ForcingSpec>& forcing() const { return forcing_; }

    Eigen::VectorXd evaluate(const Eigen::VectorXd& x, double t) const;
    Eigen::MatrixXd jacobian(const Eigen::VectorXd& x, double t) const;  // p x n

    std::vector<std::string> term_names() const;
    // index of the term with the given name, -1 if absent
    int term_index(const std::string& name) const;

  private:
    int state_dim_;
    int max_degree_;
    std::vector<FeatureTerm> terms_;
    std::optional<ForcingSpec> forcing_;
};

FeatureLibrary build_polynomial_library(int state_dim, int max_degree,
                                        std::optional<ForcingSpec> forcing = std::nullopt);

// Copy of a library with the forcing frequency replaced (FRC sweeps retune
// the drive without touching anything else).
FeatureLibrary with_forcing_frequency(const FeatureLibrary& lib, double omega);

}  // namespace sindykf
