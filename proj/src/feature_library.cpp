#include "sindykf/feature_library.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace sindykf {

namespace {

double int_pow(double base, int e) {
    double r = 1.0;
    for (int i = 0; i < e; ++i) r *= base;
    return r;
}

void check_dim(const Eigen::VectorXd& x, int n, const char* what) {
    if (x.size() != n) {
        throw std::invalid_argument(std::string(what) + ": state has size " +
                                    std::to_string(x.size()) + ", library expects " +
                                    std::to_string(n));
    }
}

// exponent vectors of total degree d over n variables, lexicographic with the
// first variable's exponent descending; combined over d = 0..max this is the
// graded-lexicographic order with the constant first
void enumerate_degree(int n, int d, Eigen::VectorXi& current, int pos, int remaining,
                      std::vector<Eigen::VectorXi>& out) {
    if (pos == n - 1) {
        current[pos] = remaining;
        out.push_back(current);
        return;
    }
    for (int e = remaining; e >= 0; --e) {
        current[pos] = e;
        enumerate_degree(n, d, current, pos + 1, remaining - e, out);
    }
}

}  // namespace

double FeatureTerm::value(const Eigen::VectorXd& x, double t) const {
    if (const auto* m = std::get_if<MonomialTerm>(&kind)) {
        double v = 1.0;
        for (int k = 0; k < m->exponents.size(); ++k) {
            if (m->exponents[k] != 0) v *= int_pow(x[k], m->exponents[k]);
        }
        return v;
    }
    const auto& f = std::get<ForcingTerm>(kind);
    return f.amplitude * std::cos(f.frequency * t / f.time_scale);
}

double FeatureTerm::state_derivative(const Eigen::VectorXd& x, double t, int axis) const {
    (void)t;
    if (const auto* m = std::get_if<MonomialTerm>(&kind)) {
        const int e = m->exponents[axis];
        if (e == 0) return 0.0;
        double v = static_cast<double>(e);
        for (int k = 0; k < m->exponents.size(); ++k) {
            const int p = (k == axis) ? m->exponents[k] - 1 : m->exponents[k];
            if (p != 0) v *= int_pow(x[k], p);
        }
        return v;
    }
    return 0.0;  // forcing has no state dependence
}

std::string FeatureTerm::name() const {
    if (is_forcing()) return "forcing";
    const auto& m = std::get<MonomialTerm>(kind);
    std::ostringstream out;
    bool any = false;
    for (int k = 0; k < m.exponents.size(); ++k) {
        if (m.exponents[k] == 0) continue;
        if (any) out << "*";
        out << "x" << (k + 1);
        if (m.exponents[k] > 1) out << "^" << m.exponents[k];
        any = true;
    }
    return any ? out.str() : "1";
}

FeatureLibrary::FeatureLibrary()
    : FeatureLibrary(1, 0, {FeatureTerm{MonomialTerm{Eigen::VectorXi::Zero(1)}}}, std::nullopt) {}

FeatureLibrary::FeatureLibrary(int state_dim, int max_degree, std::vector<FeatureTerm> terms,
                               std::optional<ForcingSpec> forcing)
    : state_dim_(state_dim), max_degree_(max_degree), terms_(std::move(terms)),
      forcing_(std::move(forcing)) {
    if (terms_.empty()) throw std::invalid_argument("library needs at least one term");
}

Eigen::VectorXd FeatureLibrary::evaluate(const Eigen::VectorXd& x, double t) const {
    check_dim(x, state_dim_, "evaluate");
    Eigen::VectorXd out(size());
    for (int i = 0; i < size(); ++i) out[i] = terms_[i].value(x, t);
    return out;
}

Eigen::MatrixXd FeatureLibrary::jacobian(const Eigen::VectorXd& x, double t) const {
    check_dim(x, state_dim_, "jacobian");
    Eigen::MatrixXd out(size(), state_dim_);
    for (int i = 0; i < size(); ++i)
        for (int k = 0; k < state_dim_; ++k)
            out(i, k) = terms_[i].state_derivative(x, t, k);
    return out;
}

std::vector<std::string> FeatureLibrary::term_names() const {
    std::vector<std::string> names;
    names.reserve(terms_.size());
    for (const auto& term : terms_) names.push_back(term.name());
    return names;
}

int FeatureLibrary::term_index(const std::string& name) const {
    for (int i = 0; i < size(); ++i)
        if (terms_[i].name() == name) return i;
    return -1;
}

FeatureLibrary build_polynomial_library(int state_dim, int max_degree,
                                        std::optional<ForcingSpec> forcing) {
    if (state_dim < 1) throw std::invalid_argument("state_dim must be >= 1");
    if (max_degree < 0) throw std::invalid_argument("max_degree must be >= 0");

    std::vector<Eigen::VectorXi> exponents;
    Eigen::VectorXi current(state_dim);
    for (int d = 0; d <= max_degree; ++d) enumerate_degree(state_dim, d, current, 0, d, exponents);

    std::vector<FeatureTerm> terms;
    terms.reserve(exponents.size() + 1);
    for (auto& e : exponents) terms.push_back(FeatureTerm{MonomialTerm{std::move(e)}});
    if (forcing) {
        terms.push_back(
            FeatureTerm{ForcingTerm{forcing->amplitude, forcing->frequency, forcing->time_scale}});
    }
    return FeatureLibrary(state_dim, max_degree, std::move(terms), forcing);
}

FeatureLibrary with_forcing_frequency(const FeatureLibrary& lib, double omega) {
    if (!lib.forcing()) throw std::invalid_argument("library has no forcing term to retune");
    ForcingSpec spec = *lib.forcing();
    spec.frequency = omega;
    return build_polynomial_library(lib.state_dim(), lib.max_degree(), spec);
}

}  // namespace sindykf
