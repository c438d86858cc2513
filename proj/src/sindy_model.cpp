#include "sindykf/sindy_model.hpp"

#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "sindykf/csv.hpp"

namespace sindykf {

AdaptivityMask AdaptivityMask::none(int p, int n) {
    AdaptivityMask m;
    m.mask = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>::Constant(p, n, false);
    return m;
}

int AdaptivityMask::active_count() const {
    return static_cast<int>(mask.count());
}

std::vector<std::pair<int, int>> AdaptivityMask::active_entries() const {
    std::vector<std::pair<int, int>> entries;
    entries.reserve(active_count());
    // state-major: all active terms of equation k before equation k+1
    for (int k = 0; k < mask.cols(); ++k)
        for (int i = 0; i < mask.rows(); ++i)
            if (mask(i, k)) entries.emplace_back(i, k);
    return entries;
}

Eigen::VectorXd SindyModel::pack_adaptive() const {
    const auto entries = mask.active_entries();
    Eigen::VectorXd out(entries.size());
    for (size_t j = 0; j < entries.size(); ++j) out[j] = xi(entries[j].first, entries[j].second);
    return out;
}

SindyModel SindyModel::unpack_adaptive(const Eigen::VectorXd& xi_tilde) const {
    const auto entries = mask.active_entries();
    if (xi_tilde.size() != static_cast<Eigen::Index>(entries.size()))
        throw std::invalid_argument("unpack_adaptive: got " + std::to_string(xi_tilde.size()) +
                                    " values for " + std::to_string(entries.size()) +
                                    " masked entries");
    SindyModel out = *this;
    for (size_t j = 0; j < entries.size(); ++j)
        out.xi(entries[j].first, entries[j].second) = xi_tilde[j];
    return out;
}

Eigen::VectorXd SindyModel::eval_f(const Eigen::VectorXd& x, double t) const {
    return xi.transpose() * library.evaluate(x, t);
}

Eigen::MatrixXd SindyModel::augmented_jacobian(const Eigen::VectorXd& x, double t) const {
    const int n = state_dim();
    const auto entries = mask.active_entries();
    const int rho = static_cast<int>(entries.size());
    Eigen::MatrixXd F = Eigen::MatrixXd::Zero(n + rho, n + rho);
    F.topLeftCorner(n, n) = xi.transpose() * library.jacobian(x, t);
    if (rho > 0) {
        const Eigen::VectorXd theta = library.evaluate(x, t);
        for (int j = 0; j < rho; ++j) F(entries[j].second, n + j) = theta[entries[j].first];
    }
    return F;
}

void save_model_csv(const SindyModel& model, const std::string& model_path,
                    const std::string& mask_path) {
    const auto names = model.library.term_names();
    const int n = model.state_dim();

    std::ofstream out(model_path);
    if (!out) throw std::runtime_error("cannot write " + model_path);
    out << "# library state_dim=" << model.library.state_dim()
        << " max_degree=" << model.library.max_degree() << "\n";
    if (model.library.forcing()) {
        const auto& f = *model.library.forcing();
        out << "# forcing amplitude=" << format_double(f.amplitude)
            << " frequency=" << format_double(f.frequency)
            << " time_scale=" << format_double(f.time_scale) << "\n";
    }
    out << "term";
    for (int k = 0; k < n; ++k) out << ",f" << (k + 1);
    out << "\n";
    for (int i = 0; i < model.term_count(); ++i) {
        out << names[i];
        for (int k = 0; k < n; ++k) out << "," << format_double(model.xi(i, k));
        out << "\n";
    }

    std::ofstream mk(mask_path);
    if (!mk) throw std::runtime_error("cannot write " + mask_path);
    mk << "term";
    for (int k = 0; k < n; ++k) mk << ",f" << (k + 1);
    mk << "\n";
    for (int i = 0; i < model.term_count(); ++i) {
        mk << names[i];
        for (int k = 0; k < n; ++k) mk << "," << (model.mask.mask(i, k) ? 1 : 0);
        mk << "\n";
    }
}

namespace {

std::map<std::string, std::string> parse_kv_line(const std::string& line) {
    std::map<std::string, std::string> kv;
    std::istringstream in(line);
    std::string token;
    while (in >> token) {
        const auto eq = token.find('=');
        if (eq != std::string::npos) kv[token.substr(0, eq)] = token.substr(eq + 1);
    }
    return kv;
}

}  // namespace

SindyModel load_model_csv(const std::string& model_path, const std::string& mask_path) {
    std::ifstream in(model_path);
    if (!in) throw std::runtime_error("cannot read " + model_path);

    int state_dim = -1, max_degree = -1;
    std::optional<ForcingSpec> forcing;
    std::string line;
    std::vector<std::vector<std::string>> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            auto kv = parse_kv_line(line.substr(1));
            if (kv.count("state_dim")) state_dim = std::stoi(kv["state_dim"]);
            if (kv.count("max_degree")) max_degree = std::stoi(kv["max_degree"]);
            if (kv.count("amplitude")) {
                ForcingSpec f;
                f.amplitude = std::stod(kv["amplitude"]);
                f.frequency = std::stod(kv["frequency"]);
                f.time_scale = kv.count("time_scale") ? std::stod(kv["time_scale"]) : 1.0;
                forcing = f;
            }
            continue;
        }
        std::vector<std::string> cells;
        std::istringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        rows.push_back(std::move(cells));
    }
    if (state_dim < 1 || max_degree < 0)
        throw std::runtime_error(model_path + ": missing library descriptor comment");
    if (rows.size() < 2) throw std::runtime_error(model_path + ": no coefficient rows");

    FeatureLibrary library = build_polynomial_library(state_dim, max_degree, forcing);
    if (static_cast<int>(rows.size()) - 1 != library.size())
        throw std::runtime_error(model_path + ": expected " + std::to_string(library.size()) +
                                 " term rows, found " + std::to_string(rows.size() - 1));

    const auto names = library.term_names();
    Eigen::MatrixXd xi(library.size(), state_dim);
    for (int i = 0; i < library.size(); ++i) {
        const auto& r = rows[i + 1];
        if (static_cast<int>(r.size()) != state_dim + 1)
            throw std::runtime_error(model_path + ": row " + std::to_string(i + 2) +
                                     " has wrong column count");
        if (r[0] != names[i])
            throw std::runtime_error(model_path + ": term order mismatch at row " +
                                     std::to_string(i + 2) + " (" + r[0] + " vs " + names[i] + ")");
        for (int k = 0; k < state_dim; ++k) xi(i, k) = std::stod(r[k + 1]);
    }

    AdaptivityMask mask = AdaptivityMask::none(library.size(), state_dim);
    std::ifstream mk(mask_path);
    if (!mk) throw std::runtime_error("cannot read " + mask_path);
    std::getline(mk, line);  // header
    int i = 0;
    while (std::getline(mk, line)) {
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::istringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        if (static_cast<int>(cells.size()) != state_dim + 1 || i >= library.size())
            throw std::runtime_error(mask_path + ": malformed mask row");
        for (int k = 0; k < state_dim; ++k) mask.mask(i, k) = (std::stoi(cells[k + 1]) != 0);
        ++i;
    }
    if (i != library.size()) throw std::runtime_error(mask_path + ": wrong number of rows");

    return SindyModel{std::move(library), std::move(xi), std::move(mask)};
}

}  // namespace sindykf
