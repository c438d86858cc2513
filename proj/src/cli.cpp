#include "sindykf/cli.hpp"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "sindykf/config.hpp"
#include "sindykf/csv.hpp"
#include "sindykf/frc.hpp"
#include "sindykf/scenario.hpp"

namespace fs = std::filesystem;

namespace sindykf {

namespace {

std::string mask_path_for(const std::string& model_path) {
    fs::path p(model_path);
    fs::path q = p.parent_path() / (p.stem().string() + "_mask" + p.extension().string());
    return q.string();
}

class ManifestWriter {
  public:
    ManifestWriter(std::string command, std::string scenario, std::string output_dir,
                   std::uint64_t seed)
        : command_(std::move(command)), scenario_(std::move(scenario)),
          output_dir_(std::move(output_dir)), seed_(seed) {}

    void add(const std::string& path) { files_.push_back(path); }

    void write() const {
        nlohmann::json j;
        j["command"] = command_;
        j["scenario"] = scenario_;
        j["output_dir"] = output_dir_;
        j["seed"] = seed_;
        j["files"] = nlohmann::json::array();
        for (const auto& f : files_)
            j["files"].push_back({{"path", fs::path(f).filename().string()},
                                  {"checksum", file_checksum(f)}});
        std::ofstream out(fs::path(output_dir_) / "manifest.json");
        if (!out) throw std::runtime_error("cannot write manifest in " + output_dir_);
        out << j.dump(2) << "\n";
    }

  private:
    std::string command_, scenario_, output_dir_;
    std::uint64_t seed_;
    std::vector<std::string> files_;
};

std::string named_or_raw(const Scenario& scenario, int term, int state,
                         const std::vector<std::string>& term_names, double* sign_out) {
    for (const auto& r : scenario.reference) {
        if (r.term == term && r.state == state) {
            if (sign_out) *sign_out = r.sign;
            return r.name;
        }
    }
    if (sign_out) *sign_out = 1.0;
    return term_names[term] + "@" + std::to_string(state + 1);
}

void write_report(const Scenario& scenario, const SindyModel& model, const std::string& path) {
    const auto names = model.library.term_names();
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);

    out << "scenario: " << scenario.name << "\n";
    out << "library: degree " << scenario.library_degree
        << (scenario.forcing ? " plus cosine forcing" : "") << ", p = " << model.term_count()
        << "\n";
    out << "stlsq: ridge " << format_double(scenario.stlsq.ridge_strength) << ", threshold "
        << format_double(scenario.stlsq.threshold) << "\n\n";

    std::vector<std::pair<int, int>> covered;
    if (!scenario.reference.empty()) {
        out << "coefficient      term        eq   reference        fitted           rel.err\n";
        for (const auto& r : scenario.reference) {
            covered.emplace_back(r.term, r.state);
            const double fitted = r.sign * model.xi(r.term, r.state);
            std::ostringstream rel;
            if (r.value != 0.0)
                rel << format_double(std::abs(fitted - r.value) / std::abs(r.value));
            else
                rel << (fitted == 0.0 ? "0" : "-");
            out << r.name << std::string(std::max<int>(1, 17 - static_cast<int>(r.name.size())), ' ')
                << names[r.term]
                << std::string(std::max<int>(1, 12 - static_cast<int>(names[r.term].size())), ' ')
                << "f" << (r.state + 1) << "   " << format_double(r.value) << "  "
                << format_double(fitted) << "  " << rel.str() << "\n";
        }
    }
    out << "\nother nonzero coefficients:\n";
    bool any = false;
    for (int i = 0; i < model.term_count(); ++i) {
        for (int k = 0; k < model.state_dim(); ++k) {
            if (model.xi(i, k) == 0.0) continue;
            if (std::find(covered.begin(), covered.end(), std::make_pair(i, k)) != covered.end())
                continue;
            out << "  " << names[i] << "@f" << (k + 1) << " = " << format_double(model.xi(i, k))
                << "\n";
            any = true;
        }
    }
    if (!any) out << "  none\n";
}

SnapshotSet load_snapshots_csv(const std::string& path, int n) {
    const CsvTable table = read_csv(path);
    const int cols = static_cast<int>(table.header.size());
    if (cols != 1 + n && cols != 1 + 2 * n)
        throw std::runtime_error(path + ": expected 1+" + std::to_string(n) + " or 1+" +
                                 std::to_string(2 * n) + " columns (t, states[, derivatives]), found " +
                                 std::to_string(cols));
    const auto T = static_cast<Eigen::Index>(table.rows.size());
    if (T < 3) throw std::runtime_error(path + ": need at least 3 rows");
    SnapshotSet data;
    data.times.resize(T);
    data.states.resize(T, n);
    for (Eigen::Index j = 0; j < T; ++j) {
        data.times[j] = table.rows[j][0];
        for (int k = 0; k < n; ++k) data.states(j, k) = table.rows[j][1 + k];
    }
    if (cols == 1 + 2 * n) {
        data.derivatives.resize(T, n);
        for (Eigen::Index j = 0; j < T; ++j)
            for (int k = 0; k < n; ++k) data.derivatives(j, k) = table.rows[j][1 + n + k];
    } else {
        data.derivatives = differentiate_snapshots(data.times, data.states);
    }
    return data;
}

std::vector<Observation> load_observations_csv(const std::string& path, int o) {
    const CsvTable table = read_csv(path);
    if (static_cast<int>(table.header.size()) != 1 + o)
        throw std::runtime_error(path + ": expected " + std::to_string(1 + o) +
                                 " columns (t plus " + std::to_string(o) +
                                 " observed channels), found " +
                                 std::to_string(table.header.size()));
    std::vector<Observation> obs;
    obs.reserve(table.rows.size());
    for (const auto& row : table.rows) {
        Observation ob;
        ob.time = row[0];
        ob.y.resize(o);
        for (int i = 0; i < o; ++i) ob.y[i] = row[1 + i];
        obs.push_back(std::move(ob));
    }
    return obs;
}

void write_run_csv(const SindyModel& model, const FilterRun& run, const std::string& path) {
    const auto names = model.library.term_names();
    const auto entries = model.mask.active_entries();
    const int n = model.state_dim();

    CsvTable table;
    table.header.push_back("t");
    for (int k = 0; k < n; ++k) table.header.push_back("x" + std::to_string(k + 1) + "_hat");
    for (const auto& [term, state] : entries)
        table.header.push_back("xi_" + names[term] + "@" + std::to_string(state + 1));
    for (int k = 0; k < n; ++k) table.header.push_back("var_x" + std::to_string(k + 1));
    for (const auto& [term, state] : entries)
        table.header.push_back("var_xi_" + names[term] + "@" + std::to_string(state + 1));
    table.header.push_back("innovation_norm");

    for (const auto& step : run.steps) {
        std::vector<double> row;
        row.reserve(table.header.size());
        row.push_back(step.time);
        for (Eigen::Index i = 0; i < step.mean.size(); ++i) row.push_back(step.mean[i]);
        for (Eigen::Index i = 0; i < step.cov_diag.size(); ++i) row.push_back(step.cov_diag[i]);
        row.push_back(step.innovation.norm());
        table.rows.push_back(std::move(row));
    }
    write_csv(path, table);
}

void write_params_csv(const Scenario& scenario, const SindyModel& model, const FilterRun& run,
                      const std::string& path) {
    const auto names = model.library.term_names();
    const auto entries = model.mask.active_entries();
    const int n = model.state_dim();

    CsvTable table;
    table.comments.push_back("95% confidence half-widths are 1.96*sqrt(posterior variance)");
    table.header.push_back("t");
    std::vector<double> signs;
    for (const auto& [term, state] : entries) {
        double sign = 1.0;
        const std::string name = named_or_raw(scenario, term, state, names, &sign);
        signs.push_back(sign);
        table.header.push_back(name);
        table.header.push_back(name + "_ci95");
    }
    for (const auto& step : run.steps) {
        std::vector<double> row;
        row.push_back(step.time);
        for (size_t j = 0; j < entries.size(); ++j) {
            row.push_back(signs[j] * step.mean[n + j]);
            row.push_back(1.96 * std::sqrt(std::max(0.0, step.cov_diag[n + j])));
        }
        table.rows.push_back(std::move(row));
    }
    write_csv(path, table);
}

struct AssimilateProducts {
    std::vector<std::string> files;
};

AssimilateProducts run_assimilation_once(const Scenario& scenario, const SindyModel& model,
                                         const std::vector<Observation>& observations,
                                         const fs::path& dir, int snapshot_every) {
    AssimilateProducts out;
    const FilterRun run = assimilate(model, scenario.filter, observations, scenario.x0);

    const auto run_path = (dir / "run.csv").string();
    write_run_csv(model, run, run_path);
    out.files.push_back(run_path);

    const auto params_path = (dir / "params.csv").string();
    write_params_csv(scenario, model, run, params_path);
    out.files.push_back(params_path);

    const auto final_path = (dir / "final_model.csv").string();
    save_model_csv(run.final_model, final_path, mask_path_for(final_path));
    out.files.push_back(final_path);
    out.files.push_back(mask_path_for(final_path));

    if (snapshot_every > 0) {
        const int rho = model.adaptive_count();
        for (size_t j = snapshot_every - 1; j < run.steps.size();
             j += static_cast<size_t>(snapshot_every)) {
            const SindyModel snap = model.unpack_adaptive(run.steps[j].mean.tail(rho));
            std::ostringstream name;
            name << "model_snapshot_" << std::setw(8) << std::setfill('0') << (j + 1) << ".csv";
            const auto snap_path = (dir / name.str()).string();
            save_model_csv(snap, snap_path, mask_path_for(snap_path));
            out.files.push_back(snap_path);
            out.files.push_back(mask_path_for(snap_path));
        }
    }
    return out;
}

void write_truth_csv(const SnapshotSet& truth, const std::string& path) {
    CsvTable table;
    const int n = static_cast<int>(truth.states.cols());
    table.header.push_back("t");
    for (int k = 0; k < n; ++k) table.header.push_back("x" + std::to_string(k + 1));
    for (int k = 0; k < n; ++k) table.header.push_back("xdot" + std::to_string(k + 1));
    for (Eigen::Index j = 0; j < truth.times.size(); ++j) {
        std::vector<double> row;
        row.push_back(truth.times[j]);
        for (int k = 0; k < n; ++k) row.push_back(truth.states(j, k));
        for (int k = 0; k < n; ++k) row.push_back(truth.derivatives(j, k));
        table.rows.push_back(std::move(row));
    }
    write_csv(path, table);
}

void write_observations_csv(const std::vector<Observation>& observations,
                            const std::vector<int>& observed_indices, const std::string& path) {
    CsvTable table;
    table.header.push_back("t");
    for (int idx : observed_indices) table.header.push_back("y" + std::to_string(idx + 1));
    for (const auto& ob : observations) {
        std::vector<double> row;
        row.push_back(ob.time);
        for (Eigen::Index i = 0; i < ob.y.size(); ++i) row.push_back(ob.y[i]);
        table.rows.push_back(std::move(row));
    }
    write_csv(path, table);
}

void write_frc_csv(const std::vector<FrcPoint>& points, const std::string& path) {
    CsvTable table;
    table.header = {"omega", "u1", "u2"};
    for (const auto& p : points) table.rows.push_back({p.omega, p.u1, p.u2});
    write_csv(path, table);
}

}  // namespace

std::string default_output_root() {
    if (const char* env = std::getenv("SINDYKF_OUT")) return env;
    return ".";
}

int cmd_train(const TrainOptions& options) {
    try {
        Scenario scenario = resolve_scenario(options.scenario);
        if (options.seed) scenario.seed = *options.seed;
        fs::create_directories(options.output_dir);

        SindyModel model = [&] {
            if (!options.data_path) return train_scenario(scenario);
            const FeatureLibrary lib = scenario.model_library();
            const SnapshotSet data = load_snapshots_csv(*options.data_path, lib.state_dim());
            const Eigen::MatrixXd theta = assemble_regression(lib, data);
            Eigen::MatrixXd xi = stlsq(theta, data.derivatives, scenario.stlsq);
            SindyModel m{lib, std::move(xi), scenario.mask};
            for (const auto& o : scenario.initial_model_overrides) {
                if (o.scale)
                    m.xi(o.term, o.state) *= o.factor;
                else
                    m.xi(o.term, o.state) = o.value;
            }
            return m;
        }();

        ManifestWriter manifest("train", scenario.name, options.output_dir, scenario.seed);
        const auto model_path = (fs::path(options.output_dir) / "model.csv").string();
        save_model_csv(model, model_path, mask_path_for(model_path));
        manifest.add(model_path);
        manifest.add(mask_path_for(model_path));

        const auto report_path = (fs::path(options.output_dir) / "report.txt").string();
        write_report(scenario, model, report_path);
        manifest.add(report_path);
        manifest.write();

        std::cout << "trained model written to " << model_path << "\n";
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "train: error: " << e.what() << "\n";
        return 1;
    }
}

int cmd_assimilate(const AssimilateOptions& options) {
    try {
        Scenario scenario = resolve_scenario(options.scenario);
        if (options.seed) scenario.seed = *options.seed;
        fs::create_directories(options.output_dir);

        const SindyModel model = load_model_csv(options.model_path, mask_path_for(options.model_path));
        if (model.state_dim() != scenario.truth.library.state_dim())
            throw std::runtime_error("model state dimension does not match the scenario");

        const SnapshotSet truth = simulate_truth(scenario);

        ManifestWriter manifest("assimilate", scenario.name, options.output_dir, scenario.seed);

        const auto truth_path = (fs::path(options.output_dir) / "truth.csv").string();
        write_truth_csv(truth, truth_path);
        manifest.add(truth_path);

        if (options.extra_seeds <= 0) {
            const auto observations =
                options.observations_path
                    ? load_observations_csv(*options.observations_path,
                                            scenario.filter.observed_count())
                    : scenario_observations(scenario, truth);
            const auto obs_path = (fs::path(options.output_dir) / "observations.csv").string();
            write_observations_csv(observations, scenario.filter.observed_indices, obs_path);
            manifest.add(obs_path);
            const auto products = run_assimilation_once(scenario, model, observations,
                                                        options.output_dir, options.snapshot_every);
            for (const auto& f : products.files) manifest.add(f);
        } else {
            if (options.observations_path)
                throw std::runtime_error("--seeds cannot be combined with --observations");
            const int runs = options.extra_seeds + 1;
            std::vector<AssimilateProducts> products(runs);
            std::vector<std::string> errors(runs);
            std::vector<fs::path> dirs(runs);
            for (int r = 0; r < runs; ++r) {
                dirs[r] = fs::path(options.output_dir) /
                          ("seed_" + std::to_string(scenario.seed + r));
                fs::create_directories(dirs[r]);
            }
            const int jobs = std::max(1, options.jobs);
            std::vector<std::thread> pool;
            std::atomic<int> next{0};
            for (int w = 0; w < jobs; ++w) {
                pool.emplace_back([&] {
                    for (int r = next.fetch_add(1); r < runs; r = next.fetch_add(1)) {
                        try {
                            Scenario local = scenario;
                            local.seed = scenario.seed + r;
                            const auto obs = scenario_observations(local, truth);
                            write_observations_csv(obs, local.filter.observed_indices,
                                                   (dirs[r] / "observations.csv").string());
                            products[r].files.push_back((dirs[r] / "observations.csv").string());
                            auto rest = run_assimilation_once(local, model, obs, dirs[r],
                                                              options.snapshot_every);
                            for (auto& f : rest.files) products[r].files.push_back(std::move(f));
                        } catch (const std::exception& e) {
                            errors[r] = e.what();
                        }
                    }
                });
            }
            for (auto& th : pool) th.join();
            for (int r = 0; r < runs; ++r) {
                if (!errors[r].empty())
                    throw std::runtime_error("seed " + std::to_string(scenario.seed + r) + ": " +
                                             errors[r]);
                for (const auto& f : products[r].files) manifest.add(f);
            }
        }
        manifest.write();
        std::cout << "assimilation products written to " << options.output_dir << "\n";
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "assimilate: error: " << e.what() << "\n";
        return 1;
    }
}

int cmd_frc(const FrcOptions& options) {
    try {
        fs::create_directories(options.output_dir);
        const std::vector<double> grid =
            frc_grid(options.omega_min, options.omega_max, options.n_points);

        FrcSettings settings;
        settings.window = options.window;
        settings.dt = options.dt;
        settings.settle_fraction = options.settle_fraction;

        std::vector<std::pair<std::string, std::string>> model_files;  // (label, path)
        model_files.emplace_back("", options.model_path);
        if (options.snapshots_dir) {
            std::vector<fs::path> snaps;
            for (const auto& entry : fs::directory_iterator(*options.snapshots_dir)) {
                const auto name = entry.path().filename().string();
                if (name.rfind("model_snapshot_", 0) == 0 && name.find("_mask") == std::string::npos &&
                    entry.path().extension() == ".csv")
                    snaps.push_back(entry.path());
            }
            std::sort(snaps.begin(), snaps.end());
            for (const auto& p : snaps) {
                std::string stem = p.stem().string();  // model_snapshot_XXXXXXXX
                model_files.emplace_back(stem.substr(std::string("model_").size()), p.string());
            }
        }

        const bool up = options.direction == "up" || options.direction == "both";
        const bool down = options.direction == "down" || options.direction == "both";
        if (!up && !down)
            throw std::runtime_error("direction must be up, down or both, got '" +
                                     options.direction + "'");

        ManifestWriter manifest("frc", options.model_path, options.output_dir, 0);

        struct Job {
            std::string out_path;
            std::string model_path;
            SweepDirection direction;
        };
        std::vector<Job> jobs_list;
        for (const auto& [label, path] : model_files) {
            const std::string prefix = label.empty() ? "frc" : "frc_" + label;
            if (up)
                jobs_list.push_back(Job{(fs::path(options.output_dir) / (prefix + "_up.csv")).string(),
                                        path, SweepDirection::Increasing});
            if (down)
                jobs_list.push_back(
                    Job{(fs::path(options.output_dir) / (prefix + "_down.csv")).string(), path,
                        SweepDirection::Decreasing});
        }

        std::vector<std::string> errors(jobs_list.size());
        const int workers = std::max(1, options.jobs);
        std::atomic<size_t> next{0};
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (size_t j = next.fetch_add(1); j < jobs_list.size(); j = next.fetch_add(1)) {
                    try {
                        const SindyModel model = load_model_csv(jobs_list[j].model_path,
                                                                mask_path_for(jobs_list[j].model_path));
                        const auto points =
                            frc_sweep(model, grid, jobs_list[j].direction, settings);
                        write_frc_csv(points, jobs_list[j].out_path);
                    } catch (const std::exception& e) {
                        errors[j] = e.what();
                    }
                }
            });
        }
        for (auto& th : pool) th.join();
        for (size_t j = 0; j < jobs_list.size(); ++j) {
            if (!errors[j].empty()) throw std::runtime_error(errors[j]);
            manifest.add(jobs_list[j].out_path);
        }
        manifest.write();
        std::cout << "frc curves written to " << options.output_dir << "\n";
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "frc: error: " << e.what() << "\n";
        return 1;
    }
}

int cmd_export(const std::string& scenario, const std::string& path) {
    try {
        const Scenario s = resolve_scenario(scenario);
        save_config(scenario_to_config(s), path);
        std::cout << "scenario config written to " << path << "\n";
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "export: error: " << e.what() << "\n";
        return 1;
    }
}

int cmd_verify(const std::string& output_dir) {
    try {
        std::ifstream in(fs::path(output_dir) / "manifest.json");
        if (!in) throw std::runtime_error("no manifest.json in " + output_dir);
        nlohmann::json j;
        in >> j;
        int drifted = 0;
        for (const auto& f : j.at("files")) {
            const auto path = fs::path(output_dir) / f.at("path").get<std::string>();
            const std::string want = f.at("checksum").get<std::string>();
            std::string got;
            try {
                got = file_checksum(path.string());
            } catch (const std::exception&) {
                got = "<missing>";
            }
            if (got != want) {
                std::cout << "DRIFT " << path.string() << " expected " << want << " got " << got
                          << "\n";
                ++drifted;
            }
        }
        if (drifted == 0) {
            std::cout << "manifest verified: " << j.at("files").size() << " files unchanged\n";
            return 0;
        }
        std::cout << drifted << " file(s) drifted\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "verify: error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace sindykf
