#include "sindykf/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "sindykf/csv.hpp"
#include "sindykf/families.hpp"

namespace sindykf {

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

std::vector<std::string> split_ws(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream in(s);
    std::string tok;
    while (in >> tok) out.push_back(tok);
    return out;
}

Eigen::VectorXd parse_vector(const std::string& s, const std::string& what) {
    const auto toks = split_ws(s);
    if (toks.empty()) throw std::invalid_argument(what + ": empty vector");
    Eigen::VectorXd v(toks.size());
    for (size_t i = 0; i < toks.size(); ++i) v[i] = std::stod(toks[i]);
    return v;
}

std::string vector_to_string(const Eigen::VectorXd& v) {
    std::string out;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (i) out += " ";
        out += format_double(v[i]);
    }
    return out;
}

// "term@eq" with a 1-based equation index
std::pair<std::string, int> parse_term_at(const std::string& token, const std::string& what) {
    const auto at = token.rfind('@');
    if (at == std::string::npos)
        throw std::invalid_argument(what + ": expected term@equation, got '" + token + "'");
    const int eq = std::stoi(token.substr(at + 1));
    if (eq < 1) throw std::invalid_argument(what + ": equation index must be >= 1");
    return {token.substr(0, at), eq - 1};
}

int require_term(const FeatureLibrary& lib, const std::string& name, const std::string& what) {
    const int i = lib.term_index(name);
    if (i < 0) throw std::invalid_argument(what + ": unknown term '" + name + "'");
    return i;
}

}  // namespace

bool ConfigFile::has(const std::string& section, const std::string& key) const {
    const auto it = sections.find(section);
    if (it == sections.end()) return false;
    for (const auto& kv : it->second)
        if (kv.first == key) return true;
    return false;
}

std::string ConfigFile::get(const std::string& section, const std::string& key) const {
    const auto it = sections.find(section);
    if (it != sections.end())
        for (const auto& kv : it->second)
            if (kv.first == key) return kv.second;
    throw std::invalid_argument("config: missing [" + section + "] " + key);
}

std::string ConfigFile::get_or(const std::string& section, const std::string& key,
                               const std::string& fallback) const {
    return has(section, key) ? get(section, key) : fallback;
}

void ConfigFile::set(const std::string& section, const std::string& key,
                     const std::string& value) {
    if (sections.find(section) == sections.end()) section_order.push_back(section);
    sections[section].emplace_back(key, value);
}

ConfigFile parse_config_text(const std::string& text) {
    ConfigFile file;
    std::istringstream in(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto comment = line.find_first_of("#;");
        if (comment != std::string::npos) line = line.substr(0, comment);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw std::invalid_argument("config line " + std::to_string(lineno) +
                                            ": unterminated section header");
            section = trim(line.substr(1, line.size() - 2));
            if (file.sections.find(section) == file.sections.end())
                file.section_order.push_back(section);
            file.sections[section];
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos || section.empty())
            throw std::invalid_argument("config line " + std::to_string(lineno) +
                                        ": expected key = value inside a section");
        file.sections[section].emplace_back(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    return file;
}

ConfigFile load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read config file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str());
}

void save_config(const ConfigFile& file, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write config file '" + path + "'");
    for (const auto& section : file.section_order) {
        out << "[" << section << "]\n";
        for (const auto& kv : file.sections.at(section)) out << kv.first << " = " << kv.second << "\n";
        out << "\n";
    }
    if (!out) throw std::runtime_error("write failed for " + path);
}

Scenario scenario_from_config(const ConfigFile& file) {
    Scenario s;
    s.family = file.get("system", "family");
    const Family& family = family_info(s.family);
    s.name = file.get_or("system", "name", s.family);
    s.x0 = parse_vector(file.get("system", "x0"), "[system] x0");
    if (s.x0.size() != family.state_dim)
        throw std::invalid_argument("[system] x0: expected " + std::to_string(family.state_dim) +
                                    " entries");
    s.t0 = std::stod(file.get_or("system", "t0", "0"));
    s.t_end = std::stod(file.get("system", "t_end"));
    s.dt = std::stod(file.get("system", "dt"));
    s.seed = std::stoull(file.get_or("system", "seed", "1"));

    s.library_degree = std::stoi(file.get("library", "degree"));
    const std::string forcing_text = file.get_or("library", "forcing", "none");
    if (forcing_text != "none") {
        ForcingSpec spec;
        for (const auto& tok : split_ws(forcing_text)) {
            const auto eq = tok.find('=');
            if (eq == std::string::npos)
                throw std::invalid_argument("[library] forcing: bad token '" + tok + "'");
            const std::string key = tok.substr(0, eq);
            const double value = std::stod(tok.substr(eq + 1));
            if (key == "amplitude") spec.amplitude = value;
            else if (key == "frequency") spec.frequency = value;
            else if (key == "time_scale") spec.time_scale = value;
            else throw std::invalid_argument("[library] forcing: unknown key '" + key + "'");
        }
        s.forcing = spec;
    }
    if (family.has_forcing && !s.forcing)
        throw std::invalid_argument("family " + s.family + " needs a [library] forcing spec");

    // online truth
    s.truth.library = build_polynomial_library(family.state_dim, family.truth_degree,
                                               family.has_forcing ? s.forcing : std::nullopt);
    const auto sched_it = file.sections.find("schedules");
    if (sched_it == file.sections.end())
        throw std::invalid_argument("config: missing [schedules] section");
    for (const auto& [pname, text] : sched_it->second) {
        const auto& par = family.parameter(pname);
        s.truth.coefficients.push_back(
            ScheduledCoefficient{require_term(s.truth.library, par.term, "[schedules]"), par.state,
                                 scaled_schedule(ParameterSchedule::parse(text), par.sign)});
    }

    s.stlsq.ridge_strength = std::stod(file.get_or("stlsq", "ridge", "0.05"));
    s.stlsq.threshold = std::stod(file.get("stlsq", "threshold"));
    s.stlsq.max_iterations = std::stoi(file.get_or("stlsq", "max_iterations", "20"));

    const FeatureLibrary model_lib = s.model_library();
    s.mask = AdaptivityMask::none(model_lib.size(), family.state_dim);
    for (const auto& tok : split_ws(file.get("mask", "adaptive"))) {
        const auto [term, eq] = parse_term_at(tok, "[mask] adaptive");
        if (eq >= family.state_dim) throw std::invalid_argument("[mask] equation out of range");
        s.mask.mask(require_term(model_lib, term, "[mask]"), eq) = true;
    }

    s.filter.q_diag = parse_vector(file.get("filter", "q_diag"), "[filter] q_diag");
    s.filter.r_diag = parse_vector(file.get("filter", "r_diag"), "[filter] r_diag");
    s.filter.p0_diag = parse_vector(file.get("filter", "p0_diag"), "[filter] p0_diag");
    for (const auto& tok : split_ws(file.get("filter", "observed"))) {
        const int idx = std::stoi(tok);
        if (idx < 1) throw std::invalid_argument("[filter] observed uses 1-based state indices");
        s.filter.observed_indices.push_back(idx - 1);
    }
    s.filter.dt = s.dt;
    s.filter.validate(family.state_dim, s.mask.active_count());

    const auto canonical_order = [](TrueSystem& sys) {
        std::sort(sys.coefficients.begin(), sys.coefficients.end(),
                  [](const ScheduledCoefficient& a, const ScheduledCoefficient& b) {
                      return std::tie(a.state, a.term) < std::tie(b.state, b.term);
                  });
    };
    canonical_order(s.truth);

    const std::string snr = file.get_or("noise", "snr_db", "none");
    if (snr != "none") s.snr_db = std::stod(snr);
    s.snr_is_linear = file.get_or("noise", "snr_is_linear", "false") == "true";

    // training
    s.training.system.library = s.truth.library;
    const auto train_it = file.sections.find("training");
    if (train_it == file.sections.end())
        throw std::invalid_argument("config: missing [training] section");
    for (const auto& [key, value] : train_it->second) {
        if (key.rfind("param.", 0) == 0) {
            const auto& par = family.parameter(key.substr(6));
            s.training.system.coefficients.push_back(ScheduledCoefficient{
                require_term(s.training.system.library, par.term, "[training]"), par.state,
                ParameterSchedule::constant(par.sign * std::stod(value))});
        } else if (key == "x0") {
            std::istringstream groups(value);
            std::string group;
            while (std::getline(groups, group, ';')) {
                group = trim(group);
                if (!group.empty())
                    s.training.initial_states.push_back(parse_vector(group, "[training] x0"));
            }
        } else if (key == "t_end") {
            s.training.t_end = std::stod(value);
        } else if (key == "dt") {
            s.training.dt = std::stod(value);
        } else if (key == "omegas") {
            for (const auto& tok : split_ws(value))
                s.training.forcing_frequencies.push_back(std::stod(tok));
        } else {
            throw std::invalid_argument("[training]: unknown key '" + key + "'");
        }
    }
    canonical_order(s.training.system);

    if (const auto ref_it = file.sections.find("reference"); ref_it != file.sections.end()) {
        for (const auto& [rname, value] : ref_it->second) {
            const auto toks = split_ws(value);
            if (toks.size() != 3)
                throw std::invalid_argument("[reference] " + rname +
                                            ": expected 'term@eq sign value'");
            const auto [term, eq] = parse_term_at(toks[0], "[reference]");
            s.reference.push_back(ReferenceEntry{rname, require_term(model_lib, term, "[reference]"),
                                                 eq, std::stod(toks[1]), std::stod(toks[2])});
        }
    }

    if (const auto init_it = file.sections.find("model_init"); init_it != file.sections.end()) {
        for (const auto& [key, value] : init_it->second) {
            const auto toks = split_ws(value);
            if (toks.size() != 2)
                throw std::invalid_argument("[model_init]: expected 'term@eq value'");
            const auto [term, eq] = parse_term_at(toks[0], "[model_init]");
            CoefficientOverride o;
            o.term = require_term(model_lib, term, "[model_init]");
            o.state = eq;
            if (key == "set") {
                o.value = std::stod(toks[1]);
            } else if (key == "scale") {
                o.factor = std::stod(toks[1]);
                o.scale = true;
            } else {
                throw std::invalid_argument("[model_init]: unknown key '" + key + "'");
            }
            s.initial_model_overrides.push_back(o);
        }
    }
    return s;
}

ConfigFile scenario_to_config(const Scenario& s) {
    const Family& family = family_info(s.family);
    const FeatureLibrary model_lib = s.model_library();
    const auto model_names = model_lib.term_names();
    const auto truth_names = s.truth.library.term_names();

    ConfigFile file;
    file.set("system", "family", s.family);
    file.set("system", "name", s.name);
    file.set("system", "x0", vector_to_string(s.x0));
    file.set("system", "t0", format_double(s.t0));
    file.set("system", "t_end", format_double(s.t_end));
    file.set("system", "dt", format_double(s.dt));
    file.set("system", "seed", std::to_string(s.seed));

    const auto find_named = [&](const TrueSystem& sys, const FamilyParameter& par)
        -> const ScheduledCoefficient* {
        for (const auto& c : sys.coefficients)
            if (c.state == par.state && truth_names[c.term] == par.term) return &c;
        return nullptr;
    };
    for (const auto& par : family.parameters) {
        if (const auto* c = find_named(s.truth, par))
            file.set("schedules", par.name, scaled_schedule(c->schedule, par.sign).to_string());
    }

    file.set("library", "degree", std::to_string(s.library_degree));
    if (s.forcing) {
        file.set("library", "forcing",
                 "amplitude=" + format_double(s.forcing->amplitude) +
                     " frequency=" + format_double(s.forcing->frequency) +
                     " time_scale=" + format_double(s.forcing->time_scale));
    } else {
        file.set("library", "forcing", "none");
    }

    file.set("stlsq", "ridge", format_double(s.stlsq.ridge_strength));
    file.set("stlsq", "threshold", format_double(s.stlsq.threshold));
    file.set("stlsq", "max_iterations", std::to_string(s.stlsq.max_iterations));

    std::string adaptive;
    for (const auto& [term, state] : s.mask.active_entries()) {
        if (!adaptive.empty()) adaptive += " ";
        adaptive += model_names[term] + "@" + std::to_string(state + 1);
    }
    file.set("mask", "adaptive", adaptive);

    file.set("filter", "q_diag", vector_to_string(s.filter.q_diag));
    file.set("filter", "r_diag", vector_to_string(s.filter.r_diag));
    file.set("filter", "p0_diag", vector_to_string(s.filter.p0_diag));
    std::string observed;
    for (int idx : s.filter.observed_indices) {
        if (!observed.empty()) observed += " ";
        observed += std::to_string(idx + 1);
    }
    file.set("filter", "observed", observed);

    file.set("noise", "snr_db", s.snr_db ? format_double(*s.snr_db) : "none");
    file.set("noise", "snr_is_linear", s.snr_is_linear ? "true" : "false");

    std::string x0s;
    for (const auto& x0 : s.training.initial_states) {
        if (!x0s.empty()) x0s += "; ";
        x0s += vector_to_string(x0);
    }
    file.set("training", "x0", x0s);
    file.set("training", "t_end", format_double(s.training.t_end));
    file.set("training", "dt", format_double(s.training.dt));
    if (!s.training.forcing_frequencies.empty()) {
        std::string omegas;
        for (double w : s.training.forcing_frequencies) {
            if (!omegas.empty()) omegas += " ";
            omegas += format_double(w);
        }
        file.set("training", "omegas", omegas);
    }
    for (const auto& par : family.parameters) {
        if (const auto* c = find_named(s.training.system, par)) {
            if (c->schedule.kind != ParameterSchedule::Kind::Constant)
                throw std::invalid_argument("training system schedules must be constant");
            file.set("training", "param." + par.name, format_double(par.sign * c->schedule.v0));
        }
    }

    for (const auto& r : s.reference) {
        file.set("reference", r.name,
                 model_names[r.term] + "@" + std::to_string(r.state + 1) + " " +
                     format_double(r.sign) + " " + format_double(r.value));
    }

    for (const auto& o : s.initial_model_overrides) {
        const std::string loc = model_names[o.term] + "@" + std::to_string(o.state + 1);
        if (o.scale)
            file.set("model_init", "scale", loc + " " + format_double(o.factor));
        else
            file.set("model_init", "set", loc + " " + format_double(o.value));
    }
    return file;
}

Scenario resolve_scenario(const std::string& spec) {
    const auto names = builtin_scenario_names();
    if (std::find(names.begin(), names.end(), spec) != names.end()) return builtin_scenario(spec);
    return scenario_from_config(load_config(spec));
}

}  // namespace sindykf
