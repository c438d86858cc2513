#pragma once

#include <map>
#include <string>
#include <vector>

#include "sindykf/scenario.hpp"

namespace sindykf {

// Sectioned key/value text config ([system], [schedules], [library], [stlsq],
// [mask], [filter], [noise], plus [training] and [reference]). '#' and ';'
// start comments; keys keep file order inside a section.
struct ConfigFile {
    std::vector<std::string> section_order;
    std::map<std::string, std::vector<std::pair<std::string, std::string>>> sections;

    bool has(const std::string& section, const std::string& key) const;
    std::string get(const std::string& section, const std::string& key) const;
    std::string get_or(const std::string& section, const std::string& key,
                       const std::string& fallback) const;
    void set(const std::string& section, const std::string& key, const std::string& value);
};

ConfigFile parse_config_text(const std::string& text);
ConfigFile load_config(const std::string& path);
void save_config(const ConfigFile& file, const std::string& path);

Scenario scenario_from_config(const ConfigFile& file);
ConfigFile scenario_to_config(const Scenario& scenario);

// `spec` is either a builtin scenario name or a path to a config file.
Scenario resolve_scenario(const std::string& spec);

}  // namespace sindykf
