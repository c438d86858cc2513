#pragma once

#include <string>
#include <vector>

#include "sindykf/schedule.hpp"

namespace sindykf {

// Named parameters of a case-study family. A parameter maps onto one model
// coefficient: coefficient(t) = sign * parameter(t). The sign absorbs the
// convention of writing e.g. restoring forces as -k1*u1.
struct FamilyParameter {
    std::string name;
    std::string term;  // library term name
    int state = 0;     // equation index, 0-based
    double sign = 1.0;
};

struct Family {
    std::string name;
    int state_dim = 0;
    int truth_degree = 0;
    bool has_forcing = false;
    std::vector<FamilyParameter> parameters;

    const FamilyParameter& parameter(const std::string& name) const;
};

const Family& family_info(const std::string& name);

ParameterSchedule scaled_schedule(const ParameterSchedule& schedule, double factor);

}  // namespace sindykf
