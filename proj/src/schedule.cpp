#include "sindykf/schedule.hpp"

#include <cmath>
#include <map>
#include <sstream>
#include <stdexcept>

#include "sindykf/csv.hpp"

namespace sindykf {

double ParameterSchedule::value(double t) const {
    switch (kind) {
        case Kind::Constant:
            return v0;
        case Kind::Step:
            return t >= t_switch ? v1 : v0;
        case Kind::LinearRamp:
            if (t <= t0) return v0;
            if (t >= t1) return v1;
            return v0 + (v1 - v0) * (t - t0) / (t1 - t0);
        case Kind::Sinusoid:
            return center + amplitude * std::sin(2.0 * M_PI * (t - phase) / period);
    }
    return v0;
}

ParameterSchedule ParameterSchedule::constant(double v) {
    ParameterSchedule s;
    s.kind = Kind::Constant;
    s.v0 = v;
    return s;
}

ParameterSchedule ParameterSchedule::step(double v0, double v1, double t_switch) {
    ParameterSchedule s;
    s.kind = Kind::Step;
    s.v0 = v0;
    s.v1 = v1;
    s.t_switch = t_switch;
    return s;
}

ParameterSchedule ParameterSchedule::ramp(double v0, double v1, double t0, double t1) {
    if (!(t1 > t0)) throw std::invalid_argument("schedule ramp: t1 must exceed t0");
    ParameterSchedule s;
    s.kind = Kind::LinearRamp;
    s.v0 = v0;
    s.v1 = v1;
    s.t0 = t0;
    s.t1 = t1;
    return s;
}

ParameterSchedule ParameterSchedule::sinusoid(double center, double amplitude, double period,
                                              double phase) {
    if (!(period > 0)) throw std::invalid_argument("schedule sinusoid: period must be positive");
    ParameterSchedule s;
    s.kind = Kind::Sinusoid;
    s.center = center;
    s.amplitude = amplitude;
    s.period = period;
    s.phase = phase;
    return s;
}

std::string ParameterSchedule::to_string() const {
    std::ostringstream out;
    switch (kind) {
        case Kind::Constant:
            out << "constant v=" << format_double(v0);
            break;
        case Kind::Step:
            out << "step v0=" << format_double(v0) << " v1=" << format_double(v1)
                << " t=" << format_double(t_switch);
            break;
        case Kind::LinearRamp:
            out << "ramp v0=" << format_double(v0) << " v1=" << format_double(v1)
                << " t0=" << format_double(t0) << " t1=" << format_double(t1);
            break;
        case Kind::Sinusoid:
            out << "sinusoid center=" << format_double(center)
                << " amplitude=" << format_double(amplitude) << " period=" << format_double(period)
                << " phase=" << format_double(phase);
            break;
    }
    return out.str();
}

ParameterSchedule ParameterSchedule::parse(const std::string& text) {
    std::istringstream in(text);
    std::string head, token;
    in >> head;
    std::map<std::string, double> kv;
    while (in >> token) {
        const auto eq = token.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("schedule: bad token '" + token + "' in '" + text + "'");
        kv[token.substr(0, eq)] = std::stod(token.substr(eq + 1));
    }
    const auto need = [&](const char* key) {
        const auto it = kv.find(key);
        if (it == kv.end())
            throw std::invalid_argument("schedule: missing '" + std::string(key) + "' in '" + text +
                                        "'");
        return it->second;
    };
    if (head == "constant") return constant(need("v"));
    if (head == "step") return step(need("v0"), need("v1"), need("t"));
    if (head == "ramp") return ramp(need("v0"), need("v1"), need("t0"), need("t1"));
    if (head == "sinusoid")
        return sinusoid(need("center"), need("amplitude"), need("period"),
                        kv.count("phase") ? kv["phase"] : 0.0);
    throw std::invalid_argument("schedule: unknown kind '" + head + "'");
}

}  // namespace sindykf
