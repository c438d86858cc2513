#pragma once

#include <string>

namespace sindykf {

// Time evolution law for one true-system parameter.
struct ParameterSchedule {
    enum class Kind { Constant, Step, LinearRamp, Sinusoid };

    Kind kind = Kind::Constant;
    // Constant: v0. Step: v0 -> v1 at t_switch (value v1 for t >= t_switch).
    // LinearRamp: v0 at t0 to v1 at t1, clamped outside [t0, t1].
    // Sinusoid: center + amplitude * sin(2*pi*(t - phase)/period).
    double v0 = 0.0, v1 = 0.0;
    double t0 = 0.0, t1 = 0.0;
    double t_switch = 0.0;
    double center = 0.0, amplitude = 0.0, period = 1.0, phase = 0.0;

    double value(double t) const;

    static ParameterSchedule constant(double v);
    static ParameterSchedule step(double v0, double v1, double t_switch);
    static ParameterSchedule ramp(double v0, double v1, double t0, double t1);
    static ParameterSchedule sinusoid(double center, double amplitude, double period,
                                      double phase = 0.0);

    std::string to_string() const;
    static ParameterSchedule parse(const std::string& text);
};

}  // namespace sindykf
