#pragma once

#include <string>
#include <vector>

namespace evgrid {

// Post-fault swing-equation case: an infeed loss covered by two ramped
// frequency-response sources (generators and EVs).
struct FaultCase {
    double inertia_mws = 0.0;   // H, MW*s
    double f0_hz = 50.0;
    double p_loss_mw = 0.0;     // lost infeed
    double gen_fr_mw = 0.0;     // delivered linearly over gen_time_s
    double gen_time_s = 10.0;
    double ev_fr_mw = 0.0;
    double ev_time_s = 1.0;
    double step_s = 0.01;
    double horizon_s = 30.0;
};

struct FrequencyTrace {
    std::vector<double> time_s;
    std::vector<double> freq_hz;
    std::vector<double> rocof_hz_s;
    double nadir_hz = 0.0;
    double nadir_time_s = 0.0;
    double qss_deviation_hz = 0.0;  // frequency deviation at the horizon end
    bool no_recovery = false;       // total FR below the loss
};

struct SecurityReport {
    bool nadir_ok = false;
    bool rocof_ok = false;
    double worst_nadir_hz = 0.0;
    double worst_nadir_time_s = 0.0;
    double worst_rocof_hz_s = 0.0;
    double worst_rocof_time_s = 0.0;
    bool pass() const { return nadir_ok && rocof_ok; }
};

// Integrates (2H/f0) d(df)/dt = -P_L + R_g min(t/T_g,1) + R_ev min(t/T_ev,1)
// with classic fourth-order Runge-Kutta.
FrequencyTrace simulate(const FaultCase& c);

// Closed-form nadir for a single ramped generator source with the EV share
// treated as instantaneous: f0 - (P_L - R_ev)^2 T_g f0 / (4 H R_g).
double analytic_nadir(const FaultCase& c);

SecurityReport check_security(const FrequencyTrace& trace, double f0_hz, double delta_f_max_hz,
                              double rocof_max_hz_s);

// Root-finds the inertia H that makes simulate(c) hit the target nadir.
double calibrate_inertia(FaultCase c, double target_nadir_hz);

void write_trace_csv(const FrequencyTrace& trace, const std::string& path);

}  // namespace evgrid
