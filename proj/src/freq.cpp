#include "evgrid/freq.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

namespace evgrid {

namespace {

void check_case(const FaultCase& c) {
    if (!(c.inertia_mws > 0)) throw std::invalid_argument("fault case: inertia must be > 0");
    if (!(c.gen_time_s > 0) || !(c.ev_time_s > 0))
        throw std::invalid_argument("fault case: delivery times must be > 0");
    if (!(c.step_s > 0) || !(c.step_s < std::min(c.ev_time_s, c.gen_time_s) / 10.0))
        throw std::invalid_argument("fault case: step must be < min(T_ev, T_gen)/10");
    if (!(c.horizon_s > 0)) throw std::invalid_argument("fault case: horizon must be > 0");
}

}  // namespace

FrequencyTrace simulate(const FaultCase& c) {
    check_case(c);
    const auto net_power = [&](double t) {
        // Delivery saturates once the lost infeed is covered; primary response
        // does not push the system past balance.
        const double delivered = c.gen_fr_mw * std::min(t / c.gen_time_s, 1.0) +
                                 c.ev_fr_mw * std::min(t / c.ev_time_s, 1.0);
        return -c.p_loss_mw + std::min(delivered, c.p_loss_mw);
    };
    const double coef = c.f0_hz / (2.0 * c.inertia_mws);
    const auto deriv = [&](double t) { return coef * net_power(t); };

    const int steps = static_cast<int>(std::ceil(c.horizon_s / c.step_s));
    FrequencyTrace tr;
    tr.time_s.reserve(steps + 1);
    tr.freq_hz.reserve(steps + 1);
    tr.rocof_hz_s.reserve(steps + 1);

    double df = 0.0;
    double t = 0.0;
    tr.time_s.push_back(0.0);
    tr.freq_hz.push_back(c.f0_hz);
    tr.rocof_hz_s.push_back(deriv(0.0));
    for (int i = 0; i < steps; ++i) {
        const double dt = std::min(c.step_s, c.horizon_s - t);
        // RK4; the rhs depends on time only, so this is Simpson quadrature.
        const double k1 = deriv(t);
        const double k2 = deriv(t + dt / 2.0);
        const double k3 = k2;
        const double k4 = deriv(t + dt);
        df += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        t += dt;
        tr.time_s.push_back(t);
        tr.freq_hz.push_back(c.f0_hz + df);
        tr.rocof_hz_s.push_back(deriv(t));
    }

    auto min_it = std::min_element(tr.freq_hz.begin(), tr.freq_hz.end());
    tr.nadir_hz = *min_it;
    tr.nadir_time_s = tr.time_s[static_cast<size_t>(min_it - tr.freq_hz.begin())];
    tr.qss_deviation_hz = tr.freq_hz.back() - c.f0_hz;
    tr.no_recovery = c.gen_fr_mw + c.ev_fr_mw < c.p_loss_mw;
    return tr;
}

double analytic_nadir(const FaultCase& c) {
    const double residual = c.p_loss_mw - c.ev_fr_mw;
    if (residual <= 0.0) return c.f0_hz;
    if (!(c.gen_fr_mw > 0.0))
        throw std::invalid_argument("analytic_nadir: no generator FR against residual imbalance");
    return c.f0_hz -
           residual * residual * c.gen_time_s * c.f0_hz / (4.0 * c.inertia_mws * c.gen_fr_mw);
}

SecurityReport check_security(const FrequencyTrace& trace, double f0_hz, double delta_f_max_hz,
                              double rocof_max_hz_s) {
    SecurityReport rep;
    rep.worst_nadir_hz = trace.nadir_hz;
    rep.worst_nadir_time_s = trace.nadir_time_s;
    double worst = 0.0;
    size_t at = 0;
    for (size_t i = 0; i < trace.rocof_hz_s.size(); ++i) {
        if (std::abs(trace.rocof_hz_s[i]) > worst) {
            worst = std::abs(trace.rocof_hz_s[i]);
            at = i;
        }
    }
    rep.worst_rocof_hz_s = worst;
    rep.worst_rocof_time_s = trace.time_s.empty() ? 0.0 : trace.time_s[at];
    rep.nadir_ok = !trace.no_recovery && trace.nadir_hz >= f0_hz - delta_f_max_hz;
    rep.rocof_ok = worst <= rocof_max_hz_s;
    return rep;
}

double calibrate_inertia(FaultCase c, double target_nadir_hz) {
    // Nadir is monotone increasing in H; bisect on log-spaced brackets.
    double lo = 1.0, hi = 1.0e7;
    auto nadir_at = [&](double h) {
        c.inertia_mws = h;
        return simulate(c).nadir_hz;
    };
    if (nadir_at(hi) < target_nadir_hz)
        throw std::invalid_argument("calibrate_inertia: target unreachable");
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (nadir_at(mid) < target_nadir_hz)
            lo = mid;
        else
            hi = mid;
        if (hi - lo < 1e-6 * hi) break;
    }
    return hi;
}

void write_trace_csv(const FrequencyTrace& trace, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot write trace csv '" + path + "'");
    f << "t,f,rocof\n";
    f.precision(12);
    for (size_t i = 0; i < trace.time_s.size(); ++i)
        f << trace.time_s[i] << "," << trace.freq_hz[i] << "," << trace.rocof_hz_s[i] << "\n";
}

}  // namespace evgrid
