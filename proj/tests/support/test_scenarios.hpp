#pragma once

// Small in-code scenarios shared across test suites.

#include <cmath>
#include <string>
#include <vector>

#include "evgrid/scenario.hpp"

namespace testsup {

struct TinyOptions {
    int evs = 2;
    bool with_dg = true;
    int days = 1;
    double demand_mw = 20.0;  // PTN demand scale
};

// 2-bus transmission net + 2-bus feeder + a small EV fleet, one profile day.
inline evgrid::Scenario tiny_scenario(const TinyOptions& opt = {}) {
    using namespace evgrid;
    Scenario s;
    s.seed = 42;
    s.steps_per_day = 96;
    s.horizon_steps = 96 * opt.days;
    s.dt_hours = 0.25;
    s.frequency.f0_hz = 50.0;
    s.frequency.p_loss_max_mw = 10.0;
    s.frequency.rocof_max_hz_s = 0.5;
    s.frequency.delta_f_max_hz = 0.8;
    s.frequency.h_load_s = 0.0;
    s.market.kappa_gbp_per_kwh = 0.2;

    auto& T = s.transmission;
    T.angle_min_rad = M_PI / 3;
    T.angle_max_rad = M_PI / 3;
    T.buses.push_back({"b1", {}});
    T.buses.push_back({"b2", ProfileRef{"tload", 1.0}});
    T.reference_bus = "b1";
    T.lines.push_back({"b1", "b2", 0.1, 100.0});
    GeneratorSpec g;
    g.id = "g1";
    g.bus = "b1";
    g.cost_gbp_per_kwh = 0.04;
    g.p_min_mw = 5.0;
    g.p_max_mw = 120.0;
    g.ramp_down_mw = 120.0;
    g.ramp_up_mw = 120.0;
    g.inertia_s = 5.0;
    g.fr_time_s = 10.0;
    T.generators.push_back(g);

    auto& D = s.distribution;
    D.interface_bus = "d1";
    D.interface_ptn_bus = "b2";
    D.v_sq_slack = 1.0;
    D.v_sq_min = 0.9025;
    D.v_sq_max = 1.1025;
    D.eps_gd = 0.1;
    D.buses.push_back({"d1", {}, {}});
    D.buses.push_back({"d2", ProfileRef{"dload_p", 1.0}, ProfileRef{"dload_q", 1.0}});
    D.lines.push_back({"d1", "d2", 0.02, 0.02, 9.0});
    if (opt.with_dg) {
        DgSpec dg;
        dg.id = "dg1";
        dg.bus = "d2";
        dg.cost_p_gbp_per_kwh = 0.08;
        dg.cost_q_gbp_per_kwh = 0.01;
        dg.p_min_pu = 0.0;
        dg.p_max_pu = 0.6;
        dg.s_max_pu = 0.8;
        dg.pf_min = 0.85;
        D.dgs.push_back(dg);
    }
    D.stations.push_back({"cs1", "d2", 0.1});

    for (int i = 0; i < opt.evs; ++i) {
        EvSpec e;
        e.id = "ev" + std::to_string(i);
        e.e_min_kwh = 5.0;
        e.e_max_kwh = 30.0;
        e.p_max_kw = 6.0;
        e.s_max_kva = 6.6;
        e.efficiency = 0.95;
        e.fr_time_s = 1.0;
        e.home_station = "cs1";
        e.availability.initial_energy_kwh = {15.0, 2.0, 8.0, 27.0};
        e.availability.depart_step = {30.0, 2.0, 20.0, 40.0};
        e.availability.arrive_step = {72.0, 2.0, 60.0, 90.0};
        e.availability.travel_energy_kwh = {1.5, 0.3, 0.5, 3.0};
        e.availability.travel_steps = 2;
        s.evs.push_back(e);
    }

    std::vector<double> tload, dp, dq;
    for (int d = 0; d < opt.days; ++d) {
        for (int t = 0; t < 96; ++t) {
            const double ang = 2.0 * M_PI * t / 96.0;
            const double shape = 0.75 + 0.25 * std::sin(ang - M_PI / 2.0);
            tload.push_back(opt.demand_mw * shape);
            dp.push_back(0.6 * shape);
            dq.push_back(0.25 * shape);
        }
    }
    s.profiles["tload"] = tload;
    s.profiles["dload_p"] = dp;
    s.profiles["dload_q"] = dq;
    return s;
}

inline std::string data_dir() {
    const char* d = std::getenv("EVGRID_DATA_DIR");
    return d ? d : "data";
}

}  // namespace testsup
