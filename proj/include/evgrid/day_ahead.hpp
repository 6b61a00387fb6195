#pragma once

#include <string>
#include <vector>

#include "evgrid/conic.hpp"
#include "evgrid/scenario.hpp"

namespace evgrid {

// Stage-1 output: hourly transmission prices, per-EV reserve schedules, and
// frequency-response shadow prices for one day.
struct DayAheadSchedule {
    int day = 0;
    int hours = 24;
    // [bus][hour], GBP/kWh
    std::vector<std::vector<double>> lmp_gbp_per_kwh;
    // [ev][hour], kW
    std::vector<std::vector<double>> ev_fr_kw;
    // [hour], GBP/kWh
    std::vector<double> fr_price_gbp_per_kwh;
    // [gen][hour]
    std::vector<std::vector<double>> gen_commit;
    std::vector<std::vector<double>> gen_dispatch_mw;
    std::vector<std::vector<double>> gen_reserve_mw;
    // [station][hour], MW
    std::vector<std::vector<double>> station_power_mw;
    // [hour], MW*s
    std::vector<double> inertia_mws;
    double objective_gbp = 0.0;

    // Paper-convention nadir-cone duals per hour, recorded for diagnostics.
    std::vector<double> mu_na, lambda_na1, lambda_na2, lambda_qss;

    int hour_of_step(int step_in_day) const { return step_in_day / 4; }
};

// Handles into the built problem, used by the extractor and by tests.
struct FcOpfHandles {
    std::vector<std::vector<int>> balance_row;   // [bus][hour]
    std::vector<int> qss_row;                    // [hour] cone row index
    std::vector<int> nadir_row;                  // [hour] first cone row of RSOC
    std::vector<std::vector<int>> p_gen;         // [gen][hour] variable ids
    std::vector<std::vector<int>> r_gen;
    std::vector<std::vector<int>> y_gen;
    std::vector<std::vector<int>> p_eva;         // [station][hour]
    std::vector<int> h_sys;                      // [hour]
    std::vector<std::vector<int>> ev_fr;         // [ev][hour]
    std::vector<std::vector<int>> ev_pc;         // [ev][hour]
    std::vector<std::vector<int>> ev_pd;         // [ev][hour]
    std::vector<std::vector<double>> fixed_commit;  // set when y is constant
    double t_gen_price_s = 10.0;  // max T^gen across the fleet
};

struct FcOpfOptions {
    bool include_frequency = true;
    // When non-empty ([gen][hour] values in {0,1}), commitments enter as
    // constants and the problem is the convex restriction used for pricing.
    std::vector<std::vector<double>> fixed_commitment;
    // Reproduces the printed nadir rhs (multiplied by T^gen) instead of the
    // dimensionally consistent form.
    bool nadir_rhs_literal = false;
    // Exogenous FR injection per hour (MW), entering the qss and nadir rows
    // like EV reserve; used by the shadow-price sensitivity oracle.
    std::vector<double> exogenous_fr_mw;
};

ConicProblem build_fc_opf(const Scenario& s, int day, FcOpfHandles& handles,
                          const FcOpfOptions& opt = {});

DayAheadSchedule extract_schedule(const Scenario& s, int day, const FcOpfHandles& handles,
                                  const ConicProblem& p, const ConicSolution& sol);

// Builds, commits binaries, prices the fixed system, extracts.
DayAheadSchedule solve_day_ahead(const Scenario& s, int day, const FcOpfOptions& opt = {},
                                 const Tolerances& tol = {});

std::string schedule_to_json_text(const DayAheadSchedule& sched, const Scenario& s);
DayAheadSchedule schedule_from_json_text(const std::string& text);
void save_schedule(const DayAheadSchedule& sched, const Scenario& s, const std::string& path);
DayAheadSchedule load_schedule(const std::string& path);
void write_price_csv(const DayAheadSchedule& sched, const Scenario& s, const std::string& path);

}  // namespace evgrid
