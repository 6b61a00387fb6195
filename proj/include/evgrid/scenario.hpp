#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace evgrid {

// Errors raised by loaders. Invariant violations carry the full report text.
struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ReferenceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct InvariantError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Reference to a named profile, scaled on use.
struct ProfileRef {
    std::string name;  // empty = absent
    double scale = 1.0;
    bool present() const { return !name.empty(); }
};

struct GeneratorSpec {
    std::string id;
    std::string bus;
    double cost_gbp_per_kwh = 0.0;  // c^gen
    double p_min_mw = 0.0;
    double p_max_mw = 0.0;
    double ramp_down_mw = 0.0;  // per hour, >= 0
    double ramp_up_mw = 0.0;    // per hour, >= 0
    double inertia_s = 0.0;     // H_g
    double fr_time_s = 10.0;    // T^gen
};

struct TransmissionLine {
    std::string from, to;
    double reactance_pu = 0.0;
    double flow_limit_mw = 0.0;
};

struct TransmissionBus {
    std::string id;
    ProfileRef demand;  // MW
};

struct ResUnit {
    std::string id;
    std::string bus;
    ProfileRef output;  // MW (transmission) or p.u. (distribution)
};

struct TransmissionNet {
    std::vector<TransmissionBus> buses;
    std::vector<TransmissionLine> lines;
    double s_base_mva = 100.0;   // base for line reactances
    double angle_min_rad = 0.0;  // magnitude of the lower bound
    double angle_max_rad = 0.0;
    std::string reference_bus;
    std::vector<GeneratorSpec> generators;
    std::vector<ResUnit> res_units;

    int bus_index(const std::string& id) const;
};

struct DistributionLine {
    std::string from, to;
    double r_pu = 0.0;
    double x_pu = 0.0;
    double ampacity_pu = 0.0;  // bound on squared current
};

struct DgSpec {
    std::string id;
    std::string bus;
    double cost_p_gbp_per_kwh = 0.0;
    double cost_q_gbp_per_kwh = 0.0;
    double p_min_pu = 0.0;
    double p_max_pu = 0.0;
    double s_max_pu = 0.0;    // apparent power limit
    double pf_min = 0.9;      // delta^dg, power-factor bound
};

struct DistributionBus {
    std::string id;
    ProfileRef demand_p;  // p.u.
    ProfileRef demand_q;  // p.u.
};

// A charging station doubles as the EV aggregator of its group (Eq. (6) limit).
struct Station {
    std::string id;
    std::string bus;           // distribution bus
    double p_limit_mw = 0.0;   // aggregator power capacity
};

struct DistributionNet {
    std::vector<DistributionBus> buses;
    std::vector<DistributionLine> lines;
    double v_sq_min = 0.9025;  // p.u.^2
    double v_sq_max = 1.1025;
    std::string interface_bus;      // feeder root
    std::string interface_ptn_bus;  // transmission bus it hangs from
    double v_sq_slack = 1.0;
    double eps_gd = 0.1;  // reactive import weight in Eq. (27)
    std::vector<DgSpec> dgs;
    std::vector<ResUnit> res_units;
    std::vector<Station> stations;

    int bus_index(const std::string& id) const;
    int station_index(const std::string& id) const;
};

struct TruncNormal {
    double mean = 0.0, std = 0.0, low = 0.0, high = 0.0;
};

struct AvailabilityParams {
    TruncNormal initial_energy_kwh;
    TruncNormal depart_step;  // leaves home
    TruncNormal arrive_step;  // back home
    TruncNormal travel_energy_kwh;  // total per day
    int travel_steps = 2;           // steps per leg
};

struct EvSpec {
    std::string id;
    double e_min_kwh = 0.0, e_max_kwh = 0.0;
    double p_max_kw = 0.0;
    double s_max_kva = 0.0;
    double efficiency = 1.0;
    double fr_time_s = 1.0;  // T^ev
    std::string home_station;
    std::string work_station;  // empty: disconnected while away
    AvailabilityParams availability;
};

// Where an EV sits at a given step of one day.
enum class EvPlace : int8_t { Travel = -1, Home = 0, Work = 1 };

struct AvailabilityProfile {
    std::vector<uint8_t> connected;          // per step
    std::vector<EvPlace> place;              // per step
    std::vector<double> travel_energy_kwh;   // per step, > 0 only when disconnected
    double initial_energy_kwh = 0.0;
};

struct FrequencyParams {
    double f0_hz = 50.0;
    double p_loss_max_mw = 0.0;  // largest infeed loss
    double h_load_s = 0.0;       // H^L
    double rocof_max_hz_s = 0.5;
    double delta_f_max_hz = 0.8;
    double price_t_ev_s = 1.0;  // T^ev used in the Eq. (20) price formula
};

struct MarketParams {
    double kappa_gbp_per_kwh = -1.0;  // < 0: derive as 2x mean day-ahead FR price
};

struct Scenario {
    TransmissionNet transmission;
    DistributionNet distribution;
    std::vector<EvSpec> evs;
    std::map<std::string, std::vector<double>> profiles;
    int horizon_steps = 96;  // total, covering all days
    int steps_per_day = 96;
    double dt_hours = 0.25;
    FrequencyParams frequency;
    MarketParams market;
    uint64_t seed = 0;

    int days() const { return horizon_steps / steps_per_day; }
    int hours_per_day() const { return steps_per_day / 4; }
    const std::vector<double>& profile(const std::string& name) const;
    double profile_value(const ProfileRef& ref, int step) const;
    // Availability for one EV on one day; deterministic in (seed, ev, day).
    AvailabilityProfile availability_for(int ev_index, int day) const;
    int station_of(const EvSpec& spec, EvPlace place) const;
};

struct ValidationIssue {
    std::string where;
    std::string what;
};

struct ValidationReport {
    std::vector<ValidationIssue> issues;
    bool ok() const { return issues.empty(); }
    std::string str() const;
};

Scenario load_scenario(const std::string& path);
Scenario scenario_from_json_text(const std::string& text);
std::string scenario_to_json_text(const Scenario& s);
void save_scenario(const Scenario& s, const std::string& path);
ValidationReport validate_scenario(const Scenario& s);

AvailabilityProfile sample_availability(const EvSpec& spec, uint64_t seed, int steps_per_day = 96);

// Hourly bridge used by the day-ahead stage: averages the four 15-minute
// values of each hour of the given day.
std::vector<double> hourly_average(const std::vector<double>& per_step, int day, int steps_per_day);

}  // namespace evgrid
