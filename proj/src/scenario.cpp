#include "evgrid/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "evgrid/rng.hpp"
#include "json.hpp"

using nlohmann::json;

namespace evgrid {

namespace {

[[noreturn]] void parse_fail(const std::string& ctx, const std::string& what) {
    throw ParseError("scenario: " + ctx + ": " + what);
}

const json& need(const json& j, const char* key, const std::string& ctx) {
    auto it = j.find(key);
    if (it == j.end()) parse_fail(ctx, std::string("missing field '") + key + "'");
    return *it;
}

double need_num(const json& j, const char* key, const std::string& ctx) {
    const json& v = need(j, key, ctx);
    if (!v.is_number()) parse_fail(ctx, std::string("field '") + key + "' must be a number");
    return v.get<double>();
}

double opt_num(const json& j, const char* key, double fallback) {
    auto it = j.find(key);
    return it == j.end() ? fallback : it->get<double>();
}

std::string need_str(const json& j, const char* key, const std::string& ctx) {
    const json& v = need(j, key, ctx);
    if (!v.is_string()) parse_fail(ctx, std::string("field '") + key + "' must be a string");
    return v.get<std::string>();
}

std::string opt_str(const json& j, const char* key, const std::string& fallback) {
    auto it = j.find(key);
    return it == j.end() ? fallback : it->get<std::string>();
}

ProfileRef parse_profile_ref(const json& j, const char* key) {
    ProfileRef ref;
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) return ref;
    ref.name = need_str(*it, "profile", key);
    ref.scale = opt_num(*it, "scale", 1.0);
    return ref;
}

json profile_ref_json(const ProfileRef& ref) {
    json j;
    j["profile"] = ref.name;
    j["scale"] = ref.scale;
    return j;
}

TruncNormal parse_trunc(const json& j, const char* key, const std::string& ctx) {
    const json& v = need(j, key, ctx);
    TruncNormal t;
    t.mean = need_num(v, "mean", ctx);
    t.std = need_num(v, "std", ctx);
    t.low = need_num(v, "low", ctx);
    t.high = need_num(v, "high", ctx);
    return t;
}

json trunc_json(const TruncNormal& t) {
    return json{{"mean", t.mean}, {"std", t.std}, {"low", t.low}, {"high", t.high}};
}

EvSpec parse_ev_spec(const json& j, const std::string& ctx) {
    EvSpec e;
    e.id = opt_str(j, "id", "");
    e.e_min_kwh = need_num(j, "e_min_kwh", ctx);
    e.e_max_kwh = need_num(j, "e_max_kwh", ctx);
    e.p_max_kw = need_num(j, "p_max_kw", ctx);
    e.s_max_kva = need_num(j, "s_max_kva", ctx);
    e.efficiency = need_num(j, "efficiency", ctx);
    e.fr_time_s = opt_num(j, "fr_time_s", 1.0);
    e.home_station = need_str(j, "home_station", ctx);
    e.work_station = opt_str(j, "work_station", "");
    const json& av = need(j, "availability", ctx);
    e.availability.initial_energy_kwh = parse_trunc(av, "initial_energy_kwh", ctx);
    e.availability.depart_step = parse_trunc(av, "depart_step", ctx);
    e.availability.arrive_step = parse_trunc(av, "arrive_step", ctx);
    e.availability.travel_energy_kwh = parse_trunc(av, "travel_energy_kwh", ctx);
    e.availability.travel_steps = static_cast<int>(opt_num(av, "travel_steps", 2));
    return e;
}

json ev_spec_json(const EvSpec& e) {
    json j;
    j["id"] = e.id;
    j["e_min_kwh"] = e.e_min_kwh;
    j["e_max_kwh"] = e.e_max_kwh;
    j["p_max_kw"] = e.p_max_kw;
    j["s_max_kva"] = e.s_max_kva;
    j["efficiency"] = e.efficiency;
    j["fr_time_s"] = e.fr_time_s;
    j["home_station"] = e.home_station;
    if (!e.work_station.empty()) j["work_station"] = e.work_station;
    j["availability"] = json{{"initial_energy_kwh", trunc_json(e.availability.initial_energy_kwh)},
                             {"depart_step", trunc_json(e.availability.depart_step)},
                             {"arrive_step", trunc_json(e.availability.arrive_step)},
                             {"travel_energy_kwh", trunc_json(e.availability.travel_energy_kwh)},
                             {"travel_steps", e.availability.travel_steps}};
    return j;
}

void load_profile_csv(const std::string& path, int horizon,
                      std::map<std::string, std::vector<double>>& out) {
    std::ifstream f(path);
    if (!f) parse_fail("profiles", "cannot open csv file '" + path + "'");
    std::string line;
    size_t lineno = 0;
    while (std::getline(f, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        std::stringstream ss(line);
        std::string name, step_s, value_s;
        if (!std::getline(ss, name, ',') || !std::getline(ss, step_s, ',') ||
            !std::getline(ss, value_s)) {
            parse_fail("profiles", path + ":" + std::to_string(lineno) +
                                       ": expected 'name,step,value'");
        }
        if (lineno == 1 && name == "bus_id") continue;  // header
        int step;
        double value;
        try {
            step = std::stoi(step_s);
            value = std::stod(value_s);
        } catch (const std::exception&) {
            parse_fail("profiles", path + ":" + std::to_string(lineno) + ": bad number");
        }
        auto& vec = out[name];
        if (vec.empty()) vec.assign(static_cast<size_t>(horizon), std::nan(""));
        if (step < 0 || step >= horizon)
            parse_fail("profiles",
                       path + ":" + std::to_string(lineno) + ": step out of range");
        vec[static_cast<size_t>(step)] = value;
    }
    for (auto& [name, vec] : out) {
        for (size_t t = 0; t < vec.size(); ++t) {
            if (std::isnan(vec[t]))
                parse_fail("profiles", "csv profile '" + name + "' missing step " +
                                           std::to_string(t));
        }
    }
}

std::string dirname_of(const std::string& path) {
    auto pos = path.find_last_of('/');
    return pos == std::string::npos ? std::string(".") : path.substr(0, pos);
}

}  // namespace

int TransmissionNet::bus_index(const std::string& id) const {
    for (size_t i = 0; i < buses.size(); ++i)
        if (buses[i].id == id) return static_cast<int>(i);
    return -1;
}

int DistributionNet::bus_index(const std::string& id) const {
    for (size_t i = 0; i < buses.size(); ++i)
        if (buses[i].id == id) return static_cast<int>(i);
    return -1;
}

int DistributionNet::station_index(const std::string& id) const {
    for (size_t i = 0; i < stations.size(); ++i)
        if (stations[i].id == id) return static_cast<int>(i);
    return -1;
}

const std::vector<double>& Scenario::profile(const std::string& name) const {
    auto it = profiles.find(name);
    if (it == profiles.end()) throw ReferenceError("unknown profile '" + name + "'");
    return it->second;
}

double Scenario::profile_value(const ProfileRef& ref, int step) const {
    if (!ref.present()) return 0.0;
    const auto& vec = profile(ref.name);
    return ref.scale * vec.at(static_cast<size_t>(step));
}

AvailabilityProfile Scenario::availability_for(int ev_index, int day) const {
    const EvSpec& spec = evs.at(static_cast<size_t>(ev_index));
    uint64_t s = derive_seed(seed, "availability:" + spec.id, static_cast<uint64_t>(day));
    return sample_availability(spec, s, steps_per_day);
}

int Scenario::station_of(const EvSpec& spec, EvPlace place) const {
    if (place == EvPlace::Home) return distribution.station_index(spec.home_station);
    if (place == EvPlace::Work && !spec.work_station.empty())
        return distribution.station_index(spec.work_station);
    return -1;
}

std::string ValidationReport::str() const {
    std::string out;
    for (const auto& i : issues) out += i.where + ": " + i.what + "\n";
    return out;
}

AvailabilityProfile sample_availability(const EvSpec& spec, uint64_t seed, int steps_per_day) {
    const auto& ap = spec.availability;
    for (const TruncNormal* t :
         {&ap.initial_energy_kwh, &ap.depart_step, &ap.arrive_step, &ap.travel_energy_kwh}) {
        if (!(t->low < t->high))
            throw InvariantError("availability distribution bounds invalid (low >= high) for EV '" +
                                 spec.id + "'");
    }
    Rng rng(seed);
    AvailabilityProfile prof;
    prof.initial_energy_kwh = rng.truncated_normal(ap.initial_energy_kwh.mean,
                                                   ap.initial_energy_kwh.std,
                                                   ap.initial_energy_kwh.low,
                                                   ap.initial_energy_kwh.high);
    prof.initial_energy_kwh = std::clamp(prof.initial_energy_kwh, spec.e_min_kwh, spec.e_max_kwh);

    const int travel = std::max(1, ap.travel_steps);
    int dep = static_cast<int>(std::lround(rng.truncated_normal(
        ap.depart_step.mean, ap.depart_step.std, ap.depart_step.low, ap.depart_step.high)));
    int arr = static_cast<int>(std::lround(rng.truncated_normal(
        ap.arrive_step.mean, ap.arrive_step.std, ap.arrive_step.low, ap.arrive_step.high)));
    dep = std::clamp(dep, 1, steps_per_day - 2 * travel - 2);
    arr = std::clamp(arr, dep + 2 * travel + 1, steps_per_day - 1);

    double travel_energy = rng.truncated_normal(ap.travel_energy_kwh.mean,
                                                ap.travel_energy_kwh.std,
                                                ap.travel_energy_kwh.low,
                                                ap.travel_energy_kwh.high);
    travel_energy = std::max(0.0, travel_energy);

    prof.connected.assign(static_cast<size_t>(steps_per_day), 1);
    prof.place.assign(static_cast<size_t>(steps_per_day), EvPlace::Home);
    prof.travel_energy_kwh.assign(static_cast<size_t>(steps_per_day), 0.0);
    const bool has_work = !spec.work_station.empty();
    const double per_leg_step = travel_energy / (2.0 * travel);
    for (int t = dep; t < arr; ++t) {
        const bool in_leg1 = t < dep + travel;
        const bool in_leg2 = t >= arr - travel;
        if (in_leg1 || in_leg2) {
            prof.connected[t] = 0;
            prof.place[t] = EvPlace::Travel;
            prof.travel_energy_kwh[t] = per_leg_step;
        } else if (has_work) {
            prof.place[t] = EvPlace::Work;
        } else {
            prof.connected[t] = 0;  // parked away from any station
            prof.place[t] = EvPlace::Travel;
        }
    }
    return prof;
}

std::vector<double> hourly_average(const std::vector<double>& per_step, int day,
                                   int steps_per_day) {
    const int hours = steps_per_day / 4;
    std::vector<double> out(static_cast<size_t>(hours), 0.0);
    const int base = day * steps_per_day;
    for (int h = 0; h < hours; ++h) {
        double acc = 0.0;
        for (int q = 0; q < 4; ++q) acc += per_step.at(static_cast<size_t>(base + 4 * h + q));
        out[h] = acc / 4.0;
    }
    return out;
}

// ---------------------------------------------------------------------------
// JSON load/save

Scenario scenario_from_json_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ParseError(std::string("scenario: invalid json: ") + e.what());
    }

    Scenario s;
    s.seed = static_cast<uint64_t>(opt_num(j, "seed", 0));

    const json& hz = need(j, "horizon", "horizon");
    s.horizon_steps = static_cast<int>(need_num(hz, "steps", "horizon"));
    s.steps_per_day = static_cast<int>(opt_num(hz, "steps_per_day", 96));
    s.dt_hours = opt_num(hz, "dt_hours", 0.25);

    const json& fq = need(j, "frequency", "frequency");
    s.frequency.f0_hz = opt_num(fq, "f0_hz", 50.0);
    s.frequency.p_loss_max_mw = need_num(fq, "p_loss_max_mw", "frequency");
    s.frequency.h_load_s = opt_num(fq, "h_load_s", 0.0);
    s.frequency.rocof_max_hz_s = opt_num(fq, "rocof_max_hz_s", 0.5);
    s.frequency.delta_f_max_hz = opt_num(fq, "delta_f_max_hz", 0.8);
    s.frequency.price_t_ev_s = opt_num(fq, "price_t_ev_s", 1.0);

    if (j.contains("market")) s.market.kappa_gbp_per_kwh = opt_num(j["market"], "kappa_gbp_per_kwh", -1.0);

    // Transmission.
    const json& tn = need(j, "transmission", "transmission");
    auto& T = s.transmission;
    T.s_base_mva = opt_num(tn, "s_base_mva", 100.0);
    T.angle_min_rad = opt_num(tn, "angle_min_rad", M_PI / 6.0);
    T.angle_max_rad = opt_num(tn, "angle_max_rad", M_PI / 6.0);
    for (const json& b : need(tn, "buses", "transmission.buses")) {
        TransmissionBus bus;
        bus.id = need_str(b, "id", "transmission bus");
        bus.demand = parse_profile_ref(b, "demand");
        T.buses.push_back(std::move(bus));
    }
    T.reference_bus = opt_str(tn, "reference_bus", T.buses.empty() ? "" : T.buses.front().id);
    for (const json& l : need(tn, "lines", "transmission.lines")) {
        TransmissionLine line;
        line.from = need_str(l, "from", "transmission line");
        line.to = need_str(l, "to", "transmission line");
        line.reactance_pu = need_num(l, "x_pu", "transmission line");
        line.flow_limit_mw = need_num(l, "limit_mw", "transmission line");
        T.lines.push_back(std::move(line));
    }
    for (const json& g : need(tn, "generators", "transmission.generators")) {
        GeneratorSpec gen;
        gen.id = need_str(g, "id", "generator");
        gen.bus = need_str(g, "bus", "generator " + gen.id);
        gen.cost_gbp_per_kwh = need_num(g, "cost_gbp_per_kwh", "generator " + gen.id);
        gen.p_min_mw = need_num(g, "p_min_mw", "generator " + gen.id);
        gen.p_max_mw = need_num(g, "p_max_mw", "generator " + gen.id);
        gen.ramp_down_mw = need_num(g, "ramp_down_mw", "generator " + gen.id);
        gen.ramp_up_mw = need_num(g, "ramp_up_mw", "generator " + gen.id);
        gen.inertia_s = need_num(g, "inertia_s", "generator " + gen.id);
        gen.fr_time_s = opt_num(g, "fr_time_s", 10.0);
        T.generators.push_back(std::move(gen));
    }
    if (tn.contains("res")) {
        for (const json& r : tn["res"]) {
            ResUnit u;
            u.id = need_str(r, "id", "transmission res");
            u.bus = need_str(r, "bus", "transmission res " + u.id);
            u.output = parse_profile_ref(r, "output");
            T.res_units.push_back(std::move(u));
        }
    }

    // Distribution.
    const json& dn = need(j, "distribution", "distribution");
    auto& D = s.distribution;
    D.interface_bus = need_str(dn, "interface_bus", "distribution");
    D.interface_ptn_bus = need_str(dn, "interface_ptn_bus", "distribution");
    D.v_sq_slack = opt_num(dn, "v_sq_slack", 1.0);
    D.v_sq_min = opt_num(dn, "v_sq_min", 0.9025);
    D.v_sq_max = opt_num(dn, "v_sq_max", 1.1025);
    D.eps_gd = opt_num(dn, "eps_gd", 0.1);
    for (const json& b : need(dn, "buses", "distribution.buses")) {
        DistributionBus bus;
        bus.id = need_str(b, "id", "distribution bus");
        bus.demand_p = parse_profile_ref(b, "demand_p");
        bus.demand_q = parse_profile_ref(b, "demand_q");
        D.buses.push_back(std::move(bus));
    }
    for (const json& l : need(dn, "lines", "distribution.lines")) {
        DistributionLine line;
        line.from = need_str(l, "from", "distribution line");
        line.to = need_str(l, "to", "distribution line");
        line.r_pu = need_num(l, "r_pu", "distribution line");
        line.x_pu = need_num(l, "x_pu", "distribution line");
        line.ampacity_pu = need_num(l, "ampacity_pu", "distribution line");
        D.lines.push_back(std::move(line));
    }
    if (dn.contains("dgs")) {
        for (const json& g : dn["dgs"]) {
            DgSpec dg;
            dg.id = need_str(g, "id", "dg");
            dg.bus = need_str(g, "bus", "dg " + dg.id);
            dg.cost_p_gbp_per_kwh = need_num(g, "cost_p_gbp_per_kwh", "dg " + dg.id);
            dg.cost_q_gbp_per_kwh = need_num(g, "cost_q_gbp_per_kwh", "dg " + dg.id);
            dg.p_min_pu = need_num(g, "p_min_pu", "dg " + dg.id);
            dg.p_max_pu = need_num(g, "p_max_pu", "dg " + dg.id);
            dg.s_max_pu = need_num(g, "s_max_pu", "dg " + dg.id);
            dg.pf_min = opt_num(g, "pf_min", 0.9);
            D.dgs.push_back(std::move(dg));
        }
    }
    if (dn.contains("res")) {
        for (const json& r : dn["res"]) {
            ResUnit u;
            u.id = need_str(r, "id", "distribution res");
            u.bus = need_str(r, "bus", "distribution res " + u.id);
            u.output = parse_profile_ref(r, "output");
            D.res_units.push_back(std::move(u));
        }
    }
    for (const json& st : need(dn, "stations", "distribution.stations")) {
        Station station;
        station.id = need_str(st, "id", "station");
        station.bus = need_str(st, "bus", "station " + station.id);
        station.p_limit_mw = need_num(st, "p_limit_mw", "station " + station.id);
        D.stations.push_back(std::move(station));
    }

    // EVs: explicit list and/or fleet templates expanded here.
    const json& evs = need(j, "evs", "evs");
    if (evs.contains("list")) {
        for (const json& e : evs["list"]) {
            EvSpec spec = parse_ev_spec(e, "ev");
            if (spec.id.empty()) spec.id = "ev" + std::to_string(s.evs.size());
            s.evs.push_back(std::move(spec));
        }
    }
    if (evs.contains("fleets")) {
        for (const json& f : evs["fleets"]) {
            const int count = static_cast<int>(need_num(f, "count", "fleet"));
            EvSpec proto = parse_ev_spec(f, "fleet");
            const std::string prefix =
                opt_str(f, "id_prefix", "ev" + std::to_string(s.evs.size()) + "_");
            for (int i = 0; i < count; ++i) {
                EvSpec spec = proto;
                spec.id = prefix + std::to_string(i);
                s.evs.push_back(std::move(spec));
            }
        }
    }

    // Profiles: inline arrays and/or csv imports (name,step,value rows).
    const json& pf = need(j, "profiles", "profiles");
    if (pf.contains("inline")) {
        for (auto it = pf["inline"].begin(); it != pf["inline"].end(); ++it) {
            std::vector<double> vals = it.value().get<std::vector<double>>();
            s.profiles[it.key()] = std::move(vals);
        }
    }
    if (pf.contains("csv_files")) {
        for (const json& f : pf["csv_files"]) {
            std::string path = f.get<std::string>();
            load_profile_csv(path, s.horizon_steps, s.profiles);
        }
    }

    ValidationReport report = validate_scenario(s);
    if (!report.ok()) {
        bool any_ref = false;
        for (const auto& i : report.issues)
            if (i.what.rfind("unknown", 0) == 0) any_ref = true;
        if (any_ref) throw ReferenceError("scenario references unresolved ids:\n" + report.str());
        throw InvariantError("scenario invariant violations:\n" + report.str());
    }
    return s;
}

Scenario load_scenario(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ParseError("scenario: cannot open '" + path + "'");
    std::stringstream ss;
    ss << f.rdbuf();
    std::string text = ss.str();
    // Make csv_files relative to the scenario file location.
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ParseError(std::string("scenario: invalid json: ") + e.what());
    }
    if (j.contains("profiles") && j["profiles"].contains("csv_files")) {
        for (json& f2 : j["profiles"]["csv_files"]) {
            std::string p = f2.get<std::string>();
            if (!p.empty() && p[0] != '/') f2 = dirname_of(path) + "/" + p;
        }
    }
    return scenario_from_json_text(j.dump());
}

std::string scenario_to_json_text(const Scenario& s) {
    json j;
    j["seed"] = s.seed;
    j["horizon"] = json{{"steps", s.horizon_steps},
                        {"steps_per_day", s.steps_per_day},
                        {"dt_hours", s.dt_hours}};
    j["frequency"] = json{{"f0_hz", s.frequency.f0_hz},
                          {"p_loss_max_mw", s.frequency.p_loss_max_mw},
                          {"h_load_s", s.frequency.h_load_s},
                          {"rocof_max_hz_s", s.frequency.rocof_max_hz_s},
                          {"delta_f_max_hz", s.frequency.delta_f_max_hz},
                          {"price_t_ev_s", s.frequency.price_t_ev_s}};
    j["market"] = json{{"kappa_gbp_per_kwh", s.market.kappa_gbp_per_kwh}};

    json tn;
    tn["s_base_mva"] = s.transmission.s_base_mva;
    tn["angle_min_rad"] = s.transmission.angle_min_rad;
    tn["angle_max_rad"] = s.transmission.angle_max_rad;
    tn["reference_bus"] = s.transmission.reference_bus;
    tn["buses"] = json::array();
    for (const auto& b : s.transmission.buses) {
        json bj{{"id", b.id}};
        if (b.demand.present()) bj["demand"] = profile_ref_json(b.demand);
        tn["buses"].push_back(bj);
    }
    tn["lines"] = json::array();
    for (const auto& l : s.transmission.lines)
        tn["lines"].push_back(json{{"from", l.from},
                                   {"to", l.to},
                                   {"x_pu", l.reactance_pu},
                                   {"limit_mw", l.flow_limit_mw}});
    tn["generators"] = json::array();
    for (const auto& g : s.transmission.generators)
        tn["generators"].push_back(json{{"id", g.id},
                                        {"bus", g.bus},
                                        {"cost_gbp_per_kwh", g.cost_gbp_per_kwh},
                                        {"p_min_mw", g.p_min_mw},
                                        {"p_max_mw", g.p_max_mw},
                                        {"ramp_down_mw", g.ramp_down_mw},
                                        {"ramp_up_mw", g.ramp_up_mw},
                                        {"inertia_s", g.inertia_s},
                                        {"fr_time_s", g.fr_time_s}});
    tn["res"] = json::array();
    for (const auto& r : s.transmission.res_units)
        tn["res"].push_back(json{{"id", r.id}, {"bus", r.bus}, {"output", profile_ref_json(r.output)}});
    j["transmission"] = std::move(tn);

    json dn;
    dn["interface_bus"] = s.distribution.interface_bus;
    dn["interface_ptn_bus"] = s.distribution.interface_ptn_bus;
    dn["v_sq_slack"] = s.distribution.v_sq_slack;
    dn["v_sq_min"] = s.distribution.v_sq_min;
    dn["v_sq_max"] = s.distribution.v_sq_max;
    dn["eps_gd"] = s.distribution.eps_gd;
    dn["buses"] = json::array();
    for (const auto& b : s.distribution.buses) {
        json bj{{"id", b.id}};
        if (b.demand_p.present()) bj["demand_p"] = profile_ref_json(b.demand_p);
        if (b.demand_q.present()) bj["demand_q"] = profile_ref_json(b.demand_q);
        dn["buses"].push_back(bj);
    }
    dn["lines"] = json::array();
    for (const auto& l : s.distribution.lines)
        dn["lines"].push_back(json{{"from", l.from},
                                   {"to", l.to},
                                   {"r_pu", l.r_pu},
                                   {"x_pu", l.x_pu},
                                   {"ampacity_pu", l.ampacity_pu}});
    dn["dgs"] = json::array();
    for (const auto& g : s.distribution.dgs)
        dn["dgs"].push_back(json{{"id", g.id},
                                 {"bus", g.bus},
                                 {"cost_p_gbp_per_kwh", g.cost_p_gbp_per_kwh},
                                 {"cost_q_gbp_per_kwh", g.cost_q_gbp_per_kwh},
                                 {"p_min_pu", g.p_min_pu},
                                 {"p_max_pu", g.p_max_pu},
                                 {"s_max_pu", g.s_max_pu},
                                 {"pf_min", g.pf_min}});
    dn["res"] = json::array();
    for (const auto& r : s.distribution.res_units)
        dn["res"].push_back(json{{"id", r.id}, {"bus", r.bus}, {"output", profile_ref_json(r.output)}});
    dn["stations"] = json::array();
    for (const auto& st : s.distribution.stations)
        dn["stations"].push_back(
            json{{"id", st.id}, {"bus", st.bus}, {"p_limit_mw", st.p_limit_mw}});
    j["distribution"] = std::move(dn);

    json evs;
    evs["list"] = json::array();
    for (const auto& e : s.evs) evs["list"].push_back(ev_spec_json(e));
    j["evs"] = std::move(evs);

    json pf;
    pf["inline"] = json::object();
    for (const auto& [name, vals] : s.profiles) pf["inline"][name] = vals;
    j["profiles"] = std::move(pf);

    return j.dump(1);
}

void save_scenario(const Scenario& s, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw ParseError("scenario: cannot write '" + path + "'");
    f << scenario_to_json_text(s);
}

// ---------------------------------------------------------------------------
// Validation

namespace {

struct UnionFind {
    std::vector<int> parent;
    explicit UnionFind(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
    int find(int a) { return parent[a] == a ? a : parent[a] = find(parent[a]); }
    void unite(int a, int b) { parent[find(a)] = find(b); }
};

void check_trunc(const TruncNormal& t, const std::string& where, ValidationReport& r) {
    if (!(t.low < t.high))
        r.issues.push_back({where, "distribution bounds invalid: low " + std::to_string(t.low) +
                                       " >= high " + std::to_string(t.high)});
    if (t.std < 0.0) r.issues.push_back({where, "negative std"});
}

}  // namespace

ValidationReport validate_scenario(const Scenario& s) {
    ValidationReport r;
    const auto& T = s.transmission;
    const auto& D = s.distribution;

    // Horizon.
    if (s.steps_per_day <= 0 || s.steps_per_day % 4 != 0)
        r.issues.push_back({"horizon", "steps_per_day must be a positive multiple of 4"});
    if (s.horizon_steps <= 0 || (s.steps_per_day > 0 && s.horizon_steps % s.steps_per_day != 0))
        r.issues.push_back({"horizon", "steps must be a positive multiple of steps_per_day"});
    if (std::abs(s.dt_hours * s.steps_per_day - 24.0) > 1e-9)
        r.issues.push_back({"horizon", "dt_hours * steps_per_day must equal 24"});

    // Frequency.
    if (s.frequency.f0_hz <= 0) r.issues.push_back({"frequency", "f0_hz must be > 0"});
    if (s.frequency.p_loss_max_mw < 0) r.issues.push_back({"frequency", "p_loss_max_mw must be >= 0"});
    if (s.frequency.rocof_max_hz_s <= 0) r.issues.push_back({"frequency", "rocof_max_hz_s must be > 0"});
    if (s.frequency.delta_f_max_hz <= 0) r.issues.push_back({"frequency", "delta_f_max_hz must be > 0"});
    if (s.frequency.h_load_s < 0) r.issues.push_back({"frequency", "h_load_s must be >= 0"});

    // Transmission.
    if (T.buses.empty()) r.issues.push_back({"transmission", "no buses"});
    for (size_t i = 0; i < T.buses.size(); ++i)
        for (size_t k = i + 1; k < T.buses.size(); ++k)
            if (T.buses[i].id == T.buses[k].id)
                r.issues.push_back({"transmission", "duplicate bus id '" + T.buses[i].id + "'"});
    if (!(T.s_base_mva > 0)) r.issues.push_back({"transmission", "s_base_mva must be > 0"});
    if (!(T.angle_min_rad > 0 && T.angle_min_rad <= M_PI))
        r.issues.push_back({"transmission", "angle_min_rad must lie in (0, pi]"});
    if (!(T.angle_max_rad > 0 && T.angle_max_rad <= M_PI))
        r.issues.push_back({"transmission", "angle_max_rad must lie in (0, pi]"});
    if (T.bus_index(T.reference_bus) < 0)
        r.issues.push_back({"transmission", "unknown reference bus '" + T.reference_bus + "'"});
    UnionFind uf(static_cast<int>(T.buses.size()));
    for (size_t li = 0; li < T.lines.size(); ++li) {
        const auto& l = T.lines[li];
        const std::string where = "transmission line " + l.from + "-" + l.to;
        int a = T.bus_index(l.from), b = T.bus_index(l.to);
        if (a < 0) r.issues.push_back({where, "unknown bus '" + l.from + "'"});
        if (b < 0) r.issues.push_back({where, "unknown bus '" + l.to + "'"});
        if (!(l.reactance_pu > 0)) r.issues.push_back({where, "reactance must be > 0"});
        if (!(l.flow_limit_mw > 0)) r.issues.push_back({where, "flow limit must be > 0"});
        if (a >= 0 && b >= 0) uf.unite(a, b);
    }
    if (!T.buses.empty()) {
        int root = uf.find(0);
        for (size_t i = 1; i < T.buses.size(); ++i)
            if (uf.find(static_cast<int>(i)) != root) {
                r.issues.push_back({"transmission", "graph is not connected"});
                break;
            }
    }
    for (const auto& g : T.generators) {
        const std::string where = "generator " + g.id;
        if (T.bus_index(g.bus) < 0) r.issues.push_back({where, "unknown bus '" + g.bus + "'"});
        if (!(0 <= g.p_min_mw && g.p_min_mw <= g.p_max_mw))
            r.issues.push_back({where, "requires 0 <= p_min <= p_max"});
        if (g.ramp_down_mw < 0 || g.ramp_up_mw < 0) r.issues.push_back({where, "ramps must be >= 0"});
        if (g.inertia_s < 0) r.issues.push_back({where, "inertia must be >= 0"});
        if (!(g.fr_time_s > 0)) r.issues.push_back({where, "fr_time_s must be > 0"});
    }
    for (const auto& u : T.res_units) {
        if (T.bus_index(u.bus) < 0)
            r.issues.push_back({"transmission res " + u.id, "unknown bus '" + u.bus + "'"});
    }

    // Distribution: radial tree rooted at the interface.
    for (size_t i = 0; i < D.buses.size(); ++i)
        for (size_t k = i + 1; k < D.buses.size(); ++k)
            if (D.buses[i].id == D.buses[k].id)
                r.issues.push_back({"distribution", "duplicate bus id '" + D.buses[i].id + "'"});
    if (D.bus_index(D.interface_bus) < 0)
        r.issues.push_back({"distribution", "unknown interface bus '" + D.interface_bus + "'"});
    if (T.bus_index(D.interface_ptn_bus) < 0)
        r.issues.push_back({"distribution", "unknown interface ptn bus '" + D.interface_ptn_bus + "'"});
    if (!(D.v_sq_min < D.v_sq_max))
        r.issues.push_back({"distribution", "v_sq_min must be < v_sq_max"});
    if (D.lines.size() + 1 != D.buses.size())
        r.issues.push_back({"distribution", "not radial: need |lines| = |buses| - 1"});
    UnionFind duf(static_cast<int>(D.buses.size()));
    for (const auto& l : D.lines) {
        const std::string where = "distribution line " + l.from + "-" + l.to;
        int a = D.bus_index(l.from), b = D.bus_index(l.to);
        if (a < 0) r.issues.push_back({where, "unknown bus '" + l.from + "'"});
        if (b < 0) r.issues.push_back({where, "unknown bus '" + l.to + "'"});
        if (l.r_pu < 0 || l.x_pu < 0) r.issues.push_back({where, "r and x must be >= 0"});
        if (!(l.ampacity_pu > 0)) r.issues.push_back({where, "ampacity must be > 0"});
        if (a >= 0 && b >= 0) {
            if (duf.find(a) == duf.find(b))
                r.issues.push_back({where, "creates a cycle"});
            duf.unite(a, b);
        }
    }
    if (!D.buses.empty()) {
        int root = duf.find(0);
        for (size_t i = 1; i < D.buses.size(); ++i)
            if (duf.find(static_cast<int>(i)) != root) {
                r.issues.push_back({"distribution", "graph is not connected"});
                break;
            }
    }
    for (const auto& g : D.dgs) {
        const std::string where = "dg " + g.id;
        if (D.bus_index(g.bus) < 0) r.issues.push_back({where, "unknown bus '" + g.bus + "'"});
        if (!(0 <= g.p_min_pu && g.p_min_pu <= g.p_max_pu))
            r.issues.push_back({where, "requires 0 <= p_min <= p_max"});
        if (!(g.s_max_pu > 0)) r.issues.push_back({where, "s_max must be > 0"});
        if (!(g.pf_min > 0 && g.pf_min <= 1)) r.issues.push_back({where, "pf_min must lie in (0,1]"});
    }
    for (const auto& u : D.res_units)
        if (D.bus_index(u.bus) < 0)
            r.issues.push_back({"distribution res " + u.id, "unknown bus '" + u.bus + "'"});
    for (const auto& st : D.stations) {
        const std::string where = "station " + st.id;
        if (D.bus_index(st.bus) < 0) r.issues.push_back({where, "unknown bus '" + st.bus + "'"});
        if (!(st.p_limit_mw > 0)) r.issues.push_back({where, "p_limit_mw must be > 0"});
    }

    // EVs.
    for (const auto& e : s.evs) {
        const std::string where = "ev " + e.id;
        if (!(e.e_min_kwh < e.e_max_kwh)) r.issues.push_back({where, "requires e_min < e_max"});
        if (!(e.p_max_kw > 0)) r.issues.push_back({where, "p_max_kw must be > 0"});
        if (!(e.p_max_kw <= e.s_max_kva)) r.issues.push_back({where, "requires p_max <= s_max"});
        if (!(e.efficiency > 0 && e.efficiency <= 1))
            r.issues.push_back({where, "efficiency must lie in (0,1]"});
        if (!(e.fr_time_s > 0)) r.issues.push_back({where, "fr_time_s must be > 0"});
        if (D.station_index(e.home_station) < 0)
            r.issues.push_back({where, "unknown station '" + e.home_station + "'"});
        if (!e.work_station.empty() && D.station_index(e.work_station) < 0)
            r.issues.push_back({where, "unknown station '" + e.work_station + "'"});
        check_trunc(e.availability.initial_energy_kwh, where + " initial_energy", r);
        check_trunc(e.availability.depart_step, where + " depart_step", r);
        check_trunc(e.availability.arrive_step, where + " arrive_step", r);
        check_trunc(e.availability.travel_energy_kwh, where + " travel_energy", r);
        if (e.availability.travel_steps < 1)
            r.issues.push_back({where, "travel_steps must be >= 1"});
        if (e.availability.initial_energy_kwh.low < e.e_min_kwh ||
            e.availability.initial_energy_kwh.high > e.e_max_kwh)
            r.issues.push_back({where, "initial energy bounds must lie within [e_min, e_max]"});
    }

    // Profiles: every reference resolves and has the full horizon length.
    auto check_ref = [&](const ProfileRef& ref, const std::string& where) {
        if (!ref.present()) return;
        auto it = s.profiles.find(ref.name);
        if (it == s.profiles.end()) {
            r.issues.push_back({where, "unknown profile '" + ref.name + "'"});
            return;
        }
        if (static_cast<int>(it->second.size()) != s.horizon_steps)
            r.issues.push_back({where, "profile length mismatch: '" + ref.name + "' has " +
                                           std::to_string(it->second.size()) + " steps, horizon is " +
                                           std::to_string(s.horizon_steps)});
    };
    for (const auto& b : T.buses) check_ref(b.demand, "transmission bus " + b.id);
    for (const auto& u : T.res_units) check_ref(u.output, "transmission res " + u.id);
    for (const auto& b : D.buses) {
        check_ref(b.demand_p, "distribution bus " + b.id);
        check_ref(b.demand_q, "distribution bus " + b.id);
    }
    for (const auto& u : D.res_units) check_ref(u.output, "distribution res " + u.id);

    return r;
}

}  // namespace evgrid
