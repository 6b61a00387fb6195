#include "evgrid/day_ahead.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"

using nlohmann::json;

namespace evgrid {

namespace {

constexpr double kKwhPerMwh = 1000.0;

// Hourly EV view for one day: connection fraction, majority station, travel
// energy, and initial energy.
struct EvDayView {
    std::vector<std::vector<double>> frac;        // [ev][hour]
    std::vector<std::vector<int>> station;        // [ev][hour], -1 disconnected
    std::vector<std::vector<double>> travel_mwh;  // [ev][hour]
    std::vector<double> e0_mwh;
};

EvDayView make_ev_view(const Scenario& s, int day) {
    const int hours = s.hours_per_day();
    const int evs = static_cast<int>(s.evs.size());
    EvDayView v;
    v.frac.assign(evs, std::vector<double>(hours, 0.0));
    v.station.assign(evs, std::vector<int>(hours, -1));
    v.travel_mwh.assign(evs, std::vector<double>(hours, 0.0));
    v.e0_mwh.resize(evs);
    for (int i = 0; i < evs; ++i) {
        AvailabilityProfile prof = s.availability_for(i, day);
        v.e0_mwh[i] = prof.initial_energy_kwh / kKwhPerMwh;
        for (int h = 0; h < hours; ++h) {
            int counts[2] = {0, 0};  // home, work
            int first_place = -1;
            for (int q = 0; q < 4; ++q) {
                const int t = 4 * h + q;
                v.travel_mwh[i][h] += prof.travel_energy_kwh[t] / kKwhPerMwh;
                if (!prof.connected[t]) continue;
                const int pl = prof.place[t] == EvPlace::Home ? 0 : 1;
                ++counts[pl];
                if (first_place < 0) first_place = pl;
            }
            const int connected = counts[0] + counts[1];
            v.frac[i][h] = connected / 4.0;
            if (connected == 0) continue;
            // Majority station; earliest place breaks ties.
            int pl = counts[0] > counts[1] ? 0 : counts[1] > counts[0] ? 1 : first_place;
            v.station[i][h] =
                s.station_of(s.evs[i], pl == 0 ? EvPlace::Home : EvPlace::Work);
        }
    }
    return v;
}

// TSO-visible net demand per transmission bus per hour: bus profiles plus the
// distribution feeder's net load at its interface bus.
std::vector<std::vector<double>> tso_demand(const Scenario& s, int day) {
    const int hours = s.hours_per_day();
    const int nb = static_cast<int>(s.transmission.buses.size());
    std::vector<std::vector<double>> demand(nb, std::vector<double>(hours, 0.0));
    for (int b = 0; b < nb; ++b) {
        if (!s.transmission.buses[b].demand.present()) continue;
        const auto& vec = s.profile(s.transmission.buses[b].demand.name);
        auto hourly = hourly_average(vec, day, s.steps_per_day);
        for (int h = 0; h < hours; ++h)
            demand[b][h] += s.transmission.buses[b].demand.scale * hourly[h];
    }
    const int ib = s.transmission.bus_index(s.distribution.interface_ptn_bus);
    for (const auto& bus : s.distribution.buses) {
        if (bus.demand_p.present()) {
            auto hourly = hourly_average(s.profile(bus.demand_p.name), day, s.steps_per_day);
            for (int h = 0; h < hours; ++h) demand[ib][h] += bus.demand_p.scale * hourly[h];
        }
    }
    for (const auto& res : s.distribution.res_units) {
        if (!res.output.present()) continue;
        auto hourly = hourly_average(s.profile(res.output.name), day, s.steps_per_day);
        for (int h = 0; h < hours; ++h) demand[ib][h] -= res.output.scale * hourly[h];
    }
    return demand;
}

}  // namespace

ConicProblem build_fc_opf(const Scenario& s, int day, FcOpfHandles& handles,
                          const FcOpfOptions& opt) {
    const auto& T = s.transmission;
    const auto& F = s.frequency;
    const int hours = s.hours_per_day();
    const int nb = static_cast<int>(T.buses.size());
    const int ng = static_cast<int>(T.generators.size());
    const int nk = static_cast<int>(s.distribution.stations.size());
    const int ne = static_cast<int>(s.evs.size());
    const double dt_h = 1.0;

    EvDayView ev = make_ev_view(s, day);
    auto demand = tso_demand(s, day);

    ConicProblem p;
    handles = FcOpfHandles{};
    handles.balance_row.assign(nb, std::vector<int>(hours, -1));
    handles.qss_row.assign(hours, -1);
    handles.nadir_row.assign(hours, -1);
    handles.p_gen.assign(ng, std::vector<int>(hours, -1));
    handles.r_gen.assign(ng, std::vector<int>(hours, -1));
    handles.y_gen.assign(ng, std::vector<int>(hours, -1));
    handles.p_eva.assign(nk, std::vector<int>(hours, -1));
    handles.h_sys.assign(hours, -1);
    handles.ev_fr.assign(ne, std::vector<int>(hours, -1));
    handles.ev_pc.assign(ne, std::vector<int>(hours, -1));
    handles.ev_pd.assign(ne, std::vector<int>(hours, -1));

    double t_gen_price = 0.0;
    for (const auto& g : T.generators) t_gen_price = std::max(t_gen_price, g.fr_time_s);
    if (t_gen_price <= 0.0) t_gen_price = 10.0;
    handles.t_gen_price_s = t_gen_price;

    auto hh = [](const std::string& base, int h) { return base + "[h" + std::to_string(h) + "]"; };

    // Variables.
    std::vector<std::vector<int>> theta(nb, std::vector<int>(hours));
    for (int b = 0; b < nb; ++b)
        for (int h = 0; h < hours; ++h)
            theta[b][h] = p.add_var(hh("theta:" + T.buses[b].id, h));
    const bool fixed = !opt.fixed_commitment.empty();
    if (fixed) handles.fixed_commit = opt.fixed_commitment;
    for (int g = 0; g < ng; ++g) {
        const auto& gen = T.generators[g];
        for (int h = 0; h < hours; ++h) {
            handles.p_gen[g][h] =
                p.add_var(hh("pgen:" + gen.id, h), gen.cost_gbp_per_kwh * kKwhPerMwh * dt_h);
            handles.r_gen[g][h] = p.add_var(hh("rgen:" + gen.id, h));
            if (!fixed) {
                handles.y_gen[g][h] = p.add_var(hh("ygen:" + gen.id, h));
                p.mark_binary(handles.y_gen[g][h]);
                p.add_box(handles.y_gen[g][h], 0.0, 1.0);
            }
        }
    }
    auto y_term = [&](LinExpr& e, int g, int h, double coef) {
        if (fixed)
            e.constant += coef * opt.fixed_commitment[g][h];
        else
            e.add(handles.y_gen[g][h], coef);
    };
    std::vector<std::vector<int>> p_res;
    for (size_t u = 0; u < T.res_units.size(); ++u) {
        p_res.emplace_back(hours);
        for (int h = 0; h < hours; ++h)
            p_res[u][h] = p.add_var(hh("pres:" + T.res_units[u].id, h));
    }
    for (int k = 0; k < nk; ++k)
        for (int h = 0; h < hours; ++h)
            handles.p_eva[k][h] = p.add_var(hh("peva:" + s.distribution.stations[k].id, h));
    for (int h = 0; h < hours; ++h) handles.h_sys[h] = p.add_var(hh("hsys", h));

    std::vector<std::vector<int>> e_var(ne, std::vector<int>(hours + 1));
    for (int i = 0; i < ne; ++i) {
        const auto& spec = s.evs[i];
        for (int h = 0; h <= hours; ++h) e_var[i][h] = p.add_var(hh("e:" + spec.id, h));
        for (int h = 0; h < hours; ++h) {
            handles.ev_pc[i][h] = p.add_var(hh("pc:" + spec.id, h));
            handles.ev_pd[i][h] = p.add_var(hh("pd:" + spec.id, h));
            handles.ev_fr[i][h] = p.add_var(hh("rtil:" + spec.id, h));
        }
    }

    // Generator constraints (Eqs. (4), (5), (17)).
    for (int g = 0; g < ng; ++g) {
        const auto& gen = T.generators[g];
        for (int h = 0; h < hours; ++h) {
            const int pg = handles.p_gen[g][h], rg = handles.r_gen[g][h];
            LinExpr pmin(0.0), pmax(0.0), rcap(0.0);
            pmin.add(pg, 1.0);
            y_term(pmin, g, h, -gen.p_min_mw);
            pmax.add(pg, -1.0);
            y_term(pmax, g, h, gen.p_max_mw);
            rcap.add(pg, -1.0).add(rg, -1.0);
            y_term(rcap, g, h, gen.p_max_mw);
            p.add_nonneg(hh("pmin:" + gen.id, h), pmin);
            p.add_nonneg(hh("pmax:" + gen.id, h), pmax);
            p.add_nonneg(hh("r>=0:" + gen.id, h), LinExpr(0.0).add(rg, 1.0));
            p.add_nonneg(hh("rcap:" + gen.id, h), rcap);
            if (h > 0) {
                const int pg0 = handles.p_gen[g][h - 1];
                LinExpr up(0.0), dn(0.0);
                up.add(pg, -1.0).add(pg0, 1.0);
                y_term(up, g, h, gen.ramp_up_mw);
                dn.add(pg, 1.0).add(pg0, -1.0);
                y_term(dn, g, h - 1, gen.ramp_down_mw);
                p.add_nonneg(hh("rampup:" + gen.id, h), up);
                p.add_nonneg(hh("rampdn:" + gen.id, h), dn);
            }
        }
    }

    // RES curtailment range.
    for (size_t u = 0; u < T.res_units.size(); ++u) {
        auto hourly = hourly_average(s.profile(T.res_units[u].output.name), day, s.steps_per_day);
        for (int h = 0; h < hours; ++h)
            p.add_box(p_res[u][h], 0.0,
                      std::max(0.0, T.res_units[u].output.scale * hourly[h]));
    }

    // Aggregator definition and capacity (Eq. (6), symmetric).
    for (int k = 0; k < nk; ++k) {
        const double cap = s.distribution.stations[k].p_limit_mw;
        for (int h = 0; h < hours; ++h) {
            LinExpr def(0.0);
            def.add(handles.p_eva[k][h], 1.0);
            for (int i = 0; i < ne; ++i) {
                if (ev.station[i][h] != k) continue;
                def.add(handles.ev_pc[i][h], -1.0).add(handles.ev_pd[i][h], -1.0);
            }
            p.add_eq(hh("evadef:" + s.distribution.stations[k].id, h), def);
            p.add_box(handles.p_eva[k][h], -cap, cap);
        }
    }

    // EV fleet (Eqs. (9)-(12), (18)) at hourly resolution; the binary
    // charge/discharge indicator is relaxed, leaving pc - pd <= avail*pmax.
    for (int i = 0; i < ne; ++i) {
        const auto& spec = s.evs[i];
        const double pmax = spec.p_max_kw / kKwhPerMwh;
        const double emin = spec.e_min_kwh / kKwhPerMwh;
        const double emax = spec.e_max_kwh / kKwhPerMwh;
        p.fix_var(e_var[i][0], ev.e0_mwh[i]);
        for (int h = 0; h < hours; ++h) {
            const double avail = ev.frac[i][h] * pmax;
            const int pc = handles.ev_pc[i][h], pd = handles.ev_pd[i][h],
                      fr = handles.ev_fr[i][h];
            p.add_box(pc, 0.0, avail);
            p.add_box(pd, -avail, 0.0);
            p.add_nonneg(hh("chgsplit:" + spec.id, h),
                         LinExpr(avail).add(pc, -1.0).add(pd, 1.0));
            p.add_nonneg(hh("rtil>=0:" + spec.id, h), LinExpr(0.0).add(fr, 1.0));
            p.add_nonneg(hh("rtilcap:" + spec.id, h),
                         LinExpr(avail).add(pc, 1.0).add(pd, 1.0).add(fr, -1.0));
            LinExpr rec(ev.travel_mwh[i][h]);
            rec.add(e_var[i][h + 1], 1.0).add(e_var[i][h], -1.0);
            rec.add(pc, -spec.efficiency * dt_h).add(pd, -dt_h / spec.efficiency);
            p.add_eq(hh("energy:" + spec.id, h), rec);
            p.add_box(e_var[i][h + 1], emin, emax);
        }
        // Energy-neutral day: finish at least as full as the start.
        p.add_nonneg("eterm:" + spec.id,
                     LinExpr(-ev.e0_mwh[i]).add(e_var[i][hours], 1.0));
    }

    // Network: reference angle, flow and angle-difference limits, balance.
    const int ref = T.bus_index(T.reference_bus);
    for (int h = 0; h < hours; ++h)
        p.add_eq(hh("thetaref", h), LinExpr(0.0).add(theta[ref][h], 1.0));
    for (const auto& line : T.lines) {
        const int f = T.bus_index(line.from), t = T.bus_index(line.to);
        const double binv = T.s_base_mva / line.reactance_pu;
        for (int h = 0; h < hours; ++h) {
            LinExpr flow(0.0);
            flow.add(theta[f][h], binv).add(theta[t][h], -binv);
            LinExpr lo(line.flow_limit_mw);
            lo.add(theta[f][h], -binv).add(theta[t][h], binv);
            LinExpr hi(line.flow_limit_mw);
            hi.add(theta[f][h], binv).add(theta[t][h], -binv);
            p.add_nonneg(hh("flow+:" + line.from + "-" + line.to, h), hi);
            p.add_nonneg(hh("flow-:" + line.from + "-" + line.to, h), lo);
            LinExpr alo(T.angle_min_rad);
            alo.add(theta[f][h], -1.0).add(theta[t][h], 1.0);
            LinExpr ahi(T.angle_max_rad);
            ahi.add(theta[f][h], 1.0).add(theta[t][h], -1.0);
            p.add_nonneg(hh("ang+:" + line.from + "-" + line.to, h), ahi);
            p.add_nonneg(hh("ang-:" + line.from + "-" + line.to, h), alo);
        }
    }
    const int ibus = T.bus_index(s.distribution.interface_ptn_bus);
    for (int b = 0; b < nb; ++b) {
        for (int h = 0; h < hours; ++h) {
            LinExpr bal(-demand[b][h]);
            for (int g = 0; g < ng; ++g)
                if (T.bus_index(T.generators[g].bus) == b) bal.add(handles.p_gen[g][h], 1.0);
            for (size_t u = 0; u < T.res_units.size(); ++u)
                if (T.bus_index(T.res_units[u].bus) == b) bal.add(p_res[u][h], 1.0);
            if (b == ibus)
                for (int k = 0; k < nk; ++k) bal.add(handles.p_eva[k][h], -1.0);
            for (const auto& line : T.lines) {
                const int f = T.bus_index(line.from), t = T.bus_index(line.to);
                const double binv = T.s_base_mva / line.reactance_pu;
                if (f == b) bal.add(theta[f][h], -binv).add(theta[t][h], binv);
                if (t == b) bal.add(theta[f][h], binv).add(theta[t][h], -binv);
            }
            handles.balance_row[b][h] = p.add_eq(hh("bal:" + T.buses[b].id, h), bal);
        }
    }

    // System inertia definition (Eq. (13)).
    for (int h = 0; h < hours; ++h) {
        LinExpr def(F.h_load_s * F.p_loss_max_mw);
        def.add(handles.h_sys[h], 1.0);
        for (int g = 0; g < ng; ++g)
            y_term(def, g, h, -T.generators[g].inertia_s * T.generators[g].p_max_mw);
        p.add_eq(hh("hsysdef", h), def);
    }

    if (opt.include_frequency) {
        const double dfmax = F.delta_f_max_hz;
        for (int h = 0; h < hours; ++h) {
            const double exo = h < static_cast<int>(opt.exogenous_fr_mw.size())
                                   ? opt.exogenous_fr_mw[h]
                                   : 0.0;
            // RoCoF (Eq. (14)) as a linear inertia floor.
            p.add_nonneg(hh("rocof", h),
                         LinExpr(-F.f0_hz * F.p_loss_max_mw / (2.0 * F.rocof_max_hz_s))
                             .add(handles.h_sys[h], 1.0));
            // Quasi-steady-state reserve adequacy (Eq. (15)).
            LinExpr qss(exo - F.p_loss_max_mw);
            for (int g = 0; g < ng; ++g) qss.add(handles.r_gen[g][h], 1.0);
            for (int i = 0; i < ne; ++i) qss.add(handles.ev_fr[i][h], 1.0);
            handles.qss_row[h] = p.add_nonneg(hh("qss", h), qss);
            // Nadir (Eq. (16)) as a rotated cone 2*s1*s2 >= s3^2 with
            //   s1 = H/f0 - (sum rtil * T_ev)/(4 dfmax)
            //   s2 = (sum r_gen) / T_gen
            //   s3 = (Ploss - sum rtil) * k3.
            LinExpr s1(-exo * F.price_t_ev_s / (4.0 * dfmax));
            s1.add(handles.h_sys[h], 1.0 / F.f0_hz);
            for (int i = 0; i < ne; ++i)
                s1.add(handles.ev_fr[i][h], -s.evs[i].fr_time_s / (4.0 * dfmax));
            // Per-generator delivery times in the reserve-rate sum; equals the
            // printed single-T form when the fleet is uniform.
            LinExpr s2(0.0);
            for (int g = 0; g < ng; ++g)
                s2.add(handles.r_gen[g][h], 1.0 / T.generators[g].fr_time_s);
            const double k3 = opt.nadir_rhs_literal
                                  ? std::sqrt(t_gen_price / (2.0 * dfmax))
                                  : std::sqrt(1.0 / (2.0 * dfmax));
            LinExpr s3((F.p_loss_max_mw - exo) * k3);
            for (int i = 0; i < ne; ++i) s3.add(handles.ev_fr[i][h], -k3);
            handles.nadir_row[h] = p.add_rsoc(hh("nadir", h), {s1, s2, s3});
        }
    }

    return p;
}

DayAheadSchedule extract_schedule(const Scenario& s, int day, const FcOpfHandles& handles,
                                  const ConicProblem& p, const ConicSolution& sol) {
    if (sol.status != SolveStatus::Optimal)
        throw SolverError("extract_schedule: solution status is " + to_string(sol.status));
    const int hours = s.hours_per_day();
    const auto& F = s.frequency;
    DayAheadSchedule out;
    out.day = day;
    out.hours = hours;
    out.objective_gbp = sol.objective;

    const int nb = static_cast<int>(s.transmission.buses.size());
    out.lmp_gbp_per_kwh.assign(nb, std::vector<double>(hours, 0.0));
    for (int b = 0; b < nb; ++b)
        for (int h = 0; h < hours; ++h)
            out.lmp_gbp_per_kwh[b][h] = sol.y[handles.balance_row[b][h]] / kKwhPerMwh;

    const int ne = static_cast<int>(s.evs.size());
    out.ev_fr_kw.assign(ne, std::vector<double>(hours, 0.0));
    for (int i = 0; i < ne; ++i)
        for (int h = 0; h < hours; ++h)
            out.ev_fr_kw[i][h] = std::max(0.0, sol.x[handles.ev_fr[i][h]] * kKwhPerMwh);

    const int ng = static_cast<int>(s.transmission.generators.size());
    out.gen_commit.assign(ng, std::vector<double>(hours, 0.0));
    out.gen_dispatch_mw.assign(ng, std::vector<double>(hours, 0.0));
    out.gen_reserve_mw.assign(ng, std::vector<double>(hours, 0.0));
    for (int g = 0; g < ng; ++g)
        for (int h = 0; h < hours; ++h) {
            out.gen_commit[g][h] = handles.fixed_commit.empty()
                                       ? sol.x[handles.y_gen[g][h]]
                                       : handles.fixed_commit[g][h];
            out.gen_dispatch_mw[g][h] = sol.x[handles.p_gen[g][h]];
            out.gen_reserve_mw[g][h] = sol.x[handles.r_gen[g][h]];
        }

    const int nk = static_cast<int>(s.distribution.stations.size());
    out.station_power_mw.assign(nk, std::vector<double>(hours, 0.0));
    for (int k = 0; k < nk; ++k)
        for (int h = 0; h < hours; ++h)
            out.station_power_mw[k][h] = sol.x[handles.p_eva[k][h]];

    out.inertia_mws.assign(hours, 0.0);
    for (int h = 0; h < hours; ++h) out.inertia_mws[h] = sol.x[handles.h_sys[h]];

    out.fr_price_gbp_per_kwh.assign(hours, 0.0);
    out.mu_na.assign(hours, 0.0);
    out.lambda_na1.assign(hours, 0.0);
    out.lambda_na2.assign(hours, 0.0);
    out.lambda_qss.assign(hours, 0.0);
    for (int h = 0; h < hours; ++h) {
        if (handles.qss_row[h] < 0) continue;
        const double z_qss = sol.z[handles.qss_row[h]];
        const int nr = handles.nadir_row[h];
        const double z1 = sol.z[nr], z2 = sol.z[nr + 1], z3 = sol.z[nr + 2];
        // Map the rotated-cone dual to the SOC-form triplet of Eq. (19):
        // mu = (z1+z2)/2, l1 = (z2-z1)/2, l2 = -z3/sqrt(2); then Eq. (20).
        const double mu = 0.5 * (z1 + z2);
        const double l1 = 0.5 * (z2 - z1);
        const double l2 = -z3 / std::sqrt(2.0);
        out.mu_na[h] = mu / kKwhPerMwh;
        out.lambda_na1[h] = l1 / kKwhPerMwh;
        out.lambda_na2[h] = l2 / kKwhPerMwh;
        out.lambda_qss[h] = z_qss / kKwhPerMwh;
        const double fr_mwh = (l1 - mu) * F.price_t_ev_s / (4.0 * F.delta_f_max_hz) +
                              l2 / std::sqrt(F.delta_f_max_hz) + z_qss;
        out.fr_price_gbp_per_kwh[h] = fr_mwh / kKwhPerMwh;
    }
    (void)p;
    return out;
}

namespace {

std::string diagnose(const ConicProblem& p, const ConicSolution& sol) {
    // Point at the constraint family with the largest certificate weight.
    std::string worst = "unknown";
    double mag = 0.0;
    for (int r = 0; r < sol.y.size(); ++r)
        if (std::abs(sol.y[r]) > mag) {
            mag = std::abs(sol.y[r]);
            worst = p.eq_label(r);
        }
    for (int r2 = 0; r2 < sol.z.size(); ++r2)
        if (std::abs(sol.z[r2]) > mag) {
            mag = std::abs(sol.z[r2]);
            worst = p.cone_label(r2);
        }
    return worst;
}

}  // namespace

DayAheadSchedule solve_day_ahead(const Scenario& s, int day, const FcOpfOptions& opt,
                                 const Tolerances& tol) {
    const int ng = static_cast<int>(s.transmission.generators.size());
    const int hours = s.hours_per_day();

    FcOpfHandles relax_handles;
    ConicProblem relaxed = build_fc_opf(s, day, relax_handles, opt);
    ConicSolution relax_sol = solve(relaxed, tol);
    if (relax_sol.status != SolveStatus::Optimal) {
        throw SolverError("day-ahead stage is " + to_string(relax_sol.status) +
                          "; strongest certificate on constraint family '" +
                          diagnose(relaxed, relax_sol) + "'");
    }
    std::vector<std::vector<double>> commit(ng, std::vector<double>(hours, 1.0));
    for (int g = 0; g < ng; ++g)
        for (int h = 0; h < hours; ++h)
            commit[g][h] = std::round(relax_sol.x[relax_handles.y_gen[g][h]]);

    // Price the convex restriction with the committed units as constants.
    FcOpfOptions fixed_opt = opt;
    fixed_opt.fixed_commitment = commit;
    FcOpfHandles handles;
    ConicProblem p = build_fc_opf(s, day, handles, fixed_opt);
    ConicSolution sol = solve(p, tol);
    if (sol.status != SolveStatus::Optimal) {
        // Rounding can cut feasibility; branch-and-bound decides the
        // commitments, then the restriction is rebuilt for pricing.
        BinarySolveResult bb = solve_with_binaries(relaxed, BinaryStrategy::BranchBound, 500, tol);
        if (bb.solution.status != SolveStatus::Optimal) {
            throw SolverError("day-ahead stage is " + to_string(bb.solution.status) +
                              "; strongest certificate on constraint family '" +
                              diagnose(relaxed, bb.solution) + "'");
        }
        const auto& bins = relaxed.binary_vars();
        for (int g = 0, k = 0; g < ng; ++g)
            for (int h = 0; h < hours; ++h, ++k) {
                // binaries were marked in (g, h) order
                commit[g][h] = bb.committed[k];
                (void)bins;
            }
        fixed_opt.fixed_commitment = commit;
        p = build_fc_opf(s, day, handles, fixed_opt);
        sol = solve(p, tol);
        if (sol.status != SolveStatus::Optimal)
            throw SolverError("day-ahead pricing stage is " + to_string(sol.status) +
                              "; strongest certificate on constraint family '" +
                              diagnose(p, sol) + "'");
    }
    return extract_schedule(s, day, handles, p, sol);
}

// ---------------------------------------------------------------------------
// Serialization

std::string schedule_to_json_text(const DayAheadSchedule& sched, const Scenario& s) {
    json j;
    j["day"] = sched.day;
    j["hours"] = sched.hours;
    j["objective_gbp"] = sched.objective_gbp;
    j["lmp_gbp_per_kwh"] = json::object();
    for (size_t b = 0; b < s.transmission.buses.size(); ++b)
        j["lmp_gbp_per_kwh"][s.transmission.buses[b].id] = sched.lmp_gbp_per_kwh[b];
    j["ev_fr_kw"] = json::object();
    for (size_t i = 0; i < s.evs.size(); ++i) j["ev_fr_kw"][s.evs[i].id] = sched.ev_fr_kw[i];
    j["fr_price_gbp_per_kwh"] = sched.fr_price_gbp_per_kwh;
    j["gen_commit"] = json::object();
    for (size_t g = 0; g < s.transmission.generators.size(); ++g) {
        const std::string& id = s.transmission.generators[g].id;
        j["gen_commit"][id] = sched.gen_commit[g];
        j["gen_dispatch_mw"][id] = sched.gen_dispatch_mw[g];
        j["gen_reserve_mw"][id] = sched.gen_reserve_mw[g];
    }
    j["station_power_mw"] = json::object();
    for (size_t k = 0; k < s.distribution.stations.size(); ++k)
        j["station_power_mw"][s.distribution.stations[k].id] = sched.station_power_mw[k];
    j["inertia_mws"] = sched.inertia_mws;
    j["duals"] = json{{"mu_na", sched.mu_na},
                      {"lambda_na1", sched.lambda_na1},
                      {"lambda_na2", sched.lambda_na2},
                      {"lambda_qss", sched.lambda_qss}};
    // Index order mirrors the scenario; keep it for the loader.
    json order;
    order["buses"] = json::array();
    for (const auto& b : s.transmission.buses) order["buses"].push_back(b.id);
    order["evs"] = json::array();
    for (const auto& e : s.evs) order["evs"].push_back(e.id);
    order["gens"] = json::array();
    for (const auto& g : s.transmission.generators) order["gens"].push_back(g.id);
    order["stations"] = json::array();
    for (const auto& st : s.distribution.stations) order["stations"].push_back(st.id);
    j["order"] = order;
    return j.dump(1);
}

DayAheadSchedule schedule_from_json_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ParseError(std::string("schedule: invalid json: ") + e.what());
    }
    DayAheadSchedule out;
    out.day = j.at("day").get<int>();
    out.hours = j.at("hours").get<int>();
    out.objective_gbp = j.value("objective_gbp", 0.0);
    const auto& order = j.at("order");
    for (const auto& id : order.at("buses"))
        out.lmp_gbp_per_kwh.push_back(
            j.at("lmp_gbp_per_kwh").at(id.get<std::string>()).get<std::vector<double>>());
    for (const auto& id : order.at("evs"))
        out.ev_fr_kw.push_back(j.at("ev_fr_kw").at(id.get<std::string>()).get<std::vector<double>>());
    out.fr_price_gbp_per_kwh = j.at("fr_price_gbp_per_kwh").get<std::vector<double>>();
    for (const auto& id : order.at("gens")) {
        out.gen_commit.push_back(j.at("gen_commit").at(id.get<std::string>()).get<std::vector<double>>());
        out.gen_dispatch_mw.push_back(
            j.at("gen_dispatch_mw").at(id.get<std::string>()).get<std::vector<double>>());
        out.gen_reserve_mw.push_back(
            j.at("gen_reserve_mw").at(id.get<std::string>()).get<std::vector<double>>());
    }
    for (const auto& id : order.at("stations"))
        out.station_power_mw.push_back(
            j.at("station_power_mw").at(id.get<std::string>()).get<std::vector<double>>());
    out.inertia_mws = j.at("inertia_mws").get<std::vector<double>>();
    if (j.contains("duals")) {
        out.mu_na = j["duals"].value("mu_na", std::vector<double>{});
        out.lambda_na1 = j["duals"].value("lambda_na1", std::vector<double>{});
        out.lambda_na2 = j["duals"].value("lambda_na2", std::vector<double>{});
        out.lambda_qss = j["duals"].value("lambda_qss", std::vector<double>{});
    }
    return out;
}

void save_schedule(const DayAheadSchedule& sched, const Scenario& s, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw ParseError("schedule: cannot write '" + path + "'");
    f << schedule_to_json_text(sched, s);
}

DayAheadSchedule load_schedule(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ParseError("schedule: cannot open '" + path + "'");
    std::stringstream ss;
    ss << f.rdbuf();
    return schedule_from_json_text(ss.str());
}

void write_price_csv(const DayAheadSchedule& sched, const Scenario& s, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw ParseError("schedule: cannot write '" + path + "'");
    f << "hour,fr_price_gbp_per_kwh";
    for (const auto& b : s.transmission.buses) f << ",lmp_" << b.id;
    f << "\n";
    f.precision(10);
    for (int h = 0; h < sched.hours; ++h) {
        f << h << "," << sched.fr_price_gbp_per_kwh[h];
        for (size_t b = 0; b < s.transmission.buses.size(); ++b)
            f << "," << sched.lmp_gbp_per_kwh[b][h];
        f << "\n";
    }
}

}  // namespace evgrid
