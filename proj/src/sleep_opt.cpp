#include "mndt/sleep_opt.hpp"

#include "mndt/parallel.hpp"
#include "mndt/rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <stdexcept>

namespace mndt::sleep_opt {

const char* to_string(CellStatus s) {
    switch (s) {
    case CellStatus::On: return "on";
    case CellStatus::Sleeping: return "sleeping";
    case CellStatus::Off: return "off";
    }
    return "?";
}

void EnergyModel::check() const {
    if (!(p_on_static_w >= 0 && p_on_slope_w >= 0 && p_sleep_w >= 0 && p_overhead_w >= 0 && beta_onoff >= 0 &&
          beta_sleep >= 0))
        throw std::invalid_argument("energy model terms must be non-negative");
    if (!(p_sleep_w < p_on_static_w)) throw std::invalid_argument("sleep power must be below static on power");
}

double Topology::grid_capacity(std::size_t g) const {
    double c = 0.0;
    for (int id : grid_cells[g]) c += cells[std::size_t(id)].capacity_bps;
    return c;
}

void Topology::finalize(std::size_t n_sites, std::size_t n_grids) {
    site_cells.assign(n_sites, {});
    grid_cells.assign(n_grids, {});
    for (std::size_t i = 0; i < cells.size(); ++i) {
        const Cell& c = cells[i];
        if (c.site < 0 || std::size_t(c.site) >= n_sites || c.grid < 0 || std::size_t(c.grid) >= n_grids)
            throw std::invalid_argument("cell references an unknown site or grid");
        if (!(c.capacity_bps > 0.0)) throw std::invalid_argument("cell capacity must be positive");
        site_cells[std::size_t(c.site)].push_back(int(i));
        grid_cells[std::size_t(c.grid)].push_back(int(i));
    }
    for (auto& ids : grid_cells)
        std::sort(ids.begin(), ids.end(), [&](int a, int b) {
            const Cell& x = cells[std::size_t(a)];
            const Cell& y = cells[std::size_t(b)];
            if (x.capacity_bps != y.capacity_bps) return x.capacity_bps > y.capacity_bps;
            if (x.site != y.site) return x.site < y.site;
            return a < b;
        });
}

Topology make_topology(const Scenario& scenario, const GridPartition& grids, int cells_per_site,
                       double capacity_bps) {
    if (cells_per_site < 1) throw std::invalid_argument("cells per site must be >= 1");
    if (grids.site_grid.size() != scenario.sites.size())
        throw std::invalid_argument("grid partition does not match the scenario");
    Topology t;
    for (std::size_t s = 0; s < scenario.sites.size(); ++s)
        for (int k = 0; k < cells_per_site; ++k) t.cells.push_back({int(s), grids.site_grid[s], capacity_bps});
    t.finalize(scenario.sites.size(), grids.size());
    return t;
}

LoadAssignment grid_load_assignment(const Topology& topo, std::span<const double> grid_demand_bps,
                                    const Statuses& statuses) {
    if (grid_demand_bps.size() != topo.n_grids() || statuses.size() != topo.n_cells())
        throw std::invalid_argument("load assignment size mismatch");
    LoadAssignment out{std::vector<double>(topo.n_cells(), 0.0), std::vector<double>(topo.n_grids(), 0.0)};
    for (std::size_t g = 0; g < topo.n_grids(); ++g) {
        const double d = grid_demand_bps[g];
        double cap = 0.0;
        for (int id : topo.grid_cells[g])
            if (statuses[std::size_t(id)] == CellStatus::On) cap += topo.cells[std::size_t(id)].capacity_bps;
        if (cap <= 0.0) {
            out.unserved_bps[g] = d;
            continue;
        }
        for (int id : topo.grid_cells[g])
            if (statuses[std::size_t(id)] == CellStatus::On)
                out.load_bps[std::size_t(id)] = d * topo.cells[std::size_t(id)].capacity_bps / cap;
        out.unserved_bps[g] = std::max(0.0, d - cap);
    }
    return out;
}

bool mask_demand_satisfiable(const Topology& topo, int grid, int cell, const Statuses& statuses,
                             double grid_demand_bps) {
    double cap = 0.0;
    for (int id : topo.grid_cells[std::size_t(grid)])
        if (id != cell && statuses[std::size_t(id)] == CellStatus::On) cap += topo.cells[std::size_t(id)].capacity_bps;
    return cap >= grid_demand_bps;
}

bool mask_bs_closable(const Topology& topo, int cell, const Statuses& statuses) {
    for (int id : topo.site_cells[std::size_t(topo.cells[std::size_t(cell)].site)])
        if (id != cell && statuses[std::size_t(id)] != CellStatus::Off) return false;
    return true;
}

bool site_on(const Topology& topo, int site, const Statuses& statuses, const EnergyModel& model) {
    for (int id : topo.site_cells[std::size_t(site)]) {
        const CellStatus s = statuses[std::size_t(id)];
        if (s == CellStatus::On || (s == CellStatus::Sleeping && model.sleeping_keeps_site_on)) return true;
    }
    return false;
}

double network_power_w(const Topology& topo, const Statuses& statuses, std::span<const double> load_bps,
                       const EnergyModel& model) {
    if (statuses.size() != topo.n_cells() || load_bps.size() != topo.n_cells())
        throw std::invalid_argument("power evaluation size mismatch");
    double p = 0.0;
    for (std::size_t i = 0; i < topo.n_cells(); ++i) {
        switch (statuses[i]) {
        case CellStatus::On:
            p += model.p_on_static_w + model.p_on_slope_w * std::min(1.0, load_bps[i] / topo.cells[i].capacity_bps);
            break;
        case CellStatus::Sleeping: p += model.p_sleep_w; break;
        case CellStatus::Off: break;
        }
    }
    for (std::size_t s = 0; s < topo.n_sites(); ++s)
        if (site_on(topo, int(s), statuses, model)) p += model.p_overhead_w;
    return p;
}

double switch_cost(const Statuses& prev, const Statuses& cur, const EnergyModel& model) {
    if (prev.size() != cur.size()) throw std::invalid_argument("status vectors differ in size");
    double c = 0.0;
    for (std::size_t i = 0; i < cur.size(); ++i) {
        if (prev[i] == cur[i]) continue;
        const bool onoff = (prev[i] == CellStatus::On && cur[i] == CellStatus::Off) ||
                           (prev[i] == CellStatus::Off && cur[i] == CellStatus::On);
        c += onoff ? model.beta_onoff : model.beta_sleep;
    }
    return c;
}

int switch_count(const Statuses& prev, const Statuses& cur) {
    if (prev.size() != cur.size()) throw std::invalid_argument("status vectors differ in size");
    int n = 0;
    for (std::size_t i = 0; i < cur.size(); ++i) n += prev[i] != cur[i];
    return n;
}

namespace {

// Smallest k with the first k cells covering `need`; all cells when none does.
std::size_t prefix_count(const Topology& topo, const std::vector<int>& ids, double need) {
    if (need <= 0.0) return 0;
    double cap = 0.0;
    for (std::size_t k = 0; k < ids.size(); ++k) {
        cap += topo.cells[std::size_t(ids[k])].capacity_bps;
        if (cap >= need) return k + 1;
    }
    return ids.size();
}

template <typename Decide>
Statuses per_grid(const Topology& topo, std::span<const double> demand, const Statuses& prev, Decide&& decide) {
    if (demand.size() != topo.n_grids() || prev.size() != topo.n_cells())
        throw std::invalid_argument("controller input size mismatch");
    Statuses next = prev;
    parallel_chunks(topo.n_grids(), [&](std::size_t b, std::size_t e) {
        for (std::size_t g = b; g < e; ++g) decide(g, next);
    }, 8);
    return next;
}

} // namespace

Statuses GreedySleepPolicy::decide(const Topology& topo, std::span<const double> demand, const Statuses& prev) const {
    return per_grid(topo, demand, prev, [&](std::size_t g, Statuses& next) {
        const auto& ids = topo.grid_cells[g];
        const double d = demand[g];
        std::size_t current = 0;
        for (int id : ids) current += prev[std::size_t(id)] == CellStatus::On;

        std::size_t k = current;
        const std::size_t up = prefix_count(topo, ids, d * (1.0 + h_));
        if (up > current) {
            k = up;
        } else {
            const std::size_t down = prefix_count(topo, ids, d * (1.0 + 2.0 * h_));
            if (down < current) k = down;
        }

        for (std::size_t i = 0; i < k; ++i) next[std::size_t(ids[i])] = CellStatus::On;
        // Deactivate from the small end; a candidate the grid cannot spare stays on.
        for (std::size_t i = ids.size(); i-- > k;) {
            const int id = ids[i];
            if (next[std::size_t(id)] != CellStatus::On) continue;
            if (mask_demand_satisfiable(topo, int(g), id, next, d)) next[std::size_t(id)] = CellStatus::Sleeping;
        }
        for (std::size_t i = k; i < ids.size(); ++i) {
            const int id = ids[i];
            if (next[std::size_t(id)] == CellStatus::On) continue;
            bool sibling_on = false;
            for (int sib : topo.site_cells[std::size_t(topo.cells[std::size_t(id)].site)])
                sibling_on |= next[std::size_t(sib)] == CellStatus::On;
            next[std::size_t(id)] = sibling_on ? CellStatus::Sleeping : CellStatus::Off;
        }
    });
}

Statuses MinimalCellsPolicy::decide(const Topology& topo, std::span<const double> demand, const Statuses& prev) const {
    return per_grid(topo, demand, prev, [&](std::size_t g, Statuses& next) {
        const auto& ids = topo.grid_cells[g];
        const std::size_t k = prefix_count(topo, ids, demand[g]);
        for (std::size_t i = 0; i < ids.size(); ++i)
            next[std::size_t(ids[i])] = i < k ? CellStatus::On : CellStatus::Off;
    });
}

double WeeklyTraffic::total(int s) const {
    double t = 0.0;
    for (double d : slot(s)) t += d;
    return t;
}

namespace {

double raw_shape(double hour) {
    const double w = 2.0 * std::numbers::pi / 24.0;
    return 0.5 * (1.0 - std::cos(w * (hour - 4.0))) * (0.8 + 0.2 * std::cos(2.0 * w * (hour - 11.0)));
}

} // namespace

double diurnal_shape(double hour) {
    static const double peak = [] {
        double m = 0.0;
        for (int i = 0; i < 24 * 60; ++i) m = std::max(m, raw_shape(i / 60.0));
        return m;
    }();
    return 0.1 + 0.9 * std::min(1.0, raw_shape(hour) / peak);
}

double weekday_factor(int day) {
    switch (((day % 7) + 7) % 7) {
    case 5: return 0.85;
    case 6: return 0.8;
    default: return 1.0;
    }
}

WeeklyTraffic synth_weekly_traffic(std::uint64_t seed, const Topology& topo, int days) {
    if (days < 1) throw std::invalid_argument("day count must be >= 1");
    const int slots = days * kSlotsPerDay;
    WeeklyTraffic w;
    w.grids = topo.n_grids();
    w.demand_bps.assign(std::size_t(slots) * w.grids, 0.0);
    for (std::size_t g = 0; g < w.grids; ++g) {
        const double cap = topo.grid_capacity(g);
        if (cap <= 0.0) continue;
        const double level = 0.35 + 0.3 * rng::key_to_unit(rng::stream_key(seed, "traffic-level", g));
        for (int s = 0; s < slots; ++s) {
            const double hour = (s % kSlotsPerDay + 0.5) * kSlotHours;
            const double noise = 1.0 + 0.05 * rng::hashed_standard_normal(rng::stream_key(seed, "traffic-noise", g,
                                                                                         std::uint64_t(s)));
            w.demand_bps[std::size_t(s) * w.grids + g] =
                std::max(0.0, cap * level * diurnal_shape(hour) * weekday_factor(s / kSlotsPerDay) * noise);
        }
    }
    return w;
}

namespace {

int resolve_last(const WeeklyTraffic& traffic, int last) {
    const int n = traffic.grids ? int(traffic.demand_bps.size() / traffic.grids) : 0;
    return last < 0 ? n : std::min(last, n);
}

int clip_last(std::size_t n, int last) { return last < 0 ? int(n) : std::min(last, int(n)); }

} // namespace

double PolicyRun::energy_wh(int first, int last) const {
    double e = 0.0;
    for (int s = first; s < clip_last(slots.size(), last); ++s) e += slots[std::size_t(s)].energy_wh;
    return e;
}

int PolicyRun::switches(int first, int last) const {
    int n = 0;
    for (int s = first; s < clip_last(slots.size(), last); ++s) n += slots[std::size_t(s)].switches;
    return n;
}

double PolicyRun::switch_cost(int first, int last) const {
    double c = 0.0;
    for (int s = first; s < clip_last(slots.size(), last); ++s) c += slots[std::size_t(s)].switch_cost;
    return c;
}

PolicyRun run_policy(const SleepController& policy, const Topology& topo, const WeeklyTraffic& traffic,
                     const EnergyModel& model, int first_slot, int last_slot) {
    model.check();
    if (traffic.grids != topo.n_grids()) throw std::invalid_argument("traffic does not match the topology");
    const int last = resolve_last(traffic, last_slot);
    PolicyRun run{policy.name(), {}};
    Statuses prev(topo.n_cells(), CellStatus::On);
    for (int s = first_slot; s < last; ++s) {
        const auto demand = traffic.slot(s);
        SlotResult r;
        r.statuses = policy.decide(topo, demand, prev);
        const LoadAssignment loads = grid_load_assignment(topo, demand, r.statuses);
        r.power_w = network_power_w(topo, r.statuses, loads.load_bps, model);
        r.energy_wh = r.power_w * kSlotHours;
        for (std::size_t g = 0; g < topo.n_grids(); ++g) {
            r.unserved_bps += loads.unserved_bps[g];
            r.capacity_shortfall_bps += std::max(0.0, demand[g] - topo.grid_capacity(g));
        }
        r.switches = switch_count(prev, r.statuses);
        r.switch_cost = sleep_opt::switch_cost(prev, r.statuses, model);
        prev = r.statuses;
        run.slots.push_back(std::move(r));
    }
    return run;
}

Tuning tune_hysteresis(const Topology& topo, const WeeklyTraffic& traffic, const EnergyModel& model,
                       std::span<const double> candidates) {
    if (candidates.empty()) throw std::invalid_argument("no hysteresis candidates");
    Tuning t;
    double best = 0.0;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        const PolicyRun day1 = run_policy(GreedySleepPolicy(candidates[i]), topo, traffic, model, 0, kSlotsPerDay);
        const double obj = day1.energy_wh() + day1.switch_cost();
        t.objective.push_back(obj);
        if (i == 0 || obj < best || (obj == best && candidates[i] < t.hysteresis)) {
            best = obj;
            t.hysteresis = candidates[i];
        }
    }
    return t;
}

WeekResult run_week(const Topology& topo, const WeeklyTraffic& traffic, const EnergyModel& model,
                    std::optional<double> fixed_hysteresis) {
    WeekResult w;
    if (fixed_hysteresis) {
        if (!(*fixed_hysteresis >= 0.0)) throw std::invalid_argument("hysteresis must be >= 0");
        w.tuning.hysteresis = *fixed_hysteresis;
    } else {
        w.tuning = tune_hysteresis(topo, traffic, model);
    }
    w.ours = run_policy(GreedySleepPolicy(w.tuning.hysteresis), topo, traffic, model);
    w.always_on = run_policy(AlwaysOnPolicy(), topo, traffic, model);
    w.minimal = run_policy(MinimalCellsPolicy(), topo, traffic, model);
    for (std::size_t s = 0; s < w.ours.slots.size(); ++s) w.traffic_total_bps.push_back(traffic.total(int(s)));
    return w;
}

void write_week_csv(std::ostream& out, const WeekResult& week) {
    out << kWeekCsvHeader << '\n';
    char buf[256];
    for (std::size_t s = 0; s < week.ours.slots.size(); ++s) {
        std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%.17g,%.17g,%d,%d\n", s, week.traffic_total_bps[s],
                      week.ours.slots[s].energy_wh, week.always_on.slots[s].energy_wh,
                      week.minimal.slots[s].energy_wh, week.ours.slots[s].switches, week.minimal.slots[s].switches);
        out << buf;
    }
}

} // namespace mndt::sleep_opt
