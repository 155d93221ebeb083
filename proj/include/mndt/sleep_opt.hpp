#pragma once

#include "mndt/scenario.hpp"

#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

/// Cell sleep control over a grid partition: proportional grid load
/// assignment, energy and switch-cost accounting, a hysteresis greedy
/// controller guarded by the two masks, and a minimal-cells baseline.
namespace mndt::sleep_opt {

enum class CellStatus : std::uint8_t { On, Sleeping, Off };

const char* to_string(CellStatus s);

using Statuses = std::vector<CellStatus>;

struct EnergyModel {
    double p_on_static_w = 130.0;
    double p_on_slope_w = 120.0; ///< extra draw at full utilization
    double p_sleep_w = 25.0;
    double p_overhead_w = 300.0; ///< BBU and air conditioning, per site that is on
    double beta_onoff = 10.0;
    double beta_sleep = 2.0;
    /// A site whose cells are all sleeping or off still draws overhead when true.
    bool sleeping_keeps_site_on = true;

    void check() const;
};

struct Cell {
    int site = 0;
    int grid = 0;
    double capacity_bps = 50e6;
};

/// Cells of every site and their grid membership.
struct Topology {
    std::vector<Cell> cells;
    std::vector<std::vector<int>> site_cells; ///< per site, cell ids
    std::vector<std::vector<int>> grid_cells; ///< per grid, sorted by capacity desc, then site, then id

    std::size_t n_cells() const { return cells.size(); }
    std::size_t n_sites() const { return site_cells.size(); }
    std::size_t n_grids() const { return grid_cells.size(); }
    double grid_capacity(std::size_t g) const;

    /// Builds the ordering of grid_cells; call after filling cells by hand.
    void finalize(std::size_t n_sites, std::size_t n_grids);
};

/// `cells_per_site` cells of `capacity_bps` per site, each in its site's grid.
Topology make_topology(const Scenario& scenario, const GridPartition& grids, int cells_per_site = 3,
                       double capacity_bps = 50e6);

struct LoadAssignment {
    std::vector<double> load_bps; ///< per cell
    std::vector<double> unserved_bps; ///< per grid, demand beyond the on capacity
};

/// Splits each grid's demand over its on cells in proportion to capacity.
/// A grid without on cells leaves all its demand unserved.
LoadAssignment grid_load_assignment(const Topology& topo, std::span<const double> grid_demand_bps,
                                    const Statuses& statuses);

/// True iff the grid's on cells other than `cell` can carry `grid_demand_bps`.
bool mask_demand_satisfiable(const Topology& topo, int grid, int cell, const Statuses& statuses,
                             double grid_demand_bps);

/// True iff every other cell of `cell`'s site is off.
bool mask_bs_closable(const Topology& topo, int cell, const Statuses& statuses);

bool site_on(const Topology& topo, int site, const Statuses& statuses, const EnergyModel& model);

double network_power_w(const Topology& topo, const Statuses& statuses, std::span<const double> load_bps,
                       const EnergyModel& model);

double switch_cost(const Statuses& prev, const Statuses& cur, const EnergyModel& model);

/// Number of cells whose status differs.
int switch_count(const Statuses& prev, const Statuses& cur);

/// Decision rule for one slot given the previous statuses.
class SleepController {
  public:
    virtual ~SleepController() = default;
    virtual std::string name() const = 0;
    virtual Statuses decide(const Topology& topo, std::span<const double> grid_demand_bps,
                            const Statuses& prev) const = 0;
};

/// Per grid: grow the on-prefix to the smallest one covering demand (1 + h);
/// shrink only when a prefix covering demand (1 + 2h) is smaller than the
/// current on count. Cells beyond the prefix sleep while a sibling is on and
/// switch off otherwise; each deactivation must pass the demand mask.
class GreedySleepPolicy : public SleepController {
  public:
    explicit GreedySleepPolicy(double hysteresis = 0.15) : h_(hysteresis) {}
    std::string name() const override { return "ours"; }
    Statuses decide(const Topology& topo, std::span<const double> grid_demand_bps,
                    const Statuses& prev) const override;
    double hysteresis() const { return h_; }

  private:
    double h_;
};

/// Smallest capacity-sorted prefix per grid; everything else off.
class MinimalCellsPolicy : public SleepController {
  public:
    std::string name() const override { return "minimal_cells"; }
    Statuses decide(const Topology& topo, std::span<const double> grid_demand_bps,
                    const Statuses& prev) const override;
};

class AlwaysOnPolicy : public SleepController {
  public:
    std::string name() const override { return "always_on"; }
    Statuses decide(const Topology& topo, std::span<const double>, const Statuses&) const override {
        return Statuses(topo.n_cells(), CellStatus::On);
    }
};

inline constexpr int kSlotsPerDay = 48;
inline constexpr int kSlotsPerWeek = 7 * kSlotsPerDay;
inline constexpr double kSlotHours = 0.5;

/// Traffic per grid per half-hour slot, slot 0 = Monday 00:00.
struct WeeklyTraffic {
    std::size_t grids = 0;
    std::vector<double> demand_bps; ///< slot-major: [slot * grids + grid]

    std::span<const double> slot(int s) const {
        return {demand_bps.data() + std::size_t(s) * grids, grids};
    }
    double total(int s) const;
};

/// Normalized diurnal shape with a late-morning and an evening peak, in [0.1, 1].
double diurnal_shape(double hour);
/// 1 on weekdays, lower on Saturday and Sunday; day 0 is Monday.
double weekday_factor(int day);

/// Each grid with capacity gets a peak level drawn in [0.35, 0.65] of its
/// capacity, modulated by diurnal_shape, weekday_factor and 5% noise.
WeeklyTraffic synth_weekly_traffic(std::uint64_t seed, const Topology& topo, int days = 7);

struct SlotResult {
    Statuses statuses;
    double power_w = 0.0;
    double energy_wh = 0.0;
    double unserved_bps = 0.0;
    double capacity_shortfall_bps = 0.0; ///< demand no configuration could carry
    int switches = 0;
    double switch_cost = 0.0;
};

struct PolicyRun {
    std::string name;
    std::vector<SlotResult> slots;

    double energy_wh(int first_slot = 0, int last_slot = -1) const;
    int switches(int first_slot = 0, int last_slot = -1) const;
    double switch_cost(int first_slot = 0, int last_slot = -1) const;
};

/// Runs the controller over slots [first, last) starting from all cells on.
PolicyRun run_policy(const SleepController& policy, const Topology& topo, const WeeklyTraffic& traffic,
                     const EnergyModel& model, int first_slot = 0, int last_slot = -1);

inline const std::vector<double> kHysteresisGrid = {0.05, 0.1, 0.15, 0.2, 0.3};

struct Tuning {
    double hysteresis = 0.15;
    std::vector<double> objective; ///< day-1 energy + switch cost per candidate
};

/// Picks h from `candidates` minimizing day-1 energy (Wh) plus switch cost;
/// ties go to the smaller h.
Tuning tune_hysteresis(const Topology& topo, const WeeklyTraffic& traffic, const EnergyModel& model,
                       std::span<const double> candidates = kHysteresisGrid);

struct WeekResult {
    Tuning tuning;
    PolicyRun ours;
    PolicyRun always_on;
    PolicyRun minimal;
    std::vector<double> traffic_total_bps;
};

/// Tunes h on day 1 unless `fixed_hysteresis` is given, then runs the three
/// controllers over the whole trace.
WeekResult run_week(const Topology& topo, const WeeklyTraffic& traffic, const EnergyModel& model,
                    std::optional<double> fixed_hysteresis = std::nullopt);

inline constexpr const char* kWeekCsvHeader =
    "slot,traffic_total,energy_ours,energy_always_on,energy_minimal_cells,switches_ours,switches_minimal";

void write_week_csv(std::ostream& out, const WeekResult& week);

} // namespace mndt::sleep_opt
