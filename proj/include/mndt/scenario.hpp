#pragma once

#include "mndt/geometry.hpp"

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

namespace mndt {

inline constexpr int kScenarioSchemaVersion = 1;

struct Lane {
    int id = 0;
    int from = 0;
    int to = 0;
    double length_m = 0.0;
    double speed_limit_mps = 0.0;

    bool operator==(const Lane&) const = default;
};

/// Directed lane graph. Node and lane ids are their indices.
struct LaneGraph {
    std::vector<Vec2> nodes;
    std::vector<Lane> edges;

    bool operator==(const LaneGraph&) const = default;
};

struct AoI {
    Polygon footprint;
    std::vector<Vec2> entrances;
    std::vector<Polygon> obstacles;

    bool operator==(const AoI&) const = default;
};

struct Building {
    Polygon footprint;
    double height_m = 0.0;

    bool operator==(const Building&) const = default;
};

struct BaseStationSite {
    int id = 0;
    Vec2 position;
    bool indoor = false;
    double max_tx_power_dbm = 30.0;
    double antenna_height_m = 25.0;
    double azimuth_deg = 0.0;
    double elevation_deg = 0.0;
    double carrier_freq_mhz = 2600.0;
    int n_channels = 45;
    double rb_bandwidth_hz = 1.8e5;

    bool operator==(const BaseStationSite&) const = default;
};

inline constexpr double kOutdoorMaxTxPowerDbm = 30.0;
inline constexpr double kIndoorMaxTxPowerDbm = 24.0;

struct Scenario {
    Rect extent;
    LaneGraph lanes;
    std::vector<AoI> aois;
    std::vector<Building> buildings;
    std::vector<BaseStationSite> sites;

    bool operator==(const Scenario&) const = default;
};

/// Regular tiling of the extent; grid id = row * cols + col.
struct GridPartition {
    double cell_size_m = 0.0;
    int cols = 0;
    int rows = 0;
    std::vector<Rect> grids;
    std::vector<int> site_grid; ///< indexed like Scenario::sites

    int grid_of(Vec2 p, const Rect& extent) const;
    std::size_t size() const { return grids.size(); }
};

/// Counts and extent for the synthetic world generator.
struct ScenarioSpec {
    double width_m = 2000.0;
    double height_m = 2000.0;
    int lanes = 1850;
    int aois = 1417;
    int sites = 184;
    int indoor_sites = 145;
    int n_channels = 45;
    double carrier_freq_mhz = 2600.0;
    double rb_bandwidth_hz = 1.8e5;

    static ScenarioSpec table1();
    /// 500 x 500 m, 10 sites, 5 channels; lane/AoI counts scaled by area.
    static ScenarioSpec desk();
};

class ScenarioError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

class ScenarioParseError : public ScenarioError {
  public:
    using ScenarioError::ScenarioError;
};

/// Carries the name of the first invariant that failed.
class ScenarioValidationError : public ScenarioError {
  public:
    ScenarioValidationError(std::string invariant, const std::string& detail)
        : ScenarioError(invariant + ": " + detail), invariant_(std::move(invariant)) {}
    const std::string& invariant() const { return invariant_; }

  private:
    std::string invariant_;
};

class InfeasibleSpecError : public ScenarioError {
  public:
    using ScenarioError::ScenarioError;
};

void validate(const Scenario& scenario);

nlohmann::json to_json(const Scenario& scenario);
Scenario scenario_from_json(const nlohmann::json& doc);
std::string dump_scenario(const Scenario& scenario);

Scenario load_scenario(const std::filesystem::path& path);
void save_scenario(const Scenario& scenario, const std::filesystem::path& path);

Scenario generate_scenario(std::uint64_t seed, const ScenarioSpec& spec = ScenarioSpec::table1());

GridPartition build_grid(const Scenario& scenario, double cell_size_m = 500.0);

/// Size of the largest weakly connected component of the lane graph.
std::size_t largest_component_size(const LaneGraph& graph);

} // namespace mndt
