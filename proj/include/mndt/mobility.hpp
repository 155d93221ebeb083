#pragma once

#include "mndt/allocation.hpp"
#include "mndt/geometry.hpp"
#include "mndt/rng.hpp"
#include "mndt/scenario.hpp"
#include "mndt/spatial_index.hpp"

#include <algorithm>
#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>
#include <vector>

namespace mndt::mobility {

// ---------------------------------------------------------------------------
// routing

struct Route {
    std::vector<int> lanes; ///< lane ids in travel order
    double cost_s = 0.0;    ///< sum of length / speed limit
};

class UnreachableError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// A* over travel time with heuristic euclidean distance / fastest speed limit.
class Router {
  public:
    explicit Router(const LaneGraph& graph);
    Route route(int origin, int destination) const;
    const LaneGraph& graph() const { return *graph_; }

  private:
    const LaneGraph* graph_;
    std::vector<std::vector<int>> out_lanes_;
    double max_speed_ = 1.0;
};

Route plan_route(const LaneGraph& graph, int origin, int destination);

// ---------------------------------------------------------------------------
// car following

struct KraussParams {
    double max_speed = 13.9;
    double accel = 2.0;
    double decel = 4.0;
    double reaction_time = 1.0;
    double imperfection = 0.5;
    double length = 5.0;
};

struct VehicleState {
    int lane = kNone;
    double position_m = 0.0;
    double speed_mps = 0.0;
    KraussParams params;
};

/// One Krauss update. `leader` is the vehicle ahead and `gap_m` the bumper gap
/// to it; without a leader the safe speed is unbounded. The position advances
/// by the new speed; lane hand-over is the caller's job.
template <typename Urbg>
VehicleState krauss_step(const VehicleState& follower, const VehicleState* leader, double gap_m,
                         double dt_s, Urbg& gen);

/// v_safe = v_l + (g - v_l tau) / (v_bar / b + tau).
double krauss_safe_speed(double speed, double leader_speed, double gap_m, const KraussParams& p);

// ---------------------------------------------------------------------------
// indoor movement

struct PedestrianParams {
    double desired_speed = 1.34;
    double relaxation_time = 0.5;
    double obstacle_strength = 2.0;
    double obstacle_range = 0.3;
};

struct PedestrianState {
    Vec2 position;
    Vec2 velocity;
    Vec2 destination;
    PedestrianParams params;
};

/// Social-force acceleration: relaxation towards the desired velocity plus
/// exponential repulsion from every obstacle.
Vec2 indoor_acceleration(const PedestrianState& ped, const AoI& aoi);

/// Explicit integration over dt_s in 0.1 s sub-steps; speed is capped at 1.5x
/// the desired speed and positions that leave the footprint are projected back.
PedestrianState indoor_step(const PedestrianState& ped, const AoI& aoi, double dt_s);

// ---------------------------------------------------------------------------
// straight-line mode

Vec2 straight_line_position(Vec2 start, Vec2 end, double speed_mps, double t_s);

// ---------------------------------------------------------------------------
// schedules

enum class TravelMode { Vehicle, Pedestrian, Indoor, StraightLine };

const char* to_string(TravelMode mode);

/// Origin and destination are AoI indices. Dwell legs have origin == destination.
struct Leg {
    int origin = 0;
    int destination = 0;
    double departure_s = 0.0;
    TravelMode mode = TravelMode::Indoor;

    bool operator==(const Leg&) const = default;
};

struct TravelSchedule {
    int user = 0;
    std::vector<Leg> legs;

    bool operator==(const TravelSchedule&) const = default;
};

/// Two-peak diurnal departure profile: Gaussian mixture over the time of day.
struct DiurnalProfile {
    double morning_mean_h = 8.0;
    double morning_sd_h = 1.0;
    double evening_mean_h = 18.0;
    double evening_sd_h = 1.5;
    double morning_weight = 0.5;

    double pdf(double hour) const;
    double cdf(double hour) const;
};

/// Alternating dwell and road legs for one user; a pure function of (seed, user).
TravelSchedule generate_schedule(std::uint64_t seed, const Scenario& scenario, double horizon_s,
                                 int user, const DiurnalProfile& profile = {});

std::vector<TravelSchedule> generate_schedules(std::uint64_t seed, const Scenario& scenario,
                                               double horizon_s, int n_users,
                                               const DiurnalProfile& profile = {});

// ---------------------------------------------------------------------------
// per-step movement of a population

enum class MobilityMode { StraightLine, Scheduled };

struct MobilityConfig {
    MobilityMode mode = MobilityMode::StraightLine;
    double min_speed_mps = 0.5;
    double max_speed_mps = 15.0;
    double start_time_s = 8.0 * 3600.0; ///< time of day at episode start (scheduled mode)
    double schedule_horizon_s = 24.0 * 3600.0;
    KraussParams vehicle;
    PedestrianParams pedestrian;
};

struct UserPose {
    Vec2 position;
    TravelMode mode = TravelMode::StraightLine;
};

/// Moves every user one step at a time. Each user draws from its own stream,
/// so the outcome does not depend on update order.
class MobilitySimulator {
  public:
    MobilitySimulator(const Scenario& scenario, MobilityConfig config);

    void reset(std::uint64_t seed, int n_users);
    void step(double dt_s);

    const std::vector<UserPose>& poses() const { return poses_; }
    double clock_s() const { return clock_s_; }
    std::size_t size() const { return poses_.size(); }

  private:
    enum class Phase { Indoor, Road };

    struct Agent {
        // straight line
        Vec2 start;
        Vec2 end;
        double speed = 0.0;
        // scheduled
        TravelSchedule schedule;
        std::size_t next_leg = 0;
        Phase phase = Phase::Indoor;
        int aoi = 0;
        PedestrianState ped;
        Route route;
        std::size_t route_pos = 0;
        VehicleState vehicle;
        bool on_foot = false;
        rng::SplitMix gen{0};
    };

    void reset_scheduled_agent(Agent& a, int user);
    void start_road_leg(Agent& a, const Leg& leg);
    void enter_aoi(Agent& a, int aoi);
    void step_scheduled(double dt_s);
    Vec2 random_indoor_point(int aoi, rng::SplitMix& gen) const;
    Vec2 lane_point(int lane, double pos) const;

    const Scenario* scenario_;
    MobilityConfig config_;
    Router router_;
    PolygonIndex aoi_index_;
    std::vector<const Polygon*> aoi_polys_;
    std::vector<int> aoi_node_; ///< lane node closest to each AoI's first entrance
    std::uint64_t seed_ = 0;
    double clock_s_ = 0.0;
    double elapsed_s_ = 0.0;
    std::vector<Agent> agents_;
    std::vector<UserPose> poses_;
};

// ---------------------------------------------------------------------------

template <typename Urbg>
VehicleState krauss_step(const VehicleState& follower, const VehicleState* leader, double gap_m,
                         double dt_s, Urbg& gen) {
    const KraussParams& p = follower.params;
    double v_safe = std::numeric_limits<double>::infinity();
    if (leader) v_safe = krauss_safe_speed(follower.speed_mps, leader->speed_mps, std::max(0.0, gap_m), p);
    const double v_des = std::min({p.max_speed, follower.speed_mps + p.accel * dt_s, v_safe});
    double eta = 0.0;
    const double eta_max = p.imperfection * p.accel * dt_s;
    if (eta_max > 0.0) eta = std::uniform_real_distribution<double>(0.0, eta_max)(gen);
    VehicleState next = follower;
    next.speed_mps = std::clamp(v_des - eta, 0.0, p.max_speed);
    next.position_m = follower.position_m + next.speed_mps * dt_s;
    return next;
}

} // namespace mndt::mobility
