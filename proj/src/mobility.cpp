#include "mndt/mobility.hpp"

#include "mndt/parallel.hpp"

#include <cmath>
#include <numbers>
#include <queue>
#include <string>

namespace mndt::mobility {

// ---------------------------------------------------------------------------
// routing

Router::Router(const LaneGraph& graph) : graph_(&graph), out_lanes_(graph.nodes.size()) {
    for (const Lane& lane : graph.edges) {
        out_lanes_.at(std::size_t(lane.from)).push_back(lane.id);
        max_speed_ = std::max(max_speed_, lane.speed_limit_mps);
    }
}

Route Router::route(int origin, int destination) const {
    const auto n = graph_->nodes.size();
    if (origin < 0 || destination < 0 || std::size_t(origin) >= n || std::size_t(destination) >= n)
        throw std::out_of_range("route endpoint is not a lane node");
    if (origin == destination) return {};

    const Vec2 goal = graph_->nodes[std::size_t(destination)];
    auto h = [&](int node) { return distance(graph_->nodes[std::size_t(node)], goal) / max_speed_; };

    constexpr double inf = std::numeric_limits<double>::infinity();
    std::vector<double> g(n, inf);
    std::vector<int> via(n, kNone);
    using Entry = std::pair<double, int>;
    std::priority_queue<Entry, std::vector<Entry>, std::greater<>> open;
    g[std::size_t(origin)] = 0.0;
    open.emplace(h(origin), origin);

    while (!open.empty()) {
        const auto [f, u] = open.top();
        open.pop();
        if (u == destination) break;
        // stale entry: a cheaper path to u was pushed after this one
        if (f > g[std::size_t(u)] + h(u)) continue;
        for (int lane_id : out_lanes_[std::size_t(u)]) {
            const Lane& lane = graph_->edges[std::size_t(lane_id)];
            const double cand = g[std::size_t(u)] + lane.length_m / lane.speed_limit_mps;
            if (cand < g[std::size_t(lane.to)]) {
                g[std::size_t(lane.to)] = cand;
                via[std::size_t(lane.to)] = lane_id;
                open.emplace(cand + h(lane.to), lane.to);
            }
        }
    }
    if (via[std::size_t(destination)] == kNone)
        throw UnreachableError("no route from node " + std::to_string(origin) + " to node " +
                               std::to_string(destination));

    Route r;
    for (int node = destination; node != origin;) {
        const int lane_id = via[std::size_t(node)];
        r.lanes.push_back(lane_id);
        node = graph_->edges[std::size_t(lane_id)].from;
    }
    std::reverse(r.lanes.begin(), r.lanes.end());
    r.cost_s = g[std::size_t(destination)];
    return r;
}

Route plan_route(const LaneGraph& graph, int origin, int destination) {
    return Router(graph).route(origin, destination);
}

// ---------------------------------------------------------------------------
// car following

double krauss_safe_speed(double speed, double leader_speed, double gap_m, const KraussParams& p) {
    const double v_bar = 0.5 * (speed + leader_speed);
    return leader_speed + (gap_m - leader_speed * p.reaction_time) / (v_bar / p.decel + p.reaction_time);
}

// ---------------------------------------------------------------------------
// indoor movement

Vec2 indoor_acceleration(const PedestrianState& ped, const AoI& aoi) {
    const PedestrianParams& p = ped.params;
    const Vec2 desired = unit(ped.destination - ped.position) * p.desired_speed;
    Vec2 acc = (desired - ped.velocity) * (1.0 / p.relaxation_time);
    for (const Polygon& obs : aoi.obstacles) {
        Vec2 away;
        double d = 0.0;
        if (point_in_polygon(ped.position, obs)) {
            away = unit(ped.position - centroid(obs));
        } else {
            const Vec2 q = closest_point_on_boundary(ped.position, obs);
            d = distance(ped.position, q);
            away = unit(ped.position - q);
        }
        acc += away * (p.obstacle_strength * std::exp(-d / p.obstacle_range));
    }
    return acc;
}

PedestrianState indoor_step(const PedestrianState& ped, const AoI& aoi, double dt_s) {
    PedestrianState s = ped;
    if (!(dt_s > 0.0)) return s;
    const int substeps = std::max(1, int(std::ceil(dt_s / 0.1 - 1e-9)));
    const double h = dt_s / substeps;
    const double v_cap = 1.5 * s.params.desired_speed;
    for (int i = 0; i < substeps; ++i) {
        s.velocity += indoor_acceleration(s, aoi) * h;
        const double speed = norm(s.velocity);
        if (speed > v_cap) s.velocity = s.velocity * (v_cap / speed);
        const Vec2 next = s.position + s.velocity * h;
        s.position = point_in_polygon(next, aoi.footprint) ? next : project_inside(next, aoi.footprint);
    }
    return s;
}

// ---------------------------------------------------------------------------
// straight-line mode

Vec2 straight_line_position(Vec2 start, Vec2 end, double speed_mps, double t_s) {
    const double total = distance(start, end);
    const double travelled = std::max(0.0, speed_mps * t_s);
    if (travelled >= total) return end;
    return start + unit(end - start) * travelled;
}

// ---------------------------------------------------------------------------
// schedules

const char* to_string(TravelMode mode) {
    switch (mode) {
    case TravelMode::Vehicle:
        return "vehicle";
    case TravelMode::Pedestrian:
        return "pedestrian";
    case TravelMode::Indoor:
        return "indoor";
    case TravelMode::StraightLine:
        return "straight_line";
    }
    return "unknown";
}

namespace {

double normal_cdf(double x, double mean, double sd) {
    return 0.5 * std::erfc(-(x - mean) / (sd * std::numbers::sqrt2));
}

double normal_pdf(double x, double mean, double sd) {
    const double z = (x - mean) / sd;
    return std::exp(-0.5 * z * z) / (sd * std::sqrt(2.0 * std::numbers::pi));
}

constexpr double kDayS = 24.0 * 3600.0;
constexpr double kVehicleSpeedEstimate = 10.0;
constexpr double kWalkSpeedEstimate = 1.34;
constexpr double kDetourFactor = 1.3;
constexpr double kWalkDistanceM = 300.0;
constexpr double kVehicleShare = 0.6;

// Hour of day from the mixture, truncated to [0, 24) by rejection.
template <typename Urbg>
double sample_departure_hour(const DiurnalProfile& p, Urbg& gen) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (;;) {
        const bool morning = u(gen) < p.morning_weight;
        const double h = morning ? std::normal_distribution<double>(p.morning_mean_h, p.morning_sd_h)(gen)
                                 : std::normal_distribution<double>(p.evening_mean_h, p.evening_sd_h)(gen);
        if (h >= 0.0 && h < 24.0) return h;
    }
}

Vec2 aoi_anchor(const AoI& aoi) { return aoi.entrances.empty() ? centroid(aoi.footprint) : aoi.entrances.front(); }

} // namespace

double DiurnalProfile::pdf(double hour) const {
    return morning_weight * normal_pdf(hour, morning_mean_h, morning_sd_h) +
           (1.0 - morning_weight) * normal_pdf(hour, evening_mean_h, evening_sd_h);
}

double DiurnalProfile::cdf(double hour) const {
    return morning_weight * normal_cdf(hour, morning_mean_h, morning_sd_h) +
           (1.0 - morning_weight) * normal_cdf(hour, evening_mean_h, evening_sd_h);
}

TravelSchedule generate_schedule(std::uint64_t seed, const Scenario& scenario, double horizon_s, int user,
                                 const DiurnalProfile& profile) {
    if (!(horizon_s > 0.0)) throw std::invalid_argument("schedule horizon must be positive");
    if (scenario.aois.empty()) throw std::invalid_argument("scenario has no AoIs");
    auto gen = rng::light_stream(seed, "schedule", std::uint64_t(user));
    const int n_aoi = int(scenario.aois.size());
    std::uniform_int_distribution<int> pick_aoi(0, n_aoi - 1);
    std::uniform_real_distribution<double> u(0.0, 1.0);

    TravelSchedule sched;
    sched.user = user;
    const int home = pick_aoi(gen);
    sched.legs.push_back({home, home, 0.0, TravelMode::Indoor});

    // departure instants of the road legs, day by day
    std::vector<double> trips;
    const int days = int(std::ceil(horizon_s / kDayS));
    for (int d = 0; d < days; ++d) {
        const int k = 2 + std::uniform_int_distribution<int>(0, 2)(gen);
        std::vector<double> day;
        for (int i = 0; i < k; ++i) day.push_back(d * kDayS + 3600.0 * sample_departure_hour(profile, gen));
        std::sort(day.begin(), day.end());
        for (double t : day) {
            if (t < horizon_s && t > 0.0 && (trips.empty() || t > trips.back())) trips.push_back(t);
        }
    }

    int here = home;
    for (std::size_t i = 0; i < trips.size(); ++i) {
        const bool last_of_day = i + 1 == trips.size() ||
                                 std::floor(trips[i + 1] / kDayS) != std::floor(trips[i] / kDayS);
        int there = last_of_day ? home : pick_aoi(gen);
        if (there == here) there = (here + 1 + pick_aoi(gen) % std::max(1, n_aoi - 1)) % n_aoi;
        if (there == here) continue; // single-AoI scenario: nowhere to go
        const double dist = distance(aoi_anchor(scenario.aois[std::size_t(here)]),
                                     aoi_anchor(scenario.aois[std::size_t(there)]));
        TravelMode mode = TravelMode::Pedestrian;
        if (dist >= kWalkDistanceM && u(gen) < kVehicleShare) mode = TravelMode::Vehicle;
        const double speed = mode == TravelMode::Vehicle ? kVehicleSpeedEstimate : kWalkSpeedEstimate;
        sched.legs.push_back({here, there, trips[i], mode});

        const double next = i + 1 < trips.size() ? trips[i + 1] : horizon_s;
        const double arrive = std::min(trips[i] + kDetourFactor * dist / speed, 0.5 * (trips[i] + next));
        if (arrive > trips[i] && arrive < horizon_s) sched.legs.push_back({there, there, arrive, TravelMode::Indoor});
        here = there;
    }
    return sched;
}

std::vector<TravelSchedule> generate_schedules(std::uint64_t seed, const Scenario& scenario, double horizon_s,
                                               int n_users, const DiurnalProfile& profile) {
    std::vector<TravelSchedule> out(std::size_t(std::max(0, n_users)));
    parallel_chunks(out.size(), [&](std::size_t b, std::size_t e) {
        for (std::size_t i = b; i < e; ++i) out[i] = generate_schedule(seed, scenario, horizon_s, int(i), profile);
    }, 64);
    return out;
}

// ---------------------------------------------------------------------------
// simulator

MobilitySimulator::MobilitySimulator(const Scenario& scenario, MobilityConfig config)
    : scenario_(&scenario), config_(config), router_(scenario.lanes) {
    aoi_polys_.reserve(scenario.aois.size());
    for (const auto& a : scenario.aois) aoi_polys_.push_back(&a.footprint);
    aoi_index_ = PolygonIndex(scenario.extent, aoi_polys_, 40.0);

    // nearest lane node per AoI, restricted to nodes with outgoing and incoming lanes
    std::vector<char> usable(scenario.lanes.nodes.size(), 0);
    std::vector<int> in_deg(scenario.lanes.nodes.size(), 0), out_deg(scenario.lanes.nodes.size(), 0);
    for (const Lane& l : scenario.lanes.edges) {
        ++out_deg[std::size_t(l.from)];
        ++in_deg[std::size_t(l.to)];
    }
    for (std::size_t i = 0; i < usable.size(); ++i) usable[i] = in_deg[i] > 0 && out_deg[i] > 0;
    aoi_node_.resize(scenario.aois.size(), kNone);
    for (std::size_t a = 0; a < scenario.aois.size(); ++a) {
        const Vec2 anchor = aoi_anchor(scenario.aois[a]);
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t n = 0; n < usable.size(); ++n) {
            if (!usable[n]) continue;
            const double d = distance(anchor, scenario.lanes.nodes[n]);
            if (d < best) {
                best = d;
                aoi_node_[a] = int(n);
            }
        }
    }
}

Vec2 MobilitySimulator::lane_point(int lane, double pos) const {
    const Lane& l = scenario_->lanes.edges[std::size_t(lane)];
    const Vec2 a = scenario_->lanes.nodes[std::size_t(l.from)];
    const Vec2 b = scenario_->lanes.nodes[std::size_t(l.to)];
    const double f = l.length_m > 0.0 ? std::clamp(pos / l.length_m, 0.0, 1.0) : 1.0;
    return a + (b - a) * f;
}

Vec2 MobilitySimulator::random_indoor_point(int aoi, rng::SplitMix& gen) const {
    const AoI& a = scenario_->aois[std::size_t(aoi)];
    const Rect box = bounding_box(a.footprint);
    std::uniform_real_distribution<double> ux(box.min.x, box.max.x), uy(box.min.y, box.max.y);
    for (int tries = 0; tries < 64; ++tries) {
        const Vec2 p{ux(gen), uy(gen)};
        if (!point_in_polygon(p, a.footprint)) continue;
        bool blocked = false;
        for (const auto& obs : a.obstacles) blocked = blocked || point_in_polygon(p, obs);
        if (!blocked) return p;
    }
    return project_inside(aoi_anchor(a), a.footprint, 0.5);
}

void MobilitySimulator::enter_aoi(Agent& a, int aoi) {
    a.phase = Phase::Indoor;
    a.aoi = aoi;
    const AoI& area = scenario_->aois[std::size_t(aoi)];
    a.ped.position = project_inside(aoi_anchor(area), area.footprint, 0.5);
    a.ped.velocity = {};
    a.ped.destination = random_indoor_point(aoi, a.gen);
    a.ped.params = config_.pedestrian;
}

void MobilitySimulator::start_road_leg(Agent& a, const Leg& leg) {
    const int from = aoi_node_[std::size_t(leg.origin)];
    const int to = aoi_node_[std::size_t(leg.destination)];
    Route r;
    if (from != kNone && to != kNone) {
        try {
            r = router_.route(from, to);
        } catch (const UnreachableError&) {
            r = {};
        }
    }
    if (r.lanes.empty()) { // same access node or disconnected: teleport-free walk is skipped
        enter_aoi(a, leg.destination);
        return;
    }
    a.phase = Phase::Road;
    a.route = std::move(r);
    a.route_pos = 0;
    a.on_foot = leg.mode != TravelMode::Vehicle;
    a.vehicle = {};
    a.vehicle.lane = a.route.lanes.front();
    a.vehicle.params = config_.vehicle;
    a.vehicle.params.max_speed =
        a.on_foot ? config_.pedestrian.desired_speed
                  : scenario_->lanes.edges[std::size_t(a.vehicle.lane)].speed_limit_mps;
    a.aoi = leg.destination;
}

void MobilitySimulator::reset_scheduled_agent(Agent& a, int user) {
    a.schedule = generate_schedule(seed_, *scenario_, config_.schedule_horizon_s, user);
    // current leg at the start clock
    std::size_t cur = 0;
    while (cur + 1 < a.schedule.legs.size() && a.schedule.legs[cur + 1].departure_s <= config_.start_time_s) ++cur;
    a.next_leg = cur + 1;
    const Leg& leg = a.schedule.legs[cur];
    if (leg.mode == TravelMode::Indoor) {
        enter_aoi(a, leg.destination);
        a.ped.position = random_indoor_point(leg.destination, a.gen);
    } else {
        start_road_leg(a, leg);
    }
}

void MobilitySimulator::reset(std::uint64_t seed, int n_users) {
    if (n_users < 0) throw std::invalid_argument("negative user count");
    seed_ = seed;
    elapsed_s_ = 0.0;
    clock_s_ = config_.mode == MobilityMode::Scheduled ? config_.start_time_s : 0.0;
    agents_.assign(std::size_t(n_users), Agent{});
    poses_.assign(std::size_t(n_users), UserPose{});
    const Rect& ext = scenario_->extent;
    parallel_chunks(agents_.size(), [&](std::size_t b, std::size_t e) {
        for (std::size_t i = b; i < e; ++i) {
            Agent& a = agents_[i];
            a.gen = rng::light_stream(seed, "mobility", i);
            if (config_.mode == MobilityMode::StraightLine) {
                std::uniform_real_distribution<double> ux(ext.min.x, ext.max.x), uy(ext.min.y, ext.max.y);
                a.start = {ux(a.gen), uy(a.gen)};
                a.end = {ux(a.gen), uy(a.gen)};
                a.speed = std::uniform_real_distribution<double>(config_.min_speed_mps, config_.max_speed_mps)(a.gen);
                poses_[i] = {a.start, TravelMode::StraightLine};
            } else {
                reset_scheduled_agent(a, int(i));
            }
        }
    }, 64);
    if (config_.mode == MobilityMode::Scheduled) {
        for (std::size_t i = 0; i < agents_.size(); ++i) {
            const Agent& a = agents_[i];
            if (a.phase == Phase::Indoor) poses_[i] = {a.ped.position, TravelMode::Indoor};
            else
                poses_[i] = {lane_point(a.vehicle.lane, a.vehicle.position_m),
                             a.on_foot ? TravelMode::Pedestrian : TravelMode::Vehicle};
        }
    }
}

void MobilitySimulator::step(double dt_s) {
    if (!(dt_s > 0.0)) throw std::invalid_argument("dt must be positive");
    elapsed_s_ += dt_s;
    clock_s_ += dt_s;
    if (config_.mode == MobilityMode::StraightLine) {
        for (std::size_t i = 0; i < agents_.size(); ++i) {
            const Agent& a = agents_[i];
            poses_[i].position = straight_line_position(a.start, a.end, a.speed, elapsed_s_);
        }
        return;
    }
    step_scheduled(dt_s);
}

void MobilitySimulator::step_scheduled(double dt_s) {
    const auto& edges = scenario_->lanes.edges;

    // leader lookup from the previous snapshot: vehicles grouped by lane, sorted by position
    std::vector<std::pair<int, std::size_t>> on_lane; // (lane, agent)
    for (std::size_t i = 0; i < agents_.size(); ++i) {
        const Agent& a = agents_[i];
        if (a.phase == Phase::Road && !a.on_foot) on_lane.emplace_back(a.vehicle.lane, i);
    }
    std::sort(on_lane.begin(), on_lane.end(), [&](const auto& x, const auto& y) {
        if (x.first != y.first) return x.first < y.first;
        const double px = agents_[x.second].vehicle.position_m, py = agents_[y.second].vehicle.position_m;
        return px != py ? px < py : x.second < y.second;
    });
    std::vector<VehicleState> snapshot(agents_.size());
    std::vector<long> leader(agents_.size(), -1);
    for (std::size_t k = 0; k < on_lane.size(); ++k) {
        snapshot[on_lane[k].second] = agents_[on_lane[k].second].vehicle;
        if (k + 1 < on_lane.size() && on_lane[k + 1].first == on_lane[k].first)
            leader[on_lane[k].second] = long(on_lane[k + 1].second);
    }

    const double now = clock_s_;
    parallel_chunks(agents_.size(), [&](std::size_t b, std::size_t e) {
        for (std::size_t i = b; i < e; ++i) {
            Agent& a = agents_[i];
            if (a.phase == Phase::Indoor && a.next_leg < a.schedule.legs.size() &&
                a.schedule.legs[a.next_leg].departure_s <= now) {
                const Leg& leg = a.schedule.legs[a.next_leg++];
                if (leg.mode != TravelMode::Indoor) start_road_leg(a, leg);
            }

            if (a.phase == Phase::Indoor) {
                const AoI& area = scenario_->aois[std::size_t(a.aoi)];
                a.ped = indoor_step(a.ped, area, dt_s);
                if (distance(a.ped.position, a.ped.destination) < 0.5)
                    a.ped.destination = random_indoor_point(a.aoi, a.gen);
                poses_[i] = {a.ped.position, TravelMode::Indoor};
                continue;
            }

            // road leg
            VehicleState next;
            if (a.on_foot) {
                next = a.vehicle;
                next.speed_mps = a.vehicle.params.max_speed;
                next.position_m += next.speed_mps * dt_s;
            } else {
                const long l = leader[i];
                const VehicleState* lead = l >= 0 ? &snapshot[std::size_t(l)] : nullptr;
                const double gap = lead ? lead->position_m - a.vehicle.position_m - lead->params.length : 0.0;
                next = krauss_step(a.vehicle, lead, gap, dt_s, a.gen);
            }
            // hand over to the following lanes of the route
            while (next.position_m >= edges[std::size_t(next.lane)].length_m) {
                next.position_m -= edges[std::size_t(next.lane)].length_m;
                if (++a.route_pos >= a.route.lanes.size()) break;
                next.lane = a.route.lanes[a.route_pos];
                if (!a.on_foot) next.params.max_speed = edges[std::size_t(next.lane)].speed_limit_mps;
            }
            if (a.route_pos >= a.route.lanes.size()) {
                enter_aoi(a, a.aoi);
                poses_[i] = {a.ped.position, TravelMode::Indoor};
                continue;
            }
            a.vehicle = next;
            poses_[i] = {lane_point(next.lane, next.position_m),
                         a.on_foot ? TravelMode::Pedestrian : TravelMode::Vehicle};
        }
    }, 64);
}

} // namespace mndt::mobility
