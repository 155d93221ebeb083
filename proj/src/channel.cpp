#include "mndt/channel.hpp"

#include <algorithm>
#include <numbers>

namespace mndt::channel {

double free_space_loss_db(double distance_m, double freq_mhz) {
    const double d_km = std::max(distance_m, 1.0) / 1000.0;
    return 32.44 + 20.0 * std::log10(d_km) + 20.0 * std::log10(freq_mhz);
}

double noise_power_dbm(double noise_density_dbm_hz, double bandwidth_hz) {
    if (!(bandwidth_hz > 0.0)) throw std::invalid_argument("bandwidth must be positive");
    return noise_density_dbm_hz + 10.0 * std::log10(bandwidth_hz);
}

double shannon_rate(double bandwidth_hz, double sinr_linear) {
    return bandwidth_hz * std::log2(1.0 + std::max(0.0, sinr_linear));
}

double min_power_for_rate(double target_rate_bps, double bandwidth_hz, double gain,
                          double noise_plus_interference_w) {
    if (target_rate_bps <= 0.0) return 0.0;
    if (!(gain > 0.0)) throw std::invalid_argument("link gain must be positive");
    return std::expm1(target_rate_bps / bandwidth_hz * std::numbers::ln2) *
           noise_plus_interference_w / gain;
}

FadingModel FadingModel::rician(double k_factor) {
    if (!(k_factor >= 0.0)) throw std::invalid_argument("Rician K-factor must be >= 0");
    return {FadingKind::Rician, k_factor};
}

FadingModel FadingModel::nakagami(double m) {
    if (!(m >= 0.5)) throw std::invalid_argument("Nakagami m must be >= 0.5");
    return {FadingKind::Nakagami, m};
}

double fading_loss_db(double power_gain) { return -10.0 * std::log10(std::max(power_gain, 1e-12)); }

double shadowing_deviate(std::uint64_t seed, std::uint64_t user, std::uint64_t site) {
    return rng::hashed_standard_normal(rng::stream_key(seed, "shadowing", user, site));
}

double shadowing_sample(std::uint64_t seed, std::uint64_t user, std::uint64_t site, double sigma_db) {
    if (sigma_db < 0.0) throw std::invalid_argument("shadowing sigma must be >= 0");
    if (sigma_db == 0.0) return 0.0;
    return sigma_db * shadowing_deviate(seed, user, site);
}

namespace {

// True when the ray blocks at some crossing of this footprint.
bool occludes(const Point3& tx, const Point3& rx, const Polygon& footprint, double height) {
    if (tx.z >= height && rx.z >= height) return false;
    for (std::size_t i = 0, n = footprint.size(); i < n; ++i) {
        const auto t = segment_crossing(tx.xy, rx.xy, footprint[i], footprint[(i + 1) % n]);
        if (t && tx.z + (rx.z - tx.z) * *t < height) return true;
    }
    return false;
}

} // namespace

bool los_check(const Point3& tx, const Point3& rx, std::span<const Building> buildings,
               std::span<const int> ignore) {
    for (std::size_t b = 0; b < buildings.size(); ++b) {
        if (std::find(ignore.begin(), ignore.end(), int(b)) != ignore.end()) continue;
        if (occludes(tx, rx, buildings[b].footprint, buildings[b].height_m)) return false;
    }
    return true;
}

BuildingMap::BuildingMap(const Rect& extent, std::span<const Building> buildings, double cell_size_m)
    : buildings_(buildings.begin(), buildings.end()) {
    footprints_.reserve(buildings_.size());
    for (const auto& b : buildings_) footprints_.push_back(&b.footprint);
    index_ = PolygonIndex(extent, footprints_, cell_size_m);
}

bool BuildingMap::line_of_sight(const Point3& tx, const Point3& rx, int ignore_a, int ignore_b) const {
    const Rect seg{{std::min(tx.xy.x, rx.xy.x), std::min(tx.xy.y, rx.xy.y)},
                   {std::max(tx.xy.x, rx.xy.x), std::max(tx.xy.y, rx.xy.y)}};
    // start from the lower end, where blocking buildings are usually found first
    const bool rx_low = rx.z < tx.z;
    const Vec2 from = rx_low ? rx.xy : tx.xy;
    const Vec2 to = rx_low ? tx.xy : rx.xy;
    const bool blocked = index_.walk_segment(from, to, [&](std::size_t id) {
        if (int(id) == ignore_a || int(id) == ignore_b) return false;
        const Building& b = buildings_[id];
        const Rect& box = index_.box(id);
        if (box.max.x < seg.min.x || box.min.x > seg.max.x || box.max.y < seg.min.y ||
            box.min.y > seg.max.y)
            return false;
        return occludes(tx, rx, b.footprint, b.height_m);
    });
    return !blocked;
}

double AntennaPattern::gain_db(const BaseStationSite& site, Vec2 target) const {
    const double g_max = site.indoor ? boresight_gain_indoor_dbi : boresight_gain_outdoor_dbi;
    const Vec2 d = target - site.position;
    if (d.x == 0.0 && d.y == 0.0) return g_max;
    const double bearing = std::atan2(d.y, d.x) * 180.0 / std::numbers::pi;
    double phi = std::fmod(bearing - site.azimuth_deg, 360.0);
    if (phi > 180.0) phi -= 360.0;
    if (phi < -180.0) phi += 360.0;
    const double ratio = phi / beamwidth_deg;
    return g_max - std::min(12.0 * ratio * ratio, max_attenuation_db);
}

double LinkBudget::linear_gain() const {
    return std::clamp(std::pow(10.0, -(PL - antenna_gain_db) / 10.0), 1e-300, 1.0);
}

LinkInputs link_inputs(const BaseStationSite& site, Vec2 user_position, const BuildingMap& map,
                       const ChannelConfig& cfg, double shadow_deviate) {
    LinkInputs link;
    link.tx = {site.position, site.antenna_height_m};
    link.rx = {user_position, cfg.ue_height_m};
    link.freq_mhz = site.carrier_freq_mhz;
    const int tx_building = site.indoor ? map.building_at(site.position) : kNone;
    const int rx_building = map.building_at(user_position);
    if (tx_building != rx_building) {
        link.walls = (tx_building != kNone ? 1 : 0) + (rx_building != kNone ? 1 : 0);
    }
    link.los = map.line_of_sight(link.tx, link.rx, tx_building, rx_building);
    link.shadow_deviate = shadow_deviate;
    link.antenna_gain_db = cfg.antenna.gain_db(site, user_position);
    return link;
}

LinkBudget compose_link_budget(const LinkInputs& link, const ChannelConfig& cfg, double power_gain) {
    LinkBudget lb;
    const double dz = link.tx.z - link.rx.z;
    lb.distance_m = std::sqrt(dot(link.tx.xy - link.rx.xy, link.tx.xy - link.rx.xy) + dz * dz);
    lb.los = link.los;
    lb.L_d = free_space_loss_db(lb.distance_m, link.freq_mhz);
    lb.L_s = link.shadow_deviate * (link.los ? cfg.sigma_los_db : cfg.sigma_nlos_db) +
             (link.los ? 0.0 : cfg.nlos_penalty_db) + cfg.penetration_db * link.walls;
    lb.L_f = fading_loss_db(power_gain);
    lb.PL = lb.L_d + lb.L_s + lb.L_f;
    lb.antenna_gain_db = link.antenna_gain_db;
    return lb;
}

ChannelOccupancy::ChannelOccupancy(std::size_t n_channels, const Allocation& allocation)
    : per_channel_(n_channels) {
    for (const auto& g : allocation) {
        if (g.assigned() && g.channel != kNone && g.power_w > 0.0)
            per_channel_.at(std::size_t(g.channel)).push_back({g.site, g.power_w});
    }
}

double sinr(std::size_t user, const Allocation& allocation, const ChannelOccupancy& occupancy,
            const LinkGains& gains, double noise_w) {
    const UserGrant& g = allocation.at(user);
    if (!g.assigned() || g.channel == kNone)
        throw UnassignedUserError("sinr requested for user " + std::to_string(user) +
                                  " without a resource block");
    const double* row = gains.row(user);
    double interference = 0.0;
    for (const auto& tx : occupancy.on(g.channel)) {
        if (tx.site != g.site) interference += row[tx.site] * tx.power_w;
    }
    return row[g.site] * g.power_w / (noise_w + interference);
}

} // namespace mndt::channel
