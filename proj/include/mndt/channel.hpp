#pragma once

#include "mndt/allocation.hpp"
#include "mndt/rng.hpp"
#include "mndt/scenario.hpp"
#include "mndt/spatial_index.hpp"

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

/// Link budgets: PL = L_d + L_s + L_f, received power, noise, SINR and the
/// Shannon rate with its inverse.
namespace mndt::channel {

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double v) { return 10.0 * std::log10(v); }
inline double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }
inline double watts_to_dbm(double w) { return 10.0 * std::log10(w) + 30.0; }

/// Friis loss in the km / MHz form. Distances below 1 m are clamped to 1 m.
double free_space_loss_db(double distance_m, double freq_mhz);

/// N = N0 + 10 log10(B), in dBm.
double noise_power_dbm(double noise_density_dbm_hz, double bandwidth_hz);

/// r = B log2(1 + sinr), bits/s.
double shannon_rate(double bandwidth_hz, double sinr_linear);

/// Smallest transmit power (W) that reaches `target_rate_bps` over a link of
/// linear gain `gain` with `noise_plus_interference_w` at the receiver.
double min_power_for_rate(double target_rate_bps, double bandwidth_hz, double gain,
                          double noise_plus_interference_w);

enum class FadingKind { None, Rayleigh, Rician, Nakagami };

struct FadingModel {
    FadingKind kind = FadingKind::Rayleigh;
    double parameter = 0.0; ///< Rician K-factor (linear) or Nakagami m

    static FadingModel none() { return {FadingKind::None, 0.0}; }
    static FadingModel rayleigh() { return {FadingKind::Rayleigh, 0.0}; }
    static FadingModel rician(double k_factor);
    static FadingModel nakagami(double m);
};

/// One draw of the unit-mean power gain |h|^2.
template <typename Urbg>
double fading_sample(const FadingModel& model, Urbg& gen);

/// L_f = -10 log10(|h|^2); the gain is floored at 1e-12 so L_f stays finite.
double fading_loss_db(double power_gain);

/// Static log-normal shadowing in dB for one (user, site) link; depends only
/// on (seed, user, site) and sigma.
double shadowing_sample(std::uint64_t seed, std::uint64_t user, std::uint64_t site, double sigma_db);

/// Standard-normal deviate behind shadowing_sample, so callers can cache it.
double shadowing_deviate(std::uint64_t seed, std::uint64_t user, std::uint64_t site);

struct Point3 {
    Vec2 xy;
    double z = 0.0;
};

/// LoS iff the 3-D segment clears every building it crosses: at each footprint
/// crossing the ray must be at or above the roof. Buildings listed in `ignore`
/// are skipped (callers pass the buildings that contain an endpoint).
bool los_check(const Point3& tx, const Point3& rx, std::span<const Building> buildings,
               std::span<const int> ignore = {});

/// Buildings with a spatial index for fast LoS and indoor lookup.
class BuildingMap {
  public:
    BuildingMap() = default;
    BuildingMap(const Rect& extent, std::span<const Building> buildings, double cell_size_m = 40.0);

    bool line_of_sight(const Point3& tx, const Point3& rx, int ignore_a = kNone,
                       int ignore_b = kNone) const;

    /// Building containing p, or kNone.
    int building_at(Vec2 p) const { return index_.find_containing(p); }

    std::size_t size() const { return buildings_.size(); }

  private:
    std::vector<Building> buildings_;
    std::vector<const Polygon*> footprints_;
    PolygonIndex index_;
};

/// Horizontal parabolic pattern: G = G_max - min(12 (phi / phi_3dB)^2, A_max).
struct AntennaPattern {
    double boresight_gain_outdoor_dbi = 15.0;
    double boresight_gain_indoor_dbi = 5.0;
    double beamwidth_deg = 65.0;
    double max_attenuation_db = 30.0;

    double gain_db(const BaseStationSite& site, Vec2 target) const;
};

struct RadioConfig {
    double noise_density_dbm_hz = -174.0;
    double rb_bandwidth_hz = 1.8e5;
    double carrier_freq_mhz = 2600.0;

    double noise_w() const { return dbm_to_watts(noise_power_dbm(noise_density_dbm_hz, rb_bandwidth_hz)); }
};

struct ChannelConfig {
    RadioConfig radio;
    double sigma_los_db = 4.0;
    double sigma_nlos_db = 8.0;
    double nlos_penalty_db = 20.0;
    double penetration_db = 20.0;
    double ue_height_m = 1.5;
    FadingModel fading_los = FadingModel::rician(5.0);
    FadingModel fading_nlos = FadingModel::rayleigh();
    AntennaPattern antenna;
};

struct LinkBudget {
    double distance_m = 0.0;
    bool los = true;
    double L_d = 0.0;
    double L_s = 0.0;
    double L_f = 0.0;
    double PL = 0.0;
    double antenna_gain_db = 0.0;

    /// P_rx = P_tx + G - PL.
    double rx_dbm(double tx_dbm) const { return tx_dbm + antenna_gain_db - PL; }
    /// Linear link gain 10^(-(PL - G)/10), clipped to (0, 1].
    double linear_gain() const;
};

/// Everything about one link that does not change within a step.
struct LinkInputs {
    Point3 tx;
    Point3 rx;
    double freq_mhz = 2600.0;
    bool los = true;
    int walls = 0;               ///< building walls crossed by the endpoints (0, 1 or 2)
    double shadow_deviate = 0.0; ///< standard-normal deviate of the static shadowing term
    double antenna_gain_db = 0.0;
};

/// Composes one budget. `power_gain` is the small-scale |h|^2 for this step.
LinkBudget compose_link_budget(const LinkInputs& link, const ChannelConfig& cfg, double power_gain);

/// Full path loss for a (user, site) link at one step: geometry, LoS test,
/// static shadowing keyed on (seed, user, site) and a fresh fading draw.
template <typename Urbg>
LinkBudget path_loss(const BaseStationSite& site, Vec2 user_position, const BuildingMap& map,
                     const ChannelConfig& cfg, std::uint64_t seed, std::uint64_t user,
                     std::uint64_t site_index, Urbg& fading_rng, bool fading_enabled = true);

/// Active transmitter on one channel.
struct Transmitter {
    int site = kNone;
    double power_w = 0.0;
};

/// Transmitters per channel index, built once per allocation.
class ChannelOccupancy {
  public:
    ChannelOccupancy(std::size_t n_channels, const Allocation& allocation);
    std::span<const Transmitter> on(int channel) const { return per_channel_[std::size_t(channel)]; }
    std::size_t channels() const { return per_channel_.size(); }

  private:
    std::vector<std::vector<Transmitter>> per_channel_;
};

class UnassignedUserError : public std::logic_error {
  public:
    using std::logic_error::logic_error;
};

/// SINR of `user` on its granted channel; other transmitters on the same
/// channel index interfere through their gain towards this user.
double sinr(std::size_t user, const Allocation& allocation, const ChannelOccupancy& occupancy,
            const LinkGains& gains, double noise_w);

// ---------------------------------------------------------------------------

template <typename Urbg>
double fading_sample(const FadingModel& model, Urbg& gen) {
    switch (model.kind) {
    case FadingKind::None:
        return 1.0;
    case FadingKind::Rayleigh:
        return std::exponential_distribution<double>(1.0)(gen);
    case FadingKind::Rician: {
        const double k = model.parameter;
        std::normal_distribution<double> n(0.0, std::sqrt(0.5 / (k + 1.0)));
        const double los = std::sqrt(k / (k + 1.0));
        const double re = los + n(gen);
        const double im = n(gen);
        return re * re + im * im;
    }
    case FadingKind::Nakagami: {
        const double m = model.parameter;
        return std::gamma_distribution<double>(m, 1.0 / m)(gen);
    }
    }
    return 1.0;
}

LinkInputs link_inputs(const BaseStationSite& site, Vec2 user_position, const BuildingMap& map,
                       const ChannelConfig& cfg, double shadow_deviate);

template <typename Urbg>
LinkBudget path_loss(const BaseStationSite& site, Vec2 user_position, const BuildingMap& map,
                     const ChannelConfig& cfg, std::uint64_t seed, std::uint64_t user,
                     std::uint64_t site_index, Urbg& fading_rng, bool fading_enabled) {
    const LinkInputs link =
        link_inputs(site, user_position, map, cfg, shadowing_deviate(seed, user, site_index));
    const FadingModel& model = link.los ? cfg.fading_los : cfg.fading_nlos;
    const double h2 = fading_enabled ? fading_sample(model, fading_rng) : 1.0;
    return compose_link_budget(link, cfg, h2);
}

} // namespace mndt::channel
