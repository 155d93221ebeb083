#pragma once

#include "mndt/rng.hpp"

#include <array>
#include <cstdint>
#include <ostream>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

/// Hierarchical traffic demand: a library of diurnal pattern clusters, and
/// per-user generators that switch between a normal and a burst regime.
namespace mndt::demand {

inline constexpr int kSlotsPerDay = 48;
inline constexpr double kSlotS = 1800.0;

struct DemandPattern {
    std::string name;
    std::array<double, kSlotsPerDay> mean_bps{}; ///< mean demand rate per half-hour slot
};

struct DemandPatternSet {
    std::vector<DemandPattern> patterns;

    std::size_t size() const { return patterns.size(); }
    const DemandPattern& operator[](std::size_t k) const { return patterns[k]; }
};

/// K=1 gives one flat pattern. Otherwise the archetypes commuter, office,
/// residential, entertainment and low-activity are used in that order, with
/// seed-dependent amplitudes; K > 5 cycles through them with further jitter.
DemandPatternSet build_pattern_library(std::uint64_t seed, int k);

enum class DemandMode { Normal, Burst };

struct UserDemandProcess {
    int user = 0;
    int cluster = 0;
    double stay_normal = 0.95;
    double stay_burst = 0.8;
    double burst_multiplier = 3.0;
    double dispersion = 2.0; ///< Gamma shape
    DemandMode mode = DemandMode::Normal;

    void check() const;
};

/// Process for one user with its cluster drawn uniformly from a per-user stream.
UserDemandProcess make_user_process(std::uint64_t seed, int user, int n_clusters);

/// Advances the switch chain once, then draws the demand (bits) of one step
/// of length step_s: Gamma with the given shape and mean pattern(slot) x burst
/// factor x step_s.
template <typename Urbg>
double sample_demand(UserDemandProcess& process, const DemandPatternSet& patterns, int slot, double step_s,
                     Urbg& gen);

struct EpisodeDemand {
    int user = 0;
    double total_bits = 0.0;
};

/// Episode totals ~ Uniform(0, 60 x bandwidth) bits, one stream per user.
std::vector<EpisodeDemand> sample_episode_demand(std::uint64_t seed, int n_users, double bandwidth_hz,
                                                 int steps = 20);

/// Episode totals from the hierarchical generator: each user's per-step
/// draws summed over `steps` steps starting at time of day `start_s`.
std::vector<EpisodeDemand> sample_hierarchical_episode_demand(std::uint64_t seed, int n_users,
                                                              const DemandPatternSet& patterns, double start_s,
                                                              int steps, double step_s);

/// CSV `t,user_id,demand_bits` of per-step hierarchical draws.
void write_demand_trace(std::ostream& out, std::uint64_t seed, int n_users, const DemandPatternSet& patterns,
                        double start_s, int steps, double step_s);

// ---------------------------------------------------------------------------

template <typename Urbg>
double sample_demand(UserDemandProcess& process, const DemandPatternSet& patterns, int slot, double step_s,
                     Urbg& gen) {
    if (slot < 0 || slot >= kSlotsPerDay) throw std::out_of_range("slot outside [0, 48)");
    if (process.cluster < 0 || std::size_t(process.cluster) >= patterns.size())
        throw std::out_of_range("cluster index outside the pattern library");
    const double u = std::uniform_real_distribution<double>(0.0, 1.0)(gen);
    if (process.mode == DemandMode::Normal) {
        if (u >= process.stay_normal) process.mode = DemandMode::Burst;
    } else if (u >= process.stay_burst) {
        process.mode = DemandMode::Normal;
    }
    double mean = patterns[std::size_t(process.cluster)].mean_bps[std::size_t(slot)] * step_s;
    if (process.mode == DemandMode::Burst) mean *= process.burst_multiplier;
    // drawn even when the mean is zero so the stream position does not depend on it
    const double g = std::gamma_distribution<double>(process.dispersion, 1.0)(gen);
    if (!(mean > 0.0)) return 0.0;
    return g * mean / process.dispersion;
}

} // namespace mndt::demand
