#pragma once

#include "mndt/allocation.hpp"
#include "mndt/channel.hpp"
#include "mndt/scenario.hpp"

#include <algorithm>
#include <random>
#include <span>
#include <string>
#include <vector>

/// Base-station behaviours: default association and power policies, the
/// three-phase admission procedure and per-step KPI monitoring.
namespace mndt::radio {

inline double site_budget_w(const BaseStationSite& site) { return channel::dbm_to_watts(site.max_tx_power_dbm); }

/// Euclidean-nearest site per user; ties go to the lowest site index.
std::vector<int> nearest_bs_association(std::span<const Vec2> users, std::span<const BaseStationSite> sites);

/// Per site (in index order) its users are shuffled and given distinct,
/// randomly chosen channels until the site runs out; the rest get kNone.
template <typename Urbg>
std::vector<int> random_rb_assignment(std::span<const int> association, std::span<const BaseStationSite> sites,
                                      Urbg& gen);

/// budget / k watts for each of k users.
std::vector<double> fair_power_allocation(const BaseStationSite& site, std::size_t k);

/// Nearest site, random channel, fair power split over each site's served users.
template <typename Urbg>
Allocation default_allocation(std::span<const Vec2> users, std::span<const BaseStationSite> sites, Urbg& gen);

/// Used channels and committed power per site, kept in step with an Allocation.
class SiteLedger {
  public:
    SiteLedger(std::span<const BaseStationSite> sites, const Allocation& allocation);

    int free_channel(int site) const; ///< lowest free channel, or kNone
    double residual_w(int site) const { return budget_[std::size_t(site)] - used_w_[std::size_t(site)]; }
    double used_w(int site) const { return used_w_[std::size_t(site)]; }
    int served(int site) const { return served_[std::size_t(site)]; }
    void commit(int site, int channel, double power_w);

  private:
    std::vector<std::vector<char>> busy_;
    std::vector<double> budget_;
    std::vector<double> used_w_;
    std::vector<int> served_;
};

struct AdmissionInputs {
    const LinkGains* gains = nullptr;
    double bandwidth_hz = 1.8e5;
    double noise_w = 0.0;
    /// Interference (W) assumed at the user when sizing its power; 0 if empty.
    std::span<const double> interference_w;
};

enum class AdmissionResult { Admitted, Outage, NoDemand };

/// Walks `candidates` in order; a site is eligible when it has a free channel
/// and its residual budget covers the minimum power for `rate_bps`. The first
/// eligible site gets the user on its lowest free channel at that power.
/// Other users' grants are never touched.
AdmissionResult three_phase_admission(int user, double rate_bps, std::span<const int> candidates,
                                      Allocation& allocation, SiteLedger& ledger, const AdmissionInputs& in);

/// Site indices sorted by descending link gain (ascending path loss), ties by index.
std::vector<int> candidates_by_gain(const LinkGains& gains, std::size_t user);

struct KpiRecord {
    int t = 0;
    double sum_bs_rate = 0.0;      ///< bits/s over all served users
    double total_tx_power_w = 0.0;
    std::vector<double> per_user_rate;
    double network_throughput = 0.0; ///< bits, capped per user at remaining demand
    double outage_ratio = 0.0;
    double action_selection_time_s = 0.0;
    double interaction_time_s = 0.0;

    bool operator==(const KpiRecord&) const = default;
};

struct StepTimings {
    double action_selection_s = 0.0;
    double interaction_s = 0.0;
};

inline constexpr double kDefaultOutageThresholdBps = 1e3;

/// `remaining_demand` is the demand before this step is served.
KpiRecord compute_kpis(int t, const Allocation& allocation, std::span<const double> rates,
                       std::span<const double> remaining_demand, double dt_s, StepTimings timings = {},
                       double outage_threshold_bps = kDefaultOutageThresholdBps);

inline constexpr const char* kKpiCsvHeader =
    "t,sum_bs_rate,total_tx_power_w,throughput_bits,outage_ratio,action_time_s,interaction_time_s";

std::string kpi_csv_row(const KpiRecord& k);

// ---------------------------------------------------------------------------

template <typename Urbg>
std::vector<int> random_rb_assignment(std::span<const int> association, std::span<const BaseStationSite> sites,
                                      Urbg& gen) {
    std::vector<std::vector<int>> users_at(sites.size());
    for (std::size_t u = 0; u < association.size(); ++u) {
        const int s = association[u];
        if (s != kNone) users_at.at(std::size_t(s)).push_back(int(u));
    }
    std::vector<int> channel(association.size(), kNone);
    for (std::size_t s = 0; s < sites.size(); ++s) {
        auto& us = users_at[s];
        if (us.empty()) continue;
        std::shuffle(us.begin(), us.end(), gen);
        std::vector<int> free(std::size_t(std::max(0, sites[s].n_channels)));
        for (std::size_t c = 0; c < free.size(); ++c) free[c] = int(c);
        std::shuffle(free.begin(), free.end(), gen);
        const std::size_t n = std::min(us.size(), free.size());
        for (std::size_t k = 0; k < n; ++k) channel[std::size_t(us[k])] = free[k];
    }
    return channel;
}

template <typename Urbg>
Allocation default_allocation(std::span<const Vec2> users, std::span<const BaseStationSite> sites, Urbg& gen) {
    const std::vector<int> assoc = nearest_bs_association(users, sites);
    const std::vector<int> channel = random_rb_assignment(std::span<const int>(assoc), sites, gen);
    std::vector<std::size_t> served(sites.size(), 0);
    for (std::size_t u = 0; u < users.size(); ++u)
        if (channel[u] != kNone) ++served[std::size_t(assoc[u])];
    Allocation alloc(users.size());
    for (std::size_t u = 0; u < users.size(); ++u) {
        if (channel[u] == kNone) continue;
        const auto s = std::size_t(assoc[u]);
        alloc[u] = {assoc[u], channel[u], site_budget_w(sites[s]) / double(served[s])};
    }
    return alloc;
}

} // namespace mndt::radio
