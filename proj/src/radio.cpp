#include "mndt/radio.hpp"

#include "mndt/channel.hpp"

#include <cstdio>
#include <limits>
#include <numeric>

namespace mndt {

AllocAction to_action(const Allocation& allocation) {
    AllocAction a;
    for (std::size_t u = 0; u < allocation.size(); ++u) {
        const UserGrant& g = allocation[u];
        if (g.assigned()) a.grants.push_back({int(u), g.site, g.channel, g.power_w});
    }
    return a;
}

} // namespace mndt

namespace mndt::radio {

std::vector<int> nearest_bs_association(std::span<const Vec2> users, std::span<const BaseStationSite> sites) {
    if (sites.empty()) throw std::invalid_argument("nearest-site association needs at least one site");
    std::vector<int> out(users.size(), 0);
    for (std::size_t u = 0; u < users.size(); ++u) {
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t s = 0; s < sites.size(); ++s) {
            const Vec2 d = users[u] - sites[s].position;
            const double d2 = dot(d, d);
            if (d2 < best) {
                best = d2;
                out[u] = int(s);
            }
        }
    }
    return out;
}

std::vector<double> fair_power_allocation(const BaseStationSite& site, std::size_t k) {
    if (k == 0) throw std::invalid_argument("fair power allocation needs at least one served user");
    return std::vector<double>(k, site_budget_w(site) / double(k));
}

SiteLedger::SiteLedger(std::span<const BaseStationSite> sites, const Allocation& allocation)
    : busy_(sites.size()), budget_(sites.size()), used_w_(sites.size(), 0.0), served_(sites.size(), 0) {
    for (std::size_t s = 0; s < sites.size(); ++s) {
        busy_[s].assign(std::size_t(std::max(0, sites[s].n_channels)), 0);
        budget_[s] = site_budget_w(sites[s]);
    }
    for (const UserGrant& g : allocation) {
        if (g.assigned()) commit(g.site, g.channel, g.power_w);
    }
}

int SiteLedger::free_channel(int site) const {
    const auto& b = busy_.at(std::size_t(site));
    for (std::size_t c = 0; c < b.size(); ++c)
        if (!b[c]) return int(c);
    return kNone;
}

void SiteLedger::commit(int site, int channel, double power_w) {
    auto& b = busy_.at(std::size_t(site));
    if (channel != kNone) b.at(std::size_t(channel)) = 1;
    used_w_[std::size_t(site)] += power_w;
    ++served_[std::size_t(site)];
}

AdmissionResult three_phase_admission(int user, double rate_bps, std::span<const int> candidates,
                                      Allocation& allocation, SiteLedger& ledger, const AdmissionInputs& in) {
    if (!in.gains) throw std::invalid_argument("admission needs a link-gain matrix");
    if (allocation.at(std::size_t(user)).assigned()) throw std::logic_error("user is already admitted");
    if (!(rate_bps > 0.0)) return AdmissionResult::NoDemand;
    const double interference = in.interference_w.empty() ? 0.0 : in.interference_w[std::size_t(user)];
    for (int site : candidates) {
        // phase i: next candidate; phase ii: eligibility
        const int ch = ledger.free_channel(site);
        if (ch == kNone) continue;
        const double g = (*in.gains)(std::size_t(user), std::size_t(site));
        if (!(g > 0.0)) continue;
        const double p_min = channel::min_power_for_rate(rate_bps, in.bandwidth_hz, g, in.noise_w + interference);
        if (!(p_min <= ledger.residual_w(site))) continue;
        // phase iii: commit
        allocation[std::size_t(user)] = {site, ch, p_min};
        ledger.commit(site, ch, p_min);
        return AdmissionResult::Admitted;
    }
    return AdmissionResult::Outage;
}

std::vector<int> candidates_by_gain(const LinkGains& gains, std::size_t user) {
    std::vector<int> order(gains.sites);
    std::iota(order.begin(), order.end(), 0);
    const double* row = gains.row(user);
    std::stable_sort(order.begin(), order.end(), [row](int a, int b) { return row[a] > row[b]; });
    return order;
}

KpiRecord compute_kpis(int t, const Allocation& allocation, std::span<const double> rates,
                       std::span<const double> remaining_demand, double dt_s, StepTimings timings,
                       double outage_threshold_bps) {
    if (rates.size() != remaining_demand.size()) throw std::invalid_argument("rate and demand vectors differ in size");
    KpiRecord k;
    k.t = t;
    k.per_user_rate.assign(rates.begin(), rates.end());
    std::size_t outage = 0;
    for (std::size_t u = 0; u < rates.size(); ++u) {
        k.sum_bs_rate += rates[u];
        k.network_throughput += std::min(remaining_demand[u], rates[u] * dt_s);
        if (rates[u] < outage_threshold_bps) ++outage;
    }
    for (const UserGrant& g : allocation)
        if (g.assigned()) k.total_tx_power_w += g.power_w;
    k.outage_ratio = rates.empty() ? 0.0 : double(outage) / double(rates.size());
    k.action_selection_time_s = timings.action_selection_s;
    k.interaction_time_s = timings.interaction_s;
    return k;
}

std::string kpi_csv_row(const KpiRecord& k) {
    char buf[256];
    std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.17g,%.17g,%.9g,%.9g", k.t, k.sum_bs_rate, k.total_tx_power_w,
                  k.network_throughput, k.outage_ratio, k.action_selection_time_s, k.interaction_time_s);
    return buf;
}

} // namespace mndt::radio
