#include "mndt/alloc_opt.hpp"

#include "mndt/channel.hpp"
#include "mndt/parallel.hpp"
#include "mndt/radio.hpp"

#include <cmath>
#include <numeric>

namespace mndt::alloc_opt {

InterferenceSnapshot::InterferenceSnapshot(const Allocation& allocation, const Scenario& scenario)
    : sites(scenario.sites.size()) {
    for (const auto& s : scenario.sites) channels = std::max(channels, std::size_t(std::max(0, s.n_channels)));
    power_w.assign(sites * channels, 0.0);
    site_total_w.assign(sites, 0.0);
    for (const UserGrant& g : allocation) {
        if (!g.assigned() || g.channel == kNone) continue;
        power_w[std::size_t(g.site) * channels + std::size_t(g.channel)] += g.power_w;
        site_total_w[std::size_t(g.site)] += g.power_w;
    }
}

double InterferenceSnapshot::on_channel(const LinkGains& gains, std::size_t user, int serving, std::size_t c) const {
    const double* row = gains.row(user);
    double i = 0.0;
    for (std::size_t s = 0; s < sites; ++s)
        if (int(s) != serving) i += row[s] * power_w[s * channels + c];
    return i;
}

namespace {

struct Emitter {
    std::size_t site;
    std::size_t channel;
    double power_w;
};

std::vector<Emitter> emitters(const InterferenceSnapshot& snap) {
    std::vector<Emitter> out;
    for (std::size_t s = 0; s < snap.sites; ++s)
        for (std::size_t c = 0; c < snap.channels; ++c)
            if (snap(s, c) > 0.0) out.push_back({s, c, snap(s, c)});
    return out;
}

// Interference per channel at one user from every emitter, own site included.
void channel_interference(const LinkGains& gains, std::size_t u, std::span<const Emitter> em, std::vector<double>& out) {
    std::fill(out.begin(), out.end(), 0.0);
    const double* row = gains.row(u);
    for (const Emitter& e : em) out[e.channel] += row[e.site] * e.power_w;
}

double rate_bits(double bw, double dt, double signal_w, double noise_plus_interference_w) {
    return channel::shannon_rate(bw, signal_w / noise_plus_interference_w) * dt;
}

} // namespace

EdgeScores score_edges(const LinkContext& ctx, std::span<const double> delta, std::span<const double> share_w,
                       const InterferenceSnapshot& snap, double lambda) {
    const LinkGains& g = *ctx.gains;
    const auto& sites = ctx.scenario->sites;
    if (delta.size() != g.users || share_w.size() != g.sites || sites.size() != g.sites)
        throw std::invalid_argument("score_edges: dimension mismatch");
    EdgeScores e;
    e.users = g.users;
    e.sites = g.sites;
    e.reward.resize(g.users * g.sites);
    e.cost.resize(g.users * g.sites);
    e.weight.resize(g.users * g.sites);
    const auto em = emitters(snap);
    parallel_chunks(g.users, [&](std::size_t b, std::size_t end) {
        std::vector<double> per_channel(snap.channels), prefix(snap.channels + 1);
        for (std::size_t u = b; u < end; ++u) {
            channel_interference(g, u, em, per_channel);
            prefix[0] = 0.0;
            for (std::size_t c = 0; c < snap.channels; ++c) prefix[c + 1] = prefix[c] + per_channel[c];
            const double* row = g.row(u);
            for (std::size_t s = 0; s < g.sites; ++s) {
                const auto n_ch = std::min<std::size_t>(std::size_t(std::max(1, sites[s].n_channels)), snap.channels);
                double own = 0.0;
                for (std::size_t c = 0; c < n_ch; ++c) own += snap(s, c);
                const double i_mean = n_ch > 0 ? std::max(0.0, prefix[n_ch] - row[s] * own) / double(n_ch) : 0.0;
                const double r = rate_bits(ctx.bandwidth_hz, ctx.dt_s, row[s] * share_w[s], ctx.noise_w + i_mean);
                const double c = std::max(0.0, delta[u] - r);
                e.reward[u * g.sites + s] = r;
                e.cost[u * g.sites + s] = c;
                e.weight[u * g.sites + s] = r - lambda * c;
            }
        }
    }, 64);
    return e;
}

namespace {

// Recursive bisection of site indices until each group holds at most max_slots slots.
void split_sites(std::vector<int> group, const Scenario& scenario, std::span<const int> slots, std::size_t max_slots,
                 std::vector<std::vector<int>>& out) {
    std::size_t total = 0;
    for (int s : group) total += std::size_t(slots[std::size_t(s)]);
    if (total <= max_slots || group.size() <= 1) {
        out.push_back(std::move(group));
        return;
    }
    Rect box{scenario.sites[std::size_t(group[0])].position, scenario.sites[std::size_t(group[0])].position};
    for (int s : group) {
        const Vec2 p = scenario.sites[std::size_t(s)].position;
        box.min = {std::min(box.min.x, p.x), std::min(box.min.y, p.y)};
        box.max = {std::max(box.max.x, p.x), std::max(box.max.y, p.y)};
    }
    const bool by_x = box.width() >= box.height();
    std::sort(group.begin(), group.end(), [&](int a, int b) {
        const Vec2 pa = scenario.sites[std::size_t(a)].position, pb = scenario.sites[std::size_t(b)].position;
        const double ka = by_x ? pa.x : pa.y, kb = by_x ? pb.x : pb.y;
        return ka != kb ? ka < kb : a < b;
    });
    const auto mid = group.begin() + std::ptrdiff_t(group.size() / 2);
    split_sites(std::vector<int>(group.begin(), mid), scenario, slots, max_slots, out);
    split_sites(std::vector<int>(mid, group.end()), scenario, slots, max_slots, out);
}

void solve_group(std::span<const int> users, std::span<const int> group, std::span<const int> slots,
                 const EdgeScores& scores, std::span<const double> delta, double lambda, Association& out) {
    std::vector<int> column_site;
    for (int s : group)
        for (int k = 0; k < slots[std::size_t(s)]; ++k) column_site.push_back(s);
    if (users.empty() || column_site.empty()) return;
    const std::size_t rows = users.size(), cols = column_site.size();
    std::vector<double> w(rows * cols);
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < cols; ++j)
            w[i * cols + j] = matching_weight(scores, delta, lambda, std::size_t(users[i]), std::size_t(column_site[j]));
    const Assignment a = hungarian(w, rows, cols, true);
    for (std::size_t i = 0; i < rows; ++i) {
        if (a.row_to_col[i] < 0) continue;
        const int s = column_site[std::size_t(a.row_to_col[i])];
        out.site[std::size_t(users[i])] = s;
        out.weight += w[i * cols + std::size_t(a.row_to_col[i])];
    }
}

} // namespace

Association match_users_to_bs(const EdgeScores& scores, std::span<const double> delta, double lambda,
                              std::span<const int> capacity, std::span<const char> eligible,
                              const Scenario& scenario, const OptimizerConfig& cfg) {
    Association out;
    out.site.assign(scores.users, kNone);
    std::vector<int> users;
    for (std::size_t u = 0; u < scores.users; ++u)
        if (eligible.empty() || eligible[u]) users.push_back(int(u));
    if (users.empty() || scores.sites == 0) return out;

    const std::size_t per_site = (users.size() + scores.sites - 1) / scores.sites + std::size_t(std::max(0, cfg.replication_slack));
    std::vector<int> slots(scores.sites);
    std::size_t total_slots = 0;
    for (std::size_t s = 0; s < scores.sites; ++s) {
        slots[s] = int(std::min<std::size_t>(std::size_t(std::max(0, capacity[s])), per_site));
        total_slots += std::size_t(slots[s]);
    }

    std::vector<int> all_sites(scores.sites);
    std::iota(all_sites.begin(), all_sites.end(), 0);
    if (std::max(users.size(), total_slots) <= cfg.max_global_dim) {
        solve_group(users, all_sites, slots, scores, delta, lambda, out);
        return out;
    }

    std::vector<std::vector<int>> groups;
    split_sites(all_sites, scenario, slots, std::max<std::size_t>(1, cfg.partition_slots), groups);
    std::vector<int> group_of(scores.sites);
    for (std::size_t k = 0; k < groups.size(); ++k)
        for (int s : groups[k]) group_of[std::size_t(s)] = int(k);
    std::vector<std::vector<int>> members(groups.size());
    for (int u : users) {
        std::size_t best = 0;
        for (std::size_t s = 1; s < scores.sites; ++s)
            if (scores.w(std::size_t(u), s) > scores.w(std::size_t(u), best)) best = s;
        members[std::size_t(group_of[best])].push_back(u);
    }
    std::vector<Association> parts(groups.size());
    parallel_chunks(groups.size(), [&](std::size_t b, std::size_t e) {
        for (std::size_t k = b; k < e; ++k) {
            parts[k].site.assign(scores.users, kNone);
            solve_group(members[k], groups[k], slots, scores, delta, lambda, parts[k]);
        }
    }, 1);
    for (std::size_t k = 0; k < groups.size(); ++k) {
        for (int u : members[k]) out.site[std::size_t(u)] = parts[k].site[std::size_t(u)];
        out.weight += parts[k].weight;
    }
    return out;
}

std::vector<int> match_users_to_rb(int site, std::span<const int> users, const LinkContext& ctx, double share_w,
                                   const InterferenceSnapshot& snap) {
    const LinkGains& g = *ctx.gains;
    const auto n_ch = std::size_t(std::max(0, ctx.scenario->sites.at(std::size_t(site)).n_channels));
    if (users.size() > n_ch) throw std::invalid_argument("more users than channels at site " + std::to_string(site));
    std::vector<int> out(users.size(), kNone);
    if (users.empty()) return out;
    const auto em = emitters(snap);
    std::vector<double> per_channel(snap.channels);
    std::vector<double> w(users.size() * n_ch);
    for (std::size_t i = 0; i < users.size(); ++i) {
        const auto u = std::size_t(users[i]);
        channel_interference(g, u, em, per_channel);
        const double gs = g(u, std::size_t(site));
        for (std::size_t c = 0; c < n_ch; ++c) {
            const double own = c < snap.channels ? snap(std::size_t(site), c) : 0.0;
            const double i_c = c < snap.channels ? std::max(0.0, per_channel[c] - gs * own) : 0.0;
            w[i * n_ch + c] = rate_bits(ctx.bandwidth_hz, ctx.dt_s, gs * share_w, ctx.noise_w + i_c);
        }
    }
    const Assignment a = hungarian(w, users.size(), n_ch, true);
    for (std::size_t i = 0; i < users.size(); ++i) out[i] = a.row_to_col[i];
    return out;
}

namespace {

// Shrinks the site's powers until their left-to-right sum is within budget.
void clamp_to_budget(std::vector<double*>& powers, double budget) {
    for (int guard = 0; guard < 64; ++guard) {
        double sum = 0.0;
        for (double* p : powers) sum += *p;
        if (sum <= budget) return;
        const double f = budget / sum;
        for (double* p : powers) *p = std::nextafter(*p * f, 0.0);
    }
}

std::vector<std::vector<std::size_t>> users_by_site(const Allocation& a, std::size_t n_sites) {
    std::vector<std::vector<std::size_t>> by(n_sites);
    for (std::size_t u = 0; u < a.size(); ++u)
        if (a[u].assigned()) by.at(std::size_t(a[u].site)).push_back(u);
    return by;
}

} // namespace

void allocate_power(Allocation& allocation, std::span<const double> delta, const LinkContext& ctx,
                    const InterferenceSnapshot& snap, int rounds) {
    const LinkGains& g = *ctx.gains;
    const auto& sites = ctx.scenario->sites;
    const auto by_site = users_by_site(allocation, sites.size());
    const std::size_t n = allocation.size();

    std::vector<double> interference(n, 0.0);
    for (std::size_t u = 0; u < n; ++u)
        if (allocation[u].assigned())
            interference[u] = snap.on_channel(g, u, allocation[u].site, std::size_t(allocation[u].channel));

    // users per channel, for the recomputation of interference
    std::size_t n_ch = 0;
    for (const auto& s : sites) n_ch = std::max(n_ch, std::size_t(std::max(0, s.n_channels)));
    std::vector<std::vector<std::size_t>> on_channel(n_ch);
    for (std::size_t u = 0; u < n; ++u)
        if (allocation[u].assigned()) on_channel[std::size_t(allocation[u].channel)].push_back(u);

    std::vector<double> p(n, 0.0);
    for (int r = 0; r < std::max(1, rounds); ++r) {
        for (std::size_t u = 0; u < n; ++u) {
            if (!allocation[u].assigned()) continue;
            const double gain = g(u, std::size_t(allocation[u].site));
            const double target = std::max(0.0, delta[u]) / ctx.dt_s;
            p[u] = gain > 0.0 ? channel::min_power_for_rate(target, ctx.bandwidth_hz, gain, ctx.noise_w + interference[u])
                              : 0.0;
            if (!std::isfinite(p[u])) p[u] = std::numeric_limits<double>::max();
        }
        for (std::size_t s = 0; s < sites.size(); ++s) {
            const double budget = radio::site_budget_w(sites[s]);
            double sum = 0.0;
            for (std::size_t u : by_site[s]) sum += p[u];
            if (sum > budget) {
                if (!std::isfinite(sum)) {
                    // an unreachable target swamps the rest; split evenly among the unreachable ones
                    std::size_t inf_count = 0;
                    for (std::size_t u : by_site[s]) inf_count += p[u] == std::numeric_limits<double>::max();
                    for (std::size_t u : by_site[s])
                        p[u] = p[u] == std::numeric_limits<double>::max() ? budget / double(inf_count) : 0.0;
                } else {
                    const double f = budget / sum;
                    for (std::size_t u : by_site[s]) p[u] *= f;
                }
            }
        }
        for (std::size_t u = 0; u < n; ++u) {
            if (!allocation[u].assigned()) continue;
            double i_w = 0.0;
            const double* row = g.row(u);
            for (std::size_t v : on_channel[std::size_t(allocation[u].channel)])
                if (allocation[v].site != allocation[u].site) i_w += row[std::size_t(allocation[v].site)] * p[v];
            interference[u] = i_w;
        }
    }

    for (std::size_t s = 0; s < sites.size(); ++s) {
        const auto& us = by_site[s];
        if (us.empty()) continue;
        const double budget = radio::site_budget_w(sites[s]);
        double sum = 0.0;
        for (std::size_t u : us) sum += p[u];
        const double spread = std::max(0.0, budget - sum) / double(us.size());
        std::vector<double*> ptrs;
        for (std::size_t u : us) {
            allocation[u].power_w = p[u] + spread;
            ptrs.push_back(&allocation[u].power_w);
        }
        clamp_to_budget(ptrs, budget);
    }
}

void fair_power(Allocation& allocation, const Scenario& scenario) {
    const auto by_site = users_by_site(allocation, scenario.sites.size());
    for (std::size_t s = 0; s < by_site.size(); ++s) {
        if (by_site[s].empty()) continue;
        const auto shares = radio::fair_power_allocation(scenario.sites[s], by_site[s].size());
        std::vector<double*> ptrs;
        for (std::size_t k = 0; k < by_site[s].size(); ++k) {
            allocation[by_site[s][k]].power_w = shares[k];
            ptrs.push_back(&allocation[by_site[s][k]].power_w);
        }
        clamp_to_budget(ptrs, radio::site_budget_w(scenario.sites[s]));
    }
}

// ---------------------------------------------------------------------------

std::vector<double> feedback_demand(std::span<const double> remaining, int remaining_steps, double kappa) {
    if (remaining_steps < 1) throw std::invalid_argument("single-step demand needs T_rem >= 1");
    std::vector<double> d(remaining.size());
    for (std::size_t u = 0; u < d.size(); ++u)
        d[u] = std::clamp(kappa * remaining[u] / double(remaining_steps), 0.0, remaining[u]);
    return d;
}

std::vector<double> FeedbackController::single_step_demand(const engine::Observation& obs, const engine::Environment&) {
    return feedback_demand(obs.remaining_demand, obs.remaining_steps, p_.kappa);
}

void FeedbackController::end_episode(double achieved) {
    if (frozen_) return;
    p_.kappa = std::clamp(p_.kappa + p_.eta * (p_.target - achieved), p_.kappa_min, p_.kappa_max);
}

std::vector<double> EqualDivisionController::single_step_demand(const engine::Observation& obs,
                                                                const engine::Environment& env) {
    const auto& init = env.initial_demand();
    const double steps = double(env.config().steps);
    std::vector<double> d(obs.remaining_demand.size());
    for (std::size_t u = 0; u < d.size(); ++u) d[u] = std::min(init[u] / steps, obs.remaining_demand[u]);
    return d;
}

// ---------------------------------------------------------------------------

MatchingPolicy::MatchingPolicy(std::string name, std::unique_ptr<DemandController> controller, OptimizerConfig cfg,
                               PowerMode power, bool serve_satisfied_users)
    : name_(std::move(name)), controller_(std::move(controller)), cfg_(cfg), power_(power),
      serve_satisfied_(serve_satisfied_users) {
    if (!controller_) throw std::invalid_argument("matching policy needs a demand controller");
}

AllocAction MatchingPolicy::act(const engine::Environment& env, const engine::Observation& obs) {
    const Scenario& sc = env.scenario();
    const std::size_t n = obs.remaining_demand.size();
    const std::size_t m = sc.sites.size();

    last_delta_ = controller_->single_step_demand(obs, env);
    const auto& delta = last_delta_;
    std::vector<char> eligible(n, 1);
    if (!serve_satisfied_)
        for (std::size_t u = 0; u < n; ++u) eligible[u] = delta[u] > 0.0;

    std::vector<int> capacity(m);
    std::vector<double> share(m);
    for (std::size_t s = 0; s < m; ++s) {
        capacity[s] = env.config().capacity(sc.sites[s]);
        share[s] = obs.max_tx_power_w[s] / double(std::max(1, capacity[s]));
    }
    const InterferenceSnapshot snap(env.last_allocation(), sc);
    const LinkContext ctx{&obs.decay, &sc, env.noise_w(), env.bandwidth_hz(), env.config().dt_s};

    const EdgeScores scores = score_edges(ctx, delta, share, snap, cfg_.lambda);
    const Association assoc = match_users_to_bs(scores, delta, cfg_.lambda, capacity, eligible, sc, cfg_);

    std::vector<std::vector<int>> users_at(m);
    for (std::size_t u = 0; u < n; ++u)
        if (assoc.site[u] != kNone) users_at[std::size_t(assoc.site[u])].push_back(int(u));
    Allocation alloc(n);
    std::vector<std::vector<int>> channels(m);
    parallel_chunks(m, [&](std::size_t b, std::size_t e) {
        for (std::size_t s = b; s < e; ++s) channels[s] = match_users_to_rb(int(s), users_at[s], ctx, share[s], snap);
    }, 8);
    for (std::size_t s = 0; s < m; ++s)
        for (std::size_t k = 0; k < users_at[s].size(); ++k)
            alloc[std::size_t(users_at[s][k])] = {int(s), channels[s][k], 0.0};

    if (power_ == PowerMode::Explicit) allocate_power(alloc, delta, ctx, snap, cfg_.power_rounds);
    else fair_power(alloc, sc);
    return to_action(alloc);
}

std::unique_ptr<MatchingPolicy> make_ours(OptimizerConfig cfg, FeedbackController::Params p) {
    return std::make_unique<MatchingPolicy>("ours", std::make_unique<FeedbackController>(p), cfg, PowerMode::Explicit,
                                            false);
}

std::unique_ptr<MatchingPolicy> make_equal(OptimizerConfig cfg) {
    return std::make_unique<MatchingPolicy>("equal", std::make_unique<EqualDivisionController>(), cfg,
                                            PowerMode::Explicit, false);
}

std::unique_ptr<MatchingPolicy> make_ignore(OptimizerConfig cfg) {
    cfg.lambda = 0.0;
    return std::make_unique<MatchingPolicy>("ignore", std::make_unique<EqualDivisionController>(), cfg,
                                            PowerMode::FairSplit, true);
}

AllocAction NearestPolicy::act(const engine::Environment& env, const engine::Observation&) {
    std::vector<BaseStationSite> sites = env.scenario().sites;
    for (auto& s : sites) s.n_channels = env.config().capacity(s);
    auto gen = rng::light_stream(env.seed(), "nearest-rb", env.state().cursor);
    return to_action(radio::default_allocation(std::span<const Vec2>(env.state().positions),
                                               std::span<const BaseStationSite>(sites), gen));
}

AllocAction AdmissionPolicy::act(const engine::Environment& env, const engine::Observation& obs) {
    std::vector<BaseStationSite> sites = env.scenario().sites;
    for (auto& s : sites) s.n_channels = env.config().capacity(s);
    const std::size_t n = obs.remaining_demand.size();
    Allocation alloc(n);
    radio::SiteLedger ledger(sites, alloc);
    radio::AdmissionInputs in;
    in.gains = &obs.decay;
    in.bandwidth_hz = env.bandwidth_hz();
    in.noise_w = env.noise_w();
    in.interference_w = env.last_interference_w();
    const double per_step = double(std::max(1, obs.remaining_steps)) * env.config().dt_s;
    for (std::size_t u = 0; u < n; ++u) {
        const auto cand = radio::candidates_by_gain(obs.decay, u);
        radio::three_phase_admission(int(u), obs.remaining_demand[u] / per_step, cand, alloc, ledger, in);
    }
    return to_action(alloc);
}

TrainingLog train_feedback(MatchingPolicy& policy, FeedbackController& controller, const Scenario& scenario,
                           const engine::EpisodeConfig& cfg, std::uint64_t seed, int episodes) {
    TrainingLog log;
    controller.freeze(false);
    engine::Environment env(scenario, cfg);
    for (int i = 0; i < episodes; ++i) {
        const double k = controller.kappa();
        const auto trace = engine::run_episode(env, policy, rng::stream_key(seed, "train", std::uint64_t(i)),
                                               {false, false});
        log.kappa.push_back(k);
        log.satisfaction.push_back(engine::satisfaction_ratio(trace));
        log.throughput.push_back(trace.total_reward);
    }
    const double target = controller.params().target;
    int best = -1;
    for (int i = 0; i < episodes; ++i) {
        const auto k = std::size_t(i);
        if (log.satisfaction[k] < target) continue;
        if (best < 0 || log.throughput[k] > log.throughput[std::size_t(best)]) best = i;
    }
    if (best < 0) {
        for (int i = 0; i < episodes; ++i)
            if (best < 0 || log.satisfaction[std::size_t(i)] > log.satisfaction[std::size_t(best)]) best = i;
    }
    log.selected_kappa = best >= 0 ? log.kappa[std::size_t(best)] : controller.kappa();
    controller.set_kappa(log.selected_kappa);
    controller.freeze(true);
    return log;
}

} // namespace mndt::alloc_opt
