#include "mndt/engine.hpp"

#include "mndt/parallel.hpp"

#include <chrono>
#include <cmath>

namespace mndt::engine {

const char* to_string(Constraint c) {
    switch (c) {
    case Constraint::Malformed:
        return "Malformed";
    case Constraint::OneBaseStation:
        return "OneBaseStation";
    case Constraint::OneResourceBlockPerUser:
        return "OneResourceBlockPerUser";
    case Constraint::OneUserPerResourceBlock:
        return "OneUserPerResourceBlock";
    case Constraint::SiteCapacity:
        return "SiteCapacity";
    case Constraint::SitePowerBudget:
        return "SitePowerBudget";
    }
    return "Unknown";
}

ConstraintViolation::ConstraintViolation(Constraint c, const std::string& detail)
    : std::runtime_error(std::string(to_string(c)) + ": " + detail), constraint_(c) {}

void validate_action(const AllocAction& action, const Scenario& scenario, const EpisodeConfig& cfg,
                     std::size_t n_users) {
    const auto& sites = scenario.sites;
    for (const Grant& g : action.grants) {
        if (g.user < 0 || std::size_t(g.user) >= n_users)
            throw ConstraintViolation(Constraint::Malformed, "grant for unknown user " + std::to_string(g.user));
        if (g.site < 0 || std::size_t(g.site) >= sites.size())
            throw ConstraintViolation(Constraint::Malformed, "grant to unknown site " + std::to_string(g.site));
        if (g.channel < 0 || g.channel >= sites[std::size_t(g.site)].n_channels)
            throw ConstraintViolation(Constraint::Malformed, "channel " + std::to_string(g.channel) +
                                                                 " does not exist at site " + std::to_string(g.site));
        if (!std::isfinite(g.power_w) || g.power_w < 0.0)
            throw ConstraintViolation(Constraint::Malformed, "power must be finite and non-negative");
    }

    // per user: one site, one resource block
    std::vector<int> user_site(n_users, kNone);
    std::vector<char> user_seen(n_users, 0);
    for (const Grant& g : action.grants) {
        const auto u = std::size_t(g.user);
        if (!user_seen[u]) {
            user_seen[u] = 1;
            user_site[u] = g.site;
            continue;
        }
        if (user_site[u] != g.site)
            throw ConstraintViolation(Constraint::OneBaseStation,
                                      "user " + std::to_string(g.user) + " is connected to more than one site");
    }
    std::fill(user_seen.begin(), user_seen.end(), 0);
    for (const Grant& g : action.grants) {
        const auto u = std::size_t(g.user);
        if (user_seen[u])
            throw ConstraintViolation(Constraint::OneResourceBlockPerUser,
                                      "user " + std::to_string(g.user) + " holds more than one resource block");
        user_seen[u] = 1;
    }

    // per site: one user per channel, capacity, power
    std::vector<std::vector<int>> holder(sites.size());
    for (std::size_t s = 0; s < sites.size(); ++s) holder[s].assign(std::size_t(sites[s].n_channels), kNone);
    std::vector<int> served(sites.size(), 0);
    std::vector<double> power(sites.size(), 0.0);
    for (const Grant& g : action.grants) {
        int& h = holder[std::size_t(g.site)][std::size_t(g.channel)];
        if (h != kNone)
            throw ConstraintViolation(Constraint::OneUserPerResourceBlock,
                                      "channel " + std::to_string(g.channel) + " at site " + std::to_string(g.site) +
                                          " is granted to users " + std::to_string(h) + " and " +
                                          std::to_string(g.user));
        h = g.user;
        ++served[std::size_t(g.site)];
        power[std::size_t(g.site)] += g.power_w;
    }
    for (std::size_t s = 0; s < sites.size(); ++s) {
        if (served[s] > cfg.capacity(sites[s]))
            throw ConstraintViolation(Constraint::SiteCapacity, "site " + std::to_string(s) + " serves " +
                                                                    std::to_string(served[s]) + " users, limit " +
                                                                    std::to_string(cfg.capacity(sites[s])));
        const double budget = radio::site_budget_w(sites[s]);
        if (power[s] > budget * (1.0 + 1e-12))
            throw ConstraintViolation(Constraint::SitePowerBudget,
                                      "site " + std::to_string(s) + " transmits " + std::to_string(power[s]) +
                                          " W, budget " + std::to_string(budget) + " W");
    }
}

Allocation to_allocation(const AllocAction& action, std::size_t n_users) {
    Allocation a(n_users);
    for (const Grant& g : action.grants) a.at(std::size_t(g.user)) = {g.site, g.channel, g.power_w};
    return a;
}

// ---------------------------------------------------------------------------

Environment::Environment(const Scenario& scenario, EpisodeConfig config)
    : scenario_(&scenario), config_(std::move(config)), buildings_(scenario.extent, scenario.buildings),
      mobility_(scenario, config_.mobility) {
    if (config_.n_users < 0) throw std::invalid_argument("negative user count");
    if (config_.steps < 1) throw std::invalid_argument("episode needs at least one step");
    if (!(config_.dt_s > 0.0)) throw std::invalid_argument("dt must be positive");
    if (scenario.sites.empty()) throw std::invalid_argument("scenario has no sites");
    noise_w_ = config_.channel.radio.noise_w();
}

const CmdpState& Environment::reset(std::uint64_t seed) {
    seed_ = seed;
    const auto n = std::size_t(config_.n_users);
    const auto m = scenario_->sites.size();

    state_ = {};
    state_.remaining_steps = config_.steps;
    state_.max_tx_power_w.resize(m);
    for (std::size_t s = 0; s < m; ++s) state_.max_tx_power_w[s] = radio::site_budget_w(scenario_->sites[s]);

    std::vector<demand::EpisodeDemand> d;
    if (config_.demand == DemandSource::Uniform) {
        d = demand::sample_episode_demand(seed, std::max(1, config_.n_users), bandwidth_hz(), config_.steps);
    } else {
        const auto lib = demand::build_pattern_library(seed, config_.demand_clusters);
        d = demand::sample_hierarchical_episode_demand(seed, std::max(1, config_.n_users), lib,
                                                       config_.mobility.start_time_s, config_.steps, config_.dt_s);
    }
    state_.remaining_demand.resize(n);
    for (std::size_t u = 0; u < n; ++u) state_.remaining_demand[u] = d[u].total_bits;
    initial_demand_ = state_.remaining_demand;

    shadow_.resize(n * m);
    parallel_chunks(n, [&](std::size_t b, std::size_t e) {
        for (std::size_t u = b; u < e; ++u)
            for (std::size_t s = 0; s < m; ++s) shadow_[u * m + s] = channel::shadowing_deviate(seed, u, s);
    });

    mobility_.reset(seed, config_.n_users);
    last_allocation_.assign(n, UserGrant{});
    last_interference_.assign(n, 0.0);
    compute_decay();
    return state_;
}

void Environment::compute_decay() {
    const auto n = std::size_t(config_.n_users);
    const auto& sites = scenario_->sites;
    const auto m = sites.size();
    const auto& cfg = config_.channel;
    const auto& poses = mobility_.poses();
    state_.positions.resize(n);
    for (std::size_t u = 0; u < n; ++u) state_.positions[u] = poses[u].position;
    state_.decay = LinkGains(n, m);

    std::vector<int> site_building(m);
    for (std::size_t s = 0; s < m; ++s)
        site_building[s] = sites[s].indoor ? buildings_.building_at(sites[s].position) : kNone;

    const std::uint64_t step = state_.cursor;
    parallel_chunks(n, [&](std::size_t b, std::size_t e) {
        for (std::size_t u = b; u < e; ++u) {
            const Vec2 pos = state_.positions[u];
            const int user_building = buildings_.building_at(pos);
            for (std::size_t s = 0; s < m; ++s) {
                channel::LinkInputs link;
                link.tx = {sites[s].position, sites[s].antenna_height_m};
                link.rx = {pos, cfg.ue_height_m};
                link.freq_mhz = sites[s].carrier_freq_mhz;
                if (site_building[s] != user_building)
                    link.walls = (site_building[s] != kNone ? 1 : 0) + (user_building != kNone ? 1 : 0);
                link.los = buildings_.line_of_sight(link.tx, link.rx, site_building[s], user_building);
                link.shadow_deviate = shadow_[u * m + s];
                link.antenna_gain_db = cfg.antenna.gain_db(sites[s], pos);
                double h2 = 1.0;
                if (config_.fading) {
                    auto gen = rng::light_stream(seed_, "fading", step, u, s);
                    h2 = channel::fading_sample(link.los ? cfg.fading_los : cfg.fading_nlos, gen);
                }
                state_.decay(u, s) = channel::compose_link_budget(link, cfg, h2).linear_gain();
            }
        }
    }, 16);
}

channel::LinkBudget Environment::link_budget(std::size_t user, std::size_t site) const {
    auto gen = rng::light_stream(seed_, "fading", state_.cursor, user, site);
    return channel::path_loss(scenario_->sites.at(site), state_.positions.at(user), buildings_, config_.channel,
                              seed_, user, site, gen, config_.fading);
}

Observation Environment::observe() const {
    return {state_.remaining_steps, state_.remaining_demand, state_.max_tx_power_w, state_.decay};
}

StepResult Environment::step(const AllocAction& action) {
    if (done()) throw std::logic_error("step called on a finished episode");
    const auto n = std::size_t(config_.n_users);
    validate_action(action, *scenario_, config_, n);
    Allocation alloc = to_allocation(action, n);

    int max_channels = 0;
    for (const auto& s : scenario_->sites) max_channels = std::max(max_channels, s.n_channels);
    const channel::ChannelOccupancy occ(std::size_t(max_channels), alloc);

    const double bw = bandwidth_hz();
    std::vector<double> rates(n, 0.0);
    std::vector<double> interference(n, 0.0);
    parallel_chunks(n, [&](std::size_t b, std::size_t e) {
        for (std::size_t u = b; u < e; ++u) {
            const UserGrant& g = alloc[u];
            if (!g.assigned()) continue;
            const double* row = state_.decay.row(u);
            double i_w = 0.0;
            for (const auto& tx : occ.on(g.channel))
                if (tx.site != g.site) i_w += row[tx.site] * tx.power_w;
            interference[u] = i_w;
            if (g.power_w > 0.0) rates[u] = channel::shannon_rate(bw, channel::sinr(u, alloc, occ, state_.decay, noise_w_));
        }
    });

    StepResult r;
    const std::vector<double> before = state_.remaining_demand;
    const double dt = config_.dt_s;
    for (std::size_t u = 0; u < n; ++u) {
        const double delivered = rates[u] * dt;
        const double satisfied = std::min(state_.remaining_demand[u], delivered);
        r.outcome.reward += delivered;
        r.outcome.cost += satisfied;
        state_.remaining_demand[u] = std::max(0.0, state_.remaining_demand[u] - satisfied);
    }
    r.kpi = radio::compute_kpis(int(state_.cursor), alloc, rates, before, dt, {}, config_.outage_threshold_bps);

    last_allocation_ = std::move(alloc);
    last_interference_ = std::move(interference);

    --state_.remaining_steps;
    ++state_.cursor;
    mobility_.step(dt);
    compute_decay();
    r.outcome.done = done();
    return r;
}

void Environment::end_episode() { hook_->on_episode_end(*this); }

// ---------------------------------------------------------------------------

EpisodeTrace run_episode(Environment& env, Policy& policy, std::uint64_t seed, RunOptions opts) {
    using clock = std::chrono::steady_clock;
    EpisodeTrace trace;
    trace.method = policy.name();
    trace.seed = seed;
    env.reset(seed);
    trace.initial_demand = env.initial_demand();
    policy.begin_episode(env);
    while (!env.done()) {
        Observation obs = env.observe();
        const auto t0 = clock::now();
        AllocAction action = policy.act(env, obs);
        const auto t1 = clock::now();
        StepResult res = env.step(action);
        const auto t2 = clock::now();
        if (opts.record_timing) {
            res.kpi.action_selection_time_s = std::chrono::duration<double>(t1 - t0).count();
            res.kpi.interaction_time_s = std::chrono::duration<double>(t2 - t1).count();
        }
        trace.total_reward += res.outcome.reward;
        trace.total_cost += res.outcome.cost;
        if (!opts.record_observations) obs = {obs.remaining_steps, {}, {}, {}};
        trace.steps.push_back({std::move(obs), std::move(action), res.outcome, std::move(res.kpi)});
    }
    trace.served.resize(trace.initial_demand.size());
    for (std::size_t u = 0; u < trace.served.size(); ++u)
        trace.served[u] = trace.initial_demand[u] - env.state().remaining_demand[u];
    for (double d : trace.initial_demand) trace.total_demand += d;
    env.end_episode();
    policy.end_episode(satisfaction_ratio(trace));
    return trace;
}

double satisfaction_ratio(const EpisodeTrace& trace) {
    if (!(trace.total_demand > 0.0)) return 1.0;
    return std::clamp(trace.total_cost / trace.total_demand, 0.0, 1.0);
}

double mean_user_satisfaction(const EpisodeTrace& trace) {
    if (trace.initial_demand.empty()) return 1.0;
    double sum = 0.0;
    for (std::size_t u = 0; u < trace.initial_demand.size(); ++u) {
        const double d = trace.initial_demand[u];
        sum += d > 0.0 ? std::clamp(trace.served[u] / d, 0.0, 1.0) : 1.0;
    }
    return sum / double(trace.initial_demand.size());
}

nlohmann::json to_json(const EpisodeTrace& trace) {
    using nlohmann::json;
    json steps = json::array();
    for (const TraceStep& s : trace.steps) {
        json grants = json::array();
        for (const Grant& g : s.action.grants) grants.push_back({g.user, g.site, g.channel, g.power_w});
        json obs = {{"remaining_steps", s.observation.remaining_steps},
                    {"remaining_demand", s.observation.remaining_demand},
                    {"max_tx_power_w", s.observation.max_tx_power_w}};
        if (!s.observation.decay.values.empty())
            obs["decay"] = {{"users", s.observation.decay.users},
                            {"sites", s.observation.decay.sites},
                            {"values", s.observation.decay.values}};
        const auto& k = s.kpi;
        steps.push_back({{"observation", obs},
                         {"action", grants},
                         {"outcome", {{"reward", s.outcome.reward}, {"cost", s.outcome.cost}, {"done", s.outcome.done}}},
                         {"kpi",
                          {{"t", k.t},
                           {"sum_bs_rate", k.sum_bs_rate},
                           {"total_tx_power_w", k.total_tx_power_w},
                           {"per_user_rate", k.per_user_rate},
                           {"network_throughput", k.network_throughput},
                           {"outage_ratio", k.outage_ratio},
                           {"action_selection_time_s", k.action_selection_time_s},
                           {"interaction_time_s", k.interaction_time_s}}}});
    }
    return {{"method", trace.method},
            {"seed", trace.seed},
            {"steps", steps},
            {"initial_demand", trace.initial_demand},
            {"served", trace.served},
            {"totals",
             {{"reward", trace.total_reward},
              {"cost", trace.total_cost},
              {"demand", trace.total_demand},
              {"satisfaction_ratio", satisfaction_ratio(trace)}}}};
}

} // namespace mndt::engine
