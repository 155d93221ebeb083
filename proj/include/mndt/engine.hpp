#pragma once

#include "mndt/allocation.hpp"
#include "mndt/channel.hpp"
#include "mndt/demand.hpp"
#include "mndt/mobility.hpp"
#include "mndt/radio.hpp"
#include "mndt/scenario.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

/// Constrained-MDP environment over the network twin: the state is remaining
/// time, remaining demand, site power limits and link decay factors; an action
/// is a per-user (site, channel, power) decision; reward is throughput and
/// cost is satisfied demand.
namespace mndt::engine {

enum class DemandSource { Uniform, Hierarchical };

struct EpisodeConfig {
    int n_users = 200;
    int steps = 20;
    double dt_s = 1.0;
    DemandSource demand = DemandSource::Uniform;
    int demand_clusters = 5;
    mobility::MobilityConfig mobility;
    channel::ChannelConfig channel;
    bool fading = true;
    /// Per-site user limit; values <= 0 mean "the site's channel count".
    int max_users_per_site = 0;
    double outage_threshold_bps = radio::kDefaultOutageThresholdBps;

    int capacity(const BaseStationSite& site) const {
        return max_users_per_site > 0 ? std::min(max_users_per_site, site.n_channels) : site.n_channels;
    }
};

struct CmdpState {
    int remaining_steps = 0;
    std::vector<double> remaining_demand; ///< bits
    std::vector<double> max_tx_power_w;   ///< per site
    LinkGains decay;                      ///< users x sites, linear, in (0, 1]
    std::vector<Vec2> positions;
    std::uint64_t cursor = 0; ///< steps taken; selects the fading streams of the next draw
};

/// What a policy sees: exactly the four state components.
struct Observation {
    int remaining_steps = 0;
    std::vector<double> remaining_demand;
    std::vector<double> max_tx_power_w;
    LinkGains decay;

    bool operator==(const Observation&) const = default;
};

struct StepOutcome {
    double reward = 0.0; ///< bits delivered this step
    double cost = 0.0;   ///< bits of demand satisfied this step
    bool done = false;

    bool operator==(const StepOutcome&) const = default;
};

enum class Constraint {
    Malformed,
    OneBaseStation,
    OneResourceBlockPerUser,
    OneUserPerResourceBlock,
    SiteCapacity,
    SitePowerBudget,
};

const char* to_string(Constraint c);

class ConstraintViolation : public std::runtime_error {
  public:
    ConstraintViolation(Constraint c, const std::string& detail);
    Constraint constraint() const { return constraint_; }

  private:
    Constraint constraint_;
};

/// Throws ConstraintViolation naming the first violated constraint.
void validate_action(const AllocAction& action, const Scenario& scenario, const EpisodeConfig& cfg,
                     std::size_t n_users);

/// Per-user allocation from a validated action.
Allocation to_allocation(const AllocAction& action, std::size_t n_users);

class Environment;

/// Attachment point for calibrating the twin against measurements from a live
/// network. No physical network exists here, so the default does nothing.
class CalibrationHook {
  public:
    virtual ~CalibrationHook() = default;
    virtual void on_episode_end(Environment&) {}
};

struct StepResult {
    StepOutcome outcome;
    radio::KpiRecord kpi;
};

class Environment {
  public:
    Environment(const Scenario& scenario, EpisodeConfig config);

    const CmdpState& reset(std::uint64_t seed);
    Observation observe() const;
    StepResult step(const AllocAction& action);

    const CmdpState& state() const { return state_; }
    const Scenario& scenario() const { return *scenario_; }
    const EpisodeConfig& config() const { return config_; }
    double noise_w() const { return noise_w_; }
    double bandwidth_hz() const { return config_.channel.radio.rb_bandwidth_hz; }
    std::uint64_t seed() const { return seed_; }
    const std::vector<double>& initial_demand() const { return initial_demand_; }
    /// Allocation applied in the previous step (empty grants before the first).
    const Allocation& last_allocation() const { return last_allocation_; }
    /// Interference each user measured in the previous step on its own channel (W).
    const std::vector<double>& last_interference_w() const { return last_interference_; }
    bool done() const { return state_.remaining_steps == 0; }

    /// Link budget of one (user, site) link at the current step, recomputed
    /// from scratch; for inspection and tests.
    channel::LinkBudget link_budget(std::size_t user, std::size_t site) const;

    void set_calibration_hook(std::shared_ptr<CalibrationHook> hook) { hook_ = std::move(hook); }
    void end_episode();

  private:
    void compute_decay();

    const Scenario* scenario_;
    EpisodeConfig config_;
    channel::BuildingMap buildings_;
    mobility::MobilitySimulator mobility_;
    double noise_w_ = 0.0;
    std::uint64_t seed_ = 0;
    CmdpState state_;
    std::vector<double> initial_demand_;
    std::vector<double> shadow_; ///< users x sites standard-normal deviates
    Allocation last_allocation_;
    std::vector<double> last_interference_;
    std::shared_ptr<CalibrationHook> hook_ = std::make_shared<CalibrationHook>();
};

class Policy {
  public:
    virtual ~Policy() = default;
    virtual std::string name() const = 0;
    virtual void begin_episode(const Environment&) {}
    virtual AllocAction act(const Environment& env, const Observation& obs) = 0;
    virtual void end_episode(double /*satisfaction*/) {}
};

/// Never serves anyone.
class IdlePolicy : public Policy {
  public:
    std::string name() const override { return "idle"; }
    AllocAction act(const Environment&, const Observation&) override { return {}; }
};

struct TraceStep {
    Observation observation;
    AllocAction action;
    StepOutcome outcome;
    radio::KpiRecord kpi;

    bool operator==(const TraceStep&) const = default;
};

struct EpisodeTrace {
    std::string method;
    std::uint64_t seed = 0;
    std::vector<TraceStep> steps;
    std::vector<double> initial_demand;
    std::vector<double> served; ///< per-user satisfied demand over the episode
    double total_reward = 0.0;
    double total_cost = 0.0;
    double total_demand = 0.0;

    bool operator==(const EpisodeTrace&) const = default;
};

struct RunOptions {
    bool record_timing = true;
    bool record_observations = true;
};

/// Resets with `seed`, runs until done and notifies the policy of the
/// achieved satisfaction ratio.
EpisodeTrace run_episode(Environment& env, Policy& policy, std::uint64_t seed, RunOptions opts = {});

/// Aggregate: total satisfied demand over total initial demand; 1 when there is no demand.
double satisfaction_ratio(const EpisodeTrace& trace);

/// Mean over users of each user's own served fraction (users without demand count as 1).
double mean_user_satisfaction(const EpisodeTrace& trace);

nlohmann::json to_json(const EpisodeTrace& trace);

} // namespace mndt::engine
