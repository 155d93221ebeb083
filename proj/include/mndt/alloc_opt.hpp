#pragma once

#include "mndt/allocation.hpp"
#include "mndt/engine.hpp"
#include "mndt/hungarian.hpp"
#include "mndt/scenario.hpp"

#include <memory>
#include <span>
#include <string>
#include <vector>

/// Demand-decoupled allocation: a per-step demand quota for each user, then
/// user-to-site matching, per-site channel matching and explicit power sizing.
namespace mndt::alloc_opt {

struct OptimizerConfig {
    double lambda = 10.0;               ///< weight of predicted unmet single-step demand
    int power_rounds = 3;               ///< fixed-point rounds in allocate_power
    int replication_slack = 2;          ///< extra site replicas beyond ceil(users / sites)
    std::size_t max_global_dim = 4000;  ///< largest padded matrix solved in one piece
    std::size_t partition_slots = 200;  ///< slot budget of one spatial partition beyond that
};

/// Transmit power per (site, channel) of an allocation, typically last step's.
struct InterferenceSnapshot {
    std::size_t sites = 0;
    std::size_t channels = 0;
    std::vector<double> power_w;
    std::vector<double> site_total_w;

    InterferenceSnapshot() = default;
    InterferenceSnapshot(const Allocation& allocation, const Scenario& scenario);

    double operator()(std::size_t s, std::size_t c) const { return power_w[s * channels + c]; }

    /// Interference at `user` on channel c when served by `serving`.
    double on_channel(const LinkGains& gains, std::size_t user, int serving, std::size_t c) const;
};

/// Shared physical-layer context for the scorers.
struct LinkContext {
    const LinkGains* gains = nullptr;
    const Scenario* scenario = nullptr;
    double noise_w = 0.0;
    double bandwidth_hz = 1.8e5;
    double dt_s = 1.0;
};

struct EdgeScores {
    std::size_t users = 0;
    std::size_t sites = 0;
    std::vector<double> reward; ///< R-hat, bits
    std::vector<double> cost;   ///< C-hat, bits of unmet single-step demand
    std::vector<double> weight; ///< R-hat - lambda * C-hat

    double r(std::size_t u, std::size_t s) const { return reward[u * sites + s]; }
    double c(std::size_t u, std::size_t s) const { return cost[u * sites + s]; }
    double w(std::size_t u, std::size_t s) const { return weight[u * sites + s]; }
};

/// R-hat(u,b) = B log2(1 + g_ub P_b / (N + I_ub)) dt, where P_b is the power
/// share `share_w[b]` and I_ub the mean interference over b's channels in the
/// snapshot; C-hat = max(0, delta_u - R-hat); w = R-hat - lambda C-hat.
EdgeScores score_edges(const LinkContext& ctx, std::span<const double> delta, std::span<const double> share_w,
                       const InterferenceSnapshot& snap, double lambda);

struct Association {
    std::vector<int> site; ///< per user, kNone when unmatched
    double weight = 0.0;   ///< sum of matching weights of matched users
};

/// Replicates each site min(capacity_b, ceil(#eligible / #sites) + slack)
/// times and solves the assignment on w' = w + lambda delta_u, the gain of
/// serving u over leaving it unserved. Ineligible users stay unmatched.
/// Large instances are split into spatial site partitions.
Association match_users_to_bs(const EdgeScores& scores, std::span<const double> delta, double lambda,
                              std::span<const int> capacity, std::span<const char> eligible,
                              const Scenario& scenario, const OptimizerConfig& cfg);

/// Matching weight used by match_users_to_bs for one edge.
inline double matching_weight(const EdgeScores& scores, std::span<const double> delta, double lambda,
                              std::size_t u, std::size_t s) {
    return scores.w(u, s) + lambda * delta[u];
}

/// Channels for the users of one site: assignment on the estimated rate with
/// `share_w` at the site and the snapshot interference on each channel.
std::vector<int> match_users_to_rb(int site, std::span<const int> users, const LinkContext& ctx, double share_w,
                                   const InterferenceSnapshot& snap);

/// Explicit power sizing over all sites: `rounds` fixed-point passes of
/// P_u = min_power_for_rate(delta_u / dt) with interference from the previous
/// pass (the snapshot in the first), scaled down per site when over budget;
/// leftover budget is spread equally over the site's users.
void allocate_power(Allocation& allocation, std::span<const double> delta, const LinkContext& ctx,
                    const InterferenceSnapshot& snap, int rounds);

/// Budget / k for each of the k users of every site.
void fair_power(Allocation& allocation, const Scenario& scenario);

// ---------------------------------------------------------------------------
// single-step demand

class DemandController {
  public:
    virtual ~DemandController() = default;
    virtual std::vector<double> single_step_demand(const engine::Observation& obs, const engine::Environment& env) = 0;
    virtual void end_episode(double /*achieved*/) {}
};

/// delta_u = clip(kappa * remaining_u / T_rem, 0, remaining_u); after each
/// episode kappa <- clamp(kappa + eta (target - achieved), kappa_min, kappa_max).
class FeedbackController : public DemandController {
  public:
    struct Params {
        double kappa = 1.0;
        double eta = 2.0;
        double kappa_min = 0.5;
        double kappa_max = 3.0;
        double target = 0.95;
    };

    FeedbackController() = default;
    explicit FeedbackController(Params p) : p_(p) {}

    std::vector<double> single_step_demand(const engine::Observation& obs, const engine::Environment& env) override;
    void end_episode(double achieved) override;

    double kappa() const { return p_.kappa; }
    void set_kappa(double k) { p_.kappa = k; }
    const Params& params() const { return p_; }
    /// Stops end_episode from moving kappa.
    void freeze(bool f = true) { frozen_ = f; }

  private:
    Params p_;
    bool frozen_ = false;
};

std::vector<double> feedback_demand(std::span<const double> remaining, int remaining_steps, double kappa);

/// delta_u = min(initial_u / T, remaining_u).
class EqualDivisionController : public DemandController {
  public:
    std::vector<double> single_step_demand(const engine::Observation& obs, const engine::Environment& env) override;
};

// ---------------------------------------------------------------------------
// policies

enum class PowerMode { Explicit, FairSplit };

/// Demand quota -> edge scores -> user/site matching -> channel matching -> power.
class MatchingPolicy : public engine::Policy {
  public:
    MatchingPolicy(std::string name, std::unique_ptr<DemandController> controller, OptimizerConfig cfg,
                   PowerMode power, bool serve_satisfied_users);

    std::string name() const override { return name_; }
    AllocAction act(const engine::Environment& env, const engine::Observation& obs) override;
    void end_episode(double satisfaction) override { controller_->end_episode(satisfaction); }

    double lambda() const { return cfg_.lambda; }
    const OptimizerConfig& config() const { return cfg_; }
    DemandController& controller() { return *controller_; }
    /// Quota used in the most recent act().
    const std::vector<double>& last_delta() const { return last_delta_; }

  private:
    std::string name_;
    std::unique_ptr<DemandController> controller_;
    OptimizerConfig cfg_;
    PowerMode power_;
    bool serve_satisfied_;
    std::vector<double> last_delta_;
};

std::unique_ptr<MatchingPolicy> make_ours(OptimizerConfig cfg = {}, FeedbackController::Params p = {});
std::unique_ptr<MatchingPolicy> make_equal(OptimizerConfig cfg = {});
/// Throughput only: lambda forced to 0 and a fair power split.
std::unique_ptr<MatchingPolicy> make_ignore(OptimizerConfig cfg = {});

/// Nearest site, random channel, fair power; the twin's default behaviour.
class NearestPolicy : public engine::Policy {
  public:
    std::string name() const override { return "nearest"; }
    AllocAction act(const engine::Environment& env, const engine::Observation& obs) override;
};

/// Three-phase admission of every user with remaining demand, in user order,
/// candidates sorted by ascending path loss and the per-step rate
/// remaining / T_rem.
class AdmissionPolicy : public engine::Policy {
  public:
    std::string name() const override { return "admission"; }
    AllocAction act(const engine::Environment& env, const engine::Observation& obs) override;
};

struct TrainingLog {
    std::vector<double> kappa;
    std::vector<double> satisfaction;
    std::vector<double> throughput;
    double selected_kappa = 1.0;
};

/// Runs `episodes` training episodes on seeds derived from `seed` (never the
/// evaluation seed itself), letting the feedback rule move kappa, then fixes
/// kappa to the value of the highest-throughput episode that met the target
/// (the most satisfying one if none did) and freezes the controller.
TrainingLog train_feedback(MatchingPolicy& policy, FeedbackController& controller, const Scenario& scenario,
                           const engine::EpisodeConfig& cfg, std::uint64_t seed, int episodes);

} // namespace mndt::alloc_opt
