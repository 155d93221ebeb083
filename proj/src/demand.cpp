#include "mndt/demand.hpp"

#include "mndt/parallel.hpp"

#include <cmath>

namespace mndt::demand {

namespace {

// Gaussian bump on the 24 h circle.
double bump(double hour, double center, double width) {
    double d = std::fabs(hour - center);
    d = std::min(d, 24.0 - d);
    return std::exp(-0.5 * (d / width) * (d / width));
}

double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

struct Archetype {
    const char* name;
    double base_bps;
    double amplitude_bps;
    double (*shape)(double hour);
};

const Archetype kArchetypes[] = {
    {"commuter", 2e4, 3.0e5, [](double h) { return bump(h, 8.0, 1.0) + bump(h, 18.0, 1.2); }},
    {"office", 1e4, 2.5e5,
     [](double h) { return logistic((h - 9.0) / 0.4) * logistic((18.0 - h) / 0.4) * (0.85 + 0.15 * bump(h, 14.0, 2.0)); }},
    {"residential", 3e4, 2.8e5, [](double h) { return 0.4 * bump(h, 7.5, 1.5) + bump(h, 21.0, 2.0); }},
    {"entertainment", 1e4, 3.5e5, [](double h) { return 0.5 * bump(h, 13.0, 1.5) + bump(h, 21.5, 1.5); }},
    {"low-activity", 5e3, 2.0e4, [](double h) { return bump(h, 15.0, 4.0); }},
};

} // namespace

DemandPatternSet build_pattern_library(std::uint64_t seed, int k) {
    if (k < 1) throw std::invalid_argument("pattern count must be >= 1");
    DemandPatternSet set;
    if (k == 1) {
        DemandPattern flat{"flat", {}};
        flat.mean_bps.fill(1e5);
        set.patterns.push_back(flat);
        return set;
    }
    auto gen = rng::stream(seed, "patterns");
    std::uniform_real_distribution<double> jitter(-1.0, 1.0);
    const int n_arch = int(std::size(kArchetypes));
    for (int i = 0; i < k; ++i) {
        const Archetype& a = kArchetypes[i % n_arch];
        const int round = i / n_arch;
        const double spread = 0.1 + 0.1 * round;
        const double amp = a.amplitude_bps * (1.0 + spread * jitter(gen));
        const double base = a.base_bps * (1.0 + spread * jitter(gen));
        DemandPattern p;
        p.name = round == 0 ? a.name : std::string(a.name) + "-" + std::to_string(round);
        for (int s = 0; s < kSlotsPerDay; ++s) {
            const double hour = (s + 0.5) * 0.5;
            p.mean_bps[std::size_t(s)] = base + amp * a.shape(hour);
        }
        set.patterns.push_back(std::move(p));
    }
    return set;
}

void UserDemandProcess::check() const {
    if (!(stay_normal >= 0.0 && stay_normal <= 1.0 && stay_burst >= 0.0 && stay_burst <= 1.0))
        throw std::invalid_argument("switch probabilities must lie in [0, 1]");
    if (!(burst_multiplier >= 1.0)) throw std::invalid_argument("burst multiplier must be >= 1");
    if (!(dispersion > 0.0)) throw std::invalid_argument("dispersion must be > 0");
}

UserDemandProcess make_user_process(std::uint64_t seed, int user, int n_clusters) {
    if (n_clusters < 1) throw std::invalid_argument("cluster count must be >= 1");
    auto gen = rng::light_stream(seed, "cluster", std::uint64_t(user));
    UserDemandProcess p;
    p.user = user;
    p.cluster = std::uniform_int_distribution<int>(0, n_clusters - 1)(gen);
    return p;
}

std::vector<EpisodeDemand> sample_episode_demand(std::uint64_t seed, int n_users, double bandwidth_hz, int steps) {
    if (n_users < 1) throw std::invalid_argument("user count must be >= 1");
    if (!(bandwidth_hz > 0.0)) throw std::invalid_argument("bandwidth must be positive");
    if (steps < 1) throw std::invalid_argument("episode length must be >= 1");
    std::vector<EpisodeDemand> out(static_cast<std::size_t>(n_users));
    for (int u = 0; u < n_users; ++u) {
        auto gen = rng::light_stream(seed, "episode-demand", std::uint64_t(u));
        out[std::size_t(u)] = {u, std::uniform_real_distribution<double>(0.0, 60.0 * bandwidth_hz)(gen)};
    }
    return out;
}

namespace {

int slot_of(double t_s) {
    const double day_s = kSlotsPerDay * kSlotS;
    double tod = std::fmod(t_s, day_s);
    if (tod < 0.0) tod += day_s;
    return std::min(kSlotsPerDay - 1, int(tod / kSlotS));
}

} // namespace

std::vector<EpisodeDemand> sample_hierarchical_episode_demand(std::uint64_t seed, int n_users,
                                                              const DemandPatternSet& patterns, double start_s,
                                                              int steps, double step_s) {
    if (n_users < 1) throw std::invalid_argument("user count must be >= 1");
    std::vector<EpisodeDemand> out(static_cast<std::size_t>(n_users));
    parallel_chunks(out.size(), [&](std::size_t b, std::size_t e) {
        for (std::size_t u = b; u < e; ++u) {
            UserDemandProcess proc = make_user_process(seed, int(u), int(patterns.size()));
            auto gen = rng::light_stream(seed, "demand", u);
            double total = 0.0;
            for (int t = 0; t < steps; ++t) total += sample_demand(proc, patterns, slot_of(start_s + t * step_s), step_s, gen);
            out[u] = {int(u), total};
        }
    });
    return out;
}

void write_demand_trace(std::ostream& out, std::uint64_t seed, int n_users, const DemandPatternSet& patterns,
                        double start_s, int steps, double step_s) {
    std::vector<UserDemandProcess> procs;
    std::vector<rng::SplitMix> gens;
    for (int u = 0; u < n_users; ++u) {
        procs.push_back(make_user_process(seed, u, int(patterns.size())));
        gens.push_back(rng::light_stream(seed, "demand", std::uint64_t(u)));
    }
    out << "t,user_id,demand_bits\n";
    for (int t = 0; t < steps; ++t) {
        const int slot = slot_of(start_s + t * step_s);
        for (int u = 0; u < n_users; ++u)
            out << t << ',' << u << ',' << sample_demand(procs[std::size_t(u)], patterns, slot, step_s, gens[std::size_t(u)])
                << '\n';
    }
}

} // namespace mndt::demand
