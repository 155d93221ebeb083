#include "mndt/cli.hpp"

#include "mndt/alloc_opt.hpp"
#include "mndt/config.hpp"
#include "mndt/engine.hpp"
#include "mndt/scenario.hpp"
#include "mndt/sleep_opt.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

namespace mndt::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

class WriteFailure : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

class MissingInput : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

class InvalidInput : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

void write_file(const fs::path& path, const std::string& content) {
    std::error_code ec;
    if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
    if (ec) throw WriteFailure("cannot create directory " + path.parent_path().string() + ": " + ec.message());
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    f << content;
    f.flush();
    if (!f) throw WriteFailure("cannot write " + path.string());
}

std::string read_file(const fs::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw MissingInput("missing input " + path.string());
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

std::string fmt(const char* spec, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, spec, v);
    return buf;
}

// summary.json holds one section per command; rerunning a command replaces its section.
void update_summary(const fs::path& dir, const std::string& section, json value) {
    const fs::path path = dir / "summary.json";
    json doc = json::object();
    if (fs::exists(path)) {
        std::ifstream f(path);
        doc = json::parse(f, nullptr, false);
        if (!doc.is_object()) doc = json::object();
    }
    doc[section] = std::move(value);
    write_file(path, doc.dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// scenario source shared by allocate and sleep

struct ScenarioSource {
    std::string path;
    std::string preset;
    std::optional<std::uint64_t> seed;

    void add_to(CLI::App* cmd, const std::string& default_preset) {
        preset = default_preset;
        cmd->add_option("--scenario", path, "Scenario JSON to load instead of generating one");
        cmd->add_option("--preset", preset, "Generated world when no --scenario is given")
            ->check(CLI::IsMember({"table1", "desk"}))
            ->capture_default_str();
        cmd->add_option("--scenario-seed", seed, "Seed of the generated world (default: --seed)");
    }

    Scenario load(std::uint64_t run_seed) const {
        if (!path.empty()) {
            if (!fs::exists(path)) throw MissingInput("scenario file not found: " + path);
            try {
                return load_scenario(path);
            } catch (const ScenarioError& e) {
                throw InvalidInput(std::string("invalid scenario ") + path + ": " + e.what());
            }
        }
        return generate_scenario(seed.value_or(run_seed),
                                 preset == "desk" ? ScenarioSpec::desk() : ScenarioSpec::table1());
    }

    json describe(const Scenario& sc, std::uint64_t run_seed) const {
        json j = {{"sites", sc.sites.size()}, {"lanes", sc.lanes.edges.size()}, {"aois", sc.aois.size()}};
        if (path.empty()) {
            j["preset"] = preset;
            j["seed"] = seed.value_or(run_seed);
        } else {
            j["path"] = path;
        }
        return j;
    }
};

// ---------------------------------------------------------------------------
// gen-scenario

struct GenOptions {
    std::string preset = "table1";
    std::optional<int> lanes, aois, sites, indoor_sites, channels;
    std::optional<double> width, height;
};

int cmd_gen_scenario(const GenOptions& o, std::uint64_t seed, const fs::path& out_dir, std::ostream& out) {
    ScenarioSpec spec = o.preset == "desk" ? ScenarioSpec::desk() : ScenarioSpec::table1();
    if (o.lanes) spec.lanes = *o.lanes;
    if (o.aois) spec.aois = *o.aois;
    if (o.sites) spec.sites = *o.sites;
    if (o.indoor_sites) spec.indoor_sites = *o.indoor_sites;
    else spec.indoor_sites = std::min(spec.indoor_sites, spec.sites);
    if (o.channels) spec.n_channels = *o.channels;
    if (o.width) spec.width_m = *o.width;
    if (o.height) spec.height_m = *o.height;

    const Scenario sc = generate_scenario(seed, spec);
    const fs::path path = out_dir / "scenario.json";
    write_file(path, dump_scenario(sc));
    std::size_t indoor = 0;
    for (const auto& s : sc.sites) indoor += s.indoor;
    out << "scenario: " << sc.lanes.edges.size() << " lanes, " << sc.lanes.nodes.size() << " nodes, "
        << sc.aois.size() << " AoIs, " << sc.buildings.size() << " buildings, " << sc.sites.size() << " sites ("
        << indoor << " indoor), " << (sc.sites.empty() ? 0 : sc.sites.front().n_channels) << " channels per site\n"
        << "wrote " << path.string() << "\n";
    return kOk;
}

// ---------------------------------------------------------------------------
// allocate

struct AllocOptions {
    ScenarioSource scenario;
    std::string method = "all";
    int episodes = 1;
    int train_episodes = 8;
    int users = 200;
    int steps = 20;
    double dt = 1.0;
    std::string demand = "uniform";
    int clusters = 5;
    std::string mobility = "straight";
    bool no_fading = false;
    int max_users_per_site = 0;
    double outage_threshold = radio::kDefaultOutageThresholdBps;
    double lambda = 10.0;
    double kappa = 1.0;
    double eta = 2.0;
    bool timing = false;
};

std::vector<std::string> expand_methods(const std::string& m) {
    if (m == "all") return {"ours", "equal", "ignore"};
    return {m};
}

std::unique_ptr<engine::Policy> make_policy(const std::string& name, const AllocOptions& o) {
    alloc_opt::OptimizerConfig cfg;
    cfg.lambda = o.lambda;
    if (name == "ours") {
        alloc_opt::FeedbackController::Params p;
        p.kappa = o.kappa;
        p.eta = o.eta;
        return alloc_opt::make_ours(cfg, p);
    }
    if (name == "equal") return alloc_opt::make_equal(cfg);
    if (name == "ignore") return alloc_opt::make_ignore(cfg);
    if (name == "nearest") return std::make_unique<alloc_opt::NearestPolicy>();
    return std::make_unique<alloc_opt::AdmissionPolicy>();
}

int cmd_allocate(const AllocOptions& o, std::uint64_t seed, const fs::path& out_dir, std::ostream& out) {
    const Scenario sc = o.scenario.load(seed);
    engine::EpisodeConfig cfg;
    cfg.n_users = o.users;
    cfg.steps = o.steps;
    cfg.dt_s = o.dt;
    cfg.demand = o.demand == "hierarchical" ? engine::DemandSource::Hierarchical : engine::DemandSource::Uniform;
    cfg.demand_clusters = o.clusters;
    cfg.mobility.mode = o.mobility == "scheduled" ? mobility::MobilityMode::Scheduled : mobility::MobilityMode::StraightLine;
    cfg.fading = !o.no_fading;
    cfg.max_users_per_site = o.max_users_per_site;
    cfg.outage_threshold_bps = o.outage_threshold;
    if (!sc.sites.empty()) {
        cfg.channel.radio.rb_bandwidth_hz = sc.sites.front().rb_bandwidth_hz;
        cfg.channel.radio.carrier_freq_mhz = sc.sites.front().carrier_freq_mhz;
    }
    const double bw = cfg.channel.radio.rb_bandwidth_hz;

    std::string csv = std::string("method,episode_seed,") + radio::kKpiCsvHeader + "\n";
    json methods = json::array();
    engine::Environment env(sc, cfg);

    for (const std::string& name : expand_methods(o.method)) {
        auto policy = make_policy(name, o);
        json extra = json::object();
        if (name == "ours") {
            auto& mp = static_cast<alloc_opt::MatchingPolicy&>(*policy);
            auto& ctl = static_cast<alloc_opt::FeedbackController&>(mp.controller());
            const auto log = alloc_opt::train_feedback(mp, ctl, sc, cfg, seed, o.train_episodes);
            extra["kappa"] = log.selected_kappa;
            extra["training"] = {{"kappa", log.kappa},
                                 {"satisfaction", log.satisfaction},
                                 {"throughput_x_bandwidth", [&] {
                                      std::vector<double> v;
                                      for (double t : log.throughput) v.push_back(t / bw);
                                      return v;
                                  }()}};
        }

        std::vector<double> step_thr(std::size_t(cfg.steps), 0.0);
        std::vector<double> step_sat(std::size_t(cfg.steps), 0.0);
        double thr = 0.0, sat = 0.0, user_sat = 0.0, demand = 0.0;
        json per_episode = json::array();
        for (int i = 0; i < o.episodes; ++i) {
            const std::uint64_t ep_seed = seed + std::uint64_t(i);
            const auto trace = engine::run_episode(env, *policy, ep_seed, {o.timing, false});
            double served = 0.0;
            for (std::size_t t = 0; t < trace.steps.size() && t < step_thr.size(); ++t) {
                const auto& k = trace.steps[t].kpi;
                csv += name + "," + std::to_string(ep_seed) + "," + radio::kpi_csv_row(k) + "\n";
                served += trace.steps[t].outcome.cost;
                step_thr[t] += k.network_throughput / bw;
                step_sat[t] += trace.total_demand > 0.0 ? std::min(1.0, served / trace.total_demand) : 1.0;
            }
            const double e_thr = trace.total_reward / bw;
            const double e_sat = engine::satisfaction_ratio(trace);
            thr += e_thr;
            sat += e_sat;
            user_sat += engine::mean_user_satisfaction(trace);
            demand += trace.total_demand / bw;
            per_episode.push_back({{"seed", ep_seed}, {"throughput_x_bandwidth", e_thr}, {"satisfaction", e_sat}});
        }
        const double n = o.episodes;
        for (auto& v : step_thr) v /= n;
        for (auto& v : step_sat) v /= n;
        json m = {{"method", name},
                  {"throughput_x_bandwidth", thr / n},
                  {"satisfaction", sat / n},
                  {"mean_user_satisfaction", user_sat / n},
                  {"demand_x_bandwidth", demand / n},
                  {"episodes", per_episode},
                  {"per_step_throughput_x_bandwidth", step_thr},
                  {"per_step_cumulative_satisfaction", step_sat}};
        m.update(extra);
        methods.push_back(std::move(m));
        out << name << ": throughput " << fmt("%.2f", thr / n) << " xB, satisfaction " << fmt("%.4f", sat / n)
            << "\n";
    }

    write_file(out_dir / "kpi.csv", csv);
    update_summary(out_dir, "allocate",
                   {{"seed", seed},
                    {"scenario", o.scenario.describe(sc, seed)},
                    {"users", cfg.n_users},
                    {"steps", cfg.steps},
                    {"dt_s", cfg.dt_s},
                    {"bandwidth_hz", bw},
                    {"demand", o.demand},
                    {"mobility", o.mobility},
                    {"lambda", o.lambda},
                    {"methods", methods}});
    return kOk;
}

// ---------------------------------------------------------------------------
// sleep

struct SleepOptions {
    ScenarioSource scenario;
    double grid_size = 500.0;
    int cells_per_site = 3;
    double cell_capacity = 50e6;
    int days = 7;
    std::optional<double> hysteresis;
    sleep_opt::EnergyModel model;
    bool sleeping_site_off = false;
};

int cmd_sleep(const SleepOptions& o, std::uint64_t seed, const fs::path& out_dir, std::ostream& out) {
    using namespace sleep_opt;
    const Scenario sc = o.scenario.load(seed);
    EnergyModel model = o.model;
    model.sleeping_keeps_site_on = !o.sleeping_site_off;
    model.check();
    const Topology topo = make_topology(sc, build_grid(sc, o.grid_size), o.cells_per_site, o.cell_capacity);
    const WeeklyTraffic traffic = synth_weekly_traffic(seed, topo, o.days);
    const WeekResult week = run_week(topo, traffic, model, o.hysteresis);

    std::ostringstream csv;
    write_week_csv(csv, week);
    write_file(out_dir / "week.csv", csv.str());

    const int eval_from = o.days > 1 ? kSlotsPerDay : 0;
    double unserved = 0.0;
    for (const auto& s : week.ours.slots) unserved += s.unserved_bps;
    auto run_json = [&](const PolicyRun& r) {
        return json{{"energy_kwh", r.energy_wh() / 1000.0},
                    {"switches", r.switches()},
                    {"switch_cost", r.switch_cost()},
                    {"switches_after_day1", r.switches(eval_from)},
                    {"switch_cost_after_day1", r.switch_cost(eval_from)}};
    };
    const double ratio = week.ours.energy_wh() / week.always_on.energy_wh();
    update_summary(out_dir, "sleep",
                   {{"seed", seed},
                    {"scenario", o.scenario.describe(sc, seed)},
                    {"grids", topo.n_grids()},
                    {"cells", topo.n_cells()},
                    {"slots", week.ours.slots.size()},
                    {"hysteresis", week.tuning.hysteresis},
                    {"hysteresis_tuned", !o.hysteresis.has_value()},
                    {"tuning_objective", week.tuning.objective},
                    {"energy_ratio_ours_vs_always_on", ratio},
                    {"unserved_bps_total_ours", unserved},
                    {"ours", run_json(week.ours)},
                    {"always_on", run_json(week.always_on)},
                    {"minimal_cells", run_json(week.minimal)}});
    out << "sleep: " << week.ours.slots.size() << " slots, h = " << week.tuning.hysteresis << ", energy ours "
        << fmt("%.1f", week.ours.energy_wh() / 1000.0) << " kWh, always-on "
        << fmt("%.1f", week.always_on.energy_wh() / 1000.0) << " kWh, minimal-cells "
        << fmt("%.1f", week.minimal.energy_wh() / 1000.0) << " kWh (ratio " << fmt("%.3f", ratio) << ")\n";
    return kOk;
}

// ---------------------------------------------------------------------------
// report

void write_series(const fs::path& path, const std::vector<double>& x, const std::vector<double>& y) {
    std::string s = "x,y\n";
    for (std::size_t i = 0; i < x.size() && i < y.size(); ++i) s += fmt("%.17g", x[i]) + "," + fmt("%.17g", y[i]) + "\n";
    write_file(path, s);
}

std::vector<std::vector<double>> read_numeric_csv(const fs::path& path, std::size_t columns) {
    std::istringstream in(read_file(path));
    std::string line;
    std::getline(in, line); // header
    std::vector<std::vector<double>> cols(columns);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string cell;
        for (std::size_t c = 0; c < columns; ++c) {
            if (!std::getline(ls, cell, ',')) throw InvalidInput("malformed row in " + path.string());
            cols[c].push_back(std::stod(cell));
        }
    }
    return cols;
}

int cmd_report(const fs::path& dir, std::ostream& out) {
    const fs::path summary_path = dir / "summary.json";
    if (!fs::exists(summary_path)) throw MissingInput("no summary.json in " + dir.string() + "; run allocate or sleep first");
    const json doc = json::parse(read_file(summary_path), nullptr, false);
    if (!doc.is_object() || (!doc.contains("allocate") && !doc.contains("sleep")))
        throw MissingInput(summary_path.string() + " holds no allocate or sleep results");

    std::ostringstream rep;
    if (doc.contains("allocate")) {
        const json& a = doc["allocate"];
        rep << "Resource allocation (" << a["users"].get<int>() << " users, T = " << a["steps"].get<int>()
            << ", seed " << a["seed"].get<std::uint64_t>() << ", " << a["methods"][0]["episodes"].size()
            << " episode(s))\n";
        char line[160];
        std::snprintf(line, sizeof line, "%-12s %24s %14s\n", "Method", "Throughput(xBandwidth)", "Satisfaction");
        rep << line;
        for (const json& m : a["methods"]) {
            const std::string name = m["method"];
            std::snprintf(line, sizeof line, "%-12s %24.2f %13.2f%%\n", name.c_str(),
                          m["throughput_x_bandwidth"].get<double>(), 100.0 * m["satisfaction"].get<double>());
            rep << line;
            const auto thr = m["per_step_throughput_x_bandwidth"].get<std::vector<double>>();
            const auto sat = m["per_step_cumulative_satisfaction"].get<std::vector<double>>();
            std::vector<double> x(thr.size());
            for (std::size_t i = 0; i < x.size(); ++i) x[i] = double(i);
            write_series(dir / ("series_throughput_" + name + ".csv"), x, thr);
            write_series(dir / ("series_satisfaction_" + name + ".csv"), x, sat);
        }
    }
    if (doc.contains("sleep")) {
        const json& s = doc["sleep"];
        if (doc.contains("allocate")) rep << "\n";
        rep << "Cell sleep week (" << s["slots"].get<int>() << " half-hour slots, " << s["grids"].get<int>()
            << " grids, " << s["cells"].get<int>() << " cells, h = " << s["hysteresis"].get<double>() << ")\n";
        char line[160];
        std::snprintf(line, sizeof line, "%-14s %14s %12s %14s\n", "Method", "Energy(kWh)", "Switches", "SwitchCost");
        rep << line;
        for (const char* key : {"ours", "always_on", "minimal_cells"}) {
            const json& r = s[key];
            std::snprintf(line, sizeof line, "%-14s %14.2f %12d %14.1f\n", key, r["energy_kwh"].get<double>(),
                          r["switches"].get<int>(), r["switch_cost"].get<double>());
            rep << line;
        }
        rep << "energy ratio ours / always-on: " << fmt("%.4f", s["energy_ratio_ours_vs_always_on"].get<double>())
            << "\n";
        const auto cols = read_numeric_csv(dir / "week.csv", 5);
        write_series(dir / "series_traffic.csv", cols[0], cols[1]);
        write_series(dir / "series_energy_ours.csv", cols[0], cols[2]);
        write_series(dir / "series_energy_always_on.csv", cols[0], cols[3]);
        write_series(dir / "series_energy_minimal_cells.csv", cols[0], cols[4]);
    }
    write_file(dir / "report.txt", rep.str());
    out << rep.str();
    return kOk;
}

// Position of the value of --config in args, if any.
std::optional<std::string> find_config(const std::vector<std::string>& args) {
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size()) return args[i + 1];
        if (args[i].rfind("--config=", 0) == 0) return args[i].substr(9);
    }
    return std::nullopt;
}

} // namespace

int run(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Mobile network digital twin: scenario generation, resource allocation and cell sleep experiments",
                 "mndt"};
    app.require_subcommand(1);

    std::uint64_t seed = 0;
    std::string out_dir = "out";
    std::string config_path;
    auto common = [&](CLI::App* cmd, bool needs_seed) {
        cmd->add_option("--out", out_dir, "Output directory")->capture_default_str();
        cmd->add_option("--config", config_path, "Flat key = value file; flags override its values");
        if (needs_seed)
            cmd->add_option("--seed", seed, "Run seed (falls back to MNDT_SEED)")->envname("MNDT_SEED")->required();
    };

    GenOptions gen;
    auto* g = app.add_subcommand("gen-scenario", "Generate a synthetic world and write scenario.json");
    common(g, true);
    g->add_option("--preset", gen.preset)->check(CLI::IsMember({"table1", "desk"}))->capture_default_str();
    g->add_option("--lanes", gen.lanes)->check(CLI::PositiveNumber);
    g->add_option("--aois", gen.aois)->check(CLI::PositiveNumber);
    g->add_option("--sites", gen.sites)->check(CLI::PositiveNumber);
    g->add_option("--indoor-sites", gen.indoor_sites)->check(CLI::NonNegativeNumber);
    g->add_option("--channels", gen.channels)->check(CLI::PositiveNumber);
    g->add_option("--width", gen.width, "Extent width (m)")->check(CLI::PositiveNumber);
    g->add_option("--height", gen.height, "Extent height (m)")->check(CLI::PositiveNumber);

    AllocOptions al;
    auto* a = app.add_subcommand("allocate", "Run allocation episodes and write kpi.csv and summary.json");
    common(a, true);
    al.scenario.add_to(a, "desk");
    a->add_option("--method", al.method)
        ->check(CLI::IsMember({"ours", "equal", "ignore", "all", "nearest", "admission"}))
        ->capture_default_str();
    a->add_option("--episodes", al.episodes, "Evaluation episodes on seeds seed, seed+1, ...")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    a->add_option("--train-episodes", al.train_episodes, "Training episodes for the feedback controller")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    a->add_option("--users", al.users)->check(CLI::PositiveNumber)->capture_default_str();
    a->add_option("--steps", al.steps)->check(CLI::PositiveNumber)->capture_default_str();
    a->add_option("--dt", al.dt)->check(CLI::PositiveNumber)->capture_default_str();
    a->add_option("--demand", al.demand)->check(CLI::IsMember({"uniform", "hierarchical"}))->capture_default_str();
    a->add_option("--clusters", al.clusters, "Demand pattern count K")->check(CLI::PositiveNumber)->capture_default_str();
    a->add_option("--mobility", al.mobility)->check(CLI::IsMember({"straight", "scheduled"}))->capture_default_str();
    a->add_flag("--no-fading", al.no_fading);
    a->add_option("--max-users-per-site", al.max_users_per_site)->check(CLI::NonNegativeNumber);
    a->add_option("--outage-threshold", al.outage_threshold)->check(CLI::NonNegativeNumber)->capture_default_str();
    a->add_option("--lambda", al.lambda)->check(CLI::NonNegativeNumber)->capture_default_str();
    a->add_option("--kappa", al.kappa, "Initial feedback gain")->check(CLI::PositiveNumber)->capture_default_str();
    a->add_option("--eta", al.eta, "Feedback step size")->check(CLI::NonNegativeNumber)->capture_default_str();
    a->add_flag("--timing", al.timing, "Record wall-clock timing columns (otherwise written as 0)");

    SleepOptions sl;
    auto* s = app.add_subcommand("sleep", "Run the synthetic cell-sleep week and write week.csv and summary.json");
    common(s, true);
    sl.scenario.add_to(s, "table1");
    s->add_option("--grid-size", sl.grid_size, "Grid cell edge (m)")->check(CLI::PositiveNumber)->capture_default_str();
    s->add_option("--cells-per-site", sl.cells_per_site)->check(CLI::PositiveNumber)->capture_default_str();
    s->add_option("--cell-capacity", sl.cell_capacity, "bits/s")->check(CLI::PositiveNumber)->capture_default_str();
    s->add_option("--days", sl.days)->check(CLI::PositiveNumber)->capture_default_str();
    s->add_option("--hysteresis", sl.hysteresis, "Fixed margin h (default: tuned on day 1)")
        ->check(CLI::NonNegativeNumber);
    s->add_option("--p-on-static", sl.model.p_on_static_w)->check(CLI::NonNegativeNumber)->capture_default_str();
    s->add_option("--p-on-slope", sl.model.p_on_slope_w)->check(CLI::NonNegativeNumber)->capture_default_str();
    s->add_option("--p-sleep", sl.model.p_sleep_w)->check(CLI::NonNegativeNumber)->capture_default_str();
    s->add_option("--p-overhead", sl.model.p_overhead_w)->check(CLI::NonNegativeNumber)->capture_default_str();
    s->add_option("--beta-onoff", sl.model.beta_onoff)->check(CLI::NonNegativeNumber)->capture_default_str();
    s->add_option("--beta-sleep", sl.model.beta_sleep)->check(CLI::NonNegativeNumber)->capture_default_str();
    s->add_flag("--sleeping-site-off", sl.sleeping_site_off,
                "Sites with no on cell skip overhead power even when cells sleep");

    auto* r = app.add_subcommand("report", "Render report.txt and x,y series from a previous run directory");
    common(r, false);

    try {
        std::vector<std::string> args = raw_args;
        if (auto cfg = find_config(args)) {
            if (!fs::exists(*cfg)) throw MissingInput("config file not found: " + *cfg);
            config::merge_into_args(config::load(*cfg), args);
        }
        std::reverse(args.begin(), args.end());
        app.parse(args);

        if (g->parsed()) return cmd_gen_scenario(gen, seed, out_dir, out);
        if (a->parsed()) return cmd_allocate(al, seed, out_dir, out);
        if (s->parsed()) return cmd_sleep(sl, seed, out_dir, out);
        return cmd_report(out_dir, out);
    } catch (const CLI::CallForHelp&) {
        out << (app.get_subcommands().empty() ? app.help() : app.get_subcommands().front()->help());
        return kOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return kInvalidFlags;
    } catch (const config::ConfigError& e) {
        err << "error: " << e.what() << "\n";
        return kInvalidFlags;
    } catch (const InfeasibleSpecError& e) {
        err << "error: " << e.what() << "\n";
        return kInvalidFlags;
    } catch (const InvalidInput& e) {
        err << "error: " << e.what() << "\n";
        return kInvalidFlags;
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << "\n";
        return kInvalidFlags;
    } catch (const WriteFailure& e) {
        err << "error: " << e.what() << "\n";
        return kWriteFailure;
    } catch (const engine::ConstraintViolation& e) {
        err << "error: optimizer produced an infeasible action: " << e.what() << "\n";
        return kConstraintViolation;
    } catch (const MissingInput& e) {
        err << "error: " << e.what() << "\n";
        return kMissingInputs;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kInternalError;
    }
}

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return run(args, std::cout, std::cerr);
}

} // namespace mndt::cli
