#include "mndt/scenario.hpp"

#include "mndt/rng.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

namespace mndt {

using nlohmann::json;

ScenarioSpec ScenarioSpec::table1() { return {}; }

ScenarioSpec ScenarioSpec::desk() {
    ScenarioSpec s;
    s.width_m = 500.0;
    s.height_m = 500.0;
    s.lanes = 116;
    s.aois = 89;
    s.sites = 10;
    s.indoor_sites = 8;
    s.n_channels = 5;
    return s;
}

int GridPartition::grid_of(Vec2 p, const Rect& extent) const {
    const int c = std::clamp(int(std::floor((p.x - extent.min.x) / cell_size_m)), 0, cols - 1);
    const int r = std::clamp(int(std::floor((p.y - extent.min.y) / cell_size_m)), 0, rows - 1);
    return r * cols + c;
}

// ---------------------------------------------------------------------------
// validation

namespace {

[[noreturn]] void fail(const std::string& invariant, const std::string& detail) {
    throw ScenarioValidationError(invariant, detail);
}

void check_inside(const Rect& extent, Vec2 p, const std::string& what) {
    if (!extent.contains(p, 1e-6)) {
        std::ostringstream os;
        os << what << " at (" << p.x << ", " << p.y << ") lies outside the extent";
        fail("geometry_within_extent", os.str());
    }
}

} // namespace

std::size_t largest_component_size(const LaneGraph& graph) {
    const std::size_t n = graph.nodes.size();
    std::vector<std::size_t> parent(n);
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](std::size_t x) {
        while (parent[x] != x) {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    };
    for (const auto& e : graph.edges) {
        parent[find(std::size_t(e.from))] = find(std::size_t(e.to));
    }
    std::vector<std::size_t> count(n, 0);
    std::size_t best = 0;
    for (std::size_t i = 0; i < n; ++i) best = std::max(best, ++count[find(i)]);
    return best;
}

void validate(const Scenario& s) {
    if (!(s.extent.width() > 0.0 && s.extent.height() > 0.0))
        fail("positive_extent", "extent must have positive width and height");
    if (s.lanes.edges.empty()) fail("positive_counts", "scenario has no lanes");
    if (s.aois.empty()) fail("positive_counts", "scenario has no AoIs");
    if (s.sites.empty()) fail("positive_counts", "scenario has no base-station sites");

    const auto& nodes = s.lanes.nodes;
    for (std::size_t i = 0; i < nodes.size(); ++i)
        check_inside(s.extent, nodes[i], "lane node " + std::to_string(i));
    for (std::size_t i = 0; i < s.lanes.edges.size(); ++i) {
        const Lane& e = s.lanes.edges[i];
        const std::string name = "lane " + std::to_string(i);
        if (e.id != int(i)) fail("dense_lane_ids", name + " has id " + std::to_string(e.id));
        if (e.from < 0 || e.to < 0 || std::size_t(e.from) >= nodes.size() ||
            std::size_t(e.to) >= nodes.size())
            fail("lane_endpoints", name + " references a missing node");
        if (e.from == e.to) fail("lane_endpoints", name + " is a self loop");
        if (e.length_m < distance(nodes[e.from], nodes[e.to]) - 1e-6)
            fail("lane_length", name + " is shorter than the distance between its endpoints");
        if (!(e.speed_limit_mps > 0.0)) fail("positive_speed_limit", name);
    }
    if (10 * largest_component_size(s.lanes) < 9 * nodes.size())
        fail("lane_connectivity", "largest connected component covers less than 90% of nodes");

    for (std::size_t i = 0; i < s.aois.size(); ++i) {
        const AoI& a = s.aois[i];
        const std::string name = "AoI " + std::to_string(i);
        if (!is_simple(a.footprint)) fail("simple_footprint", name + " footprint is not simple");
        for (const auto& v : a.footprint) check_inside(s.extent, v, name + " vertex");
        if (a.entrances.empty()) fail("aoi_entrance", name + " has no entrance");
        for (const auto& e : a.entrances) {
            if (distance_to_boundary(e, a.footprint) > 1e-3)
                fail("aoi_entrance", name + " has an entrance off its boundary");
        }
        for (std::size_t k = 0; k < a.obstacles.size(); ++k) {
            if (!is_simple(a.obstacles[k]))
                fail("simple_footprint", name + " obstacle " + std::to_string(k) + " is not simple");
            if (!polygon_contains_polygon(a.footprint, a.obstacles[k]))
                fail("obstacle_containment",
                     name + " obstacle " + std::to_string(k) + " is not inside its footprint");
        }
    }

    for (std::size_t i = 0; i < s.buildings.size(); ++i) {
        const Building& b = s.buildings[i];
        const std::string name = "building " + std::to_string(i);
        if (!is_simple(b.footprint)) fail("simple_footprint", name + " footprint is not simple");
        for (const auto& v : b.footprint) check_inside(s.extent, v, name + " vertex");
        if (!(b.height_m > 0.0)) fail("positive_building_height", name);
    }

    std::set<int> ids;
    for (const auto& site : s.sites) {
        const std::string name = "site " + std::to_string(site.id);
        if (!ids.insert(site.id).second) fail("unique_site_ids", name + " appears twice");
        check_inside(s.extent, site.position, name);
        if (site.n_channels < 1) fail("site_channels", name + " needs at least one channel");
        if (!(site.carrier_freq_mhz > 0.0)) fail("site_carrier", name + " carrier must be > 0");
        if (!(site.rb_bandwidth_hz > 0.0)) fail("site_bandwidth", name + " RB bandwidth must be > 0");
        if (!(site.antenna_height_m > 0.0)) fail("site_antenna_height", name);
        if (!std::isfinite(site.max_tx_power_dbm)) fail("site_power", name);
    }
}

// ---------------------------------------------------------------------------
// JSON

namespace {

json point(Vec2 p) { return json::array({p.x, p.y}); }

json polygon(const Polygon& poly) {
    json a = json::array();
    for (const auto& p : poly) a.push_back(point(p));
    return a;
}

Vec2 read_point(const json& j) {
    if (!j.is_array() || j.size() != 2) throw ScenarioParseError("expected [x, y] point");
    return {j.at(0).get<double>(), j.at(1).get<double>()};
}

Polygon read_polygon(const json& j) {
    if (!j.is_array()) throw ScenarioParseError("expected polygon array");
    Polygon poly;
    poly.reserve(j.size());
    for (const auto& p : j) poly.push_back(read_point(p));
    return poly;
}

} // namespace

json to_json(const Scenario& s) {
    json doc;
    doc["schema_version"] = kScenarioSchemaVersion;
    doc["extent"] = {{"min", point(s.extent.min)}, {"max", point(s.extent.max)}};

    json nodes = json::array();
    for (std::size_t i = 0; i < s.lanes.nodes.size(); ++i) {
        nodes.push_back({{"id", i}, {"x", s.lanes.nodes[i].x}, {"y", s.lanes.nodes[i].y}});
    }
    json edges = json::array();
    for (const auto& e : s.lanes.edges) {
        edges.push_back({{"id", e.id},
                         {"from", e.from},
                         {"to", e.to},
                         {"length_m", e.length_m},
                         {"speed_limit_mps", e.speed_limit_mps}});
    }
    doc["lanes"] = {{"nodes", std::move(nodes)}, {"edges", std::move(edges)}};

    json aois = json::array();
    for (const auto& a : s.aois) {
        json obstacles = json::array();
        for (const auto& o : a.obstacles) obstacles.push_back(polygon(o));
        json entrances = json::array();
        for (const auto& e : a.entrances) entrances.push_back(point(e));
        aois.push_back({{"footprint", polygon(a.footprint)},
                        {"entrances", std::move(entrances)},
                        {"obstacles", std::move(obstacles)}});
    }
    doc["aois"] = std::move(aois);

    json buildings = json::array();
    for (const auto& b : s.buildings) {
        buildings.push_back({{"footprint", polygon(b.footprint)}, {"height_m", b.height_m}});
    }
    doc["buildings"] = std::move(buildings);

    json sites = json::array();
    for (const auto& site : s.sites) {
        sites.push_back({{"id", site.id},
                         {"position", point(site.position)},
                         {"indoor", site.indoor},
                         {"max_tx_power_dbm", site.max_tx_power_dbm},
                         {"antenna_height_m", site.antenna_height_m},
                         {"azimuth_deg", site.azimuth_deg},
                         {"elevation_deg", site.elevation_deg},
                         {"carrier_freq_mhz", site.carrier_freq_mhz},
                         {"n_channels", site.n_channels},
                         {"rb_bandwidth_hz", site.rb_bandwidth_hz}});
    }
    doc["sites"] = std::move(sites);
    return doc;
}

Scenario scenario_from_json(const json& doc) {
    Scenario s;
    try {
        const int version = doc.at("schema_version").get<int>();
        if (version != kScenarioSchemaVersion)
            throw ScenarioParseError("unsupported schema_version " + std::to_string(version));
        s.extent = {read_point(doc.at("extent").at("min")), read_point(doc.at("extent").at("max"))};

        const auto& lanes = doc.at("lanes");
        const auto& nodes = lanes.at("nodes");
        s.lanes.nodes.resize(nodes.size());
        for (const auto& n : nodes) {
            const auto id = n.at("id").get<long>();
            if (id < 0 || std::size_t(id) >= nodes.size())
                throw ScenarioParseError("lane node id out of range: " + std::to_string(id));
            s.lanes.nodes[std::size_t(id)] = {n.at("x").get<double>(), n.at("y").get<double>()};
        }
        for (const auto& e : lanes.at("edges")) {
            s.lanes.edges.push_back({e.at("id").get<int>(), e.at("from").get<int>(),
                                     e.at("to").get<int>(), e.at("length_m").get<double>(),
                                     e.at("speed_limit_mps").get<double>()});
        }
        for (const auto& a : doc.at("aois")) {
            AoI aoi;
            aoi.footprint = read_polygon(a.at("footprint"));
            for (const auto& e : a.at("entrances")) aoi.entrances.push_back(read_point(e));
            for (const auto& o : a.at("obstacles")) aoi.obstacles.push_back(read_polygon(o));
            s.aois.push_back(std::move(aoi));
        }
        for (const auto& b : doc.at("buildings")) {
            s.buildings.push_back({read_polygon(b.at("footprint")), b.at("height_m").get<double>()});
        }
        for (const auto& j : doc.at("sites")) {
            BaseStationSite site;
            site.id = j.at("id").get<int>();
            site.position = read_point(j.at("position"));
            site.indoor = j.at("indoor").get<bool>();
            site.max_tx_power_dbm = j.at("max_tx_power_dbm").get<double>();
            site.antenna_height_m = j.at("antenna_height_m").get<double>();
            site.azimuth_deg = j.at("azimuth_deg").get<double>();
            site.elevation_deg = j.at("elevation_deg").get<double>();
            site.carrier_freq_mhz = j.at("carrier_freq_mhz").get<double>();
            site.n_channels = j.at("n_channels").get<int>();
            site.rb_bandwidth_hz = j.at("rb_bandwidth_hz").get<double>();
            s.sites.push_back(site);
        }
    } catch (const json::exception& e) {
        throw ScenarioParseError(std::string("malformed scenario: ") + e.what());
    }
    validate(s);
    return s;
}

std::string dump_scenario(const Scenario& s) { return to_json(s).dump(1) + "\n"; }

Scenario load_scenario(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ScenarioParseError("cannot open scenario file " + path.string());
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ScenarioParseError(std::string("malformed scenario JSON: ") + e.what());
    }
    return scenario_from_json(doc);
}

void save_scenario(const Scenario& s, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ScenarioError("cannot write scenario file " + path.string());
    out << dump_scenario(s);
    if (!out) throw ScenarioError("failed while writing " + path.string());
}

// ---------------------------------------------------------------------------
// generation

namespace {

constexpr double kMinNodeSpacing = 10.0;
constexpr double kMinLotSize = 4.0;
constexpr double kStreetSetback = 6.0;
constexpr double kLotGap = 3.0;

struct StreetPlan {
    int nx = 0;
    int ny = 0;
};

// Smallest roughly-square grid whose two-way streets provide at least `lanes`
// lanes while a spanning tree of streets still fits in the lane budget.
StreetPlan plan_streets(int lanes, double width, double height) {
    const double aspect = width / height;
    for (int ny = 2; ny < 10000; ++ny) {
        const int nx = std::max(2, int(std::lround(ny * aspect)));
        const long streets = long(nx) * (ny - 1) + long(ny) * (nx - 1);
        if (2 * streets >= lanes) {
            if (2L * (long(nx) * ny - 1) <= lanes) return {nx, ny};
            break;
        }
    }
    // too few lanes for a 2-D grid: a single row of streets
    return {(lanes + 1) / 2 + 1, 1};
}

struct Street {
    int a;
    int b;
};

} // namespace

Scenario generate_scenario(std::uint64_t seed, const ScenarioSpec& spec) {
    if (!(spec.width_m > 0.0 && spec.height_m > 0.0))
        throw InfeasibleSpecError("extent must have positive area");
    if (spec.lanes <= 0 || spec.aois <= 0 || spec.sites <= 0)
        throw InfeasibleSpecError("lane, AoI and site counts must be positive");
    if (spec.indoor_sites < 0 || spec.indoor_sites > spec.sites)
        throw InfeasibleSpecError("indoor site count must lie in [0, sites]");
    if (spec.n_channels < 1) throw InfeasibleSpecError("sites need at least one channel");

    Scenario s;
    s.extent = {{0.0, 0.0}, {spec.width_m, spec.height_m}};

    // lane graph: perturbed Manhattan grid
    auto geo_rng = rng::stream(seed, "scenario.streets");
    const StreetPlan plan = plan_streets(spec.lanes, spec.width_m, spec.height_m);
    const double sx = spec.width_m / plan.nx;
    const double sy = spec.height_m / plan.ny;
    if (sx < kMinNodeSpacing || sy < kMinNodeSpacing)
        throw InfeasibleSpecError("lane count does not fit the extent at 10 m node spacing");

    std::uniform_real_distribution<double> jitter(-0.15, 0.15);
    auto node_index = [&](int i, int j) { return j * plan.nx + i; };
    s.lanes.nodes.resize(std::size_t(plan.nx) * plan.ny);
    for (int j = 0; j < plan.ny; ++j) {
        for (int i = 0; i < plan.nx; ++i) {
            const double x = (i + 0.5 + jitter(geo_rng)) * sx;
            const double y = (j + 0.5 + jitter(geo_rng)) * sy;
            s.lanes.nodes[std::size_t(node_index(i, j))] = {x, y};
        }
    }

    std::vector<Street> streets;
    for (int j = 0; j < plan.ny; ++j) {
        for (int i = 0; i < plan.nx; ++i) {
            if (i + 1 < plan.nx) streets.push_back({node_index(i, j), node_index(i + 1, j)});
            if (j + 1 < plan.ny) streets.push_back({node_index(i, j), node_index(i, j + 1)});
        }
    }
    std::shuffle(streets.begin(), streets.end(), geo_rng);

    // spanning tree first so that removals never disconnect the graph
    std::vector<int> parent(s.lanes.nodes.size());
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](int x) {
        while (parent[std::size_t(x)] != x) x = parent[std::size_t(x)] = parent[std::size_t(parent[std::size_t(x)])];
        return x;
    };
    std::vector<Street> tree;
    std::vector<Street> extra;
    for (const auto& st : streets) {
        const int ra = find(st.a);
        const int rb = find(st.b);
        if (ra != rb) {
            parent[std::size_t(ra)] = rb;
            tree.push_back(st);
        } else {
            extra.push_back(st);
        }
    }
    const int tree_lanes = int(2 * tree.size());
    int budget = spec.lanes - tree_lanes;
    std::vector<std::pair<Street, bool>> kept; // street, two-way
    for (const auto& st : tree) kept.push_back({st, true});
    for (const auto& st : extra) {
        if (budget >= 2) {
            kept.push_back({st, true});
            budget -= 2;
        } else if (budget == 1) {
            kept.push_back({st, false});
            budget = 0;
        }
    }
    {
        // a single-row layout may overshoot by one lane; make one street one-way
        int total = 0;
        for (const auto& k : kept) total += k.second ? 2 : 1;
        for (auto it = kept.rbegin(); total > spec.lanes && it != kept.rend(); ++it) {
            if (it->second) {
                it->second = false;
                --total;
            }
        }
        if (total != spec.lanes) throw InfeasibleSpecError("could not realise the lane count");
    }
    std::uniform_real_distribution<double> speed(8.3, 16.7);
    for (const auto& [st, two_way] : kept) {
        const double len = distance(s.lanes.nodes[std::size_t(st.a)], s.lanes.nodes[std::size_t(st.b)]);
        const double v = speed(geo_rng);
        s.lanes.edges.push_back({int(s.lanes.edges.size()), st.a, st.b, len, v});
        if (two_way) s.lanes.edges.push_back({int(s.lanes.edges.size()), st.b, st.a, len, v});
    }

    // blocks between street lines, including the border strips
    auto lot_rng = rng::stream(seed, "scenario.lots");
    std::vector<double> col_lo(std::size_t(plan.nx) + 1), col_hi(std::size_t(plan.nx) + 1);
    std::vector<double> row_lo(std::size_t(plan.ny) + 1), row_hi(std::size_t(plan.ny) + 1);
    auto col_x = [&](int i, bool max_side) {
        double v = max_side ? -1e300 : 1e300;
        for (int j = 0; j < plan.ny; ++j) {
            const double x = s.lanes.nodes[std::size_t(node_index(i, j))].x;
            v = max_side ? std::max(v, x) : std::min(v, x);
        }
        return v;
    };
    auto row_y = [&](int j, bool max_side) {
        double v = max_side ? -1e300 : 1e300;
        for (int i = 0; i < plan.nx; ++i) {
            const double y = s.lanes.nodes[std::size_t(node_index(i, j))].y;
            v = max_side ? std::max(v, y) : std::min(v, y);
        }
        return v;
    };
    for (int i = 0; i <= plan.nx; ++i) {
        col_lo[std::size_t(i)] = (i == 0) ? 1.0 : col_x(i - 1, true) + kStreetSetback;
        col_hi[std::size_t(i)] = (i == plan.nx) ? spec.width_m - 1.0 : col_x(i, false) - kStreetSetback;
    }
    for (int j = 0; j <= plan.ny; ++j) {
        row_lo[std::size_t(j)] = (j == 0) ? 1.0 : row_y(j - 1, true) + kStreetSetback;
        row_hi[std::size_t(j)] = (j == plan.ny) ? spec.height_m - 1.0 : row_y(j, false) - kStreetSetback;
    }
    std::vector<Rect> blocks;
    for (int j = 0; j <= plan.ny; ++j) {
        for (int i = 0; i <= plan.nx; ++i) {
            Rect r{{col_lo[std::size_t(i)], row_lo[std::size_t(j)]}, {col_hi[std::size_t(i)], row_hi[std::size_t(j)]}};
            if (r.width() >= kMinLotSize && r.height() >= kMinLotSize) blocks.push_back(r);
        }
    }
    if (blocks.empty()) throw InfeasibleSpecError("no room for AoIs between streets");

    // spread AoIs over blocks, largest blocks first when they do not divide evenly
    std::vector<std::size_t> order(blocks.size());
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), lot_rng);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return blocks[a].area() > blocks[b].area(); });
    std::vector<int> per_block(blocks.size(), spec.aois / int(blocks.size()));
    for (int k = 0; k < spec.aois % int(blocks.size()); ++k) ++per_block[order[std::size_t(k)]];

    std::uniform_real_distribution<double> unit01(0.0, 1.0);
    std::uniform_real_distribution<double> height(6.0, 45.0);
    for (std::size_t b = 0; b < blocks.size(); ++b) {
        const int k = per_block[b];
        if (k == 0) continue;
        const Rect& r = blocks[b];
        const bool split_x = r.width() >= r.height();
        const double span = split_x ? r.width() : r.height();
        const double lot = (span - kLotGap * (k - 1)) / k;
        const double depth = split_x ? r.height() : r.width();
        if (lot < kMinLotSize || depth < kMinLotSize)
            throw InfeasibleSpecError("AoI count does not fit the extent at minimum lot size");
        for (int q = 0; q < k; ++q) {
            Rect fr = r;
            if (split_x) {
                fr.min.x = r.min.x + q * (lot + kLotGap);
                fr.max.x = fr.min.x + lot;
            } else {
                fr.min.y = r.min.y + q * (lot + kLotGap);
                fr.max.y = fr.min.y + lot;
            }
            AoI aoi;
            aoi.footprint = rectangle_polygon(fr);
            aoi.entrances.push_back({0.5 * (fr.min.x + fr.max.x), fr.min.y});
            if (unit01(lot_rng) < 0.5) aoi.entrances.push_back({0.5 * (fr.min.x + fr.max.x), fr.max.y});
            const int n_obstacles = int(unit01(lot_rng) * 3.0);
            for (int o = 0; o < n_obstacles; ++o) {
                const double w = fr.width() * (0.1 + 0.1 * unit01(lot_rng));
                const double h = fr.height() * (0.1 + 0.1 * unit01(lot_rng));
                const double margin = 0.5;
                const double x0 = fr.min.x + margin + unit01(lot_rng) * (fr.width() - w - 2 * margin);
                const double y0 = fr.min.y + margin + unit01(lot_rng) * (fr.height() - h - 2 * margin);
                if (w < 0.2 || h < 0.2 || fr.width() - w - 2 * margin <= 0.0 ||
                    fr.height() - h - 2 * margin <= 0.0)
                    continue;
                aoi.obstacles.push_back(rectangle_polygon({{x0, y0}, {x0 + w, y0 + h}}));
            }
            s.buildings.push_back({aoi.footprint, height(lot_rng)});
            s.aois.push_back(std::move(aoi));
        }
    }

    // sites: indoor ones inside distinct AoIs, outdoor ones on distinct lane nodes
    auto site_rng = rng::stream(seed, "scenario.sites");
    const int n_indoor = spec.indoor_sites;
    const int n_outdoor = spec.sites - spec.indoor_sites;
    if (n_indoor > int(s.aois.size()))
        throw InfeasibleSpecError("more indoor sites than AoIs");
    if (n_outdoor > int(s.lanes.nodes.size()))
        throw InfeasibleSpecError("more outdoor sites than lane nodes");
    std::vector<std::size_t> aoi_pick(s.aois.size());
    std::iota(aoi_pick.begin(), aoi_pick.end(), 0);
    std::shuffle(aoi_pick.begin(), aoi_pick.end(), site_rng);
    std::vector<std::size_t> node_pick(s.lanes.nodes.size());
    std::iota(node_pick.begin(), node_pick.end(), 0);
    std::shuffle(node_pick.begin(), node_pick.end(), site_rng);
    std::uniform_real_distribution<double> azimuth(0.0, 360.0);

    for (int k = 0; k < spec.sites; ++k) {
        BaseStationSite site;
        site.id = k;
        site.indoor = k < n_indoor;
        site.n_channels = spec.n_channels;
        site.carrier_freq_mhz = spec.carrier_freq_mhz;
        site.rb_bandwidth_hz = spec.rb_bandwidth_hz;
        site.azimuth_deg = azimuth(site_rng);
        if (site.indoor) {
            const Rect box = bounding_box(s.aois[aoi_pick[std::size_t(k)]].footprint);
            site.position = {box.min.x + box.width() * (0.25 + 0.5 * unit01(site_rng)),
                             box.min.y + box.height() * (0.25 + 0.5 * unit01(site_rng))};
            site.max_tx_power_dbm = kIndoorMaxTxPowerDbm;
            site.antenna_height_m = 3.0;
            site.elevation_deg = 0.0;
        } else {
            site.position = s.lanes.nodes[node_pick[std::size_t(k - n_indoor)]];
            site.max_tx_power_dbm = kOutdoorMaxTxPowerDbm;
            site.antenna_height_m = 25.0;
            site.elevation_deg = -6.0;
        }
        s.sites.push_back(site);
    }

    validate(s);
    return s;
}

GridPartition build_grid(const Scenario& scenario, double cell_size_m) {
    if (!(cell_size_m > 0.0)) throw std::invalid_argument("grid cell size must be positive");
    GridPartition g;
    g.cell_size_m = cell_size_m;
    const Rect& e = scenario.extent;
    g.cols = std::max(1, int(std::ceil(e.width() / cell_size_m - 1e-9)));
    g.rows = std::max(1, int(std::ceil(e.height() / cell_size_m - 1e-9)));
    g.grids.reserve(std::size_t(g.cols) * std::size_t(g.rows));
    for (int r = 0; r < g.rows; ++r) {
        for (int c = 0; c < g.cols; ++c) {
            Rect cell{{e.min.x + c * cell_size_m, e.min.y + r * cell_size_m},
                      {std::min(e.max.x, e.min.x + (c + 1) * cell_size_m),
                       std::min(e.max.y, e.min.y + (r + 1) * cell_size_m)}};
            g.grids.push_back(cell);
        }
    }
    for (const auto& site : scenario.sites) g.site_grid.push_back(g.grid_of(site.position, e));
    return g;
}

} // namespace mndt
