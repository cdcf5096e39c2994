#include "polsim/facility.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <queue>
#include <sstream>

#include <json.hpp>

namespace polsim {

using nlohmann::json;

SpaceCategory parse_space_category(std::string_view s) {
    for (int i = 0; i < kNumSpaceCategories; ++i)
        if (kSpaceCategoryNames[i] == s) return static_cast<SpaceCategory>(i);
    throw ParseError("unknown space category: " + std::string(s));
}

double distance(const Point& a, const Point& b) {
    return std::hypot(a.x - b.x, a.y - b.y);
}

Point Walk::position_at(double arc_length) const {
    if (points.empty()) return {};
    if (arc_length <= 0) return points.front();
    if (arc_length >= total_length) return points.back();
    // cumulative is nondecreasing; find the segment containing arc_length.
    auto it = std::upper_bound(cumulative.begin(), cumulative.end(), arc_length);
    const std::size_t seg = static_cast<std::size_t>(it - cumulative.begin()); // in [1, n)
    const double seg_start = cumulative[seg - 1];
    const double seg_len = cumulative[seg] - seg_start;
    const double t = seg_len > 0 ? (arc_length - seg_start) / seg_len : 0.0;
    const Point& p0 = points[seg - 1];
    const Point& p1 = points[seg];
    return {p0.x + t * (p1.x - p0.x), p0.y + t * (p1.y - p0.y)};
}

namespace {

double require_number(const json& j, const char* field) {
    if (!j.contains(field) || !j[field].is_number())
        throw ParseError(std::string("layout config: missing numeric field '") + field + "'");
    return j[field].get<double>();
}

std::string require_string(const json& j, const char* field) {
    if (!j.contains(field) || !j[field].is_string())
        throw ParseError(std::string("layout config: missing string field '") + field + "'");
    return j[field].get<std::string>();
}

} // namespace

FacilityLayout FacilityLayout::from_json_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("layout config: ") + e.what());
    }
    if (!j.is_object()) throw ParseError("layout config: top level must be an object");
    if (!j.contains("schema_version") || !j["schema_version"].is_number_integer())
        throw ParseError("layout config: missing integer field 'schema_version'");
    if (j["schema_version"].get<int>() != 1)
        throw ValidationError("layout config: unsupported schema_version " +
                              std::to_string(j["schema_version"].get<int>()));

    FacilityLayout layout;
    layout.walk_speed_ = j.contains("walk_speed") ? require_number(j, "walk_speed") : 1.4;

    if (!j.contains("bounds")) throw ParseError("layout config: missing 'bounds'");
    const json& b = j["bounds"];
    layout.bounds_ = {require_number(b, "x_min"), require_number(b, "x_max"),
                      require_number(b, "y_min"), require_number(b, "y_max")};

    if (!j.contains("waypoints") || !j["waypoints"].is_array())
        throw ParseError("layout config: missing array 'waypoints'");
    for (const json& w : j["waypoints"]) {
        layout.waypoints_.push_back(
            {require_string(w, "id"), {require_number(w, "x"), require_number(w, "y")}});
    }

    if (!j.contains("edges") || !j["edges"].is_array())
        throw ParseError("layout config: missing array 'edges'");
    for (const json& e : j["edges"]) {
        GraphEdge edge{require_string(e, "a"), require_string(e, "b"), 0};
        if (e.contains("length")) {
            edge.length = require_number(e, "length");
        } else {
            edge.length = -1; // filled in below from waypoint positions
        }
        layout.edges_.push_back(std::move(edge));
    }

    if (!j.contains("locations") || !j["locations"].is_array())
        throw ParseError("layout config: missing array 'locations'");
    for (const json& l : j["locations"]) {
        layout.locations_.push_back({require_string(l, "id"),
                                     parse_space_category(require_string(l, "category")),
                                     {require_number(l, "x"), require_number(l, "y")},
                                     require_string(l, "waypoint")});
    }

    layout.build_indexes();
    layout.validate();
    return layout;
}

FacilityLayout FacilityLayout::load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open layout file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return from_json_text(ss.str());
}

void FacilityLayout::build_indexes() {
    for (std::size_t i = 0; i < waypoints_.size(); ++i) {
        if (!waypoint_index_.emplace(waypoints_[i].id, i).second)
            throw ValidationError("duplicate waypoint id: " + waypoints_[i].id);
    }
    for (std::size_t i = 0; i < locations_.size(); ++i) {
        if (!location_index_.emplace(locations_[i].id, i).second)
            throw ValidationError("duplicate location id: " + locations_[i].id);
    }
    adjacency_.assign(waypoints_.size(), {});
    for (GraphEdge& e : edges_) {
        auto ia = waypoint_index_.find(e.a);
        auto ib = waypoint_index_.find(e.b);
        if (ia == waypoint_index_.end() || ib == waypoint_index_.end())
            throw ValidationError("edge references unknown waypoint: " + e.a + " -- " + e.b);
        if (e.length < 0)
            e.length = distance(waypoints_[ia->second].position, waypoints_[ib->second].position);
        adjacency_[ia->second].push_back({ib->second, e.length});
        adjacency_[ib->second].push_back({ia->second, e.length});
    }
    for (auto& nbrs : adjacency_) {
        std::sort(nbrs.begin(), nbrs.end(), [this](const auto& l, const auto& r) {
            return waypoints_[l.first].id < waypoints_[r.first].id;
        });
    }
}

void FacilityLayout::validate() const {
    if (!(bounds_.x_min < bounds_.x_max) || !(bounds_.y_min < bounds_.y_max))
        throw ValidationError("bounds must be strictly ordered");
    if (!(walk_speed_ > 0)) throw ValidationError("walk_speed must be > 0");
    for (const GraphEdge& e : edges_)
        if (!(e.length > 0))
            throw ValidationError("edge length must be > 0: " + e.a + " -- " + e.b);

    std::array<int, kNumSpaceCategories> counts{};
    for (const Location& l : locations_) {
        counts[static_cast<int>(l.category)]++;
        if (l.position.x < bounds_.x_min || l.position.x > bounds_.x_max ||
            l.position.y < bounds_.y_min || l.position.y > bounds_.y_max)
            throw ValidationError("location outside bounds: " + l.id);
        if (!waypoint_index_.count(l.attached_waypoint))
            throw ValidationError("location " + l.id + " references unknown waypoint " +
                                  l.attached_waypoint);
    }
    if (counts[static_cast<int>(SpaceCategory::Entrance)] < 2)
        throw ValidationError("layout requires >=2 entrances");
    for (SpaceCategory c : {SpaceCategory::Office, SpaceCategory::Lab, SpaceCategory::Storage,
                            SpaceCategory::Maintenance, SpaceCategory::BreakRoom}) {
        if (counts[static_cast<int>(c)] < 1)
            throw ValidationError(std::string("layout requires >=1 location of category ") +
                                  std::string(to_string(c)));
    }

    // Connectivity: every location's waypoint reachable from every entrance.
    // The graph is undirected, so one BFS from the first entrance suffices.
    const Location* first_entrance = nullptr;
    for (const Location& l : locations_)
        if (l.category == SpaceCategory::Entrance) {
            first_entrance = &l;
            break;
        }
    std::vector<char> seen(waypoints_.size(), 0);
    std::queue<std::size_t> q;
    const std::size_t start = waypoint_index_.at(first_entrance->attached_waypoint);
    seen[start] = 1;
    q.push(start);
    while (!q.empty()) {
        const std::size_t u = q.front();
        q.pop();
        for (const auto& [v, len] : adjacency_[u]) {
            (void)len;
            if (!seen[v]) {
                seen[v] = 1;
                q.push(v);
            }
        }
    }
    for (const Location& l : locations_)
        if (!seen[waypoint_index_.at(l.attached_waypoint)])
            throw ValidationError("walk graph disconnected: location " + l.id +
                                  " unreachable from entrance " + first_entrance->id);
}

const Location* FacilityLayout::find_location(std::string_view id) const {
    auto it = location_index_.find(std::string(id));
    return it == location_index_.end() ? nullptr : &locations_[it->second];
}

const Location& FacilityLayout::location(std::string_view id) const {
    const Location* l = find_location(id);
    if (!l) throw ValidationError("unknown location id: " + std::string(id));
    return *l;
}

const Waypoint& FacilityLayout::waypoint(std::string_view id) const {
    auto it = waypoint_index_.find(std::string(id));
    if (it == waypoint_index_.end())
        throw ValidationError("unknown waypoint id: " + std::string(id));
    return waypoints_[it->second];
}

std::vector<const Location*> FacilityLayout::locations_of(SpaceCategory c) const {
    std::vector<const Location*> out;
    for (const Location& l : locations_)
        if (l.category == c) out.push_back(&l);
    return out;
}

Path FacilityLayout::shortest_waypoint_path(std::string_view from_wp,
                                            std::string_view to_wp) const {
    const std::size_t src = waypoint_index_.at(std::string(from_wp));
    const std::size_t dst = waypoint_index_.at(std::string(to_wp));

    constexpr double kInf = std::numeric_limits<double>::infinity();
    std::vector<double> dist(waypoints_.size(), kInf);
    std::vector<std::size_t> parent(waypoints_.size(), SIZE_MAX);

    // Priority queue keyed by (distance, waypoint id) for deterministic pop
    // order; equal-distance relaxations keep the lexicographically smaller
    // predecessor id.
    using QItem = std::pair<double, std::size_t>;
    auto cmp = [this](const QItem& l, const QItem& r) {
        if (l.first != r.first) return l.first > r.first;
        return waypoints_[l.second].id > waypoints_[r.second].id;
    };
    std::priority_queue<QItem, std::vector<QItem>, decltype(cmp)> pq(cmp);

    dist[src] = 0;
    pq.push({0, src});
    while (!pq.empty()) {
        const auto [d, u] = pq.top();
        pq.pop();
        if (d > dist[u]) continue;
        for (const auto& [v, len] : adjacency_[u]) {
            const double alt = d + len;
            if (alt < dist[v]) {
                dist[v] = alt;
                parent[v] = u;
                pq.push({alt, v});
            } else if (alt == dist[v] && parent[v] != SIZE_MAX &&
                       waypoints_[u].id < waypoints_[parent[v]].id) {
                parent[v] = u;
            }
        }
    }

    if (dist[dst] == kInf)
        throw ValidationError("no path between waypoints " + std::string(from_wp) + " and " +
                              std::string(to_wp));

    Path path;
    path.total_length = dist[dst];
    std::vector<std::size_t> chain;
    for (std::size_t v = dst; v != SIZE_MAX; v = parent[v]) {
        chain.push_back(v);
        if (v == src) break;
    }
    std::reverse(chain.begin(), chain.end());
    for (std::size_t v : chain) path.waypoints.push_back(waypoints_[v].id);
    return path;
}

Path FacilityLayout::shortest_path(std::string_view from_location,
                                   std::string_view to_location) const {
    const Location& a = location(from_location);
    const Location& b = location(to_location);
    return shortest_waypoint_path(a.attached_waypoint, b.attached_waypoint);
}

namespace {

Walk make_walk(std::vector<Point> pts) {
    Walk w;
    w.points = std::move(pts);
    w.cumulative.resize(w.points.size(), 0.0);
    for (std::size_t i = 1; i < w.points.size(); ++i)
        w.cumulative[i] = w.cumulative[i - 1] + distance(w.points[i - 1], w.points[i]);
    w.total_length = w.cumulative.empty() ? 0.0 : w.cumulative.back();
    return w;
}

} // namespace

Walk FacilityLayout::walk_between(std::string_view from_location,
                                  std::string_view to_location) const {
    const Location& a = location(from_location);
    const Location& b = location(to_location);
    if (a.id == b.id) return make_walk({a.position});
    const Path p = shortest_path(from_location, to_location);
    std::vector<Point> pts;
    pts.push_back(a.position);
    for (const std::string& wp : p.waypoints) pts.push_back(waypoint(wp).position);
    pts.push_back(b.position);
    return make_walk(std::move(pts));
}

const std::string& FacilityLayout::nearest_waypoint(const Point& p) const {
    const std::string* best = nullptr;
    double best_d = std::numeric_limits<double>::infinity();
    for (const Waypoint& w : waypoints_) {
        const double d = distance(w.position, p);
        if (d < best_d || (d == best_d && best && w.id < *best)) {
            best_d = d;
            best = &w.id;
        }
    }
    return *best;
}

Walk FacilityLayout::walk_from_point(const Point& start, std::string_view to_location) const {
    const Location& b = location(to_location);
    const std::string& wp_start = nearest_waypoint(start);
    const Path p = shortest_waypoint_path(wp_start, b.attached_waypoint);
    std::vector<Point> pts;
    pts.push_back(start);
    for (const std::string& wp : p.waypoints) pts.push_back(waypoint(wp).position);
    pts.push_back(b.position);
    return make_walk(std::move(pts));
}

Walk FacilityLayout::walk_point_to_point(const Point& start, const Point& end) const {
    const std::string& wp_start = nearest_waypoint(start);
    const std::string& wp_end = nearest_waypoint(end);
    const Path p = shortest_waypoint_path(wp_start, wp_end);
    std::vector<Point> pts;
    pts.push_back(start);
    for (const std::string& wp : p.waypoints) pts.push_back(waypoint(wp).position);
    pts.push_back(end);
    return make_walk(std::move(pts));
}

const Location& FacilityLayout::nearest(SpaceCategory c, const Point& p) const {
    const Location* best = nullptr;
    double best_d = std::numeric_limits<double>::infinity();
    for (const Location& l : locations_) {
        if (l.category != c) continue;
        const double d = distance(l.position, p);
        if (d < best_d || (d == best_d && best && l.id < best->id)) {
            best_d = d;
            best = &l;
        }
    }
    if (!best)
        throw ValidationError(std::string("layout has no location of category ") +
                              std::string(to_string(c)));
    return *best;
}

} // namespace polsim
