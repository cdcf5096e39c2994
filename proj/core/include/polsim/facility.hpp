#pragma once

#include <array>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "polsim/errors.hpp"

namespace polsim {

/// Space taxonomy of the facility. BREAK_ROOM and ENTRANCE are real spaces
/// but are not part of the transition-log tag vocabulary.
enum class SpaceCategory : int {
    Office = 0,
    Lab = 1,
    Storage = 2,
    Maintenance = 3,
    BreakRoom = 4,
    Entrance = 5,
};

inline constexpr int kNumSpaceCategories = 6;

inline constexpr std::array<std::string_view, kNumSpaceCategories> kSpaceCategoryNames = {
    "OFFICE", "LAB", "STORAGE", "MAINTENANCE", "BREAK_ROOM", "ENTRANCE",
};

inline std::string_view to_string(SpaceCategory c) {
    return kSpaceCategoryNames[static_cast<int>(c)];
}

SpaceCategory parse_space_category(std::string_view s);

struct Point {
    double x = 0;
    double y = 0;
};

double distance(const Point& a, const Point& b);

struct Location {
    std::string id;
    SpaceCategory category;
    Point position;
    std::string attached_waypoint;
};

struct Waypoint {
    std::string id;
    Point position;
};

struct GraphEdge {
    std::string a;
    std::string b;
    double length; // meters, > 0
};

struct Bounds {
    double x_min = 0, x_max = 0, y_min = 0, y_max = 0;
};

/// Shortest route between two locations expressed as the waypoint sequence
/// walked between their attached waypoints.
struct Path {
    std::vector<std::string> waypoints;
    double total_length = 0; // meters, over graph edges only
};

/// A walkable polyline: location position -> attached waypoint -> ... ->
/// attached waypoint -> location position, with cumulative arc lengths.
struct Walk {
    std::vector<Point> points;
    std::vector<double> cumulative; // same size; cumulative[0] == 0
    double total_length = 0;

    Point position_at(double arc_length) const;
};

/// Immutable facility geometry: typed locations, a waypoint walk graph, and
/// normalization bounds. Validated on construction; safe to share across
/// threads.
class FacilityLayout {
public:
    /// Empty layout; invalid until replaced by a loaded one.
    FacilityLayout() = default;

    /// Parses and validates the JSON layout config. Throws ParseError for
    /// malformed text / missing schema fields and ValidationError naming the
    /// violated invariant otherwise.
    static FacilityLayout from_json_text(const std::string& text);
    static FacilityLayout load_file(const std::string& path);

    const std::vector<Location>& locations() const { return locations_; }
    const std::vector<Waypoint>& waypoints() const { return waypoints_; }
    const std::vector<GraphEdge>& edges() const { return edges_; }
    const Bounds& bounds() const { return bounds_; }
    double walk_speed() const { return walk_speed_; }

    const Location& location(std::string_view id) const;
    const Location* find_location(std::string_view id) const;
    const Waypoint& waypoint(std::string_view id) const;

    std::vector<const Location*> locations_of(SpaceCategory c) const;

    /// Dijkstra over the walk graph between the two locations' attached
    /// waypoints. Ties broken deterministically by lexicographic waypoint id.
    Path shortest_path(std::string_view from_location, std::string_view to_location) const;

    /// Walkable polyline between two locations (through their waypoints).
    Walk walk_between(std::string_view from_location, std::string_view to_location) const;

    /// Walkable polyline from an arbitrary point: straight to the nearest
    /// waypoint, then along the graph to the target location.
    Walk walk_from_point(const Point& start, std::string_view to_location) const;

    /// Walkable polyline between two arbitrary points via their nearest
    /// waypoints.
    Walk walk_point_to_point(const Point& start, const Point& end) const;

    /// Closest location of a category by Euclidean distance from `p`;
    /// ties broken by lexicographic id. Throws if the category is absent.
    const Location& nearest(SpaceCategory c, const Point& p) const;

    double normalize_x(double x) const {
        return (x - bounds_.x_min) / (bounds_.x_max - bounds_.x_min);
    }
    double normalize_y(double y) const {
        return (y - bounds_.y_min) / (bounds_.y_max - bounds_.y_min);
    }

private:
    void build_indexes();
    void validate() const;

    Path shortest_waypoint_path(std::string_view from_wp, std::string_view to_wp) const;
    const std::string& nearest_waypoint(const Point& p) const;

    std::vector<Location> locations_;
    std::vector<Waypoint> waypoints_;
    std::vector<GraphEdge> edges_;
    Bounds bounds_;
    double walk_speed_ = 1.4;

    std::unordered_map<std::string, std::size_t> location_index_;
    std::unordered_map<std::string, std::size_t> waypoint_index_;
    // adjacency[i] = (neighbor waypoint index, edge length); neighbor lists
    // sorted by waypoint id for deterministic iteration.
    std::vector<std::vector<std::pair<std::size_t, double>>> adjacency_;
};

} // namespace polsim
