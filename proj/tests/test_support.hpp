#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "polsim/facility.hpp"

namespace polsim::test {

inline std::string data_dir() { return POLSIM_DATA_DIR; }

inline FacilityLayout default_layout() {
    return FacilityLayout::load_file(data_dir() + "/default_facility.json");
}

/// Smallest legal layout: 2 entrances, 1 of each space, connected 7-node
/// graph (one waypoint per location, chained along a corridor).
inline std::string minimal_layout_json(int n_entrances = 2) {
    std::ostringstream out;
    out << R"({"schema_version": 1, "walk_speed": 1.4,
      "bounds": {"x_min": 0, "x_max": 70, "y_min": 0, "y_max": 10},
      "waypoints": [)";
    const int n = 5 + n_entrances;
    for (int i = 0; i < n; ++i) {
        if (i) out << ',';
        out << R"({"id": "w)" << i << R"(", "x": )" << (10 * i) << R"(, "y": 5})";
    }
    out << R"(], "edges": [)";
    for (int i = 0; i + 1 < n; ++i) {
        if (i) out << ',';
        out << R"({"a": "w)" << i << R"(", "b": "w)" << (i + 1) << R"("})";
    }
    out << R"(], "locations": [)";
    const char* cats[5] = {"OFFICE", "LAB", "STORAGE", "MAINTENANCE", "BREAK_ROOM"};
    for (int i = 0; i < 5; ++i) {
        if (i) out << ',';
        out << R"({"id": "loc)" << i << R"(", "category": ")" << cats[i] << R"(", "x": )"
            << (10 * i) << R"(, "y": 2, "waypoint": "w)" << i << R"("})";
    }
    for (int e = 0; e < n_entrances; ++e) {
        out << R"(,{"id": "door)" << e << R"(", "category": "ENTRANCE", "x": )" << (10 * (5 + e))
            << R"(, "y": 2, "waypoint": "w)" << (5 + e) << R"("})";
    }
    out << "]}";
    return out.str();
}

class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        path_ = std::filesystem::temp_directory_path() /
                ("polsim_test_" + tag + "_" + std::to_string(::getpid()));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() { std::filesystem::remove_all(path_); }
    std::string str() const { return path_.string(); }
    std::string file(const std::string& name) const { return (path_ / name).string(); }

private:
    std::filesystem::path path_;
};

inline std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace polsim::test
