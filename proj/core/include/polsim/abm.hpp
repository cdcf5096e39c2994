#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "polsim/facility.hpp"
#include "polsim/rng.hpp"
#include "polsim/tags.hpp"

namespace polsim {

// Simulation time is measured in seconds of the simulated day (00:00 = 0).
// A workday run covers 07:55:00 .. 24:00:00 at 1-second ticks; trajectory
// minutes are therefore minutes-of-day (07:55 = minute 475).
inline constexpr long kDayStartSecond = 475 * 60;  // 07:55
inline constexpr long kDayEndSecond = 1440 * 60;   // 24:00

/// Bounded distribution given as (min, mode, max) in minutes.
struct TriangularSpec {
    double min_minutes = 0;
    double mode_minutes = 0;
    double max_minutes = 0;

    void validate() const;
};

/// Inverse-CDF transform of `u` in [0,1]; returns minutes in [min, max],
/// monotone nondecreasing in u.
double sample_triangular(const TriangularSpec& spec, double u);

inline double sample_triangular(const TriangularSpec& spec, Rng& rng) {
    return sample_triangular(spec, rng.uniform01());
}

struct ArrivalBin {
    double start_minute = 0; // offset from schedule origin
    double end_minute = 0;
    double fraction = 0;
};

struct ArrivalSchedule {
    double origin_minute_of_day = 480; // 08:00
    std::vector<ArrivalBin> bins;

    static ArrivalSchedule defaults();
    void validate() const;

    /// Picks a bin with its fraction as probability, then a uniform offset
    /// within it; result is whole seconds of the simulated day.
    double sample_entry_second(Rng& rng) const;

    /// Index of the bin containing a day-second, or -1.
    int bin_of(double day_second) const;
};

struct RosterConfig {
    // counts indexed by UserClass
    std::array<int, kNumUserClasses> counts{};

    static RosterConfig defaults(); // 1 FM + 9 RW + 1 INV + 5 FU = 16
    int total() const;
    void validate() const;
};

struct BehaviorSpec {
    std::array<TriangularSpec, kNumUserClasses> shift;
    // work-session duration by work category (Office..Maintenance)
    std::array<TriangularSpec, 4> work_session;
    TriangularSpec inter_break{20, 50, 120};
    TriangularSpec break_duration{10, 20, 60};
    double outside_break_prob = 0.25;
    std::array<std::vector<SpaceCategory>, kNumUserClasses> eligible_work_categories;

    static BehaviorSpec defaults();
    void validate() const;
    const TriangularSpec& work_session_for(SpaceCategory c) const;
};

enum class AgentState { Moving, Working, OnBreak, Exited };

std::string_view to_string(AgentState s);

/// One logged movement decision of the transition dataset.
struct TransitionRecord {
    int run_id = 0;
    int agent_id = 0;
    UserClass user_class = UserClass::FacilityManager;
    Tag source_tag = Tag::Entry;
    Tag dest_tag = Tag::Entry;
    double seconds_since_entry = 0;
    double stay_seconds = 0; // stay at the destination; 0 for END rows
};

/// 1-minute position sample of an in-facility agent.
struct TrajectoryPoint {
    int run_id = 0;
    int agent_id = 0;
    UserClass user_class = UserClass::FacilityManager;
    int minute = 0; // minute of day
    double x = 0, y = 0;
    double x_norm = 0, y_norm = 0;
    std::string location_id; // empty while moving
};

struct Agent {
    int id = 0;
    UserClass user_class = UserClass::FacilityManager;
    double entry_time = 0;     // day seconds, whole
    double shift_seconds = 0;
    std::string entrance_id;
    std::vector<std::string> assigned_work_locations;
};

/// Entry times, shift durations, entrances, and the first work assignment
/// for a roster. Agent i consumes only substream i of `rng`.
std::vector<Agent> assign_roster(const RosterConfig& roster, const ArrivalSchedule& schedule,
                                 const BehaviorSpec& behavior, const FacilityLayout& layout,
                                 Rng& rng);

/// Why a WORKING agent leaves; precedence shift end > break > session expiry
/// when deadlines coincide.
enum class DepartureReason { None, ShiftEnd, Break, WorkSessionOver };

DepartureReason decide_working_departure(double now, double shift_end, double next_break_at,
                                         double work_deadline);

struct SimConfig {
    FacilityLayout layout;
    RosterConfig roster = RosterConfig::defaults();
    ArrivalSchedule schedule = ArrivalSchedule::defaults();
    BehaviorSpec behavior = BehaviorSpec::defaults();

    void validate() const;
};

struct RunStats {
    long breaks_total = 0;
    long breaks_outside = 0;
    long last_exit_second = 0;
};

struct StateChange {
    int agent_id;
    AgentState from;
    AgentState to;
    long t;
};

struct RunOptions {
    int run_id = 0;
    bool log_trajectories = false;
    bool record_state_changes = false;
};

struct RunResult {
    std::vector<TransitionRecord> transitions;
    std::vector<TrajectoryPoint> trajectories;
    std::vector<StateChange> state_changes;
    RunStats stats;
};

/// One full workday (07:55 -> 24:00, 1 s ticks). Deterministic given seed.
RunResult run_simulation(const SimConfig& config, std::uint64_t seed,
                         const RunOptions& options = {});

struct BatchResult {
    std::vector<TransitionRecord> transitions;
    std::vector<TrajectoryPoint> trajectories;
    RunStats stats; // aggregated
};

/// Runs n_runs independent workdays; run i is seeded with substream i of
/// base_seed, so output is identical for any worker count. Trajectories are
/// logged for the first n_trajectory_runs runs only.
BatchResult run_batch(const SimConfig& config, int n_runs, int n_trajectory_runs,
                      std::uint64_t base_seed, int workers = 1);

// --- CSV interchange (exact column layouts documented in the README) ---

void write_transitions_csv(const std::string& path, const std::vector<TransitionRecord>& records);
std::vector<TransitionRecord> read_transitions_csv(const std::string& path);

void write_trajectories_csv(const std::string& path, const std::vector<TrajectoryPoint>& points);
std::vector<TrajectoryPoint> read_trajectories_csv(const std::string& path);

/// Simulation config JSON: references a layout file and overrides roster /
/// schedule / behavior defaults. `layout_override` replaces the layout_path
/// lookup when non-empty.
struct LoadedSimConfig {
    SimConfig config;
    std::uint64_t default_seed = 0;
};
LoadedSimConfig load_sim_config_file(const std::string& path,
                                     const std::string& layout_override = "");

} // namespace polsim
