#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "polsim/abm.hpp"
#include "polsim/surrogate.hpp"

namespace polsim {

/// Per-NPC resolution of generic destination tags to concrete locations,
/// plus the scalar gating emergency behavior.
struct BehaviorProfile {
    int npc_id = 0;
    UserClass user_class = UserClass::FacilityManager;
    std::map<Tag, std::vector<std::string>> tag_to_locations; // eligible work tags
    double rationality = 1.0; // in [0,1]
    double entry_time = 0;    // day seconds
    double shift_seconds = 0;
    std::string entrance_id;
};

/// Entry times come from the arrival schedule, shifts from the class
/// triangulars, tag maps from the class work-eligibility table, and
/// rationality from Uniform[rationality_min, rationality_max] (default
/// [0.5, 1.0]). NPC i consumes substream i of `rng`.
std::vector<BehaviorProfile> build_profiles(const RosterConfig& roster,
                                            const FacilityLayout& layout,
                                            const BehaviorSpec& behavior,
                                            const ArrivalSchedule& schedule, Rng& rng,
                                            double rationality_min = 0.5,
                                            double rationality_max = 1.0);

enum class ScenarioMode { Normal, Emergency };

struct ScenarioConfig {
    ScenarioMode mode = ScenarioMode::Normal;
    /// Minute of the simulated day (13:00 = 780); only meaningful in
    /// EMERGENCY mode.
    double trigger_minute = 780;
    bool break_overlay = true;
    // lowering the range raises the level of irrational behavior selection
    double rationality_min = 0.5;
    double rationality_max = 1.0;
};

enum class EmergencyBranch { None, Evacuate, MaintenanceDuty, SeekAssistance };

std::string_view to_string(EmergencyBranch b);
EmergencyBranch parse_emergency_branch(std::string_view s);

/// Rational emergency response by class: guests evacuate, staff switch to
/// maintenance duty. The irrational branch is SEEK_ASSISTANCE for all.
EmergencyBranch rational_response(UserClass c);

/// One decision record of the scenario event log.
struct ScenarioEvent {
    int npc_id = 0;
    int minute = 0; // minute of day
    std::string decision; // predict | duty | break | seek | exit | trigger
    std::optional<Tag> source_tag;
    std::optional<Tag> dest_tag;
    std::string location_id;
    double predicted_stay_s = -1; // < 0 means not applicable
    EmergencyBranch branch = EmergencyBranch::None;
};

/// Decision providers; production adapters wrap the trained models, tests
/// may inject scripted stubs.
using NextDestFn = std::function<Tag(Tag source, UserClass cls, double seconds_since_entry,
                                     Rng& rng)>;
using StayFn = std::function<double(Tag dest, UserClass cls, double seconds_since_entry,
                                    Rng& rng)>;

struct ScenarioModels {
    NextDestFn next_destination;
    StayFn stay_duration;
};

ScenarioModels make_surrogate_models(const NextDestinationModel& next,
                                     const StayDurationModel& stay);

struct ScenarioResult {
    std::vector<TrajectoryPoint> trajectories;
    std::vector<ScenarioEvent> events;
    std::vector<BehaviorProfile> profiles;
};

/// Full surrogate-driven day (07:55 -> 24:00, 1 s ticks) for the roster in
/// `base`. Deterministic given seed.
ScenarioResult run_scenario(const ScenarioConfig& config, const SimConfig& base,
                            const ScenarioModels& models, std::uint64_t seed);

void write_events_csv(const std::string& path, const std::vector<ScenarioEvent>& events);
std::vector<ScenarioEvent> read_events_csv(const std::string& path);

/// Surrogate-decided work-session durations by class: predicted stays of
/// move decisions whose destination is a work tag. The event log carries no
/// class column, so callers supply the npc_id -> class mapping (from the
/// scenario profiles, or recovered from the trajectory log).
std::array<std::vector<double>, kNumUserClasses> work_durations_from_events(
    const std::vector<ScenarioEvent>& events, const std::map<int, UserClass>& npc_classes);

std::map<int, UserClass> npc_classes_from_profiles(const std::vector<BehaviorProfile>& profiles);
std::map<int, UserClass> npc_classes_from_trajectories(const std::vector<TrajectoryPoint>& points);

} // namespace polsim
