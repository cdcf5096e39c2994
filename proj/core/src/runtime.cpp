#include "polsim/runtime.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include "polsim/csv.hpp"

namespace polsim {

std::vector<BehaviorProfile> build_profiles(const RosterConfig& roster,
                                            const FacilityLayout& layout,
                                            const BehaviorSpec& behavior,
                                            const ArrivalSchedule& schedule, Rng& rng,
                                            double rationality_min, double rationality_max) {
    roster.validate();
    behavior.validate();
    schedule.validate();
    if (rationality_min < 0 || rationality_max > 1 || rationality_min > rationality_max)
        throw ValidationError("rationality range must satisfy 0 <= min <= max <= 1");
    const auto entrances = layout.locations_of(SpaceCategory::Entrance);
    if (entrances.size() < 2) throw ValidationError("layout requires >=2 entrances");

    std::vector<BehaviorProfile> profiles;
    int idx = 0;
    for (int c = 0; c < kNumUserClasses; ++c) {
        for (int k = 0; k < roster.counts[c]; ++k, ++idx) {
            Rng pr = rng.substream(static_cast<std::uint64_t>(idx));
            BehaviorProfile p;
            p.npc_id = idx;
            p.user_class = static_cast<UserClass>(c);
            p.entry_time = schedule.sample_entry_second(pr);
            p.shift_seconds = sample_triangular(behavior.shift[c], pr) * 60.0;
            p.entrance_id = entrances[pr.uniform_index(entrances.size())]->id;
            p.rationality = rationality_min == rationality_max
                                ? rationality_min
                                : pr.uniform(rationality_min, rationality_max);
            for (SpaceCategory cat : behavior.eligible_work_categories[c]) {
                std::vector<std::string> ids;
                for (const Location* loc : layout.locations_of(cat)) ids.push_back(loc->id);
                if (ids.empty())
                    throw ValidationError(std::string("layout lacks work category ") +
                                          std::string(to_string(cat)));
                p.tag_to_locations[static_cast<Tag>(static_cast<int>(cat))] = std::move(ids);
            }
            profiles.push_back(std::move(p));
        }
    }
    return profiles;
}

std::string_view to_string(EmergencyBranch b) {
    switch (b) {
    case EmergencyBranch::None: return "";
    case EmergencyBranch::Evacuate: return "EVACUATE";
    case EmergencyBranch::MaintenanceDuty: return "MAINTENANCE_DUTY";
    case EmergencyBranch::SeekAssistance: return "SEEK_ASSISTANCE";
    }
    return "";
}

EmergencyBranch parse_emergency_branch(std::string_view s) {
    if (s.empty()) return EmergencyBranch::None;
    if (s == "EVACUATE") return EmergencyBranch::Evacuate;
    if (s == "MAINTENANCE_DUTY") return EmergencyBranch::MaintenanceDuty;
    if (s == "SEEK_ASSISTANCE") return EmergencyBranch::SeekAssistance;
    throw ParseError("unknown emergency branch: " + std::string(s));
}

EmergencyBranch rational_response(UserClass c) {
    switch (c) {
    case UserClass::FacilityManager:
    case UserClass::RadWorker: return EmergencyBranch::MaintenanceDuty;
    case UserClass::Investigator:
    case UserClass::FacilityUser: return EmergencyBranch::Evacuate;
    }
    return EmergencyBranch::Evacuate;
}

ScenarioModels make_surrogate_models(const NextDestinationModel& next,
                                     const StayDurationModel& stay) {
    ScenarioModels m;
    m.next_destination = [&next](Tag source, UserClass cls, double secs, Rng& rng) {
        return predict_next(next, source, cls, secs, rng);
    };
    m.stay_duration = [&stay](Tag dest, UserClass cls, double secs, Rng& rng) {
        return predict_stay(stay, dest, cls, secs, rng);
    };
    return m;
}

namespace {

enum class NpcState { Pending, Moving, Staying, BreakRoom, OutsideDwell, SeekDwell, Exited };
enum class NpcIntent { ToWork, ToBreakRoom, ToOutside, ToExit, ToSeek };

struct NpcRt {
    BehaviorProfile profile;
    Rng rng;
    NpcState state = NpcState::Pending;
    NpcIntent intent = NpcIntent::ToWork;
    Tag last_tag = Tag::Entry;
    Tag move_dest_tag = Tag::Entry;
    std::string current_location;
    std::string target_location;
    Walk walk;
    double walk_progress = 0;
    double stay_until = 0;
    double pending_stay = 0;
    double next_break_at = 0;
    double shift_end = 0;
    EmergencyBranch drawn_branch = EmergencyBranch::None;
    EmergencyBranch response = EmergencyBranch::None; // currently executing
    bool duty_mode = false;

    explicit NpcRt(BehaviorProfile p, Rng r) : profile(std::move(p)), rng(r) {}
};

class ScenarioEngine {
public:
    ScenarioEngine(const ScenarioConfig& config, const SimConfig& base,
                   const ScenarioModels& models, std::uint64_t seed)
        : cfg_(config), base_(base), models_(models), master_(seed) {
        base_.validate();
        if (!models_.next_destination || !models_.stay_duration)
            throw ValidationError("run_scenario: models not loaded");
        auto profiles = build_profiles(base_.roster, base_.layout, base_.behavior,
                                       base_.schedule, master_, cfg_.rationality_min,
                                       cfg_.rationality_max);
        for (std::size_t i = 0; i < profiles.size(); ++i)
            npcs_.emplace_back(std::move(profiles[i]),
                               master_.substream(1000000 + static_cast<std::uint64_t>(i)));
        trigger_second_ = cfg_.trigger_minute * 60.0;
    }

    ScenarioResult run() {
        long exited = 0;
        for (long t = kDayStartSecond; t < kDayEndSecond; ++t) {
            if (t % 60 == 0) log_minute(t);
            if (cfg_.mode == ScenarioMode::Emergency && !triggered_ &&
                static_cast<double>(t) >= trigger_second_) {
                triggered_ = true;
                apply_trigger(t);
            }
            for (NpcRt& n : npcs_) {
                if (n.state == NpcState::Exited) continue;
                tick(n, t);
            }
            exited = 0;
            for (const NpcRt& n : npcs_)
                if (n.state == NpcState::Exited) ++exited;
            if (exited == static_cast<long>(npcs_.size())) break;
        }
        if (exited != static_cast<long>(npcs_.size()))
            throw Error("scenario ended with NPCs still inside the facility");
        for (NpcRt& n : npcs_) result_.profiles.push_back(n.profile);
        return std::move(result_);
    }

private:
    bool entered(const NpcRt& n) const { return n.state != NpcState::Pending; }
    bool in_facility(const NpcRt& n) const {
        return entered(n) && n.state != NpcState::Exited && n.state != NpcState::OutsideDwell;
    }

    Point position_of(const NpcRt& n) const {
        if (n.state == NpcState::Moving) return n.walk.position_at(n.walk_progress);
        if (!n.current_location.empty())
            return base_.layout.location(n.current_location).position;
        return n.walk.points.empty() ? Point{} : n.walk.points.back();
    }

    void log_minute(long t) {
        for (const NpcRt& n : npcs_) {
            if (!in_facility(n)) continue;
            const Point p = position_of(n);
            TrajectoryPoint tp;
            tp.run_id = 0;
            tp.agent_id = n.profile.npc_id;
            tp.user_class = n.profile.user_class;
            tp.minute = static_cast<int>(t / 60);
            tp.x = p.x;
            tp.y = p.y;
            tp.x_norm = base_.layout.normalize_x(p.x);
            tp.y_norm = base_.layout.normalize_y(p.y);
            if (n.state == NpcState::Staying || n.state == NpcState::BreakRoom)
                tp.location_id = n.current_location;
            result_.trajectories.push_back(std::move(tp));
        }
    }

    void emit(const NpcRt& n, long t, std::string decision, std::optional<Tag> source,
              std::optional<Tag> dest, std::string location, double stay) {
        ScenarioEvent e;
        e.npc_id = n.profile.npc_id;
        e.minute = static_cast<int>(t / 60);
        e.decision = std::move(decision);
        e.source_tag = source;
        e.dest_tag = dest;
        e.location_id = std::move(location);
        e.predicted_stay_s = stay;
        e.branch = n.response;
        result_.events.push_back(std::move(e));
    }

    void begin_move_to_location(NpcRt& n, long t, NpcIntent intent, const std::string& target) {
        n.intent = intent;
        n.target_location = target;
        if (!n.current_location.empty() && n.current_location != target)
            n.walk = base_.layout.walk_between(n.current_location, target);
        else if (n.current_location == target && !target.empty())
            n.walk = Walk{{base_.layout.location(target).position}, {0.0}, 0.0};
        else
            n.walk = base_.layout.walk_from_point(position_of(n), target);
        n.walk_progress = 0;
        n.current_location.clear();
        n.state = NpcState::Moving;
        if (n.walk.total_length <= 0) arrive(n, t);
    }

    void begin_seek_walk(NpcRt& n, long t, const Point& target) {
        n.intent = NpcIntent::ToSeek;
        n.target_location.clear();
        n.walk = base_.layout.walk_point_to_point(position_of(n), target);
        n.walk_progress = 0;
        n.current_location.clear();
        n.state = NpcState::Moving;
        if (n.walk.total_length <= 0) arrive(n, t);
    }

    void arrive(NpcRt& n, long t) {
        switch (n.intent) {
        case NpcIntent::ToWork:
            n.current_location = n.target_location;
            n.last_tag = n.move_dest_tag;
            n.stay_until = t + n.pending_stay;
            n.state = NpcState::Staying;
            break;
        case NpcIntent::ToBreakRoom:
            n.current_location = n.target_location;
            n.stay_until = t + n.pending_stay;
            n.state = NpcState::BreakRoom;
            break;
        case NpcIntent::ToOutside:
            n.current_location = n.target_location;
            n.last_tag = Tag::Entry;
            n.stay_until = t + n.pending_stay;
            n.state = NpcState::OutsideDwell;
            break;
        case NpcIntent::ToExit:
            n.state = NpcState::Exited;
            break;
        case NpcIntent::ToSeek:
            n.stay_until = t + n.pending_stay;
            n.state = NpcState::SeekDwell;
            break;
        }
    }

    void exit_now(NpcRt& n, long t, const std::string& decision) {
        emit(n, t, decision, n.last_tag, Tag::End, "", -1);
        if (n.state == NpcState::OutsideDwell) {
            // already at an entrance, outside
            n.state = NpcState::Exited;
            return;
        }
        const Location& door = base_.layout.nearest(SpaceCategory::Entrance, position_of(n));
        begin_move_to_location(n, t, NpcIntent::ToExit, door.id);
    }

    double seconds_since_entry(const NpcRt& n, long t) const {
        return static_cast<double>(t) - n.profile.entry_time;
    }

    Tag query_next(NpcRt& n, long t) {
        // Rejection-resample predictions the profile cannot resolve: the tag
        // map only covers the class's eligible work tags.
        for (int tries = 0; tries < 50; ++tries) {
            const Tag tag = models_.next_destination(n.last_tag, n.profile.user_class,
                                                     seconds_since_entry(n, t), n.rng);
            if (tag == Tag::Entry || tag == Tag::End) return tag;
            auto it = n.profile.tag_to_locations.find(tag);
            if (it != n.profile.tag_to_locations.end() && !it->second.empty()) return tag;
        }
        auto it = n.profile.tag_to_locations.begin();
        const auto pick = n.rng.uniform_index(n.profile.tag_to_locations.size());
        std::advance(it, static_cast<long>(pick));
        return it->first;
    }

    void duty_step(NpcRt& n, long t) {
        if (static_cast<double>(t) >= n.shift_end) {
            exit_now(n, t, "exit");
            return;
        }
        auto it = n.profile.tag_to_locations.find(Tag::Maintenance);
        if (it == n.profile.tag_to_locations.end() || it->second.empty())
            throw ValidationError("maintenance duty requires MAINTENANCE in the tag map");
        const std::string& loc = it->second[n.rng.uniform_index(it->second.size())];
        const double stay = models_.stay_duration(Tag::Maintenance, n.profile.user_class,
                                                  seconds_since_entry(n, t), n.rng);
        emit(n, t, "duty", n.last_tag, Tag::Maintenance, loc, stay);
        n.move_dest_tag = Tag::Maintenance;
        n.pending_stay = stay;
        begin_move_to_location(n, t, NpcIntent::ToWork, loc);
    }

    void decide_next(NpcRt& n, long t) {
        if (static_cast<double>(t) >= n.shift_end) {
            exit_now(n, t, "exit");
            return;
        }
        if (n.duty_mode) {
            duty_step(n, t);
            return;
        }
        const Tag tag = query_next(n, t);
        if (tag == Tag::End) {
            emit(n, t, "predict", n.last_tag, Tag::End, "", -1);
            if (n.state == NpcState::OutsideDwell) {
                n.state = NpcState::Exited;
                return;
            }
            const Location& door = base_.layout.nearest(SpaceCategory::Entrance, position_of(n));
            begin_move_to_location(n, t, NpcIntent::ToExit, door.id);
            return;
        }
        if (tag == Tag::Entry) {
            const Location& door = base_.layout.nearest(SpaceCategory::Entrance, position_of(n));
            n.pending_stay = sample_triangular(base_.behavior.break_duration, n.rng) * 60.0;
            emit(n, t, "predict", n.last_tag, Tag::Entry, door.id, n.pending_stay);
            begin_move_to_location(n, t, NpcIntent::ToOutside, door.id);
            return;
        }
        const auto& locs = n.profile.tag_to_locations.at(tag);
        const std::string& loc = locs[n.rng.uniform_index(locs.size())];
        const double stay = models_.stay_duration(tag, n.profile.user_class,
                                                  seconds_since_entry(n, t), n.rng);
        emit(n, t, "predict", n.last_tag, tag, loc, stay);
        n.move_dest_tag = tag;
        n.pending_stay = stay;
        begin_move_to_location(n, t, NpcIntent::ToWork, loc);
    }

    void overlay_break(NpcRt& n, long t) {
        n.pending_stay = sample_triangular(base_.behavior.break_duration, n.rng) * 60.0;
        if (n.rng.bernoulli(base_.behavior.outside_break_prob)) {
            const Location& door = base_.layout.nearest(SpaceCategory::Entrance, position_of(n));
            emit(n, t, "break", n.last_tag, Tag::Entry, door.id, n.pending_stay);
            begin_move_to_location(n, t, NpcIntent::ToOutside, door.id);
        } else {
            const Location& room = base_.layout.nearest(SpaceCategory::BreakRoom, position_of(n));
            emit(n, t, "break", n.last_tag, std::nullopt, room.id, n.pending_stay);
            begin_move_to_location(n, t, NpcIntent::ToBreakRoom, room.id);
        }
    }

    const NpcRt* nearest_other_inside(const NpcRt& n) const {
        const Point p = position_of(n);
        const NpcRt* best = nullptr;
        double best_d = std::numeric_limits<double>::infinity();
        for (const NpcRt& other : npcs_) {
            if (other.profile.npc_id == n.profile.npc_id || !in_facility(other)) continue;
            const double d = distance(p, position_of(other));
            if (d < best_d) {
                best_d = d;
                best = &other;
            }
        }
        return best;
    }

    void adopt_rational(NpcRt& n, long t) {
        const EmergencyBranch r = rational_response(n.profile.user_class);
        n.response = r;
        if (r == EmergencyBranch::Evacuate) {
            exit_now(n, t, "exit");
        } else {
            n.duty_mode = true;
            duty_step(n, t);
        }
    }

    void enact_branch(NpcRt& n, long t) {
        switch (n.drawn_branch) {
        case EmergencyBranch::Evacuate:
            n.response = EmergencyBranch::Evacuate;
            exit_now(n, t, "exit");
            break;
        case EmergencyBranch::MaintenanceDuty:
            n.response = EmergencyBranch::MaintenanceDuty;
            n.duty_mode = true;
            duty_step(n, t);
            break;
        case EmergencyBranch::SeekAssistance: {
            n.response = EmergencyBranch::SeekAssistance;
            const NpcRt* target = nearest_other_inside(n);
            if (!target) {
                adopt_rational(n, t);
                return;
            }
            n.pending_stay = sample_triangular(base_.behavior.break_duration, n.rng) * 60.0;
            emit(n, t, "seek", n.last_tag, std::nullopt, "", n.pending_stay);
            begin_seek_walk(n, t, position_of(*target));
            break;
        }
        case EmergencyBranch::None: break;
        }
    }

    void draw_branch(NpcRt& n, long t) {
        const bool rational = n.rng.uniform01() < n.profile.rationality;
        n.drawn_branch =
            rational ? rational_response(n.profile.user_class) : EmergencyBranch::SeekAssistance;
        n.response = n.drawn_branch;
        emit(n, t, "trigger", std::nullopt, std::nullopt, "", -1);
        enact_branch(n, t);
    }

    void apply_trigger(long t) {
        for (NpcRt& n : npcs_) {
            if (!entered(n) || n.state == NpcState::Exited) continue;
            draw_branch(n, t);
        }
    }

    void spawn(NpcRt& n, long t) {
        n.current_location = n.profile.entrance_id;
        n.last_tag = Tag::Entry;
        n.shift_end = n.profile.entry_time + n.profile.shift_seconds;
        n.next_break_at =
            n.profile.entry_time + sample_triangular(base_.behavior.inter_break, n.rng) * 60.0;
        n.state = NpcState::Staying; // placeholder until the first decision below
        if (triggered_) {
            draw_branch(n, t);
        } else {
            decide_next(n, t);
        }
    }

    void tick(NpcRt& n, long t) {
        switch (n.state) {
        case NpcState::Pending:
            if (static_cast<double>(t) >= n.profile.entry_time) spawn(n, t);
            break;
        case NpcState::Moving:
            n.walk_progress += base_.layout.walk_speed();
            if (n.walk_progress >= n.walk.total_length) arrive(n, t);
            break;
        case NpcState::Staying:
            if (static_cast<double>(t) >= n.shift_end) {
                exit_now(n, t, "exit");
            } else if (cfg_.break_overlay && n.response == EmergencyBranch::None &&
                       static_cast<double>(t) >= n.next_break_at) {
                overlay_break(n, t);
            } else if (static_cast<double>(t) >= n.stay_until) {
                decide_next(n, t);
            }
            break;
        case NpcState::BreakRoom:
        case NpcState::OutsideDwell:
            if (static_cast<double>(t) >= n.shift_end) {
                exit_now(n, t, "exit");
            } else if (static_cast<double>(t) >= n.stay_until) {
                n.next_break_at = t + sample_triangular(base_.behavior.inter_break, n.rng) * 60.0;
                decide_next(n, t);
            }
            break;
        case NpcState::SeekDwell:
            if (static_cast<double>(t) >= n.shift_end) {
                exit_now(n, t, "exit");
            } else if (static_cast<double>(t) >= n.stay_until) {
                adopt_rational(n, t);
            }
            break;
        case NpcState::Exited: break;
        }
    }

    ScenarioConfig cfg_;
    SimConfig base_;
    ScenarioModels models_;
    Rng master_;
    std::vector<NpcRt> npcs_;
    ScenarioResult result_;
    double trigger_second_ = 0;
    bool triggered_ = false;
};

} // namespace

ScenarioResult run_scenario(const ScenarioConfig& config, const SimConfig& base,
                            const ScenarioModels& models, std::uint64_t seed) {
    ScenarioEngine engine(config, base, models, seed);
    return engine.run();
}

void write_events_csv(const std::string& path, const std::vector<ScenarioEvent>& events) {
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot write file: " + path);
    out << "npc_id,minute,decision,source_tag,dest_tag,location_id,predicted_stay_s,"
           "emergency_branch\n";
    for (const ScenarioEvent& e : events) {
        out << e.npc_id << ',' << e.minute << ',' << e.decision << ','
            << (e.source_tag ? to_string(*e.source_tag) : std::string_view{}) << ','
            << (e.dest_tag ? to_string(*e.dest_tag) : std::string_view{}) << ','
            << csv_escape(e.location_id) << ',';
        if (e.predicted_stay_s >= 0) out << format_double(e.predicted_stay_s);
        out << ',' << to_string(e.branch) << '\n';
    }
}

std::vector<ScenarioEvent> read_events_csv(const std::string& path) {
    std::vector<ScenarioEvent> out;
    for_each_csv_row(path, [&](const std::vector<std::string>& row) {
        if (row.size() < 8) throw ParseError("events csv: short row");
        ScenarioEvent e;
        e.npc_id = static_cast<int>(parse_int_field(row[0]));
        e.minute = static_cast<int>(parse_int_field(row[1]));
        e.decision = row[2];
        if (!row[3].empty()) e.source_tag = parse_tag(row[3]);
        if (!row[4].empty()) e.dest_tag = parse_tag(row[4]);
        e.location_id = row[5];
        e.predicted_stay_s = row[6].empty() ? -1 : parse_double_field(row[6]);
        e.branch = parse_emergency_branch(row[7]);
        out.push_back(std::move(e));
    });
    return out;
}

std::array<std::vector<double>, kNumUserClasses> work_durations_from_events(
    const std::vector<ScenarioEvent>& events, const std::map<int, UserClass>& npc_classes) {
    std::array<std::vector<double>, kNumUserClasses> out;
    for (const ScenarioEvent& e : events) {
        if (!e.dest_tag || !is_work_tag(*e.dest_tag) || e.predicted_stay_s < 0) continue;
        auto it = npc_classes.find(e.npc_id);
        if (it == npc_classes.end())
            throw ValidationError("event log references npc " + std::to_string(e.npc_id) +
                                  " absent from the class map");
        out[static_cast<std::size_t>(it->second)].push_back(e.predicted_stay_s);
    }
    return out;
}

std::map<int, UserClass> npc_classes_from_profiles(const std::vector<BehaviorProfile>& profiles) {
    std::map<int, UserClass> out;
    for (const BehaviorProfile& p : profiles) out[p.npc_id] = p.user_class;
    return out;
}

std::map<int, UserClass> npc_classes_from_trajectories(
    const std::vector<TrajectoryPoint>& points) {
    std::map<int, UserClass> out;
    for (const TrajectoryPoint& p : points) out[p.agent_id] = p.user_class;
    return out;
}

} // namespace polsim
