#include "polsim/abm.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "polsim/csv.hpp"

namespace polsim {

using nlohmann::json;

void TriangularSpec::validate() const {
    if (!(min_minutes > 0))
        throw ValidationError("triangular spec: min must be > 0");
    if (!(min_minutes <= mode_minutes && mode_minutes <= max_minutes))
        throw ValidationError("triangular spec: requires min <= mode <= max");
}

double sample_triangular(const TriangularSpec& spec, double u) {
    spec.validate();
    if (u < 0.0 || u > 1.0) throw ValidationError("triangular sample: u outside [0,1]");
    const double a = spec.min_minutes, m = spec.mode_minutes, b = spec.max_minutes;
    if (b == a) return a;
    const double c = (m - a) / (b - a); // CDF value at the mode
    if (u <= c) return a + std::sqrt(u * (b - a) * (m - a));
    return b - std::sqrt((1.0 - u) * (b - a) * (b - m));
}

ArrivalSchedule ArrivalSchedule::defaults() {
    ArrivalSchedule s;
    s.origin_minute_of_day = 480; // 08:00
    s.bins = {{0, 10, 0.30}, {10, 20, 0.30}, {20, 30, 0.20}, {30, 40, 0.10}, {40, 50, 0.10}};
    return s;
}

void ArrivalSchedule::validate() const {
    if (bins.empty()) throw ValidationError("arrival schedule: no bins");
    double sum = 0;
    double prev_end = -1e300;
    for (const ArrivalBin& b : bins) {
        if (!(b.start_minute < b.end_minute))
            throw ValidationError("arrival schedule: bin start must precede end");
        if (b.start_minute < prev_end)
            throw ValidationError("arrival schedule: bins must be ordered and non-overlapping");
        if (b.fraction < 0) throw ValidationError("arrival schedule: negative fraction");
        prev_end = b.end_minute;
        sum += b.fraction;
    }
    if (std::fabs(sum - 1.0) > 1e-9)
        throw ValidationError("arrival schedule: fractions must sum to 1");
}

double ArrivalSchedule::sample_entry_second(Rng& rng) const {
    const double u = rng.uniform01();
    double acc = 0;
    const ArrivalBin* chosen = &bins.back();
    for (const ArrivalBin& b : bins) {
        acc += b.fraction;
        if (u < acc) {
            chosen = &b;
            break;
        }
    }
    const double minute =
        origin_minute_of_day + rng.uniform(chosen->start_minute, chosen->end_minute);
    return std::floor(minute * 60.0);
}

int ArrivalSchedule::bin_of(double day_second) const {
    const double offset = day_second / 60.0 - origin_minute_of_day;
    for (std::size_t i = 0; i < bins.size(); ++i)
        if (offset >= bins[i].start_minute && offset < bins[i].end_minute)
            return static_cast<int>(i);
    return -1;
}

RosterConfig RosterConfig::defaults() {
    RosterConfig r;
    r.counts[static_cast<int>(UserClass::FacilityManager)] = 1;
    r.counts[static_cast<int>(UserClass::RadWorker)] = 9;
    r.counts[static_cast<int>(UserClass::Investigator)] = 1;
    r.counts[static_cast<int>(UserClass::FacilityUser)] = 5;
    return r;
}

int RosterConfig::total() const {
    int n = 0;
    for (int c : counts) n += c;
    return n;
}

void RosterConfig::validate() const {
    for (int c : counts)
        if (c < 0) throw ValidationError("roster: counts must be >= 0");
}

BehaviorSpec BehaviorSpec::defaults() {
    BehaviorSpec b;
    b.shift[static_cast<int>(UserClass::FacilityManager)] = {420, 480, 540};
    b.shift[static_cast<int>(UserClass::RadWorker)] = {420, 480, 540};
    b.shift[static_cast<int>(UserClass::Investigator)] = {120, 240, 540};
    b.shift[static_cast<int>(UserClass::FacilityUser)] = {120, 240, 540};
    b.work_session[static_cast<int>(SpaceCategory::Office)] = {10, 50, 120};
    b.work_session[static_cast<int>(SpaceCategory::Lab)] = {10, 50, 120};
    b.work_session[static_cast<int>(SpaceCategory::Storage)] = {5, 10, 30};
    b.work_session[static_cast<int>(SpaceCategory::Maintenance)] = {5, 30, 60};
    b.inter_break = {20, 50, 120};
    b.break_duration = {10, 20, 60};
    b.outside_break_prob = 0.25;
    using SC = SpaceCategory;
    b.eligible_work_categories[static_cast<int>(UserClass::FacilityManager)] = {
        SC::Office, SC::Lab, SC::Storage, SC::Maintenance};
    b.eligible_work_categories[static_cast<int>(UserClass::RadWorker)] = {
        SC::Office, SC::Lab, SC::Storage, SC::Maintenance};
    b.eligible_work_categories[static_cast<int>(UserClass::Investigator)] = {SC::Office, SC::Lab};
    b.eligible_work_categories[static_cast<int>(UserClass::FacilityUser)] = {SC::Lab, SC::Storage};
    return b;
}

void BehaviorSpec::validate() const {
    for (const TriangularSpec& t : shift) t.validate();
    for (const TriangularSpec& t : work_session) t.validate();
    inter_break.validate();
    break_duration.validate();
    if (outside_break_prob < 0 || outside_break_prob > 1)
        throw ValidationError("behavior: outside_break_prob outside [0,1]");
    for (const auto& cats : eligible_work_categories) {
        if (cats.empty())
            throw ValidationError("behavior: every class needs >=1 eligible work category");
        for (SpaceCategory c : cats)
            if (c == SpaceCategory::BreakRoom || c == SpaceCategory::Entrance)
                throw ValidationError("behavior: eligible work categories must be work spaces");
    }
}

const TriangularSpec& BehaviorSpec::work_session_for(SpaceCategory c) const {
    const int i = static_cast<int>(c);
    if (i < 0 || i >= 4)
        throw ValidationError("work session duration undefined for non-work category");
    return work_session[i];
}

std::string_view to_string(AgentState s) {
    switch (s) {
    case AgentState::Moving: return "MOVING";
    case AgentState::Working: return "WORKING";
    case AgentState::OnBreak: return "ON_BREAK";
    case AgentState::Exited: return "EXITED";
    }
    return "?";
}

void SimConfig::validate() const {
    roster.validate();
    schedule.validate();
    behavior.validate();
    // The layout is validated on construction; check roster demands against
    // available space categories here.
    for (int c = 0; c < kNumUserClasses; ++c) {
        if (roster.counts[c] == 0) continue;
        for (SpaceCategory cat : behavior.eligible_work_categories[c])
            if (layout.locations_of(cat).empty())
                throw ValidationError(std::string("roster demands category ") +
                                      std::string(to_string(cat)) + " absent from layout");
    }
}

namespace {

Tag tag_of_category(SpaceCategory c) {
    switch (c) {
    case SpaceCategory::Office: return Tag::Office;
    case SpaceCategory::Lab: return Tag::Lab;
    case SpaceCategory::Storage: return Tag::Storage;
    case SpaceCategory::Maintenance: return Tag::Maintenance;
    case SpaceCategory::Entrance: return Tag::Entry;
    case SpaceCategory::BreakRoom: break;
    }
    throw ValidationError("break rooms have no transition tag");
}

const Location& sample_work_location(const BehaviorSpec& behavior, const FacilityLayout& layout,
                                     UserClass cls, Rng& rng) {
    const auto& cats = behavior.eligible_work_categories[static_cast<int>(cls)];
    const SpaceCategory cat = cats[rng.uniform_index(cats.size())];
    const auto locs = layout.locations_of(cat);
    if (locs.empty())
        throw ValidationError(std::string("layout lacks work category ") +
                              std::string(to_string(cat)));
    return *locs[rng.uniform_index(locs.size())];
}

} // namespace

std::vector<Agent> assign_roster(const RosterConfig& roster, const ArrivalSchedule& schedule,
                                 const BehaviorSpec& behavior, const FacilityLayout& layout,
                                 Rng& rng) {
    roster.validate();
    schedule.validate();
    behavior.validate();
    const auto entrances = layout.locations_of(SpaceCategory::Entrance);
    if (entrances.size() < 2) throw ValidationError("layout requires >=2 entrances");

    std::vector<Agent> agents;
    int idx = 0;
    for (int c = 0; c < kNumUserClasses; ++c) {
        for (int k = 0; k < roster.counts[c]; ++k, ++idx) {
            Rng ar = rng.substream(static_cast<std::uint64_t>(idx));
            Agent a;
            a.id = idx;
            a.user_class = static_cast<UserClass>(c);
            a.entry_time = schedule.sample_entry_second(ar);
            a.shift_seconds = sample_triangular(behavior.shift[c], ar) * 60.0;
            a.entrance_id = entrances[ar.uniform_index(entrances.size())]->id;
            a.assigned_work_locations.push_back(
                sample_work_location(behavior, layout, a.user_class, ar).id);
            agents.push_back(std::move(a));
        }
    }
    return agents;
}

DepartureReason decide_working_departure(double now, double shift_end, double next_break_at,
                                         double work_deadline) {
    if (now >= shift_end) return DepartureReason::ShiftEnd;
    if (now >= next_break_at) return DepartureReason::Break;
    if (now >= work_deadline) return DepartureReason::WorkSessionOver;
    return DepartureReason::None;
}

namespace {

enum class MoveIntent { ToWork, ToBreakRoom, ToOutsideBreak, ToExit };

struct AgentRt {
    Agent base;
    Rng rng;
    AgentState state = AgentState::Moving;
    bool entered = false;
    bool outside = false; // ON_BREAK outside the facility
    std::string current_location;
    Walk walk;
    double walk_progress = 0;
    MoveIntent intent = MoveIntent::ToWork;
    std::string target_location;
    Tag last_tag = Tag::Entry;
    double arrival_time = 0;
    double shift_end = 0;
    double next_break_at = 0;
    double state_deadline = 0;
    long pending_record = -1;

    explicit AgentRt(Agent b, Rng r) : base(std::move(b)), rng(r) {}
};

class Simulation {
public:
    Simulation(const SimConfig& config, std::uint64_t seed, const RunOptions& options)
        : cfg_(config), opt_(options), master_(seed) {
        cfg_.validate();
        auto agents = assign_roster(cfg_.roster, cfg_.schedule, cfg_.behavior, cfg_.layout,
                                    master_);
        agents_.reserve(agents.size());
        for (std::size_t i = 0; i < agents.size(); ++i)
            agents_.emplace_back(std::move(agents[i]),
                                 master_.substream(1000000 + static_cast<std::uint64_t>(i)));
    }

    RunResult run() {
        long exited = 0;
        for (long t = kDayStartSecond; t < kDayEndSecond; ++t) {
            if (opt_.log_trajectories && t % 60 == 0) log_minute(t);
            for (AgentRt& a : agents_) {
                if (a.state == AgentState::Exited) continue;
                tick_agent(a, t);
            }
            exited = 0;
            for (const AgentRt& a : agents_)
                if (a.state == AgentState::Exited) ++exited;
            if (exited == static_cast<long>(agents_.size())) break;
        }
        if (exited != static_cast<long>(agents_.size()))
            throw Error("simulation ended with agents still inside the facility");
        return std::move(result_);
    }

private:
    Point position_of(const AgentRt& a) const {
        if (a.state == AgentState::Moving) return a.walk.position_at(a.walk_progress);
        if (!a.current_location.empty()) return cfg_.layout.location(a.current_location).position;
        return a.walk.points.empty() ? Point{} : a.walk.points.back();
    }

    void log_minute(long t) {
        for (const AgentRt& a : agents_) {
            if (!a.entered || a.state == AgentState::Exited || a.outside) continue;
            const Point p = position_of(a);
            TrajectoryPoint tp;
            tp.run_id = opt_.run_id;
            tp.agent_id = a.base.id;
            tp.user_class = a.base.user_class;
            tp.minute = static_cast<int>(t / 60);
            tp.x = p.x;
            tp.y = p.y;
            tp.x_norm = cfg_.layout.normalize_x(p.x);
            tp.y_norm = cfg_.layout.normalize_y(p.y);
            if (a.state != AgentState::Moving) tp.location_id = a.current_location;
            result_.trajectories.push_back(std::move(tp));
        }
    }

    void set_state(AgentRt& a, AgentState to, long t) {
        if (a.state == to) return;
        if (opt_.record_state_changes)
            result_.state_changes.push_back({a.base.id, a.state, to, t});
        a.state = to;
    }

    // Leaves the current spot for `target`. Finalizes the pending transition
    // record (the stay just completed at the current tagged location), opens
    // a new record when the destination carries a tag, builds the walk, and
    // switches to MOVING. A zero-length walk arrives within the same tick.
    void begin_move(AgentRt& a, long t, MoveIntent intent, const std::string& target,
                    std::optional<Tag> logged_dest) {
        if (a.pending_record >= 0) {
            result_.transitions[static_cast<std::size_t>(a.pending_record)].stay_seconds =
                static_cast<double>(t) - a.arrival_time;
            a.pending_record = -1;
        }
        if (logged_dest) {
            TransitionRecord rec;
            rec.run_id = opt_.run_id;
            rec.agent_id = a.base.id;
            rec.user_class = a.base.user_class;
            rec.source_tag = a.last_tag;
            rec.dest_tag = *logged_dest;
            rec.seconds_since_entry = static_cast<double>(t) - a.base.entry_time;
            rec.stay_seconds = 0;
            result_.transitions.push_back(rec);
            if (*logged_dest != Tag::End)
                a.pending_record = static_cast<long>(result_.transitions.size()) - 1;
        }
        a.intent = intent;
        a.target_location = target;
        a.outside = false;
        if (!a.current_location.empty() && a.current_location != target)
            a.walk = cfg_.layout.walk_between(a.current_location, target);
        else if (a.current_location == target)
            a.walk = Walk{{cfg_.layout.location(target).position}, {0.0}, 0.0};
        else
            a.walk = cfg_.layout.walk_from_point(position_of(a), target);
        a.walk_progress = 0;
        a.current_location.clear();
        set_state(a, AgentState::Moving, t);
        if (a.walk.total_length <= 0) arrive(a, t);
    }

    void arrive(AgentRt& a, long t) {
        a.current_location = a.target_location;
        a.arrival_time = static_cast<double>(t);
        switch (a.intent) {
        case MoveIntent::ToWork: {
            const Location& loc = cfg_.layout.location(a.current_location);
            a.last_tag = tag_of_category(loc.category);
            a.state_deadline =
                t + sample_triangular(cfg_.behavior.work_session_for(loc.category), a.rng) * 60.0;
            set_state(a, AgentState::Working, t);
            break;
        }
        case MoveIntent::ToBreakRoom:
            a.state_deadline = t + sample_triangular(cfg_.behavior.break_duration, a.rng) * 60.0;
            set_state(a, AgentState::OnBreak, t);
            break;
        case MoveIntent::ToOutsideBreak:
            a.last_tag = Tag::Entry;
            a.outside = true;
            a.state_deadline = t + sample_triangular(cfg_.behavior.break_duration, a.rng) * 60.0;
            set_state(a, AgentState::OnBreak, t);
            break;
        case MoveIntent::ToExit:
            set_state(a, AgentState::Exited, t);
            result_.stats.last_exit_second = std::max(result_.stats.last_exit_second, t);
            break;
        }
    }

    void start_break(AgentRt& a, long t) {
        result_.stats.breaks_total++;
        if (a.rng.bernoulli(cfg_.behavior.outside_break_prob)) {
            result_.stats.breaks_outside++;
            const Location& door = cfg_.layout.nearest(SpaceCategory::Entrance, position_of(a));
            begin_move(a, t, MoveIntent::ToOutsideBreak, door.id, Tag::Entry);
        } else {
            const Location& room = cfg_.layout.nearest(SpaceCategory::BreakRoom, position_of(a));
            begin_move(a, t, MoveIntent::ToBreakRoom, room.id, std::nullopt);
        }
    }

    void go_to_work(AgentRt& a, long t) {
        const Location& loc = sample_work_location(cfg_.behavior, cfg_.layout, a.base.user_class,
                                                   a.rng);
        a.base.assigned_work_locations.push_back(loc.id);
        begin_move(a, t, MoveIntent::ToWork, loc.id, tag_of_category(loc.category));
    }

    void go_exit(AgentRt& a, long t) {
        const Location& door = cfg_.layout.nearest(SpaceCategory::Entrance, position_of(a));
        begin_move(a, t, MoveIntent::ToExit, door.id, Tag::End);
    }

    void spawn(AgentRt& a, long t) {
        a.entered = true;
        a.current_location = a.base.entrance_id;
        a.last_tag = Tag::Entry;
        a.arrival_time = a.base.entry_time;
        a.shift_end = a.base.entry_time + a.base.shift_seconds;
        a.next_break_at =
            a.base.entry_time + sample_triangular(cfg_.behavior.inter_break, a.rng) * 60.0;
        // first designated work area was assigned with the roster
        begin_move(a, t, MoveIntent::ToWork, a.base.assigned_work_locations.front(),
                   tag_of_category(
                       cfg_.layout.location(a.base.assigned_work_locations.front()).category));
    }

    void tick_agent(AgentRt& a, long t) {
        if (!a.entered) {
            if (static_cast<double>(t) >= a.base.entry_time) spawn(a, t);
            return;
        }
        switch (a.state) {
        case AgentState::Moving:
            a.walk_progress += cfg_.layout.walk_speed();
            if (a.walk_progress >= a.walk.total_length) arrive(a, t);
            break;
        case AgentState::Working:
            switch (decide_working_departure(static_cast<double>(t), a.shift_end, a.next_break_at,
                                             a.state_deadline)) {
            case DepartureReason::None: break;
            case DepartureReason::ShiftEnd: go_exit(a, t); break;
            case DepartureReason::Break: start_break(a, t); break;
            case DepartureReason::WorkSessionOver: go_to_work(a, t); break;
            }
            break;
        case AgentState::OnBreak:
            if (static_cast<double>(t) >= a.shift_end) {
                go_exit(a, t);
            } else if (static_cast<double>(t) >= a.state_deadline) {
                a.next_break_at = t + sample_triangular(cfg_.behavior.inter_break, a.rng) * 60.0;
                go_to_work(a, t);
            }
            break;
        case AgentState::Exited: break;
        }
    }

    SimConfig cfg_;
    RunOptions opt_;
    Rng master_;
    std::vector<AgentRt> agents_;
    RunResult result_;
};

} // namespace

RunResult run_simulation(const SimConfig& config, std::uint64_t seed, const RunOptions& options) {
    Simulation sim(config, seed, options);
    return sim.run();
}

BatchResult run_batch(const SimConfig& config, int n_runs, int n_trajectory_runs,
                      std::uint64_t base_seed, int workers) {
    if (n_runs < 0 || n_trajectory_runs < 0 || n_trajectory_runs > n_runs)
        throw ValidationError("run_batch: requires 0 <= n_trajectory_runs <= n_runs");
    std::vector<RunResult> results(static_cast<std::size_t>(n_runs));
    std::atomic<int> next{0};
    auto work = [&] {
        for (;;) {
            const int i = next.fetch_add(1);
            if (i >= n_runs) return;
            RunOptions opt;
            opt.run_id = i;
            opt.log_trajectories = i < n_trajectory_runs;
            results[static_cast<std::size_t>(i)] =
                run_simulation(config, base_seed + static_cast<std::uint64_t>(i), opt);
        }
    };
    if (workers <= 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w) pool.emplace_back(work);
        for (std::thread& th : pool) th.join();
    }

    BatchResult batch;
    for (RunResult& r : results) {
        batch.transitions.insert(batch.transitions.end(), r.transitions.begin(),
                                 r.transitions.end());
        batch.trajectories.insert(batch.trajectories.end(), r.trajectories.begin(),
                                  r.trajectories.end());
        batch.stats.breaks_total += r.stats.breaks_total;
        batch.stats.breaks_outside += r.stats.breaks_outside;
        batch.stats.last_exit_second = std::max(batch.stats.last_exit_second,
                                                r.stats.last_exit_second);
    }
    return batch;
}

// --- CSV interchange ---

void write_transitions_csv(const std::string& path,
                           const std::vector<TransitionRecord>& records) {
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot write file: " + path);
    out << "run_id,agent_id,user_class,source_tag,dest_tag,seconds_since_entry,stay_duration_s\n";
    for (const TransitionRecord& r : records) {
        out << r.run_id << ',' << r.agent_id << ',' << to_string(r.user_class) << ','
            << to_string(r.source_tag) << ',' << to_string(r.dest_tag) << ','
            << format_double(r.seconds_since_entry) << ',' << format_double(r.stay_seconds)
            << '\n';
    }
}

std::vector<TransitionRecord> read_transitions_csv(const std::string& path) {
    std::vector<TransitionRecord> out;
    std::vector<std::string> header;
    bool checked = false;
    for_each_csv_row(
        path,
        [&](const std::vector<std::string>& row) {
            if (!checked) {
                if (header.size() < 7) throw ParseError("transitions csv: bad header");
                checked = true;
            }
            if (row.size() < 7) throw ParseError("transitions csv: short row");
            TransitionRecord r;
            r.run_id = static_cast<int>(parse_int_field(row[0]));
            r.agent_id = static_cast<int>(parse_int_field(row[1]));
            r.user_class = parse_user_class(row[2]);
            r.source_tag = parse_tag(row[3]);
            r.dest_tag = parse_tag(row[4]);
            r.seconds_since_entry = parse_double_field(row[5]);
            r.stay_seconds = parse_double_field(row[6]);
            out.push_back(std::move(r));
        },
        &header);
    return out;
}

void write_trajectories_csv(const std::string& path, const std::vector<TrajectoryPoint>& points) {
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot write file: " + path);
    out << "run_id,agent_id,user_class,minute,x,y,x_norm,y_norm,location_id\n";
    for (const TrajectoryPoint& p : points) {
        out << p.run_id << ',' << p.agent_id << ',' << to_string(p.user_class) << ',' << p.minute
            << ',' << format_double(p.x) << ',' << format_double(p.y) << ','
            << format_double(p.x_norm) << ',' << format_double(p.y_norm) << ','
            << csv_escape(p.location_id) << '\n';
    }
}

std::vector<TrajectoryPoint> read_trajectories_csv(const std::string& path) {
    std::vector<TrajectoryPoint> out;
    for_each_csv_row(path, [&](const std::vector<std::string>& row) {
        if (row.size() < 9) throw ParseError("trajectories csv: short row");
        TrajectoryPoint p;
        p.run_id = static_cast<int>(parse_int_field(row[0]));
        p.agent_id = static_cast<int>(parse_int_field(row[1]));
        p.user_class = parse_user_class(row[2]);
        p.minute = static_cast<int>(parse_int_field(row[3]));
        p.x = parse_double_field(row[4]);
        p.y = parse_double_field(row[5]);
        p.x_norm = parse_double_field(row[6]);
        p.y_norm = parse_double_field(row[7]);
        p.location_id = row[8];
        out.push_back(std::move(p));
    });
    return out;
}

// --- simulation config file ---

namespace {

TriangularSpec parse_triangular(const json& j, const std::string& where) {
    if (!j.is_object() || !j.contains("min") || !j.contains("mode") || !j.contains("max"))
        throw ParseError("sim config: " + where + " needs {min, mode, max}");
    return {j["min"].get<double>(), j["mode"].get<double>(), j["max"].get<double>()};
}

} // namespace

LoadedSimConfig load_sim_config_file(const std::string& path, const std::string& layout_override) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open sim config: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    json j;
    try {
        j = json::parse(ss.str());
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("sim config: ") + e.what());
    }
    if (!j.contains("schema_version") || j["schema_version"].get<int>() != 1)
        throw ValidationError("sim config: unsupported or missing schema_version");

    LoadedSimConfig loaded;
    std::string layout_path = layout_override;
    if (layout_path.empty()) {
        if (!j.contains("layout_path"))
            throw ParseError("sim config: missing 'layout_path' (or pass --layout)");
        layout_path = j["layout_path"].get<std::string>();
        const std::filesystem::path base = std::filesystem::path(path).parent_path();
        if (!layout_path.empty() && std::filesystem::path(layout_path).is_relative())
            layout_path = (base / layout_path).string();
    }
    loaded.config.layout = FacilityLayout::load_file(layout_path);

    if (j.contains("seed")) loaded.default_seed = j["seed"].get<std::uint64_t>();

    if (j.contains("roster")) {
        RosterConfig r;
        for (int c = 0; c < kNumUserClasses; ++c) {
            const std::string name(to_string(static_cast<UserClass>(c)));
            r.counts[c] = j["roster"].value(name, 0);
        }
        loaded.config.roster = r;
    }

    if (j.contains("arrival_schedule")) {
        const json& s = j["arrival_schedule"];
        ArrivalSchedule sched;
        sched.origin_minute_of_day = s.value("origin_minute_of_day", 480.0);
        sched.bins.clear();
        if (!s.contains("bins") || !s["bins"].is_array())
            throw ParseError("sim config: arrival_schedule needs 'bins'");
        for (const json& b : s["bins"])
            sched.bins.push_back({b.at("start").get<double>(), b.at("end").get<double>(),
                                  b.at("fraction").get<double>()});
        loaded.config.schedule = sched;
    }

    if (j.contains("behavior")) {
        const json& b = j["behavior"];
        BehaviorSpec spec = BehaviorSpec::defaults();
        if (b.contains("outside_break_prob"))
            spec.outside_break_prob = b["outside_break_prob"].get<double>();
        if (b.contains("inter_break")) spec.inter_break = parse_triangular(b["inter_break"], "inter_break");
        if (b.contains("break_duration"))
            spec.break_duration = parse_triangular(b["break_duration"], "break_duration");
        if (b.contains("work_session")) {
            for (int c = 0; c < 4; ++c) {
                const std::string name(to_string(static_cast<SpaceCategory>(c)));
                if (b["work_session"].contains(name))
                    spec.work_session[c] =
                        parse_triangular(b["work_session"][name], "work_session." + name);
            }
        }
        if (b.contains("shift")) {
            for (int c = 0; c < kNumUserClasses; ++c) {
                const std::string name(to_string(static_cast<UserClass>(c)));
                if (b["shift"].contains(name))
                    spec.shift[c] = parse_triangular(b["shift"][name], "shift." + name);
            }
        }
        if (b.contains("eligible_work_categories")) {
            for (int c = 0; c < kNumUserClasses; ++c) {
                const std::string name(to_string(static_cast<UserClass>(c)));
                if (b["eligible_work_categories"].contains(name)) {
                    std::vector<SpaceCategory> cats;
                    for (const json& cat : b["eligible_work_categories"][name])
                        cats.push_back(parse_space_category(cat.get<std::string>()));
                    spec.eligible_work_categories[c] = std::move(cats);
                }
            }
        }
        loaded.config.behavior = spec;
    }

    loaded.config.validate();
    return loaded;
}

} // namespace polsim
