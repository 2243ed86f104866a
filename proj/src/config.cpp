#include "a653/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "a653/errors.hpp"
#include "a653/services.hpp"

namespace a653 {

const Window* ScheduleTable::window_at(Tick t) const {
    if (mtf <= 0) return nullptr;
    const Tick off = ((t % mtf) + mtf) % mtf;
    for (const auto& w : windows) {
        if (w.start <= off && off < w.end) return &w;
    }
    return nullptr;
}

bool ScheduleTable::is_boundary(Tick t) const {
    if (mtf <= 0) return false;
    const Tick off = ((t % mtf) + mtf) % mtf;
    for (const auto& w : windows) {
        if (w.start == off || w.end % mtf == off) return true;
    }
    return false;
}

namespace {

template <class Vec, class IdT>
std::optional<IdT> find_by_name(const Vec& v, std::string_view name) {
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (v[i].name == name) return IdT{i};
    }
    return std::nullopt;
}

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(std::string_view s, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = s.find(sep, start);
        out.push_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

struct Line {
    std::string key;
    std::string value;
    std::string where;
};

class Parser {
public:
    Parser(std::string_view text, std::string_view origin) : origin_(origin) {
        std::istringstream in{std::string(text)};
        std::string raw;
        int lineno = 0;
        while (std::getline(in, raw)) {
            ++lineno;
            const auto hash = raw.find('#');
            if (hash != std::string::npos) raw.erase(hash);
            const std::string line = trim(raw);
            if (line.empty()) continue;
            const auto eq = line.find('=');
            const std::string where = origin_ + ":" + std::to_string(lineno);
            if (eq == std::string::npos) throw ConfigError(where, "expected `key = value`");
            Line l{trim(std::string_view(line).substr(0, eq)), trim(std::string_view(line).substr(eq + 1)), where};
            if (l.key.empty()) throw ConfigError(where, "empty key");
            for (const auto& prev : lines_) {
                if (prev.key == l.key) throw ConfigError(where, "duplicate key `" + l.key + "`");
            }
            lines_.push_back(std::move(l));
        }
    }

    ScenarioConfig run() {
        ScenarioConfig c;
        globals(c);
        partitions(c);
        schedule(c);
        processes(c);
        ports(c);
        channels(c);
        objects(c);
        health(c);
        variants(c);
        script(c);
        explore(c);
        for (const auto& l : lines_) {
            if (!consumed_.contains(l.key)) throw ConfigError(l.where, "unknown key `" + l.key + "`");
        }
        return c;
    }

private:
    std::string origin_;
    std::vector<Line> lines_;
    std::set<std::string> consumed_;

    std::vector<const Line*> with_prefix(std::string_view prefix) {
        std::vector<const Line*> out;
        for (const auto& l : lines_) {
            if (l.key.starts_with(prefix)) out.push_back(&l);
        }
        return out;
    }

    const Line* get(std::string_view key) {
        for (const auto& l : lines_) {
            if (l.key == key) {
                consumed_.insert(l.key);
                return &l;
            }
        }
        return nullptr;
    }

    void use(const Line* l) { consumed_.insert(l->key); }

    static Tick number(const Line& l, std::string_view s, std::string_view what) {
        Tick v = 0;
        const auto* first = s.data();
        const auto* last = s.data() + s.size();
        auto [p, ec] = std::from_chars(first, last, v);
        if (s.empty() || ec != std::errc{} || p != last || v < 0) {
            throw ConfigError(l.where, "bad " + std::string(what) + " `" + std::string(s) + "`");
        }
        return v;
    }

    static Discipline discipline(const Line& l, std::string_view s) {
        if (s.empty() || s == "fifo") return Discipline::Fifo;
        if (s == "priority") return Discipline::Priority;
        throw ConfigError(l.where, "bad queuing discipline `" + std::string(s) + "`");
    }

    static PartitionId partition_ref(const ScenarioConfig& c, const Line& l, std::string_view name) {
        auto p = c.find_partition(name);
        if (!p) throw ConfigError(l.where, "unknown partition `" + std::string(name) + "`");
        return *p;
    }

    /// `<kind>.<name>` keys; returns the name part.
    static std::string suffix(const Line& l, std::string_view prefix) { return l.key.substr(prefix.size()); }

    void globals(ScenarioConfig& c) {
        if (auto* l = get("tick_len")) c.tick_len = number(*l, l->value, "tick length");
        if (auto* l = get("priority.min")) c.min_priority = static_cast<int>(number(*l, l->value, "priority"));
        if (auto* l = get("priority.max")) c.max_priority = static_cast<int>(number(*l, l->value, "priority"));
        if (auto* l = get("lock.max")) c.max_lock_level = static_cast<int>(number(*l, l->value, "lock level"));
        if (auto* l = get("messages")) c.message_pool = static_cast<std::uint32_t>(number(*l, l->value, "pool size"));
    }

    void partitions(ScenarioConfig& c) {
        for (const auto* l : with_prefix("partition.")) {
            const auto rest = suffix(*l, "partition.");
            const auto dot = rest.find('.');
            if (dot == std::string::npos || rest.substr(dot + 1) != "period") {
                throw ConfigError(l->where, "unknown key `" + l->key + "`");
            }
            use(l);
            PartitionConfig p;
            p.name = rest.substr(0, dot);
            p.period = number(*l, l->value, "partition period");
            c.partitions.push_back(std::move(p));
        }
        // Partitions referenced only by windows are declared implicitly.
        for (const auto* l : with_prefix("schedule.window.")) {
            const auto parts = split(l->value, ':');
            if (!parts.empty() && !c.find_partition(parts[0])) {
                PartitionConfig p;
                p.name = parts[0];
                c.partitions.push_back(std::move(p));
            }
        }
    }

    void schedule(ScenarioConfig& c) {
        if (auto* l = get("schedule.mtf")) c.schedule.mtf = number(*l, l->value, "major time frame");
        for (const auto* l : with_prefix("schedule.window.")) {
            use(l);
            const auto parts = split(l->value, ':');
            if (parts.size() != 3) throw ConfigError(l->where, "window needs `<partition>:<start>:<end>`");
            Window w{partition_ref(c, *l, parts[0]), number(*l, parts[1], "window start"),
                     number(*l, parts[2], "window end")};
            c.schedule.windows.push_back(w);
        }
        std::stable_sort(c.schedule.windows.begin(), c.schedule.windows.end(),
                         [](const Window& a, const Window& b) { return a.start < b.start; });
        for (auto& p : c.partitions) {
            if (p.period == 0) p.period = c.schedule.mtf;
        }
    }

    void processes(ScenarioConfig& c) {
        for (const auto* l : with_prefix("process.")) {
            use(l);
            const auto parts = split(l->value, ':');
            if (parts.size() != 5) {
                throw ConfigError(l->where,
                                  "process needs `<partition>:<priority>:<periodic|aperiodic>:<period>:<capacity>`");
            }
            ProcessConfig p;
            p.name = suffix(*l, "process.");
            p.partition = partition_ref(c, *l, parts[0]);
            p.priority = static_cast<int>(number(*l, parts[1], "priority"));
            if (parts[2] == "periodic") {
                p.period = number(*l, parts[3], "period");
            } else if (parts[2] == "aperiodic") {
                if (!parts[3].empty() && parts[3] != "-" && parts[3] != "inf") {
                    throw ConfigError(l->where, "aperiodic process cannot have a period");
                }
            } else {
                throw ConfigError(l->where, "expected periodic or aperiodic, got `" + parts[2] + "`");
            }
            if (parts[4] != "inf") p.time_capacity = number(*l, parts[4], "time capacity");
            if (c.find_process(p.name)) throw ConfigError(l->where, "duplicate process `" + p.name + "`");
            c.processes.push_back(std::move(p));
        }
        for (std::size_t i = 0; i < c.partitions.size(); ++i) {
            ProcessConfig eh;
            eh.name = c.partitions[i].name + ".eh";
            eh.partition = PartitionId{i};
            eh.priority = c.max_priority;
            eh.is_error_handler = true;
            c.processes.push_back(std::move(eh));
        }
    }

    void ports(ScenarioConfig& c) {
        for (const auto* l : with_prefix("port.")) {
            const auto rest = suffix(*l, "port.");
            if (rest.find('.') != std::string::npos) continue;  // attribute lines
            use(l);
            const auto parts = split(l->value, ':');
            if (parts.size() < 2 || parts.size() > 4) {
                throw ConfigError(l->where, "port needs `<sampling|queuing>:<src|dst>[:<max>[:<discipline>]]`");
            }
            PortConfig p;
            p.name = rest;
            if (parts[0] == "sampling") {
                p.kind = PortKind::Sampling;
            } else if (parts[0] == "queuing") {
                p.kind = PortKind::Queuing;
            } else {
                throw ConfigError(l->where, "bad port kind `" + parts[0] + "`");
            }
            if (parts[1] == "src") {
                p.direction = Direction::Source;
            } else if (parts[1] == "dst") {
                p.direction = Direction::Destination;
            } else {
                throw ConfigError(l->where, "bad port direction `" + parts[1] + "`");
            }
            if (parts.size() >= 3 && !parts[2].empty()) p.max_msg_num = static_cast<int>(number(*l, parts[2], "size"));
            if (parts.size() == 4) p.discipline = discipline(*l, parts[3]);
            const auto* owner = get("port." + p.name + ".partition");
            if (owner == nullptr) throw ConfigError(l->where, "port `" + p.name + "` has no `.partition`");
            p.partition = partition_ref(c, *owner, owner->value);
            if (c.find_port(p.name)) throw ConfigError(l->where, "duplicate port `" + p.name + "`");
            c.ports.push_back(std::move(p));
        }
    }

    void channels(ScenarioConfig& c) {
        for (const auto* l : with_prefix("channel.")) {
            use(l);
            const auto arrow = l->value.find("->");
            if (arrow == std::string::npos) throw ConfigError(l->where, "channel needs `<src> -> <dst,...>`");
            ChannelConfig ch;
            ch.name = suffix(*l, "channel.");
            const auto port_ref = [&](const std::string& name) {
                auto p = c.find_port(name);
                if (!p) throw ConfigError(l->where, "unknown port `" + name + "`");
                return *p;
            };
            ch.source = port_ref(trim(std::string_view(l->value).substr(0, arrow)));
            for (const auto& d : split(std::string_view(l->value).substr(arrow + 2), ',')) {
                ch.destinations.push_back(port_ref(d));
            }
            const ChannelId id{c.channels.size()};
            for (PortId p : ch.destinations) {
                if (c.ports[p.index()].channel) throw ConfigError(l->where, "port `" + c.name(p) + "` is in two channels");
                c.ports[p.index()].channel = id;
            }
            if (c.ports[ch.source.index()].channel) {
                throw ConfigError(l->where, "port `" + c.name(ch.source) + "` is in two channels");
            }
            c.ports[ch.source.index()].channel = id;
            c.channels.push_back(std::move(ch));
        }
    }

    void objects(ScenarioConfig& c) {
        for (const auto* l : with_prefix("buffer.")) {
            use(l);
            const auto parts = split(l->value, ':');
            if (parts.size() < 2 || parts.size() > 3) {
                throw ConfigError(l->where, "buffer needs `<partition>:<max>[:<discipline>]`");
            }
            BufferConfig b{suffix(*l, "buffer."), partition_ref(c, *l, parts[0]),
                           static_cast<int>(number(*l, parts[1], "size")), Discipline::Fifo};
            if (parts.size() == 3) b.discipline = discipline(*l, parts[2]);
            c.buffers.push_back(std::move(b));
        }
        for (const auto* l : with_prefix("blackboard.")) {
            use(l);
            c.blackboards.push_back({suffix(*l, "blackboard."), partition_ref(c, *l, l->value)});
        }
        for (const auto* l : with_prefix("semaphore.")) {
            use(l);
            const auto parts = split(l->value, ':');
            if (parts.size() < 3 || parts.size() > 4) {
                throw ConfigError(l->where, "semaphore needs `<partition>:<initial>:<max>[:<discipline>]`");
            }
            SemaphoreConfig sc{suffix(*l, "semaphore."), partition_ref(c, *l, parts[0]),
                               static_cast<int>(number(*l, parts[1], "initial value")),
                               static_cast<int>(number(*l, parts[2], "maximum value")), Discipline::Fifo};
            if (parts.size() == 4) sc.discipline = discipline(*l, parts[3]);
            c.semaphores.push_back(std::move(sc));
        }
        for (const auto* l : with_prefix("event.")) {
            use(l);
            c.events.push_back({suffix(*l, "event."), partition_ref(c, *l, l->value)});
        }
    }

    static HmEntry hm_entry(const Line& l) {
        const auto parts = split(l.value, ':');
        if (parts.size() != 2) throw ConfigError(l.where, "HM entry needs `<level>:<action>`");
        auto level = parse_error_level(parts[0]);
        auto action = parse_recovery_action(parts[1]);
        if (!level) throw ConfigError(l.where, "bad error level `" + parts[0] + "`");
        if (!action) throw ConfigError(l.where, "bad recovery action `" + parts[1] + "`");
        return {*level, *action};
    }

    static ErrorCode error_code(const Line& l, std::string_view s) {
        auto code = parse_error_code(s);
        if (!code) throw ConfigError(l.where, "bad error code `" + std::string(s) + "`");
        return *code;
    }

    void health(ScenarioConfig& c) {
        for (const auto* l : with_prefix("hm.")) {
            use(l);
            const auto parts = split(l->key, '.');
            if (parts.size() == 3 && parts[1] == "module") {
                c.module_hm[error_code(*l, parts[2])] = hm_entry(*l);
            } else if (parts.size() == 4 && (parts[1] == "multipart" || parts[1] == "partition")) {
                auto& pc = c.partitions[partition_ref(c, *l, parts[2]).index()];
                auto& table = parts[1] == "multipart" ? pc.multi_part_hm : pc.partition_hm;
                table[error_code(*l, parts[3])] = hm_entry(*l);
            } else {
                throw ConfigError(l->where, "unknown HM key `" + l->key + "`");
            }
        }
    }

    void variants(ScenarioConfig& c) {
        for (const auto* l : with_prefix("variant.")) {
            use(l);
            auto v = parse_variant(l->value);
            if (!v) throw ConfigError(l->where, "variant must be as_written or corrected");
            const auto which = suffix(*l, "variant.");
            if (which == "resume") {
                c.variants.resume = *v;
            } else if (which == "send_queuing") {
                c.variants.send_queuing = *v;
            } else if (which == "receive_buffer") {
                c.variants.receive_buffer = *v;
            } else {
                throw ConfigError(l->where, "unknown variant `" + which + "`");
            }
        }
    }

    void script(ScenarioConfig& c) {
        std::vector<std::pair<Tick, ScriptEntry>> entries;
        for (const auto* l : with_prefix("script.")) {
            use(l);
            const auto key = number(*l, suffix(*l, "script."), "script index");
            const auto parts = split(l->value, ':');
            if (parts.size() < 3) throw ConfigError(l->where, "script needs `<tick>:<caller>:<service>[:<args>...]`");
            ScriptEntry e;
            e.tick = number(*l, parts[0], "tick");
            e.caller = parts[1];
            e.service = parts[2];
            e.args.assign(parts.begin() + 3, parts.end());
            if (e.caller != "main" && !c.find_process(e.caller)) {
                throw ConfigError(l->where, "unknown caller `" + e.caller + "`");
            }
            const auto* info = find_service(e.service);
            if (info == nullptr) throw ConfigError(l->where, "unknown service `" + e.service + "`");
            if (info->args.size() != e.args.size()) {
                throw ConfigError(l->where, e.service + " takes " + std::to_string(info->args.size()) + " argument(s)");
            }
            entries.emplace_back(key, std::move(e));
        }
        std::stable_sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) {
            return std::tie(a.second.tick, a.first) < std::tie(b.second.tick, b.first);
        });
        for (auto& [k, e] : entries) c.script.push_back(std::move(e));
    }

    void explore(ScenarioConfig& c) {
        auto& x = c.explore;
        if (auto* l = get("explore.calls_per_tick")) x.calls_per_tick = static_cast<int>(number(*l, l->value, "count"));
        if (auto* l = get("explore.max_calls")) x.max_calls = static_cast<int>(number(*l, l->value, "count"));
        if (auto* l = get("explore.max_states")) x.max_states = static_cast<std::size_t>(number(*l, l->value, "count"));
        if (auto* l = get("explore.max_seconds")) x.max_seconds = static_cast<double>(number(*l, l->value, "seconds"));
        if (auto* l = get("explore.services")) {
            x.services.clear();
            for (const auto& s : split(l->value, ',')) {
                if (find_service(s) == nullptr) throw ConfigError(l->where, "unknown service `" + s + "`");
                x.services.push_back(s);
            }
        }
        if (auto* l = get("explore.delays")) {
            x.delays.clear();
            for (const auto& s : split(l->value, ',')) x.delays.push_back(number(*l, s, "delay"));
        }
        if (auto* l = get("explore.priorities")) {
            x.priorities.clear();
            for (const auto& s : split(l->value, ',')) x.priorities.push_back(static_cast<int>(number(*l, s, "priority")));
        }
        if (auto* l = get("explore.timeouts")) {
            x.timeouts.clear();
            for (const auto& s : split(l->value, ',')) {
                auto t = parse_timeout(s);
                if (!t) throw ConfigError(l->where, "bad timeout `" + s + "`");
                x.timeouts.push_back(*t);
            }
        }
    }
};

}  // namespace

std::optional<PartitionId> ScenarioConfig::find_partition(std::string_view n) const {
    return find_by_name<decltype(partitions), PartitionId>(partitions, n);
}
std::optional<ProcessId> ScenarioConfig::find_process(std::string_view n) const {
    return find_by_name<decltype(processes), ProcessId>(processes, n);
}
std::optional<PortId> ScenarioConfig::find_port(std::string_view n) const {
    return find_by_name<decltype(ports), PortId>(ports, n);
}
std::optional<BufferId> ScenarioConfig::find_buffer(std::string_view n) const {
    return find_by_name<decltype(buffers), BufferId>(buffers, n);
}
std::optional<BlackboardId> ScenarioConfig::find_blackboard(std::string_view n) const {
    return find_by_name<decltype(blackboards), BlackboardId>(blackboards, n);
}
std::optional<SemaphoreId> ScenarioConfig::find_semaphore(std::string_view n) const {
    return find_by_name<decltype(semaphores), SemaphoreId>(semaphores, n);
}
std::optional<EventObjId> ScenarioConfig::find_event(std::string_view n) const {
    return find_by_name<decltype(events), EventObjId>(events, n);
}

ProcessId ScenarioConfig::error_handler_slot(PartitionId part) const {
    for (std::size_t i = 0; i < processes.size(); ++i) {
        if (processes[i].is_error_handler && processes[i].partition == part) return ProcessId{i};
    }
    throw ModelError("no error handler slot for partition " + name(part));
}

ScenarioConfig parse_config(std::string_view text, std::string_view origin) {
    ScenarioConfig c = Parser(text, origin).run();
    validate_config(c);
    return c;
}

ScenarioConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path.string(), "cannot open");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), path.string());
}

void validate_config(const ScenarioConfig& c) {
    const auto fail = [](const std::string& where, const std::string& what) { throw ConfigError(where, what); };
    if (c.tick_len <= 0) fail("tick_len", "must be positive");
    if (c.min_priority > c.max_priority) fail("priority.max", "below priority.min");
    if (c.max_lock_level < 1) fail("lock.max", "must be at least 1");
    if (c.message_pool < 1 || c.message_pool > kMaxMessagePool) fail("messages", "pool size must be 1..64");
    if (c.partitions.empty()) fail("partition", "no partitions configured");
    if (c.schedule.mtf <= 0) fail("schedule.mtf", "must be positive");
    if (c.schedule.windows.empty()) fail("schedule.window", "schedule has no windows");
    Tick last_end = 0;
    for (const auto& w : c.schedule.windows) {
        if (w.start >= w.end || w.end > c.schedule.mtf) fail("schedule.window", "window outside 0..mtf or empty");
        if (w.start < last_end) fail("schedule.window", "windows overlap");
        last_end = w.end;
    }
    for (std::size_t i = 0; i < c.partitions.size(); ++i) {
        const bool scheduled = std::any_of(c.schedule.windows.begin(), c.schedule.windows.end(),
                                           [&](const Window& w) { return w.partition.index() == i; });
        if (!scheduled) fail("partition." + c.partitions[i].name, "partition has no window");
    }
    for (const auto& p : c.processes) {
        const auto where = "process." + p.name;
        if (p.priority < c.min_priority || p.priority > c.max_priority) fail(where, "priority out of range");
        if (p.period && *p.period <= 0) fail(where, "period must be positive");
        if (p.time_capacity && *p.time_capacity <= 0) fail(where, "time capacity must be positive");
        if (p.period && p.time_capacity && *p.time_capacity > *p.period) fail(where, "time capacity exceeds period");
    }
    for (const auto& p : c.ports) {
        const auto where = "port." + p.name;
        if (p.kind == PortKind::Queuing && (p.max_msg_num < 1 || p.max_msg_num > kMaxQueueBound)) {
            fail(where, "queue size must be 1..64");
        }
    }
    for (const auto& ch : c.channels) {
        const auto where = "channel." + ch.name;
        const auto& src = c.ports[ch.source.index()];
        if (src.direction != Direction::Source) fail(where, "channel source must be a src port");
        if (ch.destinations.empty()) fail(where, "channel needs a destination");
        if (src.kind == PortKind::Queuing && ch.destinations.size() != 1) {
            fail(where, "a queuing channel has exactly one destination");
        }
        for (PortId d : ch.destinations) {
            const auto& dst = c.ports[d.index()];
            if (dst.direction != Direction::Destination) fail(where, "channel destination must be a dst port");
            if (dst.kind != src.kind) fail(where, "mixed port kinds");
        }
    }
    for (const auto& b : c.buffers) {
        if (b.max_msg_num < 1 || b.max_msg_num > kMaxQueueBound) fail("buffer." + b.name, "size must be 1..64");
    }
    for (const auto& s : c.semaphores) {
        if (s.max_value < 1 || s.initial > s.max_value) fail("semaphore." + s.name, "need 0 <= initial <= max, max >= 1");
    }
    if (c.explore.calls_per_tick < 0) fail("explore.calls_per_tick", "must be natural");
}

std::optional<std::optional<Tick>> parse_timeout(std::string_view s) {
    if (s == "inf" || s == "INFINITE") return std::optional<Tick>{};
    Tick v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc{} || p != s.data() + s.size() || v < 0) return std::nullopt;
    return std::optional<Tick>{v};
}

}  // namespace a653
