#include "relaybound/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace relaybound {

namespace {

std::string trim(std::string_view s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) {
        return {};
    }
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

std::string lower(std::string s)
{
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return char(std::tolower(c)); });
    return s;
}

std::vector<std::string> split_list(const std::string& s)
{
    std::vector<std::string> out;
    std::string item;
    std::istringstream in(s);
    while (std::getline(in, item, ',')) {
        if (auto t = trim(item); !t.empty()) {
            out.push_back(t);
        }
    }
    return out;
}

template <class T>
T parse_number(const std::string& v)
{
    T out{};
    const char* first = v.data();
    const char* last = v.data() + v.size();
    if (!v.empty() && v.front() == '+') {
        ++first;
    }
    auto [ptr, ec] = std::from_chars(first, last, out);
    if (ec != std::errc{} || ptr != last) {
        throw ConfigError("expected a number, got '" + v + "'");
    }
    return out;
}

bool parse_bool(const std::string& v)
{
    const auto s = lower(v);
    if (s == "true" || s == "yes" || s == "on" || s == "1") {
        return true;
    }
    if (s == "false" || s == "no" || s == "off" || s == "0") {
        return false;
    }
    throw ConfigError("expected a boolean, got '" + v + "'");
}

std::string fmt(double v)
{
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

std::string fmt(bool v) { return v ? "true" : "false"; }

InterferenceMode parse_interference(const std::string& v)
{
    const auto s = lower(v);
    if (s == "realized") {
        return InterferenceMode::Realized;
    }
    if (s == "averaged") {
        return InterferenceMode::Averaged;
    }
    throw ConfigError("interference must be 'realized' or 'averaged', got '" + v + "'");
}

std::string to_text(InterferenceMode m) { return m == InterferenceMode::Realized ? "realized" : "averaged"; }

Topology parse_topology(const std::string& v)
{
    const auto s = lower(v);
    if (s == "one_relay" || s == "one-relay" || s == "1") {
        return Topology::OneRelay;
    }
    if (s == "two_relay" || s == "two-relay" || s == "2") {
        return Topology::TwoRelay;
    }
    throw ConfigError("topology must be 'one_relay' or 'two_relay', got '" + v + "'");
}

struct Key {
    std::string section;
    std::string name;
    std::function<std::string(const RunConfig&)> get;
    std::function<void(RunConfig&, const std::string&)> set;
};

#define RB_NUM(SEC, NAME, FIELD, T)                                                                                   \
    Key                                                                                                               \
    {                                                                                                                 \
        SEC, NAME, [](const RunConfig& c) { return fmt_value(c.FIELD); },                                             \
            [](RunConfig& c, const std::string& v) { c.FIELD = parse_number<T>(v); }                                  \
    }

std::string fmt_value(double v) { return fmt(v); }
std::string fmt_value(long v) { return std::to_string(v); }
std::string fmt_value(int v) { return std::to_string(v); }
std::string fmt_value(std::uint64_t v) { return std::to_string(v); }

const std::vector<Key>& keys()
{
    static const std::vector<Key> table = {
        RB_NUM("case", "id", study.id, int),
        RB_NUM("case", "d_sd", study.d_sd, double),

        RB_NUM("channel", "tx_power_mw", channel.params.tx_power_mw, double),
        RB_NUM("channel", "pathloss_exponent", channel.params.pathloss_exponent, double),
        RB_NUM("channel", "noise_floor_mw", channel.params.noise_floor_mw, double),
        RB_NUM("channel", "packet_bits", channel.params.packet_bits, int),
        RB_NUM("channel", "anchor_distance", channel.targets.anchor_distance, double),
        RB_NUM("channel", "anchor_probability", channel.targets.anchor_probability, double),
        RB_NUM("channel", "anchor_tolerance", channel.targets.anchor_tolerance, double),
        RB_NUM("channel", "far_distance", channel.targets.far_distance, double),
        RB_NUM("channel", "far_max", channel.targets.far_max, double),
        RB_NUM("channel", "near_distance", channel.targets.near_distance, double),
        RB_NUM("channel", "near_min", channel.targets.near_min, double),

        RB_NUM("nsga2", "population", nsga2.population, int),
        RB_NUM("nsga2", "generations", nsga2.generations, int),
        RB_NUM("nsga2", "crossover_prob", nsga2.crossover_prob, double),
        RB_NUM("nsga2", "mutation_prob", nsga2.mutation_prob, double),
        RB_NUM("nsga2", "crossover_eta", nsga2.crossover_eta, double),
        RB_NUM("nsga2", "mutation_eta", nsga2.mutation_eta, double),
        RB_NUM("nsga2", "seed", nsga2.seed, std::uint64_t),
        RB_NUM("nsga2", "dedupe_resolution", nsga2.dedupe_resolution, double),

        RB_NUM("simulator", "frames", sim.frames, long),
        RB_NUM("simulator", "seeds", sim.seeds, int),
        RB_NUM("simulator", "seed", sim.seed, std::uint64_t),
        Key{"simulator", "interference", [](const RunConfig& c) { return to_text(c.sim.interference); },
            [](RunConfig& c, const std::string& v) { c.sim.interference = parse_interference(v); }},
        RB_NUM("simulator", "buffer_capacity", sim.buffer_capacity, int),
        RB_NUM("simulator", "drain_limit", sim.drain_limit, long),
        RB_NUM("simulator", "min_expected_arrivals", sim.min_expected_arrivals, double),

        Key{"coding", "strategies",
            [](const RunConfig& c) {
                std::string s;
                for (auto st : c.coding.strategies) {
                    s += (s.empty() ? "" : ",") + to_string(st);
                }
                return s;
            },
            [](RunConfig& c, const std::string& v) {
                c.coding.strategies.clear();
                for (const auto& item : split_list(v)) {
                    try {
                        c.coding.strategies.push_back(parse_strategy(lower(item)));
                    } catch (const std::invalid_argument& e) {
                        throw ConfigError(e.what());
                    }
                }
            }},
        Key{"coding", "k",
            [](const RunConfig& c) {
                std::string s;
                for (int k : c.coding.ks) {
                    s += (s.empty() ? "" : ",") + std::to_string(k);
                }
                return s;
            },
            [](RunConfig& c, const std::string& v) {
                c.coding.ks.clear();
                for (const auto& item : split_list(v)) {
                    c.coding.ks.push_back(parse_number<int>(item));
                }
            }},
        RB_NUM("coding", "seeds", coding.seeds, int),
        RB_NUM("coding", "seed", coding.seed, std::uint64_t),
        Key{"coding", "bound", [](const RunConfig& c) { return to_string(c.coding.bound); },
            [](RunConfig& c, const std::string& v) {
                try {
                    c.coding.bound = parse_bound_kind(v);
                } catch (const std::invalid_argument& e) {
                    throw ConfigError(e.what());
                }
            }},
        RB_NUM("coding", "xor_depth", coding.xor_depth, int),
        Key{"coding", "literal_threshold", [](const RunConfig& c) { return fmt(c.coding.literal_threshold); },
            [](RunConfig& c, const std::string& v) { c.coding.literal_threshold = parse_bool(v); }},
        RB_NUM("coding", "payload_bits", coding.payload_bits, int),
        Key{"coding", "coefficient_overhead", [](const RunConfig& c) { return fmt(c.coding.coefficient_overhead); },
            [](RunConfig& c, const std::string& v) { c.coding.coefficient_overhead = parse_bool(v); }},
        RB_NUM("coding", "frame_limit", coding.frame_limit, long),

        RB_NUM("report", "rmse_max", report.rmse_max, double),
        RB_NUM("report", "tolerance_scale", report.tolerance_scale, double),
        RB_NUM("report", "compare_tolerance", report.compare_tolerance, double),

        Key{"run", "output_dir", [](const RunConfig& c) { return c.output_dir; },
            [](RunConfig& c, const std::string& v) { c.output_dir = v; }},
        RB_NUM("run", "jobs", jobs, int),
    };
    return table;
}

#undef RB_NUM

const Key* find_key(const std::string& section, const std::string& name)
{
    for (const auto& k : keys()) {
        if (k.section == section && k.name == name) {
            return &k;
        }
    }
    return nullptr;
}

// Declarative study-case keys, matched against the table after parsing.
bool set_case_description(CaseDescription& d, const std::string& name, const std::string& value)
{
    if (name == "topology") {
        d.topology = parse_topology(value);
    } else if (name == "slots") {
        d.slots = value;
    } else if (name == "loop") {
        d.loop = parse_bool(value);
    } else {
        return false;
    }
    return true;
}

std::string render(const RunConfig& cfg, bool include_run)
{
    std::ostringstream out;
    std::string section;
    for (const auto& k : keys()) {
        if (!include_run && k.section == "run") {
            continue;
        }
        if (k.section != section) {
            out << (section.empty() ? "" : "\n") << '[' << k.section << "]\n";
            section = k.section;
        }
        out << k.name << " = " << k.get(cfg) << '\n';
    }
    return out.str();
}

// Per-node slot masks from "S:1 A:2 B:3" style text.
std::vector<std::uint32_t> parse_slots(const std::string& text, int relays)
{
    std::vector<std::uint32_t> masks(std::size_t(2 + relays), 0U);
    std::string spaced = text;
    std::replace(spaced.begin(), spaced.end(), ',', ' ');
    std::istringstream in(spaced);
    std::string item;
    while (in >> item) {
        const auto colon = item.find(':');
        if (colon == std::string::npos) {
            throw ConfigError("slot entry '" + item + "' is not of the form NODE:SLOT");
        }
        const auto name = item.substr(0, colon);
        int node = -1;
        for (int n = 0; n < 2 + relays; ++n) {
            if (node_name(n, relays) == name) {
                node = n;
            }
        }
        if (node < 0) {
            throw ConfigError("unknown node '" + name + "' in slot table");
        }
        const int slot = parse_number<int>(item.substr(colon + 1));
        if (slot < 1 || slot > 31) {
            throw ConfigError("slot number out of range in '" + item + "'");
        }
        masks[std::size_t(node)] |= 1U << unsigned(slot - 1);
    }
    return masks;
}

bool matches(const StudyCase& sc, const CaseDescription& d)
{
    if (d.topology && *d.topology != sc.topology) {
        return false;
    }
    if (d.loop && *d.loop != sc.loop_allowed) {
        return false;
    }
    if (d.slots) {
        try {
            if (parse_slots(*d.slots, sc.relay_count()) != sc.slot_mask) {
                return false;
            }
        } catch (const ConfigError&) {
            return false;
        }
    }
    return true;
}

} // namespace

ChannelParams RunConfig::channel_params() const
{
    ChannelParams p = channel.params;
    p.d_sd = study.d_sd;
    return p;
}

Nsga2Config RunConfig::nsga2_config() const
{
    Nsga2Config c;
    c.population = nsga2.population;
    c.generations = nsga2.generations;
    c.crossover_prob = nsga2.crossover_prob;
    c.mutation_prob = nsga2.mutation_prob;
    c.crossover_eta = nsga2.crossover_eta;
    c.mutation_eta = nsga2.mutation_eta;
    c.seed = nsga2.seed;
    c.jobs = jobs;
    c.dedupe_resolution = nsga2.dedupe_resolution;
    return c;
}

SimConfig RunConfig::sim_config(std::uint64_t seed) const
{
    SimConfig c;
    c.frames = sim.frames;
    c.seed = seed;
    c.interference = sim.interference;
    c.buffer_capacity = sim.buffer_capacity;
    c.drain_limit = sim.drain_limit;
    return c;
}

CodingConfig RunConfig::coding_config(std::uint64_t seed) const
{
    CodingConfig c;
    c.seed = seed;
    c.interference = sim.interference;
    c.xor_depth = coding.xor_depth;
    c.literal_threshold = coding.literal_threshold;
    c.payload_bits = coding.payload_bits;
    c.coefficient_overhead = coding.coefficient_overhead;
    c.frame_limit = coding.frame_limit;
    return c;
}

RunConfig parse_config(const std::string& text, RunConfig base)
{
    std::istringstream in(text);
    std::string line;
    std::string section;
    CaseDescription desc;
    bool id_given = false;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto where = "line " + std::to_string(lineno) + ": ";
        if (const auto hash = line.find_first_of("#;"); hash != std::string::npos) {
            line.erase(hash);
        }
        const auto t = trim(line);
        if (t.empty()) {
            continue;
        }
        if (t.front() == '[') {
            if (t.back() != ']') {
                throw ConfigError(where + "unterminated section header '" + t + "'");
            }
            section = lower(trim(std::string_view(t).substr(1, t.size() - 2)));
            const bool known = std::any_of(keys().begin(), keys().end(),
                                           [&](const Key& k) { return k.section == section; });
            if (!known) {
                throw ConfigError(where + "unknown section [" + section + "]");
            }
            continue;
        }
        const auto eq = t.find('=');
        if (eq == std::string::npos) {
            throw ConfigError(where + "expected 'key = value', got '" + t + "'");
        }
        if (section.empty()) {
            throw ConfigError(where + "setting outside of any section");
        }
        const auto name = lower(trim(std::string_view(t).substr(0, eq)));
        const auto value = trim(std::string_view(t).substr(eq + 1));
        try {
            if (section == "case" && set_case_description(desc, name, value)) {
                continue;
            }
            const Key* key = find_key(section, name);
            if (key == nullptr) {
                throw ConfigError("unknown key '" + name + "' in [" + section + "]");
            }
            key->set(base, value);
            id_given = id_given || (section == "case" && name == "id");
        } catch (const ConfigError& e) {
            throw ConfigError(where + e.what());
        }
    }
    if (desc.topology || desc.slots || desc.loop) {
        if (id_given) {
            desc.id = base.study.id;
        }
        base.study.id = match_study_case(desc);
    }
    validate(base);
    return base;
}

RunConfig load_config(const std::string& path, RunConfig base)
{
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open config file '" + path + "'");
    }
    std::ostringstream text;
    text << in.rdbuf();
    try {
        return parse_config(text.str(), std::move(base));
    } catch (const ConfigError& e) {
        throw ConfigError(path + ": " + e.what());
    }
}

void apply_override(RunConfig& cfg, const std::string& assignment)
{
    const auto eq = assignment.find('=');
    const auto dot = assignment.find('.');
    if (eq == std::string::npos || dot == std::string::npos || dot > eq) {
        throw ConfigError("override '" + assignment + "' is not of the form section.key=value");
    }
    const auto section = lower(trim(std::string_view(assignment).substr(0, dot)));
    const auto name = lower(trim(std::string_view(assignment).substr(dot + 1, eq - dot - 1)));
    cfg = parse_config("[" + section + "]\n" + name + " = " + assignment.substr(eq + 1) + "\n", cfg);
}

void validate(const RunConfig& cfg)
{
    auto require = [](bool ok, const std::string& what) {
        if (!ok) {
            throw ConfigError(what);
        }
    };
    require(cfg.study.id >= 1 && cfg.study.id <= 5, "case.id must be in 1..5, got " + std::to_string(cfg.study.id));
    require(cfg.study.d_sd > 0.0, "case.d_sd must be positive");
    require(cfg.channel.params.tx_power_mw > 0.0, "channel.tx_power_mw must be positive");
    require(cfg.channel.params.pathloss_exponent >= 0.0, "channel.pathloss_exponent must be non-negative");
    require(cfg.channel.params.noise_floor_mw >= 0.0, "channel.noise_floor_mw must be >= 0 (0 = calibrate)");
    require(cfg.channel.params.packet_bits >= 1, "channel.packet_bits must be >= 1");
    require(cfg.nsga2.population >= 4 && cfg.nsga2.population % 2 == 0,
            "nsga2.population must be an even number >= 4");
    require(cfg.nsga2.generations >= 0, "nsga2.generations must be >= 0");
    require(cfg.nsga2.crossover_prob >= 0.0 && cfg.nsga2.crossover_prob <= 1.0,
            "nsga2.crossover_prob must be in [0, 1]");
    require(cfg.nsga2.mutation_prob <= 1.0, "nsga2.mutation_prob must be <= 1 (negative = 1/genome length)");
    require(cfg.nsga2.crossover_eta >= 0.0 && cfg.nsga2.mutation_eta >= 0.0, "nsga2 distribution indices must be >= 0");
    require(cfg.sim.frames >= 1, "simulator.frames must be >= 1");
    require(cfg.sim.seeds >= 1, "simulator.seeds must be >= 1");
    require(cfg.sim.buffer_capacity >= 0, "simulator.buffer_capacity must be >= 0");
    require(cfg.sim.drain_limit >= 0, "simulator.drain_limit must be >= 0");
    require(!cfg.coding.strategies.empty(), "coding.strategies must list at least one strategy");
    require(!cfg.coding.ks.empty(), "coding.k must list at least one value");
    for (int k : cfg.coding.ks) {
        require(k >= 1, "coding.k values must be >= 1");
        require(k < cfg.coding.payload_bits, "coding.k must be smaller than coding.payload_bits");
    }
    require(cfg.coding.seeds >= 1, "coding.seeds must be >= 1");
    require(cfg.coding.xor_depth >= 1, "coding.xor_depth must be >= 1");
    require(cfg.coding.frame_limit >= 1, "coding.frame_limit must be >= 1");
    require(cfg.report.rmse_max > 0.0, "report.rmse_max must be positive");
    require(cfg.report.tolerance_scale > 0.0, "report.tolerance_scale must be positive");
    require(cfg.report.compare_tolerance >= 0.0, "report.compare_tolerance must be >= 0");
    require(!cfg.output_dir.empty(), "run.output_dir must not be empty");
}

std::string render_config(const RunConfig& cfg) { return render(cfg, true); }

std::string config_hash(const RunConfig& cfg)
{
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : render(cfg, false)) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

int match_study_case(const CaseDescription& desc)
{
    std::vector<int> hits;
    for (int id = 1; id <= 5; ++id) {
        if (matches(study_case(id), desc)) {
            hits.push_back(id);
        }
    }
    if (desc.id) {
        if (std::find(hits.begin(), hits.end(), *desc.id) == hits.end()) {
            throw ConfigError("study case " + std::to_string(*desc.id)
                              + " does not match the given topology / slot table / loop flag");
        }
        return *desc.id;
    }
    if (hits.empty()) {
        throw ConfigError("no study case matches the given topology / slot table / loop flag");
    }
    if (hits.size() > 1) {
        std::string ids;
        for (int id : hits) {
            ids += (ids.empty() ? "" : ", ") + std::to_string(id);
        }
        throw ConfigError("study case description is ambiguous (matches cases " + ids + ")");
    }
    return hits.front();
}

} // namespace relaybound
