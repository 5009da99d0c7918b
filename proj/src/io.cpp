#include "relaybound/io.hpp"

#include <json.hpp>

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace relaybound {

namespace {

using nlohmann::json;

std::string join(const std::vector<std::string>& cells)
{
    std::string line;
    for (std::size_t k = 0; k < cells.size(); ++k) {
        line += (k == 0 ? "" : ",") + csv_field(cells[k]);
    }
    return line;
}

// Quoted cells may contain commas and doubled quotes.
std::vector<std::string> split_row(const std::string& line)
{
    std::vector<std::string> cells(1);
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                cells.back() += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                cells.back() += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            cells.emplace_back();
        } else {
            cells.back() += c;
        }
    }
    if (quoted) {
        throw std::runtime_error("unterminated quote in CSV row: " + line);
    }
    return cells;
}

std::uint64_t parse_u64(const std::string& text)
{
    std::uint64_t v = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || ptr != text.data() + text.size()) {
        throw std::invalid_argument("expected an unsigned integer, got '" + text + "'");
    }
    return v;
}

long parse_long(const std::string& text) { return std::lround(parse_double(text)); }

bool uses_fc(BoundKind k) { return k == BoundKind::B_c || k == BoundKind::B_c_opt; }
bool uses_fr(BoundKind k) { return k == BoundKind::B_r || k == BoundKind::B_r_opt; }

std::string reliability_source(const StudyCase& sc, const ObjectiveVector& o)
{
    if (!o.f_R_available) {
        return "unavailable";
    }
    return sc.loop_allowed ? "simulated" : "analytic";
}

// JSON has no infinities; they become null.
json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

std::vector<std::string> relay_names(const StudyCase& sc)
{
    std::vector<std::string> names;
    for (int r = 0; r < sc.relay_count(); ++r) {
        names.push_back(node_name(relay_node(r), sc.relay_count()));
    }
    return names;
}

void write_row(std::ostream& out, const std::vector<std::string>& cells) { out << join(cells) << '\n'; }

} // namespace

std::string csv_field(const std::string& text)
{
    if (text.find_first_of(",\"\n") == std::string::npos) {
        return text;
    }
    std::string out = "\"";
    for (char c : text) {
        out += c == '"' ? std::string("\"\"") : std::string(1, c);
    }
    return out + '"';
}

std::string artifact_name(int case_id, const std::string& kind, const std::string& ext)
{
    return "sc" + std::to_string(case_id) + "_" + kind + "." + ext;
}

std::string format_number(double v)
{
    if (std::isnan(v)) {
        return "nan";
    }
    if (std::isinf(v)) {
        return v > 0 ? "inf" : "-inf";
    }
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

double parse_double(const std::string& text)
{
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty()) {
        throw std::invalid_argument("expected a number, got '" + text + "'");
    }
    return v;
}

std::size_t CsvTable::column(const std::string& name) const
{
    for (std::size_t k = 0; k < columns.size(); ++k) {
        if (columns[k] == name) {
            return k;
        }
    }
    throw std::invalid_argument("CSV has no column '" + name + "'");
}

bool CsvTable::has_column(const std::string& name) const
{
    return std::find(columns.begin(), columns.end(), name) != columns.end();
}

const std::string& CsvTable::cell(std::size_t row, const std::string& name) const { return rows.at(row)[column(name)]; }

double CsvTable::number(std::size_t row, const std::string& name) const { return parse_double(cell(row, name)); }

CsvTable read_csv(std::istream& in)
{
    CsvTable t;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty()) {
            continue;
        }
        if (line.front() == '#') {
            const auto body = line.substr(line.find_first_not_of("# "));
            const auto eq = body.find('=');
            if (eq == std::string::npos) {
                continue;
            }
            const auto key = body.substr(0, eq);
            const auto value = body.substr(eq + 1);
            if (key == "artifact") {
                t.header.artifact = value;
            } else if (key == "config_hash") {
                t.header.config_hash = value;
            } else if (key == "seed") {
                t.header.seed = parse_u64(value);
            } else {
                t.header.extra[key] = value;
            }
            continue;
        }
        auto cells = split_row(line);
        if (t.columns.empty()) {
            t.columns = std::move(cells);
            continue;
        }
        if (cells.size() != t.columns.size()) {
            throw std::runtime_error("CSV line " + std::to_string(lineno) + " has " + std::to_string(cells.size())
                                     + " cells, expected " + std::to_string(t.columns.size()));
        }
        t.rows.push_back(std::move(cells));
    }
    if (t.columns.empty()) {
        throw std::runtime_error("CSV has no column line");
    }
    return t;
}

CsvTable read_csv_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open '" + path + "'");
    }
    try {
        return read_csv(in);
    } catch (const std::exception& e) {
        throw std::runtime_error(path + ": " + e.what());
    }
}

void write_header(std::ostream& out, const FileHeader& header)
{
    out << "# artifact=" << header.artifact << '\n';
    out << "# config_hash=" << header.config_hash << '\n';
    out << "# seed=" << header.seed << '\n';
    for (const auto& [k, v] : header.extra) {
        out << "# " << k << '=' << v << '\n';
    }
}

// ---- solutions ----------------------------------------------------------

std::vector<std::string> solution_columns(const StudyCase& sc)
{
    std::vector<std::string> cols;
    for (const auto& name : relay_names(sc)) {
        cols.push_back(name + "_x");
        cols.push_back(name + "_y");
    }
    for (const auto& fv : sc.free_vars) {
        cols.push_back(fv.name);
    }
    return cols;
}

std::vector<double> solution_values(const Solution& sol) { return sol.genome(); }

std::string solution_to_json(const Solution& sol, const StudyCase& sc)
{
    json j;
    j["case"] = sc.id;
    j["d_sd"] = sol.d_sd;
    const auto names = relay_names(sc);
    j["relays"] = json::array();
    for (std::size_t r = 0; r < sol.relay_positions.size(); ++r) {
        j["relays"].push_back({{"name", names[r]}, {"x", sol.relay_positions[r].x}, {"y", sol.relay_positions[r].y}});
    }
    j["forwarding"] = json::object();
    for (std::size_t k = 0; k < sc.free_vars.size(); ++k) {
        j["forwarding"][sc.free_vars[k].name] = sol.free_probs.at(k);
    }
    return j.dump(2);
}

std::vector<double> genome_from_json(const std::string& text, const StudyCase& sc, double* d_sd)
{
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument(std::string("solution record is not valid JSON: ") + e.what());
    }
    try {
        if (j.contains("case") && j.at("case").get<int>() != sc.id) {
            throw std::invalid_argument("solution record is for study case " + std::to_string(j.at("case").get<int>())
                                        + ", expected " + std::to_string(sc.id));
        }
        if (d_sd != nullptr && j.contains("d_sd")) {
            *d_sd = j.at("d_sd").get<double>();
        }
        const auto& relays = j.at("relays");
        if (!relays.is_array() || relays.size() != std::size_t(sc.relay_count())) {
            throw std::invalid_argument("solution record must list " + std::to_string(sc.relay_count())
                                        + " relay position(s)");
        }
        std::vector<double> genome;
        for (const auto& r : relays) {
            genome.push_back(r.at("x").get<double>());
            genome.push_back(r.at("y").get<double>());
        }
        const auto& fwd = j.at("forwarding");
        for (const auto& [name, value] : fwd.items()) {
            const bool known = std::any_of(sc.free_vars.begin(), sc.free_vars.end(),
                                           [&](const ForwardVar& fv) { return fv.name == name; });
            if (!known) {
                throw std::invalid_argument("forwarding variable '" + name + "' does not exist in study case "
                                            + std::to_string(sc.id));
            }
        }
        for (const auto& fv : sc.free_vars) {
            if (!fwd.contains(fv.name)) {
                throw std::invalid_argument("solution record lacks forwarding variable '" + fv.name + "'");
            }
            genome.push_back(fwd.at(fv.name).get<double>());
        }
        return genome;
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("malformed solution record: ") + e.what());
    }
}

std::string evaluation_to_json(const Solution& sol, const StudyCase& sc, const ObjectiveVector& obj,
                               const DerivedCriteria& derived)
{
    json j;
    j["case"] = sc.id;
    j["solution"] = json::parse(solution_to_json(sol, sc));
    j["feasible"] = sol.feasible;
    j["violation"] = number_or_null(sol.violation);
    j["loop_clamped"] = sol.loop_clamped;
    json tau = json::object();
    for (int n = 0; n < sc.node_count(); ++n) {
        for (int u = 0; u < sc.slot_count; ++u) {
            if (sc.transmits(n, u)) {
                tau[node_name(n, sc.relay_count()) + "_" + std::to_string(u + 1)] = sol.tau(n, u);
            }
        }
    }
    j["tau"] = tau;
    j["objectives"] = {{"f_C", obj.f_C},
                       {"f_R", obj.f_R_available ? number_or_null(obj.f_R) : json(nullptr)},
                       {"f_D", obj.f_D},
                       {"f_E", obj.f_E},
                       {"f_R_available", obj.f_R_available}};
    j["derived"] = {{"fc_D", number_or_null(derived.fc_D)},
                    {"fc_E", number_or_null(derived.fc_E)},
                    {"fr_D", number_or_null(derived.fr_D)},
                    {"fr_E", number_or_null(derived.fr_E)}};
    return j.dump(2);
}

// ---- bounds -------------------------------------------------------------

namespace {

FileHeader bound_header(const ParetoBound& bound, FileHeader header)
{
    header.extra["case"] = std::to_string(bound.case_id);
    header.extra["kind"] = to_string(bound.kind);
    std::string skipped;
    for (auto s : bound.skipped) {
        skipped += (skipped.empty() ? "" : ";") + std::to_string(s);
    }
    header.extra["skipped"] = skipped;
    return header;
}

const std::vector<std::string>& objective_columns()
{
    static const std::vector<std::string> cols = {"f_C",   "f_R",   "f_R_source", "f_D",  "f_E",
                                                  "fc_D", "fc_E", "fr_D",       "fr_E"};
    return cols;
}

} // namespace

void write_bound_csv(std::ostream& out, const ParetoBound& bound, const StudyCase& sc, const FileHeader& header)
{
    write_header(out, bound_header(bound, header));
    std::vector<std::string> cols = {"case", "kind", "entry", "d_sd"};
    for (const auto& c : solution_columns(sc)) {
        cols.push_back(c);
    }
    for (const auto& c : objective_columns()) {
        cols.push_back(c);
    }
    write_row(out, cols);
    for (std::size_t e = 0; e < bound.entries.size(); ++e) {
        const auto& entry = bound.entries[e];
        const auto& o = entry.objectives;
        const auto d = derived_criteria(o);
        std::vector<std::string> row = {std::to_string(bound.case_id), to_string(bound.kind), std::to_string(e),
                                        format_number(entry.solution.d_sd)};
        for (double v : solution_values(entry.solution)) {
            row.push_back(format_number(v));
        }
        row.push_back(format_number(o.f_C));
        row.push_back(o.f_R_available ? format_number(o.f_R) : "nan");
        row.push_back(reliability_source(sc, o));
        row.push_back(format_number(o.f_D));
        row.push_back(format_number(o.f_E));
        row.push_back(format_number(d.fc_D));
        row.push_back(format_number(d.fc_E));
        row.push_back(format_number(d.fr_D));
        row.push_back(format_number(d.fr_E));
        write_row(out, row);
    }
}

void write_bound_json(std::ostream& out, const ParetoBound& bound, const StudyCase& sc, const FileHeader& header)
{
    json j;
    j["artifact"] = header.artifact;
    j["config_hash"] = header.config_hash;
    j["seed"] = header.seed;
    for (const auto& [k, v] : header.extra) {
        j["meta"][k] = v;
    }
    j["case"] = bound.case_id;
    j["kind"] = to_string(bound.kind);
    j["skipped"] = bound.skipped;
    j["entries"] = json::array();
    for (const auto& entry : bound.entries) {
        const auto& o = entry.objectives;
        const auto d = derived_criteria(o);
        json p = json::array();
        for (double v : entry.point) {
            p.push_back(number_or_null(v));
        }
        j["entries"].push_back({{"solution", json::parse(solution_to_json(entry.solution, sc))},
                                {"objectives",
                                 {{"f_C", o.f_C},
                                  {"f_R", o.f_R_available ? number_or_null(o.f_R) : json(nullptr)},
                                  {"f_R_source", reliability_source(sc, o)},
                                  {"f_D", o.f_D},
                                  {"f_E", o.f_E}}},
                                {"derived",
                                 {{"fc_D", number_or_null(d.fc_D)},
                                  {"fc_E", number_or_null(d.fc_E)},
                                  {"fr_D", number_or_null(d.fr_D)},
                                  {"fr_E", number_or_null(d.fr_E)}}},
                                {"point", p}});
    }
    out << j.dump(2) << '\n';
}

ParetoBound read_bound_csv(std::istream& in, const ChannelParams& channel, FileHeader* header)
{
    const auto t = read_csv(in);
    ParetoBound bound;
    const auto& extra = t.header.extra;
    if (!extra.count("case") || !extra.count("kind")) {
        throw std::runtime_error("bound file lacks the case / kind header lines");
    }
    bound.case_id = int(parse_u64(extra.at("case")));
    bound.kind = parse_bound_kind(extra.at("kind"));
    bound.senses = bound.kind == BoundKind::B_opt ? bopt_senses() : std::vector<Sense>{Sense::Minimize, Sense::Minimize};
    if (auto it = extra.find("skipped"); it != extra.end()) {
        std::istringstream s(it->second);
        std::string item;
        while (std::getline(s, item, ';')) {
            if (!item.empty()) {
                bound.skipped.push_back(std::size_t(parse_u64(item)));
            }
        }
    }
    const auto sc = study_case(bound.case_id);
    const auto sol_cols = solution_columns(sc);
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        std::vector<double> genome;
        for (const auto& c : sol_cols) {
            genome.push_back(t.number(r, c));
        }
        BoundEntry e;
        e.solution = decode_genome(genome, sc, channel, t.number(r, "d_sd"));
        auto& o = e.objectives;
        o.f_C = t.number(r, "f_C");
        o.f_D = t.number(r, "f_D");
        o.f_E = t.number(r, "f_E");
        o.f_R = t.number(r, "f_R");
        o.f_R_available = t.cell(r, "f_R_source") != "unavailable";
        const auto d = derived_criteria(o);
        if (bound.kind == BoundKind::B_opt) {
            e.point = bopt_point(o);
        } else if (uses_fc(bound.kind)) {
            e.point = {d.fc_D, d.fc_E};
        } else if (uses_fr(bound.kind)) {
            e.point = {d.fr_D, d.fr_E};
        }
        bound.entries.push_back(std::move(e));
    }
    if (header != nullptr) {
        *header = t.header;
    }
    return bound;
}

ParetoBound read_bound_file(const std::string& path, const ChannelParams& channel, FileHeader* header)
{
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open bound file '" + path + "'");
    }
    try {
        return read_bound_csv(in, channel, header);
    } catch (const std::exception& e) {
        throw std::runtime_error(path + ": " + e.what());
    }
}

// ---- simulation and coding results ----------------------------------------

void write_sim_csv(std::ostream& out, int case_id, BoundKind kind, const std::vector<SimRow>& rows,
                   const FileHeader& header)
{
    auto h = header;
    h.extra["case"] = std::to_string(case_id);
    h.extra["kind"] = to_string(kind);
    write_header(out, h);
    write_row(out, {"case", "kind", "entry", "seed", "frames", "f_C", "f_D", "f_E", "f_R", "n_rx", "n_distinct",
                    "n_tx_source", "n_tx_relays", "drain_frames"});
    for (const auto& r : rows) {
        const auto& m = r.metrics;
        write_row(out, {std::to_string(case_id), to_string(kind), std::to_string(r.entry),
                        r.seed ? std::to_string(*r.seed) : "pooled", std::to_string(m.frames), format_number(m.f_C),
                        format_number(m.f_D), format_number(m.f_E), format_number(m.f_R), std::to_string(m.n_rx),
                        std::to_string(m.n_distinct), std::to_string(m.n_tx_source), std::to_string(m.n_tx_relays),
                        std::to_string(m.drain_frames)});
    }
}

std::vector<SimRow> read_sim_csv(std::istream& in, FileHeader* header)
{
    const auto t = read_csv(in);
    std::vector<SimRow> rows;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        SimRow row;
        row.entry = std::size_t(parse_u64(t.cell(r, "entry")));
        if (t.cell(r, "seed") != "pooled") {
            row.seed = parse_u64(t.cell(r, "seed"));
        }
        auto& m = row.metrics;
        m.frames = parse_long(t.cell(r, "frames"));
        m.f_C = t.number(r, "f_C");
        m.f_D = t.number(r, "f_D");
        m.f_E = t.number(r, "f_E");
        m.f_R = t.number(r, "f_R");
        m.n_rx = parse_long(t.cell(r, "n_rx"));
        m.n_distinct = parse_long(t.cell(r, "n_distinct"));
        m.n_tx_source = parse_long(t.cell(r, "n_tx_source"));
        m.n_tx_relays = parse_long(t.cell(r, "n_tx_relays"));
        m.drain_frames = parse_long(t.cell(r, "drain_frames"));
        rows.push_back(std::move(row));
    }
    if (header != nullptr) {
        *header = t.header;
    }
    return rows;
}

void write_coding_csv(std::ostream& out, int case_id, BoundKind kind, const std::vector<CodingRow>& rows,
                      const FileHeader& header)
{
    auto h = header;
    h.extra["case"] = std::to_string(case_id);
    h.extra["kind"] = to_string(kind);
    write_header(out, h);
    write_row(out, {"case", "kind", "entry", "strategy", "k", "seed", "fc_D", "fc_E", "overhead_pct", "mean_hops",
                    "n_tx_source", "n_tx_relays", "n_rx_before_decode", "excess", "frames", "completed"});
    for (const auto& r : rows) {
        const auto& m = r.metrics;
        // Mean rows carry averaged counts, so counts are written as numbers.
        write_row(out, {std::to_string(case_id), to_string(kind), std::to_string(r.entry), to_string(r.strategy),
                        std::to_string(r.k), r.seed ? std::to_string(*r.seed) : "mean", format_number(m.fc_D),
                        format_number(m.fc_E), format_number(m.overhead_pct), format_number(m.mean_hops),
                        std::to_string(m.n_tx_source), std::to_string(m.n_tx_relays),
                        std::to_string(m.n_rx_before_decode), std::to_string(m.excess), std::to_string(m.frames),
                        m.completed ? "true" : "false"});
    }
}

std::vector<CodingRow> read_coding_csv(std::istream& in, FileHeader* header)
{
    const auto t = read_csv(in);
    std::vector<CodingRow> rows;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        CodingRow row;
        row.entry = std::size_t(parse_u64(t.cell(r, "entry")));
        row.strategy = parse_strategy(t.cell(r, "strategy"));
        row.k = int(parse_u64(t.cell(r, "k")));
        if (t.cell(r, "seed") != "mean") {
            row.seed = parse_u64(t.cell(r, "seed"));
        }
        auto& m = row.metrics;
        m.fc_D = t.number(r, "fc_D");
        m.fc_E = t.number(r, "fc_E");
        m.overhead_pct = t.number(r, "overhead_pct");
        m.mean_hops = t.number(r, "mean_hops");
        m.n_tx_source = parse_long(t.cell(r, "n_tx_source"));
        m.n_tx_relays = parse_long(t.cell(r, "n_tx_relays"));
        m.n_rx_before_decode = parse_long(t.cell(r, "n_rx_before_decode"));
        m.excess = parse_long(t.cell(r, "excess"));
        m.frames = parse_long(t.cell(r, "frames"));
        m.completed = t.cell(r, "completed") == "true";
        rows.push_back(std::move(row));
    }
    if (header != nullptr) {
        *header = t.header;
    }
    return rows;
}

void write_channel_csv(std::ostream& out, const Solution& sol, const StudyCase& sc, const FileHeader& header)
{
    write_header(out, header);
    write_row(out, {"case", "from", "to", "slot", "p"});
    const int relays = sc.relay_count();
    for (int u = 0; u < sc.slot_count; ++u) {
        for (int i = 0; i < sc.node_count(); ++i) {
            for (int j = 0; j < sc.node_count(); ++j) {
                if (i != j && sc.transmits(i, u) && j != kSource) {
                    write_row(out, {std::to_string(sc.id), node_name(i, relays), node_name(j, relays),
                                    std::to_string(u + 1), format_number(sol.links(i, j, u))});
                }
            }
        }
    }
}

void write_event_log(std::ostream& out, const std::vector<SimEvent>& events, int relay_count)
{
    for (const auto& e : events) {
        out << "frame=" << e.frame << " slot=" << e.slot + 1;
        if (e.kind == SimEvent::Kind::Tx) {
            out << " TX " << node_name(e.node, relay_count);
        } else {
            out << " RX " << node_name(e.node, relay_count) << " from=" << node_name(e.peer, relay_count);
        }
        out << " packet=" << e.packet << " hops=" << e.hops << '\n';
    }
}

} // namespace relaybound
