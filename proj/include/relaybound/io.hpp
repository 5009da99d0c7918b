#pragma once

// Serialization of solutions, bounds and experiment results.
//
// CSV files start with '#'-prefixed header lines carrying provenance
// (artifact name, configuration hash, seed), followed by one column-name
// line and plain comma-separated rows; docs/csv_schema.md lists the columns.
// Numbers use the shortest text that reads back to the same double.

#include "relaybound/coding.hpp"
#include "relaybound/pareto.hpp"
#include "relaybound/simulator.hpp"

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace relaybound {

struct FileHeader {
    std::string artifact;    // e.g. "sc3_B_c_opt"
    std::string config_hash; // empty when unknown
    std::uint64_t seed = 0;
    std::map<std::string, std::string> extra; // further "# key=value" lines
};

/// "sc<K>_<kind>.<ext>", e.g. artifact_name(3, "B_c_opt", "csv") = "sc3_B_c_opt.csv".
std::string artifact_name(int case_id, const std::string& kind, const std::string& ext);

std::string format_number(double v);
/// Accepts the output of format_number (including inf / nan); throws
/// std::invalid_argument otherwise.
double parse_double(const std::string& text);

/// A parsed CSV file: provenance header, column names, string cells.
struct CsvTable {
    FileHeader header;
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;

    /// Index of a column; throws std::invalid_argument when absent.
    [[nodiscard]] std::size_t column(const std::string& name) const;
    [[nodiscard]] bool has_column(const std::string& name) const;
    [[nodiscard]] const std::string& cell(std::size_t row, const std::string& name) const;
    [[nodiscard]] double number(std::size_t row, const std::string& name) const;
};

/// The cell as written to a CSV row: quoted (with doubled inner quotes) when
/// it contains a comma, a quote or a newline.
std::string csv_field(const std::string& text);

/// Throws std::runtime_error on ragged rows or a missing column line.
CsvTable read_csv(std::istream& in);
CsvTable read_csv_file(const std::string& path);

void write_header(std::ostream& out, const FileHeader& header);

// ---- solutions ----------------------------------------------------------

/// Column names of the flat solution record: relay coordinates ("R_x",
/// "R_y" or "A_x", "A_y", "B_x", "B_y") then the free forwarding variables.
std::vector<std::string> solution_columns(const StudyCase& sc);
std::vector<double> solution_values(const Solution& sol);

/// JSON record {"case", "d_sd", "relays": [{"name", "x", "y"}], "forwarding": {name: value}}.
std::string solution_to_json(const Solution& sol, const StudyCase& sc);

/// Reads a JSON solution record back into a genome. The record's "case"
/// must equal sc.id when present; its "d_sd" is returned through d_sd.
/// Throws std::invalid_argument for missing or unknown fields.
std::vector<double> genome_from_json(const std::string& text, const StudyCase& sc, double* d_sd = nullptr);

/// Objective vector and derived criteria as a JSON object, with the
/// solution's feasibility and emission rates.
std::string evaluation_to_json(const Solution& sol, const StudyCase& sc, const ObjectiveVector& obj,
                               const DerivedCriteria& derived);

// ---- bounds -------------------------------------------------------------

/// Bound rows record where f_R came from ("analytic", "simulated" for the
/// looped case after simulation, "unavailable" before).
void write_bound_csv(std::ostream& out, const ParetoBound& bound, const StudyCase& sc, const FileHeader& header);
void write_bound_json(std::ostream& out, const ParetoBound& bound, const StudyCase& sc, const FileHeader& header);

/// Reads a bound CSV. Solutions are re-decoded from their records with the
/// given channel; objectives and f_R are taken from the file.
ParetoBound read_bound_csv(std::istream& in, const ChannelParams& channel, FileHeader* header = nullptr);
ParetoBound read_bound_file(const std::string& path, const ChannelParams& channel, FileHeader* header = nullptr);

// ---- simulation and coding results ----------------------------------------

struct SimRow {
    std::size_t entry = 0;
    std::optional<std::uint64_t> seed; // empty for the pooled row
    SimMetrics metrics;
};

void write_sim_csv(std::ostream& out, int case_id, BoundKind kind, const std::vector<SimRow>& rows,
                   const FileHeader& header);
std::vector<SimRow> read_sim_csv(std::istream& in, FileHeader* header = nullptr);

struct CodingRow {
    std::size_t entry = 0;
    Strategy strategy = Strategy::None;
    int k = 0;
    std::optional<std::uint64_t> seed; // empty for the per-entry mean row
    CodingMetrics metrics;
};

void write_coding_csv(std::ostream& out, int case_id, BoundKind kind, const std::vector<CodingRow>& rows,
                      const FileHeader& header);
std::vector<CodingRow> read_coding_csv(std::istream& in, FileHeader* header = nullptr);

/// Every nonzero link probability p_ij^u of a solution.
void write_channel_csv(std::ostream& out, const Solution& sol, const StudyCase& sc, const FileHeader& header);

/// One line per transmission / reception.
void write_event_log(std::ostream& out, const std::vector<SimEvent>& events, int relay_count);

} // namespace relaybound
