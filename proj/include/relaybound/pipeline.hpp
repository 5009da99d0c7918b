#pragma once

// End-to-end experiment stages (calibrate -> optimize -> simulate -> derive
// bounds -> report), the coded benchmark, the landmark checks and the
// Markdown / CSV report.

#include "relaybound/analysis.hpp"
#include "relaybound/config.hpp"
#include "relaybound/io.hpp"

#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace relaybound {

/// A solution or search result that cannot be used (infeasible solution,
/// empty feasible front, coded run that never decodes).
class InfeasibleError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Process exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitInfeasible = 3;
inline constexpr int kExitCheckFailed = 4;

/// Exit code for an exception escaping a stage: configuration and
/// calibration errors -> 2, infeasibility and divergence -> 3, else 1.
int exit_code_for(const std::exception& e);

/// A pipeline stage failed; what() names the stage and the cause.
class StageError : public std::runtime_error {
public:
    StageError(std::string stage, const std::exception& cause);
    [[nodiscard]] const std::string& stage() const { return stage_; }
    [[nodiscard]] int exit_code() const { return exit_code_; }

private:
    std::string stage_;
    int exit_code_;
};

/// Configured channel; calibrated when the noise floor is unset (0).
ChannelParams calibrate_channel(const RunConfig& cfg);

/// NSGA-II over the configured case. Throws InfeasibleError when the final
/// population has no feasible member.
ParetoBound optimize_bound(const RunConfig& cfg, const ChannelParams& channel);

/// Simulates every entry with seeds sim.seed .. sim.seed + sim.seeds - 1.
/// Rows: one per (entry, seed) followed by one pooled row per entry.
std::vector<SimRow> simulate_bound(const ParetoBound& bound, const RunConfig& cfg, const ChannelParams& channel);

/// Pooled metrics per entry, in entry order. Throws std::invalid_argument
/// when an entry has no pooled row.
std::vector<SimMetrics> pooled_metrics(const std::vector<SimRow>& rows, std::size_t entries);

/// For the looped case, where f_R has no closed form, copies the simulated
/// reliability into the bound entries (marking it available).
void fill_simulated_reliability(ParetoBound& b_opt, const StudyCase& sc, const std::vector<SimMetrics>& pooled);

/// Coded transmission of every entry for each configured strategy and K
/// over coding.seeds seeds. Rows: per (entry, strategy, K, seed), then a
/// mean row per (entry, strategy, K). Throws InfeasibleError when an entry
/// cannot complete decoding within the frame limit.
std::vector<CodingRow> code_bench(const ParetoBound& bound, const RunConfig& cfg, const ChannelParams& channel);

struct CodedGap {
    Strategy strategy = Strategy::None;
    int k = 0;
    GapReport gap; // mean coded (fc_D, fc_E) vs the entry's analytic (fc_D, fc_E)
};

/// One gap per (strategy, K) present in the mean rows, identity-paired with
/// the coded entries' analytic capacity-achieving points.
std::vector<CodedGap> coded_gaps(const ParetoBound& coded_bound, const std::vector<CodingRow>& rows);

/// GD from B^r_opt to B^c_opt (nearest pairing): the gap left without coding.
double uncoded_gap(const DerivedBounds& derived);

struct CheckResult {
    std::string name;
    bool pass = false;
    std::string detail;
};

/// Landmark points of the study cases (applicable when case and d_SD match
/// a landmark); tolerances are multiplied by tolerance_scale.
std::vector<CheckResult> landmark_checks(int case_id, double d_sd, const ParetoBound& b_opt,
                                         const DerivedBounds& derived, double tolerance_scale = 1.0);

/// Relay activity threshold used by the "no two active relays" landmark.
inline constexpr double kActiveRelayThreshold = 1e-3;

/// Coded-gap expectations (case 3: RLNC K=100 within 0.3 of B^c_opt and
/// below the uncoded gap; case 4: RLNC K=500 below R-XOR K=500). Only
/// checks whose inputs are present are returned.
std::vector<CheckResult> coding_checks(int case_id, const std::vector<CodedGap>& gaps, double uncoded,
                                       double tolerance_scale = 1.0);

struct ReportInputs {
    RunConfig config;
    ParetoBound b_opt;
    DerivedBounds derived;
    std::optional<RmseReport> rmse;
    std::vector<CodedGap> coded;
    std::string config_hash;
};

struct Report {
    std::string markdown;
    std::string csv;
    std::vector<CheckResult> checks;
    [[nodiscard]] bool passed() const;
};

Report build_report(const ReportInputs& in);

/// Rebuilds the report from an artifact directory written by run_pipeline
/// (and optionally code-bench).
Report report_from_directory(const std::string& dir, const RunConfig& cfg, const ChannelParams& channel);

struct PipelineResult {
    std::string directory;
    std::vector<std::string> files;
    Report report;
};

using Progress = std::function<void(const std::string& stage, const std::string& message)>;

/// Runs every stage and writes the artifacts into cfg.output_dir. Any stage
/// failure is rethrown as StageError.
PipelineResult run_pipeline(const RunConfig& cfg, const Progress& progress = {});

/// Provenance header for an artifact of this configuration.
FileHeader make_header(const RunConfig& cfg, const std::string& kind, std::uint64_t seed);

/// Writes the five bounds (CSV and JSON); returns the file names.
std::vector<std::string> write_bounds(const std::string& dir, const RunConfig& cfg, const ParetoBound& b_opt,
                                      const DerivedBounds& derived);

} // namespace relaybound
