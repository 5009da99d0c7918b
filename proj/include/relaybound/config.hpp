#pragma once

// Run configuration: a flat key-value text format with one section per
// module, e.g.
//
//     [case]
//     id = 3
//     d_sd = 620
//
//     [nsga2]
//     population = 300
//
// Every key has an embedded default; `render_config` prints the canonical
// form (also what the configuration hash is computed over).

#include "relaybound/channel.hpp"
#include "relaybound/coding.hpp"
#include "relaybound/pareto.hpp"
#include "relaybound/simulator.hpp"

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace relaybound {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct CaseConfig {
    int id = 1;
    double d_sd = 620.0;
};

struct ChannelConfig {
    ChannelParams params;       // d_sd is taken from [case]
    CalibrationTargets targets;
};

struct OptimizeConfig {
    int population = 300;
    int generations = 1000;
    double crossover_prob = 0.9;
    double mutation_prob = -1.0;
    double crossover_eta = 15.0;
    double mutation_eta = 20.0;
    std::uint64_t seed = 1;
    double dedupe_resolution = 1e-6;
};

struct SimulateConfig {
    long frames = 10000;
    int seeds = 5;            // runs per bound entry, seeds seed .. seed + seeds - 1
    std::uint64_t seed = 1;
    InterferenceMode interference = InterferenceMode::Realized;
    int buffer_capacity = 0;
    long drain_limit = 100000;
    double min_expected_arrivals = kMinExpectedArrivals;
};

struct CodeBenchConfig {
    std::vector<Strategy> strategies{Strategy::None, Strategy::RXor, Strategy::Rlnc};
    std::vector<int> ks{100};
    int seeds = 50;
    std::uint64_t seed = 1;
    BoundKind bound = BoundKind::B_c_opt; // entries that are coded
    int xor_depth = kDefaultXorDepth;
    bool literal_threshold = false;
    int payload_bits = kPayloadBits;
    bool coefficient_overhead = true;
    long frame_limit = kCodedFrameLimit;
};

struct ReportConfig {
    double rmse_max = 5e-3;
    double tolerance_scale = 1.0; // multiplies every landmark tolerance
    double compare_tolerance = 1e-6;
};

struct RunConfig {
    CaseConfig study;
    ChannelConfig channel;
    OptimizeConfig nsga2;
    SimulateConfig sim;
    CodeBenchConfig coding;
    ReportConfig report;
    std::string output_dir = "out";
    int jobs = 0;

    /// Channel parameters with d_SD filled in (noise floor as configured).
    [[nodiscard]] ChannelParams channel_params() const;
    [[nodiscard]] Nsga2Config nsga2_config() const;
    [[nodiscard]] SimConfig sim_config(std::uint64_t seed) const;
    [[nodiscard]] CodingConfig coding_config(std::uint64_t seed) const;
};

/// Parses configuration text on top of the defaults. Unknown sections or
/// keys, malformed values and out-of-range settings raise ConfigError with
/// the offending line.
RunConfig parse_config(const std::string& text, RunConfig base = {});
RunConfig load_config(const std::string& path, RunConfig base = {});

/// Applies one "section.key=value" override.
void apply_override(RunConfig& cfg, const std::string& assignment);

/// Throws ConfigError when a setting is out of range.
void validate(const RunConfig& cfg);

/// Canonical text of every setting, in a fixed order.
std::string render_config(const RunConfig& cfg);

/// 16 hex digits (FNV-1a 64) over the canonical text of the settings that
/// influence results; [run] (output directory, worker count) is excluded.
std::string config_hash(const RunConfig& cfg);

/// A study case described declaratively. Every field is optional; the set
/// must match exactly one row of the study-case table.
struct CaseDescription {
    std::optional<int> id;
    std::optional<Topology> topology;
    std::optional<std::string> slots; // e.g. "S:1 A:2 B:3" (1-based slots)
    std::optional<bool> loop;
};

/// Returns the id of the unique matching study case; throws ConfigError when
/// none or several match, or when an explicit id contradicts the rest.
int match_study_case(const CaseDescription& desc);

} // namespace relaybound
