#pragma once

// Dominance machinery, NSGA-II search over decoded solutions, and the
// performance bounds built from the resulting front.

#include "relaybound/criteria.hpp"
#include "relaybound/netmodel.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace relaybound {

enum class Sense { Maximize, Minimize };

/// True iff a is at least as good as b on every axis and strictly better on
/// one. Throws std::invalid_argument when the arities differ.
bool dominates(std::span<const double> a, std::span<const double> b, std::span<const Sense> senses);

/// Indices (ascending) of the non-dominated points. Identical points do not
/// dominate each other and are all kept.
std::vector<std::size_t> pareto_filter(const std::vector<std::vector<double>>& points, std::span<const Sense> senses);

enum class BoundKind { B_opt, B_c, B_r, B_c_opt, B_r_opt };

std::string to_string(BoundKind kind);
/// Accepts "B_opt", "B_c", ...; throws std::invalid_argument otherwise.
BoundKind parse_bound_kind(const std::string& name);

struct BoundEntry {
    Solution solution;
    ObjectiveVector objectives;
    std::vector<double> point; // coordinates in this bound's objective space
};

struct ParetoBound {
    BoundKind kind = BoundKind::B_opt;
    int case_id = 1;
    std::vector<Sense> senses;
    std::vector<BoundEntry> entries;
    std::vector<std::size_t> skipped; // source entries left out (zero denominator)

    [[nodiscard]] std::vector<std::vector<double>> points() const;
};

/// (max f_C, min f_D, min f_E)
std::vector<Sense> bopt_senses();
std::vector<double> bopt_point(const ObjectiveVector& o);

struct Candidate {
    Solution solution;
    ObjectiveVector objectives;
    bool feasible = false;
    double violation = 0.0;
};

using Evaluator = std::function<Candidate(std::span<const double> genome)>;

/// Decodes a genome and applies the closed-form criteria.
Evaluator analytic_evaluator(const StudyCase& sc, const ChannelParams& channel, double d_sd);

struct GenerationSnapshot {
    int generation = 0;
    std::vector<std::vector<double>> population; // B_opt points of every member
    std::vector<std::size_t> front;              // members on the first feasible front
    std::vector<std::uint64_t> ids;              // stable identity per member across generations
};

struct Nsga2Config {
    int population = 300;
    int generations = 1000;
    double crossover_prob = 0.9;
    double mutation_prob = -1.0; // per gene; < 0 means 1 / genome length
    double crossover_eta = 15.0;
    double mutation_eta = 20.0;
    std::uint64_t seed = 1;
    int jobs = 0;
    double dedupe_resolution = 1e-6;
    std::optional<GenomeBounds> bounds; // default: genome_bounds(case, d_SD)
    std::function<void(const GenerationSnapshot&)> observer;
};

/// Deterministic for a given seed regardless of jobs. Returns the feasible
/// non-dominated set of the final population.
ParetoBound nsga2(const StudyCase& sc, double d_sd, const Nsga2Config& cfg, const Evaluator& evaluator);

struct DerivedBounds {
    ParetoBound b_c;
    ParetoBound b_r;
    ParetoBound b_c_opt;
    ParetoBound b_r_opt;
};

/// B_c and B_r map every B_opt entry to (fc_D, fc_E) and (fr_D, fr_E); the
/// *_opt bounds are their Pareto filters (both axes minimized). Entries with
/// a zero or unavailable denominator are listed in `skipped`.
DerivedBounds derive_bounds(const ParetoBound& b_opt);

/// Removes entries whose points match an earlier entry within `resolution`
/// on every axis.
void dedupe(ParetoBound& bound, double resolution);

} // namespace relaybound
