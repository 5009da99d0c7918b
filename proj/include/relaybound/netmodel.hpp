#pragma once

// Feasibility of emission-rate / forwarding configurations and decoding of
// optimizer genomes into fully resolved solutions.
//
// The optimizer searches over relay positions and free forwarding
// probabilities; emission rates are derived from them through flow
// consistency, so every decoded solution satisfies it by construction.

#include "relaybound/channel.hpp"
#include "relaybound/model.hpp"

#include <span>
#include <vector>

namespace relaybound {

inline constexpr double kFeasibilityTolerance = 1e-9;
/// Loop guard: both inter-relay products p x are capped at 1 - kLoopDelta.
inline constexpr double kLoopDelta = 0.05;

/// Incoming reception rate of node j in slot u: sum_i tau_i^u p_ij^u.
double incoming_rate(const StudyCase& sc, const EmissionRateMatrix& tau, const LinkProbTable& links, int j, int u);

/// Outgoing rate of each relay never exceeds its incoming rate.
bool check_flow_conservation(const StudyCase& sc, const EmissionRateMatrix& tau, const LinkProbTable& links);

/// A relay that emits in slot u and also has forwardable traffic arriving in u
/// cannot spend more than the whole slot doing both.
bool check_half_duplex(const StudyCase& sc, const EmissionRateMatrix& tau, const ForwardingMatrix& x,
                       const LinkProbTable& links);

/// tau_j^v equals the forwarded inflow for every relay slot, and is zero for
/// slots the relay is not assigned.
bool check_flow_consistency(const StudyCase& sc, const EmissionRateMatrix& tau, const ForwardingMatrix& x,
                            const LinkProbTable& links);

/// Sum of constraint excesses beyond tolerance; zero iff all three checks pass.
double constraint_violation(const StudyCase& sc, const EmissionRateMatrix& tau, const ForwardingMatrix& x,
                            const LinkProbTable& links);

struct GenomeBounds {
    std::vector<double> lower;
    std::vector<double> upper;
};

GenomeBounds genome_bounds(const StudyCase& sc, double d_sd);

struct Solution {
    int case_id = 1;
    double d_sd = 620.0;
    std::vector<Point> relay_positions;
    std::vector<double> free_probs; // effective values, in StudyCase::free_vars order
    Geometry geometry;
    EmissionRateMatrix tau;
    ForwardingMatrix forwarding;
    LinkProbTable links;
    bool feasible = true;
    double violation = 0.0;
    std::vector<std::size_t> clamped_genes; // genome indices pulled back into bounds
    bool loop_clamped = false;              // an inter-relay probability was capped

    [[nodiscard]] std::vector<double> genome() const;
};

/// Decodes a genome (relay x, y pairs then free forwarding probabilities).
/// Out-of-range genes are clamped; a configuration that still violates a
/// feasibility check is returned with feasible = false.
Solution decode_genome(std::span<const double> genome, const StudyCase& sc, const ChannelParams& channel,
                       double d_sd);

} // namespace relaybound
