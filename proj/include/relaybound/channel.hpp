#pragma once

// Link and channel probabilities.
//
// The reference packet-success curve is
//
//     SINR = P_T d^-a / (N0 + sum_k P_T d_k^-a)
//     bit success = 1 - Q(sqrt(2 SINR))
//     packet success = (bit success)^packet_bits
//
// with N0 calibrated so that an interference-free 310 m link succeeds with
// probability 0.504.

#include "relaybound/model.hpp"

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace relaybound {

struct ChannelParams {
    double tx_power_mw = 0.15;
    double pathloss_exponent = 3.0;
    double noise_floor_mw = 0.0; // <= 0 means "not calibrated yet"
    int packet_bits = 1024;
    double d_sd = 620.0;
};

struct Interferer {
    double distance = 0.0; // to the receiver, meters
    bool active = true;
};

/// Packet success probability for a link of length d under the given interferers.
/// Throws std::domain_error for d <= 0 or an uncalibrated noise floor.
double link_success(const ChannelParams& params, double d, std::span<const Interferer> interferers = {});

struct InterfererSubset {
    std::uint32_t mask = 0; // bit k set: interferer k active
    double weight = 0.0;
};

/// All 2^n activity patterns of independent interferers with the given
/// activity probabilities, with their probabilities (which sum to one).
std::vector<InterfererSubset> interferer_partition(std::span<const double> activity);

/// p_ij^u averaged over the activity of every other node allowed to emit in u.
/// Zero when i cannot emit in u or i == j.
double channel_probability(const ChannelParams& params, const StudyCase& sc, int i, int j, int u,
                           const EmissionRateMatrix& tau, const Geometry& geometry);

LinkProbTable link_table(const ChannelParams& params, const StudyCase& sc, const EmissionRateMatrix& tau,
                         const Geometry& geometry);

struct CalibrationTargets {
    double anchor_distance = 310.0;
    double anchor_probability = 0.504;
    double anchor_tolerance = 1e-4;
    double far_distance = 620.0;
    double far_max = 0.01;
    double near_distance = 155.0;
    double near_min = 0.99;
};

class CalibrationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Solves the noise floor by bisection so the anchor target is met, then
/// verifies the two remaining targets. A noise floor that already meets all
/// targets is returned unchanged. Throws CalibrationError naming the violated
/// target when the functional form cannot meet them.
ChannelParams calibrate(ChannelParams params, const CalibrationTargets& targets = {});

} // namespace relaybound
