#pragma once

// Frame-driven stochastic simulation of the slotted protocol with
// probabilistic forwarding, and the RMSE comparison against analytic fronts.

#include "relaybound/channel.hpp"
#include "relaybound/netmodel.hpp"
#include "relaybound/pareto.hpp"

#include <cstdint>
#include <map>
#include <vector>

namespace relaybound {

enum class InterferenceMode { Realized, Averaged };

struct SimConfig {
    long frames = 10000;
    std::uint64_t seed = 1;
    InterferenceMode interference = InterferenceMode::Realized;
    /// Packets a relay may hold per outgoing slot; 0 = unbounded. When full,
    /// the newest packet overwrites the oldest.
    int buffer_capacity = 0;
    /// After the last source packet, keep running frames (without new
    /// packets) until relay buffers are empty, at most this many.
    long drain_limit = 100000;
    bool record_events = false;
};

struct SimEvent {
    enum class Kind { Tx, Rx };
    Kind kind = Kind::Tx;
    long frame = 0;
    int slot = 0;
    int node = 0;      // emitter for Tx, receiver for Rx
    int peer = -1;     // emitter for Rx
    long packet = 0;   // source frame that created the packet
    int hops = 0;      // hops travelled before this emission / on arrival
};

struct SimMetrics {
    double f_C = 0.0;
    double f_D = 0.0; // NaN when nothing arrived
    double f_E = 0.0;
    double f_R = 0.0;
    std::map<int, long> delay_histogram; // hops -> copies received at D
    long frames = 0;                     // source packets sent
    long n_rx = 0;
    long n_distinct = 0;
    long n_tx_source = 0;
    long n_tx_relays = 0;
    long drain_frames = 0;
    std::vector<SimEvent> events;
};

/// Throws std::invalid_argument for frames < 1 or an infeasible solution.
SimMetrics simulate(const Solution& sol, const StudyCase& sc, const ChannelParams& channel, const SimConfig& cfg);

/// Pools several runs of the same solution (counts are summed).
SimMetrics pool_metrics(const std::vector<SimMetrics>& runs);

struct RmseReport {
    double f_C = 0.0;
    double f_D = 0.0;
    double f_E = 0.0;
    // Entries left out per axis because the analytic value is zero or the
    // simulated value is undefined.
    std::size_t skipped_C = 0;
    std::size_t skipped_D = 0;
    std::size_t skipped_E = 0;
    std::size_t n = 0;
};

/// Entries whose expected number of arrivals (f_C times simulated frames) is
/// below this cannot be resolved by the simulator; their capacity and delay
/// are skipped.
inline constexpr double kMinExpectedArrivals = 10.0;

/// (1/N) sqrt(sum_i ((f(i) - f~(i)) / f(i))^2) per axis over aligned entries,
/// N being the number of bound entries. Throws std::invalid_argument when the
/// sizes differ.
RmseReport rmse(const ParetoBound& analytic, const std::vector<SimMetrics>& simulated,
                double min_expected_arrivals = kMinExpectedArrivals);

} // namespace relaybound
