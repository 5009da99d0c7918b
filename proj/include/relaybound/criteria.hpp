#pragma once

// Closed-form capacity / reliability / delay / energy criteria for the one-
// and two-relay topologies, the derived capacity- and reliability-achieving
// criteria, and a path-enumeration oracle that sums the same quantities walk
// by walk.

#include "relaybound/model.hpp"
#include "relaybound/netmodel.hpp"

#include <limits>

namespace relaybound {

struct ObjectiveVector {
    double f_C = 0.0; // copies received per source packet
    double f_R = 0.0; // probability at least one copy arrives
    double f_D = 0.0; // mean hops of received copies
    double f_E = 0.0; // emissions per source packet
    bool f_R_available = true;
};

struct DerivedCriteria {
    double fr_D = std::numeric_limits<double>::infinity();
    double fr_E = std::numeric_limits<double>::infinity();
    double fc_D = std::numeric_limits<double>::infinity();
    double fc_E = std::numeric_limits<double>::infinity();
};

/// Delay reported when no copy can arrive (0/0): the shortest relay path.
inline constexpr double kDelayAtZeroCapacity = 2.0;

ObjectiveVector eval_one_relay(const Solution& sol, const StudyCase& sc);

/// Throws std::domain_error when the inter-relay loop product is >= 1.
ObjectiveVector eval_two_relay(const Solution& sol, const StudyCase& sc);

/// Dispatches on the topology.
ObjectiveVector evaluate(const Solution& sol, const StudyCase& sc);

/// Zero denominators yield +infinity for the affected pair.
DerivedCriteria derived_criteria(const ObjectiveVector& obj);

struct TailBounds {
    double capacity = 0.0;   // on f_C
    double delay_mass = 0.0; // on f_D * f_C
    double energy = 0.0;     // on f_E
    double geometric = 0.0;  // q^floor((h_max-2)/2) / (1-q)
};

struct OracleResult {
    ObjectiveVector objectives;
    double delay_mass = 0.0; // sum over paths of hops * probability
    std::size_t walks = 0;   // relay walks enumerated
    TailBounds tail;
};

inline constexpr int kDefaultHopBound = 400;

/// Enumerates every S->D path of at most h_max hops (direct link plus relay
/// walks) and accumulates success, delay and relay-emission mass per path.
/// Throws std::invalid_argument for h_max < 2.
OracleResult path_oracle(const Solution& sol, const StudyCase& sc, int h_max = kDefaultHopBound);

} // namespace relaybound
