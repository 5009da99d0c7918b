#pragma once

// Cross-bound comparison: generational distance between a lower and an
// upper point set, and set-level dominance between bounds.

#include "relaybound/pareto.hpp"

#include <string>
#include <vector>

namespace relaybound {

enum class Pairing {
    Nearest,  // each lower point to its closest upper point
    Identity, // lower[i] to upper[i]; sizes must match
};

struct GapReport {
    double gd = 0.0;
    std::vector<double> distances;     // d_i per lower point
    std::vector<std::size_t> paired;   // upper index used for each lower point
};

/// GD = (1/N) sqrt(sum_i d_i^2), N the number of lower points, d_i Euclidean.
/// Throws std::invalid_argument for empty sets, ragged points, or an
/// identity pairing between sets of different sizes.
GapReport generational_distance(const std::vector<std::vector<double>>& lower,
                                const std::vector<std::vector<double>>& upper, Pairing pairing = Pairing::Nearest);

enum class SetRelation { Dominates, DominatedBy, Equal, Incomparable };

std::string to_string(SetRelation r);

/// A covers B when every point of B is dominated by, or equal within `tol`
/// on every axis to, some point of A. A dominates B when A covers B and B
/// does not cover A; mutual cover is Equal.
SetRelation compare_sets(const ParetoBound& a, const ParetoBound& b, double tol = 1e-6);

struct BoundComparison {
    std::string left;  // label such as "sc4 B_c_opt"
    std::string right;
    SetRelation relation = SetRelation::Incomparable;
};

std::string bound_label(const ParetoBound& b);

/// Every unordered pair of the given bounds (which must share an objective
/// space), in input order.
std::vector<BoundComparison> compare_bounds(const std::vector<ParetoBound>& bounds, double tol = 1e-6);

} // namespace relaybound
