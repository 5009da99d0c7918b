#include "relaybound/analysis.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace relaybound {

namespace {

double euclid(const std::vector<double>& a, const std::vector<double>& b)
{
    if (a.size() != b.size()) {
        throw std::invalid_argument("generational_distance: points of different dimension");
    }
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        s += (a[k] - b[k]) * (a[k] - b[k]);
    }
    return std::sqrt(s);
}

bool covers(const ParetoBound& a, const ParetoBound& b, double tol)
{
    for (const auto& pb : b.entries) {
        bool hit = false;
        for (const auto& pa : a.entries) {
            bool close = pa.point.size() == pb.point.size();
            for (std::size_t k = 0; close && k < pa.point.size(); ++k) {
                close = std::abs(pa.point[k] - pb.point[k]) <= tol;
            }
            if (close || dominates(pa.point, pb.point, a.senses)) {
                hit = true;
                break;
            }
        }
        if (!hit) {
            return false;
        }
    }
    return true;
}

} // namespace

GapReport generational_distance(const std::vector<std::vector<double>>& lower,
                                const std::vector<std::vector<double>>& upper, Pairing pairing)
{
    if (lower.empty() || upper.empty()) {
        throw std::invalid_argument("generational_distance: empty point set");
    }
    if (pairing == Pairing::Identity && lower.size() != upper.size()) {
        throw std::invalid_argument("generational_distance: identity pairing needs sets of equal size ("
                                    + std::to_string(lower.size()) + " vs " + std::to_string(upper.size()) + ")");
    }
    GapReport r;
    double sum = 0.0;
    for (std::size_t i = 0; i < lower.size(); ++i) {
        std::size_t best = i;
        double d = std::numeric_limits<double>::infinity();
        if (pairing == Pairing::Identity) {
            d = euclid(lower[i], upper[i]);
        } else {
            for (std::size_t j = 0; j < upper.size(); ++j) {
                const double dj = euclid(lower[i], upper[j]);
                if (dj < d) {
                    d = dj;
                    best = j;
                }
            }
        }
        r.distances.push_back(d);
        r.paired.push_back(best);
        sum += d * d;
    }
    r.gd = std::sqrt(sum) / double(lower.size());
    return r;
}

std::string to_string(SetRelation r)
{
    switch (r) {
    case SetRelation::Dominates:
        return "dominates";
    case SetRelation::DominatedBy:
        return "dominated by";
    case SetRelation::Equal:
        return "equal";
    case SetRelation::Incomparable:
        return "incomparable";
    }
    return "?";
}

SetRelation compare_sets(const ParetoBound& a, const ParetoBound& b, double tol)
{
    if (a.senses != b.senses) {
        throw std::invalid_argument("compare_sets: bounds live in different objective spaces");
    }
    const bool ab = covers(a, b, tol);
    const bool ba = covers(b, a, tol);
    if (ab && ba) {
        return SetRelation::Equal;
    }
    if (ab) {
        return SetRelation::Dominates;
    }
    if (ba) {
        return SetRelation::DominatedBy;
    }
    return SetRelation::Incomparable;
}

std::string bound_label(const ParetoBound& b) { return "sc" + std::to_string(b.case_id) + " " + to_string(b.kind); }

std::vector<BoundComparison> compare_bounds(const std::vector<ParetoBound>& bounds, double tol)
{
    std::vector<BoundComparison> out;
    for (std::size_t i = 0; i < bounds.size(); ++i) {
        for (std::size_t j = i + 1; j < bounds.size(); ++j) {
            out.push_back({bound_label(bounds[i]), bound_label(bounds[j]), compare_sets(bounds[i], bounds[j], tol)});
        }
    }
    return out;
}

} // namespace relaybound
