#include "relaybound/channel.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace relaybound {

namespace {

double received_power(const ChannelParams& p, double d) { return p.tx_power_mw * std::pow(d, -p.pathloss_exponent); }

} // namespace

double link_success(const ChannelParams& params, double d, std::span<const Interferer> interferers)
{
    if (!(d > 0.0)) {
        throw std::domain_error("link_success: distance must be positive");
    }
    if (!(params.noise_floor_mw > 0.0)) {
        throw std::domain_error("link_success: channel is not calibrated (noise floor <= 0)");
    }
    double noise = params.noise_floor_mw;
    for (const auto& k : interferers) {
        if (k.active) {
            // A co-located interferer saturates the receiver.
            noise += k.distance > 0.0 ? received_power(params, k.distance) : HUGE_VAL;
        }
    }
    const double sinr = received_power(params, d) / noise;
    const double ber = 0.5 * std::erfc(std::sqrt(sinr));
    return std::exp(double(params.packet_bits) * std::log1p(-ber));
}

std::vector<InterfererSubset> interferer_partition(std::span<const double> activity)
{
    const std::size_t n = activity.size();
    std::vector<InterfererSubset> out;
    out.reserve(std::size_t(1) << n);
    for (std::uint32_t mask = 0; mask < (1U << n); ++mask) {
        double w = 1.0;
        for (std::size_t k = 0; k < n; ++k) {
            const double a = std::clamp(activity[k], 0.0, 1.0);
            w *= (mask >> k) & 1U ? a : 1.0 - a;
        }
        out.push_back({mask, w});
    }
    return out;
}

double channel_probability(const ChannelParams& params, const StudyCase& sc, int i, int j, int u,
                           const EmissionRateMatrix& tau, const Geometry& geometry)
{
    if (i == j || !sc.transmits(i, u)) {
        return 0.0;
    }
    std::vector<int> others;
    std::vector<double> activity;
    for (int k = 0; k < sc.node_count(); ++k) {
        if (k != i && k != j && sc.transmits(k, u) && tau(k, u) > 0.0) {
            others.push_back(k);
            activity.push_back(tau(k, u));
        }
    }
    const double d = geometry.distance(i, j);
    double p = 0.0;
    std::vector<Interferer> set(others.size());
    for (const auto& subset : interferer_partition(activity)) {
        if (subset.weight == 0.0) {
            continue;
        }
        for (std::size_t k = 0; k < others.size(); ++k) {
            set[k] = {geometry.distance(others[k], j), bool((subset.mask >> k) & 1U)};
        }
        p += subset.weight * link_success(params, d, set);
    }
    return p;
}

LinkProbTable link_table(const ChannelParams& params, const StudyCase& sc, const EmissionRateMatrix& tau,
                         const Geometry& geometry)
{
    LinkProbTable table(sc.node_count(), sc.slot_count);
    for (int u = 0; u < sc.slot_count; ++u) {
        for (int i = 0; i < sc.node_count(); ++i) {
            if (!sc.transmits(i, u)) {
                continue;
            }
            for (int j = 0; j < sc.node_count(); ++j) {
                // The source never listens.
                if (j != i && j != kSource) {
                    table(i, j, u) = channel_probability(params, sc, i, j, u, tau, geometry);
                }
            }
        }
    }
    return table;
}

namespace {

std::string check_targets(const ChannelParams& p, const CalibrationTargets& t)
{
    std::ostringstream why;
    const double anchor = link_success(p, t.anchor_distance);
    const double far = link_success(p, t.far_distance);
    const double near = link_success(p, t.near_distance);
    if (std::abs(anchor - t.anchor_probability) > t.anchor_tolerance) {
        why << "p(" << t.anchor_distance << " m) = " << anchor << ", target " << t.anchor_probability << " +/- "
            << t.anchor_tolerance << "; ";
    }
    if (far > t.far_max) {
        why << "p(" << t.far_distance << " m) = " << far << " exceeds " << t.far_max << "; ";
    }
    if (near < t.near_min) {
        why << "p(" << t.near_distance << " m) = " << near << " is below " << t.near_min << "; ";
    }
    return why.str();
}

} // namespace

ChannelParams calibrate(ChannelParams params, const CalibrationTargets& targets)
{
    if (params.noise_floor_mw > 0.0 && check_targets(params, targets).empty()) {
        return params;
    }
    // p(anchor) is decreasing in the noise floor; bisect in log space around
    // the received power at the anchor distance.
    const double ref = received_power(params, targets.anchor_distance);
    double lo = std::log(ref * 1e-6);
    double hi = std::log(ref * 1e6);
    auto anchor_at = [&](double log_noise) {
        ChannelParams q = params;
        q.noise_floor_mw = std::exp(log_noise);
        return link_success(q, targets.anchor_distance);
    };
    if (anchor_at(lo) < targets.anchor_probability || anchor_at(hi) > targets.anchor_probability) {
        throw CalibrationError("calibration: anchor target p(" + std::to_string(targets.anchor_distance)
                               + " m) is not bracketed by the noise-floor search range");
    }
    for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (anchor_at(mid) > targets.anchor_probability) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    params.noise_floor_mw = std::exp(0.5 * (lo + hi));
    if (auto why = check_targets(params, targets); !why.empty()) {
        throw CalibrationError("calibration failed: " + why);
    }
    return params;
}

} // namespace relaybound
