#pragma once

#include "relaybound/channel.hpp"
#include "relaybound/netmodel.hpp"

#include <random>
#include <vector>

namespace relaybound::testing {

inline const ChannelParams& calibrated(double d_sd = 620.0)
{
    static const ChannelParams base = calibrate(ChannelParams{});
    static ChannelParams p310 = [] {
        auto p = base;
        p.d_sd = 310.0;
        return p;
    }();
    return d_sd == 310.0 ? p310 : base;
}

/// Hand-built solution with prescribed link probabilities. Emission rates are
/// filled from the forwarding probabilities via flow consistency.
struct ManualTwoRelay {
    double p_sd = 0.0, p_sa = 0.0, p_sb = 0.0, p_ad = 0.0, p_bd = 0.0, p_ab = 0.0, p_ba = 0.0;
    double x_sa = 0.0, x_sb = 0.0, x_ab = 0.0, x_ba = 0.0;
};

inline Solution manual_two_relay(const StudyCase& sc, const ManualTwoRelay& m)
{
    constexpr int A = relay_node(0);
    constexpr int B = relay_node(1);
    const int sa = sc.slots_of(A).front();
    const int sb = sc.slots_of(B).front();
    Solution s;
    s.case_id = sc.id;
    s.relay_positions = {{310, 0}, {310, 0}};
    s.geometry = make_geometry(620, s.relay_positions);
    s.tau = EmissionRateMatrix(sc.node_count(), sc.slot_count);
    s.forwarding = ForwardingMatrix(sc.node_count(), sc.slot_count);
    s.links = LinkProbTable(sc.node_count(), sc.slot_count);
    s.tau(kSource, 0) = 1.0;
    s.links(kSource, kDestination, 0) = m.p_sd;
    s.links(kSource, A, 0) = m.p_sa;
    s.links(kSource, B, 0) = m.p_sb;
    s.links(A, kDestination, sa) = m.p_ad;
    s.links(B, kDestination, sb) = m.p_bd;
    s.links(A, B, sa) = m.p_ab;
    s.links(B, A, sb) = m.p_ba;
    s.forwarding(kSource, A, 0, sa) = m.x_sa;
    s.forwarding(kSource, B, 0, sb) = m.x_sb;
    if (sa != sb) {
        s.forwarding(A, B, sa, sb) = m.x_ab;
        s.forwarding(B, A, sb, sa) = m.x_ba;
    }
    const double qsa = m.p_sa * m.x_sa, qsb = m.p_sb * m.x_sb;
    const double qab = m.p_ab * s.forwarding(A, B, sa, sb), qba = m.p_ba * s.forwarding(B, A, sb, sa);
    const double loop = 1.0 - qab * qba;
    s.tau(A, sa) = (qsa + qsb * qba) / loop;
    s.tau(B, sb) = (qsb + qsa * qab) / loop;
    return s;
}

struct ManualOneRelay {
    double p_sd = 0.0, p_sr = 0.0, p_rd = 0.0, x = 0.0;
};

inline Solution manual_one_relay(const StudyCase& sc, const ManualOneRelay& m)
{
    constexpr int R = relay_node(0);
    const int sr = sc.slots_of(R).front();
    Solution s;
    s.case_id = sc.id;
    s.relay_positions = {{310, 0}};
    s.geometry = make_geometry(620, s.relay_positions);
    s.tau = EmissionRateMatrix(sc.node_count(), sc.slot_count);
    s.forwarding = ForwardingMatrix(sc.node_count(), sc.slot_count);
    s.links = LinkProbTable(sc.node_count(), sc.slot_count);
    s.tau(kSource, 0) = 1.0;
    s.links(kSource, kDestination, 0) = m.p_sd;
    s.links(kSource, R, 0) = m.p_sr;
    s.links(R, kDestination, sr) = m.p_rd;
    s.forwarding(kSource, R, 0, sr) = m.x;
    s.tau(R, sr) = m.p_sr * m.x;
    return s;
}

/// Uniform random genome inside the case bounds.
inline std::vector<double> random_genome(const StudyCase& sc, double d_sd, std::mt19937_64& rng)
{
    const auto b = genome_bounds(sc, d_sd);
    std::vector<double> g(b.lower.size());
    for (std::size_t k = 0; k < g.size(); ++k) {
        g[k] = std::uniform_real_distribution<double>(b.lower[k], b.upper[k])(rng);
    }
    return g;
}

} // namespace relaybound::testing
