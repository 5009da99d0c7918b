#include "relaybound/criteria.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace relaybound {

ObjectiveVector eval_one_relay(const Solution& sol, const StudyCase& sc)
{
    if (sc.topology != Topology::OneRelay) {
        throw std::invalid_argument("eval_one_relay: study case " + std::to_string(sc.id) + " is not a 1-relay case");
    }
    constexpr int R = relay_node(0);
    const auto& p = sol.links;
    const auto& x = sol.forwarding;
    const double tau_s = sol.tau(kSource, 0);
    const double direct = tau_s * p(kSource, kDestination, 0);

    double relayed = 0.0;
    double relay_emissions = 0.0;
    double miss = 1.0 - direct;
    for (int u = 0; u < sc.slot_count; ++u) {
        const double forwarded = tau_s * p(kSource, R, 0) * x(kSource, R, 0, u);
        const double path = forwarded * p(R, kDestination, u);
        relayed += path;
        relay_emissions += forwarded;
        miss *= 1.0 - path;
    }

    ObjectiveVector obj;
    obj.f_C = direct + relayed;
    obj.f_R = 1.0 - miss;
    obj.f_D = obj.f_C > 0.0 ? (2.0 * relayed + direct) / obj.f_C : kDelayAtZeroCapacity;
    obj.f_E = tau_s + relay_emissions;
    obj.f_R_available = true;
    return obj;
}

namespace {

struct TwoRelayTerms {
    double p_sd, p_ad, p_bd;
    double q_sa, q_sb, q_ab, q_ba;
};

TwoRelayTerms two_relay_terms(const Solution& sol, const StudyCase& sc)
{
    constexpr int A = relay_node(0);
    constexpr int B = relay_node(1);
    const auto& p = sol.links;
    const auto& x = sol.forwarding;
    const int sa = sc.slots_of(A).front();
    const int sb = sc.slots_of(B).front();
    return {p(kSource, kDestination, 0),
            p(A, kDestination, sa),
            p(B, kDestination, sb),
            p(kSource, A, 0) * x(kSource, A, 0, sa),
            p(kSource, B, 0) * x(kSource, B, 0, sb),
            p(A, B, sa) * x(A, B, sa, sb),
            p(B, A, sb) * x(B, A, sb, sa)};
}

} // namespace

ObjectiveVector eval_two_relay(const Solution& sol, const StudyCase& sc)
{
    if (sc.topology != Topology::TwoRelay) {
        throw std::invalid_argument("eval_two_relay: study case " + std::to_string(sc.id) + " is not a 2-relay case");
    }
    const auto t = two_relay_terms(sol, sc);
    const double tau_s = sol.tau(kSource, 0);
    const double loop = t.q_ab * t.q_ba;
    if (loop >= 1.0) {
        throw std::domain_error("eval_two_relay: inter-relay loop product is >= 1, series diverges");
    }
    const double geo = 1.0 / (1.0 - loop);

    const double e = (t.q_sa + t.q_sb * t.q_ba) * t.p_ad;
    const double f = (t.q_sb + t.q_sa * t.q_ab) * t.p_bd;
    const double a = t.p_ad * (t.q_sb * t.q_ba * (3.0 - loop) + 2.0 * t.q_sa);
    const double b = t.p_bd * (t.q_sa * t.q_ab * (3.0 - loop) + 2.0 * t.q_sb);

    ObjectiveVector obj;
    obj.f_C = tau_s * t.p_sd + tau_s * geo * (e + f);
    const double delay_mass = tau_s * geo * geo * (a + b) + tau_s * t.p_sd;
    obj.f_D = obj.f_C > 0.0 ? delay_mass / obj.f_C : kDelayAtZeroCapacity;
    obj.f_E = tau_s + tau_s * geo * (t.q_sa + t.q_sb * t.q_ba + t.q_sa * t.q_ab + t.q_sb);
    if (sc.loop_allowed) {
        obj.f_R = std::numeric_limits<double>::quiet_NaN();
        obj.f_R_available = false;
    } else {
        obj.f_R = 1.0 - (1.0 - tau_s * t.p_sd) * (1.0 - tau_s * t.q_sa * t.p_ad) * (1.0 - tau_s * t.q_sb * t.p_bd);
        obj.f_R_available = true;
    }
    return obj;
}

ObjectiveVector evaluate(const Solution& sol, const StudyCase& sc)
{
    return sc.topology == Topology::OneRelay ? eval_one_relay(sol, sc) : eval_two_relay(sol, sc);
}

DerivedCriteria derived_criteria(const ObjectiveVector& obj)
{
    DerivedCriteria d;
    if (obj.f_R_available && obj.f_R > 0.0) {
        d.fr_D = obj.f_D / obj.f_R;
        d.fr_E = obj.f_E / obj.f_R;
    }
    if (obj.f_C > 0.0) {
        const double cap = std::min(obj.f_C, 1.0);
        d.fc_D = obj.f_D / cap;
        d.fc_E = obj.f_E / cap;
    }
    return d;
}

namespace {

struct Walk {
    int relay;
    int slot;   // slot in which the relay re-emits
    double mass; // probability that this emission happens
};

} // namespace

OracleResult path_oracle(const Solution& sol, const StudyCase& sc, int h_max)
{
    if (h_max < 2) {
        throw std::invalid_argument("path_oracle: h_max must be >= 2");
    }
    const auto& p = sol.links;
    const auto& x = sol.forwarding;
    const int nodes = sc.node_count();
    const int slots = sc.slot_count;
    const double tau_s = sol.tau(kSource, 0);

    OracleResult out;
    const double direct = tau_s * p(kSource, kDestination, 0);
    double capacity = direct;
    double delay_mass = direct;
    double energy = tau_s;
    double miss = 1.0 - direct;

    std::vector<Walk> layer;
    for (int r = 2; r < nodes; ++r) {
        for (int v = 0; v < slots; ++v) {
            const double m = tau_s * p(kSource, r, 0) * x(kSource, r, 0, v);
            if (m > 0.0) {
                layer.push_back({r, v, m});
            }
        }
    }

    // Relay depth m means the copy reaches D after m + 1 hops.
    std::vector<double> depth_mass;
    for (int depth = 1; depth <= h_max - 1 && !layer.empty(); ++depth) {
        double mass_here = 0.0;
        std::vector<Walk> next;
        for (const auto& w : layer) {
            out.walks += 1;
            mass_here += w.mass;
            energy += w.mass;
            const double arrive = w.mass * p(w.relay, kDestination, w.slot);
            capacity += arrive;
            delay_mass += double(depth + 1) * arrive;
            miss *= 1.0 - arrive;
            for (int r = 2; r < nodes; ++r) {
                if (r == w.relay) {
                    continue;
                }
                for (int v = 0; v < slots; ++v) {
                    const double m = w.mass * p(w.relay, r, w.slot) * x(w.relay, r, w.slot, v);
                    if (m > 0.0) {
                        next.push_back({r, v, m});
                    }
                }
            }
        }
        depth_mass.push_back(mass_here);
        if (depth == h_max - 1) {
            layer = std::move(next);
            break;
        }
        layer = std::move(next);
    }

    // Two-step return ratio of the inter-relay loop.
    double q = 0.0;
    if (sc.relay_count() == 2) {
        q = 1.0;
        for (int r = 2; r < nodes; ++r) {
            double rho = 0.0;
            for (int u : sc.slots_of(r)) {
                for (int r2 = 2; r2 < nodes; ++r2) {
                    for (int v = 0; v < slots; ++v) {
                        if (r2 != r) {
                            rho = std::max(rho, p(r, r2, u) * x(r, r2, u, v));
                        }
                    }
                }
            }
            q *= rho;
        }
    }
    if (!layer.empty()) {
        const int m_last = h_max - 1;
        const double frontier = depth_mass.back() + (depth_mass.size() >= 2 ? depth_mass[depth_mass.size() - 2] : 0.0);
        double p_max = 0.0;
        for (int r = 2; r < nodes; ++r) {
            for (int u = 0; u < slots; ++u) {
                p_max = std::max(p_max, p(r, kDestination, u));
            }
        }
        if (q >= 1.0) {
            out.tail = {HUGE_VAL, HUGE_VAL, HUGE_VAL, HUGE_VAL};
        } else {
            const double g = q / (1.0 - q);
            out.tail.energy = frontier * g;
            out.tail.capacity = p_max * out.tail.energy;
            out.tail.delay_mass = p_max * frontier * (double(m_last + 1) * g + 2.0 * q / ((1.0 - q) * (1.0 - q)));
        }
    }
    out.tail.geometric = q < 1.0 ? std::pow(q, std::floor((h_max - 2) / 2.0)) / (1.0 - q) : HUGE_VAL;

    out.delay_mass = delay_mass;
    out.objectives.f_C = capacity;
    out.objectives.f_D = capacity > 0.0 ? delay_mass / capacity : kDelayAtZeroCapacity;
    out.objectives.f_E = energy;
    if (sc.loop_allowed) {
        out.objectives.f_R = std::numeric_limits<double>::quiet_NaN();
        out.objectives.f_R_available = false;
    } else {
        out.objectives.f_R = 1.0 - miss;
    }
    return out;
}

} // namespace relaybound
