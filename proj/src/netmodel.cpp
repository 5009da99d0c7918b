#include "relaybound/netmodel.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace relaybound {

namespace {

void require_shape(const StudyCase& sc, const EmissionRateMatrix& tau, const LinkProbTable& links)
{
    if (tau.nodes() != sc.node_count() || tau.slots() != sc.slot_count || links.nodes() != sc.node_count()
        || links.slots() != sc.slot_count) {
        throw std::invalid_argument("matrix dimensions do not match study case " + std::to_string(sc.id));
    }
}

void require_shape(const StudyCase& sc, const ForwardingMatrix& x)
{
    if (x.nodes() != sc.node_count() || x.slots() != sc.slot_count) {
        throw std::invalid_argument("forwarding matrix dimensions do not match study case " + std::to_string(sc.id));
    }
}

double conservation_excess(const StudyCase& sc, const EmissionRateMatrix& tau, const LinkProbTable& links)
{
    double excess = 0.0;
    for (int j = 2; j < sc.node_count(); ++j) {
        double in = 0.0;
        double out = 0.0;
        for (int u = 0; u < sc.slot_count; ++u) {
            in += incoming_rate(sc, tau, links, j, u);
            out += tau(j, u);
        }
        excess += std::max(0.0, out - in - kFeasibilityTolerance);
    }
    return excess;
}

// Inflow of j in slot u that j may forward; overheard traffic it would
// discard does not occupy the slot.
double forwardable_inflow(const StudyCase& sc, const EmissionRateMatrix& tau, const ForwardingMatrix& x,
                          const LinkProbTable& links, int j, int u)
{
    double in = 0.0;
    for (int i = 0; i < sc.node_count(); ++i) {
        if (i == j) {
            continue;
        }
        bool forwards = false;
        for (int v = 0; v < sc.slot_count; ++v) {
            forwards = forwards || x(i, j, u, v) > 0.0;
        }
        if (forwards) {
            in += tau(i, u) * links(i, j, u);
        }
    }
    return in;
}

double half_duplex_excess(const StudyCase& sc, const EmissionRateMatrix& tau, const ForwardingMatrix& x,
                          const LinkProbTable& links)
{
    double excess = 0.0;
    for (int j = 2; j < sc.node_count(); ++j) {
        for (int u = 0; u < sc.slot_count; ++u) {
            const double in = forwardable_inflow(sc, tau, x, links, j, u);
            if (tau(j, u) > 0.0 && in > 0.0) {
                excess += std::max(0.0, in + tau(j, u) - 1.0 - kFeasibilityTolerance);
            }
        }
    }
    return excess;
}

double consistency_excess(const StudyCase& sc, const EmissionRateMatrix& tau, const ForwardingMatrix& x,
                          const LinkProbTable& links)
{
    double excess = 0.0;
    for (int j = 2; j < sc.node_count(); ++j) {
        for (int v = 0; v < sc.slot_count; ++v) {
            double inflow = 0.0;
            for (int i = 0; i < sc.node_count(); ++i) {
                for (int u = 0; u < sc.slot_count; ++u) {
                    inflow += tau(i, u) * links(i, j, u) * x(i, j, u, v);
                }
            }
            const double target = sc.transmits(j, v) ? inflow : 0.0;
            excess += std::max(0.0, std::abs(target - tau(j, v)) - kFeasibilityTolerance);
            if (!sc.transmits(j, v)) {
                excess += std::max(0.0, inflow - kFeasibilityTolerance);
            }
        }
    }
    return excess;
}

// Dense solve with partial pivoting; returns false when singular.
bool solve_linear(std::vector<double> a, std::vector<double>& b, std::size_t n)
{
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t piv = c;
        for (std::size_t r = c + 1; r < n; ++r) {
            if (std::abs(a[r * n + c]) > std::abs(a[piv * n + c])) {
                piv = r;
            }
        }
        if (std::abs(a[piv * n + c]) < 1e-14) {
            return false;
        }
        if (piv != c) {
            for (std::size_t k = 0; k < n; ++k) {
                std::swap(a[c * n + k], a[piv * n + k]);
            }
            std::swap(b[c], b[piv]);
        }
        for (std::size_t r = 0; r < n; ++r) {
            if (r == c) {
                continue;
            }
            const double f = a[r * n + c] / a[c * n + c];
            if (f == 0.0) {
                continue;
            }
            for (std::size_t k = c; k < n; ++k) {
                a[r * n + k] -= f * a[c * n + k];
            }
            b[r] -= f * b[c];
        }
    }
    for (std::size_t c = 0; c < n; ++c) {
        b[c] /= a[c * n + c];
    }
    return true;
}

} // namespace

double incoming_rate(const StudyCase& sc, const EmissionRateMatrix& tau, const LinkProbTable& links, int j, int u)
{
    double in = 0.0;
    for (int i = 0; i < sc.node_count(); ++i) {
        if (i != j) {
            in += tau(i, u) * links(i, j, u);
        }
    }
    return in;
}

bool check_flow_conservation(const StudyCase& sc, const EmissionRateMatrix& tau, const LinkProbTable& links)
{
    require_shape(sc, tau, links);
    return conservation_excess(sc, tau, links) == 0.0;
}

bool check_half_duplex(const StudyCase& sc, const EmissionRateMatrix& tau, const ForwardingMatrix& x,
                       const LinkProbTable& links)
{
    require_shape(sc, tau, links);
    require_shape(sc, x);
    return half_duplex_excess(sc, tau, x, links) == 0.0;
}

bool check_flow_consistency(const StudyCase& sc, const EmissionRateMatrix& tau, const ForwardingMatrix& x,
                            const LinkProbTable& links)
{
    require_shape(sc, tau, links);
    require_shape(sc, x);
    return consistency_excess(sc, tau, x, links) == 0.0;
}

double constraint_violation(const StudyCase& sc, const EmissionRateMatrix& tau, const ForwardingMatrix& x,
                            const LinkProbTable& links)
{
    require_shape(sc, tau, links);
    require_shape(sc, x);
    return conservation_excess(sc, tau, links) + half_duplex_excess(sc, tau, x, links)
        + consistency_excess(sc, tau, x, links);
}

GenomeBounds genome_bounds(const StudyCase& sc, double d_sd)
{
    const auto sq = search_square(d_sd);
    GenomeBounds b;
    for (int r = 0; r < sc.relay_count(); ++r) {
        b.lower.push_back(sq.x_min);
        b.upper.push_back(sq.x_max);
        b.lower.push_back(sq.y_min);
        b.upper.push_back(sq.y_max);
    }
    for (std::size_t k = 0; k < sc.free_vars.size(); ++k) {
        b.lower.push_back(0.0);
        b.upper.push_back(1.0);
    }
    return b;
}

std::vector<double> Solution::genome() const
{
    std::vector<double> g;
    for (const auto& p : relay_positions) {
        g.push_back(p.x);
        g.push_back(p.y);
    }
    g.insert(g.end(), free_probs.begin(), free_probs.end());
    return g;
}

Solution decode_genome(std::span<const double> genome, const StudyCase& sc, const ChannelParams& channel,
                       double d_sd)
{
    if (genome.size() != sc.genome_length()) {
        throw std::invalid_argument("genome length " + std::to_string(genome.size()) + " does not match study case "
                                    + std::to_string(sc.id) + " (expected " + std::to_string(sc.genome_length())
                                    + ")");
    }
    const auto bounds = genome_bounds(sc, d_sd);
    std::vector<double> g(genome.begin(), genome.end());
    Solution sol;
    sol.case_id = sc.id;
    sol.d_sd = d_sd;
    for (std::size_t k = 0; k < g.size(); ++k) {
        if (std::isnan(g[k]) || g[k] < bounds.lower[k]) {
            g[k] = bounds.lower[k];
            sol.clamped_genes.push_back(k);
        } else if (g[k] > bounds.upper[k]) {
            g[k] = bounds.upper[k];
            sol.clamped_genes.push_back(k);
        }
    }
    const int relays = sc.relay_count();
    for (int r = 0; r < relays; ++r) {
        sol.relay_positions.push_back({g[std::size_t(2 * r)], g[std::size_t(2 * r + 1)]});
    }
    std::vector<double> probs(g.begin() + 2 * relays, g.end());
    sol.geometry = make_geometry(d_sd, sol.relay_positions);

    const int nodes = sc.node_count();
    const int slots = sc.slot_count;

    // Unknown emission rates: every (relay, assigned slot).
    std::vector<std::pair<int, int>> unknowns;
    for (int j = 2; j < nodes; ++j) {
        for (int v : sc.slots_of(j)) {
            unknowns.emplace_back(j, v);
        }
    }
    const std::size_t n = unknowns.size();

    EmissionRateMatrix tau(nodes, slots);
    tau(kSource, 0) = 1.0;
    ForwardingMatrix x(nodes, slots);
    LinkProbTable links;
    bool solvable = true;

    // Link probabilities depend on emission rates only through interference
    // in shared slots; iterate to the fixed point (two passes in practice).
    for (int it = 0; it < 100; ++it) {
        links = link_table(channel, sc, tau, sol.geometry);
        std::vector<double> eff = probs;
        bool capped = false;
        for (std::size_t k = 0; k < sc.free_vars.size(); ++k) {
            const auto& fv = sc.free_vars[k];
            if (is_relay(fv.from) && is_relay(fv.to)) {
                const double p = links(fv.from, fv.to, fv.in_slot);
                if (p > 0.0 && p * eff[k] > 1.0 - kLoopDelta) {
                    eff[k] = (1.0 - kLoopDelta) / p;
                    capped = true;
                }
            }
        }
        x = ForwardingMatrix(nodes, slots);
        for (std::size_t k = 0; k < sc.free_vars.size(); ++k) {
            const auto& fv = sc.free_vars[k];
            x(fv.from, fv.to, fv.in_slot, fv.out_slot) = eff[k];
        }

        // tau_j^v - sum_{relay i,u} tau_i^u p_ij^u x_ij^uv = tau_S^1 p_Sj^1 x_Sj^1v
        std::vector<double> a(n * n, 0.0);
        std::vector<double> b(n, 0.0);
        for (std::size_t r = 0; r < n; ++r) {
            const auto [j, v] = unknowns[r];
            a[r * n + r] = 1.0;
            b[r] = tau(kSource, 0) * links(kSource, j, 0) * x(kSource, j, 0, v);
            for (std::size_t c = 0; c < n; ++c) {
                const auto [i, u] = unknowns[c];
                if (i != j) {
                    a[r * n + c] -= links(i, j, u) * x(i, j, u, v);
                }
            }
        }
        solvable = solve_linear(a, b, n);
        double delta = 0.0;
        if (solvable) {
            for (std::size_t r = 0; r < n; ++r) {
                const auto [j, v] = unknowns[r];
                delta = std::max(delta, std::abs(tau(j, v) - b[r]));
                tau(j, v) = b[r];
            }
        }
        sol.free_probs = eff;
        sol.loop_clamped = capped;
        if (!solvable || (it > 0 && delta < 1e-15)) {
            break;
        }
    }
    links = link_table(channel, sc, tau, sol.geometry);

    sol.tau = tau;
    sol.forwarding = x;
    sol.links = links;
    if (!solvable) {
        sol.feasible = false;
        sol.violation = HUGE_VAL;
        return sol;
    }
    sol.violation = constraint_violation(sc, tau, x, links);
    sol.feasible = sol.violation == 0.0;
    return sol;
}

} // namespace relaybound
