#include "relaybound/model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace relaybound {

NodeId node_id(int index)
{
    if (index < 0) {
        throw std::invalid_argument("negative node index");
    }
    if (index == kSource) {
        return {index, Role::Source};
    }
    if (index == kDestination) {
        return {index, Role::Destination};
    }
    return {index, Role::Relay};
}

std::string node_name(int node, int relay_count)
{
    if (node == kSource) {
        return "S";
    }
    if (node == kDestination) {
        return "D";
    }
    if (relay_count == 1) {
        return "R";
    }
    return std::string(1, char('A' + (node - 2)));
}

std::vector<int> StudyCase::slots_of(int node) const
{
    std::vector<int> out;
    for (int u = 0; u < slot_count; ++u) {
        if (transmits(node, u)) {
            out.push_back(u);
        }
    }
    return out;
}

std::vector<std::pair<int, int>> StudyCase::fixed_zero_vars() const
{
    std::vector<std::pair<int, int>> out;
    for (int n = 0; n < node_count(); ++n) {
        for (int u = 0; u < slot_count; ++u) {
            if (!transmits(n, u)) {
                out.emplace_back(n, u);
            }
        }
    }
    return out;
}

namespace {

ForwardVar var(int from, int to, int in_slot, int out_slot, int relays)
{
    return {from, to, in_slot, out_slot,
            "x_" + node_name(from, relays) + node_name(to, relays) + "_" + std::to_string(in_slot + 1)
                + std::to_string(out_slot + 1)};
}

} // namespace

StudyCase study_case(int id)
{
    constexpr int S = kSource;
    constexpr int D = kDestination;
    constexpr int A = relay_node(0);
    constexpr int B = relay_node(1);

    StudyCase sc;
    sc.id = id;
    switch (id) {
    case 1:
        sc.topology = Topology::OneRelay;
        sc.slot_count = 2;
        sc.slot_mask = {0b01, 0b00, 0b10};
        sc.free_vars = {var(S, A, 0, 1, 1)};
        break;
    case 2:
        sc.topology = Topology::OneRelay;
        sc.slot_count = 1;
        sc.slot_mask = {0b1, 0b0, 0b1};
        sc.free_vars = {var(S, A, 0, 0, 1)};
        break;
    case 3:
    case 4:
        sc.topology = Topology::TwoRelay;
        sc.slot_count = 3;
        sc.slot_mask = {0b001, 0b000, 0b010, 0b100};
        sc.loop_allowed = id == 4;
        sc.free_vars = {var(S, A, 0, 1, 2), var(S, B, 0, 2, 2)};
        if (id == 4) {
            sc.free_vars.push_back(var(A, B, 1, 2, 2));
            sc.free_vars.push_back(var(B, A, 2, 1, 2));
        }
        break;
    case 5:
        sc.topology = Topology::TwoRelay;
        sc.slot_count = 2;
        sc.slot_mask = {0b01, 0b00, 0b10, 0b10};
        sc.free_vars = {var(S, A, 0, 1, 2), var(S, B, 0, 1, 2)};
        break;
    default:
        throw std::invalid_argument("study case id must be in 1..5, got " + std::to_string(id));
    }
    (void)D;
    return sc;
}

double distance(Point a, Point b) { return std::hypot(a.x - b.x, a.y - b.y); }

double Geometry::distance(int i, int j) const
{
    return std::max(relaybound::distance(nodes[i], nodes[j]), kMinSeparation);
}

Geometry make_geometry(double d_sd, std::span<const Point> relays)
{
    Geometry g;
    g.d_sd = d_sd;
    g.nodes.push_back({0.0, 0.0});
    g.nodes.push_back({d_sd, 0.0});
    g.nodes.insert(g.nodes.end(), relays.begin(), relays.end());
    return g;
}

SearchSquare search_square(double d_sd) { return {0.0, d_sd, -d_sd / 2.0, d_sd / 2.0}; }

} // namespace relaybound
