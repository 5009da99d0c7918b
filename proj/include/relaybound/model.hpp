#pragma once

// Core data types shared by every module: node indexing, study cases,
// geometry and the three per-slot matrices (emission rates, forwarding
// probabilities, link probabilities).

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace relaybound {

// Node indexing is fixed: 0 = source, 1 = destination, 2.. = relays.
// Slots are 0-based internally; slot 0 is the source slot.
inline constexpr int kSource = 0;
inline constexpr int kDestination = 1;
constexpr int relay_node(int relay) { return 2 + relay; }
constexpr bool is_relay(int node) { return node >= 2; }

enum class Role { Source, Relay, Destination };

struct NodeId {
    int index = 0;
    Role role = Role::Source;
};

NodeId node_id(int index);

/// "S", "D", then "R" for a single relay or "A", "B" for two.
std::string node_name(int node, int relay_count);

enum class Topology { OneRelay, TwoRelay };

/// One free forwarding probability x_{from,to}^{in_slot,out_slot}.
struct ForwardVar {
    int from = 0;
    int to = 0;
    int in_slot = 0;
    int out_slot = 0;
    std::string name; // e.g. "x_SR_12" (1-based slots)
};

struct StudyCase {
    int id = 1;
    Topology topology = Topology::OneRelay;
    int slot_count = 2;
    std::vector<std::uint32_t> slot_mask; // per node, bit u set if the node may emit in slot u
    bool loop_allowed = false;
    std::vector<ForwardVar> free_vars;    // genome order after the relay coordinates

    [[nodiscard]] int relay_count() const { return topology == Topology::OneRelay ? 1 : 2; }
    [[nodiscard]] int node_count() const { return 2 + relay_count(); }
    [[nodiscard]] bool transmits(int node, int slot) const { return (slot_mask[node] >> slot) & 1U; }
    /// Slots in which the node is allowed to emit.
    [[nodiscard]] std::vector<int> slots_of(int node) const;
    /// (node, slot) pairs whose emission rate is forced to zero by the slot table.
    [[nodiscard]] std::vector<std::pair<int, int>> fixed_zero_vars() const;
    [[nodiscard]] std::size_t genome_length() const { return 2 * relay_count() + free_vars.size(); }
};

/// Rows of the study-case table. Throws std::invalid_argument outside 1..5.
StudyCase study_case(int id);

struct Point {
    double x = 0.0;
    double y = 0.0;
};

double distance(Point a, Point b);

/// Smallest distance used for channel computations (meters).
inline constexpr double kMinSeparation = 1e-3;

struct Geometry {
    double d_sd = 620.0;
    std::vector<Point> nodes; // indexed like nodes everywhere else

    /// Nodes closer than kMinSeparation are treated as kMinSeparation apart.
    [[nodiscard]] double distance(int i, int j) const;
};

Geometry make_geometry(double d_sd, std::span<const Point> relays);

/// Relay search area: the d_SD x d_SD square spanning the S-D segment.
struct SearchSquare {
    double x_min = 0.0;
    double x_max = 0.0;
    double y_min = 0.0;
    double y_max = 0.0;

    [[nodiscard]] bool contains(Point p) const
    {
        return p.x >= x_min && p.x <= x_max && p.y >= y_min && p.y <= y_max;
    }
};

SearchSquare search_square(double d_sd);

/// tau[node][slot]: expected emissions of a node per slot per frame.
class EmissionRateMatrix {
public:
    EmissionRateMatrix() = default;
    EmissionRateMatrix(int nodes, int slots) : nodes_(nodes), slots_(slots), v_(std::size_t(nodes * slots), 0.0) {}

    [[nodiscard]] double operator()(int node, int slot) const { return v_[std::size_t(node * slots_ + slot)]; }
    double& operator()(int node, int slot) { return v_[std::size_t(node * slots_ + slot)]; }
    [[nodiscard]] int nodes() const { return nodes_; }
    [[nodiscard]] int slots() const { return slots_; }

private:
    int nodes_ = 0;
    int slots_ = 0;
    std::vector<double> v_;
};

/// x[i][j][u][v]: probability that j forwards to slot v (next frame) a packet
/// received from i in slot u.
class ForwardingMatrix {
public:
    ForwardingMatrix() = default;
    ForwardingMatrix(int nodes, int slots)
        : nodes_(nodes), slots_(slots), v_(std::size_t(nodes * nodes * slots * slots), 0.0)
    {
    }

    [[nodiscard]] double operator()(int i, int j, int u, int v) const { return v_[index(i, j, u, v)]; }
    double& operator()(int i, int j, int u, int v) { return v_[index(i, j, u, v)]; }
    [[nodiscard]] int nodes() const { return nodes_; }
    [[nodiscard]] int slots() const { return slots_; }

private:
    [[nodiscard]] std::size_t index(int i, int j, int u, int v) const
    {
        return std::size_t(((i * nodes_ + j) * slots_ + u) * slots_ + v);
    }
    int nodes_ = 0;
    int slots_ = 0;
    std::vector<double> v_;
};

/// p[i][j][u]: probability that a packet emitted by i in slot u reaches j,
/// conditioned on j listening.
class LinkProbTable {
public:
    LinkProbTable() = default;
    LinkProbTable(int nodes, int slots) : nodes_(nodes), slots_(slots), v_(std::size_t(nodes * nodes * slots), 0.0) {}

    [[nodiscard]] double operator()(int i, int j, int u) const { return v_[std::size_t((i * nodes_ + j) * slots_ + u)]; }
    double& operator()(int i, int j, int u) { return v_[std::size_t((i * nodes_ + j) * slots_ + u)]; }
    [[nodiscard]] int nodes() const { return nodes_; }
    [[nodiscard]] int slots() const { return slots_; }

private:
    int nodes_ = 0;
    int slots_ = 0;
    std::vector<double> v_;
};

} // namespace relaybound
