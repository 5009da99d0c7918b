#pragma once

// Link success for every (transmitter set, emitter, receiver) of a decoded
// solution, so per-slot draws under realized interference are table lookups.

#include "relaybound/channel.hpp"
#include "relaybound/netmodel.hpp"

#include <cstdint>
#include <vector>

namespace relaybound::detail {

class RealizedTable {
public:
    RealizedTable(const Solution& sol, int nodes, const ChannelParams& channel) : nodes_(nodes), table_(std::size_t(1) << nodes)
    {
        for (std::uint32_t mask = 0; mask < (1U << nodes_); ++mask) {
            auto& t = table_[mask];
            t.assign(std::size_t(nodes_ * nodes_), 0.0);
            for (int i = 0; i < nodes_; ++i) {
                if (!((mask >> i) & 1U)) {
                    continue;
                }
                for (int j = 0; j < nodes_; ++j) {
                    if (j == i || ((mask >> j) & 1U)) {
                        continue;
                    }
                    std::vector<Interferer> others;
                    for (int k = 0; k < nodes_; ++k) {
                        if (k != i && ((mask >> k) & 1U)) {
                            others.push_back({sol.geometry.distance(k, j), true});
                        }
                    }
                    t[std::size_t(i * nodes_ + j)] = link_success(channel, sol.geometry.distance(i, j), others);
                }
            }
        }
    }

    /// Success of i -> j when exactly the nodes in `mask` emit.
    [[nodiscard]] double operator()(std::uint32_t mask, int i, int j) const
    {
        return table_[mask][std::size_t(i * nodes_ + j)];
    }

private:
    int nodes_;
    std::vector<std::vector<double>> table_;
};

} // namespace relaybound::detail
