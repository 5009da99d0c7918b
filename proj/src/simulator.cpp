#include "relaybound/simulator.hpp"

#include "relaybound/rng.hpp"
#include "realized_table.hpp"

#include <cmath>
#include <deque>
#include <limits>
#include <optional>
#include <stdexcept>

namespace relaybound {

namespace {

struct Packet {
    long id = 0;
    int hops = 0;
};

} // namespace

SimMetrics simulate(const Solution& sol, const StudyCase& sc, const ChannelParams& channel, const SimConfig& cfg)
{
    if (cfg.frames < 1) {
        throw std::invalid_argument("simulate: frames must be >= 1");
    }
    if (!sol.feasible) {
        throw std::invalid_argument("simulate: solution is infeasible");
    }
    const int nodes = sc.node_count();
    const int slots = sc.slot_count;
    const auto& x = sol.forwarding;
    std::optional<detail::RealizedTable> realized;
    if (cfg.interference == InterferenceMode::Realized) {
        realized.emplace(sol, nodes, channel);
    }

    auto rng = stream_rng(cfg.seed);
    std::uniform_real_distribution<double> u01(0.0, 1.0);

    // Outgoing buffers per (node, slot) for this frame and the next.
    auto idx = [slots](int n, int v) { return std::size_t(n * slots + v); };
    std::vector<std::deque<Packet>> current(std::size_t(nodes * slots));
    std::vector<std::deque<Packet>> next(std::size_t(nodes * slots));
    std::vector<char> arrived(std::size_t(cfg.frames), 0);

    SimMetrics m;
    m.frames = cfg.frames;
    long hop_sum = 0;
    auto log = [&](SimEvent e) {
        if (cfg.record_events) {
            m.events.push_back(e);
        }
    };

    std::vector<std::pair<int, Packet>> emissions; // (emitter, packet)
    for (long frame = 0;; ++frame) {
        const bool injecting = frame < cfg.frames;
        if (!injecting) {
            bool empty = true;
            for (const auto& b : current) {
                empty = empty && b.empty();
            }
            if (empty || m.drain_frames >= cfg.drain_limit) {
                break;
            }
            ++m.drain_frames;
        }
        for (int u = 0; u < slots; ++u) {
            emissions.clear();
            std::uint32_t mask = 0;
            if (u == 0 && injecting) {
                emissions.push_back({kSource, Packet{frame, 0}});
                mask |= 1U << kSource;
                ++m.n_tx_source;
            }
            for (int n = 2; n < nodes; ++n) {
                auto& buf = current[idx(n, u)];
                if (buf.empty()) {
                    continue;
                }
                mask |= 1U << n;
                for (const auto& p : buf) {
                    emissions.push_back({n, p});
                    ++m.n_tx_relays;
                }
                buf.clear();
            }
            for (const auto& [i, p] : emissions) {
                log({SimEvent::Kind::Tx, frame, u, i, -1, p.id, p.hops});
                for (int j = 1; j < nodes; ++j) {
                    // Half duplex: a node emitting in this slot hears nothing.
                    if (j == i || ((mask >> j) & 1U)) {
                        continue;
                    }
                    if (j != kDestination) {
                        bool forwards = false;
                        for (int v = 0; v < slots; ++v) {
                            forwards = forwards || x(i, j, u, v) > 0.0;
                        }
                        if (!forwards) {
                            continue; // overheard, discarded without a draw
                        }
                    }
                    const double ps = realized ? (*realized)(mask, i, j) : sol.links(i, j, u);
                    if (!(u01(rng) < ps)) {
                        continue;
                    }
                    const Packet got{p.id, p.hops + 1};
                    log({SimEvent::Kind::Rx, frame, u, j, i, got.id, got.hops});
                    if (j == kDestination) {
                        ++m.n_rx;
                        hop_sum += got.hops;
                        ++m.delay_histogram[got.hops];
                        if (!arrived[std::size_t(got.id)]) {
                            arrived[std::size_t(got.id)] = 1;
                            ++m.n_distinct;
                        }
                        continue;
                    }
                    for (int v = 0; v < slots; ++v) {
                        const double xv = x(i, j, u, v);
                        if (xv > 0.0 && sc.transmits(j, v) && u01(rng) < xv) {
                            auto& out = next[idx(j, v)];
                            if (cfg.buffer_capacity > 0 && int(out.size()) >= cfg.buffer_capacity) {
                                out.pop_front();
                            }
                            out.push_back(got);
                        }
                    }
                }
            }
        }
        std::swap(current, next);
    }

    const double frames = double(cfg.frames);
    m.f_C = double(m.n_rx) / frames;
    m.f_D = m.n_rx > 0 ? double(hop_sum) / double(m.n_rx) : std::numeric_limits<double>::quiet_NaN();
    m.f_E = double(m.n_tx_source + m.n_tx_relays) / frames;
    m.f_R = double(m.n_distinct) / frames;
    return m;
}

SimMetrics pool_metrics(const std::vector<SimMetrics>& runs)
{
    SimMetrics m;
    long hop_sum = 0;
    for (const auto& r : runs) {
        m.frames += r.frames;
        m.n_rx += r.n_rx;
        m.n_distinct += r.n_distinct;
        m.n_tx_source += r.n_tx_source;
        m.n_tx_relays += r.n_tx_relays;
        m.drain_frames += r.drain_frames;
        for (const auto& [h, c] : r.delay_histogram) {
            m.delay_histogram[h] += c;
            hop_sum += long(h) * c;
        }
    }
    if (m.frames == 0) {
        throw std::invalid_argument("pool_metrics: no runs");
    }
    const double frames = double(m.frames);
    m.f_C = double(m.n_rx) / frames;
    m.f_D = m.n_rx > 0 ? double(hop_sum) / double(m.n_rx) : std::numeric_limits<double>::quiet_NaN();
    m.f_E = double(m.n_tx_source + m.n_tx_relays) / frames;
    m.f_R = double(m.n_distinct) / frames;
    return m;
}

RmseReport rmse(const ParetoBound& analytic, const std::vector<SimMetrics>& simulated, double min_expected_arrivals)
{
    if (analytic.entries.size() != simulated.size()) {
        throw std::invalid_argument("rmse: " + std::to_string(analytic.entries.size()) + " bound entries but "
                                    + std::to_string(simulated.size()) + " simulated metrics");
    }
    RmseReport r;
    r.n = simulated.size();
    if (r.n == 0) {
        return r;
    }
    double sc = 0.0;
    double sd = 0.0;
    double se = 0.0;
    auto add = [](double f, double g, double& sum, std::size_t& skipped) {
        if (f == 0.0 || !std::isfinite(f) || !std::isfinite(g)) {
            ++skipped;
            return;
        }
        sum += (f - g) * (f - g) / (f * f);
    };
    for (std::size_t i = 0; i < r.n; ++i) {
        const auto& o = analytic.entries[i].objectives;
        if (o.f_C * double(simulated[i].frames) < min_expected_arrivals) {
            ++r.skipped_C;
            ++r.skipped_D;
        } else {
            add(o.f_C, simulated[i].f_C, sc, r.skipped_C);
            add(o.f_D, simulated[i].f_D, sd, r.skipped_D);
        }
        add(o.f_E, simulated[i].f_E, se, r.skipped_E);
    }
    const double n = double(r.n);
    r.f_C = std::sqrt(sc) / n;
    r.f_D = std::sqrt(sd) / n;
    r.f_E = std::sqrt(se) / n;
    return r;
}

} // namespace relaybound
