#include "relaybound/coding.hpp"

#include "relaybound/rng.hpp"
#include "realized_table.hpp"

#include <bit>
#include <cmath>
#include <stdexcept>

namespace relaybound {

CoeffVector CoeffVector::from_string(const std::string& bits)
{
    CoeffVector v(int(bits.size()));
    for (std::size_t i = 0; i < bits.size(); ++i) {
        if (bits[i] == '1') {
            v.set(int(i));
        } else if (bits[i] != '0') {
            throw std::invalid_argument("CoeffVector: expected '0' or '1' in \"" + bits + "\"");
        }
    }
    return v;
}

void CoeffVector::set(int i, bool v)
{
    auto& w = words_[std::size_t(i / 64)];
    const std::uint64_t bit = std::uint64_t(1) << (i % 64);
    w = v ? (w | bit) : (w & ~bit);
}

CoeffVector& CoeffVector::operator^=(const CoeffVector& other)
{
    if (other.k_ != k_) {
        throw std::invalid_argument("CoeffVector: length mismatch");
    }
    for (std::size_t w = 0; w < words_.size(); ++w) {
        words_[w] ^= other.words_[w];
    }
    return *this;
}

bool CoeffVector::is_zero() const
{
    for (auto w : words_) {
        if (w != 0) {
            return false;
        }
    }
    return true;
}

int CoeffVector::weight() const
{
    int n = 0;
    for (auto w : words_) {
        n += std::popcount(w);
    }
    return n;
}

int CoeffVector::lowest() const
{
    for (std::size_t w = 0; w < words_.size(); ++w) {
        if (words_[w] != 0) {
            return int(w * 64) + std::countr_zero(words_[w]);
        }
    }
    return -1;
}

std::string CoeffVector::to_string() const
{
    std::string s(std::size_t(k_), '0');
    for (int i = 0; i < k_; ++i) {
        if (get(i)) {
            s[std::size_t(i)] = '1';
        }
    }
    return s;
}

CoeffVector rl_encode(int k, std::mt19937_64& rng)
{
    if (k < 1) {
        throw std::invalid_argument("rl_encode: K must be >= 1");
    }
    CoeffVector v(k);
    const int tail = k % 64;
    do {
        for (auto& w : v.words()) {
            w = rng();
        }
        if (tail != 0) {
            v.words().back() &= (std::uint64_t(1) << tail) - 1;
        }
    } while (v.is_zero());
    return v;
}

CodedPacket make_source_packet(const CoeffVector& coeffs, std::span<const std::uint64_t> fragments)
{
    if (fragments.size() != std::size_t(coeffs.size())) {
        throw std::invalid_argument("make_source_packet: fragment count does not match K");
    }
    CodedPacket p;
    p.coeffs = coeffs;
    for (int i = 0; i < coeffs.size(); ++i) {
        if (coeffs.get(i)) {
            p.payload ^= fragments[std::size_t(i)];
        }
    }
    return p;
}

Decoder::Decoder(int k) : k_(k), pivots_(std::size_t(k))
{
    if (k < 1) {
        throw std::invalid_argument("Decoder: K must be >= 1");
    }
}

DecodeResult Decoder::add(const CodedPacket& p)
{
    if (p.coeffs.size() != k_) {
        throw std::invalid_argument("Decoder: packet has " + std::to_string(p.coeffs.size())
                                    + " coefficients, expected " + std::to_string(k_));
    }
    ++received_;
    CoeffVector v = p.coeffs;
    std::uint64_t payload = p.payload;
    for (int c = v.lowest(); c >= 0; c = v.lowest()) {
        const auto& row = pivots_[std::size_t(c)];
        if (!row) {
            pivots_[std::size_t(c)] = CodedPacket{std::move(v), payload, p.hops, p.born_frame};
            ++rank_;
            return complete() ? DecodeResult::Complete : DecodeResult::Innovative;
        }
        v ^= row->coeffs;
        payload ^= row->payload;
    }
    return DecodeResult::Redundant;
}

std::vector<std::uint64_t> Decoder::recover() const
{
    if (!complete()) {
        throw std::logic_error("Decoder::recover: rank " + std::to_string(rank_) + " < K = " + std::to_string(k_));
    }
    // Rows are upper triangular with unit diagonal; eliminate upward from the
    // last pivot.
    std::vector<CodedPacket> rows;
    rows.reserve(std::size_t(k_));
    for (const auto& r : pivots_) {
        rows.push_back(*r);
    }
    std::vector<std::uint64_t> out(static_cast<std::size_t>(k_));
    for (int c = k_ - 1; c >= 0; --c) {
        auto& row = rows[std::size_t(c)];
        for (int j = c + 1; j < k_; ++j) {
            if (row.coeffs.get(j)) {
                row.coeffs ^= rows[std::size_t(j)].coeffs;
                row.payload ^= rows[std::size_t(j)].payload;
            }
        }
        out[std::size_t(c)] = row.payload;
    }
    return out;
}

RelayMemory::RelayMemory(std::size_t capacity) : capacity_(capacity)
{
    if (capacity == 0) {
        throw std::invalid_argument("RelayMemory: capacity must be >= 1");
    }
}

void RelayMemory::push(const CodedPacket& p)
{
    if (items_.size() == capacity_) {
        items_.pop_front();
    }
    items_.push_back(p);
}

namespace {

CodedPacket with_fallback(CodedPacket combined, const CodedPacket& p)
{
    return combined.coeffs.is_zero() ? p : combined;
}

} // namespace

CodedPacket combine_rxor(const CodedPacket& p, const RelayMemory& mem)
{
    CodedPacket out = p;
    const auto& items = mem.items();
    // The trigger is the newest entry; every older one is folded in.
    for (std::size_t i = 0; i + 1 < items.size(); ++i) {
        out.coeffs ^= items[i].coeffs;
        out.payload ^= items[i].payload;
    }
    return with_fallback(std::move(out), p);
}

CodedPacket combine_rlnc(const CodedPacket& p, const RelayMemory& mem, std::mt19937_64& rng)
{
    CodedPacket out = p;
    const auto& items = mem.items();
    for (std::size_t i = 0; i + 1 < items.size(); ++i) {
        if (rng() >> 63) {
            out.coeffs ^= items[i].coeffs;
            out.payload ^= items[i].payload;
        }
    }
    return with_fallback(std::move(out), p);
}

std::string to_string(Strategy s)
{
    switch (s) {
    case Strategy::None:
        return "none";
    case Strategy::RXor:
        return "rxor";
    case Strategy::Rlnc:
        return "rlnc";
    }
    return "?";
}

Strategy parse_strategy(const std::string& name)
{
    for (auto s : {Strategy::None, Strategy::RXor, Strategy::Rlnc}) {
        if (to_string(s) == name) {
            return s;
        }
    }
    throw std::invalid_argument("unknown coding strategy '" + name + "' (expected none, rxor or rlnc)");
}

std::vector<ScheduledEmission> relay_step(RelayMemory& mem, const CodedPacket& received,
                                          std::span<const ForwardChoice> choices, Strategy strategy,
                                          std::mt19937_64& rng, bool literal_threshold)
{
    mem.push(received);
    double total = 0.0;
    for (const auto& c : choices) {
        total += c.prob;
    }
    std::vector<ScheduledEmission> out;
    if (!(total > 0.0)) {
        return out;
    }
    CodedPacket p = strategy == Strategy::RXor ? combine_rxor(received, mem)
        : strategy == Strategy::Rlnc           ? combine_rlnc(received, mem, rng)
                                               : received;
    p.hops = received.hops + 1;
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    if (literal_threshold) {
        const double r = u01(rng);
        for (const auto& c : choices) {
            if (c.prob <= r) {
                out.push_back({c.slot, p});
            }
        }
        return out;
    }
    for (const auto& c : choices) {
        if (c.prob > 0.0 && u01(rng) < c.prob) {
            out.push_back({c.slot, p});
        }
    }
    return out;
}

CodingMetrics simulate_coded(const Solution& sol, const StudyCase& sc, const ChannelParams& channel, int k,
                             Strategy strategy, const CodingConfig& cfg)
{
    if (k < 1) {
        throw std::invalid_argument("simulate_coded: K must be >= 1");
    }
    if (!sol.feasible) {
        throw std::invalid_argument("simulate_coded: solution is infeasible");
    }
    const int nodes = sc.node_count();
    const int slots = sc.slot_count;
    std::optional<detail::RealizedTable> realized;
    if (cfg.interference == InterferenceMode::Realized) {
        realized.emplace(sol, nodes, channel);
    }
    auto rng = stream_rng(cfg.seed, 0xc0de);
    std::uniform_real_distribution<double> u01(0.0, 1.0);

    std::vector<std::uint64_t> fragments(static_cast<std::size_t>(k));
    for (auto& f : fragments) {
        f = rng();
    }
    const std::size_t memory = strategy == Strategy::RXor ? std::size_t(std::max(cfg.xor_depth, 1))
        : strategy == Strategy::Rlnc                      ? std::size_t(k)
                                                          : 1;
    std::vector<RelayMemory> mem;
    for (int n = 0; n < nodes; ++n) {
        mem.emplace_back(memory);
    }
    // Forwarding choices per (sender, receiver, slot).
    std::vector<std::vector<ForwardChoice>> choices(std::size_t(nodes * nodes * slots));
    for (int i = 0; i < nodes; ++i) {
        for (int j = 2; j < nodes; ++j) {
            for (int u = 0; u < slots; ++u) {
                for (int v = 0; v < slots; ++v) {
                    if (sc.transmits(j, v) && sol.forwarding(i, j, u, v) > 0.0) {
                        choices[std::size_t((i * nodes + j) * slots + u)].push_back({v, sol.forwarding(i, j, u, v)});
                    }
                }
            }
        }
    }

    auto idx = [slots](int n, int v) { return std::size_t(n * slots + v); };
    std::vector<std::vector<CodedPacket>> current(std::size_t(nodes * slots));
    std::vector<std::vector<CodedPacket>> next(std::size_t(nodes * slots));
    Decoder decoder(k);
    CodingMetrics m;
    long hop_sum = 0;
    std::vector<std::pair<int, CodedPacket>> emissions;

    for (long frame = 0; !decoder.complete(); ++frame) {
        if (frame >= cfg.frame_limit) {
            throw std::runtime_error("simulate_coded: decoding incomplete after " + std::to_string(cfg.frame_limit)
                                     + " frames (rank " + std::to_string(decoder.rank()) + " of "
                                     + std::to_string(k) + "); the configuration cannot reach the destination");
        }
        m.frames = frame + 1;
        for (int u = 0; u < slots && !decoder.complete(); ++u) {
            emissions.clear();
            std::uint32_t mask = 0;
            if (u == 0) {
                auto p = make_source_packet(rl_encode(k, rng), fragments);
                p.hops = 1;
                p.born_frame = frame;
                emissions.emplace_back(kSource, std::move(p));
                mask |= 1U << kSource;
                ++m.n_tx_source;
            }
            for (int n = 2; n < nodes; ++n) {
                auto& buf = current[idx(n, u)];
                if (buf.empty()) {
                    continue;
                }
                mask |= 1U << n;
                m.n_tx_relays += long(buf.size());
                for (auto& p : buf) {
                    emissions.emplace_back(n, std::move(p));
                }
                buf.clear();
            }
            for (const auto& [i, p] : emissions) {
                for (int j = 1; j < nodes; ++j) {
                    if (j == i || ((mask >> j) & 1U)) {
                        continue;
                    }
                    const auto& offer = choices[std::size_t((i * nodes + j) * slots + u)];
                    if (j != kDestination && offer.empty()) {
                        continue;
                    }
                    const double ps = realized ? (*realized)(mask, i, j) : sol.links(i, j, u);
                    if (!(u01(rng) < ps)) {
                        continue;
                    }
                    if (j == kDestination) {
                        if (decoder.complete()) {
                            continue;
                        }
                        ++m.n_rx_before_decode;
                        hop_sum += p.hops;
                        decoder.add(p);
                        continue;
                    }
                    for (auto& s : relay_step(mem[std::size_t(j)], p, offer, strategy, rng, cfg.literal_threshold)) {
                        next[idx(j, s.slot)].push_back(std::move(s.packet));
                    }
                }
            }
        }
        std::swap(current, next);
        for (auto& b : next) {
            b.clear();
        }
    }
    if (decoder.recover() != fragments) {
        throw std::logic_error("simulate_coded: decoded fragments differ from the source fragments");
    }

    m.completed = true;
    m.excess = m.n_rx_before_decode - k;
    m.overhead_pct = double(m.excess) / double(k) * 100.0;
    m.mean_hops = double(hop_sum) / double(m.n_rx_before_decode);
    double penalty = 1.0;
    if (cfg.coefficient_overhead) {
        if (cfg.payload_bits <= k) {
            throw std::invalid_argument("simulate_coded: payload must be longer than K coefficient bits");
        }
        penalty = double(cfg.payload_bits) / double(cfg.payload_bits - k);
    }
    m.fc_D = m.mean_hops * double(m.n_tx_source) / double(k) * penalty;
    m.fc_E = double(m.n_tx_source + m.n_tx_relays) / double(k) * penalty;
    return m;
}

long fountain_trial(int k, std::mt19937_64& rng)
{
    Decoder d(k);
    CodedPacket p;
    while (!d.complete()) {
        p.coeffs = rl_encode(k, rng);
        d.add(p);
    }
    return d.received();
}

CodingMetrics mean_metrics(const std::vector<CodingMetrics>& runs)
{
    if (runs.empty()) {
        throw std::invalid_argument("mean_metrics: no runs");
    }
    CodingMetrics m;
    double tx_s = 0.0;
    double tx_r = 0.0;
    double rx = 0.0;
    double ex = 0.0;
    double fr = 0.0;
    for (const auto& r : runs) {
        m.fc_D += r.fc_D;
        m.fc_E += r.fc_E;
        m.overhead_pct += r.overhead_pct;
        m.mean_hops += r.mean_hops;
        tx_s += double(r.n_tx_source);
        tx_r += double(r.n_tx_relays);
        rx += double(r.n_rx_before_decode);
        ex += double(r.excess);
        fr += double(r.frames);
    }
    const double n = double(runs.size());
    m.fc_D /= n;
    m.fc_E /= n;
    m.overhead_pct /= n;
    m.mean_hops /= n;
    m.n_tx_source = std::lround(tx_s / n);
    m.n_tx_relays = std::lround(tx_r / n);
    m.n_rx_before_decode = std::lround(rx / n);
    m.excess = std::lround(ex / n);
    m.frames = std::lround(fr / n);
    m.completed = true;
    return m;
}

} // namespace relaybound
