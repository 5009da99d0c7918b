#pragma once

// GF(2) random-linear fountain coding at the source, R-XOR / RLNC
// recombination at relays, an incremental decoder at the destination, and
// the coded transmission experiment built on top of them.
//
// Payloads are synthetic 64-bit words carried alongside the coefficients so
// decoding can be checked end to end.

#include "relaybound/channel.hpp"
#include "relaybound/netmodel.hpp"
#include "relaybound/simulator.hpp"

#include <cstdint>
#include <deque>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace relaybound {

class CoeffVector {
public:
    CoeffVector() = default;
    explicit CoeffVector(int k) : k_(k), words_(std::size_t((k + 63) / 64), 0) {}
    /// From a string of '0' / '1', position 0 first.
    static CoeffVector from_string(const std::string& bits);

    [[nodiscard]] int size() const { return k_; }
    [[nodiscard]] bool get(int i) const { return (words_[std::size_t(i / 64)] >> (i % 64)) & 1U; }
    void set(int i, bool v = true);
    CoeffVector& operator^=(const CoeffVector& other);
    [[nodiscard]] bool is_zero() const;
    [[nodiscard]] int weight() const;
    /// Index of the lowest set bit, -1 for the zero vector.
    [[nodiscard]] int lowest() const;
    [[nodiscard]] std::string to_string() const;
    friend bool operator==(const CoeffVector&, const CoeffVector&) = default;

    std::vector<std::uint64_t>& words() { return words_; }
    [[nodiscard]] const std::vector<std::uint64_t>& words() const { return words_; }

private:
    int k_ = 0;
    std::vector<std::uint64_t> words_;
};

struct CodedPacket {
    CoeffVector coeffs;
    std::uint64_t payload = 0; // XOR of the selected fragments' payloads
    int hops = 0;              // emissions so far, including the one carrying it
    long born_frame = 0;
};

/// Each bit is 1 with probability 1/2; the zero vector is redrawn.
CoeffVector rl_encode(int k, std::mt19937_64& rng);

/// Source packet for the given coefficients over the fragment payloads.
CodedPacket make_source_packet(const CoeffVector& coeffs, std::span<const std::uint64_t> fragments);

enum class DecodeResult { Innovative, Redundant, Complete };

class Decoder {
public:
    explicit Decoder(int k);

    DecodeResult add(const CodedPacket& p);
    [[nodiscard]] int rank() const { return rank_; }
    [[nodiscard]] long received() const { return received_; }
    [[nodiscard]] bool complete() const { return rank_ == k_; }
    [[nodiscard]] int size() const { return k_; }
    /// Back-substitutes and returns the K fragment payloads. Throws
    /// std::logic_error before completion.
    [[nodiscard]] std::vector<std::uint64_t> recover() const;

private:
    int k_;
    int rank_ = 0;
    long received_ = 0;
    std::vector<std::optional<CodedPacket>> pivots_; // row whose lowest set bit is the index
};

class RelayMemory {
public:
    explicit RelayMemory(std::size_t capacity);

    /// Appends, evicting the oldest entry when full.
    void push(const CodedPacket& p);
    [[nodiscard]] std::size_t size() const { return items_.size(); }
    [[nodiscard]] std::size_t capacity() const { return capacity_; }
    [[nodiscard]] const std::deque<CodedPacket>& items() const { return items_; }

private:
    std::size_t capacity_;
    std::deque<CodedPacket> items_;
};

/// p is the newest entry of mem. XOR of p with every other stored packet;
/// a zero result falls back to p.
CodedPacket combine_rxor(const CodedPacket& p, const RelayMemory& mem);

/// Starts from p and XORs in every other stored packet with probability 1/2;
/// a zero result falls back to p.
CodedPacket combine_rlnc(const CodedPacket& p, const RelayMemory& mem, std::mt19937_64& rng);

enum class Strategy { None, RXor, Rlnc };

std::string to_string(Strategy s);
/// "none", "rxor", "rlnc"; throws std::invalid_argument otherwise.
Strategy parse_strategy(const std::string& name);

struct ScheduledEmission {
    int slot = 0;
    CodedPacket packet;
};

struct ForwardChoice {
    int slot = 0;
    double prob = 0.0; // forwarding probability toward this slot of the next frame
};

/// Relay reaction to a reception. Stores the packet, then schedules the
/// (recombined) packet in each offered slot with its probability, drawn
/// independently per slot. With `literal_threshold`, a single uniform draw r
/// schedules every slot whose probability is <= r instead. Nothing is
/// scheduled when all probabilities are zero.
std::vector<ScheduledEmission> relay_step(RelayMemory& mem, const CodedPacket& received,
                                          std::span<const ForwardChoice> choices, Strategy strategy,
                                          std::mt19937_64& rng, bool literal_threshold = false);

inline constexpr int kDefaultXorDepth = 8;
inline constexpr int kPayloadBits = 20480;
inline constexpr long kCodedFrameLimit = 1000000;

struct CodingConfig {
    std::uint64_t seed = 1;
    InterferenceMode interference = InterferenceMode::Realized;
    int xor_depth = kDefaultXorDepth; // R for R-XOR
    bool literal_threshold = false;
    int payload_bits = kPayloadBits;
    bool coefficient_overhead = true;
    long frame_limit = kCodedFrameLimit;
};

struct CodingMetrics {
    double fc_D = 0.0;
    double fc_E = 0.0;
    double overhead_pct = 0.0;
    double mean_hops = 0.0;
    long n_tx_source = 0;
    long n_tx_relays = 0;
    long n_rx_before_decode = 0;
    long excess = 0;
    long frames = 0;
    bool completed = false;
};

/// Throws std::runtime_error when decoding has not completed after
/// cfg.frame_limit frames (the configuration cannot deliver K equations).
CodingMetrics simulate_coded(const Solution& sol, const StudyCase& sc, const ChannelParams& channel, int k,
                             Strategy strategy, const CodingConfig& cfg);

/// Packets needed to decode over a lossless direct link.
long fountain_trial(int k, std::mt19937_64& rng);

/// Mean of several runs (counts averaged as reals).
CodingMetrics mean_metrics(const std::vector<CodingMetrics>& runs);

} // namespace relaybound
