#include "helpers.hpp"

#include "relaybound/channel.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace relaybound;
using relaybound::testing::calibrated;

namespace {

// Independent oracle: plain bisection on the noise floor in linear space,
// evaluating the success curve from scratch.
double oracle_p(double noise, double d)
{
    const double sinr = 0.15 * std::pow(d, -3.0) / noise;
    const double bit = 1.0 - 0.5 * std::erfc(std::sqrt(sinr));
    return std::pow(bit, 1024.0);
}

double oracle_noise()
{
    double lo = 1e-14;
    double hi = 1e-6;
    for (int i = 0; i < 300; ++i) {
        const double mid = 0.5 * (lo + hi);
        (oracle_p(mid, 310.0) > 0.504 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

} // namespace

TEST_CASE("calibration hits the anchor points")
{
    const auto& p = calibrated();
    CHECK(std::abs(link_success(p, 310.0) - 0.504) <= 1e-4);
    CHECK(link_success(p, 620.0) <= 0.01);
    CHECK(link_success(p, 155.0) >= 0.99);
    CHECK(p.noise_floor_mw == doctest::Approx(oracle_noise()).epsilon(1e-6));
}

TEST_CASE("calibration leaves a calibrated channel unchanged")
{
    const auto& p = calibrated();
    const auto again = calibrate(p);
    CHECK(again.noise_floor_mw == p.noise_floor_mw);
}

TEST_CASE("distance-independent channel cannot be calibrated")
{
    ChannelParams flat;
    flat.pathloss_exponent = 0.0;
    try {
        calibrate(flat);
        FAIL("expected CalibrationError");
    } catch (const CalibrationError& e) {
        CHECK(std::string(e.what()).find("155") != std::string::npos);
    }
}

TEST_CASE("link_success domain errors")
{
    CHECK_THROWS_AS(link_success(calibrated(), 0.0), std::domain_error);
    CHECK_THROWS_AS(link_success(ChannelParams{}, 100.0), std::domain_error);
}

TEST_CASE("link_success is monotone in distance and interference")
{
    const auto& p = calibrated();
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> dist(1.0, 900.0);
    for (int k = 0; k < 2000; ++k) {
        const double d1 = dist(rng);
        const double d2 = dist(rng);
        const double near = std::min(d1, d2);
        const double far = std::max(d1, d2);
        CHECK(link_success(p, near) >= link_success(p, far));
        const double k1 = dist(rng);
        const double k2 = dist(rng);
        const Interferer close[] = {{std::min(k1, k2), true}};
        const Interferer away[] = {{std::max(k1, k2), true}};
        CHECK(link_success(p, near, close) <= link_success(p, near, away));
        CHECK(link_success(p, near, away) <= link_success(p, near));
    }
}

TEST_CASE("interferer subsets partition probability")
{
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int k = 0; k < 500; ++k) {
        std::vector<double> act(std::size_t(k % 6));
        for (auto& a : act) {
            a = u(rng);
        }
        double total = 0.0;
        for (const auto& s : interferer_partition(act)) {
            total += s.weight;
        }
        CHECK(std::abs(total - 1.0) <= 1e-12);
    }
}

TEST_CASE("channel_probability examples")
{
    const auto& p = calibrated();
    SUBCASE("case 1 links are interference free")
    {
        const auto sc = study_case(1);
        const Point relays[] = {{250, 40}};
        const auto g = make_geometry(620, relays);
        EmissionRateMatrix tau(sc.node_count(), sc.slot_count);
        tau(kSource, 0) = 1.0;
        tau(relay_node(0), 1) = 0.7;
        CHECK(channel_probability(p, sc, kSource, relay_node(0), 0, tau, g)
              == link_success(p, g.distance(kSource, relay_node(0))));
        CHECK(channel_probability(p, sc, relay_node(0), kSource, 0, tau, g) == 0.0);
    }
    SUBCASE("silent interferers collapse to the interference-free value")
    {
        StudyCase all_in_one = study_case(5);
        all_in_one.slot_count = 1;
        all_in_one.slot_mask = {0b1, 0b0, 0b1, 0b1};
        const Point relays[] = {{300, 50}, {500, -20}};
        const auto g = make_geometry(620, relays);
        EmissionRateMatrix tau(all_in_one.node_count(), 1);
        tau(relay_node(0), 0) = 1.0;
        // Two potential interferers at the destination (S and B), both silent.
        CHECK(channel_probability(p, all_in_one, relay_node(0), kDestination, 0, tau, g)
              == link_success(p, g.distance(relay_node(0), kDestination)));
    }
    SUBCASE("symmetric links in a shared slot")
    {
        const auto sc = study_case(5);
        const Point relays[] = {{300, 50}, {420, -80}};
        const auto g = make_geometry(620, relays);
        EmissionRateMatrix tau(sc.node_count(), sc.slot_count);
        tau(kSource, 0) = 1.0;
        tau(relay_node(0), 1) = 0.4;
        tau(relay_node(1), 1) = 0.4;
        CHECK(channel_probability(p, sc, relay_node(0), relay_node(1), 1, tau, g)
              == doctest::Approx(channel_probability(p, sc, relay_node(1), relay_node(0), 1, tau, g)));
    }
}

TEST_CASE("case 2 relay near the destination is jammed only by its own emissions")
{
    const auto& p = calibrated(310.0);
    const auto sc = study_case(2);
    // 310 m from S, 90 m from D.
    const double theta = 2.0 * std::asin(45.0 / 310.0);
    const std::vector<double> genome = {310.0 * std::cos(theta), 310.0 * std::sin(theta), 0.9};
    const auto sol = decode_genome(genome, sc, p, 310.0);
    const int R = relay_node(0);
    CHECK(sol.feasible);
    CHECK(sol.links(kSource, R, 0) == doctest::Approx(0.504).epsilon(1e-3));
    CHECK(sol.links(R, kDestination, 0) >= 0.99999);
    const double tau_r = sol.tau(R, 0);
    CHECK(tau_r == doctest::Approx(0.504 * 0.9).epsilon(1e-3));
    // An active relay 90 m from D drowns the direct link.
    CHECK(sol.links(kSource, kDestination, 0) == doctest::Approx(0.504 * (1.0 - tau_r)).epsilon(1e-3));
}
