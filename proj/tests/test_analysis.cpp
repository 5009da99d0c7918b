#include "helpers.hpp"

#include "relaybound/analysis.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace relaybound;

namespace {

ParetoBound bound2d(int case_id, const std::vector<std::vector<double>>& pts)
{
    ParetoBound b;
    b.kind = BoundKind::B_c_opt;
    b.case_id = case_id;
    b.senses = {Sense::Minimize, Sense::Minimize};
    for (const auto& p : pts) {
        b.entries.push_back({Solution{}, ObjectiveVector{}, p});
    }
    return b;
}

} // namespace

TEST_CASE("generational distance examples")
{
    CHECK(generational_distance({{1, 2}}, {{1, 2}}).gd == 0.0);
    const auto r = generational_distance({{4, 4}}, {{3.93, 3.93}});
    CHECK(r.gd == doctest::Approx(std::sqrt(2 * 0.07 * 0.07)));
    CHECK(r.gd == doctest::Approx(0.099).epsilon(0.01));

    const auto nn = generational_distance({{0, 0}, {10, 10}}, {{9, 9}, {1, 0}});
    CHECK(nn.paired == std::vector<std::size_t>{1, 0});
    CHECK(nn.gd == doctest::Approx(std::sqrt(1.0 + 2.0) / 2.0));
    const auto id = generational_distance({{0, 0}, {10, 10}}, {{9, 9}, {1, 0}}, Pairing::Identity);
    CHECK(id.paired == std::vector<std::size_t>{0, 1});
    CHECK(id.gd > nn.gd);

    CHECK_THROWS_AS(generational_distance({}, {{1, 1}}), std::invalid_argument);
    CHECK_THROWS_AS(generational_distance({{1, 1}}, {{1, 1}, {2, 2}}, Pairing::Identity), std::invalid_argument);
    CHECK_THROWS_AS(generational_distance({{1, 1}}, {{1, 1, 1}}), std::invalid_argument);
}

TEST_CASE("generational distance is translation invariant and scales linearly")
{
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(0.0, 10.0);
    for (int t = 0; t < 200; ++t) {
        std::vector<std::vector<double>> lo(1 + rng() % 8);
        std::vector<std::vector<double>> up(1 + rng() % 8);
        for (auto* set : {&lo, &up}) {
            for (auto& p : *set) {
                p = {u(rng), u(rng)};
            }
        }
        const double base = generational_distance(lo, up).gd;
        const double dx = u(rng) - 5.0;
        const double s = 0.1 + u(rng);
        auto shifted = [&](auto pts, double scale, double shift) {
            for (auto& p : pts) {
                for (auto& c : p) {
                    c = c * scale + shift;
                }
            }
            return pts;
        };
        CHECK(generational_distance(shifted(lo, 1.0, dx), shifted(up, 1.0, dx)).gd == doctest::Approx(base));
        CHECK(generational_distance(shifted(lo, s, 0.0), shifted(up, s, 0.0)).gd == doctest::Approx(s * base));
    }
}

TEST_CASE("set relations")
{
    const auto a = bound2d(4, {{3.3, 3.1}, {3.9, 2.4}});
    const auto b = bound2d(3, {{3.94, 3.95}, {4.2, 3.7}});
    const auto c = bound2d(1, {{1.0, 9.0}});
    CHECK(compare_sets(a, b) == SetRelation::Dominates);
    CHECK(compare_sets(b, a) == SetRelation::DominatedBy);
    CHECK(compare_sets(a, a) == SetRelation::Equal);
    CHECK(compare_sets(a, c) == SetRelation::Incomparable);
    // A shared point plus a strictly better one still dominates.
    const auto d = bound2d(2, {{1.984, 1.984}});
    const auto e = bound2d(1, {{1.984, 1.984}, {1.665, 2.0}, {1.5, 1.5}});
    CHECK(compare_sets(e, d) == SetRelation::Dominates);

    const auto report = compare_bounds({a, b, c});
    REQUIRE(report.size() == 3);
    CHECK(report[0].left == "sc4 B_c_opt");
    CHECK(report[0].right == "sc3 B_c_opt");
    CHECK(report[0].relation == SetRelation::Dominates);
    CHECK(to_string(SetRelation::DominatedBy) == "dominated by");

    auto three = bound2d(1, {{1, 1}});
    three.senses = bopt_senses();
    CHECK_THROWS_AS(compare_sets(a, three), std::invalid_argument);
}
