#include "relaybound/io.hpp"

#include "helpers.hpp"

#include <doctest.h>

#include <cmath>
#include <sstream>

using namespace relaybound;
using relaybound::testing::calibrated;

namespace {

ParetoBound small_front(int id)
{
    const auto sc = study_case(id);
    Nsga2Config cfg;
    cfg.population = 24;
    cfg.generations = 15;
    cfg.jobs = 1;
    return nsga2(sc, 620.0, cfg, analytic_evaluator(sc, calibrated(), 620.0));
}

FileHeader header(const std::string& artifact)
{
    FileHeader h;
    h.artifact = artifact;
    h.config_hash = "0123456789abcdef";
    h.seed = 42;
    return h;
}

} // namespace

TEST_CASE("artifact names follow sc<K>_<kind>")
{
    CHECK(artifact_name(3, "B_c_opt", "csv") == "sc3_B_c_opt.csv");
    CHECK(artifact_name(1, "sim", "csv") == "sc1_sim.csv");
}

TEST_CASE("numbers round-trip exactly through text")
{
    for (double v : {0.0, 1.0, 0.1, 1.0 / 3.0, 9.786694618255702e-10, 7.9e-62, -2.5e300}) {
        CHECK(parse_double(format_number(v)) == v);
    }
    CHECK(std::isinf(parse_double(format_number(HUGE_VAL))));
    CHECK(std::isnan(parse_double(format_number(std::nan("")))));
    CHECK_THROWS_AS(parse_double("1.5x"), std::invalid_argument);
    CHECK_THROWS_AS(parse_double(""), std::invalid_argument);
}

TEST_CASE("CSV reader: provenance header, columns, ragged rows")
{
    std::istringstream ok("# artifact=sc1_x\n# config_hash=abc\n# seed=7\n# case=1\na,b\n1,2\n3,4\n");
    const auto t = read_csv(ok);
    CHECK(t.header.artifact == "sc1_x");
    CHECK(t.header.config_hash == "abc");
    CHECK(t.header.seed == 7);
    CHECK(t.header.extra.at("case") == "1");
    CHECK(t.rows.size() == 2);
    CHECK(t.number(1, "b") == 4.0);
    CHECK_THROWS_AS((void)t.column("c"), std::invalid_argument);

    std::istringstream ragged("a,b\n1,2,3\n");
    CHECK_THROWS_AS(read_csv(ragged), std::runtime_error);
    std::istringstream empty("# only comments\n");
    CHECK_THROWS_AS(read_csv(empty), std::runtime_error);
}

TEST_CASE("cells with commas and quotes are quoted")
{
    CHECK(csv_field("plain") == "plain");
    CHECK(csv_field("within 5% of (10.16, 21, 21.15)") == "\"within 5% of (10.16, 21, 21.15)\"");
    CHECK(csv_field("say \"hi\"") == "\"say \"\"hi\"\"\"");
    std::istringstream in("name,value\n" + csv_field("a, b") + "," + csv_field("x\"y") + "\n,\n");
    const auto t = read_csv(in);
    REQUIRE(t.rows.size() == 2);
    CHECK(t.cell(0, "name") == "a, b");
    CHECK(t.cell(0, "value") == "x\"y");
    CHECK(t.cell(1, "value").empty());
    std::istringstream open_quote("a\n\"x\n");
    CHECK_THROWS_AS(read_csv(open_quote), std::runtime_error);
}

TEST_CASE("bound CSV round-trip restores solutions, objectives and points")
{
    for (int id : {1, 2, 3, 4, 5}) {
        CAPTURE(id);
        const auto sc = study_case(id);
        const auto b_opt = small_front(id);
        const auto derived = derive_bounds(b_opt);
        for (const auto* b : {&b_opt, &derived.b_c, &derived.b_c_opt, &derived.b_r_opt}) {
            std::stringstream text;
            write_bound_csv(text, *b, sc, header("sc_test"));
            FileHeader h;
            const auto back = read_bound_csv(text, calibrated(), &h);
            CHECK(h.seed == 42);
            CHECK(h.config_hash == "0123456789abcdef");
            CHECK(back.kind == b->kind);
            CHECK(back.case_id == id);
            CHECK(back.skipped == b->skipped);
            REQUIRE(back.entries.size() == b->entries.size());
            for (std::size_t e = 0; e < b->entries.size(); ++e) {
                const auto& x = b->entries[e];
                const auto& y = back.entries[e];
                CHECK(y.solution.genome() == x.solution.genome());
                CHECK(y.objectives.f_C == x.objectives.f_C);
                CHECK(y.objectives.f_D == x.objectives.f_D);
                CHECK(y.objectives.f_E == x.objectives.f_E);
                CHECK(y.objectives.f_R_available == x.objectives.f_R_available);
                CHECK(y.point == x.point);
                // The re-decoded solution reproduces the stored objectives.
                const auto again = evaluate(y.solution, sc);
                CHECK(again.f_C == doctest::Approx(x.objectives.f_C).epsilon(1e-12));
                CHECK(again.f_E == doctest::Approx(x.objectives.f_E).epsilon(1e-12));
            }
        }
    }
}

TEST_CASE("bound CSV output is a pure function of its inputs")
{
    const auto sc = study_case(3);
    const auto b = small_front(3);
    std::ostringstream a;
    std::ostringstream c;
    write_bound_csv(a, b, sc, header("sc3_B_opt"));
    write_bound_csv(c, b, sc, header("sc3_B_opt"));
    CHECK(a.str() == c.str());
    std::ostringstream js;
    write_bound_json(js, b, sc, header("sc3_B_opt"));
    CHECK(js.str().find("\"kind\": \"B_opt\"") != std::string::npos);
}

TEST_CASE("JSON solution records round-trip and reject mismatches")
{
    const auto sc = study_case(4);
    const std::vector<double> genome = {300, 10, 320, -10, 1, 1, 0.5, 0.25};
    const auto sol = decode_genome(genome, sc, calibrated(), 620.0);
    const auto text = solution_to_json(sol, sc);
    double d = 0.0;
    CHECK(genome_from_json(text, sc, &d) == sol.genome());
    CHECK(d == 620.0);
    CHECK_THROWS_AS(genome_from_json(text, study_case(3)), std::invalid_argument);
    CHECK_THROWS_AS(genome_from_json("{", sc), std::invalid_argument);
    CHECK_THROWS_AS(genome_from_json(R"({"relays":[{"x":1,"y":2}],"forwarding":{}})", sc), std::invalid_argument);

    const auto one = study_case(1);
    const auto rec = R"({"case":1,"relays":[{"name":"R","x":310,"y":0}],"forwarding":{"x_SR_12":0.5}})";
    CHECK(genome_from_json(rec, one) == std::vector<double>{310, 0, 0.5});
    const auto bad = R"({"relays":[{"x":310,"y":0}],"forwarding":{"x_SR_12":0.5,"x_RD_21":1}})";
    CHECK_THROWS_AS(genome_from_json(bad, one), std::invalid_argument);
}

TEST_CASE("evaluation JSON carries objectives and derived criteria")
{
    const auto sc = study_case(1);
    const auto sol = decode_genome(std::vector<double>{310, 0, 1}, sc, calibrated(), 620.0);
    const auto obj = evaluate(sol, sc);
    const auto text = evaluation_to_json(sol, sc, obj, derived_criteria(obj));
    for (const char* key : {"\"f_C\"", "\"f_D\"", "\"f_E\"", "\"f_R\"", "\"fc_D\"", "\"fr_E\"", "\"feasible\""}) {
        CHECK(text.find(key) != std::string::npos);
    }
}

TEST_CASE("simulation and coding result files round-trip")
{
    std::vector<SimRow> rows(2);
    rows[0].entry = 3;
    rows[0].seed = 11;
    rows[0].metrics.f_C = 0.25;
    rows[0].metrics.f_D = std::nan("");
    rows[0].metrics.frames = 1000;
    rows[0].metrics.n_tx_relays = 77;
    rows[1].entry = 3;
    rows[1].metrics.f_E = 1.5;
    std::stringstream s;
    write_sim_csv(s, 2, BoundKind::B_opt, rows, header("sc2_sim"));
    FileHeader h;
    const auto back = read_sim_csv(s, &h);
    CHECK(h.extra.at("case") == "2");
    REQUIRE(back.size() == 2);
    CHECK(back[0].seed == std::optional<std::uint64_t>(11));
    CHECK(!back[1].seed);
    CHECK(back[0].metrics.f_C == 0.25);
    CHECK(std::isnan(back[0].metrics.f_D));
    CHECK(back[0].metrics.n_tx_relays == 77);
    CHECK(back[1].metrics.f_E == 1.5);

    std::vector<CodingRow> crow(1);
    crow[0].entry = 1;
    crow[0].strategy = Strategy::Rlnc;
    crow[0].k = 100;
    crow[0].metrics.fc_D = 4.25;
    crow[0].metrics.excess = 2;
    crow[0].metrics.completed = true;
    std::stringstream c;
    write_coding_csv(c, 3, BoundKind::B_c_opt, crow, header("sc3_coding"));
    const auto cback = read_coding_csv(c, &h);
    CHECK(h.extra.at("kind") == "B_c_opt");
    REQUIRE(cback.size() == 1);
    CHECK(cback[0].strategy == Strategy::Rlnc);
    CHECK(cback[0].k == 100);
    CHECK(!cback[0].seed);
    CHECK(cback[0].metrics.fc_D == 4.25);
    CHECK(cback[0].metrics.excess == 2);
    CHECK(cback[0].metrics.completed);
}

TEST_CASE("channel table lists every listening pair per slot")
{
    const auto sc = study_case(1);
    const auto sol = decode_genome(std::vector<double>{310, 0, 1}, sc, calibrated(), 620.0);
    std::stringstream s;
    write_channel_csv(s, sol, sc, header("sc1_channel"));
    const auto t = read_csv(s);
    // Slot 1: S->D, S->R; slot 2: R->D.
    REQUIRE(t.rows.size() == 3);
    CHECK(t.cell(1, "from") == "S");
    CHECK(t.cell(1, "to") == "R");
    CHECK(t.number(1, "p") == doctest::Approx(0.504).epsilon(1e-3));
}
