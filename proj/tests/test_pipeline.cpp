#include "relaybound/pipeline.hpp"

#include "helpers.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace relaybound;
namespace fs = std::filesystem;

namespace {

RunConfig small_config(int id, const std::string& dir)
{
    RunConfig cfg;
    cfg.study.id = id;
    cfg.nsga2.population = 30;
    cfg.nsga2.generations = 20;
    cfg.sim.frames = 500;
    cfg.sim.seeds = 2;
    cfg.output_dir = dir;
    return cfg;
}

std::string temp_dir(const std::string& name)
{
    const auto p = fs::temp_directory_path() / ("relaybound_test_" + name);
    fs::remove_all(p);
    return p.string();
}

std::string read_file(const fs::path& p)
{
    std::ifstream in(p);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

BoundEntry entry_at(std::vector<double> point)
{
    BoundEntry e;
    e.point = std::move(point);
    return e;
}

} // namespace

TEST_CASE("exceptions map to exit codes")
{
    CHECK(exit_code_for(ConfigError("x")) == kExitConfig);
    CHECK(exit_code_for(CalibrationError("x")) == kExitConfig);
    CHECK(exit_code_for(InfeasibleError("x")) == kExitInfeasible);
    CHECK(exit_code_for(std::domain_error("diverges")) == kExitInfeasible);
    CHECK(exit_code_for(std::runtime_error("x")) == kExitFailure);
    const StageError s("optimize", InfeasibleError("empty front"));
    CHECK(s.stage() == "optimize");
    CHECK(s.exit_code() == kExitInfeasible);
    CHECK(std::string(s.what()).find("optimize") != std::string::npos);
    CHECK(std::string(s.what()).find("empty front") != std::string::npos);
}

TEST_CASE("pipeline writes the artifact set with provenance headers")
{
    const auto dir = temp_dir("sc1");
    const auto cfg = small_config(1, dir);
    const auto result = run_pipeline(cfg);
    for (const char* name : {"sc1_B_opt.csv", "sc1_B_c.csv", "sc1_B_r.csv", "sc1_B_c_opt.csv", "sc1_B_r_opt.csv",
                             "sc1_B_opt.json", "sc1_sim.csv", "sc1_report.csv", "report.md"}) {
        CAPTURE(name);
        CHECK(fs::exists(fs::path(dir) / name));
    }
    const auto hash = config_hash(cfg);
    for (const auto& f : result.files) {
        if (fs::path(f).extension() == ".csv") {
            CAPTURE(f);
            const auto text = read_file(fs::path(dir) / f);
            CHECK(text.find("# config_hash=" + hash) != std::string::npos);
            CHECK(text.find("# seed=") != std::string::npos);
        }
    }
    // The report rebuilt from the directory matches the one written by the run.
    const auto rebuilt = report_from_directory(dir, cfg, calibrate_channel(cfg));
    CHECK(rebuilt.markdown == result.report.markdown);
    CHECK(rebuilt.csv == read_file(fs::path(dir) / "sc1_report.csv"));
    const auto table = read_csv_file((fs::path(dir) / "sc1_report.csv").string());
    CHECK(table.columns == std::vector<std::string>{"section", "subject", "metric", "value"});
    fs::remove_all(dir);
}

TEST_CASE("same configuration and seed give byte-identical CSV outputs across worker counts")
{
    const auto d1 = temp_dir("jobs1");
    const auto d4 = temp_dir("jobs4");
    auto c1 = small_config(5, d1);
    c1.jobs = 1;
    auto c4 = small_config(5, d4);
    c4.jobs = 4;
    const auto r1 = run_pipeline(c1);
    run_pipeline(c4);
    for (const auto& f : r1.files) {
        // The saved configuration records the output directory and worker count.
        if (fs::path(f).extension() == ".ini") {
            continue;
        }
        CAPTURE(f);
        CHECK(read_file(fs::path(d1) / f) == read_file(fs::path(d4) / f));
    }
    fs::remove_all(d1);
    fs::remove_all(d4);
}

TEST_CASE("looped case takes reliability from the simulator")
{
    const auto dir = temp_dir("sc4");
    const auto cfg = small_config(4, dir);
    run_pipeline(cfg);
    const auto b_r = read_bound_file((fs::path(dir) / "sc4_B_r.csv").string(), calibrate_channel(cfg));
    CHECK(!b_r.entries.empty());
    const auto text = read_file(fs::path(dir) / "sc4_B_opt.csv");
    CHECK(text.find(",simulated,") != std::string::npos);
    CHECK(text.find(",analytic,") == std::string::npos);
    for (const auto& e : b_r.entries) {
        CHECK(e.objectives.f_R_available);
        CHECK(e.objectives.f_R > 0.0);
        CHECK(e.objectives.f_R <= 1.0);
    }
    fs::remove_all(dir);
}

TEST_CASE("stage failures name the stage")
{
    auto cfg = small_config(1, temp_dir("bad"));
    cfg.study.id = 6;
    try {
        run_pipeline(cfg);
        FAIL("expected a StageError");
    } catch (const StageError& e) {
        CHECK(e.stage() == "config");
        CHECK(e.exit_code() == kExitConfig);
    }
    cfg.study.id = 1;
    cfg.channel.params.pathloss_exponent = 0.0;
    try {
        run_pipeline(cfg);
        FAIL("expected a StageError");
    } catch (const StageError& e) {
        CHECK(e.stage() == "calibrate");
        CHECK(e.exit_code() == kExitConfig);
    }
}

TEST_CASE("landmark checks read 'contains a point within tolerance'")
{
    ParetoBound b_opt;
    b_opt.case_id = 3;
    DerivedBounds d;
    d.b_c_opt.entries = {entry_at({3.98, 3.96}), entry_at({5.0, 2.1})};
    auto checks = landmark_checks(3, 620.0, b_opt, d);
    REQUIRE(checks.size() == 1);
    CHECK(checks[0].pass);
    d.b_c_opt.entries = {entry_at({4.1, 3.93})};
    CHECK(!landmark_checks(3, 620.0, b_opt, d)[0].pass);
    CHECK(landmark_checks(3, 620.0, b_opt, d, 2.0)[0].pass);
    // Landmarks only apply at their distance.
    CHECK(landmark_checks(3, 500.0, b_opt, d).empty());
}

TEST_CASE("coding checks compare gaps")
{
    auto gap = [](Strategy s, int k, double gd) {
        CodedGap g;
        g.strategy = s;
        g.k = k;
        g.gap.gd = gd;
        return g;
    };
    auto c3 = coding_checks(3, {gap(Strategy::Rlnc, 100, 0.2)}, 0.7);
    REQUIRE(c3.size() == 2);
    CHECK(c3[0].pass);
    CHECK(c3[1].pass);
    c3 = coding_checks(3, {gap(Strategy::Rlnc, 100, 0.35)}, 0.3);
    CHECK(!c3[0].pass);
    CHECK(!c3[1].pass);
    auto c4 = coding_checks(4, {gap(Strategy::Rlnc, 500, 1.5), gap(Strategy::RXor, 500, 1.7)}, 9.0);
    REQUIRE(c4.size() == 1);
    CHECK(c4[0].pass);
    CHECK(coding_checks(4, {gap(Strategy::Rlnc, 500, 1.5)}, 9.0).empty());
}

TEST_CASE("coded gaps pair each coded entry with its own analytic point")
{
    ParetoBound b;
    b.case_id = 3;
    b.kind = BoundKind::B_c_opt;
    for (double c : {0.5, 0.25}) {
        BoundEntry e;
        e.objectives.f_C = c;
        e.objectives.f_D = 2.0;
        e.objectives.f_E = 1.5;
        b.entries.push_back(e);
    }
    // Analytic points: (4, 3) and (8, 6).
    std::vector<CodingRow> rows;
    for (std::size_t e = 0; e < 2; ++e) {
        CodingRow r;
        r.entry = e;
        r.strategy = Strategy::Rlnc;
        r.k = 50;
        r.metrics.fc_D = e == 0 ? 7.0 : 8.0; // 3 away from (4, 3), exact for (8, 6)
        r.metrics.fc_E = e == 0 ? 3.0 : 6.0;
        rows.push_back(r);
        r.seed = 1; // per-seed rows are ignored
        r.metrics.fc_D = 100.0;
        rows.push_back(r);
    }
    const auto gaps = coded_gaps(b, rows);
    REQUIRE(gaps.size() == 1);
    CHECK(gaps[0].gap.gd == doctest::Approx(1.5)); // sqrt(9) / 2
}

TEST_CASE("small coded benchmark produces per-seed and mean rows")
{
    auto cfg = small_config(3, temp_dir("code"));
    cfg.coding.ks = {20};
    cfg.coding.seeds = 3;
    cfg.coding.strategies = {Strategy::None, Strategy::Rlnc};
    const auto ch = calibrate_channel(cfg);
    const auto sc = study_case(3);
    ParetoBound b;
    b.case_id = 3;
    b.kind = BoundKind::B_c_opt;
    const auto sol = decode_genome(std::vector<double>{310, 0, 310, 0, 1, 1}, sc, ch, 620.0);
    b.entries.push_back({sol, evaluate(sol, sc), {}});
    const auto rows = code_bench(b, cfg, ch);
    CHECK(rows.size() == 2 * (3 + 1));
    CHECK(!rows[3].seed);
    CHECK(rows[3].metrics.completed);
    const auto again = code_bench(b, cfg, ch);
    CHECK(again[5].metrics.fc_D == rows[5].metrics.fc_D);
}
