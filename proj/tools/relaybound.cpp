// Command-line front end: calibrate, channel-table, evaluate, optimize,
// simulate, code-bench, report and run (the whole pipeline).

#include "relaybound/pipeline.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using namespace relaybound;

namespace {

struct Options {
    std::string config_file;
    std::vector<std::string> overrides;
    std::optional<int> jobs;
    std::optional<int> case_id;
    std::optional<double> d_sd;
    std::optional<std::string> out_dir;
    bool print_defaults = false;
    bool print_config = false;

    // solution input
    std::string genome;
    std::string solution_file;

    // per-command
    std::string bound_file;
    std::string output;
    std::optional<long> frames;
    std::optional<int> seeds;
    std::optional<std::uint64_t> seed;
    std::string events_file;
    std::string strategies;
    std::string ks;
    bool check = false;
};

RunConfig build_config(const Options& o)
{
    RunConfig cfg = o.config_file.empty() ? RunConfig{} : load_config(o.config_file);
    for (const auto& s : o.overrides) {
        apply_override(cfg, s);
    }
    if (o.case_id) {
        cfg.study.id = *o.case_id;
    }
    if (o.d_sd) {
        cfg.study.d_sd = *o.d_sd;
    }
    if (o.out_dir) {
        cfg.output_dir = *o.out_dir;
    }
    if (o.jobs) {
        cfg.jobs = *o.jobs;
    }
    validate(cfg);
    return cfg;
}

std::vector<double> parse_genome(const std::string& text)
{
    std::vector<double> g;
    std::istringstream in(text);
    std::string item;
    while (std::getline(in, item, ',')) {
        try {
            g.push_back(parse_double(item));
        } catch (const std::invalid_argument&) {
            throw ConfigError("--genome: '" + item + "' is not a number");
        }
    }
    return g;
}

std::string slurp(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open '" + path + "'");
    }
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

// Solution from --genome or --solution; the record's d_SD wins when given.
Solution input_solution(const Options& o, RunConfig& cfg, const ChannelParams& channel)
{
    const auto sc = study_case(cfg.study.id);
    std::vector<double> genome;
    double d_sd = cfg.study.d_sd;
    if (!o.genome.empty() && !o.solution_file.empty()) {
        throw ConfigError("give either --genome or --solution, not both");
    }
    if (!o.genome.empty()) {
        genome = parse_genome(o.genome);
    } else if (!o.solution_file.empty()) {
        try {
            genome = genome_from_json(slurp(o.solution_file), sc, &d_sd);
        } catch (const std::invalid_argument& e) {
            throw ConfigError(o.solution_file + ": " + e.what());
        }
    } else {
        throw ConfigError("a solution is required (--genome x,y,...,probs or --solution FILE)");
    }
    if (genome.size() != sc.genome_length()) {
        throw ConfigError("study case " + std::to_string(sc.id) + " expects " + std::to_string(sc.genome_length())
                          + " genome values, got " + std::to_string(genome.size()));
    }
    auto ch = channel;
    ch.d_sd = d_sd;
    cfg.study.d_sd = d_sd;
    return decode_genome(genome, sc, ch, d_sd);
}

// Opens the named output, or stdout for "-".
class Output {
public:
    explicit Output(const std::string& path)
    {
        if (path != "-") {
            if (const auto parent = fs::path(path).parent_path(); !parent.empty()) {
                fs::create_directories(parent);
            }
            file_.open(path);
            if (!file_) {
                throw std::runtime_error("cannot write '" + path + "'");
            }
        }
    }
    std::ostream& stream() { return file_.is_open() ? static_cast<std::ostream&>(file_) : std::cout; }

private:
    std::ofstream file_;
};

void require_file(const std::string& path)
{
    if (!fs::exists(path)) {
        throw ConfigError("input file '" + path + "' does not exist");
    }
}

std::string default_output(const RunConfig& cfg, const std::string& kind)
{
    return (fs::path(cfg.output_dir) / artifact_name(cfg.study.id, kind, "csv")).string();
}

int cmd_calibrate(const Options& o)
{
    const auto cfg = build_config(o);
    const auto ch = calibrate_channel(cfg);
    const auto& t = cfg.channel.targets;
    std::cout << "{\n  \"noise_floor_mw\": " << format_number(ch.noise_floor_mw) << ",\n  \"p_"
              << format_number(t.anchor_distance) << "\": " << format_number(link_success(ch, t.anchor_distance))
              << ",\n  \"p_" << format_number(t.far_distance)
              << "\": " << format_number(link_success(ch, t.far_distance)) << ",\n  \"p_"
              << format_number(t.near_distance) << "\": " << format_number(link_success(ch, t.near_distance))
              << "\n}\n";
    return kExitOk;
}

int cmd_channel_table(const Options& o)
{
    auto cfg = build_config(o);
    const auto ch = calibrate_channel(cfg);
    const auto sol = input_solution(o, cfg, ch);
    Output out(o.output.empty() ? "-" : o.output);
    write_channel_csv(out.stream(), sol, study_case(cfg.study.id), make_header(cfg, "channel", 0));
    return kExitOk;
}

int cmd_evaluate(const Options& o)
{
    auto cfg = build_config(o);
    const auto ch = calibrate_channel(cfg);
    const auto sc = study_case(cfg.study.id);
    const auto sol = input_solution(o, cfg, ch);
    const auto obj = evaluate(sol, sc);
    std::cout << evaluation_to_json(sol, sc, obj, derived_criteria(obj)) << '\n';
    if (!sol.feasible) {
        std::cerr << "solution is infeasible (constraint violation " << format_number(sol.violation) << ")\n";
        return kExitInfeasible;
    }
    return kExitOk;
}

int cmd_optimize(const Options& o)
{
    const auto cfg = build_config(o);
    const auto ch = calibrate_channel(cfg);
    const auto b_opt = optimize_bound(cfg, ch);
    const auto derived = derive_bounds(b_opt);
    fs::create_directories(cfg.output_dir);
    for (const auto& f : write_bounds(cfg.output_dir, cfg, b_opt, derived)) {
        std::cout << (fs::path(cfg.output_dir) / f).string() << '\n';
    }
    if (study_case(cfg.study.id).loop_allowed) {
        std::cerr << "note: reliability has no closed form for this case; B_r is filled by `simulate` + `run`\n";
    }
    return kExitOk;
}

int cmd_simulate(Options o)
{
    if (o.frames) {
        o.overrides.push_back("simulator.frames=" + std::to_string(*o.frames));
    }
    if (o.seeds) {
        o.overrides.push_back("simulator.seeds=" + std::to_string(*o.seeds));
    }
    if (o.seed) {
        o.overrides.push_back("simulator.seed=" + std::to_string(*o.seed));
    }
    auto cfg = build_config(o);
    const auto ch = calibrate_channel(cfg);
    ParetoBound bound;
    if (!o.bound_file.empty()) {
        require_file(o.bound_file);
        bound = read_bound_file(o.bound_file, ch);
        if (bound.case_id != cfg.study.id) {
            throw ConfigError(o.bound_file + " holds study case " + std::to_string(bound.case_id)
                              + ", configuration says " + std::to_string(cfg.study.id));
        }
    } else {
        const auto sol = input_solution(o, cfg, ch);
        if (!sol.feasible) {
            throw InfeasibleError("solution is infeasible (constraint violation " + format_number(sol.violation)
                                  + ")");
        }
        bound.case_id = cfg.study.id;
        bound.entries.push_back({sol, evaluate(sol, study_case(cfg.study.id)), {}});
    }
    const auto rows = simulate_bound(bound, cfg, ch);
    Output out(o.output.empty() ? default_output(cfg, "sim") : o.output);
    write_sim_csv(out.stream(), cfg.study.id, bound.kind, rows, make_header(cfg, "sim", cfg.sim.seed));
    if (!o.events_file.empty()) {
        auto sc_cfg = cfg.sim_config(cfg.sim.seed);
        sc_cfg.record_events = true;
        const auto sc = study_case(cfg.study.id);
        Output ev(o.events_file);
        for (std::size_t e = 0; e < bound.entries.size(); ++e) {
            const auto m = simulate(bound.entries[e].solution, sc, ch, sc_cfg);
            ev.stream() << "# entry=" << e << " seed=" << cfg.sim.seed << '\n';
            write_event_log(ev.stream(), m.events, sc.relay_count());
        }
    }
    return kExitOk;
}

int cmd_code_bench(Options o)
{
    if (!o.strategies.empty()) {
        o.overrides.push_back("coding.strategies=" + o.strategies);
    }
    if (!o.ks.empty()) {
        o.overrides.push_back("coding.k=" + o.ks);
    }
    if (o.seeds) {
        o.overrides.push_back("coding.seeds=" + std::to_string(*o.seeds));
    }
    if (o.seed) {
        o.overrides.push_back("coding.seed=" + std::to_string(*o.seed));
    }
    auto cfg = build_config(o);
    const auto ch = calibrate_channel(cfg);
    const auto path = o.bound_file.empty() ? default_output(cfg, to_string(cfg.coding.bound)) : o.bound_file;
    require_file(path);
    const auto bound = read_bound_file(path, ch);
    if (bound.case_id != cfg.study.id) {
        throw ConfigError(path + " holds study case " + std::to_string(bound.case_id) + ", configuration says "
                          + std::to_string(cfg.study.id));
    }
    const auto rows = code_bench(bound, cfg, ch);
    Output out(o.output.empty() ? default_output(cfg, "coding") : o.output);
    write_coding_csv(out.stream(), cfg.study.id, bound.kind, rows, make_header(cfg, "coding", cfg.coding.seed));
    for (const auto& g : coded_gaps(bound, rows)) {
        std::cerr << to_string(g.strategy) << " K=" << g.k << " GD " << format_number(g.gap.gd) << '\n';
    }
    return kExitOk;
}

int finish_report(const Report& rep, const std::string& dir, int case_id, bool check)
{
    std::ofstream(fs::path(dir) / "report.md") << rep.markdown;
    std::ofstream(fs::path(dir) / artifact_name(case_id, "report", "csv")) << rep.csv;
    std::cout << rep.markdown;
    if (check && !rep.passed()) {
        std::cerr << "report check failed\n";
        return kExitCheckFailed;
    }
    return kExitOk;
}

int cmd_report(const Options& o)
{
    const auto cfg = build_config(o);
    const auto ch = calibrate_channel(cfg);
    const auto rep = report_from_directory(cfg.output_dir, cfg, ch);
    return finish_report(rep, cfg.output_dir, cfg.study.id, o.check);
}

int cmd_run(const Options& o)
{
    const auto cfg = build_config(o);
    const auto result = run_pipeline(cfg, [](const std::string& stage, const std::string& msg) {
        std::cerr << "[" << stage << "] " << msg << '\n';
    });
    for (const auto& f : result.files) {
        std::cerr << "wrote " << (fs::path(result.directory) / f).string() << '\n';
    }
    std::cout << result.report.markdown;
    if (o.check && !result.report.passed()) {
        std::cerr << "report check failed\n";
        return kExitCheckFailed;
    }
    return kExitOk;
}

void add_solution_options(CLI::App* cmd, Options& o)
{
    cmd->add_option("--genome", o.genome, "relay coordinates then free forwarding probabilities, comma-separated");
    cmd->add_option("--solution", o.solution_file, "JSON solution record");
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Capacity / delay / energy bounds for relay TDMA networks"};
    app.require_subcommand(0, 1);
    Options o;
    app.add_option("-c,--config", o.config_file, "configuration file (key = value, [sections])");
    app.add_option("--set", o.overrides, "override a setting, e.g. --set nsga2.generations=250");
    app.add_option("-j,--jobs", o.jobs, "worker threads (0 = all cores)");
    app.add_option("--case", o.case_id, "study case 1..5");
    app.add_option("--d-sd", o.d_sd, "source-destination distance in meters");
    app.add_option("-o,--out", o.out_dir, "artifact directory");
    app.add_flag("--print-defaults", o.print_defaults, "print the default configuration and exit");
    app.add_flag("--print-config", o.print_config, "print the effective configuration and exit");

    auto* calibrate_cmd = app.add_subcommand("calibrate", "solve the channel noise floor and print the anchors");
    auto* table_cmd = app.add_subcommand("channel-table", "link probabilities of a solution as CSV");
    add_solution_options(table_cmd, o);
    table_cmd->add_option("--output", o.output, "output file (default: stdout)");
    auto* eval_cmd = app.add_subcommand("evaluate", "closed-form criteria of a solution as JSON");
    add_solution_options(eval_cmd, o);
    auto* opt_cmd = app.add_subcommand("optimize", "NSGA-II search; writes the bounds");
    auto* sim_cmd = app.add_subcommand("simulate", "simulate a solution or every entry of a bound file");
    add_solution_options(sim_cmd, o);
    sim_cmd->add_option("--bound", o.bound_file, "bound CSV to simulate");
    sim_cmd->add_option("--frames", o.frames, "source packets per run");
    sim_cmd->add_option("--seeds", o.seeds, "runs per entry");
    sim_cmd->add_option("--seed", o.seed, "first seed");
    sim_cmd->add_option("--events", o.events_file, "write the event log of the first seed here");
    sim_cmd->add_option("--output", o.output, "output CSV (default: <out>/sc<K>_sim.csv, '-' for stdout)");
    auto* code_cmd = app.add_subcommand("code-bench", "coded transmission over the entries of a bound");
    code_cmd->add_option("--bound", o.bound_file, "bound CSV (default: <out>/sc<K>_<coding.bound>.csv)");
    code_cmd->add_option("--strategy", o.strategies, "comma-separated: none, rxor, rlnc");
    code_cmd->add_option("--k", o.ks, "comma-separated generation sizes");
    code_cmd->add_option("--seeds", o.seeds, "runs per (entry, strategy, K)");
    code_cmd->add_option("--seed", o.seed, "first seed");
    code_cmd->add_option("--output", o.output, "output CSV (default: <out>/sc<K>_coding.csv, '-' for stdout)");
    auto* report_cmd = app.add_subcommand("report", "Markdown / CSV report of an artifact directory");
    report_cmd->add_flag("--check", o.check, "exit with status 4 when a check fails");
    auto* run_cmd = app.add_subcommand("run", "calibrate, optimize, simulate, derive bounds and report");
    run_cmd->add_flag("--check", o.check, "exit with status 4 when a check fails");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitConfig;
    }

    try {
        if (o.print_defaults) {
            std::cout << render_config(RunConfig{});
            return kExitOk;
        }
        if (o.print_config) {
            std::cout << render_config(build_config(o));
            return kExitOk;
        }
        if (calibrate_cmd->parsed()) {
            return cmd_calibrate(o);
        }
        if (table_cmd->parsed()) {
            return cmd_channel_table(o);
        }
        if (eval_cmd->parsed()) {
            return cmd_evaluate(o);
        }
        if (opt_cmd->parsed()) {
            return cmd_optimize(o);
        }
        if (sim_cmd->parsed()) {
            return cmd_simulate(o);
        }
        if (code_cmd->parsed()) {
            return cmd_code_bench(o);
        }
        if (report_cmd->parsed()) {
            return cmd_report(o);
        }
        if (run_cmd->parsed()) {
            return cmd_run(o);
        }
        std::cout << app.help();
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_code_for(e);
    }
}
