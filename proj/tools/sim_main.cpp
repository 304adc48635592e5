// Command-line front end: scenario loading, single runs, V sweeps, dual /
// slackness solves, attraction fits and the Little-bound check.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "bpsim/auxctrl.hpp"
#include "bpsim/controller.hpp"
#include "bpsim/dualopt.hpp"
#include "bpsim/engine.hpp"
#include "bpsim/errors.hpp"
#include "bpsim/report_io.hpp"
#include "bpsim/scenario_io.hpp"
#include "bpsim/sweep.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace bpsim;

namespace {

Discipline parse_discipline(const std::string& name) {
    if (name == "fifo") return Discipline::Fifo;
    if (name == "lifo") return Discipline::Lifo;
    if (name == "floating") return Discipline::FloatingLifo;
    throw CLI::ValidationError("--discipline", "must be fifo, lifo or floating");
}

std::vector<std::vector<std::uint32_t>> read_backlog_trace(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ScenarioError(path + ": cannot open trace");
    std::string line;
    if (!std::getline(in, line)) throw ScenarioError(path + ": empty trace");
    const auto cols = static_cast<std::size_t>(std::count(line.begin(), line.end(), ','));
    std::vector<std::vector<std::uint32_t>> trace(cols);
    while (std::getline(in, line)) {
        std::stringstream ss(line);
        std::string cell;
        std::getline(ss, cell, ',');  // slot column
        for (std::size_t j = 0; j < cols && std::getline(ss, cell, ','); ++j)
            trace[j].push_back(static_cast<std::uint32_t>(std::stoul(cell)));
    }
    return trace;
}

int dispatch(int argc, char** argv) {
    CLI::App app{"slotted-time backpressure network simulator"};
    app.require_subcommand(1);

    std::string scenario_path, out_dir, trace_path, dual_path;
    double v_param = 100.0;
    std::string discipline = "lifo";
    int d_max = 12;
    std::int64_t horizon = 100000;
    std::int64_t warmup = -1;
    std::uint64_t seed = 1;
    bool emit_traces = false;
    int queue_index = 0;
    double lambda_min = 0.0;
    double band_lo = -1.0, band_hi = -1.0;
    std::vector<double> v_list{20, 50, 100, 200, 500};
    std::vector<std::string> disciplines{"fifo", "lifo"};
    std::vector<std::uint64_t> seeds{1};
    int threads = 0;

    auto* c_run = app.add_subcommand("run", "simulate one configuration");
    c_run->add_option("--scenario", scenario_path, "scenario file")->required();
    c_run->add_option("--v", v_param, "V parameter");
    c_run->add_option("--discipline", discipline, "fifo | lifo | floating");
    c_run->add_option("--dmax", d_max, "floating data-queue capacity");
    c_run->add_option("--horizon", horizon, "slots");
    c_run->add_option("--seed", seed, "rng seed");
    c_run->add_option("--warmup", warmup, "slots excluded from steady-state stats");
    c_run->add_option("--out", out_dir, "output directory");
    c_run->add_flag("--emit-traces", emit_traces, "write backlog and packet trace CSVs");

    auto* c_sweep = app.add_subcommand("sweep", "run a (V, discipline, seed) grid");
    c_sweep->add_option("--scenario", scenario_path, "scenario file")->required();
    c_sweep->add_option("--v", v_list, "V values");
    c_sweep->add_option("--disciplines", disciplines, "subset of fifo,lifo,floating");
    c_sweep->add_option("--dmax", d_max, "floating data-queue capacity");
    c_sweep->add_option("--horizon", horizon, "slots");
    c_sweep->add_option("--seeds", seeds, "rng seeds");
    c_sweep->add_option("--out", out_dir, "output directory")->required();
    c_sweep->add_option("--threads", threads, "worker threads (0 = auto)");
    c_sweep->add_option("--warmup", warmup, "warmup slots");

    auto* c_dual = app.add_subcommand("dual", "solve the deterministic dual");
    c_dual->add_option("--scenario", scenario_path, "scenario file")->required();
    c_dual->add_option("--v", v_param, "V parameter");

    auto* c_slack = app.add_subcommand("slackness", "max-eta feasibility certificate");
    c_slack->add_option("--scenario", scenario_path, "scenario file")->required();

    auto* c_attr = app.add_subcommand("attraction", "fit the deviation decay of a run");
    c_attr->add_option("--trace", trace_path, "backlog trace CSV from `run --emit-traces`")
        ->required();
    c_attr->add_option("--dual", dual_path, "dual JSON from `sim dual`")->required();
    c_attr->add_option("--warmup", warmup, "slots to skip");

    auto* c_little = app.add_subcommand("little-check", "delay bound for a LIFO run");
    c_little->add_option("--scenario", scenario_path, "scenario file")->required();
    c_little->add_option("--v", v_param, "V parameter");
    c_little->add_option("--horizon", horizon, "slots");
    c_little->add_option("--seed", seed, "rng seed");
    c_little->add_option("--queue", queue_index, "queue index to check");
    c_little->add_option("--lambda-min", lambda_min, "arrival rate floor (default: 0.9 observed)");
    c_little->add_option("--band-lo", band_lo, "backlog band low (default from the dual)");
    c_little->add_option("--band-hi", band_hi, "backlog band high");

    CLI11_PARSE(app, argc, argv);

    if (c_run->parsed()) {
        LoadedScenario loaded = load_scenario(scenario_path);
        check_slackness(loaded.spec);
        DualSolution dual = solve_dual(loaded.spec, v_param);
        RunConfig config;
        config.spec = &loaded.spec;
        config.v_param = v_param;
        config.discipline = parse_discipline(discipline);
        config.d_max = d_max;
        config.horizon = horizon;
        config.warmup = warmup;
        config.seed = seed;
        config.attractor = dual.gamma_star;
        config.retain_backlog_trace = emit_traces;
        config.retain_packet_trace = emit_traces;
        RunResult result = run(config);
        json out = to_json(result.report);
        out["gamma_star"] = dual.gamma_star;
        std::cout << out.dump(2) << "\n";
        if (!out_dir.empty()) {
            fs::create_directories(out_dir);
            write_text_file(out_dir + "/report.json", out.dump(2) + "\n");
            write_text_file(out_dir + "/dual.json", to_json(dual).dump(2) + "\n");
            if (emit_traces) {
                write_text_file(out_dir + "/backlog_trace.csv",
                                backlog_trace_csv(result.backlog_trace));
                write_text_file(out_dir + "/packets.csv", packet_trace_csv(result.packet_trace));
            }
        }
        return kExitOk;
    }

    if (c_sweep->parsed()) {
        LoadedScenario loaded = load_scenario(scenario_path);
        ExperimentPlan plan;
        plan.v_list = v_list;
        for (const auto& d : disciplines) {
            DisciplineChoice choice;
            choice.discipline = parse_discipline(d);
            choice.d_max = d_max;
            plan.disciplines.push_back(choice);
        }
        plan.horizon = horizon;
        plan.seeds = seeds;
        plan.out_dir = out_dir;
        plan.threads = threads;
        plan.warmup = warmup;
        const SweepResult result = run_sweep(loaded.spec, plan);
        std::cout << "sweep complete: " << result.runs.size() << " runs, csv at " << out_dir
                  << "/sweep.csv\n";
        return result.any_aborted ? kExitRunAbort : kExitOk;
    }

    if (c_dual->parsed()) {
        LoadedScenario loaded = load_scenario(scenario_path);
        DualSolution dual = solve_dual(loaded.spec, v_param);
        json out = to_json(dual);
        try {
            out["eta"] = check_slackness(loaded.spec).eta;
        } catch (const InfeasibleError&) {
            out["eta"] = nullptr;
        }
        std::cout << out.dump(2) << "\n";
        return dual.converged ? kExitOk : kExitNonConverged;
    }

    if (c_slack->parsed()) {
        LoadedScenario loaded = load_scenario(scenario_path);
        const SlacknessCertificate cert = check_slackness(loaded.spec);
        json out;
        out["eta"] = cert.eta;
        out["exact"] = cert.exact;
        out["policy"] = cert.policy;
        std::cout << out.dump(2) << "\n";
        return kExitOk;
    }

    if (c_attr->parsed()) {
        const auto trace = read_backlog_trace(trace_path);
        std::ifstream in(dual_path);
        if (!in) throw ScenarioError(dual_path + ": cannot open dual output");
        json dual_doc;
        in >> dual_doc;
        const auto gamma = dual_doc.at("gamma_star").get<std::vector<double>>();
        std::vector<double> d_grid, k_grid;
        for (int d = 0; d <= 8; ++d) d_grid.push_back(d);
        for (double k = 0.5; k <= 4.0; k += 0.5) k_grid.push_back(k);
        const AttractionFit fit =
            estimate_attraction(trace, gamma, d_grid, k_grid, 8, warmup >= 0 ? warmup : 0);
        std::cout << to_json(fit).dump(2) << "\n";
        return fit.insufficient ? kExitNonConverged : kExitOk;
    }

    if (c_little->parsed()) {
        LoadedScenario loaded = load_scenario(scenario_path);
        check_slackness(loaded.spec);
        DualSolution dual = solve_dual(loaded.spec, v_param);
        RunConfig config;
        config.spec = &loaded.spec;
        config.v_param = v_param;
        config.discipline = Discipline::Lifo;
        config.horizon = horizon;
        config.seed = seed;
        config.attractor = dual.gamma_star;
        config.retain_queue_records = true;
        RunResult result = run(config);

        const int j = queue_index;
        const double margin = config.effective_band();
        const double lo = band_lo >= 0 ? band_lo : std::max(dual.gamma_star[j] - margin, 0.0);
        const double hi = band_hi >= 0 ? band_hi : dual.gamma_star[j] + margin;

        // buffer-slot interval occupied by packets arriving inside the band
        LittleCheckInput input;
        input.band_lo = static_cast<int>(std::floor(lo)) + 1;
        input.band_hi = static_cast<int>(std::ceil(hi + loaded.spec.delta_max));
        std::uint64_t arrivals_in_band = 0;
        for (const auto& rec : result.queue_records[j]) {
            if (rec.entry_depth == kNoRecord) continue;
            if (rec.entry_depth < static_cast<std::uint32_t>(input.band_lo) ||
                rec.entry_depth > static_cast<std::uint32_t>(input.band_hi))
                continue;
            ++arrivals_in_band;
            if (rec.departed) input.departure_delays.push_back(rec.delay);
        }
        input.arrival_count_trace.assign(static_cast<std::size_t>(horizon), 0);
        input.arrival_count_trace.back() = arrivals_in_band;
        const double observed =
            static_cast<double>(arrivals_in_band) / static_cast<double>(horizon);
        input.lambda_min = lambda_min > 0 ? lambda_min : 0.9 * observed;
        const LittleCheckResult res = little_bound_check(input);
        json out = to_json(res);
        out["queue"] = j;
        out["band"] = {input.band_lo, input.band_hi};
        out["in_band_arrival_rate"] = observed;
        std::cout << out.dump(2) << "\n";
        return kExitOk;
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return dispatch(argc, argv);
    } catch (const ScenarioError& e) {
        std::cerr << "scenario error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const ValidationError& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const InfeasibleError& e) {
        std::cerr << "infeasible: " << e.what() << "\n";
        return kExitInfeasible;
    } catch (const NonConvergedError& e) {
        std::cerr << "non-converged: " << e.what() << "\n";
        return kExitNonConverged;
    } catch (const RunAbortError& e) {
        std::cerr << "run aborted: " << e.what() << "\n";
        return kExitRunAbort;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    }
}
