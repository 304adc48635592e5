#include "bpsim/sweep.hpp"

#include <atomic>
#include <cstdio>
#include <filesystem>
#include <thread>

#include "bpsim/errors.hpp"
#include "bpsim/report_io.hpp"

namespace bpsim {

namespace fs = std::filesystem;

std::string DisciplineChoice::label() const {
    std::string name = discipline_name(discipline);
    if (discipline == Discipline::FloatingLifo) name += std::to_string(d_max);
    return name;
}

SweepResult run_sweep(const ScenarioSpec& spec, const ExperimentPlan& plan) {
    if (plan.v_list.empty() || plan.seeds.empty() || plan.disciplines.empty())
        throw ValidationError("sweep plan needs at least one V, one seed and one discipline");
    if (plan.horizon < 1000) throw ValidationError("sweep horizon must be >= 1000 slots");

    SweepResult result;
    result.v_list = plan.v_list;
    result.slackness_eta = check_slackness(spec).eta;  // throws when infeasible

    for (double v : plan.v_list) result.duals.push_back(solve_dual(spec, v));

    // one task per (V, discipline, seed); results land in fixed slots
    struct Task {
        std::size_t v_index;
        DisciplineChoice choice;
        std::uint64_t seed;
    };
    std::vector<Task> tasks;
    for (std::size_t vi = 0; vi < plan.v_list.size(); ++vi)
        for (const auto& d : plan.disciplines)
            for (std::uint64_t s : plan.seeds) tasks.push_back({vi, d, s});

    result.runs.resize(tasks.size());
    std::atomic<std::size_t> cursor{0};
    std::atomic<bool> aborted{false};

    auto worker = [&]() {
        for (;;) {
            const std::size_t i = cursor.fetch_add(1);
            if (i >= tasks.size()) return;
            const Task& task = tasks[i];
            SweepRun& out = result.runs[i];
            out.v_param = plan.v_list[task.v_index];
            out.choice = task.choice;
            out.seed = task.seed;
            RunConfig config;
            config.spec = &spec;
            config.v_param = out.v_param;
            config.discipline = task.choice.discipline;
            config.d_max = task.choice.d_max;
            config.horizon = plan.horizon;
            config.seed = task.seed;
            config.warmup = plan.warmup;
            config.attractor = result.duals[task.v_index].gamma_star;
            try {
                RunResult run_result = run(config);
                out.report = std::move(run_result.report);
            } catch (const std::exception& e) {
                out.aborted = true;
                out.error = e.what();
                aborted.store(true);
            }
        }
    };

    unsigned n_threads = plan.threads > 0 ? static_cast<unsigned>(plan.threads)
                                          : std::max(1u, std::thread::hardware_concurrency());
    n_threads = std::min<unsigned>(n_threads, static_cast<unsigned>(tasks.size()));
    std::vector<std::thread> pool;
    for (unsigned i = 0; i < n_threads; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    result.any_aborted = aborted.load();

    result.csv = csv_header();
    for (const auto& r : result.runs)
        if (!r.aborted) result.csv += csv_row(r.report);

    if (!plan.out_dir.empty()) {
        fs::create_directories(plan.out_dir);
        write_text_file(plan.out_dir + "/sweep.csv", result.csv);

        nlohmann::json summary;
        summary["scenario"] = spec.name;
        summary["eta"] = result.slackness_eta;
        summary["horizon"] = plan.horizon;
        nlohmann::json duals = nlohmann::json::array();
        for (std::size_t vi = 0; vi < plan.v_list.size(); ++vi) {
            nlohmann::json d = to_json(result.duals[vi]);
            d["v_param"] = plan.v_list[vi];
            d["cost_floor"] = result.duals[vi].g_value / plan.v_list[vi];
            duals.push_back(std::move(d));
        }
        summary["duals"] = std::move(duals);
        nlohmann::json failures = nlohmann::json::array();
        for (const auto& r : result.runs) {
            if (!r.aborted) continue;
            failures.push_back({{"v_param", r.v_param},
                                {"discipline", r.choice.label()},
                                {"seed", r.seed},
                                {"error", r.error}});
        }
        summary["aborted_runs"] = std::move(failures);
        write_text_file(plan.out_dir + "/summary.json", summary.dump(2) + "\n");

        auto vtag = [](double v) {
            char buf[32];
            std::snprintf(buf, sizeof(buf), "%.10g", v);
            return std::string(buf);
        };
        for (const auto& r : result.runs) {
            if (r.aborted) continue;
            const std::string stem = plan.out_dir + "/run_v" + vtag(r.v_param) + "_" +
                                     r.choice.label() + "_s" + std::to_string(r.seed);
            write_text_file(stem + ".json", to_json(r.report).dump(2) + "\n");
        }
    }
    return result;
}

}  // namespace bpsim
