#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bpsim/dualopt.hpp"
#include "bpsim/engine.hpp"
#include "bpsim/model.hpp"

namespace bpsim {

struct DisciplineChoice {
    Discipline discipline = Discipline::Fifo;
    int d_max = 0;  // FloatingLifo only

    std::string label() const;
};

struct ExperimentPlan {
    std::vector<double> v_list;
    std::vector<DisciplineChoice> disciplines;
    std::int64_t horizon = 0;
    std::vector<std::uint64_t> seeds;
    std::string out_dir;       // empty: no files written
    bool emit_traces = false;
    int threads = 0;           // 0: hardware concurrency
    std::int64_t warmup = -1;  // forwarded to RunConfig
};

struct SweepRun {
    double v_param = 0.0;
    DisciplineChoice choice;
    std::uint64_t seed = 0;
    RunReport report;
    bool aborted = false;
    std::string error;
};

struct SweepResult {
    std::vector<double> v_list;
    std::vector<DualSolution> duals;       // one per V, in v_list order
    double slackness_eta = 0.0;
    std::vector<SweepRun> runs;            // ordered by (V, discipline, seed)
    std::string csv;                       // fixed-schema aggregation
    bool any_aborted = false;
};

/// Certifies slackness, solves the dual once per V, then launches every
/// (V, discipline, seed) run — concurrently, results merged in plan order.
/// Writes sweep.csv, per-run JSON and a summary when out_dir is set.
SweepResult run_sweep(const ScenarioSpec& spec, const ExperimentPlan& plan);

}  // namespace bpsim
