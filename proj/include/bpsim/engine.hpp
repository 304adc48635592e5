#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "bpsim/model.hpp"
#include "bpsim/queueing.hpp"

namespace bpsim {

struct RunConfig {
    const ScenarioSpec* spec = nullptr;
    double v_param = 1.0;
    Discipline discipline = Discipline::Fifo;
    int d_max = 12;                  // FloatingLifo data capacity
    std::int64_t horizon = 0;        // slots
    std::uint64_t seed = 0;
    std::int64_t warmup = -1;        // < 0: min(1e4, horizon / 10)
    double band_margin = -1.0;       // < 0: 2 [log V]^2
    std::vector<double> attractor;   // gamma*_V; empty disables deviation stats
    double sanity_ceiling = -1.0;    // < 0: 1e6 * queue_count
    bool retain_backlog_trace = false;
    bool retain_queue_records = false;
    bool retain_slot_io = false;     // per-slot (mu, A) for replay checks
    bool retain_packet_trace = false;  // per-hop CSV rows (--emit-traces)
    bool use_decomposed = true;      // factored argmax when the spec declares it

    std::int64_t effective_warmup() const {
        return warmup >= 0 ? warmup : std::min<std::int64_t>(10000, horizon / 10);
    }
    double effective_band() const;
    double effective_ceiling() const;
};

struct RunReport {
    // configuration echo
    std::string scenario;
    double v_param = 1.0;
    std::string discipline;
    int d_max = 0;
    std::int64_t horizon = 0;
    std::int64_t warmup = 0;
    std::uint64_t seed = 0;

    // time averages over the post-warmup window
    double avg_cost = 0.0;     // cost per slot
    double avg_backlog = 0.0;  // total packets across queues

    // packet accounting over the full horizon (non-null)
    std::uint64_t injected = 0;
    std::uint64_t delivered = 0;
    std::uint64_t undelivered = 0;
    std::uint64_t dropped = 0;
    std::uint64_t null_filtered = 0;  // nulls discarded at sinks

    // end-to-end delay of delivered packets, slots
    double delay_mean = 0.0;
    double delay_p50 = 0.0;
    double delay_p90 = 0.0;
    double delay_p99 = 0.0;
    double delay_frac_lt_20 = 0.0;
    double delay_frac_lt_100 = 0.0;

    std::vector<double> per_queue_delay;         // mean hop delay per queue
    std::vector<double> per_queue_arrival_rate;  // non-null packets per slot

    double deviation_fraction = -1.0;  // < 0 when no attractor was supplied
    double band = 0.0;
    std::vector<std::vector<std::uint64_t>> backlog_histogram;  // [queue][level]
};

// Per-queue, per-arrival record kept by detailed runs (non-null packets).
using QueueRecords = std::vector<std::vector<PacketRecord>>;

struct SlotIo {
    std::uint32_t mu = 0;
    std::uint32_t arrivals = 0;
};

// One packet-trace row per hop enqueue; dequeue fields filled on departure.
struct PacketTraceRow {
    std::uint64_t packet_id = 0;
    std::uint16_t queue_id = 0;
    std::uint32_t enqueue_slot = 0;
    std::int64_t dequeue_slot = -1;
    std::uint32_t entry_backlog = 0;
    bool is_null = false;
    std::int64_t end_to_end_delay = -1;  // set at a sink dequeue
};

struct RunResult {
    RunReport report;
    std::vector<std::uint32_t> delivered_delays;              // end-to-end
    std::vector<std::vector<std::uint32_t>> backlog_trace;    // [queue][slot]
    QueueRecords queue_records;                               // when retained
    std::vector<std::vector<SlotIo>> slot_io;                 // [queue][slot]
    std::vector<PacketTraceRow> packet_trace;                 // when retained
};

/// Slotted simulation: sample S(t), decide by backpressure, move packets
/// through every queue, accumulate statistics. Identical configs produce
/// bit-identical results. Throws RunAbortError past the sanity ceiling.
RunResult run(const RunConfig& config);

/// Fraction of slots (from `from_slot` on) where any queue deviates from its
/// attractor coordinate by more than `band`.
double deviation_fraction(const std::vector<std::vector<std::uint32_t>>& backlog_trace,
                          std::span<const double> gamma_star, double band,
                          std::int64_t from_slot = 0);

struct AttractionFit {
    double d_hat = 0.0;
    double k_hat = 0.0;
    double decay_slope = 0.0;  // -inf sentinel when every tail is empty
    double intercept = 0.0;
    double fit_error = 0.0;    // mean squared residual of the log-linear fit
    int points = 0;
    bool insufficient = false;
};

/// Fits log tail-fraction at distance D + K m against m; picks the (D, K)
/// grid pair minimizing the fit error and reports the decay slope.
AttractionFit estimate_attraction(const std::vector<std::vector<std::uint32_t>>& backlog_trace,
                                  std::span<const double> gamma_star,
                                  std::span<const double> d_grid, std::span<const double> k_grid,
                                  int m_points, std::int64_t from_slot = 0);

struct ComparisonTable {
    double fifo_mean = 0.0, lifo_mean = 0.0;
    double mean_ratio = 0.0;  // FIFO / LIFO
    double fifo_p50 = 0.0, fifo_p90 = 0.0, fifo_p99 = 0.0;
    double lifo_p50 = 0.0, lifo_p90 = 0.0, lifo_p99 = 0.0;
    double fifo_frac_lt_20 = 0.0, lifo_frac_lt_20 = 0.0;
    double fifo_frac_lt_100 = 0.0, lifo_frac_lt_100 = 0.0;
};

/// Side-by-side delay statistics; both reports must come from the same
/// scenario, V, horizon and seed.
ComparisonTable delay_comparison(const RunReport& report_lifo, const RunReport& report_fifo);

}  // namespace bpsim
