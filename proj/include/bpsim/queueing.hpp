#pragma once

#include <cstdint>
#include <deque>
#include <limits>
#include <span>
#include <vector>

namespace bpsim {

constexpr std::uint32_t kNoRecord = std::numeric_limits<std::uint32_t>::max();

struct Packet {
    std::uint64_t id = 0;
    std::uint32_t birth_slot = 0;        // network entry time
    std::uint32_t hop_enqueue_slot = 0;  // entry to the current queue
    std::uint32_t entry_backlog = 0;     // start-of-slot backlog seen on arrival
    bool is_null = false;                // idle-fill / underflow filler
    // engine bookkeeping: indices into per-queue records / the packet trace
    std::uint32_t record_slot = kNoRecord;
    std::uint32_t trace_slot = kNoRecord;
};

enum class Discipline { Fifo, Lifo, FloatingLifo };

const char* discipline_name(Discipline d);

/// Packet store with pluggable service order. Under FloatingLifo a finite
/// data queue of size d_max rides on a virtual counter: real arrivals to a
/// full data queue are discarded and counted, null arrivals fold straight
/// into the counter, and services that underflow the data queue mint fresh
/// null packets against it.
struct QueueBuffer {
    Discipline discipline = Discipline::Fifo;
    int d_max = 0;  // FloatingLifo data capacity
    std::deque<Packet> data;
    std::uint64_t virtual_count = 0;
    std::uint64_t drops = 0;

    // conservation counters
    std::uint64_t real_arrivals = 0;
    std::uint64_t real_departures = 0;
    std::uint64_t null_arrivals = 0;
    std::uint64_t nulls_minted = 0;

    std::uint64_t backlog_level() const { return data.size() + virtual_count; }
};

struct ArrivalOutcome {
    bool stored = false;           // entered the data queue (vs virtual/drop)
    std::uint32_t depth = 0;       // 1-based position from the stack bottom
};

struct SlotOutcome {
    std::uint64_t level_before = 0;   // backlog at the start of the slot
    std::uint32_t idle_fill = 0;      // nulls minted beyond the backlog
};

/// One slot of the queue recursion: remove min(service, backlog) packets in
/// discipline order (minting nulls for virtual underflow), emit idle-fill
/// nulls for any shortfall, then insert the arrivals in ascending-id order.
/// The resulting backlog satisfies max[q - mu, 0] + |arrivals| exactly.
/// Departed packets are appended to `departed`; delays (now - hop_enqueue)
/// of non-null departures to `delays`. `next_packet_id` supplies ids for
/// minted nulls. `outcomes`, when given, reports per-arrival placement
/// aligned with the ascending-id arrival order.
SlotOutcome apply_slot(QueueBuffer& q, std::uint64_t service, std::span<Packet> arrivals,
                       std::uint32_t now, std::vector<Packet>& departed,
                       std::vector<std::uint32_t>& delays, std::uint64_t& next_packet_id,
                       std::vector<ArrivalOutcome>* outcomes = nullptr);

// ---------------------------------------------------------------------------
// Modified Little bound over a finite set of buffer locations.

struct LittleCheckInput {
    int band_lo = 0;  // inclusive buffer-slot interval B
    int band_hi = 0;
    std::vector<std::uint64_t> arrival_count_trace;  // cumulative N(t), one per slot
    std::vector<double> departure_delays;            // W_i for jobs departing from B
    double lambda_min = 0.0;
};

struct LittleCheckResult {
    double w_bar = 0.0;
    double bound = 0.0;
    bool holds = false;
    double observed_arrival_rate = 0.0;  // N(T)/T, diagnostic for the premise
    bool premise_ok = true;              // observed rate >= lambda_min
};

/// w_bar = mean departure delay, bound = |B| / lambda_min,
/// holds = (w_bar <= bound + 1e-9). Throws on an empty departure list.
LittleCheckResult little_bound_check(const LittleCheckInput& input);

// ---------------------------------------------------------------------------
// Per-queue delay/rate report for a backlog band (attractor analysis).

struct PacketRecord {
    std::uint32_t entry_backlog = 0;
    std::uint32_t delay = 0;       // hop delay, valid when departed
    bool departed = false;
    std::uint32_t entry_depth = kNoRecord;  // buffer slot occupied (LIFO)
};

struct BandReport {
    double q_low = 0.0;
    double q_high = 0.0;
    double lambda = 0.0;        // observed arrival rate of all recorded packets
    double lambda_tilde = 0.0;  // rate of in-band arrivals that departed
    double mean_delay = 0.0;    // of in-band departed packets (NaN when flagged)
    double outside_fraction = 0.0;
    double w_bound = 0.0;       // (band width + delta_max) / lambda_tilde
    std::uint64_t in_band_departed = 0;
    bool flagged = false;       // no in-band departures
};

BandReport delay_band_report(std::span<const PacketRecord> records, double q_low, double q_high,
                             double delta_max, double observed_rate);

}  // namespace bpsim
