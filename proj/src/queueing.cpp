#include "bpsim/queueing.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace bpsim {

const char* discipline_name(Discipline d) {
    switch (d) {
        case Discipline::Fifo: return "fifo";
        case Discipline::Lifo: return "lifo";
        case Discipline::FloatingLifo: return "floating";
    }
    return "?";
}

SlotOutcome apply_slot(QueueBuffer& q, std::uint64_t service, std::span<Packet> arrivals,
                       std::uint32_t now, std::vector<Packet>& departed,
                       std::vector<std::uint32_t>& delays, std::uint64_t& next_packet_id,
                       std::vector<ArrivalOutcome>* outcomes) {
    SlotOutcome out;
    out.level_before = q.backlog_level();

    auto emit = [&](Packet&& p) {
        if (!p.is_null) {
            delays.push_back(now - p.hop_enqueue_slot);
            ++q.real_departures;
        }
        departed.push_back(std::move(p));
    };
    auto mint_null = [&]() {
        Packet p;
        p.id = next_packet_id++;
        p.birth_slot = now;
        p.hop_enqueue_slot = now;
        p.is_null = true;
        ++q.nulls_minted;
        return p;
    };

    // --- service
    std::uint64_t remaining = service;
    while (remaining > 0 && !q.data.empty()) {
        if (q.discipline == Discipline::Fifo) {
            emit(std::move(q.data.front()));
            q.data.pop_front();
        } else {  // Lifo and FloatingLifo both take the newest data first
            emit(std::move(q.data.back()));
            q.data.pop_back();
        }
        --remaining;
    }
    // FloatingLifo underflow: virtual backlog turns into null packets
    if (q.discipline == Discipline::FloatingLifo) {
        while (remaining > 0 && q.virtual_count > 0) {
            emit(mint_null());
            --q.virtual_count;
            --remaining;
        }
    }
    // idle fill: allocated service beyond the backlog still transmits
    while (remaining > 0) {
        emit(mint_null());
        ++out.idle_fill;
        --remaining;
    }

    // --- arrivals, stacked in ascending packet-id order
    std::sort(arrivals.begin(), arrivals.end(),
              [](const Packet& a, const Packet& b) { return a.id < b.id; });
    if (outcomes) {
        outcomes->clear();
        outcomes->reserve(arrivals.size());
    }
    for (Packet& p : arrivals) {
        p.hop_enqueue_slot = now;
        p.entry_backlog = static_cast<std::uint32_t>(out.level_before);
        ArrivalOutcome oc;
        if (p.is_null) {
            ++q.null_arrivals;
            if (q.discipline == Discipline::FloatingLifo) {
                ++q.virtual_count;  // pure filler, nothing to store
            } else {
                q.data.push_back(std::move(p));
                oc.stored = true;
                oc.depth = static_cast<std::uint32_t>(q.data.size());
            }
        } else {
            ++q.real_arrivals;
            if (q.discipline == Discipline::FloatingLifo &&
                static_cast<int>(q.data.size()) >= q.d_max) {
                ++q.drops;  // the arriving packet is the one discarded
                ++q.virtual_count;
            } else {
                q.data.push_back(std::move(p));
                oc.stored = true;
                oc.depth = static_cast<std::uint32_t>(q.data.size());
            }
        }
        if (outcomes) outcomes->push_back(oc);
    }
    return out;
}

LittleCheckResult little_bound_check(const LittleCheckInput& input) {
    if (input.departure_delays.empty())
        throw std::invalid_argument("no departures; the delay bound is inapplicable");
    if (!(input.lambda_min > 0.0)) throw std::invalid_argument("lambda_min must be positive");

    LittleCheckResult res;
    double sum = 0.0;
    for (double w : input.departure_delays) sum += w;
    res.w_bar = sum / static_cast<double>(input.departure_delays.size());
    const double band_size = static_cast<double>(input.band_hi - input.band_lo + 1);
    res.bound = band_size / input.lambda_min;
    res.holds = res.w_bar <= res.bound + 1e-9;
    if (!input.arrival_count_trace.empty()) {
        res.observed_arrival_rate = static_cast<double>(input.arrival_count_trace.back()) /
                                    static_cast<double>(input.arrival_count_trace.size());
        res.premise_ok = res.observed_arrival_rate >= input.lambda_min - 1e-9;
    }
    return res;
}

BandReport delay_band_report(std::span<const PacketRecord> records, double q_low, double q_high,
                             double delta_max, double observed_rate) {
    if (q_low > q_high) throw std::invalid_argument("band is not well ordered");
    if (!(observed_rate > 0.0)) throw std::invalid_argument("observed rate must be positive");

    BandReport rep;
    rep.q_low = q_low;
    rep.q_high = q_high;
    rep.lambda = observed_rate;

    std::uint64_t in_band = 0, in_band_departed = 0, outside = 0;
    double delay_sum = 0.0;
    for (const auto& rec : records) {
        const double entry = rec.entry_backlog;
        if (entry < q_low || entry > q_high) {
            ++outside;
            continue;
        }
        ++in_band;
        if (rec.departed) {
            ++in_band_departed;
            delay_sum += rec.delay;
        }
    }
    const double total = static_cast<double>(records.size());
    rep.in_band_departed = in_band_departed;
    rep.outside_fraction = total > 0 ? static_cast<double>(outside) / total : 0.0;
    rep.lambda_tilde = total > 0
                           ? observed_rate * static_cast<double>(in_band_departed) / total
                           : 0.0;
    if (in_band_departed == 0) {
        rep.flagged = true;
        rep.mean_delay = std::nan("");
        rep.w_bound = std::numeric_limits<double>::infinity();
        return rep;
    }
    rep.mean_delay = delay_sum / static_cast<double>(in_band_departed);
    rep.w_bound = (q_high - q_low + delta_max) / rep.lambda_tilde;
    return rep;
}

}  // namespace bpsim
