#include "bpsim/engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "bpsim/controller.hpp"
#include "bpsim/errors.hpp"
#include "bpsim/rng.hpp"

namespace bpsim {

double RunConfig::effective_band() const {
    if (band_margin >= 0) return band_margin;
    const double lv = std::log(v_param);
    return 2.0 * lv * lv;
}

double RunConfig::effective_ceiling() const {
    if (sanity_ceiling >= 0) return sanity_ceiling;
    return 1e6 * (spec ? spec->queue_count : 1);
}

namespace {

double percentile(const std::vector<std::uint32_t>& sorted, double q) {
    if (sorted.empty()) return 0.0;
    const auto n = static_cast<std::int64_t>(sorted.size());
    std::int64_t rank = static_cast<std::int64_t>(std::ceil(q * static_cast<double>(n)));
    rank = std::clamp<std::int64_t>(rank, 1, n);
    return static_cast<double>(sorted[static_cast<std::size_t>(rank - 1)]);
}

double frac_below(const std::vector<std::uint32_t>& sorted, std::uint32_t limit) {
    if (sorted.empty()) return 0.0;
    const auto it = std::lower_bound(sorted.begin(), sorted.end(), limit);
    return static_cast<double>(it - sorted.begin()) / static_cast<double>(sorted.size());
}

}  // namespace

RunResult run(const RunConfig& config) {
    const ScenarioSpec& spec = *config.spec;
    if (!spec.validated) throw ValidationError("run requires a validated spec");
    if (!spec.integer_tables)
        throw ValidationError("packet-level runs require integer packet quantities");
    if (config.horizon <= 0) throw ValidationError("horizon must be positive");
    if (config.v_param < 1.0) throw ValidationError("v_param must be >= 1");
    if (config.discipline == Discipline::FloatingLifo && config.d_max <= 0)
        throw ValidationError("floating discipline requires d_max > 0");

    const int r = spec.queue_count;
    const auto horizon = config.horizon;
    const auto warmup = config.effective_warmup();
    const double band = config.effective_band();
    const double ceiling = config.effective_ceiling();
    const bool has_attractor = static_cast<int>(config.attractor.size()) == r;
    const bool decomposed = config.use_decomposed && spec.separable;

    RunResult result;
    RunReport& rep = result.report;
    rep.scenario = spec.name;
    rep.v_param = config.v_param;
    rep.discipline = discipline_name(config.discipline);
    rep.d_max = config.discipline == Discipline::FloatingLifo ? config.d_max : 0;
    rep.horizon = horizon;
    rep.warmup = warmup;
    rep.seed = config.seed;
    rep.band = band;
    rep.per_queue_delay.assign(r, 0.0);
    rep.per_queue_arrival_rate.assign(r, 0.0);
    rep.backlog_histogram.assign(r, {});

    std::vector<QueueBuffer> buffers(r);
    for (auto& b : buffers) {
        b.discipline = config.discipline;
        b.d_max = config.d_max;
    }

    Rng rng(config.seed);
    int state = 0;  // S(0) is pinned for reproducibility; warmup absorbs the bias

    std::uint64_t next_packet_id = 0;
    std::vector<std::vector<Packet>> pending(r), pending_next(r);  // transfers in flight
    std::vector<Packet> arrivals;
    std::vector<Packet> departed;
    std::vector<std::uint32_t> delays;
    std::vector<ArrivalOutcome> outcomes;
    std::vector<double> backlog(r, 0.0);
    std::vector<double> delay_sum(r, 0.0);
    std::vector<std::uint64_t> delay_count(r, 0);

    if (config.retain_backlog_trace)
        result.backlog_trace.assign(r, std::vector<std::uint32_t>());
    if (config.retain_queue_records) result.queue_records.assign(r, {});
    if (config.retain_slot_io) result.slot_io.assign(r, std::vector<SlotIo>());

    double cost_sum = 0.0;
    double backlog_slot_sum = 0.0;
    std::int64_t deviation_slots = 0, counted_slots = 0;

    // hop-delay bookkeeping for a packet leaving queue j at slot `now`
    auto finish_hop = [&](Packet& p, std::uint32_t now, int j) {
        if (config.retain_packet_trace && p.trace_slot != kNoRecord) {
            PacketTraceRow& row = result.packet_trace[p.trace_slot];
            row.dequeue_slot = now;
            if (!p.is_null && spec.is_sink(j)) row.end_to_end_delay = now - p.birth_slot;
            p.trace_slot = kNoRecord;
        }
        if (p.is_null) return;
        const std::uint32_t hop_delay = now - p.hop_enqueue_slot;
        delay_sum[j] += hop_delay;
        ++delay_count[j];
        if (config.retain_queue_records && p.record_slot != kNoRecord) {
            PacketRecord& rec = result.queue_records[j][p.record_slot];
            rec.departed = true;
            rec.delay = hop_delay;
        }
    };

    for (std::int64_t t = 0; t < horizon; ++t) {
        if (t > 0) state = sample_next_state(spec.chain, state, rng);
        const auto now = static_cast<std::uint32_t>(t);

        double total_backlog = 0.0;
        for (int j = 0; j < r; ++j) {
            backlog[j] = static_cast<double>(buffers[j].backlog_level());
            total_backlog += backlog[j];
        }
        if (total_backlog > ceiling)
            throw RunAbortError("instability suspected: backlog " + std::to_string(total_backlog) +
                                " exceeded ceiling at slot " + std::to_string(t));

        if (t >= warmup) {
            ++counted_slots;
            backlog_slot_sum += total_backlog;
            for (int j = 0; j < r; ++j) {
                auto& hist = rep.backlog_histogram[j];
                const auto level = static_cast<std::size_t>(backlog[j]);
                if (hist.size() <= level) hist.resize(level + 1, 0);
                ++hist[level];
            }
            if (has_attractor) {
                for (int j = 0; j < r; ++j)
                    if (std::abs(backlog[j] - config.attractor[j]) > band) {
                        ++deviation_slots;
                        break;
                    }
            }
        }
        if (config.retain_backlog_trace)
            for (int j = 0; j < r; ++j)
                result.backlog_trace[j].push_back(static_cast<std::uint32_t>(backlog[j]));

        const Decision decision = decomposed
                                      ? bp_decide_decomposed(spec, state, backlog, config.v_param)
                                      : bp_decide(spec, state, backlog, config.v_param);
        const int k = decision.action_index;
        const ActionRow& row = spec.actions[state][k];
        if (t >= warmup) cost_sum += row.cost;

        // exogenous arrivals minted this slot
        if (!spec.exogenous.empty()) {
            for (const auto& e : spec.exogenous[state][k]) {
                const auto count = static_cast<std::int64_t>(e.count);
                for (std::int64_t i = 0; i < count; ++i) {
                    Packet p;
                    p.id = next_packet_id++;
                    p.birth_slot = now;
                    pending[e.queue].push_back(p);
                    ++rep.injected;
                }
            }
        }

        for (int j = 0; j < r; ++j) {
            const auto mu = static_cast<std::uint64_t>(row.services[j]);
            arrivals.clear();
            arrivals.swap(pending[j]);
            if (config.retain_slot_io)
                result.slot_io[j].push_back(
                    {static_cast<std::uint32_t>(mu), static_cast<std::uint32_t>(arrivals.size())});

            if (config.retain_queue_records || config.retain_packet_trace) {
                // records align with ascending-id order used by apply_slot
                std::sort(arrivals.begin(), arrivals.end(),
                          [](const Packet& a, const Packet& b) { return a.id < b.id; });
                for (auto& p : arrivals) {
                    if (config.retain_queue_records && !p.is_null) {
                        p.record_slot = static_cast<std::uint32_t>(result.queue_records[j].size());
                        PacketRecord rec;
                        rec.entry_backlog = static_cast<std::uint32_t>(backlog[j]);
                        result.queue_records[j].push_back(rec);
                    }
                    if (config.retain_packet_trace) {
                        p.trace_slot = static_cast<std::uint32_t>(result.packet_trace.size());
                        PacketTraceRow row;
                        row.packet_id = p.id;
                        row.queue_id = static_cast<std::uint16_t>(j);
                        row.enqueue_slot = now;
                        row.entry_backlog = static_cast<std::uint32_t>(backlog[j]);
                        row.is_null = p.is_null;
                        result.packet_trace.push_back(row);
                    }
                }
            }

            departed.clear();
            delays.clear();
            apply_slot(buffers[j], mu, arrivals, now, departed, delays, next_packet_id,
                       config.retain_queue_records ? &outcomes : nullptr);

            if (config.retain_queue_records) {
                for (std::size_t a = 0; a < arrivals.size(); ++a) {
                    const Packet& p = arrivals[a];
                    if (p.is_null || p.record_slot == kNoRecord) continue;
                    result.queue_records[j][p.record_slot].entry_depth =
                        outcomes[a].stored ? outcomes[a].depth : kNoRecord;
                }
            }

            // hop-delay accounting and routing of this slot's departures
            const bool sink = spec.is_sink(j);
            std::size_t cursor = 0;
            if (!sink && !spec.routing.empty()) {
                for (const auto& tr : spec.routing[state][k]) {
                    if (tr.src != j) continue;
                    auto count = static_cast<std::int64_t>(tr.count);
                    for (; count > 0 && cursor < departed.size(); --count, ++cursor) {
                        Packet& p = departed[cursor];
                        finish_hop(p, now, j);
                        p.record_slot = kNoRecord;
                        pending_next[tr.dst].push_back(std::move(p));
                    }
                }
            }
            for (; cursor < departed.size(); ++cursor) {
                Packet& p = departed[cursor];
                finish_hop(p, now, j);
                if (p.is_null) {
                    ++rep.null_filtered;
                } else {
                    ++rep.delivered;
                    result.delivered_delays.push_back(now - p.birth_slot);
                }
            }
        }
        for (int j = 0; j < r; ++j) {
            pending[j].clear();
            pending[j].swap(pending_next[j]);
        }
    }

    // wrap-up
    for (int j = 0; j < r; ++j) {
        rep.dropped += buffers[j].drops;
        rep.per_queue_arrival_rate[j] =
            static_cast<double>(buffers[j].real_arrivals) / static_cast<double>(horizon);
        for (const auto& p : buffers[j].data)
            if (!p.is_null) ++rep.undelivered;
    }
    for (int j = 0; j < r; ++j)
        for (const auto& p : pending[j])
            if (!p.is_null) ++rep.undelivered;

    const double window = static_cast<double>(std::max<std::int64_t>(horizon - warmup, 1));
    rep.avg_cost = cost_sum / window;
    rep.avg_backlog = backlog_slot_sum / window;
    rep.deviation_fraction =
        has_attractor && counted_slots > 0
            ? static_cast<double>(deviation_slots) / static_cast<double>(counted_slots)
            : -1.0;

    for (int j = 0; j < r; ++j)
        rep.per_queue_delay[j] = delay_count[j] > 0 ? delay_sum[j] / delay_count[j] : 0.0;

    std::vector<std::uint32_t> sorted = result.delivered_delays;
    std::sort(sorted.begin(), sorted.end());
    if (!sorted.empty()) {
        double sum = 0.0;
        for (auto d : sorted) sum += d;
        rep.delay_mean = sum / static_cast<double>(sorted.size());
        rep.delay_p50 = percentile(sorted, 0.50);
        rep.delay_p90 = percentile(sorted, 0.90);
        rep.delay_p99 = percentile(sorted, 0.99);
        rep.delay_frac_lt_20 = frac_below(sorted, 20);
        rep.delay_frac_lt_100 = frac_below(sorted, 100);
    }
    return result;
}

double deviation_fraction(const std::vector<std::vector<std::uint32_t>>& backlog_trace,
                          std::span<const double> gamma_star, double band,
                          std::int64_t from_slot) {
    if (backlog_trace.empty() || backlog_trace[0].empty())
        throw std::invalid_argument("empty backlog trace");
    const auto slots = static_cast<std::int64_t>(backlog_trace[0].size());
    const int r = static_cast<int>(backlog_trace.size());
    std::int64_t bad = 0, counted = 0;
    for (std::int64_t t = from_slot; t < slots; ++t) {
        ++counted;
        for (int j = 0; j < r; ++j)
            if (std::abs(static_cast<double>(backlog_trace[j][t]) - gamma_star[j]) > band) {
                ++bad;
                break;
            }
    }
    return counted > 0 ? static_cast<double>(bad) / static_cast<double>(counted) : 0.0;
}

AttractionFit estimate_attraction(const std::vector<std::vector<std::uint32_t>>& backlog_trace,
                                  std::span<const double> gamma_star,
                                  std::span<const double> d_grid, std::span<const double> k_grid,
                                  int m_points, std::int64_t from_slot) {
    if (backlog_trace.empty() || backlog_trace[0].empty())
        throw std::invalid_argument("empty backlog trace");
    const auto slots = static_cast<std::int64_t>(backlog_trace[0].size());
    const int r = static_cast<int>(backlog_trace.size());

    // max deviation across queues per slot, sorted for O(log) tail queries
    std::vector<double> dev;
    dev.reserve(static_cast<std::size_t>(slots - from_slot));
    for (std::int64_t t = from_slot; t < slots; ++t) {
        double d = 0.0;
        for (int j = 0; j < r; ++j)
            d = std::max(d, std::abs(static_cast<double>(backlog_trace[j][t]) - gamma_star[j]));
        dev.push_back(d);
    }
    std::sort(dev.begin(), dev.end());
    const double total = static_cast<double>(dev.size());
    auto tail = [&](double threshold) {
        const auto it = std::upper_bound(dev.begin(), dev.end(), threshold);
        return static_cast<double>(dev.end() - it) / total;
    };

    std::vector<AttractionFit> fits;
    bool any_tail = false;
    for (double d0 : d_grid) {
        for (double k0 : k_grid) {
            // log tail at thresholds d0 + k0 * m; saturated points (tail = 1)
            // are censored, they carry no decay information
            std::vector<double> xs, ys;
            for (int m = 1; m <= m_points; ++m) {
                const double frac = tail(d0 + k0 * m);
                if (frac <= 0.0) break;
                if (frac >= 1.0) continue;
                any_tail = true;
                xs.push_back(m);
                ys.push_back(std::log(frac));
            }
            if (xs.size() < 3) continue;
            const auto n = static_cast<double>(xs.size());
            double sx = 0, sy = 0, sxx = 0, sxy = 0;
            for (std::size_t i = 0; i < xs.size(); ++i) {
                sx += xs[i];
                sy += ys[i];
                sxx += xs[i] * xs[i];
                sxy += xs[i] * ys[i];
            }
            const double denom = n * sxx - sx * sx;
            if (denom == 0.0) continue;
            AttractionFit fit;
            fit.d_hat = d0;
            fit.k_hat = k0;
            fit.decay_slope = (n * sxy - sx * sy) / denom;
            fit.intercept = (sy - fit.decay_slope * sx) / n;
            double sse = 0.0;
            for (std::size_t i = 0; i < xs.size(); ++i) {
                const double e = ys[i] - (fit.intercept + fit.decay_slope * xs[i]);
                sse += e * e;
            }
            fit.fit_error = sse / n;
            fit.points = static_cast<int>(xs.size());
            fits.push_back(fit);
        }
    }
    if (fits.empty()) {
        AttractionFit none;
        none.d_hat = d_grid.empty() ? 0.0 : d_grid[0];
        none.k_hat = k_grid.empty() ? 0.0 : k_grid[0];
        none.decay_slope = -std::numeric_limits<double>::infinity();
        none.fit_error = std::numeric_limits<double>::infinity();
        none.insufficient = any_tail;  // data exists but too thin: widen grids
        return none;
    }
    // A clean exponential fits every (D, K) equally well (slope = -K * rate),
    // so the error alone cannot pin K. Among the fits that span the most of
    // the decay region and whose error is within a small factor of the best,
    // take the largest K: it is the scale that absorbs the decay rate.
    int max_points = 0;
    for (const auto& f : fits) max_points = std::max(max_points, f.points);
    double err_floor = std::numeric_limits<double>::infinity();
    for (const auto& f : fits)
        if (f.points == max_points) err_floor = std::min(err_floor, f.fit_error);
    const double err_cut = std::max(3.0 * err_floor, 0.05);
    const AttractionFit* best = nullptr;
    for (const auto& f : fits) {
        if (f.points != max_points || f.fit_error > err_cut) continue;
        if (!best || f.k_hat > best->k_hat ||
            (f.k_hat == best->k_hat && (f.d_hat < best->d_hat ||
                                        (f.d_hat == best->d_hat && f.fit_error < best->fit_error))))
            best = &f;
    }
    return *best;
}

ComparisonTable delay_comparison(const RunReport& report_lifo, const RunReport& report_fifo) {
    if (report_lifo.scenario != report_fifo.scenario ||
        report_lifo.v_param != report_fifo.v_param ||
        report_lifo.horizon != report_fifo.horizon || report_lifo.seed != report_fifo.seed)
        throw std::invalid_argument("delay comparison requires matching run configurations");
    ComparisonTable t;
    t.fifo_mean = report_fifo.delay_mean;
    t.lifo_mean = report_lifo.delay_mean;
    t.mean_ratio = report_lifo.delay_mean > 0 ? report_fifo.delay_mean / report_lifo.delay_mean
                                              : std::numeric_limits<double>::infinity();
    t.fifo_p50 = report_fifo.delay_p50;
    t.fifo_p90 = report_fifo.delay_p90;
    t.fifo_p99 = report_fifo.delay_p99;
    t.lifo_p50 = report_lifo.delay_p50;
    t.lifo_p90 = report_lifo.delay_p90;
    t.lifo_p99 = report_lifo.delay_p99;
    t.fifo_frac_lt_20 = report_fifo.delay_frac_lt_20;
    t.lifo_frac_lt_20 = report_lifo.delay_frac_lt_20;
    t.fifo_frac_lt_100 = report_fifo.delay_frac_lt_100;
    t.lifo_frac_lt_100 = report_lifo.delay_frac_lt_100;
    return t;
}

}  // namespace bpsim
