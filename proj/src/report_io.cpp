#include "bpsim/report_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace bpsim {

using nlohmann::json;

namespace {

// CSV numbers go through one fixed format so reruns are byte-identical.
std::string num(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.10g", x);
    return buf;
}

json finite_or_null(double x) {
    if (std::isnan(x)) return nullptr;
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    return x;
}

}  // namespace

json to_json(const RunReport& rep) {
    json j;
    j["scenario"] = rep.scenario;
    j["v_param"] = rep.v_param;
    j["discipline"] = rep.discipline;
    if (rep.d_max > 0) j["d_max"] = rep.d_max;
    j["horizon"] = rep.horizon;
    j["warmup"] = rep.warmup;
    j["seed"] = rep.seed;
    j["avg_cost"] = rep.avg_cost;
    j["avg_backlog"] = rep.avg_backlog;
    j["injected"] = rep.injected;
    j["delivered"] = rep.delivered;
    j["undelivered"] = rep.undelivered;
    j["dropped"] = rep.dropped;
    j["null_filtered"] = rep.null_filtered;
    j["delay_mean"] = rep.delay_mean;
    j["delay_p50"] = rep.delay_p50;
    j["delay_p90"] = rep.delay_p90;
    j["delay_p99"] = rep.delay_p99;
    j["delay_frac_lt_20"] = rep.delay_frac_lt_20;
    j["delay_frac_lt_100"] = rep.delay_frac_lt_100;
    j["per_queue_delay"] = rep.per_queue_delay;
    j["per_queue_arrival_rate"] = rep.per_queue_arrival_rate;
    j["deviation_fraction"] = rep.deviation_fraction >= 0 ? json(rep.deviation_fraction) : json();
    j["band"] = rep.band;
    j["backlog_histogram"] = rep.backlog_histogram;
    return j;
}

json to_json(const DualSolution& sol) {
    json j;
    j["gamma_star"] = sol.gamma_star;
    j["g_value"] = sol.g_value;
    j["iterations"] = sol.iterations;
    j["residual"] = sol.residual;
    j["per_state_minimizers"] = sol.per_state_minimizers;
    j["converged"] = sol.converged;
    j["L_hat"] = finite_or_null(sol.l_hat);
    return j;
}

json to_json(const AuxReport& rep) {
    json j;
    j["h_avg"] = rep.h_avg;
    j["z_bar"] = rep.z_bar;
    j["y_bar"] = rep.y_bar;
    j["objective_at_z_bar"] = rep.objective_at_z_bar;
    j["avg_cost"] = rep.avg_cost;
    j["avg_backlog"] = rep.avg_backlog;
    j["h_max"] = rep.h_max;
    return j;
}

json to_json(const ComparisonTable& t) {
    json j;
    j["fifo"] = {{"mean", t.fifo_mean}, {"p50", t.fifo_p50},       {"p90", t.fifo_p90},
                 {"p99", t.fifo_p99},   {"frac_lt_20", t.fifo_frac_lt_20},
                 {"frac_lt_100", t.fifo_frac_lt_100}};
    j["lifo"] = {{"mean", t.lifo_mean}, {"p50", t.lifo_p50},       {"p90", t.lifo_p90},
                 {"p99", t.lifo_p99},   {"frac_lt_20", t.lifo_frac_lt_20},
                 {"frac_lt_100", t.lifo_frac_lt_100}};
    j["mean_ratio"] = finite_or_null(t.mean_ratio);
    return j;
}

json to_json(const AttractionFit& fit) {
    json j;
    j["d_hat"] = fit.d_hat;
    j["k_hat"] = fit.k_hat;
    j["decay_slope"] = finite_or_null(fit.decay_slope);
    j["intercept"] = finite_or_null(fit.intercept);
    j["fit_error"] = finite_or_null(fit.fit_error);
    j["points"] = fit.points;
    j["insufficient"] = fit.insufficient;
    return j;
}

json to_json(const BandReport& rep) {
    json j;
    j["q_low"] = rep.q_low;
    j["q_high"] = rep.q_high;
    j["lambda"] = rep.lambda;
    j["lambda_tilde"] = rep.lambda_tilde;
    j["mean_delay"] = finite_or_null(rep.mean_delay);
    j["outside_fraction"] = rep.outside_fraction;
    j["w_bound"] = finite_or_null(rep.w_bound);
    j["in_band_departed"] = rep.in_band_departed;
    j["flagged"] = rep.flagged;
    return j;
}

json to_json(const LittleCheckResult& res) {
    json j;
    j["w_bar"] = res.w_bar;
    j["bound"] = res.bound;
    j["holds"] = res.holds;
    j["observed_arrival_rate"] = res.observed_arrival_rate;
    j["premise_ok"] = res.premise_ok;
    return j;
}

std::string csv_header() {
    return "V,discipline,seed,avg_cost,avg_backlog,delay_mean,delay_p50,delay_p90,"
           "deviation_fraction,delivered,dropped\n";
}

std::string csv_row(const RunReport& rep) {
    std::string row;
    row += num(rep.v_param);
    row += ',';
    row += rep.discipline;
    if (rep.d_max > 0) row += std::to_string(rep.d_max);
    row += ',';
    row += std::to_string(rep.seed);
    row += ',';
    row += num(rep.avg_cost);
    row += ',';
    row += num(rep.avg_backlog);
    row += ',';
    row += num(rep.delay_mean);
    row += ',';
    row += num(rep.delay_p50);
    row += ',';
    row += num(rep.delay_p90);
    row += ',';
    row += num(rep.deviation_fraction);
    row += ',';
    row += std::to_string(rep.delivered);
    row += ',';
    row += std::to_string(rep.dropped);
    row += '\n';
    return row;
}

std::string backlog_trace_csv(const std::vector<std::vector<std::uint32_t>>& trace) {
    std::string out = "slot";
    for (std::size_t j = 0; j < trace.size(); ++j) out += ",q" + std::to_string(j);
    out += '\n';
    if (trace.empty()) return out;
    const std::size_t slots = trace[0].size();
    for (std::size_t t = 0; t < slots; ++t) {
        out += std::to_string(t);
        for (const auto& q : trace) {
            out += ',';
            out += std::to_string(q[t]);
        }
        out += '\n';
    }
    return out;
}

std::string packet_trace_csv(const std::vector<PacketTraceRow>& rows) {
    std::string out =
        "packet_id,queue_id,enqueue_slot,dequeue_slot,entry_backlog,is_null,end_to_end_delay\n";
    for (const auto& r : rows) {
        out += std::to_string(r.packet_id);
        out += ',';
        out += std::to_string(r.queue_id);
        out += ',';
        out += std::to_string(r.enqueue_slot);
        out += ',';
        out += std::to_string(r.dequeue_slot);
        out += ',';
        out += std::to_string(r.entry_backlog);
        out += ',';
        out += r.is_null ? '1' : '0';
        out += ',';
        out += std::to_string(r.end_to_end_delay);
        out += '\n';
    }
    return out;
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << content;
}

}  // namespace bpsim
