#pragma once

#include <string>

#include <json.hpp>

#include "bpsim/auxctrl.hpp"
#include "bpsim/dualopt.hpp"
#include "bpsim/engine.hpp"
#include "bpsim/queueing.hpp"

namespace bpsim {

nlohmann::json to_json(const RunReport& rep);
nlohmann::json to_json(const DualSolution& sol);
nlohmann::json to_json(const AuxReport& rep);
nlohmann::json to_json(const ComparisonTable& table);
nlohmann::json to_json(const AttractionFit& fit);
nlohmann::json to_json(const BandReport& rep);
nlohmann::json to_json(const LittleCheckResult& res);

/// Fixed sweep CSV schema.
std::string csv_header();
std::string csv_row(const RunReport& rep);

/// Backlog trace CSV: slot, q0..q{r-1}.
std::string backlog_trace_csv(const std::vector<std::vector<std::uint32_t>>& trace);

/// Per-packet trace CSV (gated by --emit-traces).
std::string packet_trace_csv(const std::vector<PacketTraceRow>& rows);

void write_text_file(const std::string& path, const std::string& content);

}  // namespace bpsim
