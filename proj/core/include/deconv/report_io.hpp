#pragma once

#include <string>

#include "deconv/harness.hpp"

namespace deconv {

// JSON serialization round-trips exactly: doubles are written with enough
// digits to reproduce the same bits, and seeds are hex strings.
std::string report_to_json(const MonteCarloReport& rep);
MonteCarloReport report_from_json(const std::string& text);
void write_report_json(const MonteCarloReport& rep, const std::string& path);
MonteCarloReport read_report_json(const std::string& path);

// CSV: '#'-prefixed header lines carry the config and its hash, then one row
// per replication (index, seed, standardized value).
void write_report_csv(const MonteCarloReport& rep, const std::string& path);

std::string sweep_to_json(const SweepTable& table);
void write_sweep_json(const SweepTable& table, const std::string& path);

}  // namespace deconv
