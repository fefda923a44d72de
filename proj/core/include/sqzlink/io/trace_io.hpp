#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "sqzlink/io/scenario.hpp"
#include "sqzlink/lock/loop.hpp"

namespace sqz {

// Columnar trace persistence: one little-endian binary file per column and a
// JSON sidecar (header.json) naming each column, its units, dtype and sample
// rate, plus the config hash and seed of the run.
void write_trace(const std::string& dir, const SimulationTrace& trace,
                 const Scenario& scenario);

struct LoadedTrace {
    std::map<std::string, std::vector<float>> columns;
    std::map<std::string, std::vector<std::uint8_t>> byte_columns;
    std::string header_json;
    std::uint64_t config_hash = 0;
    std::uint64_t seed = 0;
    double sample_rate_hz = 0.0;
    double controller_rate_hz = 0.0;
};

LoadedTrace read_trace(const std::string& dir);

// CSV export of the controller-rate columns (full-rate columns are too large
// for CSV to be useful).
void export_trace_csv(const std::string& dir, const SimulationTrace& trace,
                      const std::string& csv_path);

}  // namespace sqz
