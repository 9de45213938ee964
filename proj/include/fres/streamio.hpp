#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "fres/mcjump.hpp"

namespace fres::streamio {

/// Canonical JSON for a run configuration (cascade, chi fractions, dt, stop
/// rule, seed). Field order is fixed so the text is a stable hash input.
nlohmann::json run_config_json(const mcjump::RunConfig& cfg);

/// Parse the cascade/run part back out of a sidecar document.
mcjump::RunConfig run_config_from_json(const nlohmann::json& j);

/// Format with 9 significant digits, the number format of every table.
std::string format_g9(double value);

/// Click stream CSV: `# key=value` header lines, then `time,channel,label`
/// rows. A `<path>.json` sidecar holds the full run configuration.
void write_clickstream(const std::filesystem::path& path, const mcjump::ClickStream& stream);

mcjump::ClickStream read_clickstream(const std::filesystem::path& path);

/// Generic numeric table with a one-line header, comma separated.
struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
    std::vector<std::string> comments; ///< written as leading `# ...` lines
};

void write_table(const std::filesystem::path& path, const Table& table);

Table read_table(const std::filesystem::path& path);

} // namespace fres::streamio
