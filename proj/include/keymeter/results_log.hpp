#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "keymeter/result.hpp"

namespace keymeter {

/// One completed experiment in AllResults.csv. The master log is append-only;
/// a header is written when the file does not exist yet.
struct SummaryRow {
    std::string timestamp; // ISO 8601, finalize time
    std::string algorithm_label;
    std::uint64_t iterations = 0;
    double gross_joules = 0;
    double wall_seconds = 0;
    double joules_per_1000 = 0;
    double seconds_per_1000 = 0;
    std::string status; // "ok", "truncated", "no-data"
};

std::string summary_header();
std::string summary_line(const SummaryRow& row);

/// Appends one line, creating the file (with header) on first use.
Status append_summary_row(const std::filesystem::path& path,
                          const SummaryRow& row);

Result<std::vector<SummaryRow>> read_all_results(const std::filesystem::path& path);

} // namespace keymeter
