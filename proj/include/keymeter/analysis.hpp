#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "keymeter/levels.hpp"
#include "keymeter/result.hpp"
#include "keymeter/results_log.hpp"

namespace keymeter {

/// Platform background power fitted from NULL runs.
struct BaselineModel {
    double background_watts = 0;
    int source_runs = 0;
    double total_null_seconds = 0;
};

/// One experiment after baseline correction.
struct ExperimentResult {
    std::string algorithm_label;
    std::uint64_t iterations = 0;
    double gross_joules = 0;
    double wall_seconds = 0;
    double net_joules = 0;
    double joules_per_1000_net = 0;
    double seconds_per_1000 = 0;
    bool clamped = false; // net went negative and was clamped to 0
};

/// Duration-weighted mean power over the NULL runs:
/// background_watts = sum(gross) / sum(wall).
Result<BaselineModel>
fit_baseline(const std::vector<std::pair<double, double>>& null_gross_wall);

Result<ExperimentResult> net_rate(const std::string& algorithm_label,
                                  double gross_joules, double wall_seconds,
                                  std::uint64_t iterations,
                                  const BaselineModel& baseline);

/// One row of the level-grouped comparison table.
struct LevelRow {
    int nist_level = 1;
    std::string protocol; // display label from the level map
    AlgoCategory category = AlgoCategory::Classic;
    std::string equiv_bits; // rendered, may carry '~'
    double joules_per_1000 = 0;
    double seconds_per_1000 = 0;
};

/// Rows sorted by NIST level, then category (ECC, PQ, classic), then
/// equivalent bits; independent of input order. Errors name any algorithm
/// missing from the map.
Result<std::vector<LevelRow>> level_table(const std::vector<ExperimentResult>& results,
                                          const SecurityLevelMap& levels);

struct FleetScenario {
    double keygens_per_year = 0;
    double from_joules_per_key = 0;
    double to_joules_per_key = 0;
    double price_per_kwh = 0;
    std::string currency = "GBP";
};

/// Key=value file, '#' comments: keygens_per_year, from_joules_per_key,
/// to_joules_per_key, price_per_kwh, currency.
Result<FleetScenario> parse_fleet_scenario(const std::string& text);

struct FleetReport {
    double annual_kwh_from = 0;
    double annual_kwh_to = 0;
    double annual_cost_from = 0;
    double annual_cost_to = 0;
    double multiplier = 0; // from_joules / to_joules
};

Result<FleetReport> fleet_savings(const FleetScenario& scenario);

struct AnalysisReport {
    BaselineModel baseline;
    bool uncorrected = false; // no NULL rows: zero baseline assumed
    int skipped_rows = 0;     // rows whose status was not "ok"
    std::vector<ExperimentResult> per_run;       // input order
    std::vector<ExperimentResult> per_algorithm; // grouped totals
};

/// Reads AllResults.csv, splits NULL vs workload rows, fits the baseline and
/// produces per-run and per-algorithm corrected results.
Result<AnalysisReport> aggregate(const std::filesystem::path& all_results_path,
                                 const std::string& null_label = "NULL");

Result<AnalysisReport> aggregate_rows(const std::vector<SummaryRow>& rows,
                                      const std::string& null_label = "NULL");

/// Writes level_table.csv, chart_energy.svg, chart_time.svg and (when a
/// scenario is given) fleet_report.txt into out_dir.
Status write_analysis_outputs(const AnalysisReport& report,
                              const SecurityLevelMap& levels,
                              const std::filesystem::path& out_dir,
                              const std::optional<FleetScenario>& fleet,
                              std::string* level_csv_out = nullptr);

std::string render_fleet_report(const FleetScenario& scenario,
                                const FleetReport& report);

} // namespace keymeter
