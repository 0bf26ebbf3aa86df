#include "keymeter/analysis.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

#include "keymeter/svg_chart.hpp"
#include "keymeter/text.hpp"
#include "keymeter/units.hpp"

namespace keymeter {

Result<BaselineModel>
fit_baseline(const std::vector<std::pair<double, double>>& null_gross_wall)
{
    using R = Result<BaselineModel>;
    if (null_gross_wall.empty())
        return R::failure("no NULL runs to fit a baseline from");

    double total_j = 0;
    double total_s = 0;
    for (const auto& [gross, wall] : null_gross_wall) {
        if (wall <= 0)
            return R::failure("NULL run with non-positive duration");
        total_j += gross;
        total_s += wall;
    }
    BaselineModel model;
    model.background_watts = total_j / total_s;
    model.source_runs = static_cast<int>(null_gross_wall.size());
    model.total_null_seconds = total_s;
    return model;
}

Result<ExperimentResult> net_rate(const std::string& algorithm_label,
                                  double gross_joules, double wall_seconds,
                                  std::uint64_t iterations,
                                  const BaselineModel& baseline)
{
    using R = Result<ExperimentResult>;
    if (iterations < 1)
        return R::failure(algorithm_label + ": iterations must be >= 1");
    if (wall_seconds <= 0)
        return R::failure(algorithm_label + ": wall_seconds must be positive");

    ExperimentResult result;
    result.algorithm_label = algorithm_label;
    result.iterations = iterations;
    result.gross_joules = gross_joules;
    result.wall_seconds = wall_seconds;
    result.net_joules = gross_joules - baseline.background_watts * wall_seconds;
    if (result.net_joules < 0) {
        result.net_joules = 0;
        result.clamped = true;
    }
    const double per_key = static_cast<double>(iterations);
    result.joules_per_1000_net = result.net_joules / per_key * 1000.0;
    result.seconds_per_1000 = wall_seconds / per_key * 1000.0;
    return result;
}

Result<std::vector<LevelRow>>
level_table(const std::vector<ExperimentResult>& results,
            const SecurityLevelMap& levels)
{
    using R = Result<std::vector<LevelRow>>;

    struct Keyed {
        SecurityLevelEntry entry;
        LevelRow row;
    };
    std::vector<Keyed> keyed;
    keyed.reserve(results.size());
    for (const auto& result : results) {
        auto entry = levels.find(result.algorithm_label);
        if (!entry.ok())
            return R::failure(entry.error());
        Keyed k;
        k.entry = entry.value();
        k.row.nist_level = k.entry.nist_level;
        k.row.protocol = k.entry.display_label;
        k.row.category = k.entry.category;
        k.row.equiv_bits = (k.entry.equiv_approx ? "~" : "") +
                           std::to_string(k.entry.equiv_bits);
        k.row.joules_per_1000 = result.joules_per_1000_net;
        k.row.seconds_per_1000 = result.seconds_per_1000;
        keyed.push_back(std::move(k));
    }
    std::stable_sort(keyed.begin(), keyed.end(),
                     [](const Keyed& a, const Keyed& b) {
                         return level_order_less(a.entry, b.entry);
                     });
    std::vector<LevelRow> rows;
    rows.reserve(keyed.size());
    for (auto& k : keyed)
        rows.push_back(std::move(k.row));
    return rows;
}

Result<FleetScenario> parse_fleet_scenario(const std::string& text)
{
    using R = Result<FleetScenario>;
    FleetScenario scenario;
    bool saw_keys = false, saw_from = false, saw_to = false, saw_price = false;

    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#')
            continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos)
            return R::failure("fleet scenario line " + std::to_string(line_no) +
                              ": expected key = value");
        const std::string key = trim(t.substr(0, eq));
        const std::string value = trim(t.substr(eq + 1));
        if (key == "currency") {
            scenario.currency = value;
            continue;
        }
        double v = 0;
        const auto [p, ec] = std::from_chars(value.data(),
                                             value.data() + value.size(), v);
        if (ec != std::errc() || p != value.data() + value.size())
            return R::failure("fleet scenario line " + std::to_string(line_no) +
                              ": bad number '" + value + "'");
        if (key == "keygens_per_year") {
            scenario.keygens_per_year = v;
            saw_keys = true;
        } else if (key == "from_joules_per_key") {
            scenario.from_joules_per_key = v;
            saw_from = true;
        } else if (key == "to_joules_per_key") {
            scenario.to_joules_per_key = v;
            saw_to = true;
        } else if (key == "price_per_kwh") {
            scenario.price_per_kwh = v;
            saw_price = true;
        } else {
            return R::failure("fleet scenario line " + std::to_string(line_no) +
                              ": unknown key '" + key + "'");
        }
    }
    if (!saw_keys || !saw_from || !saw_to || !saw_price)
        return R::failure("fleet scenario: keygens_per_year, "
                          "from_joules_per_key, to_joules_per_key and "
                          "price_per_kwh are all required");
    return scenario;
}

Result<FleetReport> fleet_savings(const FleetScenario& scenario)
{
    using R = Result<FleetReport>;
    if (scenario.keygens_per_year <= 0 || scenario.from_joules_per_key <= 0 ||
        scenario.price_per_kwh <= 0)
        return R::failure("fleet scenario values must be positive");
    if (scenario.to_joules_per_key <= 0)
        return R::failure("to_joules_per_key must be positive");

    constexpr double kJoulesPerKwh = 3.6e6;
    FleetReport report;
    report.annual_kwh_from =
        scenario.keygens_per_year * scenario.from_joules_per_key / kJoulesPerKwh;
    report.annual_kwh_to =
        scenario.keygens_per_year * scenario.to_joules_per_key / kJoulesPerKwh;
    report.annual_cost_from = report.annual_kwh_from * scenario.price_per_kwh;
    report.annual_cost_to = report.annual_kwh_to * scenario.price_per_kwh;
    report.multiplier =
        scenario.from_joules_per_key / scenario.to_joules_per_key;
    return report;
}

Result<AnalysisReport> aggregate_rows(const std::vector<SummaryRow>& rows,
                                      const std::string& null_label)
{
    using R = Result<AnalysisReport>;
    AnalysisReport report;

    std::vector<std::pair<double, double>> null_runs;
    std::vector<const SummaryRow*> workload;
    for (const auto& row : rows) {
        if (row.status != "ok") {
            ++report.skipped_rows;
            continue;
        }
        if (row.algorithm_label == null_label)
            null_runs.emplace_back(row.gross_joules, row.wall_seconds);
        else
            workload.push_back(&row);
    }

    if (null_runs.empty()) {
        report.uncorrected = true;
        report.baseline = BaselineModel{}; // zero watts
    } else {
        auto baseline = fit_baseline(null_runs);
        if (!baseline.ok())
            return R::failure(baseline.error());
        report.baseline = baseline.value();
    }

    // Per-run results in input order, then grouped totals per algorithm so an
    // algorithm measured several times contributes one table row.
    struct Totals {
        double gross = 0, wall = 0;
        std::uint64_t iterations = 0;
        std::size_t first_seen;
    };
    std::map<std::string, Totals> grouped;
    std::vector<std::string> group_order;
    for (const auto* row : workload) {
        auto result = net_rate(row->algorithm_label, row->gross_joules,
                               row->wall_seconds, row->iterations,
                               report.baseline);
        if (!result.ok())
            return R::failure(result.error());
        report.per_run.push_back(result.value());

        auto [it, fresh] = grouped.try_emplace(row->algorithm_label);
        if (fresh) {
            it->second.first_seen = group_order.size();
            group_order.push_back(row->algorithm_label);
        }
        it->second.gross += row->gross_joules;
        it->second.wall += row->wall_seconds;
        it->second.iterations += row->iterations;
    }
    for (const auto& label : group_order) {
        const Totals& totals = grouped.at(label);
        auto result = net_rate(label, totals.gross, totals.wall,
                               totals.iterations, report.baseline);
        if (!result.ok())
            return R::failure(result.error());
        report.per_algorithm.push_back(result.value());
    }
    return report;
}

Result<AnalysisReport> aggregate(const std::filesystem::path& all_results_path,
                                 const std::string& null_label)
{
    auto rows = read_all_results(all_results_path);
    if (!rows.ok())
        return Result<AnalysisReport>::failure(rows.error());
    return aggregate_rows(rows.value(), null_label);
}

namespace {

std::string render_level_csv(const std::vector<LevelRow>& rows)
{
    std::ostringstream out;
    out << "nist_level,protocol,category,equiv_bits,joules_per_1000,"
           "seconds_per_1000\n";
    for (const auto& row : rows) {
        out << row.nist_level << ',' << csv_quote(row.protocol) << ','
            << csv_quote(category_name(row.category)) << ',' << row.equiv_bits
            << ',' << format_fixed(row.joules_per_1000, 2) << ','
            << format_fixed(row.seconds_per_1000, 2) << '\n';
    }
    return out.str();
}

Status write_file(const std::filesystem::path& path, const std::string& body)
{
    std::ofstream file(path);
    if (!file)
        return Status::failure("cannot write " + path.string());
    file << body;
    file.flush();
    if (!file)
        return Status::failure("write to " + path.string() + " failed");
    return Status();
}

} // namespace

std::string render_fleet_report(const FleetScenario& scenario,
                                const FleetReport& report)
{
    std::ostringstream out;
    out << "Fleet-scale annual key-generation energy estimate\n"
        << "==================================================\n"
        << "Keygens per year:      " << format_compact(scenario.keygens_per_year)
        << '\n'
        << "Electricity price:     " << format_fixed(scenario.price_per_kwh, 2)
        << ' ' << scenario.currency << "/kWh\n\n"
        << "Current algorithm:     "
        << format_compact(scenario.from_joules_per_key) << " J/key -> "
        << format_fixed(report.annual_kwh_from, 2) << " kWh/year, "
        << format_fixed(report.annual_cost_from, 2) << ' ' << scenario.currency
        << "/year\n"
        << "Replacement algorithm: "
        << format_compact(scenario.to_joules_per_key) << " J/key -> "
        << format_fixed(report.annual_kwh_to, 2) << " kWh/year, "
        << format_fixed(report.annual_cost_to, 2) << ' ' << scenario.currency
        << "/year\n\n"
        << "Annual saving:         "
        << format_fixed(report.annual_kwh_from - report.annual_kwh_to, 2)
        << " kWh, "
        << format_fixed(report.annual_cost_from - report.annual_cost_to, 2)
        << ' ' << scenario.currency << '\n'
        << "Efficiency multiplier: " << format_fixed(report.multiplier, 1)
        << "x (per-key energy ratio, computed directly from the two rates)\n\n"
        << "Uncertainty note: meter accuracy is 0.05% (voltage) and 0.1%\n"
        << "(current) per the vendor specification; per-key figures inherit\n"
        << "those bounds plus the baseline-subtraction error, so savings are\n"
        << "order-of-magnitude estimates rather than billing-grade numbers.\n";
    return out.str();
}

Status write_analysis_outputs(const AnalysisReport& report,
                              const SecurityLevelMap& levels,
                              const std::filesystem::path& out_dir,
                              const std::optional<FleetScenario>& fleet,
                              std::string* level_csv_out)
{
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);

    auto rows = level_table(report.per_algorithm, levels);
    if (!rows.ok())
        return Status::failure(rows.error());

    const std::string csv = render_level_csv(rows.value());
    if (level_csv_out)
        *level_csv_out = csv;
    if (auto s = write_file(out_dir / "level_table.csv", csv); !s.ok())
        return s;

    ChartSpec energy;
    energy.title = "Energy per 1,000 key generations";
    energy.value_axis_label = "Joules / 1,000 keygens (log scale)";
    ChartSpec timing;
    timing.title = "Time per 1,000 key generations";
    timing.value_axis_label = "Seconds / 1,000 keygens (log scale)";
    for (const auto& row : rows.value()) {
        ChartBar bar;
        bar.label = row.protocol;
        bar.group = "Level " + std::to_string(row.nist_level);
        bar.category = row.category;
        bar.value = row.joules_per_1000;
        energy.bars.push_back(bar);
        bar.value = row.seconds_per_1000;
        timing.bars.push_back(bar);
    }
    if (auto s = write_file(out_dir / "chart_energy.svg", render_bar_chart(energy));
        !s.ok())
        return s;
    if (auto s = write_file(out_dir / "chart_time.svg", render_bar_chart(timing));
        !s.ok())
        return s;

    if (fleet) {
        auto fr = fleet_savings(*fleet);
        if (!fr.ok())
            return Status::failure(fr.error());
        if (auto s = write_file(out_dir / "fleet_report.txt",
                                render_fleet_report(*fleet, fr.value()));
            !s.ok())
            return s;
    }
    return Status();
}

} // namespace keymeter
