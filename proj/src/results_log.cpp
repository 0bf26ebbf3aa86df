#include "keymeter/results_log.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "keymeter/text.hpp"

namespace keymeter {

namespace {

constexpr int kJoulesDecimals = 4;
constexpr int kSecondsDecimals = 3;
constexpr int kRateDecimals = 4;

Result<double> parse_double_field(const std::string& text, const char* name)
{
    double v = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size())
        return Result<double>::failure(std::string(name) + ": not a number: '" +
                                       text + "'");
    return v;
}

} // namespace

std::string summary_header()
{
    return "timestamp,algorithm,iterations,gross_joules,wall_seconds,"
           "joules_per_1000,seconds_per_1000,status";
}

std::string summary_line(const SummaryRow& row)
{
    std::ostringstream out;
    out << row.timestamp << ',' << csv_quote(row.algorithm_label) << ','
        << row.iterations << ',' << format_fixed(row.gross_joules, kJoulesDecimals)
        << ',' << format_fixed(row.wall_seconds, kSecondsDecimals) << ','
        << format_fixed(row.joules_per_1000, kRateDecimals) << ','
        << format_fixed(row.seconds_per_1000, kRateDecimals) << ',' << row.status;
    return out.str();
}

Status append_summary_row(const std::filesystem::path& path, const SummaryRow& row)
{
    const bool fresh = !std::filesystem::exists(path);
    std::ofstream file(path, std::ios::app);
    if (!file)
        return Status::failure("cannot open " + path.string() + " for append");
    if (fresh)
        file << summary_header() << '\n';
    file << summary_line(row) << '\n';
    file.flush();
    if (!file)
        return Status::failure("write to " + path.string() + " failed");
    return Status();
}

Result<std::vector<SummaryRow>> read_all_results(const std::filesystem::path& path)
{
    using R = Result<std::vector<SummaryRow>>;
    std::ifstream file(path);
    if (!file)
        return R::failure("cannot open " + path.string());

    std::vector<SummaryRow> rows;
    std::string line;
    int line_no = 0;
    while (std::getline(file, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.empty())
            continue;
        if (line_no == 1 && line == summary_header())
            continue;
        const auto fields = csv_split(line);
        if (fields.size() != 8)
            return R::failure(path.string() + " line " + std::to_string(line_no) +
                              ": expected 8 fields, got " +
                              std::to_string(fields.size()));

        SummaryRow row;
        row.timestamp = fields[0];
        row.algorithm_label = fields[1];
        std::uint64_t iters = 0;
        const auto& it = fields[2];
        const auto [ptr, ec] = std::from_chars(it.data(), it.data() + it.size(), iters);
        if (ec != std::errc() || ptr != it.data() + it.size())
            return R::failure(path.string() + " line " + std::to_string(line_no) +
                              ": iterations: not an integer: '" + it + "'");
        row.iterations = iters;

        const char* names[] = {"gross_joules", "wall_seconds", "joules_per_1000",
                               "seconds_per_1000"};
        double* slots[] = {&row.gross_joules, &row.wall_seconds,
                           &row.joules_per_1000, &row.seconds_per_1000};
        for (int i = 0; i < 4; ++i) {
            auto v = parse_double_field(fields[3 + static_cast<std::size_t>(i)],
                                        names[i]);
            if (!v.ok())
                return R::failure(path.string() + " line " +
                                  std::to_string(line_no) + ": " + v.error());
            *slots[i] = v.value();
        }
        row.status = fields[7];
        rows.push_back(std::move(row));
    }
    return rows;
}

} // namespace keymeter
