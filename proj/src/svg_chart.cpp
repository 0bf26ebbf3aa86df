#include "keymeter/svg_chart.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "keymeter/text.hpp"

namespace keymeter {

namespace {

const char* category_color(AlgoCategory category)
{
    switch (category) {
    case AlgoCategory::EllipticCurve:
        return "#4472c4"; // blue
    case AlgoCategory::PostQuantum:
        return "#70ad47"; // green
    case AlgoCategory::Classic:
        return "#ed7d31"; // orange
    }
    return "#999999";
}

std::string escape_xml(const std::string& text)
{
    std::string out;
    for (char c : text) {
        switch (c) {
        case '&':
            out += "&amp;";
            break;
        case '<':
            out += "&lt;";
            break;
        case '>':
            out += "&gt;";
            break;
        case '"':
            out += "&quot;";
            break;
        default:
            out += c;
        }
    }
    return out;
}

std::string value_text(double v)
{
    return v >= 100 ? format_fixed(v, 0)
                    : (v >= 10 ? format_fixed(v, 1) : format_fixed(v, 2));
}

} // namespace

std::string render_bar_chart(const ChartSpec& spec)
{
    constexpr double kBarWidth = 34;
    constexpr double kBarGap = 10;
    constexpr double kGroupGap = 30;
    constexpr double kMarginLeft = 70;
    constexpr double kMarginRight = 24;
    constexpr double kMarginTop = 48;
    constexpr double kPlotHeight = 320;
    constexpr double kLabelZone = 170; // rotated bar labels + group labels

    // Log scale spanning the data, padded to whole decades. Zero or negative
    // values (possible for clamped nets) draw as a sliver at the axis floor.
    double max_value = 0;
    double min_positive = 1e300;
    for (const auto& bar : spec.bars) {
        max_value = std::max(max_value, bar.value);
        if (bar.value > 0)
            min_positive = std::min(min_positive, bar.value);
    }
    if (max_value <= 0) {
        max_value = 1;
        min_positive = 0.1;
    }
    const double log_lo = std::floor(std::log10(min_positive));
    const double log_hi = std::ceil(std::log10(max_value * 1.001));
    const double decades = std::max(1.0, log_hi - log_lo);

    const auto bar_height = [&](double value) {
        if (value <= 0)
            return 2.0;
        const double frac = (std::log10(value) - log_lo) / decades;
        return std::max(2.0, frac * kPlotHeight);
    };

    double x = kMarginLeft;
    std::string last_group;
    struct Placed {
        const ChartBar* bar;
        double x;
    };
    std::vector<Placed> placed;
    struct GroupSpan {
        std::string name;
        double x_begin, x_end;
    };
    std::vector<GroupSpan> groups;
    for (const auto& bar : spec.bars) {
        if (bar.group != last_group) {
            if (!last_group.empty())
                x += kGroupGap;
            groups.push_back({bar.group, x, x});
            last_group = bar.group;
        } else {
            x += kBarGap;
        }
        placed.push_back({&bar, x});
        x += kBarWidth;
        groups.back().x_end = x;
    }
    const double width = x + kMarginRight;
    const double height = kMarginTop + kPlotHeight + kLabelZone;
    const double axis_y = kMarginTop + kPlotHeight;

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
        << "\" height=\"" << height << "\" viewBox=\"0 0 " << width << ' '
        << height << "\" font-family=\"sans-serif\">\n";
    svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    svg << "<text x=\"" << width / 2 << "\" y=\"24\" text-anchor=\"middle\" "
        << "font-size=\"16\" font-weight=\"bold\">" << escape_xml(spec.title)
        << "</text>\n";

    // Decade gridlines with tick labels.
    for (int d = 0; d <= static_cast<int>(decades); ++d) {
        const double y = axis_y - (d / decades) * kPlotHeight;
        svg << "<line x1=\"" << kMarginLeft - 6 << "\" y1=\"" << y << "\" x2=\""
            << width - kMarginRight << "\" y2=\"" << y
            << "\" stroke=\"#dddddd\"/>\n";
        svg << "<text x=\"" << kMarginLeft - 10 << "\" y=\"" << y + 4
            << "\" text-anchor=\"end\" font-size=\"11\">1e"
            << static_cast<int>(log_lo) + d << "</text>\n";
    }
    svg << "<text x=\"16\" y=\"" << kMarginTop + kPlotHeight / 2
        << "\" font-size=\"12\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
        << kMarginTop + kPlotHeight / 2 << ")\">"
        << escape_xml(spec.value_axis_label) << "</text>\n";

    for (const auto& p : placed) {
        const double h = bar_height(p.bar->value);
        const double y = axis_y - h;
        svg << "<rect class=\"bar\" x=\"" << p.x << "\" y=\"" << y
            << "\" width=\"" << kBarWidth << "\" height=\"" << h << "\" fill=\""
            << category_color(p.bar->category) << "\"/>\n";
        svg << "<text x=\"" << p.x + kBarWidth / 2 << "\" y=\"" << y - 5
            << "\" text-anchor=\"middle\" font-size=\"10\">"
            << value_text(p.bar->value) << "</text>\n";
        const double lx = p.x + kBarWidth / 2;
        const double ly = axis_y + 10;
        svg << "<text x=\"" << lx << "\" y=\"" << ly
            << "\" font-size=\"10\" text-anchor=\"end\" transform=\"rotate(-45 "
            << lx << ' ' << ly << ")\">" << escape_xml(p.bar->label)
            << "</text>\n";
    }

    for (const auto& g : groups) {
        const double cx = (g.x_begin + g.x_end) / 2;
        svg << "<text x=\"" << cx << "\" y=\"" << axis_y + kLabelZone - 40
            << "\" text-anchor=\"middle\" font-size=\"13\" font-weight=\"bold\">"
            << escape_xml(g.name) << "</text>\n";
    }

    // Legend along the bottom edge.
    const AlgoCategory cats[] = {AlgoCategory::EllipticCurve,
                                 AlgoCategory::PostQuantum, AlgoCategory::Classic};
    double lx = kMarginLeft;
    const double legend_y = height - 14;
    for (auto cat : cats) {
        svg << "<rect x=\"" << lx << "\" y=\"" << legend_y - 10
            << "\" width=\"12\" height=\"12\" fill=\"" << category_color(cat)
            << "\"/>\n";
        svg << "<text x=\"" << lx + 17 << "\" y=\"" << legend_y
            << "\" font-size=\"11\">" << escape_xml(category_name(cat))
            << "</text>\n";
        lx += 200;
    }

    svg << "<line x1=\"" << kMarginLeft - 6 << "\" y1=\"" << axis_y << "\" x2=\""
        << width - kMarginRight << "\" y2=\"" << axis_y
        << "\" stroke=\"black\"/>\n";
    svg << "</svg>\n";
    return svg.str();
}

} // namespace keymeter
