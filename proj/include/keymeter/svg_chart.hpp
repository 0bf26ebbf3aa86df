#pragma once

#include <string>
#include <vector>

#include "keymeter/levels.hpp"

namespace keymeter {

struct ChartBar {
    std::string label;
    std::string group; // bars sharing a group are drawn adjacently
    AlgoCategory category = AlgoCategory::Classic;
    double value = 0;
};

struct ChartSpec {
    std::string title;
    std::string value_axis_label;
    std::vector<ChartBar> bars; // already in display order
};

/// Static log-scale bar chart, category-colored, value labels above the bars
/// and group labels underneath.
std::string render_bar_chart(const ChartSpec& spec);

} // namespace keymeter
