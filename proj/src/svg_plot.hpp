#pragma once

#include <string>
#include <utility>
#include <vector>

#include "reward_log.hpp"

namespace cvt {

// Self-contained SVG of window-smoothed total reward vs. episode, one
// polyline per named log, with axes, tick labels and a legend. Output is a
// deterministic function of the inputs. Throws std::invalid_argument on an
// empty log set.
std::string plot_curves(const std::vector<std::pair<std::string, RewardLog>>& logs,
                        int smoothing_window);

void write_plot(const std::vector<std::pair<std::string, RewardLog>>& logs, int smoothing_window,
                const std::string& path);

}  // namespace cvt
