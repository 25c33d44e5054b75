#pragma once

#include <string>
#include <vector>

namespace disrc {

// Renders learning curves from episodes.csv files into a self-contained SVG:
// per input series one light raw-reward polyline plus a heavy moving-average
// overlay (trailing window), labeled axes and a legend derived from the file
// stems (parent directory names disambiguate duplicate stems).
void plot(const std::vector<std::string>& csv_paths, const std::string& out_svg,
          int smoothing_window = 20);

}  // namespace disrc
