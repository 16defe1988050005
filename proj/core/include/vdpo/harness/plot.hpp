#pragma once

#include <string>
#include <utility>
#include <vector>

#include "vdpo/harness/experiment.hpp"

namespace vdpo::harness {

/// SVG learning curves: one line per series with a shaded +/-1 std band,
/// global step on x and evaluation return on y. Throws ConfigError when there
/// is nothing to draw.
std::string render_learning_curves(const std::vector<std::pair<std::string, SeriesPoints>>& curves,
                                   const std::string& title = "");

/// Curves of every series in the given bundles; a series name present in
/// several bundles is prefixed with its bundle's directory name.
std::vector<std::pair<std::string, SeriesPoints>> collect_curves(const std::vector<std::string>& bundle_dirs);

void plot_bundles(const std::vector<std::string>& bundle_dirs, const std::string& output_path);

}  // namespace vdpo::harness
