#pragma once

#include <span>
#include <string>

#include "synq/evaluation.hpp"

namespace synq {

/// Static SVG line chart of mean field (left axis) and action (right axis)
/// against step. Both series share the x axis but use independent y scales.
/// Long traces are thinned to at most `max_points` by keeping each bucket's
/// extreme values, so spikes survive.
std::string render_trace_svg(std::span<const TraceRecord> trace, std::size_t max_points = 4000);

}  // namespace synq
