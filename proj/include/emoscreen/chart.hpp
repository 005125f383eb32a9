#pragma once

#include <string>
#include <vector>

#include "emoscreen/analytics.hpp"

namespace emoscreen {

// Columns "frame,<group>_<emotion>,..." in the given series order; one row
// per frame. Values use shortest-round-trip formatting so parse-back is exact.
void export_occurrence_csv(const std::vector<OccurrenceSeries>& series, const std::string& path);
std::vector<OccurrenceSeries> parse_occurrence_csv(const std::string& path);

// 800x480 line chart, frame on x, occurrence on y, one polyline per series.
// Output bytes are deterministic for fixed input.
void render_occurrence_svg(const std::vector<OccurrenceSeries>& series, const std::string& path);
std::string occurrence_svg_text(const std::vector<OccurrenceSeries>& series);

}  // namespace emoscreen
