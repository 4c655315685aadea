#pragma once

#include <terraverse/compiler.hpp>

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace terraverse {

enum class RenderFormat { pgm, svg, ascii };

std::optional<RenderFormat> render_format_from_name(std::string_view name);
std::string_view render_extension(RenderFormat f);

/// 8-bit P2 image, x to the right (one column per grid row), y downward.
/// Heights map onto 32..223; each goal cell is drawn black inside a white
/// ring, goal 1 with a double ring.
void render_pgm(const CompiledTerrain& t, std::ostream& os);

/// Top-down color map (blue low, red high) with numbered goal markers.
void render_svg(const CompiledTerrain& t, std::ostream& os);

/// One text line per grid column (y), one character per grid row (x), using
/// the ramp " .:-=+*#%@" from lowest to highest; goal cells show 1..8.
std::string render_ascii(const CompiledTerrain& t);

void render(const CompiledTerrain& t, RenderFormat f, std::ostream& os);

inline constexpr std::string_view ascii_ramp = " .:-=+*#%@";

struct ChartSeries {
    std::string label;
    std::vector<double> values; // plotted at x = 1, 2, ...
};

/// Minimal SVG line chart (e.g. benchmark mean per iteration).
void write_line_chart_svg(const std::vector<ChartSeries>& series, std::string_view title, std::string_view y_label,
                          std::ostream& os);

} // namespace terraverse
