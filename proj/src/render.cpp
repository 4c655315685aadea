#include <terraverse/render.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

namespace terraverse {

namespace {

struct Range {
    double lo = 0.0;
    double hi = 0.0;
    /// 0..1 position of h; 0.5 on a flat terrain.
    double unit(double h) const { return hi > lo ? (h - lo) / (hi - lo) : 0.5; }
};

Range height_range(const CompiledTerrain& t)
{
    if (t.heights().empty())
        return {};
    const auto [lo, hi] = std::minmax_element(t.heights().begin(), t.heights().end());
    return {*lo, *hi};
}

std::vector<Cell> goal_cells(const CompiledTerrain& t)
{
    std::vector<Cell> out;
    for (const auto& g : t.goals)
        if (auto c = t.cell_of(g))
            out.push_back(*c);
    return out;
}

std::string fmt(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

} // namespace

std::optional<RenderFormat> render_format_from_name(std::string_view name)
{
    if (name == "pgm")
        return RenderFormat::pgm;
    if (name == "svg")
        return RenderFormat::svg;
    if (name == "ascii")
        return RenderFormat::ascii;
    return std::nullopt;
}

std::string_view render_extension(RenderFormat f)
{
    switch (f) {
    case RenderFormat::pgm:
        return ".pgm";
    case RenderFormat::svg:
        return ".svg";
    case RenderFormat::ascii:
        return ".txt";
    }
    return ".txt";
}

void render_pgm(const CompiledTerrain& t, std::ostream& os)
{
    const Range range = height_range(t);
    const int w = t.rows();
    const int h = t.cols();
    std::vector<int> px(static_cast<std::size_t>(w) * h);
    for (int r = 0; r < w; ++r)
        for (int c = 0; c < h; ++c)
            px[static_cast<std::size_t>(c) * w + r] = 32 + static_cast<int>(std::lround(191.0 * range.unit(t.at(r, c))));

    const auto cells = goal_cells(t);
    for (std::size_t i = cells.size(); i-- > 0;) {
        const int radius = i == 0 ? 2 : 1;
        for (int dr = -radius; dr <= radius; ++dr)
            for (int dc = -radius; dc <= radius; ++dc) {
                const int r = cells[i].row + dr;
                const int c = cells[i].col + dc;
                if (t.in_grid(r, c))
                    px[static_cast<std::size_t>(c) * w + r] = (dr == 0 && dc == 0) ? 0 : 255;
            }
    }
    os << "P2\n" << w << ' ' << h << "\n255\n";
    for (int c = 0; c < h; ++c) {
        for (int r = 0; r < w; ++r) {
            if (r)
                os << ' ';
            os << px[static_cast<std::size_t>(c) * w + r];
        }
        os << '\n';
    }
}

void render_svg(const CompiledTerrain& t, std::ostream& os)
{
    constexpr int scale = 5; // pixels per cell
    const Range range = height_range(t);
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << t.rows() * scale << "\" height=\""
       << t.cols() * scale << "\" shape-rendering=\"crispEdges\">\n";
    for (int c = 0; c < t.cols(); ++c)
        for (int r = 0; r < t.rows(); ++r) {
            const double u = range.unit(t.at(r, c));
            const int red = static_cast<int>(std::lround(255.0 * u));
            const int green = static_cast<int>(std::lround(255.0 * (1.0 - std::abs(2.0 * u - 1.0))));
            const int blue = static_cast<int>(std::lround(255.0 * (1.0 - u)));
            os << "<rect x=\"" << r * scale << "\" y=\"" << c * scale << "\" width=\"" << scale << "\" height=\""
               << scale << "\" fill=\"rgb(" << red << ',' << green << ',' << blue << ")\"/>\n";
        }
    const auto cells = goal_cells(t);
    for (std::size_t i = 0; i < cells.size(); ++i) {
        const double cx = (cells[i].row + 0.5) * scale;
        const double cy = (cells[i].col + 0.5) * scale;
        os << "<circle cx=\"" << cx << "\" cy=\"" << cy << "\" r=\"" << (i == 0 ? 2 * scale : scale + 2)
           << "\" fill=\"red\" stroke=\"" << (i == 0 ? "yellow" : "black") << "\"/>\n";
        os << "<text x=\"" << cx << "\" y=\"" << cy + 3 << "\" font-size=\"8\" text-anchor=\"middle\">" << i + 1
           << "</text>\n";
    }
    os << "</svg>\n";
}

std::string render_ascii(const CompiledTerrain& t)
{
    const Range range = height_range(t);
    const int levels = static_cast<int>(ascii_ramp.size());
    std::string out;
    out.reserve(static_cast<std::size_t>(t.rows() + 1) * t.cols());
    std::vector<std::string> lines(t.cols(), std::string(t.rows(), ' '));
    for (int c = 0; c < t.cols(); ++c)
        for (int r = 0; r < t.rows(); ++r) {
            const int k = std::min(levels - 1, static_cast<int>(range.unit(t.at(r, c)) * levels));
            lines[c][r] = ascii_ramp[k];
        }
    const auto cells = goal_cells(t);
    for (std::size_t i = 0; i < cells.size(); ++i)
        lines[cells[i].col][cells[i].row] = static_cast<char>('1' + i);
    for (const auto& l : lines)
        out += l + '\n';
    return out;
}

void render(const CompiledTerrain& t, RenderFormat f, std::ostream& os)
{
    switch (f) {
    case RenderFormat::pgm:
        render_pgm(t, os);
        break;
    case RenderFormat::svg:
        render_svg(t, os);
        break;
    case RenderFormat::ascii:
        os << render_ascii(t);
        break;
    }
}

void write_line_chart_svg(const std::vector<ChartSeries>& series, std::string_view title, std::string_view y_label,
                          std::ostream& os)
{
    constexpr double W = 640, H = 400, left = 60, right = 150, top = 40, bottom = 50;
    constexpr const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#17becf"};
    std::size_t n = 1;
    double lo = 0.0, hi = 1.0;
    bool first = true;
    for (const auto& s : series) {
        n = std::max(n, s.values.size());
        for (double v : s.values) {
            lo = first ? v : std::min(lo, v);
            hi = first ? v : std::max(hi, v);
            first = false;
        }
    }
    if (hi - lo < 1e-9) {
        lo -= 0.5;
        hi += 0.5;
    }
    const double pad = 0.05 * (hi - lo);
    lo -= pad;
    hi += pad;
    const auto X = [&](std::size_t i) { return left + (n == 1 ? 0.5 : static_cast<double>(i) / (n - 1)) * (W - left - right); };
    const auto Y = [&](double v) { return top + (1.0 - (v - lo) / (hi - lo)) * (H - top - bottom); };

    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    os << "<text x=\"" << W / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" << title << "</text>\n";
    os << "<line x1=\"" << left << "\" y1=\"" << H - bottom << "\" x2=\"" << W - right << "\" y2=\"" << H - bottom
       << "\" stroke=\"black\"/>\n";
    os << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\"" << H - bottom
       << "\" stroke=\"black\"/>\n";
    for (int k = 0; k <= 4; ++k) {
        const double v = lo + (hi - lo) * k / 4.0;
        os << "<text x=\"" << left - 6 << "\" y=\"" << Y(v) + 4 << "\" text-anchor=\"end\" font-size=\"10\">" << fmt(v)
           << "</text>\n";
    }
    for (std::size_t i = 0; i < n; ++i)
        os << "<text x=\"" << X(i) << "\" y=\"" << H - bottom + 16 << "\" text-anchor=\"middle\" font-size=\"10\">"
           << i + 1 << "</text>\n";
    os << "<text x=\"" << (left + W - right) / 2 << "\" y=\"" << H - 12
       << "\" text-anchor=\"middle\" font-size=\"12\">iteration</text>\n";
    os << "<text x=\"16\" y=\"" << (top + H - bottom) / 2 << "\" font-size=\"12\" transform=\"rotate(-90 16 "
       << (top + H - bottom) / 2 << ")\" text-anchor=\"middle\">" << y_label << "</text>\n";
    for (std::size_t s = 0; s < series.size(); ++s) {
        const char* color = palette[s % std::size(palette)];
        os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
        for (std::size_t i = 0; i < series[s].values.size(); ++i)
            os << (i ? " " : "") << X(i) << ',' << Y(series[s].values[i]);
        os << "\"/>\n";
        const double ly = top + 16.0 * s;
        os << "<line x1=\"" << W - right + 10 << "\" y1=\"" << ly << "\" x2=\"" << W - right + 30 << "\" y2=\"" << ly
           << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
        os << "<text x=\"" << W - right + 34 << "\" y=\"" << ly + 4 << "\" font-size=\"11\">" << series[s].label
           << "</text>\n";
    }
    os << "</svg>\n";
}

} // namespace terraverse
