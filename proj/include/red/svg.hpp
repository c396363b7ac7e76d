#pragma once

// Static SVG heatmap of a dominance grid: one fill color per encoder, grey for
// ties, white outside every domain, legend embedded on the right.

#include <array>
#include <ostream>
#include <string>

#include "red/projection.hpp"
#include "red/text.hpp"

namespace red {

namespace detail {

inline constexpr std::array<const char*, 8> kPalette{"#d62728", "#1f77b4", "#2ca02c", "#ff7f0e",
                                                     "#9467bd", "#8c564b", "#e377c2", "#17becf"};
inline constexpr const char* kTieColor = "#9e9e9e";
inline constexpr const char* kEmptyColor = "#ffffff";

inline std::string xml_escape(const std::string& s) {
    std::string out;
    for (char ch : s) {
        switch (ch) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out.push_back(ch);
        }
    }
    return out;
}

}  // namespace detail

inline void write_svg(std::ostream& out, const DominanceGrid& grid, int plot_px = 480) {
    const int margin = 60;
    const int legend_w = 160;
    const int width = margin + plot_px + 20 + legend_w;
    const int height = margin + plot_px + 50;
    const double cw = static_cast<double>(plot_px) / grid.x_axis.cells;
    const double ch = static_cast<double>(plot_px) / grid.y_axis.cells;
    auto num = [](double v) { return text::format_double(v, 6); };

    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
        << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n";
    out << "<g shape-rendering=\"crispEdges\">\n";
    for (int iy = 0; iy < grid.y_axis.cells; ++iy) {
        for (int ix = 0; ix < grid.x_axis.cells; ++ix) {
            const Cell& c = grid.at(ix, iy);
            const char* fill = detail::kEmptyColor;
            if (c.outcome == CellOutcome::winner) fill = detail::kPalette[c.winner % detail::kPalette.size()];
            else if (c.outcome == CellOutcome::tie) fill = detail::kTieColor;
            // y grows upwards in the plot
            const double x = margin + ix * cw;
            const double y = 20 + (grid.y_axis.cells - 1 - iy) * ch;
            out << "<rect x=\"" << num(x) << "\" y=\"" << num(y) << "\" width=\"" << num(cw) << "\" height=\""
                << num(ch) << "\" fill=\"" << fill << "\"/>\n";
        }
    }
    out << "</g>\n";
    out << "<rect x=\"" << margin << "\" y=\"20\" width=\"" << plot_px << "\" height=\"" << plot_px
        << "\" fill=\"none\" stroke=\"#000000\"/>\n";

    const std::string x_name = grid.plane == Plane::RE ? "log rate r" : "log energy e";
    const std::string y_name = grid.plane == Plane::RE ? "log energy e" : "PSNR d [dB]";
    const int axis_y = 20 + plot_px;
    out << "<g font-family=\"sans-serif\" font-size=\"12\">\n";
    out << "<text x=\"" << margin << "\" y=\"" << axis_y + 16 << "\">" << num(grid.x_axis.min) << "</text>\n";
    out << "<text x=\"" << margin + plot_px << "\" y=\"" << axis_y + 16 << "\" text-anchor=\"end\">"
        << num(grid.x_axis.max) << "</text>\n";
    out << "<text x=\"" << margin + plot_px / 2 << "\" y=\"" << axis_y + 36 << "\" text-anchor=\"middle\">" << x_name
        << "</text>\n";
    out << "<text x=\"" << margin - 4 << "\" y=\"" << axis_y << "\" text-anchor=\"end\">" << num(grid.y_axis.min)
        << "</text>\n";
    out << "<text x=\"" << margin - 4 << "\" y=\"32\" text-anchor=\"end\">" << num(grid.y_axis.max) << "</text>\n";
    out << "<text x=\"16\" y=\"" << 20 + plot_px / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
        << 20 + plot_px / 2 << ")\">" << y_name << "</text>\n";

    const int lx = margin + plot_px + 20;
    int ly = 30;
    auto legend = [&](const char* fill, const std::string& label) {
        out << "<rect x=\"" << lx << "\" y=\"" << ly - 10 << "\" width=\"12\" height=\"12\" fill=\"" << fill
            << "\" stroke=\"#000000\"/>\n";
        out << "<text x=\"" << lx + 18 << "\" y=\"" << ly << "\">" << detail::xml_escape(label) << "</text>\n";
        ly += 20;
    };
    for (std::size_t k = 0; k < grid.encoders.size(); ++k)
        legend(detail::kPalette[k % detail::kPalette.size()], grid.encoders[k]);
    legend(detail::kTieColor, "tie");
    legend(detail::kEmptyColor, "out of domain");
    out << "</g>\n</svg>\n";
}

}  // namespace red
