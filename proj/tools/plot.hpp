#pragma once
// Minimal log-log SVG of one or more growth curves; CSV stays the data contract.

#include "fnv/growth.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>
#include <vector>

namespace fnv::cli {

inline void write_svg(std::ostream& out, const std::vector<std::pair<std::string, GrowthCurve>>& curves,
                      const std::string& title) {
    constexpr double W = 640, H = 420, L = 70, R = 20, T = 40, B = 50;
    double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
    for (const auto& [name, c] : curves)
        for (std::size_t i = 0; i < c.size(); ++i) {
            if (!(c.values[i] > 0.0 && c.r[i] > 0.0)) continue;
            x0 = std::min(x0, std::log10(c.r[i]));
            x1 = std::max(x1, std::log10(c.r[i]));
            y0 = std::min(y0, std::log10(c.values[i]));
            y1 = std::max(y1, std::log10(c.values[i]));
        }
    if (!(x1 > x0)) x1 = x0 + 1.0;
    if (!(y1 > y0)) y1 = y0 + 1.0;
    auto px = [&](double x) { return L + (x - x0) / (x1 - x0) * (W - L - R); };
    auto py = [&](double y) { return H - B - (y - y0) / (y1 - y0) * (H - T - B); };
    char buf[160];
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<text x=\"" << L << "\" y=\"24\" font-family=\"sans-serif\" font-size=\"14\">" << title << "</text>\n";
    std::snprintf(buf, sizeof buf, "<rect x=\"%g\" y=\"%g\" width=\"%g\" height=\"%g\" fill=\"none\" stroke=\"black\"/>\n",
                  L, T, W - L - R, H - T - B);
    out << buf;
    std::snprintf(buf, sizeof buf,
                  "<text x=\"%g\" y=\"%g\" font-family=\"sans-serif\" font-size=\"11\">log10 r in [%.3g, %.3g]</text>\n",
                  L, H - 18, x0, x1);
    out << buf;
    std::snprintf(buf, sizeof buf,
                  "<text x=\"8\" y=\"%g\" font-family=\"sans-serif\" font-size=\"11\">log10 value in [%.3g, %.3g]</text>\n",
                  T - 6, y0, y1);
    out << buf;
    static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd"};
    std::size_t k = 0;
    for (const auto& [name, c] : curves) {
        out << "<polyline fill=\"none\" stroke=\"" << colors[k % 4] << "\" stroke-width=\"1.5\" points=\"";
        for (std::size_t i = 0; i < c.size(); ++i) {
            if (!(c.values[i] > 0.0)) continue;
            std::snprintf(buf, sizeof buf, "%.2f,%.2f ", px(std::log10(c.r[i])), py(std::log10(c.values[i])));
            out << buf;
        }
        out << "\"/>\n";
        std::snprintf(buf, sizeof buf, "<text x=\"%g\" y=\"%g\" font-family=\"sans-serif\" font-size=\"11\" fill=\"%s\">",
                      W - R - 150, T + 16.0 * static_cast<double>(k + 1), colors[k % 4]);
        out << buf << name << "</text>\n";
        ++k;
    }
    out << "</svg>\n";
}

}  // namespace fnv::cli
