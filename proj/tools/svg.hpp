#pragma once

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>
#include <vector>

namespace roq::svg {

struct Series {
    std::string name;
    std::string color;
    std::vector<double> x, y;
};

/// Minimal two-series line chart with a log10 y-axis; no external
/// renderer, bit-stable output for diffing.
inline std::string line_chart(const std::string& title, const std::string& x_label,
                              const std::vector<Series>& series) {
    const double width = 800, height = 500;
    const double ml = 70, mr = 20, mt = 40, mb = 50;
    double x_min = 0, x_max = 1, y_min = 1, y_max = 10;
    bool first = true;
    for (const auto& s : series) {
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            const double y = std::max(s.y[i], 1e-300);
            if (first) {
                x_min = x_max = s.x[i];
                y_min = y_max = y;
                first = false;
            } else {
                x_min = std::min(x_min, s.x[i]);
                x_max = std::max(x_max, s.x[i]);
                y_min = std::min(y_min, y);
                y_max = std::max(y_max, y);
            }
        }
    }
    if (x_max == x_min) x_max = x_min + 1;
    double ly_min = std::floor(std::log10(y_min));
    double ly_max = std::ceil(std::log10(y_max));
    if (ly_max == ly_min) ly_max = ly_min + 1;

    auto px = [&](double x) { return ml + (x - x_min) / (x_max - x_min) * (width - ml - mr); };
    auto py = [&](double y) {
        const double ly = std::log10(std::max(y, 1e-300));
        return height - mb - (ly - ly_min) / (ly_max - ly_min) * (height - mt - mb);
    };

    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
        << height << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<text x=\"" << width / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">"
        << title << "</text>\n";
    // axes
    out << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\""
        << height - mb << "\" stroke=\"black\"/>\n";
    out << "<line x1=\"" << ml << "\" y1=\"" << height - mb << "\" x2=\"" << width - mr
        << "\" y2=\"" << height - mb << "\" stroke=\"black\"/>\n";
    for (double e = ly_min; e <= ly_max; e += 1.0) {
        const double y = py(std::pow(10.0, e));
        out << "<line x1=\"" << ml - 4 << "\" y1=\"" << y << "\" x2=\"" << ml << "\" y2=\"" << y
            << "\" stroke=\"black\"/>\n";
        out << "<text x=\"" << ml - 8 << "\" y=\"" << y + 4
            << "\" text-anchor=\"end\" font-size=\"11\">1e" << e << "</text>\n";
    }
    for (const auto& s : series) {
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            const double x = px(s.x[i]);
            out << "<line x1=\"" << x << "\" y1=\"" << height - mb << "\" x2=\"" << x
                << "\" y2=\"" << height - mb + 4 << "\" stroke=\"black\"/>\n";
            out << "<text x=\"" << x << "\" y=\"" << height - mb + 18
                << "\" text-anchor=\"middle\" font-size=\"11\">" << s.x[i] << "</text>\n";
        }
        break;
    }
    out << "<text x=\"" << width / 2 << "\" y=\"" << height - 12
        << "\" text-anchor=\"middle\" font-size=\"12\">" << x_label << "</text>\n";

    double legend_y = mt + 10;
    for (const auto& s : series) {
        out << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"2\" points=\"";
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            out << px(s.x[i]) << "," << py(s.y[i]) << " ";
        }
        out << "\"/>\n";
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            out << "<circle cx=\"" << px(s.x[i]) << "\" cy=\"" << py(s.y[i])
                << "\" r=\"3\" fill=\"" << s.color << "\"/>\n";
        }
        out << "<line x1=\"" << width - mr - 150 << "\" y1=\"" << legend_y << "\" x2=\""
            << width - mr - 120 << "\" y2=\"" << legend_y << "\" stroke=\"" << s.color
            << "\" stroke-width=\"2\"/>\n";
        out << "<text x=\"" << width - mr - 112 << "\" y=\"" << legend_y + 4
            << "\" font-size=\"12\">" << s.name << "</text>\n";
        legend_y += 18;
    }
    out << "</svg>\n";
    return out.str();
}

} // namespace roq::svg
