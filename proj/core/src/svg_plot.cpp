#include "sqzlink/io/svg_plot.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace sqz {

namespace {
const char* kColors[] = {"#2a7e3f", "#2356a8", "#c03a2b", "#b8860b",
                         "#6a3d9a", "#11828f"};

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}
}  // namespace

void SvgPlot::add_series(const std::string& name, std::vector<double> x,
                         std::vector<double> y, bool markers) {
    if (x.size() != y.size())
        throw std::invalid_argument("SvgPlot: x/y size mismatch");
    series_.push_back({name, std::move(x), std::move(y), markers});
}

void SvgPlot::write(const std::string& path) const {
    constexpr double kW = 720, kH = 480;
    constexpr double kL = 80, kR = 40, kT = 50, kB = 60;

    double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
    double ymin = xmin, ymax = -xmin;
    for (const auto& s : series_)
        for (std::size_t k = 0; k < s.x.size(); ++k) {
            xmin = std::min(xmin, s.x[k]);
            xmax = std::max(xmax, s.x[k]);
            ymin = std::min(ymin, s.y[k]);
            ymax = std::max(ymax, s.y[k]);
        }
    if (!(xmax >= xmin)) {
        xmin = 0;
        xmax = 1;
        ymin = 0;
        ymax = 1;
    }
    if (xmax == xmin) xmax = xmin + 1;
    if (ymax == ymin) {
        ymax = ymin + 1;
        ymin -= 1;
    }
    const double xpad = 0.05 * (xmax - xmin);
    const double ypad = 0.08 * (ymax - ymin);
    xmin -= xpad;
    xmax += xpad;
    ymin -= ypad;
    ymax += ypad;

    auto px = [&](double x) {
        return kL + (x - xmin) / (xmax - xmin) * (kW - kL - kR);
    };
    auto py = [&](double y) {
        return kH - kB - (y - ymin) / (ymax - ymin) * (kH - kT - kB);
    };

    std::ofstream out(path);
    if (!out) throw std::runtime_error("SvgPlot: cannot write " + path);
    out << "<svg xmlns='http://www.w3.org/2000/svg' width='" << kW
        << "' height='" << kH << "' viewBox='0 0 " << kW << " " << kH << "'>\n"
        << "<rect width='100%' height='100%' fill='white'/>\n"
        << "<text x='" << kW / 2 << "' y='28' text-anchor='middle' "
           "font-family='sans-serif' font-size='17'>"
        << title_ << "</text>\n";

    // Frame and ticks.
    out << "<rect x='" << kL << "' y='" << kT << "' width='" << kW - kL - kR
        << "' height='" << kH - kT - kB
        << "' fill='none' stroke='#444' stroke-width='1'/>\n";
    for (int k = 0; k <= 5; ++k) {
        const double xv = xmin + (xmax - xmin) * k / 5.0;
        const double yv = ymin + (ymax - ymin) * k / 5.0;
        out << "<line x1='" << px(xv) << "' y1='" << kH - kB << "' x2='"
            << px(xv) << "' y2='" << kH - kB + 5 << "' stroke='#444'/>\n"
            << "<text x='" << px(xv) << "' y='" << kH - kB + 20
            << "' text-anchor='middle' font-family='sans-serif' "
               "font-size='11'>"
            << fmt(xv) << "</text>\n"
            << "<line x1='" << kL - 5 << "' y1='" << py(yv) << "' x2='" << kL
            << "' y2='" << py(yv) << "' stroke='#444'/>\n"
            << "<text x='" << kL - 8 << "' y='" << py(yv) + 4
            << "' text-anchor='end' font-family='sans-serif' font-size='11'>"
            << fmt(yv) << "</text>\n";
    }
    out << "<text x='" << (kL + kW - kR) / 2 << "' y='" << kH - 15
        << "' text-anchor='middle' font-family='sans-serif' font-size='13'>"
        << x_label_ << "</text>\n"
        << "<text x='20' y='" << (kT + kH - kB) / 2
        << "' text-anchor='middle' font-family='sans-serif' font-size='13' "
           "transform='rotate(-90 20 "
        << (kT + kH - kB) / 2 << ")'>" << y_label_ << "</text>\n";

    std::size_t ci = 0;
    double ly = kT + 16;
    for (const auto& s : series_) {
        const char* color = kColors[ci++ % 6];
        out << "<polyline fill='none' stroke='" << color
            << "' stroke-width='1.5' points='";
        for (std::size_t k = 0; k < s.x.size(); ++k)
            out << px(s.x[k]) << "," << py(s.y[k]) << " ";
        out << "'/>\n";
        if (s.markers)
            for (std::size_t k = 0; k < s.x.size(); ++k)
                out << "<circle cx='" << px(s.x[k]) << "' cy='" << py(s.y[k])
                    << "' r='3' fill='" << color << "'/>\n";
        out << "<text x='" << kW - kR - 8 << "' y='" << ly
            << "' text-anchor='end' font-family='sans-serif' font-size='12' "
               "fill='"
            << color << "'>" << s.name << "</text>\n";
        ly += 16;
    }
    out << "</svg>\n";
}

}  // namespace sqz
