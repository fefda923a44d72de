#pragma once

#include <string>
#include <vector>

namespace sqz {

// Minimal static SVG line/scatter plotter; no display-server dependency.
// Every plot is regenerated from persisted CSV data, the SVG carries nothing
// exclusive.
class SvgPlot {
  public:
    SvgPlot(std::string title, std::string x_label, std::string y_label)
        : title_(std::move(title)),
          x_label_(std::move(x_label)),
          y_label_(std::move(y_label)) {}

    void add_series(const std::string& name, std::vector<double> x,
                    std::vector<double> y, bool markers = true);

    void write(const std::string& path) const;

  private:
    struct Series {
        std::string name;
        std::vector<double> x, y;
        bool markers;
    };
    std::string title_, x_label_, y_label_;
    std::vector<Series> series_;
};

}  // namespace sqz
