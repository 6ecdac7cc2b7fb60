#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace fluidq::svg {

struct Series {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
};

struct Plot {
    std::string title;
    std::string x_label;
    std::string y_label;
    std::vector<Series> series;
    bool log_y = false;
};

// Minimal standalone line plot with axes, ticks and a legend.
std::string render(const Plot& plot, int width = 720, int height = 440);
void write(const std::filesystem::path& path, const Plot& plot);

}  // namespace fluidq::svg
