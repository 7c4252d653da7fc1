#pragma once

#include <string>
#include <vector>

#include "smmpc/harness.hpp"

namespace smmpc::svg {

struct Series {
    std::string label;
    std::string color;
    std::vector<double> x;
    std::vector<double> y;
};

struct Box {
    std::string label;
    SummaryStat stat;
};

// Standalone deterministic SVG renderers (no external tooling).
std::string line_plot(const std::string& title, const std::string& xlabel,
                      const std::string& ylabel, const std::vector<Series>& series);
std::string box_plot(const std::string& title, const std::string& ylabel,
                     const std::vector<Box>& boxes);

}  // namespace smmpc::svg
