#include "smmpc/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace smmpc::svg {

namespace {

constexpr double kWidth = 800.0;
constexpr double kHeight = 480.0;
constexpr double kLeft = 70.0, kRight = 30.0, kTop = 40.0, kBottom = 50.0;

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

std::string tick_label(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4g", v);
    return buf;
}

struct Range {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();

    void add(double v) {
        if (!std::isfinite(v)) return;
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    void pad() {
        if (lo > hi) {
            lo = 0.0;
            hi = 1.0;
        }
        if (lo == hi) {
            lo -= 0.5;
            hi += 0.5;
        }
        const double margin = 0.05 * (hi - lo);
        lo -= margin;
        hi += margin;
    }
};

void header(std::ostringstream& out, const std::string& title) {
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
        << kHeight << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<text x=\"" << kWidth / 2 << "\" y=\"22\" text-anchor=\"middle\" "
        << "font-family=\"sans-serif\" font-size=\"15\">" << title << "</text>\n";
}

void axes(std::ostringstream& out, const Range& xr, const Range& yr,
          const std::string& xlabel, const std::string& ylabel) {
    const double x0 = kLeft, x1 = kWidth - kRight;
    const double y0 = kHeight - kBottom, y1 = kTop;
    out << "<line x1=\"" << x0 << "\" y1=\"" << y0 << "\" x2=\"" << x1 << "\" y2=\"" << y0
        << "\" stroke=\"black\"/>\n";
    out << "<line x1=\"" << x0 << "\" y1=\"" << y0 << "\" x2=\"" << x0 << "\" y2=\"" << y1
        << "\" stroke=\"black\"/>\n";
    for (int i = 0; i <= 5; ++i) {
        const double fx = static_cast<double>(i) / 5.0;
        const double xv = xr.lo + fx * (xr.hi - xr.lo);
        const double px = x0 + fx * (x1 - x0);
        out << "<line x1=\"" << num(px) << "\" y1=\"" << y0 << "\" x2=\"" << num(px)
            << "\" y2=\"" << y0 + 4 << "\" stroke=\"black\"/>\n";
        out << "<text x=\"" << num(px) << "\" y=\"" << y0 + 18
            << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">"
            << tick_label(xv) << "</text>\n";
        const double yv = yr.lo + fx * (yr.hi - yr.lo);
        const double py = y0 - fx * (y0 - y1);
        out << "<line x1=\"" << x0 - 4 << "\" y1=\"" << num(py) << "\" x2=\"" << x0
            << "\" y2=\"" << num(py) << "\" stroke=\"black\"/>\n";
        out << "<text x=\"" << x0 - 8 << "\" y=\"" << num(py + 4)
            << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">"
            << tick_label(yv) << "</text>\n";
    }
    out << "<text x=\"" << (x0 + x1) / 2 << "\" y=\"" << kHeight - 12
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" << xlabel
        << "</text>\n";
    out << "<text x=\"16\" y=\"" << (y0 + y1) / 2
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\" "
        << "transform=\"rotate(-90 16 " << (y0 + y1) / 2 << ")\">" << ylabel << "</text>\n";
}

double map_x(double v, const Range& r) {
    return kLeft + (v - r.lo) / (r.hi - r.lo) * (kWidth - kLeft - kRight);
}

double map_y(double v, const Range& r) {
    return kHeight - kBottom - (v - r.lo) / (r.hi - r.lo) * (kHeight - kTop - kBottom);
}

}  // namespace

std::string line_plot(const std::string& title, const std::string& xlabel,
                      const std::string& ylabel, const std::vector<Series>& series) {
    Range xr, yr;
    for (const Series& s : series) {
        for (double v : s.x) xr.add(v);
        for (double v : s.y) yr.add(v);
    }
    xr.pad();
    yr.pad();

    std::ostringstream out;
    header(out, title);
    axes(out, xr, yr, xlabel, ylabel);
    double legend_y = kTop + 8;
    for (const Series& s : series) {
        out << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.5\" points=\"";
        bool first = true;
        for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
            if (!std::isfinite(s.y[i])) continue;
            if (!first) out << ' ';
            out << num(map_x(s.x[i], xr)) << ',' << num(map_y(s.y[i], yr));
            first = false;
        }
        out << "\"/>\n";
        out << "<line x1=\"" << kWidth - 180 << "\" y1=\"" << legend_y << "\" x2=\""
            << kWidth - 160 << "\" y2=\"" << legend_y << "\" stroke=\"" << s.color
            << "\" stroke-width=\"2\"/>\n";
        out << "<text x=\"" << kWidth - 154 << "\" y=\"" << legend_y + 4
            << "\" font-family=\"sans-serif\" font-size=\"11\">" << s.label << "</text>\n";
        legend_y += 16;
    }
    out << "</svg>\n";
    return out.str();
}

std::string box_plot(const std::string& title, const std::string& ylabel,
                     const std::vector<Box>& boxes) {
    Range xr, yr;
    xr.lo = 0.0;
    xr.hi = static_cast<double>(boxes.size());
    for (const Box& b : boxes) {
        yr.add(b.stat.min);
        yr.add(b.stat.max);
    }
    yr.pad();

    std::ostringstream out;
    header(out, title);
    axes(out, xr, yr, "", ylabel);
    const double slot = (kWidth - kLeft - kRight) / std::max<std::size_t>(1, boxes.size());
    for (std::size_t i = 0; i < boxes.size(); ++i) {
        const Box& b = boxes[i];
        const double cx = kLeft + (static_cast<double>(i) + 0.5) * slot;
        const double half = 0.25 * slot;
        const double yq1 = map_y(b.stat.q1, yr), yq3 = map_y(b.stat.q3, yr);
        const double ymed = map_y(b.stat.median, yr);
        const double ymin = map_y(b.stat.min, yr), ymax = map_y(b.stat.max, yr);
        out << "<line x1=\"" << num(cx) << "\" y1=\"" << num(ymin) << "\" x2=\"" << num(cx)
            << "\" y2=\"" << num(yq1) << "\" stroke=\"black\"/>\n";
        out << "<line x1=\"" << num(cx) << "\" y1=\"" << num(yq3) << "\" x2=\"" << num(cx)
            << "\" y2=\"" << num(ymax) << "\" stroke=\"black\"/>\n";
        out << "<rect x=\"" << num(cx - half) << "\" y=\"" << num(yq3) << "\" width=\""
            << num(2 * half) << "\" height=\"" << num(yq1 - yq3)
            << "\" fill=\"#9ecae1\" stroke=\"black\"/>\n";
        out << "<line x1=\"" << num(cx - half) << "\" y1=\"" << num(ymed) << "\" x2=\""
            << num(cx + half) << "\" y2=\"" << num(ymed)
            << "\" stroke=\"black\" stroke-width=\"2\"/>\n";
        out << "<text x=\"" << num(cx) << "\" y=\"" << kHeight - kBottom + 32
            << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"10\">"
            << b.label << "</text>\n";
    }
    out << "</svg>\n";
    return out.str();
}

}  // namespace smmpc::svg
