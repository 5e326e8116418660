#pragma once

// CSV and SVG emission. Floating point values are written with 17
// significant digits so a re-parse reproduces them exactly.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "fictdom/analysis.hpp"
#include "fictdom/geometry.hpp"
#include "fictdom/spaces.hpp"

namespace fictdom {

inline std::string format_g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline std::ofstream open_output(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open output file '" + path + "'");
    return out;
}

inline void write_solution_csv(const std::string& path, const StructuredMesh& mesh,
                               const std::vector<double>& u) {
    std::ofstream out = open_output(path);
    out << "x,y,u\n";
    for (int v = 0; v < mesh.n_vertices(); ++v) {
        const Point2 p = mesh.vertex(v);
        out << format_g17(p.x) << ',' << format_g17(p.y) << ','
            << format_g17(u[static_cast<std::size_t>(v)]) << '\n';
    }
}

inline void write_multiplier_csv(const std::string& path, const FinePartition& fine,
                                 const MultiplierVector& lambda) {
    std::ofstream out = open_output(path);
    out << "edge,side,s0,s1,lambda\n";
    for (int e = 0; e < fine.n_edges(); ++e) {
        const BoundaryEdge& edge = fine.edges[static_cast<std::size_t>(e)];
        out << e << ',' << edge.side << ',' << format_g17(edge.s0) << ',' << format_g17(edge.s1)
            << ',' << format_g17(lambda[static_cast<std::size_t>(e)]) << '\n';
    }
}

inline const char* kConvergenceCsvHeader = "n,h,h_gamma,err_h1,err_l2_gamma,fluct_norm,energy_residual";

inline void write_convergence_csv(const std::string& path, const ConvergenceReport& report) {
    std::ofstream out = open_output(path);
    out << kConvergenceCsvHeader << '\n';
    for (const ConvergenceRow& r : report.rows) {
        out << r.n << ',' << format_g17(r.h) << ',' << format_g17(r.h_gamma) << ','
            << format_g17(r.err_h1) << ',' << format_g17(r.err_l2_gamma) << ','
            << format_g17(r.fluct_norm) << ',' << format_g17(r.energy_residual) << '\n';
    }
}

inline std::vector<ConvergenceRow> read_convergence_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    std::string line;
    if (!std::getline(in, line) || line != kConvergenceCsvHeader) {
        throw std::runtime_error("unexpected convergence CSV header in '" + path + "'");
    }
    std::vector<ConvergenceRow> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string field;
        ConvergenceRow r;
        auto next = [&]() -> std::string {
            if (!std::getline(ss, field, ',')) {
                throw std::runtime_error("short convergence CSV row in '" + path + "'");
            }
            return field;
        };
        r.n = std::stoi(next());
        r.h = std::strtod(next().c_str(), nullptr);
        r.h_gamma = std::strtod(next().c_str(), nullptr);
        r.err_h1 = std::strtod(next().c_str(), nullptr);
        r.err_l2_gamma = std::strtod(next().c_str(), nullptr);
        r.fluct_norm = std::strtod(next().c_str(), nullptr);
        r.energy_residual = std::strtod(next().c_str(), nullptr);
        rows.push_back(r);
    }
    return rows;
}

namespace detail {

struct LogLogFrame {
    double xmin, xmax, ymin, ymax;  // log10 data ranges
    double px0, px1, py0, py1;      // pixel box (py0 = top)

    double px(double lx) const { return px0 + (lx - xmin) / (xmax - xmin) * (px1 - px0); }
    double py(double ly) const { return py1 - (ly - ymin) / (ymax - ymin) * (py1 - py0); }
};

inline std::string polyline(const LogLogFrame& f, const std::vector<ConvergenceRow>& rows,
                            double ConvergenceRow::*field, const char* color) {
    std::ostringstream ss;
    ss << "  <polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    for (const ConvergenceRow& r : rows) {
        ss << f.px(std::log10(r.h)) << ',' << f.py(std::log10(r.*field)) << ' ';
    }
    ss << "\"/>\n";
    for (const ConvergenceRow& r : rows) {
        ss << "  <circle cx=\"" << f.px(std::log10(r.h)) << "\" cy=\""
           << f.py(std::log10(r.*field)) << "\" r=\"2.5\" fill=\"" << color << "\"/>\n";
    }
    return ss.str();
}

}  // namespace detail

// Log-log convergence plot: both error curves against h, decade gridlines,
// and a slope-one reference triangle.
inline void write_convergence_svg(const std::string& path, const ConvergenceReport& report) {
    if (report.rows.size() < 2) {
        throw std::invalid_argument("write_convergence_svg: need at least 2 rows");
    }
    detail::LogLogFrame f{};
    f.px0 = 70.0;
    f.px1 = 620.0;
    f.py0 = 25.0;
    f.py1 = 420.0;
    f.xmin = f.xmax = std::log10(report.rows.front().h);
    f.ymin = f.ymax = std::log10(report.rows.front().err_h1);
    for (const ConvergenceRow& r : report.rows) {
        for (double v : {std::log10(r.h)}) {
            f.xmin = std::min(f.xmin, v);
            f.xmax = std::max(f.xmax, v);
        }
        for (double v : {std::log10(r.err_h1), std::log10(r.err_l2_gamma)}) {
            f.ymin = std::min(f.ymin, v);
            f.ymax = std::max(f.ymax, v);
        }
    }
    f.xmin -= 0.1;
    f.xmax += 0.1;
    f.ymin -= 0.4;
    f.ymax += 0.2;

    std::ofstream out = open_output(path);
    out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
        << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"640\" "
           "height=\"480\" viewBox=\"0 0 640 480\">\n"
        << "  <rect x=\"0\" y=\"0\" width=\"640\" height=\"480\" fill=\"white\"/>\n"
        << "  <rect x=\"" << f.px0 << "\" y=\"" << f.py0 << "\" width=\"" << (f.px1 - f.px0)
        << "\" height=\"" << (f.py1 - f.py0) << "\" fill=\"none\" stroke=\"black\"/>\n";

    // decade gridlines and tick labels on the error axis
    for (int d = static_cast<int>(std::ceil(f.ymin)); d <= static_cast<int>(std::floor(f.ymax));
         ++d) {
        const double y = f.py(d);
        out << "  <line x1=\"" << f.px0 << "\" y1=\"" << y << "\" x2=\"" << f.px1 << "\" y2=\""
            << y << "\" stroke=\"#cccccc\" stroke-width=\"0.5\"/>\n";
        out << "  <text x=\"" << f.px0 - 8 << "\" y=\"" << y + 4
            << "\" text-anchor=\"end\" font-size=\"12\">1e" << d << "</text>\n";
    }
    // one tick per refinement level on the h axis
    for (const ConvergenceRow& r : report.rows) {
        const double x = f.px(std::log10(r.h));
        out << "  <line x1=\"" << x << "\" y1=\"" << f.py1 << "\" x2=\"" << x << "\" y2=\""
            << f.py1 + 5 << "\" stroke=\"black\"/>\n";
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.4g", r.h);
        out << "  <text x=\"" << x << "\" y=\"" << f.py1 + 18
            << "\" text-anchor=\"middle\" font-size=\"12\">" << buf << "</text>\n";
    }
    out << "  <text x=\"" << 0.5 * (f.px0 + f.px1) << "\" y=\"" << f.py1 + 38
        << "\" text-anchor=\"middle\" font-size=\"13\">h</text>\n";
    out << "  <text x=\"14\" y=\"" << 0.5 * (f.py0 + f.py1)
        << "\" text-anchor=\"middle\" font-size=\"13\" transform=\"rotate(-90 14 "
        << 0.5 * (f.py0 + f.py1) << ")\">error</text>\n";

    out << detail::polyline(f, report.rows, &ConvergenceRow::err_h1, "#1f77b4");
    out << detail::polyline(f, report.rows, &ConvergenceRow::err_l2_gamma, "#d62728");

    // slope-one reference triangle under the primal error curve
    {
        const ConvergenceRow& r0 = report.rows[report.rows.size() - 2];
        const ConvergenceRow& r1 = report.rows.back();
        const double xa = std::log10(r0.h), xb = std::log10(r1.h);
        const double yb = std::log10(r1.err_h1) - 0.25;
        const double ya = yb + (xa - xb);
        out << "  <path d=\"M" << f.px(xa) << ' ' << f.py(ya) << " L" << f.px(xb) << ' '
            << f.py(yb) << " L" << f.px(xa) << ' ' << f.py(yb)
            << " Z\" fill=\"none\" stroke=\"#444444\"/>\n";
        out << "  <text x=\"" << f.px(xa) + 6 << "\" y=\"" << 0.5 * (f.py(ya) + f.py(yb))
            << "\" font-size=\"11\">1</text>\n";
    }

    // legend
    out << "  <rect x=\"" << f.px1 - 170 << "\" y=\"" << f.py0 + 8
        << "\" width=\"160\" height=\"40\" fill=\"white\" stroke=\"#999999\"/>\n"
        << "  <line x1=\"" << f.px1 - 160 << "\" y1=\"" << f.py0 + 22 << "\" x2=\""
        << f.px1 - 130 << "\" y2=\"" << f.py0 + 22
        << "\" stroke=\"#1f77b4\" stroke-width=\"1.5\"/>\n"
        << "  <text x=\"" << f.px1 - 124 << "\" y=\"" << f.py0 + 26
        << "\" font-size=\"12\">|u-u_h|_1</text>\n"
        << "  <line x1=\"" << f.px1 - 160 << "\" y1=\"" << f.py0 + 38 << "\" x2=\""
        << f.px1 - 130 << "\" y2=\"" << f.py0 + 38
        << "\" stroke=\"#d62728\" stroke-width=\"1.5\"/>\n"
        << "  <text x=\"" << f.px1 - 124 << "\" y=\"" << f.py0 + 42
        << "\" font-size=\"12\">||l-l_h||_0</text>\n";

    out << "</svg>\n";
}

}  // namespace fictdom
