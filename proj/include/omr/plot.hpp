#pragma once

#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "omr/bench.hpp"

namespace omr::bench {

struct PlotOptions {
    bool log_y = false;
};

namespace detail {

struct Series {
    // solver -> N -> (sum of err_V1, count)
    std::map<std::string, std::map<int, std::pair<double, long>>> by_solver;
};

inline std::vector<std::string> split_csv_row(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) out.push_back(field);
    if (!line.empty() && line.back() == ',') out.push_back("");
    return out;
}

inline std::string panel_suffix(int d, double sigma) {
    return "_D" + std::to_string(d) + "_s" + format_double(sigma);
}

inline std::string with_suffix(const std::string& path, const std::string& suffix,
                               const std::string& ext) {
    std::string stem = path;
    const auto dot = stem.rfind('.');
    std::string old_ext;
    if (dot != std::string::npos && dot > stem.rfind('/') + 1) {
        old_ext = stem.substr(dot);
        stem.erase(dot);
    }
    return stem + suffix + (ext.empty() ? old_ext : ext);
}

inline std::string svg_color(std::size_t i) {
    static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
                                    "#8c564b", "#e377c2", "#7f7f7f"};
    return palette[i % (sizeof(palette) / sizeof(palette[0]))];
}

inline std::string format_tick(double v) {
    std::ostringstream os;
    os.precision(4);
    os << v;
    return os.str();
}

inline void write_svg_panel(const std::string& path, const Series& series, int d,
                            double sigma, const PlotOptions& opts) {
    const double width = 640, height = 480;
    const double left = 70, right = width - 150, top = 40, bottom = height - 50;

    int n_min = std::numeric_limits<int>::max(), n_max = std::numeric_limits<int>::min();
    double y_min = std::numeric_limits<double>::infinity(), y_max = 0.0;
    const double log_floor = 1e-16;
    for (const auto& [solver, pts] : series.by_solver)
        for (const auto& [n, acc] : pts) {
            const double mean = acc.first / acc.second;
            n_min = std::min(n_min, n);
            n_max = std::max(n_max, n);
            const double y = opts.log_y ? std::max(mean, log_floor) : mean;
            y_min = std::min(y_min, y);
            y_max = std::max(y_max, y);
        }
    if (n_min == n_max) {
        n_min -= 1;
        n_max += 1;
    }
    auto transform_y = [&](double v) { return opts.log_y ? std::log10(std::max(v, log_floor)) : v; };
    double t_min = transform_y(y_min), t_max = transform_y(y_max);
    if (!(t_max > t_min)) {
        t_min -= 1.0;
        t_max += 1.0;
    }
    const double pad = 0.05 * (t_max - t_min);
    t_min -= pad;
    t_max += pad;

    auto sx = [&](double n) { return left + (n - n_min) / double(n_max - n_min) * (right - left); };
    auto sy = [&](double v) {
        return bottom - (transform_y(v) - t_min) / (t_max - t_min) * (bottom - top);
    };

    std::ofstream os(path);
    if (!os) throw std::runtime_error("plot: cannot open output file " + path);
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
       << height << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n";
    os << "<rect width=\"" << width << "\" height=\"" << height << "\" fill=\"white\"/>\n";
    os << "<text x=\"" << (left + right) / 2 << "\" y=\"24\" text-anchor=\"middle\" "
          "font-family=\"sans-serif\" font-size=\"15\">mean recovery error, D=" << d
       << ", sigma=" << format_double(sigma) << "</text>\n";

    // axes
    os << "<line x1=\"" << left << "\" y1=\"" << bottom << "\" x2=\"" << right << "\" y2=\""
       << bottom << "\" stroke=\"black\"/>\n";
    os << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\""
       << bottom << "\" stroke=\"black\"/>\n";

    for (int i = 0; i <= 5; ++i) {
        const double n = n_min + (n_max - n_min) * i / 5.0;
        const double x = sx(n);
        os << "<line x1=\"" << x << "\" y1=\"" << bottom << "\" x2=\"" << x << "\" y2=\""
           << bottom + 5 << "\" stroke=\"black\"/>\n";
        os << "<text x=\"" << x << "\" y=\"" << bottom + 20
           << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">"
           << format_tick(n) << "</text>\n";

        const double t = t_min + (t_max - t_min) * i / 5.0;
        const double yv = opts.log_y ? std::pow(10.0, t) : t;
        const double y = bottom - (t - t_min) / (t_max - t_min) * (bottom - top);
        os << "<line x1=\"" << left - 5 << "\" y1=\"" << y << "\" x2=\"" << left << "\" y2=\""
           << y << "\" stroke=\"black\"/>\n";
        os << "<text x=\"" << left - 8 << "\" y=\"" << y + 4
           << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"12\">"
           << format_tick(yv) << "</text>\n";
    }
    os << "<text x=\"" << (left + right) / 2 << "\" y=\"" << height - 12
       << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">N</text>\n";

    std::size_t idx = 0;
    for (const auto& [solver, pts] : series.by_solver) {
        const std::string color = svg_color(idx);
        std::ostringstream poly;
        for (const auto& [n, acc] : pts) {
            const double mean = acc.first / acc.second;
            poly << sx(n) << ',' << sy(mean) << ' ';
            os << "<circle cx=\"" << sx(n) << "\" cy=\"" << sy(mean) << "\" r=\"3\" fill=\""
               << color << "\"/>\n";
        }
        os << "<polyline points=\"" << poly.str() << "\" fill=\"none\" stroke=\"" << color
           << "\" stroke-width=\"1.5\"/>\n";
        const double ly = top + 18.0 * idx;
        os << "<line x1=\"" << right + 10 << "\" y1=\"" << ly << "\" x2=\"" << right + 34
           << "\" y2=\"" << ly << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
        os << "<text x=\"" << right + 40 << "\" y=\"" << ly + 4
           << "\" font-family=\"sans-serif\" font-size=\"12\">" << solver << "</text>\n";
        ++idx;
    }
    os << "</svg>\n";
    if (!os) throw std::runtime_error("plot: write failed for " + path);
}

inline void write_dat_panel(const std::string& path, const Series& series) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("plot: cannot open output file " + path);
    bool first = true;
    for (const auto& [solver, pts] : series.by_solver) {
        if (!first) os << "\n\n";
        first = false;
        os << "# solver " << solver << "\n# N mean_err\n";
        for (const auto& [n, acc] : pts) os << n << ' ' << format_double(acc.first / acc.second) << '\n';
    }
    if (!os) throw std::runtime_error("plot: write failed for " + path);
}

}  // namespace detail

/// Render error-vs-N curves from a sweep data CSV: one SVG and one
/// gnuplot-compatible .dat file per (D, sigma) panel. Returns the list of
/// files written.
inline std::vector<std::string> emit_plot(const std::string& csv_path,
                                          const std::string& out_path,
                                          const PlotOptions& opts = {}) {
    std::ifstream in(csv_path);
    if (!in) throw std::runtime_error("plot: cannot open CSV " + csv_path);

    std::string line;
    std::vector<std::string> header;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        header = detail::split_csv_row(line);
        break;
    }
    if (header.empty()) throw std::runtime_error("plot: no header row in " + csv_path);

    auto column = [&](const std::string& name) {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (header[i] == name) return i;
        throw std::runtime_error("plot: CSV " + csv_path + " lacks column '" + name + "'");
    };
    const std::size_t col_solver = column("solver");
    const std::size_t col_d = column("D");
    const std::size_t col_n = column("N");
    const std::size_t col_sigma = column("sigma");
    const std::size_t col_err = column("err_V1");

    std::map<std::pair<int, double>, detail::Series> panels;
    long data_rows = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        const auto fields = detail::split_csv_row(line);
        if (fields.size() != header.size())
            throw std::runtime_error("plot: malformed CSV row at " + csv_path + ":" +
                                     std::to_string(lineno));
        try {
            const int d = std::stoi(fields[col_d]);
            const int n = std::stoi(fields[col_n]);
            const double sigma = std::stod(fields[col_sigma]);
            const double err = std::stod(fields[col_err]);
            auto& acc = panels[{d, sigma}].by_solver[fields[col_solver]][n];
            acc.first += err;
            acc.second += 1;
        } catch (const std::exception&) {
            throw std::runtime_error("plot: malformed CSV row at " + csv_path + ":" +
                                     std::to_string(lineno));
        }
        ++data_rows;
    }
    if (data_rows == 0) throw std::runtime_error("plot: no data rows in " + csv_path);

    std::vector<std::string> written;
    const bool single = panels.size() == 1;
    for (const auto& [key, series] : panels) {
        const std::string suffix = single ? "" : detail::panel_suffix(key.first, key.second);
        const std::string svg = detail::with_suffix(out_path, suffix, "");
        const std::string dat = detail::with_suffix(out_path, suffix, ".dat");
        detail::write_svg_panel(svg, series, key.first, key.second, opts);
        detail::write_dat_panel(dat, series);
        written.push_back(svg);
        written.push_back(dat);
    }
    return written;
}

}  // namespace omr::bench
