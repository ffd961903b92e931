#include "anmod/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace anmod {

namespace {

std::string num(double v) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, end);
}

std::string fixed(double v, int digits) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, digits);
    return std::string(buf, end);
}

std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '&': out += "&amp;"; break;
            default: out += c;
        }
    }
    return out;
}

// Roughly five round-numbered ticks covering [lo, hi].
std::vector<double> ticks(double lo, double hi) {
    const double span = hi - lo;
    const double raw = span / 5.0;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    double step = mag;
    for (double m : {1.0, 2.0, 5.0, 10.0}) {
        step = m * mag;
        if (span / step <= 6.0) break;
    }
    std::vector<double> out;
    for (double t = std::ceil(lo / step) * step; t <= hi + 1e-9 * span; t += step) out.push_back(t);
    return out;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
}

}  // namespace

std::string render_svg(const Series& s, int width, int height) {
    const double left = 80, right = 20, top = 40, bottom = 50;
    const double pw = width - left - right;
    const double ph = height - top - bottom;

    double x_lo = s.x.empty() ? 0.0 : *std::min_element(s.x.begin(), s.x.end());
    double x_hi = s.x.empty() ? 1.0 : *std::max_element(s.x.begin(), s.x.end());
    if (x_hi <= x_lo) x_hi = x_lo + 1.0;
    double y_lo = std::numeric_limits<double>::infinity();
    double y_hi = -y_lo;
    for (double v : s.y) {
        y_lo = std::min(y_lo, v);
        y_hi = std::max(y_hi, v);
    }
    if (s.reference) {
        y_lo = std::min(y_lo, *s.reference);
        y_hi = std::max(y_hi, *s.reference);
    }
    if (!std::isfinite(y_lo)) y_lo = 0.0, y_hi = 1.0;
    const double pad = y_hi > y_lo ? 0.05 * (y_hi - y_lo) : std::max(std::abs(y_lo) * 0.05, 1.0);
    y_lo -= pad;
    y_hi += pad;

    auto px = [&](double v) { return left + (v - x_lo) / (x_hi - x_lo) * pw; };
    auto py = [&](double v) { return top + (y_hi - v) / (y_hi - y_lo) * ph; };

    std::ostringstream o;
    o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" viewBox=\"0 0 " << width << ' ' << height << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    o << "<text x=\"" << width / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" << escape(s.title)
      << "</text>\n";
    o << "<g stroke=\"#e0e0e0\">\n";
    for (double t : ticks(y_lo, y_hi))
        o << "<line x1=\"" << left << "\" x2=\"" << left + pw << "\" y1=\"" << fixed(py(t), 6) << "\" y2=\""
          << fixed(py(t), 6) << "\"/>\n";
    o << "</g>\n";
    o << "<g stroke=\"black\"><line x1=\"" << left << "\" y1=\"" << top + ph << "\" x2=\"" << left + pw << "\" y2=\""
      << top + ph << "\"/><line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\"" << top + ph
      << "\"/></g>\n";
    for (double t : ticks(x_lo, x_hi))
        o << "<text x=\"" << fixed(px(t), 6) << "\" y=\"" << top + ph + 18 << "\" text-anchor=\"middle\">"
          << fixed(t, 6) << "</text>\n";
    for (double t : ticks(y_lo, y_hi))
        o << "<text x=\"" << left - 6 << "\" y=\"" << fixed(py(t) + 4, 6) << "\" text-anchor=\"end\">"
          << fixed(t, 6) << "</text>\n";
    o << "<text x=\"" << left + pw / 2 << "\" y=\"" << height - 10 << "\" text-anchor=\"middle\">iteration</text>\n";
    o << "<text transform=\"translate(16," << top + ph / 2 << ") rotate(-90)\" text-anchor=\"middle\">"
      << escape(s.y_label) << "</text>\n";
    if (s.reference) {
        o << "<line class=\"target\" x1=\"" << left << "\" x2=\"" << left + pw << "\" y1=\""
          << fixed(py(*s.reference), 6) << "\" y2=\"" << fixed(py(*s.reference), 6)
          << "\" stroke=\"#d62728\" stroke-dasharray=\"6,4\"/>\n";
    }
    if (!s.x.empty()) {
        o << "<polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"2\" points=\"";
        for (std::size_t i = 0; i < s.x.size(); ++i)
            o << (i ? " " : "") << fixed(px(s.x[i]), 6) << ',' << fixed(py(s.y[i]), 6);
        o << "\"/>\n";
        for (std::size_t i = 0; i < s.x.size(); ++i)
            o << "<circle cx=\"" << fixed(px(s.x[i]), 6) << "\" cy=\"" << fixed(py(s.y[i]), 6)
              << "\" r=\"3\" fill=\"#1f77b4\"/>\n";
    }
    o << "</svg>\n";
    return o.str();
}

ReportFiles write_report(const RunHistory& h, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    ReportFiles files;
    files.errors_csv = dir / "errors.csv";
    files.variables_csv = dir / "variables.csv";

    std::vector<std::string> variables;
    if (!h.records.empty())
        for (const auto& [name, v] : h.records.front().x) variables.push_back(name);

    std::ostringstream errors, vars;
    errors << 'k';
    for (const auto& [name, target] : h.targets) errors << ',' << name;
    errors << '\n';
    vars << 'k';
    for (const auto& name : variables) vars << ',' << name;
    vars << '\n';
    for (const auto& r : h.records) {
        errors << r.k;
        for (const auto& [name, target] : h.targets)
            errors << ',' << (r.y.contains(name) ? num(r.y.at(name) / target - 1.0) : std::string());
        errors << '\n';
        vars << r.k;
        for (const auto& name : variables) vars << ',' << (r.x.contains(name) ? num(r.x.at(name)) : std::string());
        vars << '\n';
    }
    write_file(files.errors_csv, errors.str());
    write_file(files.variables_csv, vars.str());

    for (const auto& [name, target] : h.targets) {
        Series s{name, name, {}, {}, target};
        for (const auto& r : h.records) {
            if (!r.y.contains(name)) continue;
            s.x.push_back(r.k);
            s.y.push_back(r.y.at(name));
        }
        const auto path = dir / ("target_" + name + ".svg");
        write_file(path, render_svg(s));
        files.charts.push_back(path);
    }
    for (const auto& name : variables) {
        Series s{name, name, {}, {}, std::nullopt};
        for (const auto& r : h.records) {
            s.x.push_back(r.k);
            s.y.push_back(r.x.at(name));
        }
        const auto path = dir / ("variable_" + name + ".svg");
        write_file(path, render_svg(s));
        files.charts.push_back(path);
    }
    return files;
}

}  // namespace anmod
