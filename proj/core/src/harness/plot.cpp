#include "vdpo/harness/plot.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <filesystem>
#include <map>
#include <sstream>

#include "vdpo/common/error.hpp"
#include "vdpo/common/text.hpp"

namespace vdpo::harness {

namespace {

constexpr double kWidth = 800, kHeight = 500;
constexpr double kLeft = 80, kRight = 180, kTop = 40, kBottom = 60;
constexpr std::array<const char*, 8> kColors = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                                "#9467bd", "#8c564b", "#e377c2", "#17becf"};

std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

std::string num(double v) {
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

struct Range {
    double lo, hi;
    double span() const { return hi - lo; }
};

Range padded(double lo, double hi) {
    if (hi - lo < 1e-12) {
        const double pad = std::max(1.0, std::abs(lo) * 0.1);
        return {lo - pad, hi + pad};
    }
    const double pad = 0.05 * (hi - lo);
    return {lo - pad, hi + pad};
}

}  // namespace

std::string render_learning_curves(const std::vector<std::pair<std::string, SeriesPoints>>& curves, const std::string& title) {
    double xmin = INFINITY, xmax = -INFINITY, ymin = INFINITY, ymax = -INFINITY;
    for (const auto& [name, pts] : curves) {
        for (const auto& p : pts) {
            xmin = std::min(xmin, static_cast<double>(p.step));
            xmax = std::max(xmax, static_cast<double>(p.step));
            ymin = std::min(ymin, p.mean - p.std);
            ymax = std::max(ymax, p.mean + p.std);
        }
    }
    if (!std::isfinite(xmin)) throw ConfigError("plot: no data points to draw");
    const Range xr = padded(xmin, xmax);
    const Range yr = padded(ymin, ymax);
    const double pw = kWidth - kLeft - kRight;
    const double ph = kHeight - kTop - kBottom;
    auto X = [&](double x) { return kLeft + (x - xr.lo) / xr.span() * pw; };
    auto Y = [&](double y) { return kTop + (1.0 - (y - yr.lo) / yr.span()) * ph; };

    std::ostringstream svg;
    svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
        << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
        << "\" viewBox=\"0 0 " << kWidth << " " << kHeight << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
        << "<rect x=\"0\" y=\"0\" width=\"" << kWidth << "\" height=\"" << kHeight << "\" fill=\"white\"/>\n";
    if (!title.empty()) {
        svg << "<text x=\"" << kLeft + pw / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">" << escape(title)
            << "</text>\n";
    }
    svg << "<g stroke=\"black\" fill=\"none\">\n"
        << "<line x1=\"" << kLeft << "\" y1=\"" << kTop + ph << "\" x2=\"" << kLeft + pw << "\" y2=\"" << kTop + ph << "\"/>\n"
        << "<line x1=\"" << kLeft << "\" y1=\"" << kTop << "\" x2=\"" << kLeft << "\" y2=\"" << kTop + ph << "\"/>\n"
        << "</g>\n";
    for (int i = 0; i <= 5; ++i) {
        const double xv = xr.lo + xr.span() * i / 5.0;
        const double yv = yr.lo + yr.span() * i / 5.0;
        svg << "<line x1=\"" << num(X(xv)) << "\" y1=\"" << kTop + ph << "\" x2=\"" << num(X(xv)) << "\" y2=\""
            << kTop + ph + 5 << "\" stroke=\"black\"/>\n"
            << "<text x=\"" << num(X(xv)) << "\" y=\"" << kTop + ph + 20 << "\" text-anchor=\"middle\">" << num(xv)
            << "</text>\n"
            << "<line x1=\"" << kLeft - 5 << "\" y1=\"" << num(Y(yv)) << "\" x2=\"" << kLeft << "\" y2=\"" << num(Y(yv))
            << "\" stroke=\"black\"/>\n"
            << "<text x=\"" << kLeft - 8 << "\" y=\"" << num(Y(yv) + 4) << "\" text-anchor=\"end\">" << num(yv)
            << "</text>\n";
    }
    svg << "<text x=\"" << kLeft + pw / 2 << "\" y=\"" << kHeight - 15 << "\" text-anchor=\"middle\">global step</text>\n"
        << "<text x=\"18\" y=\"" << kTop + ph / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 18 " << kTop + ph / 2
        << ")\">evaluation return</text>\n";

    for (std::size_t c = 0; c < curves.size(); ++c) {
        const auto& [name, pts] = curves[c];
        const char* color = kColors[c % kColors.size()];
        if (!pts.empty()) {
            std::string band, line;
            for (const auto& p : pts) band += num(X(static_cast<double>(p.step))) + "," + num(Y(p.mean + p.std)) + " ";
            for (auto it = pts.rbegin(); it != pts.rend(); ++it) {
                band += num(X(static_cast<double>(it->step))) + "," + num(Y(it->mean - it->std)) + " ";
            }
            for (const auto& p : pts) line += num(X(static_cast<double>(p.step))) + "," + num(Y(p.mean)) + " ";
            band.pop_back();
            line.pop_back();
            svg << "<g class=\"series\" data-name=\"" << escape(name) << "\">\n"
                << "<polygon points=\"" << band << "\" fill=\"" << color << "\" fill-opacity=\"0.2\" stroke=\"none\"/>\n";
            if (pts.size() == 1) {
                svg << "<circle cx=\"" << num(X(static_cast<double>(pts[0].step))) << "\" cy=\"" << num(Y(pts[0].mean))
                    << "\" r=\"4\" fill=\"" << color << "\"/>\n";
            } else {
                svg << "<polyline points=\"" << line << "\" fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
            }
            svg << "</g>\n";
        }
        const double ly = kTop + 10 + 20.0 * static_cast<double>(c);
        svg << "<line x1=\"" << kLeft + pw + 15 << "\" y1=\"" << ly << "\" x2=\"" << kLeft + pw + 40 << "\" y2=\"" << ly
            << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n"
            << "<text x=\"" << kLeft + pw + 45 << "\" y=\"" << ly + 4 << "\">" << escape(name) << "</text>\n";
    }
    svg << "</svg>\n";
    return svg.str();
}

std::vector<std::pair<std::string, SeriesPoints>> collect_curves(const std::vector<std::string>& bundle_dirs) {
    if (bundle_dirs.empty()) throw ConfigError("plot: no bundles given");
    std::vector<std::pair<std::string, Aggregate>> bundles;
    std::map<std::string, int> seen;
    for (const auto& dir : bundle_dirs) {
        const auto path = std::filesystem::path(dir) / "aggregate.json";
        if (!std::filesystem::exists(path)) throw ConfigError("plot: '" + dir + "' has no aggregate.json");
        bundles.emplace_back(std::filesystem::path(dir).filename().string(), load_aggregate(path.string()));
        for (const auto& [name, pts] : bundles.back().second.series) ++seen[name];
    }
    std::vector<std::pair<std::string, SeriesPoints>> out;
    for (const auto& [label, agg] : bundles) {
        for (const auto& [name, pts] : agg.series) out.emplace_back(seen[name] > 1 ? label + "/" + name : name, pts);
    }
    if (out.empty()) throw ConfigError("plot: bundles contain no learning curves");
    return out;
}

void plot_bundles(const std::vector<std::string>& bundle_dirs, const std::string& output_path) {
    write_file(output_path, render_learning_curves(collect_curves(bundle_dirs)));
}

}  // namespace vdpo::harness
