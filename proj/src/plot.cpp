#include "tsbench/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

namespace tsbench::harness {

namespace fs = std::filesystem;

namespace {

constexpr std::array<const char*, 8> kPalette = {"#1b9e77", "#d95f02", "#7570b3", "#e7298a",
                                                 "#66a61e", "#e6ab02", "#a6761d", "#666666"};

int source_order(const eval::Source& s) {
    if (const auto* k = std::get_if<dgp::DgpKind>(&s)) return static_cast<int>(*k);
    return 100 + std::get<queue::QueueSpec>(s).servers;
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3g", v);
    return buf;
}

std::string esc(const std::string& s) {
    std::string out;
    for (const char c : s) {
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

// Collects (panel, series, x) -> mean y with first-seen orderings kept.
struct Collector {
    std::vector<std::pair<int, std::string>> panel_keys;
    std::map<std::string, std::vector<std::string>> series_order;
    std::map<std::string, std::vector<std::pair<double, std::string>>> x_order;
    std::map<std::tuple<std::string, std::string, std::string>, std::pair<double, int>> acc;

    void add(int panel_rank, const std::string& panel, const std::string& series, double x_rank,
             const std::string& x, double y) {
        if (!std::isfinite(y)) return;
        if (std::none_of(panel_keys.begin(), panel_keys.end(), [&](const auto& p) { return p.second == panel; })) {
            panel_keys.emplace_back(panel_rank, panel);
        }
        auto& so = series_order[panel];
        if (std::find(so.begin(), so.end(), series) == so.end()) so.push_back(series);
        auto& xo = x_order[panel];
        if (std::none_of(xo.begin(), xo.end(), [&](const auto& p) { return p.second == x; })) {
            xo.emplace_back(x_rank, x);
        }
        auto& a = acc[{panel, series, x}];
        a.first += y;
        a.second += 1;
    }

    std::vector<Panel> panels() {
        std::stable_sort(panel_keys.begin(), panel_keys.end(),
                         [](const auto& a, const auto& b) { return a.first < b.first; });
        std::vector<Panel> out;
        for (const auto& [_, name] : panel_keys) {
            auto xs = x_order[name];
            std::stable_sort(xs.begin(), xs.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
            Panel p;
            p.title = name;
            for (const auto& label : series_order[name]) {
                Series s;
                s.label = label;
                for (const auto& [__, x] : xs) {
                    const auto it = acc.find({name, label, x});
                    if (it != acc.end()) s.points.push_back({x, it->second.first / it->second.second});
                }
                p.series.push_back(std::move(s));
            }
            out.push_back(std::move(p));
        }
        return out;
    }
};

// Picks the overlay to show for a source: the first entry of `preference` present in rows.
std::map<std::string, dgp::OverlayKind> preferred_overlay(const std::vector<eval::MetricsRow>& rows,
                                                          const std::vector<dgp::OverlayKind>& preference) {
    std::map<std::string, std::set<dgp::OverlayKind>> present;
    for (const auto& r : rows) present[eval::source_name(r.setting.data.source)].insert(r.setting.data.overlay);
    std::map<std::string, dgp::OverlayKind> out;
    for (const auto& [src, set] : present) {
        for (const auto o : preference) {
            if (set.count(o)) {
                out[src] = o;
                break;
            }
        }
    }
    return out;
}

std::string panel_title(const eval::DataSetting& d) {
    std::string t = eval::source_name(d.source);
    if (!eval::is_queue(d.source)) t += " (" + std::string(dgp::to_string(d.overlay)) + ")";
    return t;
}

int reference_window(const std::vector<eval::MetricsRow>& rows) {
    std::set<int> ws;
    for (const auto& r : rows) {
        if (eval::is_ml(r.setting.method)) ws.insert(r.setting.window);
    }
    if (ws.empty() || ws.count(8)) return 8;
    return *ws.begin();
}

}  // namespace

std::vector<Figure> build_figures(const std::vector<eval::MetricsRow>& rows) {
    if (rows.empty()) {
        throw std::invalid_argument("build_figures: no metrics rows");
    }
    Eigen::Index n_max = 0;
    for (const auto& r : rows) n_max = std::max(n_max, r.setting.data.n);
    const int w_ref = reference_window(rows);
    auto uses_ref_window = [&](const eval::MetricsRow& r) {
        return !eval::is_ml(r.setting.method) || r.setting.window == w_ref;
    };

    std::vector<Figure> figs;

    {
        Collector c;
        for (const auto& r : rows) {
            if (r.setting.data.n != n_max || !uses_ref_window(r)) continue;
            const auto& d = r.setting.data;
            c.add(source_order(d.source), eval::source_name(d.source), std::string(dgp::to_string(d.overlay)),
                  static_cast<double>(r.setting.method), std::string(eval::display_name(r.setting.method)),
                  r.metrics.mse);
        }
        figs.push_back({"mse_by_method", "MSE by method, n = " + std::to_string(n_max), "MSE", c.panels()});
    }
    {
        const auto pref = preferred_overlay(rows, {dgp::OverlayKind::None, dgp::OverlayKind::Jump,
                                                   dgp::OverlayKind::RandomWalk, dgp::OverlayKind::Both});
        Collector c;
        for (const auto& r : rows) {
            const auto& d = r.setting.data;
            if (!eval::is_ml(r.setting.method) || eval::is_queue(d.source) || d.n != n_max ||
                d.overlay != pref.at(eval::source_name(d.source))) {
                continue;
            }
            c.add(source_order(d.source), panel_title(d), std::string(eval::display_name(r.setting.method)),
                  r.setting.window, std::to_string(r.setting.window), r.metrics.mse);
        }
        figs.push_back({"mse_by_window", "MSE of the tree ensembles by sliding window, n = " + std::to_string(n_max),
                        "MSE", c.panels()});
    }
    {
        const auto pref = preferred_overlay(rows, {dgp::OverlayKind::Jump, dgp::OverlayKind::None,
                                                   dgp::OverlayKind::RandomWalk, dgp::OverlayKind::Both});
        Collector c;
        for (const auto& r : rows) {
            const auto& d = r.setting.data;
            if (!uses_ref_window(r) || d.overlay != pref.at(eval::source_name(d.source))) continue;
            c.add(source_order(d.source), panel_title(d), std::string(eval::display_name(r.setting.method)),
                  static_cast<double>(d.n), std::to_string(d.n), r.metrics.mse);
        }
        figs.push_back({"mse_by_length", "MSE by series length", "MSE", c.panels()});
    }
    figs.erase(std::remove_if(figs.begin(), figs.end(), [](const Figure& f) { return f.panels.empty(); }),
               figs.end());
    return figs;
}

std::string render_svg(const Figure& fig) {
    if (fig.panels.empty()) {
        throw std::invalid_argument("render_svg: figure has no panels");
    }
    const int cols = static_cast<int>(std::min<std::size_t>(4, fig.panels.size()));
    const int rows = static_cast<int>((fig.panels.size() + static_cast<std::size_t>(cols) - 1) /
                                      static_cast<std::size_t>(cols));
    const double pw = 300, ph = 230, top = 70, left_pad = 55, right_pad = 10, top_pad = 25, bottom_pad = 60;
    const double width = cols * pw + 20;
    const double height = top + rows * ph + 10;

    std::vector<std::string> labels;
    for (const auto& p : fig.panels) {
        for (const auto& s : p.series) {
            if (std::find(labels.begin(), labels.end(), s.label) == labels.end()) labels.push_back(s.label);
        }
    }
    auto colour = [&](const std::string& label) {
        const auto i = static_cast<std::size_t>(std::find(labels.begin(), labels.end(), label) - labels.begin());
        return kPalette[i % kPalette.size()];
    };

    std::ostringstream o;
    o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" font-family=\"sans-serif\" font-size=\"10\">\n";
    o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    o << "<text x=\"10\" y=\"20\" font-size=\"14\">" << esc(fig.title) << "</text>\n";
    double lx = 10;
    for (const auto& l : labels) {
        o << "<rect x=\"" << lx << "\" y=\"34\" width=\"10\" height=\"10\" fill=\"" << colour(l) << "\"/>";
        o << "<text x=\"" << lx + 14 << "\" y=\"43\">" << esc(l) << "</text>\n";
        lx += 24 + 6.0 * static_cast<double>(l.size());
    }

    for (std::size_t k = 0; k < fig.panels.size(); ++k) {
        const Panel& p = fig.panels[k];
        const double ox = 10 + static_cast<double>(k % static_cast<std::size_t>(cols)) * pw;
        const double oy = top + static_cast<double>(k / static_cast<std::size_t>(cols)) * ph;
        const double x0 = ox + left_pad, x1 = ox + pw - right_pad, y0 = oy + top_pad, y1 = oy + ph - bottom_pad;

        std::vector<std::string> xs;
        double lo = std::numeric_limits<double>::infinity(), hi = -lo;
        for (const auto& s : p.series) {
            for (const auto& pt : s.points) {
                if (std::find(xs.begin(), xs.end(), pt.x) == xs.end()) xs.push_back(pt.x);
                lo = std::min(lo, pt.y);
                hi = std::max(hi, pt.y);
            }
        }
        const bool log_scale = lo > 0 && hi / lo > 20;
        auto tr = [&](double v) { return log_scale ? std::log10(v) : v; };
        double a = tr(lo), b = tr(hi);
        if (!(b > a)) {
            a -= 0.5;
            b += 0.5;
        }
        const double pad = 0.05 * (b - a);
        a -= pad;
        b += pad;
        auto ypix = [&](double v) { return y1 - (tr(v) - a) / (b - a) * (y1 - y0); };
        auto xpix = [&](const std::string& x) {
            const auto i = static_cast<double>(std::find(xs.begin(), xs.end(), x) - xs.begin());
            return xs.size() == 1 ? 0.5 * (x0 + x1) : x0 + 10 + i * (x1 - x0 - 20) / static_cast<double>(xs.size() - 1);
        };

        o << "<g>\n<text x=\"" << x0 << "\" y=\"" << oy + 15 << "\" font-size=\"12\">" << esc(p.title) << "</text>\n";
        o << "<rect x=\"" << x0 << "\" y=\"" << y0 << "\" width=\"" << x1 - x0 << "\" height=\"" << y1 - y0
          << "\" fill=\"none\" stroke=\"#999\"/>\n";
        for (int t = 0; t <= 4; ++t) {
            const double tv = a + (b - a) * t / 4.0;
            const double yv = log_scale ? std::pow(10.0, tv) : tv;
            const double yp = y1 - (tv - a) / (b - a) * (y1 - y0);
            o << "<line x1=\"" << x0 - 3 << "\" y1=\"" << yp << "\" x2=\"" << x0 << "\" y2=\"" << yp
              << "\" stroke=\"#999\"/><text x=\"" << x0 - 5 << "\" y=\"" << yp + 3 << "\" text-anchor=\"end\">"
              << fmt(yv) << "</text>\n";
        }
        for (const auto& x : xs) {
            const double xp = xpix(x);
            o << "<text transform=\"translate(" << xp << "," << y1 + 10 << ") rotate(35)\">" << esc(x)
              << "</text>\n";
        }
        o << "<text transform=\"translate(" << ox + 12 << "," << 0.5 * (y0 + y1) << ") rotate(-90)\" "
          << "text-anchor=\"middle\">" << esc(fig.y_label) << (log_scale ? " (log)" : "") << "</text>\n";
        for (const auto& s : p.series) {
            const char* c = colour(s.label);
            if (s.points.size() > 1) {
                o << "<polyline fill=\"none\" stroke=\"" << c << "\" stroke-width=\"1.2\" points=\"";
                for (const auto& pt : s.points) o << xpix(pt.x) << "," << ypix(pt.y) << " ";
                o << "\"/>\n";
            }
            for (const auto& pt : s.points) {
                o << "<circle cx=\"" << xpix(pt.x) << "\" cy=\"" << ypix(pt.y) << "\" r=\"2.5\" fill=\"" << c
                  << "\"><title>" << esc(s.label) << " " << esc(pt.x) << ": " << fmt(pt.y) << "</title></circle>\n";
            }
        }
        o << "</g>\n";
    }
    o << "</svg>\n";
    return o.str();
}

std::vector<fs::path> emit_plots(const std::vector<eval::MetricsRow>& rows, const fs::path& dir) {
    const auto figs = build_figures(rows);
    if (figs.empty()) {
        throw std::invalid_argument("emit_plots: metrics contain no finite MSE values");
    }
    fs::create_directories(dir);
    std::vector<fs::path> out;
    for (const auto& f : figs) {
        const fs::path path = dir / (f.name + ".svg");
        std::ofstream file(path, std::ios::binary);
        if (!file) throw std::runtime_error("cannot write " + path.string());
        file << render_svg(f);
        out.push_back(path);
    }
    return out;
}

}  // namespace tsbench::harness
