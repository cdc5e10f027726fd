#include "flowdist/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace flowdist {

namespace {

std::string fmt(double v, const char* spec = "%.2f") {
    char buf[64];
    std::snprintf(buf, sizeof(buf), spec, v);
    return buf;
}

std::string escape(const std::string& text) {
    std::string out;
    out.reserve(text.size());
    for (char c : text) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out.push_back(c);
        }
    }
    return out;
}

class Canvas {
public:
    Canvas(double width, double height) : width_(width), height_(height) {}

    void line(double x1, double y1, double x2, double y2, const std::string& stroke, double w = 1.0) {
        body_ << "<line x1=\"" << fmt(x1) << "\" y1=\"" << fmt(y1) << "\" x2=\"" << fmt(x2) << "\" y2=\""
              << fmt(y2) << "\" stroke=\"" << stroke << "\" stroke-width=\"" << fmt(w) << "\"/>\n";
    }
    void rect(double x, double y, double w, double h, const std::string& fill,
              const std::string& stroke = "none") {
        body_ << "<rect x=\"" << fmt(x) << "\" y=\"" << fmt(y) << "\" width=\"" << fmt(w) << "\" height=\""
              << fmt(h) << "\" fill=\"" << fill << "\" stroke=\"" << stroke << "\"/>\n";
    }
    void circle(double cx, double cy, double r, const std::string& fill,
                const std::string& stroke = "none") {
        body_ << "<circle cx=\"" << fmt(cx) << "\" cy=\"" << fmt(cy) << "\" r=\"" << fmt(r) << "\" fill=\""
              << fill << "\" stroke=\"" << stroke << "\"/>\n";
    }
    void text(double x, double y, const std::string& content, double size = 11,
              const std::string& anchor = "start", const std::string& fill = "#000000",
              const std::string& cls = "") {
        body_ << "<text x=\"" << fmt(x) << "\" y=\"" << fmt(y) << "\" font-size=\"" << fmt(size)
              << "\" font-family=\"sans-serif\" text-anchor=\"" << anchor << "\" fill=\"" << fill << "\"";
        if (!cls.empty()) body_ << " class=\"" << cls << "\"";
        body_ << ">" << escape(content) << "</text>\n";
    }
    void path(const std::string& d, const std::string& stroke, double w = 1.5) {
        body_ << "<path d=\"" << d << "\" fill=\"none\" stroke=\"" << stroke << "\" stroke-width=\""
              << fmt(w) << "\"/>\n";
    }

    std::string finish() const {
        std::ostringstream out;
        out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt(width_) << "\" height=\""
            << fmt(height_) << "\" viewBox=\"0 0 " << fmt(width_) << " " << fmt(height_) << "\">\n"
            << "<rect x=\"0\" y=\"0\" width=\"" << fmt(width_) << "\" height=\"" << fmt(height_)
            << "\" fill=\"#ffffff\"/>\n"
            << body_.str() << "</svg>\n";
        return out.str();
    }

private:
    double width_, height_;
    std::ostringstream body_;
};

// linear or log10 value-to-pixel mapping
struct Scale {
    double lo = 0, hi = 1;
    double px_lo = 0, px_hi = 1;
    bool log = false;

    double operator()(double v) const {
        double a = v, lo_v = lo, hi_v = hi;
        if (log) {
            a = std::log10(std::max(v, 1e-300));
            lo_v = std::log10(std::max(lo, 1e-300));
            hi_v = std::log10(std::max(hi, 1e-300));
        }
        if (hi_v == lo_v) return (px_lo + px_hi) / 2;
        return px_lo + (a - lo_v) / (hi_v - lo_v) * (px_hi - px_lo);
    }
};

std::string heat_color(double t) {
    // white -> steel blue -> dark blue ramp
    t = std::clamp(t, 0.0, 1.0);
    const auto lerp = [](double a, double b, double f) { return a + (b - a) * f; };
    double r, g, b;
    if (t < 0.5) {
        const double f = t / 0.5;
        r = lerp(255, 106, f);
        g = lerp(255, 162, f);
        b = lerp(255, 201, f);
    } else {
        const double f = (t - 0.5) / 0.5;
        r = lerp(106, 17, f);
        g = lerp(162, 48, f);
        b = lerp(201, 112, f);
    }
    char buf[8];
    std::snprintf(buf, sizeof(buf), "#%02x%02x%02x", static_cast<int>(r), static_cast<int>(g),
                  static_cast<int>(b));
    return buf;
}

bool want_log(LogAxis mode, double min_positive, double max_value, bool has_nonpositive) {
    if (mode == LogAxis::on) return !has_nonpositive || min_positive > 0;
    if (mode == LogAxis::off) return false;
    if (min_positive <= 0 || max_value <= 0) return false;
    return max_value / min_positive > 1000.0;
}

}  // namespace

std::vector<std::pair<double, double>> ecdf_step_points(const EmpiricalDistribution& dist) {
    std::vector<std::pair<double, double>> points;
    points.reserve(dist.support().size());
    for (std::size_t i = 0; i < dist.support().size(); ++i)
        points.emplace_back(dist.support()[i], dist.cumulative()[i]);
    return points;
}

std::string dataset_color(DatasetKind kind, std::size_t index_within_kind) {
    static const char* kSynthetic[] = {"#c0392b", "#e67e22", "#922b21", "#d98880", "#a93226"};
    static const char* kReal[] = {"#1a5276", "#2e86c1", "#5dade2", "#21618c", "#7fb3d5"};
    if (kind == DatasetKind::synthetic) return kSynthetic[index_within_kind % 5];
    return kReal[index_within_kind % 5];
}

std::string render_heatmap(const DistanceMatrix& matrix) {
    const std::size_t n = matrix.labels.size();
    if (n == 0) throw FlowdistError("render_heatmap: empty matrix");

    const double cell = 72, left = 120, top = 70, legend = 30;
    Canvas canvas(left + cell * static_cast<double>(n) + 20,
                  top + cell * static_cast<double>(n) + legend + 20);
    canvas.text(left, 24, "Wasserstein distance: " + matrix.feature, 14, "start");

    double max_v = 0;
    for (const auto& row : matrix.entries)
        for (const double v : row) max_v = std::max(max_v, v);

    for (std::size_t i = 0; i < n; ++i) {
        canvas.text(left - 8, top + cell * (static_cast<double>(i) + 0.5) + 4, matrix.labels[i], 11, "end");
        canvas.text(left + cell * (static_cast<double>(i) + 0.5), top - 10, matrix.labels[i], 11, "middle");
        for (std::size_t j = 0; j < n; ++j) {
            const double v = matrix.entries[i][j];
            const double t = max_v > 0 ? v / max_v : 0.0;
            const double x = left + cell * static_cast<double>(j);
            const double y = top + cell * static_cast<double>(i);
            canvas.rect(x, y, cell, cell, heat_color(t), "#cccccc");
            canvas.text(x + cell / 2, y + cell / 2 + 4, fmt(v), 12, "middle",
                        t > 0.55 ? "#ffffff" : "#000000", "cell");
        }
    }
    return canvas.finish();
}

std::string render_scatter(const ScatterCoordinates& scatter) {
    const double size = 420, margin = 70;
    Canvas canvas(size + margin * 2, size + margin * 2);

    double max_v = 0;
    for (const auto& c : scatter.coords) max_v = std::max({max_v, c[0], c[1]});
    if (max_v <= 0) max_v = 1;

    Scale sx{0, max_v * 1.1, margin, margin + size, false};
    Scale sy{0, max_v * 1.1, margin + size, margin, false};

    canvas.line(margin, margin + size, margin + size, margin + size, "#000000");
    canvas.line(margin, margin, margin, margin + size, "#000000");
    canvas.text(margin + size / 2, margin + size + 40, "averaged distance to " + scatter.ref1, 12, "middle");
    canvas.text(18, margin + size / 2, "averaged distance to " + scatter.ref2, 12, "middle");

    for (std::size_t i = 0; i < scatter.labels.size(); ++i) {
        const double x = sx(scatter.coords[i][0]);
        const double y = sy(scatter.coords[i][1]);
        canvas.circle(x, y, 5, "#2e86c1", "#1a5276");
        canvas.text(x + 8, y - 8, scatter.labels[i], 11);
        canvas.text(x + 8, y + 6, "(" + fmt(scatter.coords[i][0]) + ", " + fmt(scatter.coords[i][1]) + ")",
                    10, "start", "#444444", "coord");
    }
    return canvas.finish();
}

std::string render_ecdf(const std::string& title, const std::string& unit,
                        const std::vector<EcdfSeries>& series, LogAxis log_x) {
    if (series.empty()) throw FlowdistError("render_ecdf: no series");

    double lo = 0, hi = 0, min_pos = 0;
    bool any = false, has_nonpositive = false;
    for (const auto& s : series) {
        for (const double v : s.dist->support()) {
            if (!any) {
                lo = hi = v;
                any = true;
            }
            lo = std::min(lo, v);
            hi = std::max(hi, v);
            if (v > 0) min_pos = min_pos == 0 ? v : std::min(min_pos, v);
            if (v <= 0) has_nonpositive = true;
        }
    }
    const bool log = want_log(log_x, min_pos, hi, has_nonpositive) && !has_nonpositive;

    const double w = 560, h = 360, ml = 70, mr = 30, mt = 50, mb = 50;
    Canvas canvas(w, h);
    canvas.text(ml, 24, title, 14);

    Scale sx{lo, hi > lo ? hi : lo + 1, ml, w - mr, log};
    Scale sy{0, 1, h - mb, mt};

    canvas.line(ml, h - mb, w - mr, h - mb, "#000000");
    canvas.line(ml, mt, ml, h - mb, "#000000");
    for (int tick = 0; tick <= 4; ++tick) {
        const double p = static_cast<double>(tick) / 4.0;
        canvas.text(ml - 8, sy(p) + 4, fmt(p), 10, "end");
        canvas.line(ml - 4, sy(p), ml, sy(p), "#000000");
    }
    canvas.text(ml - 8, sy(0.5) - 18, "ECDF", 10, "end");
    canvas.text((ml + w - mr) / 2, h - 14, unit + (log ? " (log scale)" : ""), 11, "middle");
    canvas.text(ml, h - mb + 16, fmt(lo, "%.6g"), 9);
    canvas.text(w - mr, h - mb + 16, fmt(hi, "%.6g"), 9, "end");

    double ly = mt + 6;
    for (const auto& s : series) {
        auto steps = ecdf_step_points(*s.dist);
        // thin long paths for rendering; statistics and JSON keep full fidelity
        if (steps.size() > 2048) {
            std::vector<std::pair<double, double>> thinned;
            thinned.reserve(2048);
            const double stride = static_cast<double>(steps.size() - 1) / 2047.0;
            for (int i = 0; i < 2048; ++i)
                thinned.push_back(steps[static_cast<std::size_t>(std::llround(i * stride))]);
            steps = std::move(thinned);
        }
        std::ostringstream d;
        d << "M " << fmt(sx(steps.front().first)) << " " << fmt(sy(0));
        double prev_y = sy(0);
        for (const auto& [x, c] : steps) {
            d << " L " << fmt(sx(x)) << " " << fmt(prev_y);
            prev_y = sy(c);
            d << " L " << fmt(sx(x)) << " " << fmt(prev_y);
        }
        d << " L " << fmt(sx(hi)) << " " << fmt(prev_y);
        canvas.path(d.str(), s.color, 1.6);

        canvas.line(w - mr - 120, ly, w - mr - 100, ly, s.color, 3);
        canvas.text(w - mr - 94, ly + 4, s.label, 10);
        ly += 16;
    }
    return canvas.finish();
}

std::string render_boxplots(const std::string& title, const std::string& unit,
                            const std::vector<BoxplotEntry>& entries, LogAxis log_y) {
    if (entries.empty()) throw FlowdistError("render_boxplots: no entries");

    double lo = entries.front().summary.whisker_low;
    double hi = entries.front().summary.whisker_high;
    double min_pos = 0;
    bool has_nonpositive = false;
    for (const auto& e : entries) {
        lo = std::min(lo, e.summary.whisker_low);
        hi = std::max(hi, e.summary.whisker_high);
        for (const double v : {e.summary.whisker_low, e.summary.q1, e.summary.median, e.summary.mean}) {
            if (v > 0) min_pos = min_pos == 0 ? v : std::min(min_pos, v);
            if (v <= 0) has_nonpositive = true;
        }
    }
    const bool log = want_log(log_y, min_pos, hi, has_nonpositive) && !has_nonpositive;

    const double slot = 90, ml = 80, mt = 50, mb = 70;
    const double w = ml + slot * static_cast<double>(entries.size()) + 30;
    const double h = 420;
    Canvas canvas(w, h);
    canvas.text(ml, 24, title, 14);

    const double span = hi - lo;
    Scale sy{lo - (log ? 0 : span * 0.05), hi + span * 0.05, h - mb, mt, log};
    if (log) sy.lo = std::max(min_pos * 0.8, 1e-300);

    canvas.line(ml - 10, h - mb, w - 20, h - mb, "#000000");
    canvas.text(ml - 14, sy(hi) + 4, fmt(hi, "%.6g"), 9, "end");
    canvas.text(ml - 14, sy(log ? sy.lo : lo) + 4, fmt(log ? sy.lo : lo, "%.6g"), 9, "end");
    canvas.text(20, mt - 10, unit + (log ? " (log scale)" : ""), 10);

    for (std::size_t i = 0; i < entries.size(); ++i) {
        const auto& s = entries[i].summary;
        const double cx = ml + slot * (static_cast<double>(i) + 0.5);
        const double half = 26;

        canvas.line(cx, sy(s.whisker_low), cx, sy(s.q1), "#555555");
        canvas.line(cx, sy(s.q3), cx, sy(s.whisker_high), "#555555");
        canvas.line(cx - half / 2, sy(s.whisker_low), cx + half / 2, sy(s.whisker_low), "#555555");
        canvas.line(cx - half / 2, sy(s.whisker_high), cx + half / 2, sy(s.whisker_high), "#555555");

        const double box_top = sy(s.q3), box_bot = sy(s.q1);
        canvas.rect(cx - half, box_top, half * 2, std::max(1.0, box_bot - box_top), entries[i].color + "33",
                    entries[i].color);
        canvas.line(cx - half, sy(s.median), cx + half, sy(s.median), entries[i].color, 2);
        canvas.circle(cx, sy(s.median), 4, "none", "#c0392b");

        // mean cross with a +-std bar
        canvas.line(cx - 5, sy(s.mean) - 5, cx + 5, sy(s.mean) + 5, "#c0392b", 1.5);
        canvas.line(cx - 5, sy(s.mean) + 5, cx + 5, sy(s.mean) - 5, "#c0392b", 1.5);
        const auto clamp_y = [&](double v) { return std::clamp(sy(v), mt, h - mb); };
        canvas.line(cx + half + 6, clamp_y(s.mean - s.std_dev), cx + half + 6,
                    clamp_y(s.mean + s.std_dev), "#c0392b");

        canvas.text(cx, h - mb + 18, entries[i].label, 10, "middle");
    }
    return canvas.finish();
}

std::string render_embedding(const EmbeddingResult& result,
                             const std::vector<std::pair<std::string, DatasetKind>>& dataset_kinds) {
    if (result.points.empty()) throw FlowdistError("render_embedding: no points");

    double lo_x = result.points.front()[0], hi_x = lo_x;
    double lo_y = result.points.front()[1], hi_y = lo_y;
    for (const auto& p : result.points) {
        lo_x = std::min(lo_x, p[0]);
        hi_x = std::max(hi_x, p[0]);
        lo_y = std::min(lo_y, p[1]);
        hi_y = std::max(hi_y, p[1]);
    }

    const double size = 440, margin = 70;
    Canvas canvas(size + margin * 2 + 140, size + margin * 2);
    canvas.text(margin, 30, "embedding: " + std::string(embed_method_name(result.method)), 14);

    Scale sx{lo_x, hi_x > lo_x ? hi_x : lo_x + 1, margin, margin + size, false};
    Scale sy{lo_y, hi_y > lo_y ? hi_y : lo_y + 1, margin + size, margin, false};
    canvas.line(margin, margin + size, margin + size, margin + size, "#000000");
    canvas.line(margin, margin, margin, margin + size, "#000000");
    canvas.text(margin + size / 2, margin + size + 36, "component 1", 11, "middle");
    canvas.text(24, margin + size / 2, "component 2", 11, "middle");

    // color per dataset, synthetic reds / real-world blues
    std::vector<std::string> palette;
    std::size_t n_syn = 0, n_real = 0;
    for (const auto& [name, kind] : dataset_kinds)
        palette.push_back(kind == DatasetKind::synthetic ? dataset_color(kind, n_syn++)
                                                         : dataset_color(kind, n_real++));
    const auto color_of = [&](const std::string& label) -> std::string {
        for (std::size_t i = 0; i < dataset_kinds.size(); ++i)
            if (dataset_kinds[i].first == label) return palette[i];
        return "#666666";
    };

    for (std::size_t i = 0; i < result.points.size(); ++i)
        canvas.circle(sx(result.points[i][0]), sy(result.points[i][1]), 2.2,
                      color_of(result.labels[i]) + "aa");

    double ly = margin + 10;
    for (std::size_t i = 0; i < dataset_kinds.size(); ++i) {
        canvas.circle(margin + size + 24, ly, 4, palette[i]);
        canvas.text(margin + size + 34, ly + 4, dataset_kinds[i].first, 11);
        ly += 18;
    }
    return canvas.finish();
}

}  // namespace flowdist
