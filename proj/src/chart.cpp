#include "emoscreen/chart.hpp"

#include <fstream>
#include <sstream>

#include "emoscreen/numfmt.hpp"

namespace emoscreen {

namespace {

std::string series_title(const OccurrenceSeries& s) {
    return std::string(group_name(s.group)) + "_" + emotion_name(s.emotion);
}

void check_series(const std::vector<OccurrenceSeries>& series) {
    if (series.empty()) throw data_error("occurrence output: no series given");
    for (const auto& s : series) {
        if (s.values.empty()) throw data_error("occurrence output: empty series");
        if (s.values.size() != series.front().values.size()) {
            throw data_error("occurrence output: series lengths differ");
        }
    }
}

}  // namespace

void export_occurrence_csv(const std::vector<OccurrenceSeries>& series, const std::string& path) {
    check_series(series);
    std::ofstream out(path);
    if (!out) throw io_error("cannot create CSV file '" + path + "'");
    out << "frame";
    for (const auto& s : series) out << ',' << series_title(s);
    out << '\n';
    for (std::size_t f = 0; f < series.front().values.size(); ++f) {
        out << (f + 1);
        for (const auto& s : series) out << ',' << format_double(s.values[f]);
        out << '\n';
    }
    if (!out) throw io_error("short write to CSV file '" + path + "'");
}

std::vector<OccurrenceSeries> parse_occurrence_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open CSV file '" + path + "'");
    std::string line;
    if (!std::getline(in, line)) throw data_error("CSV file '" + path + "': empty");
    if (!line.empty() && line.back() == '\r') line.pop_back();

    std::vector<std::string> headers;
    {
        std::stringstream header(line);
        std::string cell;
        while (std::getline(header, cell, ',')) headers.push_back(cell);
    }
    if (headers.empty() || headers[0] != "frame") {
        throw data_error("CSV file '" + path + "': first column must be 'frame'");
    }
    std::vector<OccurrenceSeries> series(headers.size() - 1);
    for (std::size_t i = 1; i < headers.size(); ++i) {
        const auto sep = headers[i].find('_');
        if (sep == std::string::npos) {
            throw data_error("CSV file '" + path + "': column '" + headers[i] +
                             "' is not <group>_<emotion>");
        }
        const std::string group = headers[i].substr(0, sep);
        series[i - 1].group = group == "healthy" ? Group::Healthy : Group::Impaired;
        if (group != "healthy" && group != "impaired") {
            throw data_error("CSV file '" + path + "': unknown group '" + group + "'");
        }
        series[i - 1].emotion = static_cast<int>(emotion_from_name(headers[i].substr(sep + 1)));
    }
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::stringstream row(line);
        std::string cell;
        std::size_t col = 0;
        while (std::getline(row, cell, ',')) {
            if (col > 0) {
                if (col > series.size()) {
                    throw data_error("CSV file '" + path + "': too many cells in a row");
                }
                series[col - 1].values.push_back(parse_double(cell));
            }
            ++col;
        }
        if (col != series.size() + 1) {
            throw data_error("CSV file '" + path + "': short row");
        }
    }
    return series;
}

namespace {

// Fixed palette per emotion index; impaired series are dashed.
constexpr const char* kPalette[kEmotionCount] = {"#e6194b", "#3cb44b", "#4363d8",
                                                 "#f58231", "#911eb4", "#7f7f7f"};

constexpr double kWidth = 800.0;
constexpr double kHeight = 480.0;
constexpr double kLeft = 60.0;
constexpr double kRight = 790.0;
constexpr double kTop = 20.0;
constexpr double kBottom = 430.0;

std::string fmt(double v) { return format_fixed(v, 2); }

}  // namespace

std::string occurrence_svg_text(const std::vector<OccurrenceSeries>& series) {
    check_series(series);
    const std::size_t frames = series.front().values.size();

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 800 480\">\n";
    svg << "<rect x=\"0\" y=\"0\" width=\"800\" height=\"480\" fill=\"#ffffff\"/>\n";

    // Axes.
    svg << "<line x1=\"" << fmt(kLeft) << "\" y1=\"" << fmt(kBottom) << "\" x2=\"" << fmt(kRight)
        << "\" y2=\"" << fmt(kBottom) << "\" stroke=\"#000000\" stroke-width=\"1\"/>\n";
    svg << "<line x1=\"" << fmt(kLeft) << "\" y1=\"" << fmt(kTop) << "\" x2=\"" << fmt(kLeft)
        << "\" y2=\"" << fmt(kBottom) << "\" stroke=\"#000000\" stroke-width=\"1\"/>\n";
    svg << "<text x=\"" << fmt((kLeft + kRight) / 2) << "\" y=\"470\" font-size=\"14\" "
           "text-anchor=\"middle\">frame</text>\n";
    svg << "<text x=\"14\" y=\"" << fmt((kTop + kBottom) / 2)
        << "\" font-size=\"14\" text-anchor=\"middle\" transform=\"rotate(-90 14 "
        << fmt((kTop + kBottom) / 2) << ")\">occurrence</text>\n";

    // Y ticks at 0, 0.25, 0.5, 0.75, 1.
    for (int i = 0; i <= 4; ++i) {
        const double v = i * 0.25;
        const double y = kBottom - v * (kBottom - kTop);
        svg << "<line x1=\"" << fmt(kLeft - 4) << "\" y1=\"" << fmt(y) << "\" x2=\"" << fmt(kLeft)
            << "\" y2=\"" << fmt(y) << "\" stroke=\"#000000\" stroke-width=\"1\"/>\n";
        svg << "<text x=\"" << fmt(kLeft - 8) << "\" y=\"" << fmt(y + 4)
            << "\" font-size=\"11\" text-anchor=\"end\">" << format_fixed(v, 2) << "</text>\n";
    }
    // X ticks: 5 evenly spaced frame labels.
    for (int i = 0; i <= 4; ++i) {
        const std::size_t frame = frames <= 1 ? 1 : 1 + i * (frames - 1) / 4;
        const double x = frames <= 1 ? kLeft
                                     : kLeft + (static_cast<double>(frame - 1) / (frames - 1)) *
                                                   (kRight - kLeft);
        svg << "<line x1=\"" << fmt(x) << "\" y1=\"" << fmt(kBottom) << "\" x2=\"" << fmt(x)
            << "\" y2=\"" << fmt(kBottom + 4) << "\" stroke=\"#000000\" stroke-width=\"1\"/>\n";
        svg << "<text x=\"" << fmt(x) << "\" y=\"" << fmt(kBottom + 18)
            << "\" font-size=\"11\" text-anchor=\"middle\">" << frame << "</text>\n";
    }

    for (const auto& s : series) {
        svg << "<polyline fill=\"none\" stroke=\"" << kPalette[s.emotion]
            << "\" stroke-width=\"1.5\"";
        if (s.group == Group::Impaired) svg << " stroke-dasharray=\"6 3\"";
        svg << " points=\"";
        for (std::size_t f = 0; f < frames; ++f) {
            const double x = frames <= 1 ? kLeft
                                         : kLeft + (static_cast<double>(f) / (frames - 1)) *
                                                       (kRight - kLeft);
            const double y = kBottom - s.values[f] * (kBottom - kTop);
            if (f > 0) svg << ' ';
            svg << fmt(x) << ',' << fmt(y);
        }
        svg << "\"/>\n";
    }

    // Legend, one swatch per series.
    double ly = kTop + 8;
    for (const auto& s : series) {
        svg << "<line x1=\"" << fmt(kRight - 150) << "\" y1=\"" << fmt(ly) << "\" x2=\""
            << fmt(kRight - 120) << "\" y2=\"" << fmt(ly) << "\" stroke=\"" << kPalette[s.emotion]
            << "\" stroke-width=\"2\"";
        if (s.group == Group::Impaired) svg << " stroke-dasharray=\"6 3\"";
        svg << "/>\n";
        svg << "<text x=\"" << fmt(kRight - 114) << "\" y=\"" << fmt(ly + 4)
            << "\" font-size=\"11\">" << series_title(s) << "</text>\n";
        ly += 16;
    }
    svg << "</svg>\n";
    return svg.str();
}

void render_occurrence_svg(const std::vector<OccurrenceSeries>& series, const std::string& path) {
    const std::string text = occurrence_svg_text(series);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw io_error("cannot create SVG file '" + path + "'");
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) throw io_error("short write to SVG file '" + path + "'");
}

}  // namespace emoscreen
