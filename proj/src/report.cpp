#include "glyphlab/report.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "glyphlab/error.hpp"

namespace glyphlab {

namespace {

std::string fmt1(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.1f", v);
    return buf;
}

std::string fmt_full(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::ofstream open_out(const std::filesystem::path& p) {
    std::ofstream os(p, std::ios::binary);  // binary: LF line endings everywhere
    if (!os) throw DataError("cannot write " + p.string());
    return os;
}

}  // namespace

// The complement is computed from the *rounded* value so the printed pair
// sums to exactly 100.0.
std::pair<std::string, std::string> paired_pct(double accuracy_pct) {
    const std::string acc = fmt1(accuracy_pct);
    const std::string err = fmt1(100.0 - std::stod(acc));
    return {acc, err};
}

void write_history_csv(const RunHistory& history, const std::filesystem::path& path) {
    auto os = open_out(path);
    os << "epoch,loss,error_pct\n";
    for (const EpochStat& e : history)
        os << e.epoch << ',' << fmt_full(e.loss) << ',' << fmt_full(e.error_pct) << '\n';
}

ClassReport per_class_accuracy(const std::vector<int>& preds, const std::vector<int>& labels,
                               const std::vector<std::string>& class_names) {
    if (preds.size() != labels.size())
        throw std::invalid_argument("per_class_accuracy: preds/labels length mismatch");
    const int k = static_cast<int>(class_names.size());
    std::vector<std::size_t> support(class_names.size(), 0), correct(class_names.size(), 0);
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] < 0 || labels[i] >= k)
            throw std::invalid_argument("per_class_accuracy: unknown label " +
                                        std::to_string(labels[i]));
        if (preds[i] < 0 || preds[i] >= k)
            throw std::invalid_argument("per_class_accuracy: unknown prediction " +
                                        std::to_string(preds[i]));
        ++support[static_cast<std::size_t>(labels[i])];
        if (preds[i] == labels[i]) ++correct[static_cast<std::size_t>(labels[i])];
    }

    ClassReport report;
    std::size_t total = 0, total_correct = 0;
    for (std::size_t c = 0; c < class_names.size(); ++c) {
        if (support[c] == 0) {
            report.omitted.push_back(class_names[c]);
            continue;
        }
        report.rows.push_back({class_names[c], support[c],
                               100.0 * static_cast<double>(correct[c]) /
                                   static_cast<double>(support[c])});
        total += support[c];
        total_correct += correct[c];
    }
    report.overall_accuracy =
        total == 0 ? 0.0
                   : 100.0 * static_cast<double>(total_correct) / static_cast<double>(total);
    report.overall_error = 100.0 - report.overall_accuracy;
    return report;
}

Confusion confusion_matrix(const std::vector<int>& preds, const std::vector<int>& labels,
                           std::size_t k) {
    if (preds.size() != labels.size())
        throw std::invalid_argument("confusion_matrix: preds/labels length mismatch");
    Confusion m(k);
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] < 0 || static_cast<std::size_t>(labels[i]) >= k)
            throw std::invalid_argument("confusion_matrix: label out of range");
        if (preds[i] < 0 || static_cast<std::size_t>(preds[i]) >= k)
            throw std::invalid_argument("confusion_matrix: prediction out of range");
        ++m.at(static_cast<std::size_t>(labels[i]), static_cast<std::size_t>(preds[i]));
    }
    return m;
}

void emit_report(const ClassReport& report, const Confusion& confusion,
                 const RunHistory& history, const std::filesystem::path& dir,
                 const std::string& title) {
    std::filesystem::create_directories(dir);

    std::size_t total_support = 0;
    for (const ClassRow& r : report.rows) total_support += r.support;

    {
        auto os = open_out(dir / "per_class.csv");
        os << "class_name,support,accuracy_pct\n";
        for (const ClassRow& r : report.rows)
            os << r.class_name << ',' << r.support << ',' << fmt1(r.accuracy_pct) << '\n';
        os << "overall," << total_support << ',' << fmt1(report.overall_accuracy) << '\n';
        for (const std::string& name : report.omitted)
            os << "# zero-support class omitted: " << name << '\n';
    }
    {
        auto os = open_out(dir / "per_class_full.csv");
        os << "class_name,support,accuracy_pct\n";
        for (const ClassRow& r : report.rows)
            os << r.class_name << ',' << r.support << ',' << fmt_full(r.accuracy_pct) << '\n';
        os << "overall," << total_support << ',' << fmt_full(report.overall_accuracy) << '\n';
    }
    {
        auto os = open_out(dir / "confusion.csv");
        os << "true_class\\predicted";
        for (std::size_t p = 0; p < confusion.k; ++p) os << ",c" << p;
        os << '\n';
        for (std::size_t t = 0; t < confusion.k; ++t) {
            os << 'c' << t;
            for (std::size_t p = 0; p < confusion.k; ++p) os << ',' << confusion.at(t, p);
            os << '\n';
        }
    }
    write_history_csv(history, dir / "history.csv");
    if (!history.empty()) {
        constexpr double kW = 640, kH = 400, kMargin = 56;
        double emin = history.front().epoch, emax = history.back().epoch;
        double ymax = 0.0;
        for (const EpochStat& e : history) ymax = std::max(ymax, e.error_pct);
        if (ymax <= 0.0) ymax = 1.0;
        const double xspan = std::max(1.0, emax - emin);
        auto px = [&](double epoch) {
            return kMargin + (epoch - emin) / xspan * (kW - 2 * kMargin);
        };
        auto py = [&](double err) { return kH - kMargin - err / ymax * (kH - 2 * kMargin); };

        auto os = open_out(dir / "curve.svg");
        os << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 " << kW << ' ' << kH
           << "\" font-family=\"sans-serif\" font-size=\"13\">\n"
           << "<rect width=\"" << kW << "\" height=\"" << kH << "\" fill=\"white\"/>\n"
           << "<text x=\"" << kW / 2 << "\" y=\"24\" text-anchor=\"middle\">" << title
           << "</text>\n"
           << "<line x1=\"" << kMargin << "\" y1=\"" << kH - kMargin << "\" x2=\""
           << kW - kMargin << "\" y2=\"" << kH - kMargin << "\" stroke=\"black\"/>\n"
           << "<line x1=\"" << kMargin << "\" y1=\"" << kMargin << "\" x2=\"" << kMargin
           << "\" y2=\"" << kH - kMargin << "\" stroke=\"black\"/>\n"
           << "<text x=\"" << kW / 2 << "\" y=\"" << kH - 12
           << "\" text-anchor=\"middle\">epoch</text>\n"
           << "<text x=\"16\" y=\"" << kH / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
           << kH / 2 << ")\">error rate (%)</text>\n"
           << "<text x=\"" << kMargin << "\" y=\"" << kH - kMargin + 18
           << "\" text-anchor=\"middle\">" << history.front().epoch << "</text>\n"
           << "<text x=\"" << kW - kMargin << "\" y=\"" << kH - kMargin + 18
           << "\" text-anchor=\"middle\">" << history.back().epoch << "</text>\n"
           << "<text x=\"" << kMargin - 6 << "\" y=\"" << kH - kMargin + 4
           << "\" text-anchor=\"end\">0</text>\n"
           << "<text x=\"" << kMargin - 6 << "\" y=\"" << kMargin + 4
           << "\" text-anchor=\"end\">" << fmt1(ymax) << "</text>\n"
           << "<polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"2\" points=\"";
        for (std::size_t i = 0; i < history.size(); ++i) {
            if (i) os << ' ';
            os << px(history[i].epoch) << ',' << py(history[i].error_pct);
        }
        os << "\"/>\n</svg>\n";
    }
    {
        auto os = open_out(dir / "summary.txt");
        const auto [acc, err] = paired_pct(report.overall_accuracy);
        os << title << '\n'
           << "samples: " << total_support << '\n'
           << "overall accuracy: " << acc << "%\n"
           << "overall error: " << err << "%\n";
        for (const std::string& name : report.omitted)
            os << "note: zero-support class omitted: " << name << '\n';
    }
}

}  // namespace glyphlab
