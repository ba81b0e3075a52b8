#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace glyphlab {

struct ClassRow {
    std::string class_name;
    std::size_t support = 0;
    double accuracy_pct = 0.0;  // full precision; formatting happens at emission
};

// Per-class accuracy table. overall_accuracy is the support-weighted mean of
// the row accuracies (equivalently, total correct / total count * 100) and
// overall_error is its complement to 100.
struct ClassReport {
    std::vector<ClassRow> rows;           // zero-support classes omitted ...
    std::vector<std::string> omitted;     // ... and noted here
    double overall_accuracy = 0.0;
    double overall_error = 0.0;
};

// One training-curve point; epoch indices start at 1 and increase strictly.
struct EpochStat {
    int epoch = 0;
    double loss = 0.0;
    double error_pct = 0.0;
};
using RunHistory = std::vector<EpochStat>;

// Row-major K x K counts: at(true_class, predicted_class).
struct Confusion {
    std::size_t k = 0;
    std::vector<std::size_t> counts;

    explicit Confusion(std::size_t k_ = 0) : k(k_), counts(k_ * k_, 0) {}
    std::size_t& at(std::size_t t, std::size_t p) { return counts[t * k + p]; }
    std::size_t at(std::size_t t, std::size_t p) const { return counts[t * k + p]; }
};

// Throws std::invalid_argument on length mismatch or a label/prediction
// outside [0, class_names.size()).
ClassReport per_class_accuracy(const std::vector<int>& preds, const std::vector<int>& labels,
                               const std::vector<std::string>& class_names);

// Throws std::invalid_argument when a label or prediction is outside [0, k).
Confusion confusion_matrix(const std::vector<int>& preds, const std::vector<int>& labels,
                           std::size_t k);

// Formats a percentage at one decimal and pairs it with the complement of
// the *printed* value, so the two strings always sum to 100.0 as emitted.
std::pair<std::string, std::string> paired_pct(double accuracy_pct);

// The history.csv writer used by emit_report: header `epoch,loss,error_pct`,
// one full-precision row per epoch. Throws DataError when unwritable.
void write_history_csv(const RunHistory& history, const std::filesystem::path& path);

// Writes into dir:
//   per_class.csv       class_name,support,accuracy_pct at 1 decimal, plus an
//                       overall row
//   per_class_full.csv  same rows at full precision, for machines
//   confusion.csv       K x K counts with class-name headers
//   history.csv         epoch,loss,error_pct (header only when history empty)
//   curve.svg           error-vs-epoch line chart (omitted when history empty)
//   summary.txt         paired accuracy/error lines; the two always sum to
//                       100.0 at the printed precision
// Throws DataError when a file cannot be written.
void emit_report(const ClassReport& report, const Confusion& confusion,
                 const RunHistory& history, const std::filesystem::path& dir,
                 const std::string& title);

}  // namespace glyphlab
