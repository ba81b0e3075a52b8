#include "glyphlab/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <stdexcept>

#include "glyphlab/util.hpp"

namespace glyphlab {

const std::array<std::string, kNumClasses>& class_names() {
    static const std::array<std::string, kNumClasses> names = {
        "0 (۰)",         "1 (۱)",      "2 (۲)",     "3 (۳)",      "4 (۴)",
        "5 (۵)",         "6 (۶)",      "7 (۷)",     "8 (۸)",      "9 (۹)",
        "Alif (ا)",      "Mad (آ)",    "Baa (ب)",   "Paa (پ)",    "Taa (ٹ)",
        "Tey (ت)",       "Seey (ث)",   "Jeem (ج)",  "Cheey (چ)",  "Haa (ح)",
        "Khaa (خ)",      "Daal (د)",   "Zaal (ذ)",  "Dhal (ڈ)",   "Raa (ر)",
        "Zaa (ز)",       "Zaa2 (ژ)",   "Rhaa (ڑ)",  "Seen (س)",   "Sheen (ش)",
        "Swad (ص)",      "Zwad (ض)",   "Twa (ط)",   "Zwaa (ظ)",   "Ayn (ع)",
        "Ghain (غ)",     "Faa (ف)",    "Qaaf (ق)",  "Kaaf (ک)",   "Gaaf (گ)",
        "Laam (ل)",      "Meem (م)",   "Noon (ن)",  "Gunna (ں)",  "Wow (و)",
        "Haaw (ھ)",      "Haaw2 (ہ)",  "Hamza (ء)", "ChotiYeh (ی)", "BariYeh (ے)"};
    return names;
}

void validate_dataset(const LabeledDataset& ds) {
    for (const auto& s : ds.samples) {
        if (s.label < 0 || s.label >= static_cast<int>(kNumClasses))
            throw std::invalid_argument("dataset: label out of range");
        if (s.image.shape() != std::vector<std::size_t>{28, 28})
            throw std::invalid_argument("dataset: image is not 28x28");
        for (double v : s.image.values())
            if (!(v >= 0.0 && v <= 1.0))
                throw std::invalid_argument("dataset: pixel outside [0,1]");
    }
}

std::pair<LabeledDataset, LabeledDataset> split_subject_independent(const LabeledDataset& ds,
                                                                    const SplitSpec& spec) {
    if (!(spec.train_fraction > 0.0 && spec.train_fraction < 1.0))
        throw std::invalid_argument("split: train_fraction must be in (0,1)");

    std::set<int> writer_set;
    for (const auto& s : ds.samples) writer_set.insert(s.writer_id);
    if (writer_set.size() < 2)
        throw std::invalid_argument("split: need at least 2 distinct writers");

    std::vector<int> writers(writer_set.begin(), writer_set.end());
    std::mt19937_64 rng(mix_seed(spec.seed, 0x53504C4954ULL));
    seeded_shuffle(writers, rng);

    std::size_t n_train = static_cast<std::size_t>(
        std::floor(spec.train_fraction * static_cast<double>(writers.size())));
    n_train = std::clamp<std::size_t>(n_train, 1, writers.size() - 1);

    std::set<int> train_writers(writers.begin(), writers.begin() + static_cast<long>(n_train));

    std::pair<LabeledDataset, LabeledDataset> out;
    out.first.class_names = ds.class_names;
    out.second.class_names = ds.class_names;
    for (const auto& s : ds.samples)
        (train_writers.count(s.writer_id) ? out.first : out.second).samples.push_back(s);
    return out;
}

Task parse_task(const std::string& name) {
    if (name == "digits") return Task::kDigits;
    if (name == "characters") return Task::kCharacters;
    if (name == "combined") return Task::kCombined;
    throw std::invalid_argument("unknown task '" + name + "' (digits|characters|combined)");
}

std::string task_name(Task task) {
    switch (task) {
        case Task::kDigits: return "digits";
        case Task::kCharacters: return "characters";
        case Task::kCombined: return "combined";
    }
    return "?";
}

std::size_t task_num_classes(Task task) {
    switch (task) {
        case Task::kDigits: return kNumDigits;
        case Task::kCharacters: return kNumClasses - kNumDigits;
        case Task::kCombined: return kNumClasses;
    }
    return 0;
}

std::vector<std::string> task_class_names(Task task) {
    const auto& all = class_names();
    switch (task) {
        case Task::kDigits: return {all.begin(), all.begin() + kNumDigits};
        case Task::kCharacters: return {all.begin() + kNumDigits, all.end()};
        case Task::kCombined: return {all.begin(), all.end()};
    }
    return {};
}

LabeledDataset filter_task(const LabeledDataset& ds, Task task) {
    const int lo = task == Task::kCharacters ? static_cast<int>(kNumDigits) : 0;
    const int hi = task == Task::kDigits ? static_cast<int>(kNumDigits)
                                         : static_cast<int>(kNumClasses);
    LabeledDataset out;
    out.class_names = task_class_names(task);
    for (const auto& s : ds.samples) {
        if (s.label >= lo && s.label < hi) {
            out.samples.push_back(s);
            out.samples.back().label = s.label - lo;
        }
    }
    return out;
}

Tensor to_matrix(const LabeledDataset& ds) {
    if (ds.samples.empty()) throw std::invalid_argument("to_matrix: empty dataset");
    Tensor m({ds.samples.size(), kImageDim});
    for (std::size_t i = 0; i < ds.samples.size(); ++i) {
        const auto& img = ds.samples[i].image.values();
        std::copy(img.begin(), img.end(), m.data() + i * kImageDim);
    }
    return m;
}

std::vector<int> labels_of(const LabeledDataset& ds) {
    std::vector<int> out;
    out.reserve(ds.samples.size());
    for (const auto& s : ds.samples) out.push_back(s.label);
    return out;
}

}  // namespace glyphlab
