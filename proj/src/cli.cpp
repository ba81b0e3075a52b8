#include "glyphlab/cli.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "glyphlab/autoencoder.hpp"
#include "glyphlab/baselines.hpp"
#include "glyphlab/checkpoint.hpp"
#include "glyphlab/cnn.hpp"
#include "glyphlab/dataset.hpp"
#include "glyphlab/error.hpp"
#include "glyphlab/idx.hpp"
#include "glyphlab/image.hpp"
#include "glyphlab/pnm.hpp"
#include "glyphlab/presets.hpp"
#include "glyphlab/report.hpp"
#include "glyphlab/segment.hpp"
#include "glyphlab/synth.hpp"

namespace fs = std::filesystem;

namespace glyphlab {

namespace {

// ---------------------------------------------------------------------------
// JSON config: values act as defaults, explicit flags win.

const nlohmann::json* cfg_find(const nlohmann::json& cfg, std::string key) {
    if (auto it = cfg.find(key); it != cfg.end()) return &*it;
    std::replace(key.begin(), key.end(), '-', '_');
    if (auto it = cfg.find(key); it != cfg.end()) return &*it;
    return nullptr;
}

void cfg_str(const nlohmann::json& cfg, const std::string& key, std::string& var) {
    if (const auto* j = cfg_find(cfg, key)) {
        if (!j->is_string())
            throw std::invalid_argument("config: '" + key + "' must be a string");
        var = j->get<std::string>();
    }
}

void cfg_int(const nlohmann::json& cfg, const std::string& key, int& var) {
    if (const auto* j = cfg_find(cfg, key)) {
        if (!j->is_number_integer())
            throw std::invalid_argument("config: '" + key + "' must be an integer");
        var = j->get<int>();
    }
}

void cfg_u64(const nlohmann::json& cfg, const std::string& key, std::uint64_t& var) {
    if (const auto* j = cfg_find(cfg, key)) {
        if (!j->is_number_integer() ||
            (!j->is_number_unsigned() && j->get<std::int64_t>() < 0))
            throw std::invalid_argument("config: '" + key + "' must be a nonnegative integer");
        var = j->get<std::uint64_t>();
    }
}

void cfg_dbl(const nlohmann::json& cfg, const std::string& key, double& var) {
    if (const auto* j = cfg_find(cfg, key)) {
        if (!j->is_number())
            throw std::invalid_argument("config: '" + key + "' must be a number");
        var = j->get<double>();
    }
}

nlohmann::json load_config(int argc, const char* const* argv) {
    std::string path;
    for (int i = 1; i < argc; ++i) {
        const std::string arg = argv[i];
        if (arg == "--config" && i + 1 < argc)
            path = argv[i + 1];
        else if (arg.rfind("--config=", 0) == 0)
            path = arg.substr(9);
    }
    if (path.empty()) return nlohmann::json::object();

    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::invalid_argument("config: cannot open " + path);
    nlohmann::json cfg;
    try {
        in >> cfg;
    } catch (const nlohmann::json::parse_error& e) {
        throw std::invalid_argument(std::string("config: ") + e.what());
    }
    if (!cfg.is_object()) throw std::invalid_argument("config: top level must be a JSON object");
    return cfg;
}

// ---------------------------------------------------------------------------
// Shared helpers.

Optimizer parse_optimizer(const std::string& name) {
    if (name == "scg") return Optimizer::kScg;
    if (name == "gd") return Optimizer::kGd;
    throw std::invalid_argument("unknown optimizer '" + name + "' (scg|gd)");
}

void require(bool ok, const std::string& msg) {
    if (!ok) throw std::invalid_argument(msg);
}

void print_overall(std::ostream& os, const std::string& what, double accuracy_pct) {
    const auto [acc, err] = paired_pct(accuracy_pct);
    os << what << ": accuracy " << acc << "%  error " << err << "%\n";
}

double overall_accuracy(const std::vector<int>& preds, const std::vector<int>& labels,
                        const std::vector<std::string>& names) {
    return per_class_accuracy(preds, labels, names).overall_accuracy;
}

// Trains one preset on prepared matrices. `valid`/`valid_labels` (optional)
// feed the CNN's per-epoch error curve only; nothing else sees them.
Checkpoint fit_model(const std::string& model, const Tensor& X, const std::vector<int>& y,
                     std::size_t num_classes, std::uint64_t seed, Optimizer opt,
                     const Tensor* valid, const std::vector<int>* valid_labels) {
    Checkpoint ck;
    ck.model = model;
    ck.seed = seed;

    if (model == "ae2" || model == "ae3") {
        const AePreset preset = ae_preset(model == "ae2" ? 2 : 3);
        std::cout << "[" << model << "] pretraining " << preset.layers.size()
                  << " sparse layers" << std::endl;
        AEStack stack = pretrain_stack(X, preset.layers, seed, opt);
        std::cout << "[" << model << "] training softmax head" << std::endl;
        const Tensor feats = encode_stack(stack, X);
        stack.head = train_softmax_head(feats, y, num_classes, preset.head_iterations,
                                        preset.head_l2, opt, preset.supervised_learning_rate);
        std::cout << "[" << model << "] fine-tuning" << std::endl;
        ck.history = fine_tune(stack, X, y, preset.fine_tune_iterations, preset.fine_tune_l2,
                               opt, preset.supervised_learning_rate);
        ck.kind = CheckpointKind::kAutoencoder;
        ck.ae = std::move(stack);
        return ck;
    }

    if (model == "cnn2" || model == "cnn3") {
        const CnnSpec spec = cnn_preset(model == "cnn2" ? 2 : 3, num_classes);
        const CnnTrainOptions opts = cnn_train_preset(seed);
        std::cout << "[" << model << "] training: " << opts.epochs << " epochs, batch "
                  << opts.batch_size << ", rmsprop" << std::endl;
        auto [params, history] = train_cnn(spec, X, y, valid, valid_labels, opts);
        ck.kind = CheckpointKind::kCnn;
        ck.cnn_spec = spec;
        ck.cnn_params = std::move(params);
        ck.history = std::move(history);
        return ck;
    }

    std::string name = model;
    if (name.rfind("baseline:", 0) == 0) name = name.substr(9);
    BaselineKind kind;
    try {
        kind = parse_baseline(name);
    } catch (const std::invalid_argument&) {
        throw std::invalid_argument("unknown model '" + model +
                                    "' (ae2|ae3|cnn2|cnn3|baseline:<kind>)");
    }
    BaselineOptions bopts;
    bopts.seed = seed;
    std::cout << "[baseline:" << baseline_name(kind) << "] training" << std::endl;
    ck.kind = CheckpointKind::kBaseline;
    ck.model = "baseline:" + baseline_name(kind);
    ck.baseline = train_baseline(kind, X, y, num_classes, bopts);
    return ck;
}

// ---------------------------------------------------------------------------
// synth

struct SynthArgs {
    int writers = 0;
    std::uint64_t seed = 0;
    std::string out;
};

int cmd_synth(const SynthArgs& a) {
    require(a.writers >= 1, "synth: --writers must be >= 1");
    require(!a.out.empty(), "synth: --out is required");
    const LabeledDataset ds = synth_generate(a.writers, a.seed);
    store_dataset(ds, a.out);
    std::cout << "wrote " << ds.size() << " samples (" << a.writers << " writers x "
              << kNumClasses << " classes, seed " << a.seed << ") to " << a.out << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// ingest

struct IngestArgs {
    std::string scans;
    std::string out;
};

int cmd_ingest(const IngestArgs& a) {
    require(!a.scans.empty(), "ingest: --scans is required");
    require(!a.out.empty(), "ingest: --out is required");
    if (!fs::is_directory(a.scans)) throw DataError("ingest: not a directory: " + a.scans);

    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(a.scans)) {
        if (!entry.is_regular_file()) continue;
        const auto ext = entry.path().extension().string();
        if (ext == ".pgm" || ext == ".ppm") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    if (files.empty()) throw DataError("ingest: no forms found in " + a.scans);

    LabeledDataset ds;
    {
        const auto& names = class_names();
        ds.class_names.assign(names.begin(), names.end());
    }
    std::vector<std::string> log_lines;
    std::vector<std::string> failures;

    for (const fs::path& file : files) {
        const std::string stem = file.stem().string();
        int writer_id = 0;
        const auto res = std::from_chars(stem.data(), stem.data() + stem.size(), writer_id);
        if (res.ec != std::errc{} || res.ptr != stem.data() + stem.size()) {
            failures.push_back(file.string() + ": file name is not a numeric writer id");
            continue;
        }

        std::vector<SegmentedCell> cells;
        try {
            const GrayImage scan = read_scan(file);
            const BinaryImage form = binarize(scan, ThresholdMethod::kOtsu);
            cells = segment_form(form);
        } catch (const DataError& e) {
            failures.push_back(file.string() + ": " + e.what());
            continue;
        }

        std::size_t kept = 0;
        std::vector<std::string> rejects;
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (cells[i].discard) {
                rejects.push_back("cell " + std::to_string(i) + ": " + cells[i].reason);
                continue;
            }
            Tensor image;
            try {
                image = normalize_cell(cells[i].image);
            } catch (const std::invalid_argument&) {
                rejects.push_back("cell " + std::to_string(i) + ": blank after margin");
                continue;
            }
            ds.samples.push_back({std::move(image), static_cast<int>(i), writer_id});
            ++kept;
        }

        std::string line = file.filename().string() + ": kept " + std::to_string(kept) +
                           ", discarded " + std::to_string(rejects.size());
        for (const std::string& r : rejects) line += "; " + r;
        log_lines.push_back(std::move(line));
    }

    if (!failures.empty()) {
        for (const std::string& f : failures) std::cerr << "ingest: " << f << "\n";
        throw DataError("ingest: " + std::to_string(failures.size()) + " of " +
                        std::to_string(files.size()) + " forms failed");
    }

    store_dataset(ds, a.out);
    {
        std::ofstream log(fs::path(a.out) / "ingest_log.txt", std::ios::binary);
        if (!log) throw DataError("ingest: cannot write log in " + a.out);
        for (const std::string& line : log_lines) log << line << "\n";
        log << "total: " << ds.size() << " samples from " << files.size() << " forms\n";
    }
    std::cout << "ingested " << ds.size() << " samples from " << files.size() << " forms into "
              << a.out << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// train

struct TrainArgs {
    std::string data;
    int synth_writers = -1;  // -1 = not given
    std::string model;
    std::string task = "combined";
    std::string optimizer = "scg";
    std::string out;
    std::uint64_t seed = 0;
    double split = 0.85;
};

int cmd_train(const TrainArgs& a) {
    require(!a.out.empty(), "train: --out is required");
    require(!a.model.empty(), "train: --model is required");
    const bool have_data = !a.data.empty();
    const bool have_synth = a.synth_writers >= 0;
    require(have_data != have_synth, "train: exactly one of --data and --synth-writers");
    if (have_synth) require(a.synth_writers >= 1, "train: --synth-writers must be >= 1");
    require(a.split > 0.0 && a.split < 1.0, "train: --split must lie in (0,1)");

    const Task task = parse_task(a.task);
    const Optimizer opt = parse_optimizer(a.optimizer);

    LabeledDataset full =
        have_data ? load_dataset(a.data) : synth_generate(a.synth_writers, a.seed);
    validate_dataset(full);
    const LabeledDataset filtered = filter_task(full, task);
    if (filtered.samples.empty())
        throw DataError("train: dataset holds no samples for task '" + task_name(task) + "'");

    const auto [train_ds, test_ds] = split_subject_independent(filtered, {a.split, a.seed});
    const Tensor X = to_matrix(train_ds);
    const std::vector<int> y = labels_of(train_ds);
    const std::size_t num_classes = task_num_classes(task);
    std::cout << "task " << task_name(task) << ": " << train_ds.size() << " train / "
              << test_ds.size() << " test samples, " << num_classes << " classes" << std::endl;

    Tensor X_test;
    std::vector<int> y_test;
    const bool have_test = !test_ds.samples.empty();
    if (have_test) {
        X_test = to_matrix(test_ds);
        y_test = labels_of(test_ds);
    }

    Checkpoint ck = fit_model(a.model, X, y, num_classes, a.seed, opt,
                              have_test ? &X_test : nullptr, have_test ? &y_test : nullptr);
    ck.task = task_name(task);
    ck.split_fraction = a.split;
    ck.optimizer = a.optimizer;

    fs::create_directories(a.out);
    const fs::path ck_path = fs::path(a.out) / "checkpoint.bin";
    save_checkpoint(ck, ck_path);
    write_history_csv(ck.history, fs::path(a.out) / "history.csv");

    const auto names = task_class_names(task);
    print_overall(std::cout, "train", overall_accuracy(checkpoint_predict(ck, X), y, names));
    if (have_test)
        print_overall(std::cout, "test",
                      overall_accuracy(checkpoint_predict(ck, X_test), y_test, names));
    std::cout << "checkpoint: " << ck_path.string() << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// eval

struct EvalArgs {
    std::string checkpoint;
    std::string data;
    std::string out;
    std::string task;                // empty = the checkpoint's task
    std::string split_set = "all";   // all | train | test
};

int cmd_eval(const EvalArgs& a) {
    require(!a.checkpoint.empty(), "eval: --checkpoint is required");
    require(!a.data.empty(), "eval: --data is required");
    require(!a.out.empty(), "eval: --out is required");
    require(a.split_set == "all" || a.split_set == "train" || a.split_set == "test",
            "eval: --split-set must be all|train|test");

    const Checkpoint ck = load_checkpoint(a.checkpoint);
    const Task task = parse_task(a.task.empty() ? ck.task : a.task);
    if (task_num_classes(task) != ck.num_classes())
        throw std::invalid_argument(
            "eval: class-count mismatch: checkpoint '" + ck.model + "' has " +
            std::to_string(ck.num_classes()) + " classes but task '" + task_name(task) +
            "' has " + std::to_string(task_num_classes(task)));

    LabeledDataset full = load_dataset(a.data);
    validate_dataset(full);
    LabeledDataset selected = filter_task(full, task);
    if (a.split_set != "all") {
        auto [train_ds, test_ds] =
            split_subject_independent(selected, {ck.split_fraction, ck.seed});
        selected = a.split_set == "train" ? std::move(train_ds) : std::move(test_ds);
    }
    if (selected.samples.empty())
        throw DataError("eval: no samples for task '" + task_name(task) + "' in split '" +
                        a.split_set + "'");

    const Tensor X = to_matrix(selected);
    const std::vector<int> y = labels_of(selected);
    const std::vector<int> preds = checkpoint_predict(ck, X);

    const auto names = task_class_names(task);
    const ClassReport report = per_class_accuracy(preds, y, names);
    const Confusion confusion = confusion_matrix(preds, y, task_num_classes(task));
    emit_report(report, confusion, ck.history, a.out,
                ck.model + " / " + task_name(task) + " / " + a.split_set);

    print_overall(std::cout, ck.model + " on " + task_name(task) + " (" + a.split_set + ")",
                  report.overall_accuracy);
    std::cout << "report: " << a.out << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// repro

struct ReproArgs {
    int writers = 40;
    std::uint64_t seed = 42;
    std::string out;
};

int cmd_repro(const ReproArgs& a) {
    require(!a.out.empty(), "repro: --out is required");
    require(a.writers >= 2, "repro: --writers must be >= 2");

    const char* kTasks[] = {"digits", "characters", "combined"};
    const char* kModels[] = {"ae2", "cnn2", "ae3", "cnn3"};

    std::cout << "generating " << a.writers << " synthetic writers (seed " << a.seed << ")"
              << std::endl;
    const LabeledDataset full = synth_generate(a.writers, a.seed);

    fs::create_directories(a.out);
    std::ofstream csv(fs::path(a.out) / "repro_summary.csv", std::ios::binary);
    if (!csv) throw DataError("repro: cannot write in " + a.out);
    csv << "task,model,test_accuracy_pct,test_error_pct\n";

    // accuracy[task][model]
    double accuracy[3][4] = {};
    for (int t = 0; t < 3; ++t) {
        const Task task = parse_task(kTasks[t]);
        const LabeledDataset filtered = filter_task(full, task);
        const auto [train_ds, test_ds] = split_subject_independent(filtered, {0.85, a.seed});
        const Tensor X = to_matrix(train_ds);
        const std::vector<int> y = labels_of(train_ds);
        const Tensor X_test = to_matrix(test_ds);
        const std::vector<int> y_test = labels_of(test_ds);
        const auto names = task_class_names(task);
        std::cout << "== task " << kTasks[t] << ": " << train_ds.size() << " train / "
                  << test_ds.size() << " test" << std::endl;

        for (int m = 0; m < 4; ++m) {
            Checkpoint ck = fit_model(kModels[m], X, y, task_num_classes(task), a.seed,
                                      Optimizer::kScg, &X_test, &y_test);
            ck.task = task_name(task);
            accuracy[t][m] = overall_accuracy(checkpoint_predict(ck, X_test), y_test, names);
            const auto [acc, err] = paired_pct(accuracy[t][m]);
            csv << kTasks[t] << ',' << kModels[m] << ',' << acc << ',' << err << '\n';
            print_overall(std::cout, std::string(kModels[m]) + " test", accuracy[t][m]);
        }
    }

    std::ofstream txt(fs::path(a.out) / "repro_summary.txt", std::ios::binary);
    if (!txt) throw DataError("repro: cannot write in " + a.out);
    txt << "Summary of results (test accuracy % / error %), " << a.writers
        << " synthetic writers, seed " << a.seed << "\n\n";
    char buf[256];
    std::snprintf(buf, sizeof buf, "%-20s %15s %15s %15s %15s\n", "Task", "AE (2 layers)",
                  "CNN (2 layers)", "AE (3 layers)", "CNN (3 layers)");
    txt << buf;
    for (int t = 0; t < 3; ++t) {
        std::string cells[4];
        for (int m = 0; m < 4; ++m) {
            const auto [acc, err] = paired_pct(accuracy[t][m]);
            cells[m] = acc + " / " + err;
        }
        std::snprintf(buf, sizeof buf, "%-20s %15s %15s %15s %15s\n", kTasks[t],
                      cells[0].c_str(), cells[1].c_str(), cells[2].c_str(), cells[3].c_str());
        txt << buf;
    }
    std::cout << "summary: " << (fs::path(a.out) / "repro_summary.txt").string() << "\n";
    return 0;
}

}  // namespace

// ---------------------------------------------------------------------------

int run_cli(int argc, const char* const* argv) {
    try {
        const nlohmann::json cfg = load_config(argc, argv);
        std::string config_path;  // parsed by CLI11 only so the flag is accepted

        CLI::App app{"handwritten Urdu glyph recognition laboratory"};
        app.name("glyphlab");
        app.require_subcommand(1);
        app.add_option("--config", config_path, "JSON config file; explicit flags win");

        SynthArgs synth;
        cfg_int(cfg, "writers", synth.writers);
        cfg_u64(cfg, "seed", synth.seed);
        cfg_str(cfg, "out", synth.out);
        auto* synth_cmd = app.add_subcommand("synth", "generate a synthetic dataset");
        synth_cmd->add_option("--writers", synth.writers, "number of synthetic writers");
        synth_cmd->add_option("--seed", synth.seed, "master seed");
        synth_cmd->add_option("--out", synth.out, "output dataset directory");
        synth_cmd->add_option("--config", config_path, "JSON config file; explicit flags win");

        IngestArgs ingest;
        cfg_str(cfg, "scans", ingest.scans);
        cfg_str(cfg, "out", ingest.out);
        auto* ingest_cmd = app.add_subcommand("ingest", "segment scanned forms into a dataset");
        ingest_cmd->add_option("--scans", ingest.scans,
                               "directory of <writer_id>.pgm|.ppm form scans");
        ingest_cmd->add_option("--out", ingest.out, "output dataset directory");
        ingest_cmd->add_option("--config", config_path, "JSON config file; explicit flags win");

        TrainArgs train;
        cfg_str(cfg, "data", train.data);
        cfg_int(cfg, "synth-writers", train.synth_writers);
        cfg_str(cfg, "model", train.model);
        cfg_str(cfg, "task", train.task);
        cfg_str(cfg, "optimizer", train.optimizer);
        cfg_str(cfg, "out", train.out);
        cfg_u64(cfg, "seed", train.seed);
        cfg_dbl(cfg, "split", train.split);
        auto* train_cmd = app.add_subcommand("train", "train a model and write a checkpoint");
        train_cmd->add_option("--data", train.data, "dataset directory (from synth/ingest)");
        train_cmd->add_option("--synth-writers", train.synth_writers,
                              "generate this many synthetic writers instead of --data");
        train_cmd->add_option("--model", train.model,
                              "ae2|ae3|cnn2|cnn3|baseline:<logreg|knn|gnb|tree|svm|mlp>");
        train_cmd->add_option("--task", train.task, "digits|characters|combined");
        train_cmd->add_option("--optimizer", train.optimizer, "scg|gd (autoencoders)");
        train_cmd->add_option("--out", train.out, "output directory");
        train_cmd->add_option("--seed", train.seed, "master seed");
        train_cmd->add_option("--split", train.split, "train fraction of writers, in (0,1)");
        train_cmd->add_option("--config", config_path, "JSON config file; explicit flags win");

        EvalArgs eval;
        cfg_str(cfg, "checkpoint", eval.checkpoint);
        cfg_str(cfg, "data", eval.data);
        cfg_str(cfg, "out", eval.out);
        cfg_str(cfg, "task", eval.task);
        cfg_str(cfg, "split-set", eval.split_set);
        auto* eval_cmd = app.add_subcommand("eval", "evaluate a checkpoint and emit reports");
        eval_cmd->add_option("--checkpoint", eval.checkpoint, "checkpoint.bin path");
        eval_cmd->add_option("--data", eval.data, "dataset directory");
        eval_cmd->add_option("--out", eval.out, "report directory");
        eval_cmd->add_option("--task", eval.task,
                             "digits|characters|combined (default: the checkpoint's task)");
        eval_cmd->add_option("--split-set", eval.split_set,
                             "all|train|test (splits with the checkpoint's seed/fraction)");
        eval_cmd->add_option("--config", config_path, "JSON config file; explicit flags win");

        ReproArgs repro;
        cfg_int(cfg, "writers", repro.writers);
        cfg_u64(cfg, "seed", repro.seed);
        cfg_str(cfg, "out", repro.out);
        auto* repro_cmd =
            app.add_subcommand("repro", "run every autoencoder/CNN preset on all three tasks");
        repro_cmd->add_option("--writers", repro.writers, "number of synthetic writers");
        repro_cmd->add_option("--seed", repro.seed, "master seed");
        repro_cmd->add_option("--out", repro.out, "output directory");
        repro_cmd->add_option("--config", config_path, "JSON config file; explicit flags win");

        try {
            app.parse(argc, argv);
        } catch (const CLI::CallForHelp& e) {
            return app.exit(e);
        } catch (const CLI::ParseError& e) {
            app.exit(e);
            return 1;
        }

        if (synth_cmd->parsed()) return cmd_synth(synth);
        if (ingest_cmd->parsed()) return cmd_ingest(ingest);
        if (train_cmd->parsed()) return cmd_train(train);
        if (eval_cmd->parsed()) return cmd_eval(eval);
        if (repro_cmd->parsed()) return cmd_repro(repro);
        throw std::invalid_argument("no command given");
    } catch (const DataError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const NumericalError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const fs::filesystem_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n"
                  << "run 'glyphlab --help' for usage\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace glyphlab
