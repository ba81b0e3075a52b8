#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "glyphlab/pnm.hpp"
#include "glyphlab/synth.hpp"

using namespace glyphlab;
namespace fs = std::filesystem;

namespace {

std::string bin() {
    const char* b = std::getenv("GLYPHLAB_BIN");
    REQUIRE_MESSAGE(b != nullptr, "GLYPHLAB_BIN must point at the glyphlab binary");
    return b;
}

fs::path sandbox(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / "glyphlab_cli_tests" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    REQUIRE(is.good());
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

// Runs the binary through the shell, returns its exit code, captures
// stdout+stderr into `output` when given.
int run(const fs::path& dir, const std::string& args, std::string* output = nullptr,
        const std::string& env_prefix = "") {
    const fs::path capture = dir / "cli_output.txt";
    const std::string cmd =
        env_prefix + bin() + " " + args + " > " + capture.string() + " 2>&1";
    const int rc = std::system(cmd.c_str());
    REQUIRE(rc != -1);
    REQUIRE(WIFEXITED(rc));
    if (output) *output = slurp(capture);
    return WEXITSTATUS(rc);
}

bool same_bytes(const fs::path& a, const fs::path& b) { return slurp(a) == slurp(b); }

}  // namespace

TEST_CASE("help succeeds and missing or unknown commands fail with code 1") {
    const fs::path dir = sandbox("usage");
    std::string out;
    CHECK(run(dir, "--help", &out) == 0);
    CHECK(out.find("glyphlab") != std::string::npos);
    CHECK(run(dir, "", &out) == 1);
    CHECK(run(dir, "bogus", &out) == 1);
}

TEST_CASE("synth validates its flags and writes a deterministic dataset") {
    const fs::path dir = sandbox("synth");
    std::string out;

    CHECK(run(dir, "synth --writers 0 --out " + (dir / "bad").string(), &out) == 1);
    CHECK(run(dir, "synth --writers 2", &out) == 1);  // --out missing

    const fs::path d1 = dir / "d1", d2 = dir / "d2", d3 = dir / "d3", d4 = dir / "d4";
    CHECK(run(dir, "synth --writers 2 --seed 7 --out " + d1.string(), &out) == 0);
    CHECK(out.find("wrote 100 samples") != std::string::npos);
    for (const char* f : {"images.idx", "labels.idx", "manifest.csv"})
        CHECK(fs::exists(d1 / f));

    // Same seed, same bytes; different seed, different images.
    CHECK(run(dir, "synth --writers 2 --seed 7 --out " + d2.string(), &out) == 0);
    CHECK(same_bytes(d1 / "images.idx", d2 / "images.idx"));
    CHECK(same_bytes(d1 / "labels.idx", d2 / "labels.idx"));
    CHECK(same_bytes(d1 / "manifest.csv", d2 / "manifest.csv"));
    CHECK(run(dir, "synth --writers 2 --seed 8 --out " + d3.string(), &out) == 0);
    CHECK(!same_bytes(d1 / "images.idx", d3 / "images.idx"));

    // The worker-count override must not change the result.
    CHECK(run(dir, "synth --writers 2 --seed 7 --out " + d4.string(), &out,
              "GLYPHLAB_THREADS=2 ") == 0);
    CHECK(same_bytes(d1 / "images.idx", d4 / "images.idx"));
}

TEST_CASE("train and eval round-trip a baseline checkpoint") {
    const fs::path dir = sandbox("roundtrip");
    const fs::path data = dir / "data", runout = dir / "run", rep = dir / "rep";
    std::string out;

    REQUIRE(run(dir, "synth --writers 6 --seed 3 --out " + data.string(), &out) == 0);

    CHECK(run(dir,
              "train --data " + data.string() + " --model baseline:gnb --task digits --seed 3"
              " --out " + runout.string(),
              &out) == 0);
    CHECK(out.find("task digits: 50 train / 10 test") != std::string::npos);
    CHECK(out.find("train: accuracy ") != std::string::npos);
    CHECK(out.find("test: accuracy ") != std::string::npos);
    CHECK(fs::exists(runout / "checkpoint.bin"));
    CHECK(fs::exists(runout / "history.csv"));

    CHECK(run(dir,
              "eval --checkpoint " + (runout / "checkpoint.bin").string() + " --data " +
                  data.string() + " --out " + rep.string(),
              &out) == 0);
    // Checkpoints carry the canonical model name, not the CLI alias.
    CHECK(out.find("baseline:gaussian_nb on digits (all)") != std::string::npos);
    for (const char* f :
         {"per_class.csv", "per_class_full.csv", "confusion.csv", "history.csv", "summary.txt"})
        CHECK(fs::exists(rep / f));
    CHECK(!fs::exists(rep / "curve.svg"));  // baselines have no training curve

    const std::string table = slurp(rep / "per_class.csv");
    CHECK(table.find("class_name,support,accuracy_pct") == 0);
    CHECK(table.find("overall,60,") != std::string::npos);  // 6 writers x 10 digits

    // The held-out slice is the checkpoint's own writer split: 1 of 6 writers.
    const fs::path rep_test = dir / "rep_test";
    CHECK(run(dir,
              "eval --checkpoint " + (runout / "checkpoint.bin").string() + " --data " +
                  data.string() + " --out " + rep_test.string() + " --split-set test",
              &out) == 0);
    CHECK(slurp(rep_test / "summary.txt").find("samples: 10\n") != std::string::npos);
}

TEST_CASE("train rejects bad sources, models, and splits") {
    const fs::path dir = sandbox("train_errors");
    const fs::path data = dir / "data";
    std::string out;
    REQUIRE(run(dir, "synth --writers 2 --seed 1 --out " + data.string(), &out) == 0);

    CHECK(run(dir, "train --data " + data.string() + " --model bogus --out " +
                  (dir / "o1").string(),
              &out) == 1);
    CHECK(out.find("unknown model") != std::string::npos);

    CHECK(run(dir, "train --data " + data.string() + " --synth-writers 4 --model baseline:gnb"
              " --out " + (dir / "o2").string(),
              &out) == 1);
    CHECK(run(dir, "train --model baseline:gnb --out " + (dir / "o3").string(), &out) == 1);
    CHECK(run(dir, "train --data " + (dir / "missing").string() +
                  " --model baseline:gnb --out " + (dir / "o4").string(),
              &out) == 2);
    CHECK(run(dir, "train --data " + data.string() + " --model baseline:gnb --split 1.5"
              " --out " + (dir / "o5").string(),
              &out) == 1);
    // A single writer cannot form a subject-independent split.
    CHECK(run(dir, "train --synth-writers 1 --model baseline:gnb --out " +
                  (dir / "o6").string(),
              &out) == 1);
    CHECK(run(dir, "train --data " + data.string() + " --model ae2 --optimizer bogus --out " +
                  (dir / "o7").string(),
              &out) == 1);
    CHECK(out.find("unknown optimizer") != std::string::npos);
}

TEST_CASE("eval rejects mismatched tasks and unreadable inputs") {
    const fs::path dir = sandbox("eval_errors");
    const fs::path data = dir / "data", runout = dir / "run";
    std::string out;
    REQUIRE(run(dir, "synth --writers 4 --seed 5 --out " + data.string(), &out) == 0);
    REQUIRE(run(dir,
                "train --data " + data.string() + " --model baseline:knn --task digits"
                " --out " + runout.string(),
                &out) == 0);
    const std::string ck = (runout / "checkpoint.bin").string();

    // A 10-class digits checkpoint cannot score the 50-class combined task.
    CHECK(run(dir, "eval --checkpoint " + ck + " --data " + data.string() +
                  " --task combined --out " + (dir / "r1").string(),
              &out) == 1);
    CHECK(out.find("class-count mismatch") != std::string::npos);

    CHECK(run(dir, "eval --checkpoint " + ck + " --data " + data.string() +
                  " --split-set sometimes --out " + (dir / "r2").string(),
              &out) == 1);
    CHECK(run(dir, "eval --checkpoint " + (dir / "nope.bin").string() + " --data " +
                  data.string() + " --out " + (dir / "r3").string(),
              &out) == 2);
    CHECK(run(dir, "eval --checkpoint " + ck + " --data " + (dir / "missing").string() +
                  " --out " + (dir / "r4").string(),
              &out) == 2);

    // Garbage bytes are a corrupt checkpoint, not a usage error.
    const fs::path junk = dir / "junk.bin";
    std::ofstream(junk, std::ios::binary) << "not a checkpoint";
    CHECK(run(dir, "eval --checkpoint " + junk.string() + " --data " + data.string() +
                  " --out " + (dir / "r5").string(),
              &out) == 2);
}

TEST_CASE("a json config supplies defaults and explicit flags win") {
    const fs::path dir = sandbox("config");
    std::string out;

    const fs::path cfg = dir / "synth.json";
    std::ofstream(cfg) << "{\"writers\": 2, \"seed\": 7, \"out\": \""
                       << (dir / "from_cfg").string() << "\"}";
    CHECK(run(dir, "synth --config " + cfg.string(), &out) == 0);
    CHECK(out.find("wrote 100 samples") != std::string::npos);
    CHECK(fs::exists(dir / "from_cfg" / "images.idx"));

    // The explicit flag overrides the config value.
    CHECK(run(dir, "synth --config " + cfg.string() + " --writers 3 --out " +
                  (dir / "override").string(),
              &out) == 0);
    CHECK(out.find("wrote 150 samples (3 writers") != std::string::npos);

    // Hyphenated keys may be spelled with underscores.
    const fs::path tcfg = dir / "train.json";
    std::ofstream(tcfg) << "{\"synth_writers\": 4, \"model\": \"baseline:gnb\","
                        << " \"task\": \"digits\", \"out\": \""
                        << (dir / "trained").string() << "\"}";
    CHECK(run(dir, "train --config " + tcfg.string(), &out) == 0);
    CHECK(fs::exists(dir / "trained" / "checkpoint.bin"));

    CHECK(run(dir, "synth --config " + (dir / "absent.json").string(), &out) == 1);

    const fs::path broken = dir / "broken.json";
    std::ofstream(broken) << "{\"writers\": ";
    CHECK(run(dir, "synth --config " + broken.string(), &out) == 1);

    const fs::path arr = dir / "array.json";
    std::ofstream(arr) << "[1, 2, 3]";
    CHECK(run(dir, "synth --config " + arr.string(), &out) == 1);

    const fs::path typed = dir / "typed.json";
    std::ofstream(typed) << "{\"writers\": \"two\", \"out\": \"x\"}";
    CHECK(run(dir, "synth --config " + typed.string(), &out) == 1);
    CHECK(out.find("must be an integer") != std::string::npos);
}

TEST_CASE("ingest segments synthetic form scans back into a dataset") {
    const fs::path dir = sandbox("ingest");
    const fs::path scans = dir / "scans", data = dir / "data";
    fs::create_directories(scans);
    std::string out;

    // Forms rendered by the generator itself: writer id in the file name.
    write_pgm(scans / "3.pgm", to_gray(synth_form(11, 3)));
    write_pgm(scans / "7.pgm", to_gray(synth_form(11, 7)));
    CHECK(run(dir, "ingest --scans " + scans.string() + " --out " + data.string(), &out) == 0);
    CHECK(out.find("ingested 100 samples from 2 forms") != std::string::npos);
    CHECK(fs::exists(data / "images.idx"));
    CHECK(fs::exists(data / "ingest_log.txt"));

    // The ingested dataset is immediately trainable.
    CHECK(run(dir,
              "train --data " + data.string() + " --model baseline:knn --task digits --out " +
                  (dir / "run").string(),
              &out) == 0);

    // An empty scan directory is a data error.
    const fs::path empty = dir / "empty";
    fs::create_directories(empty);
    CHECK(run(dir, "ingest --scans " + empty.string() + " --out " + (dir / "d2").string(),
              &out) == 2);
    CHECK(out.find("no forms found") != std::string::npos);
    CHECK(run(dir, "ingest --scans " + (dir / "missing").string() + " --out " +
                  (dir / "d3").string(),
              &out) == 2);
}

TEST_CASE("ingest fails atomically when any form is unreadable") {
    const fs::path dir = sandbox("ingest_fail");
    const fs::path scans = dir / "scans", data = dir / "data";
    fs::create_directories(scans);
    std::string out;

    write_pgm(scans / "1.pgm", to_gray(synth_form(13, 1)));
    std::ofstream(scans / "2.pgm", std::ios::binary) << "P5 garbage";
    CHECK(run(dir, "ingest --scans " + scans.string() + " --out " + data.string(), &out) == 2);
    CHECK(out.find("1 of 2 forms failed") != std::string::npos);
    CHECK(!fs::exists(data / "images.idx"));  // nothing is written on failure

    // A non-numeric file name cannot carry a writer id.
    const fs::path scans2 = dir / "scans2";
    fs::create_directories(scans2);
    write_pgm(scans2 / "formA.pgm", to_gray(synth_form(13, 2)));
    CHECK(run(dir, "ingest --scans " + scans2.string() + " --out " + (dir / "d2").string(),
              &out) == 2);
    CHECK(out.find("not a numeric writer id") != std::string::npos);
}
