#pragma once

namespace glyphlab {

// Full command-line surface of the `glyphlab` binary:
//
//   glyphlab ingest --scans DIR --out DIR
//   glyphlab synth  --writers N [--seed S] --out DIR
//   glyphlab train  (--data DIR | --synth-writers N) --model NAME --out DIR
//                   [--task T] [--seed S] [--split F] [--optimizer scg|gd]
//   glyphlab eval   --checkpoint FILE --data DIR --out DIR
//                   [--task T] [--split-set all|train|test]
//   glyphlab repro  [--writers N] [--seed S] --out DIR
//
// Any command also accepts `--config FILE` (JSON); explicit flags win over
// config values. Exit codes: 0 success, 1 usage/config error, 2 missing or
// corrupt data, 3 numerical failure.
int run_cli(int argc, const char* const* argv);

}  // namespace glyphlab
