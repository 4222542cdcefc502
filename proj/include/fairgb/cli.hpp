#pragma once

namespace fairgb {

// Full command-line entry point: parses flags, loads or generates the
// dataset, runs the experiment (or the eta sweep), writes report files, and
// prints a summary row. Returns a process exit code.
int cli_main(int argc, char** argv);

}  // namespace fairgb
