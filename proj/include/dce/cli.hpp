#pragma once

namespace dce {

/// Command-line entry point (run, analyze, sweep, baseline-seed-rotation,
/// export-plot-data). Exit codes: 0 success, 2 config error, 3 backend
/// failure, 4 incomplete-input analysis, 1 anything else.
int cli_main(int argc, char** argv);

}  // namespace dce
