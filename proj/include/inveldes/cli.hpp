#pragma once

namespace inveldes {

/// Command-line entry point (subcommands: forward, inverse, iterate,
/// heat-init, check). Exit codes: 0 success, 1 configuration or usage error,
/// 2 no convergence, 3 output I/O failure.
int cli_main(int argc, const char* const* argv);

}  // namespace inveldes
