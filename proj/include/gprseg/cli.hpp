#pragma once

namespace gprseg {

/// Entry point of the `gprseg` command-line tool. Parses one subcommand
/// (gen-dataset, train, eval, testbed), runs it, and maps failures to the
/// process exit codes: configuration errors 2, I/O errors 3, solver
/// instability 4, non-finite training loss 5.
int run_cli(int argc, const char* const* argv);

}  // namespace gprseg
