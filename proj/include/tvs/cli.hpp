#pragma once

namespace tvs {

// Entry point of the `tvs` command-line tool; returns the process exit code.
// Split out of main() so tests can drive subcommands in-process.
int cli_main(int argc, const char* const* argv);

}  // namespace tvs
