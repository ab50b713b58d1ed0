#pragma once

namespace cola {

// Entry point behind the cola binary: subcommands run, sweep, certify,
// reference, validate-config. Returns the process exit code.
int cli_main(int argc, char** argv);

}  // namespace cola
