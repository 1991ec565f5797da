#pragma once

namespace funcount {

/// Entry point of the `funcount` tool. Returns 0 on success, 2 on usage
/// errors and 1 when a module reports an error (printed to stderr as
/// "error: <module>: <message>").
int run_cli(int argc, const char* const* argv);

}  // namespace funcount
