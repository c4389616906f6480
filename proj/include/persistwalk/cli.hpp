#pragma once

namespace pw {

// Parses argv and runs one experiment. Returns 0 on success, 2 on usage
// errors, 1 on runtime errors.
int run_cli(int argc, const char* const* argv);

}  // namespace pw
