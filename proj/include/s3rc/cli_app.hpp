#pragma once

#include <ostream>

namespace s3rc {

// Full command-line front end (fit / predict / bench / synth).  Returns the
// process exit code: 0 success, 2 input or configuration error, 3 numerical
// failure.  Streams are injected so tests can capture output in-process.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace s3rc
