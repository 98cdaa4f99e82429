#pragma once

namespace hiercloud::cli {

// Full command-line front end. Returns the process exit code: 0 success,
// 1 data/validation failure, 2 usage error.
int run(int argc, const char* const* argv);

}  // namespace hiercloud::cli
