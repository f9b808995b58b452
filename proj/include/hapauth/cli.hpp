#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace hapauth::cli {

// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kFailure = 1;     // gradcheck mismatch, unexpected errors
inline constexpr int kUsageError = 2;  // bad flags, invalid config, unwritable output
inline constexpr int kDataError = 3;   // unreadable/invalid data, coverage gaps, missing checkpoints

// Environment variable naming the default output root.
inline constexpr const char* kOutputRootEnv = "HAPAUTH_OUTPUT_ROOT";

// args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, char** argv);

}  // namespace hapauth::cli
