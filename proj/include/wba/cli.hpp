#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace wba::cli {

inline constexpr const char* kVersion = "wba-lab 0.1.0";

enum ExitCode { kOk = 0, kFailure = 1, kConfigError = 2, kPrecisionExhausted = 3, kUncertifiable = 4 };

// args excludes the program name. Output goes to --out when given, else to out.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, char** argv);

// key=value lines ('#' comments, optional quotes, [sections] ignored) as --key value pairs.
std::vector<std::pair<std::string, std::string>> read_config_file(const std::string& path);

}  // namespace wba::cli
