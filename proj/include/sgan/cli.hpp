#pragma once

#include <string>
#include <vector>

namespace sgan::cli {

// Entry point shared by the binary and the tests. Exit codes: 0 success,
// 1 usage/validation error, 2 numeric failure.
int dispatch(int argc, const char* const* argv);
int dispatch(const std::vector<std::string>& args);  // args without argv[0]

}  // namespace sgan::cli
