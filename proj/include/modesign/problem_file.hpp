#pragma once

#include <filesystem>
#include <string>

#include "modesign/solve.hpp"

namespace modesign {

/// Parses a JSON problem description. Errors are ProblemFileError with the
/// offending field path (or line and column for malformed JSON).
MultiObjectiveProblem parse_problem(const std::string& text);
MultiObjectiveProblem load_problem(const std::filesystem::path& path);

}  // namespace modesign
