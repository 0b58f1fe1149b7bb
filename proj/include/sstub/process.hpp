#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace sstub {

struct ProcessResult {
    int exit_code = -1;
    std::string out;
    std::string err;
};

struct ProcessOptions {
    std::filesystem::path cwd;
    // Added to (or replacing entries of) the parent environment.
    std::vector<std::pair<std::string, std::string>> env;
    std::string input;
};

// Runs argv[0] (looked up in PATH) to completion, capturing both output streams.
// Throws ToolError if the program cannot be started.
ProcessResult run_process(const std::vector<std::string>& argv, const ProcessOptions& options = {});

} // namespace sstub
