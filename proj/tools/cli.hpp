#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "seampack/corpus.hpp"

namespace seampack::cli {

enum ExitCode : int { kOk = 0, kRuntimeError = 1, kUsageError = 2 };

/// Fully resolved description of one job; validated before any file is read.
struct JobManifest {
    std::string command;
    PackingConfig config;
    std::filesystem::path input;
    std::filesystem::path output;
    SequenceFormat format = SequenceFormat::jsonl;
    std::optional<std::filesystem::path> stats;
};

nlohmann::json to_json(const JobManifest& m);

/// Entry point shared by the executable and the tests.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace seampack::cli
