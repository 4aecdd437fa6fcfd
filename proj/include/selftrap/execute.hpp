#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "selftrap/run_spec.hpp"

namespace selftrap::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitNumerical = 2;

/// Version of the CSV column layouts, recorded in meta.json.
inline constexpr int kSchemaVersion = 1;

struct RunResult {
  int exit_code = kExitOk;
  std::string message;  // error text when exit_code != 0
  std::vector<std::filesystem::path> files;
};

/// Runs the command and writes its outputs, resolved.json and meta.json into
/// spec.output.dir. Never throws for simulation failures: usage errors map to
/// exit code 1, truncation / NaN / step-size failures to 2. Progress goes to log.
RunResult execute(const RunSpec& spec, std::ostream& log);

/// Column headers of the CSV files.
std::vector<std::string> csv_columns(const std::string& file);

}  // namespace selftrap::cli
