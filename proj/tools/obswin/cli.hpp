#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "obswin/error.hpp"
#include "obswin/serialize.hpp"

namespace obswin::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kFailure = 2 };

/// Bad command line or unreadable/invalid input file (exit 1).
class UsageError : public Error {
 public:
  using Error::Error;
};

/// Output directory or file could not be written (exit 2).
class IoError : public Error {
 public:
  using Error::Error;
};

struct Artifact {
  std::string name;
  std::string content;
};

std::string sha256_hex(std::string_view bytes);

/// Writes each artifact into `dir` (created if missing) plus index.json
/// listing name, byte count and SHA-256 of every file. Returns the index.
/// Throws PreconditionError for an empty list and IoError on write failure.
Json report_bundle(const std::filesystem::path& dir, const std::vector<Artifact>& artifacts);

/// Entry point behind the obswin executable; args excludes the program name.
/// Reports go to `out`, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace obswin::cli
