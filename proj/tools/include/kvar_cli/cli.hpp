#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace kvar::cli {

/// Process exit codes.
enum ExitCode : int { kOk = 0, kUsage = 2, kIo = 3 };

/// Runs the `kvar` command line. `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Expands a k-grid: "a:b:x2" doubles from a up to b, "a:b:+s" steps by s,
/// anything else is a comma-separated list. Throws ParameterError.
std::vector<std::size_t> parse_k_grid(std::string_view text);

/// 17 significant digits, enough to read back the same double.
std::string format_double(double value);

/// Folds `--config FILE` into `args`: every `key = value` line of the file
/// becomes `--key value` unless the flag is already present. Keys listed in
/// `flags` take no value and are added only when the value is truthy.
std::vector<std::string> merge_config(const std::vector<std::string>& args, const std::vector<std::string>& flags);

/// Everything needed to rerun a command.
struct RunManifest {
    std::string command;
    /// Canonical argument list, replayable through run().
    std::vector<std::string> arguments;
    nlohmann::json parameters = nlohmann::json::object();
    std::uint64_t master_seed = 0;
    std::string version;
    std::string started_at;
    std::vector<std::string> outputs;
};

nlohmann::json to_json(const RunManifest& m);
/// Throws FormatError when fields are missing or mistyped.
RunManifest manifest_from_json(const nlohmann::json& j);
void write_manifest(const RunManifest& m, const std::filesystem::path& path);
RunManifest read_manifest(const std::filesystem::path& path);

/// Current UTC time as an ISO 8601 string.
std::string utc_timestamp();

}  // namespace kvar::cli
